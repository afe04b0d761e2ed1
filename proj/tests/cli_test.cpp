#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "seamcam/bundle.hpp"
#include "seamcam/cli.hpp"
#include "seamcam/service.hpp"
#include "seamcam/study_io.hpp"
#include "seamcam/synth.hpp"
#include "test_util.hpp"

using namespace seamcam;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "seamcam");
    std::vector<char *> argv;
    for (auto &a : args) {
        argv.push_back(a.data());
    }
    argv.push_back(nullptr);
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = cli::run(static_cast<int>(args.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const std::string &text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("analyze mcnemar prints the statistic") {
    const auto r = run_cli({"analyze", "mcnemar", "--n01", "833", "--n10", "259"});
    CHECK(r.code == 0);
    CHECK(r.out.find("chi2=300.67") != std::string::npos);
    CHECK(r.out.find("p_value=2.35683e-67") != std::string::npos);

    const auto degenerate = run_cli({"analyze", "mcnemar", "--n01", "0", "--n10", "0"});
    CHECK(degenerate.code == 1);
    CHECK(degenerate.err.rfind("error: code=DegenerateTable", 0) == 0);

    CHECK(run_cli({"analyze", "mcnemar", "--n01", "3"}).code == 2);
}

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    const auto unknown = run_cli({"score", "--bundle", "x.json", "--no-such-flag"});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("usage error") != std::string::npos);
    CHECK(run_cli({"batch", "--in", "x", "--workers", "0"}).code == 2);
    CHECK(run_cli({"analyze"}).code == 2);
    CHECK(run_cli({"analyze", "accuracy", "--undecided", "coinflip", "--pairs", "p", "--votes", "v", "--scores", "s"})
              .code == 2);

    const auto top = run_cli({"--help"});
    CHECK(top.code == 0);
    for (const auto *sub : {"score", "batch", "sweep", "analyze", "synth", "prefpairs", "serve"}) {
        CHECK(top.out.find(sub) != std::string::npos);
    }
    const std::vector<std::vector<std::string>> subs{
        {"score"},           {"batch"},           {"sweep"},           {"synth"},
        {"prefpairs"},       {"serve"},           {"analyze", "accuracy"}, {"analyze", "mcnemar"},
        {"analyze", "wilson"}, {"analyze", "bootstrap"}, {"analyze", "spearman"}, {"analyze", "per-species"}};
    for (auto args : subs) {
        const auto name = args.back();
        args.push_back("--help");
        const auto r = run_cli(args);
        CHECK_MESSAGE(r.code == 0, name);
        CHECK_MESSAGE(r.out.find("--") != std::string::npos, name);
    }
    CHECK(run_cli({"score", "--help"}).out.find("--tau-alpha") != std::string::npos);
    CHECK(run_cli({"score", "--help"}).out.find("0.5") != std::string::npos);
}

TEST_CASE("score prints one result line") {
    testing::TempDir dir;
    const auto bundle = to_bundle(gen_synth_instance(8, 24, 24, 2, 6), "img8");
    save_bundle(bundle, dir / "x.bundle");
    const auto r = run_cli({"score", "--bundle", (dir / "x.bundle").string()});
    REQUIRE(r.code == 0);
    CHECK(line_count(r.out) == 1);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(score_from_json(j) == seamcam_score(to_request(bundle), ScoringConfig{}));
    CHECK(j["image_id"] == "img8");

    const auto passall = run_cli({"score", "--bundle", (dir / "x.bundle").string(), "--tau-alpha", "0", "--tau-beta",
                                  "0", "--top-k", "20"});
    REQUIRE(passall.code == 0);
    const auto inst = gen_synth_instance(8, 24, 24, 2, 6);
    CHECK(nlohmann::json::parse(passall.out)["detectability"].get<double>() == inst.oracle_detectability);

    const auto bad_k = run_cli({"score", "--bundle", (dir / "x.bundle").string(), "--top-k", "21"});
    CHECK(bad_k.code == 1);
    CHECK(bad_k.err.rfind("error: code=ConfigError", 0) == 0);

    const auto missing = run_cli({"score", "--bundle", (dir / "missing.bundle").string()});
    CHECK(missing.code == 1);
    CHECK(missing.err.rfind("error: code=IoError", 0) == 0);

    std::ofstream(dir / "bad.bundle") << "{\"schema\": \"seamcam.bundle/9\"}";
    const auto version = run_cli({"score", "--bundle", (dir / "bad.bundle").string()});
    CHECK(version.code == 1);
    CHECK(version.err.rfind("error: code=VersionError", 0) == 0);
}

TEST_CASE("synth, batch and analyze end to end") {
    testing::TempDir dir;
    const auto synth_dir = (dir / "synth").string();
    REQUIRE(run_cli({"synth", "--out", synth_dir, "--count", "30", "--seed", "4", "--study"}).code == 0);
    const auto bundles = (dir / "synth" / "bundles").string();

    const auto one = run_cli({"batch", "--in", bundles, "--out", (dir / "s1.csv").string(), "--workers", "1"});
    const auto eight = run_cli({"batch", "--in", bundles, "--out", (dir / "s8.csv").string(), "--workers", "8"});
    REQUIRE(one.code == 0);
    REQUIRE(eight.code == 0);
    const auto csv1 = slurp(dir / "s1.csv");
    CHECK(csv1 == slurp(dir / "s8.csv"));
    CHECK(line_count(csv1) == 31);

    const std::vector<std::string> study{"--pairs", (dir / "synth" / "pairs.json").string(), "--votes",
                                         (dir / "synth" / "votes.jsonl").string(), "--scores",
                                         (dir / "s1.csv").string()};
    auto with = [&](std::vector<std::string> head) {
        head.insert(head.end(), study.begin(), study.end());
        return run_cli(head);
    };
    const auto acc = with({"analyze", "accuracy"});
    REQUIRE(acc.code == 0);
    CHECK(acc.out.find("accuracy=1.0000") != std::string::npos);

    const auto boot1 = with({"analyze", "bootstrap", "--resamples", "500", "--seed", "9"});
    const auto boot2 = with({"analyze", "bootstrap", "--resamples", "500", "--seed", "9"});
    CHECK(boot1.code == 0);
    CHECK(boot1.out == boot2.out);

    const auto species = with({"analyze", "per-species"});
    CHECK(species.code == 0);
    CHECK(species.out.rfind("species,correct,n,accuracy,wilson_lo,wilson_hi\n", 0) == 0);

    CHECK(with({"analyze", "spearman"}).code == 0);

    auto mc = study;
    mc.insert(mc.begin(), {"analyze", "mcnemar"});
    mc.insert(mc.end(), {"--scores-b", (dir / "s1.csv").string()});
    const auto same = run_cli(mc);
    CHECK(same.code == 1);  // identical metrics: no discordant pairs
    CHECK(same.err.find("DegenerateTable") != std::string::npos);
}

TEST_CASE("batch reports corrupt inputs without aborting") {
    testing::TempDir dir;
    {
        std::ofstream out(dir / "in.jsonl");
        for (int i = 0; i < 5; ++i) {
            out << serialize_bundle(to_bundle(gen_synth_instance(static_cast<std::uint64_t>(i), 16, 16, 1, 3),
                                              "b" + std::to_string(i)))
                << '\n';
        }
        out << "{\"schema\": \"seamcam.bundle/1\"\n";
    }
    const auto r = run_cli({"batch", "--in", (dir / "in.jsonl").string(), "--workers", "2"});
    CHECK(r.code == 0);
    CHECK(line_count(r.out) == 6);
    CHECK(r.err.find("error: code=ParseError origin=") != std::string::npos);
    CHECK(r.err.find("in.jsonl:6") != std::string::npos);
}

TEST_CASE("synth is deterministic in its seed") {
    testing::TempDir a;
    testing::TempDir b;
    REQUIRE(run_cli({"synth", "--out", a.path().string(), "--count", "5", "--seed", "77", "--study"}).code == 0);
    REQUIRE(run_cli({"synth", "--out", b.path().string(), "--count", "5", "--seed", "77", "--study"}).code == 0);
    for (const auto *f : {"oracles.jsonl", "pairs.json", "votes.jsonl", "bundles/synth00003.json"}) {
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
        CHECK(!slurp(a / f).empty());
    }
}

TEST_CASE("sweep records an impossible threshold as all undecidable") {
    testing::TempDir dir;
    REQUIRE(run_cli({"synth", "--out", dir.path().string(), "--count", "20", "--seed", "1", "--study"}).code == 0);
    const auto r = run_cli({"sweep", "--pairs", (dir / "pairs.json").string(), "--votes",
                            (dir / "votes.jsonl").string(), "--bundles", (dir / "bundles").string(),
                            "--tau-alpha-values", "0.5", "--tau-beta-values", "1.01", "--k-values", "7"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("1,0.5,1.01,12,0,0,10,,0.5000,") != std::string::npos);
    CHECK(r.err.find("stage 2 skipped") != std::string::npos);

    const auto normal = run_cli({"sweep", "--pairs", (dir / "pairs.json").string(), "--votes",
                                 (dir / "votes.jsonl").string(), "--bundles", (dir / "bundles").string(),
                                 "--tau-alpha-values", "0,0.5", "--tau-beta-values", "0,0.1", "--k-values", "1,7",
                                 "--workers", "2"});
    REQUIRE(normal.code == 0);
    CHECK(line_count(normal.out) == 1 + 4 + 2);
}

TEST_CASE("analyze wilson") {
    const auto r = run_cli({"analyze", "wilson", "--k", "0", "--n", "10"});
    CHECK(r.code == 0);
    CHECK(r.out.find("lo=0.000000") != std::string::npos);
    CHECK(run_cli({"analyze", "wilson", "--k", "11", "--n", "10"}).code == 1);
}

TEST_CASE("prefpairs writes one pair per candidate set") {
    testing::TempDir dir;
    {
        std::ofstream out(dir / "cands.jsonl");
        out << R"({"source_image_id": "s1", "winner_ref": "nat/s1", "candidates": [)"
            << R"({"candidate_ref": "g0", "prompt_index": 0, "result": {"score": 0.2}},)"
            << R"({"candidate_ref": "g1", "prompt_index": 1, "result": {"score": 0.9}},)"
            << R"({"candidate_ref": "g2", "prompt_index": 2, "result": {"score": 0.4}}]})" << '\n';
        out << R"({"source_image_id": "s2", "winner_ref": "nat/s2", "candidates": [)"
            << R"({"candidate_ref": "h0", "prompt_index": 0, "result": {"score": 0.5}}]})" << '\n';
    }
    const auto r = run_cli({"prefpairs", "--in", (dir / "cands.jsonl").string()});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(nlohmann::json::parse(line)["loser_ref"] == "g1");
    std::getline(lines, line);
    CHECK(nlohmann::json::parse(line)["loser_ref"] == "h0");

    std::ofstream(dir / "empty.jsonl") << R"({"source_image_id": "s3", "winner_ref": "w", "candidates": []})" << '\n';
    const auto empty = run_cli({"prefpairs", "--in", (dir / "empty.jsonl").string()});
    CHECK(empty.code == 1);
    CHECK(empty.err.rfind("error: code=EmptyCandidates", 0) == 0);
}

TEST_CASE("serve --export writes the derived views") {
    testing::TempDir dir;
    std::ofstream(dir / "pairs.json") << R"([{"pair_id": "p1", "image_a": "a1", "image_b": "b1", "species": "crab"},
                                             {"pair_id": "p2", "image_a": "a2", "image_b": "b2", "species": "crab"}])";
    std::ofstream(dir / "study.json") << R"({"pair_manifest": "pairs.json", "trials_per_participant": 2,
                                              "seed_base": 3, "vote_log": "votes.log"})";
    {
        StudyService service(load_service_config(dir / "study.json"));
        service.record_vote(service.next_trial("u1").trial_id, Side::left, 5.0);
    }
    const auto r = run_cli({"serve", "--config", (dir / "study.json").string(), "--export", (dir / "out").string()});
    REQUIRE(r.code == 0);
    CHECK(read_votes(dir / "out" / "votes.jsonl").size() == 1);
    CHECK(read_pairs(dir / "out" / "pairs.json").size() == 2);

    CHECK(run_cli({"serve", "--config", (dir / "nope.json").string()}).code == 1);
}
