#include "seamcam/cli.hpp"

#include <omp.h>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "seamcam/batch.hpp"
#include "seamcam/bundle.hpp"
#include "seamcam/csv.hpp"
#include "seamcam/error.hpp"
#include "seamcam/preference.hpp"
#include "seamcam/rng.hpp"
#include "seamcam/service.hpp"
#include "seamcam/stats.hpp"
#include "seamcam/study.hpp"
#include "seamcam/study_io.hpp"
#include "seamcam/sweep.hpp"
#include "seamcam/synth.hpp"

namespace seamcam::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Restores the OpenMP thread count on scope exit.
class ThreadScope {
public:
    explicit ThreadScope(int workers) : saved_(omp_get_max_threads()) { omp_set_num_threads(workers); }
    ~ThreadScope() { omp_set_num_threads(saved_); }
    ThreadScope(const ThreadScope &) = delete;
    ThreadScope &operator=(const ThreadScope &) = delete;

private:
    int saved_;
};

/// Writes to the file at `path`, or to `fallback` when the path is empty.
class Output {
public:
    Output(const std::string &path, std::ostream &fallback) : path_(path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) {
                throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
            }
        }
        stream_ = path.empty() ? &fallback : &file_;
    }

    std::ostream &stream() { return *stream_; }

    void finish() {
        stream_->flush();
        if (!*stream_) {
            throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path_.empty() ? "<stdout>" : path_));
        }
    }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream *stream_ = nullptr;
};

void add_scoring_flags(CLI::App *cmd, ScoringConfig &config) {
    cmd->add_option("--tau-alpha", config.tau_alpha, "Text-alignment threshold")->capture_default_str();
    cmd->add_option("--tau-beta", config.tau_beta, "Box-confidence threshold")->capture_default_str();
    cmd->add_option("--top-k", config.k_max, "Proposals kept after gating (1-20)")->capture_default_str();
}

CLI::Option *add_workers(CLI::App *cmd, int &workers) {
    return cmd->add_option("--workers", workers, "Worker threads")->capture_default_str()->check(CLI::Range(1, 1024));
}

// ---------------------------------------------------------------- analysis

struct StudyInputs {
    std::string pairs;
    std::string votes;
    std::string scores;
    std::string column = "score";
    std::string metric = "seamcam";
    double min_catch_accuracy = 1.0;
    std::size_t min_responses = kMinResponses;
};

void add_study_flags(CLI::App *cmd, StudyInputs &in, bool with_scores = true) {
    cmd->add_option("--pairs", in.pairs, "Pair skeletons (JSON array or JSON lines)")->required();
    cmd->add_option("--votes", in.votes, "Vote records (JSON lines)")->required();
    if (with_scores) {
        cmd->add_option("--scores", in.scores, "Per-image scores CSV with an image_id column")->required();
        cmd->add_option("--column", in.column, "Score column in the CSV")->capture_default_str();
    }
    cmd->add_option("--min-catch-accuracy", in.min_catch_accuracy, "Catch accuracy below which a participant is excluded")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--min-responses", in.min_responses, "Valid votes needed for a majority")->capture_default_str();
}

StudyAssembly load_study(const StudyInputs &in, std::ostream &err) {
    auto assembly = assemble_study(read_pairs(in.pairs), read_votes(in.votes),
                                   StudyOptions{in.min_catch_accuracy, in.min_responses});
    fmt::print(err, "note: {} pairs, {} participants retained, {} excluded, {} votes on unknown pairs\n",
               assembly.pairs.size(), assembly.participants.retained.size(), assembly.participants.excluded.size(),
               assembly.unknown_pair_votes);
    return assembly;
}

void attach_scores(std::vector<StudyPair> &pairs, const std::string &metric, const std::string &path,
                   const std::string &column, std::ostream &err) {
    const auto unscored = attach_metric(pairs, metric, csv::read_image_scores(path, column));
    if (unscored > 0) {
        fmt::print(err, "note: {} pairs lack a '{}' score for one of their images\n", unscored, metric);
    }
}

std::vector<StudyPair> scored_study(const StudyInputs &in, std::ostream &err) {
    auto pairs = load_study(in, err).pairs;
    attach_scores(pairs, in.metric, in.scores, in.column, err);
    return pairs;
}

void register_analyze(CLI::App &app, std::function<void()> &action, std::ostream &out, std::ostream &err) {
    auto *analyze = app.add_subcommand("analyze", "Two-alternative forced-choice study statistics");
    analyze->require_subcommand(1);

    {
        auto *cmd = analyze->add_subcommand("accuracy", "Agreement between a metric and the human majority");
        auto in = std::make_shared<StudyInputs>();
        auto policy = std::make_shared<std::string>("exclude");
        add_study_flags(cmd, *in);
        cmd->add_option("--metric", in->metric, "Metric name used in the report")->capture_default_str();
        cmd->add_option("--undecided", *policy, "Tied metric scores: exclude or half-credit")
            ->capture_default_str()
            ->check(CLI::IsMember({"exclude", "half-credit"}));
        cmd->callback([&, in, policy] {
            action = [&, in, policy] {
                const auto pairs = scored_study(*in, err);
                const auto report = agreement_accuracy(
                    pairs, in->metric, *policy == "exclude" ? UndecidedPolicy::exclude : UndecidedPolicy::half_credit);
                fmt::print(out,
                           "metric={} accuracy={:.4f} n={} correct={} undecidable={} excluded_majority={} "
                           "missing_scores={}\n",
                           in->metric, report.accuracy, report.evaluable, report.correct, report.undecidable,
                           report.excluded_majority, report.missing_scores);
            };
        });
    }
    {
        auto *cmd = analyze->add_subcommand("mcnemar", "Continuity-corrected McNemar test between two metrics");
        auto n01 = std::make_shared<std::optional<std::uint64_t>>();
        auto n10 = std::make_shared<std::optional<std::uint64_t>>();
        auto in = std::make_shared<StudyInputs>();
        auto scores_b = std::make_shared<std::string>();
        cmd->add_option("--n01", *n01, "Pairs only the first metric gets right");
        cmd->add_option("--n10", *n10, "Pairs only the second metric gets right");
        cmd->add_option("--pairs", in->pairs, "Pair skeletons (instead of --n01/--n10)");
        cmd->add_option("--votes", in->votes, "Vote records");
        cmd->add_option("--scores", in->scores, "Scores CSV of the first metric");
        cmd->add_option("--scores-b", *scores_b, "Scores CSV of the second metric");
        cmd->add_option("--column", in->column, "Score column in both CSVs")->capture_default_str();
        cmd->callback([&, n01, n10, in, scores_b] {
            action = [&, n01, n10, in, scores_b] {
                std::uint64_t a = 0;
                std::uint64_t b = 0;
                if (n01->has_value() && n10->has_value()) {
                    a = **n01;
                    b = **n10;
                } else if (!in->pairs.empty() && !in->votes.empty() && !in->scores.empty() && !scores_b->empty()) {
                    auto pairs = load_study(*in, err).pairs;
                    attach_scores(pairs, "first", in->scores, in->column, err);
                    attach_scores(pairs, "second", *scores_b, in->column, err);
                    const auto table = contingency(pairs, "first", "second");
                    a = table.n01;
                    b = table.n10;
                } else {
                    throw UsageError("mcnemar needs --n01 and --n10, or --pairs, --votes, --scores and --scores-b");
                }
                const auto r = mcnemar_cc(a, b);
                fmt::print(out, "chi2={:.2f} p_value={:.6g} n01={} n10={}\n", r.chi2, r.p_value, a, b);
            };
        });
    }
    {
        auto *cmd = analyze->add_subcommand("wilson", "Wilson score interval for k successes in n trials");
        auto k = std::make_shared<std::uint64_t>(0);
        auto n = std::make_shared<std::uint64_t>(0);
        auto z = std::make_shared<double>(kWilsonZ);
        cmd->add_option("--k", *k, "Successes")->required();
        cmd->add_option("--n", *n, "Trials")->required();
        cmd->add_option("--z", *z, "Normal quantile")->capture_default_str();
        cmd->callback([&, k, n, z] {
            action = [&, k, n, z] {
                const auto ci = wilson_interval(*k, *n, *z);
                fmt::print(out, "k={} n={} lo={:.6f} hi={:.6f}\n", *k, *n, ci.lo, ci.hi);
            };
        });
    }
    {
        auto *cmd = analyze->add_subcommand("bootstrap", "Percentile bootstrap interval of agreement accuracy");
        auto in = std::make_shared<StudyInputs>();
        auto resamples = std::make_shared<std::size_t>(kDefaultResamples);
        auto seed = std::make_shared<std::uint64_t>(kDefaultSeed);
        add_study_flags(cmd, *in);
        cmd->add_option("--resamples", *resamples, "Bootstrap resamples")->capture_default_str();
        cmd->add_option("--seed", *seed, "Resampling seed")->capture_default_str();
        cmd->callback([&, in, resamples, seed] {
            action = [&, in, resamples, seed] {
                const auto pairs = scored_study(*in, err);
                const auto indicators = agreement_indicators(pairs, in->metric);
                const auto ci = bootstrap_ci(indicators, *resamples, *seed);
                const auto report = agreement_accuracy(pairs, in->metric);
                fmt::print(out, "accuracy={:.4f} n={} lo={:.4f} hi={:.4f} resamples={} seed={}\n", report.accuracy,
                           indicators.size(), ci.lo, ci.hi, *resamples, *seed);
            };
        });
    }
    {
        auto *cmd = analyze->add_subcommand("spearman", "Rank correlation between score gap and human vote margin");
        auto in = std::make_shared<StudyInputs>();
        add_study_flags(cmd, *in);
        cmd->callback([&, in] {
            action = [&, in] {
                const auto pairs = scored_study(*in, err);
                const auto gm = gap_vs_margin(pairs, in->metric);
                fmt::print(out, "rho={:.6f} n={}\n", spearman_rho(gm.gap, gm.margin), gm.gap.size());
            };
        });
    }
    {
        auto *cmd = analyze->add_subcommand("per-species", "Agreement accuracy per species with Wilson intervals");
        auto in = std::make_shared<StudyInputs>();
        auto out_path = std::make_shared<std::string>();
        add_study_flags(cmd, *in);
        cmd->add_option("--out", *out_path, "CSV output (default stdout)");
        cmd->callback([&, in, out_path] {
            action = [&, in, out_path] {
                const auto pairs = scored_study(*in, err);
                Output o(*out_path, out);
                csv::write_row(o.stream(), {"species", "correct", "n", "accuracy", "wilson_lo", "wilson_hi"});
                for (const auto &row : per_species_accuracy(pairs, in->metric)) {
                    csv::write_row(o.stream(), {row.species, std::to_string(row.correct), std::to_string(row.n),
                                                fmt::format("{:.4f}", row.accuracy),
                                                fmt::format("{:.4f}", row.wilson_lo),
                                                fmt::format("{:.4f}", row.wilson_hi)});
                }
                o.finish();
            };
        });
    }
}

// ---------------------------------------------------------------- commands

void register_score(CLI::App &app, std::function<void()> &action, std::ostream &out) {
    auto *cmd = app.add_subcommand("score", "Score one proposal bundle");
    auto path = std::make_shared<std::string>();
    auto config = std::make_shared<ScoringConfig>();
    cmd->add_option("--bundle", *path, "Bundle file")->required();
    add_scoring_flags(cmd, *config);
    cmd->callback([&, path, config] {
        action = [&, path, config] {
            config->validate();
            const auto bundle = load_bundle(*path);
            auto j = score_to_json(seamcam_score(to_request(bundle), *config));
            j["image_id"] = bundle.image_id;
            out << j.dump() << '\n';
        };
    });
}

void register_batch(CLI::App &app, std::function<void()> &action, std::ostream &out, std::ostream &err) {
    auto *cmd = app.add_subcommand("batch", "Score a directory or JSON-lines stream of bundles");
    auto in = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto workers = std::make_shared<int>(1);
    auto config = std::make_shared<ScoringConfig>();
    cmd->add_option("--in", *in, "Bundle directory, .jsonl stream or single bundle")->required();
    cmd->add_option("--out", *out_path, "Scores CSV (default stdout)");
    add_workers(cmd, *workers);
    add_scoring_flags(cmd, *config);
    cmd->callback([&, in, out_path, workers, config] {
        action = [&, in, out_path, workers, config] {
            config->validate();
            const auto items = read_bundles(*in);
            const auto outcomes = batch_score(items, *config, *workers);
            Output o(*out_path, out);
            const auto written = write_scores_csv(o.stream(), outcomes);
            o.finish();
            for (const auto &item : outcomes) {
                if (item.error_code) {
                    fmt::print(err, "error: code={} origin={} message={}\n", to_string(*item.error_code), item.origin,
                               nlohmann::json(item.error).dump());
                }
            }
            fmt::print(err, "note: scored {} of {} bundles\n", written, outcomes.size());
        };
    });
}

void register_sweep(CLI::App &app, std::function<void()> &action, std::ostream &out, std::ostream &err) {
    auto *cmd = app.add_subcommand("sweep", "Staged threshold and top-K search against human majorities");
    auto in = std::make_shared<StudyInputs>();
    auto bundles = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto workers = std::make_shared<int>(1);
    auto grid = std::make_shared<SweepGrid>(SweepGrid{{0.05, 0.15, 0.30, 0.50, 0.70, 0.80, 0.85, 0.90, 0.95},
                                                      {0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40},
                                                      {1, 3, 5, 7, 10, 12},
                                                      12});
    add_study_flags(cmd, *in, false);
    cmd->add_option("--bundles", *bundles, "Bundles for every study image (directory or .jsonl)")->required();
    cmd->add_option("--out", *out_path, "CSV output (default stdout)");
    cmd->add_option("--tau-alpha-values", grid->tau_alpha_values, "Stage-1 text thresholds")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--tau-beta-values", grid->tau_beta_values, "Stage-1 box thresholds")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--k-values", grid->k_values, "Stage-2 top-K values")->delimiter(',')->capture_default_str();
    cmd->add_option("--stage1-k", grid->stage1_k, "Top-K held fixed in stage 1")->capture_default_str();
    add_workers(cmd, *workers);
    cmd->callback([&, in, bundles, out_path, workers, grid] {
        action = [&, in, bundles, out_path, workers, grid] {
            const auto study = load_study(*in, err);
            std::map<std::string, PreparedRequest> images;
            for (const auto &item : read_bundles(*bundles)) {
                if (!item.bundle) {
                    throw Error(item.error_code, item.error);
                }
                images.insert_or_assign(item.bundle->image_id, PreparedRequest(to_request(*item.bundle)));
            }
            std::vector<LabeledPair> labeled;
            std::size_t missing = 0;
            for (const auto &p : study.pairs) {
                const auto a = images.find(p.image_a);
                const auto b = images.find(p.image_b);
                if (a == images.end() || b == images.end()) {
                    ++missing;
                    continue;
                }
                labeled.push_back(LabeledPair{p.pair_id, p.species, a->second, b->second, p.majority});
            }
            if (missing > 0) {
                fmt::print(err, "note: {} pairs skipped for lack of bundles\n", missing);
            }
            SweepResult result;
            {
                ThreadScope threads(*workers);
                result = staged_sweep(labeled, *grid);
            }
            Output o(*out_path, out);
            csv::write_row(o.stream(), {"stage", "tau_alpha", "tau_beta", "k", "decided", "correct", "undecidable",
                                        "accuracy", "half_credit_accuracy", "mean_latency_us"});
            const auto emit = [&](int stage, const SweepCell &c) {
                csv::write_row(o.stream(),
                               {std::to_string(stage), fmt::format("{}", c.tau_alpha), fmt::format("{}", c.tau_beta),
                                std::to_string(c.k), std::to_string(c.decided), std::to_string(c.correct),
                                std::to_string(c.undecidable), c.accuracy ? fmt::format("{:.4f}", *c.accuracy) : "",
                                fmt::format("{:.4f}", c.half_credit_accuracy), fmt::format("{:.1f}", c.mean_latency_us)});
            };
            for (const auto &c : result.stage1) {
                emit(1, c);
            }
            for (const auto &c : result.stage2) {
                emit(2, c);
            }
            o.finish();
            if (result.best_tau_alpha) {
                fmt::print(err, "note: best tau_alpha={} tau_beta={}\n", *result.best_tau_alpha, *result.best_tau_beta);
            } else {
                fmt::print(err, "note: no threshold cell decided any pair; stage 2 skipped\n");
            }
        };
    });
}

void register_synth(CLI::App &app, std::function<void()> &action, std::ostream &err) {
    struct Args {
        std::string out;
        std::size_t count = 100;
        std::uint64_t seed = kDefaultSeed;
        int height = 32;
        int width = 32;
        int gt = 2;
        int proposals = 8;
        bool study = false;
        int participants = 5;
        ScoringConfig config;
    };
    auto args = std::make_shared<Args>();
    auto *cmd = app.add_subcommand("synth", "Generate seeded synthetic bundles with brute-force oracles");
    cmd->add_option("--out", args->out, "Output directory (bundles/, oracles.jsonl, and with --study pairs.json, votes.jsonl)")->required();
    cmd->add_option("--count", args->count, "Number of bundles")->capture_default_str();
    cmd->add_option("--seed", args->seed, "Base seed")->capture_default_str();
    cmd->add_option("--height", args->height, "Raster height")->capture_default_str()->check(CLI::Range(1, 16384));
    cmd->add_option("--width", args->width, "Raster width")->capture_default_str()->check(CLI::Range(1, 16384));
    cmd->add_option("--gt", args->gt, "Ground-truth masks per image")->capture_default_str()->check(CLI::Range(1, 64));
    cmd->add_option("--proposals", args->proposals, "Maximum proposals per image")
        ->capture_default_str()
        ->check(CLI::Range(0, kMaxSynthProposals));
    cmd->add_flag("--study", args->study, "Also write pairs.json and votes.jsonl with majorities planted from scores");
    cmd->add_option("--participants", args->participants, "Voters per planted pair")->capture_default_str();
    add_scoring_flags(cmd, args->config);
    cmd->callback([&, args] {
        action = [&, args] {
            args->config.validate();
            const fs::path dir(args->out);
            fs::create_directories(dir / "bundles");
            std::ofstream oracles(dir / "oracles.jsonl", std::ios::binary | std::ios::trunc);
            std::map<std::string, double> scores;
            for (std::size_t i = 0; i < args->count; ++i) {
                const auto seed = derive_seed(args->seed, i);
                const auto n_prop = static_cast<int>(SplitMix64(seed).below(static_cast<std::uint64_t>(args->proposals) + 1));
                const auto inst = gen_synth_instance(seed, args->height, args->width, args->gt, n_prop);
                const auto id = fmt::format("synth{:05}", i);
                const auto bundle = to_bundle(inst, id);
                save_bundle(bundle, dir / "bundles" / (id + ".json"));
                oracles << nlohmann::json{{"image_id", id},
                                          {"intersection", inst.oracle.intersection},
                                          {"union", inst.oracle.union_area},
                                          {"detectability", inst.oracle_detectability},
                                          {"best_subset", inst.oracle_subset}}
                               .dump()
                        << '\n';
                if (args->study) {
                    scores[id] = seamcam_score(to_request(bundle), args->config).score;
                }
            }
            if (!oracles) {
                throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", (dir / "oracles.jsonl").string()));
            }
            if (args->study) {
                const auto planted = plant_study(scores, derive_seed(args->seed, 0x5354554459ULL), args->participants);
                std::ofstream pairs(dir / "pairs.json", std::ios::binary | std::ios::trunc);
                write_pairs(pairs, planted.pairs);
                std::ofstream votes(dir / "votes.jsonl", std::ios::binary | std::ios::trunc);
                write_votes(votes, planted.votes);
                if (!pairs || !votes) {
                    throw Error(ErrorCode::IoError, fmt::format("cannot write study files in '{}'", dir.string()));
                }
            }
            fmt::print(err, "note: wrote {} bundles to {}\n", args->count, (dir / "bundles").string());
        };
    });
}

void register_prefpairs(CLI::App &app, std::function<void()> &action, std::ostream &out) {
    auto *cmd = app.add_subcommand("prefpairs", "Pick the hardest generated candidate per source image");
    auto in = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto config = std::make_shared<ScoringConfig>();
    cmd->add_option("--in", *in, "Candidate sets (JSON array or JSON lines)")->required();
    cmd->add_option("--out", *out_path, "Preference pairs as JSON lines (default stdout)");
    add_scoring_flags(cmd, *config);
    cmd->callback([&, in, out_path, config] {
        action = [&, in, out_path, config] {
            config->validate();
            const auto docs = read_json_documents(*in);
            Output o(*out_path, out);
            for (std::size_t i = 0; i < docs.size(); ++i) {
                try {
                    const auto pair = select_hard_negative(candidate_set_from_json(docs[i], *config));
                    o.stream() << preference_to_json(pair).dump() << '\n';
                } catch (const Error &e) {
                    throw Error(e.code(), fmt::format("{}[{}]: {}", *in, i, e.what()));
                }
            }
            o.finish();
        };
    });
}

std::atomic<HttpServer *> g_server{nullptr};

extern "C" void handle_stop_signal(int) {
    if (auto *server = g_server.load()) {
        server->stop();
    }
}

void register_serve(CLI::App &app, std::function<void()> &action, std::ostream &err) {
    auto *cmd = app.add_subcommand("serve", "Run the study collection service");
    auto config_path = std::make_shared<std::string>();
    auto port = std::make_shared<std::optional<int>>();
    auto host = std::make_shared<std::optional<std::string>>();
    auto export_dir = std::make_shared<std::string>();
    cmd->add_option("--config", *config_path, "Study configuration file")->required();
    cmd->add_option("--port", *port, "Override the configured port (0 picks a free port)")->check(CLI::Range(0, 65535));
    cmd->add_option("--host", *host, "Override the configured host");
    cmd->add_option("--export", *export_dir, "Write votes.jsonl and pairs.json to this directory and exit");
    cmd->callback([&, config_path, port, host, export_dir] {
        action = [&, config_path, port, host, export_dir] {
            auto config = load_service_config(*config_path);
            if (*port) {
                config.port = **port;
            }
            if (*host) {
                config.host = **host;
            }
            StudyService service(config);
            if (!export_dir->empty()) {
                service.write_export(*export_dir);
                fmt::print(err, "note: exported {} votes to {}\n", service.vote_count(), *export_dir);
                return;
            }
            HttpServer server(service);
            const int bound = server.bind(config.host, config.port);
            g_server = &server;
            const auto old_int = std::signal(SIGINT, handle_stop_signal);
            const auto old_term = std::signal(SIGTERM, handle_stop_signal);
            fmt::print(err, "note: listening on http://{}:{} ({} votes replayed)\n", config.host, bound,
                       service.vote_count());
            err.flush();
            server.listen();
            std::signal(SIGINT, old_int);
            std::signal(SIGTERM, old_term);
            g_server = nullptr;
        };
    });
}

}  // namespace

int run(int argc, char **argv, std::ostream &out, std::ostream &err) {
    CLI::App app("Camouflage scoring engine and 2AFC study pipeline", "seamcam");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");
    std::function<void()> action;

    register_score(app, action, out);
    register_batch(app, action, out, err);
    register_sweep(app, action, out, err);
    register_analyze(app, action, out, err);
    register_synth(app, action, err);
    register_prefpairs(app, action, out);
    register_serve(app, action, err);

    const auto deepest = [&app] {
        const CLI::App *sub = &app;
        while (!sub->get_subcommands().empty()) {
            sub = sub->get_subcommands().front();
        }
        return sub;
    };
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << deepest()->help();
        return 0;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError &e) {
        fmt::print(err, "usage error: {}\n", e.what());
        fmt::print(err, "run '{} --help' for usage\n", deepest()->get_display_name(true));
        return 2;
    }

    try {
        if (action) {
            action();
        }
        return 0;
    } catch (const UsageError &e) {
        fmt::print(err, "usage error: {}\n", e.what());
        return 2;
    } catch (const Error &e) {
        fmt::print(err, "error: code={} message={}\n", to_string(e.code()), nlohmann::json(e.what()).dump());
        return 1;
    } catch (const fs::filesystem_error &e) {
        fmt::print(err, "error: code={} message={}\n", to_string(ErrorCode::IoError), nlohmann::json(e.what()).dump());
        return 1;
    } catch (const std::exception &e) {
        fmt::print(err, "error: code=Internal message={}\n", nlohmann::json(e.what()).dump());
        return 1;
    }
}

}  // namespace seamcam::cli
