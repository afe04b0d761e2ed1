#include "seamcam/service.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "seamcam/error.hpp"
#include "seamcam/rng.hpp"
#include "seamcam/stats.hpp"
#include "seamcam/study_io.hpp"

namespace seamcam {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSideStream = 0x5349444500000000ULL;
constexpr std::uint64_t kTrialTagSalt = 0x545249414C544147ULL;
constexpr std::size_t kMaxParticipantId = 128;

[[noreturn]] void config_fail(const std::string &what) { throw Error(ErrorCode::ConfigError, what); }

bool valid_participant_id(std::string_view pid) {
    if (pid.empty() || pid.size() > kMaxParticipantId) {
        return false;
    }
    return std::all_of(pid.begin(), pid.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

/// Draws `count` distinct values from [0, n) in seeded order (partial Fisher-Yates).
std::vector<int> sample_without_replacement(SplitMix64 &rng, int n, int count) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::filesystem::path &p) {
    return p.empty() || p.is_absolute() ? p : base / p;
}

std::string io_message(const std::string &what, const std::filesystem::path &path) {
    return fmt::format("{} '{}': {}", what, path.string(), std::strerror(errno));
}

struct ParsedTrialId {
    int index = 0;
    std::string tag;
    std::string participant_id;
};

std::optional<ParsedTrialId> parse_trial_id(std::string_view id) {
    const auto first = id.find('.');
    if (first == std::string_view::npos) {
        return std::nullopt;
    }
    const auto second = id.find('.', first + 1);
    if (second == std::string_view::npos) {
        return std::nullopt;
    }
    const auto index_text = id.substr(0, first);
    if (index_text.empty() || index_text.size() > 9 ||
        !std::all_of(index_text.begin(), index_text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return std::nullopt;
    }
    ParsedTrialId parsed;
    parsed.index = std::stoi(std::string(index_text));
    parsed.tag = std::string(id.substr(first + 1, second - first - 1));
    parsed.participant_id = std::string(id.substr(second + 1));
    if (!valid_participant_id(parsed.participant_id)) {
        return std::nullopt;
    }
    return parsed;
}

}  // namespace

std::string_view to_string(Side s) noexcept { return s == Side::left ? "left" : "right"; }

std::optional<Side> parse_side(std::string_view text) noexcept {
    if (text == "left") {
        return Side::left;
    }
    if (text == "right") {
        return Side::right;
    }
    return std::nullopt;
}

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) {
        config_fail(fmt::format("port must be in [0, 65535], got {}", port));
    }
    if (!(catch_rate >= 0.0 && catch_rate <= 1.0)) {
        config_fail(fmt::format("catch_rate must be in [0, 1], got {}", catch_rate));
    }
    if (trials_per_participant < 1) {
        config_fail(fmt::format("trials_per_participant must be >= 1, got {}", trials_per_participant));
    }
    if (vote_log.empty()) {
        config_fail("vote_log is required");
    }
    if (participants) {
        for (const auto &p : *participants) {
            if (!valid_participant_id(p)) {
                config_fail(fmt::format("participant id '{}' must be 1-128 characters of [A-Za-z0-9_-]", p));
            }
        }
    }
}

ServiceConfig load_service_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
    }
    if (!j.is_object()) {
        throw Error(ErrorCode::ParseError, fmt::format("{}: expected an object", path.string()));
    }
    const auto base = path.parent_path();
    ServiceConfig c;
    try {
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        c.pair_manifest = resolve(base, j.at("pair_manifest").get<std::string>());
        c.catch_manifest = resolve(base, j.value("catch_manifest", std::string()));
        c.catch_rate = j.value("catch_rate", 0.0);
        c.trials_per_participant = j.at("trials_per_participant").get<int>();
        c.seed_base = j.value("seed_base", kDefaultSeed);
        c.vote_log = resolve(base, j.at("vote_log").get<std::string>());
        c.static_dir = resolve(base, j.value("static_dir", std::string()));
        if (j.contains("participants")) {
            c.participants = j.at("participants").get<std::set<std::string>>();
        }
        c.operator_token = j.value("operator_token", std::string());
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
    }
    c.validate();
    return c;
}

std::vector<PairEntry> load_pair_manifest(const std::filesystem::path &path) {
    std::vector<PairEntry> entries;
    for (const auto &p : read_pairs(path)) {
        entries.push_back(PairEntry{p.pair_id, p.image_a, p.image_b, p.species});
    }
    return entries;
}

std::vector<CatchEntry> load_catch_manifest(const std::filesystem::path &path) {
    const auto docs = read_json_documents(path);
    std::vector<CatchEntry> entries;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto where = fmt::format("{}[{}]", path.filename().string(), i);
        const auto pair = pair_from_json(docs[i], where);
        const auto expected = docs[i].contains("expected") && docs[i]["expected"].is_string()
                                  ? parse_choice(docs[i]["expected"].get<std::string>())
                                  : std::nullopt;
        if (!expected) {
            throw Error(ErrorCode::ParseError, fmt::format("{}.expected: expected \"a\" or \"b\"", where));
        }
        entries.push_back(CatchEntry{pair.pair_id, pair.image_a, pair.image_b, *expected});
    }
    return entries;
}

json trial_to_client_json(const TrialPlan &plan) {
    return json{{"trial_id", plan.trial_id},       {"participant_id", plan.participant_id},
                {"left_image", plan.left_image},   {"right_image", plan.right_image},
                {"trial_index", plan.trial_index}, {"trial_count", plan.trial_count},
                {"issued_at", plan.issued_at_ms}};
}

StudyService::StudyService(const ServiceConfig &config)
    : StudyService(config, load_pair_manifest(config.pair_manifest),
                   config.catch_manifest.empty() ? std::vector<CatchEntry>{}
                                                 : load_catch_manifest(config.catch_manifest)) {}

StudyService::StudyService(ServiceConfig config, std::vector<PairEntry> pairs, std::vector<CatchEntry> catches)
    : config_(std::move(config)), pairs_(std::move(pairs)), catches_(std::move(catches)) {
    config_.validate();
    const int total = config_.trials_per_participant;
    catch_count_ = static_cast<int>(std::lround(config_.catch_rate * total));
    const int regular = total - catch_count_;
    if (static_cast<std::size_t>(regular) > pairs_.size()) {
        config_fail(fmt::format("{} regular trials per participant but only {} pairs in the manifest", regular,
                                pairs_.size()));
    }
    if (static_cast<std::size_t>(catch_count_) > catches_.size()) {
        config_fail(fmt::format("{} catch trials per participant but only {} catch pairs in the manifest",
                                catch_count_, catches_.size()));
    }
    std::set<std::string> ids;
    for (const auto &p : pairs_) {
        if (!ids.insert(p.pair_id).second) {
            config_fail(fmt::format("duplicate pair_id '{}'", p.pair_id));
        }
    }
    for (const auto &c : catches_) {
        if (!ids.insert(c.pair_id).second) {
            config_fail(fmt::format("duplicate pair_id '{}'", c.pair_id));
        }
    }

    const auto parent = config_.vote_log.parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    replay();
    log_fd_ = ::open(config_.vote_log.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (log_fd_ < 0) {
        throw Error(ErrorCode::IoError, io_message("cannot open vote log", config_.vote_log));
    }
}

StudyService::~StudyService() {
    if (log_fd_ >= 0) {
        ::close(log_fd_);
    }
}

SessionSchedule StudyService::schedule_for(const std::string &participant_id) const {
    SessionSchedule s;
    s.seed = derive_seed(config_.seed_base, fnv1a(participant_id));
    SplitMix64 rng(s.seed);
    const int total = config_.trials_per_participant;
    const auto regular = sample_without_replacement(rng, static_cast<int>(pairs_.size()), total - catch_count_);
    const auto positions = sample_without_replacement(rng, total, catch_count_);
    const auto catch_pairs = sample_without_replacement(rng, static_cast<int>(catches_.size()), catch_count_);
    s.slots.assign(static_cast<std::size_t>(total), 0);
    std::vector<bool> is_catch(static_cast<std::size_t>(total), false);
    for (int i = 0; i < catch_count_; ++i) {
        const auto pos = static_cast<std::size_t>(positions[static_cast<std::size_t>(i)]);
        is_catch[pos] = true;
        s.slots[pos] = ~catch_pairs[static_cast<std::size_t>(i)];
    }
    std::size_t next = 0;
    for (std::size_t t = 0; t < s.slots.size(); ++t) {
        if (!is_catch[t]) {
            s.slots[t] = regular[next++];
        }
    }
    return s;
}

bool StudyService::left_is_a(std::uint64_t session_seed, int trial_index) noexcept {
    return (derive_seed(session_seed, kSideStream + static_cast<std::uint64_t>(trial_index)) >> 63U) == 0;
}

std::string StudyService::trial_id(const std::string &participant_id, std::uint64_t seed, int index) const {
    const auto tag = derive_seed(seed ^ kTrialTagSalt, static_cast<std::uint64_t>(index)) & 0xFFFFFFFFFFFFULL;
    return fmt::format("{}.{:012x}.{}", index, tag, participant_id);
}

StudyService::Session &StudyService::session_locked(const std::string &participant_id) {
    if (!valid_participant_id(participant_id) ||
        (config_.participants && config_.participants->count(participant_id) == 0)) {
        throw Error(ErrorCode::UnknownParticipant, fmt::format("unknown participant '{}'", participant_id));
    }
    auto it = sessions_.find(participant_id);
    if (it == sessions_.end()) {
        it = sessions_.emplace(participant_id, Session{schedule_for(participant_id), 0, std::nullopt}).first;
    }
    return it->second;
}

TrialPlan StudyService::plan_locked(const std::string &participant_id, const Session &session, int index) const {
    TrialPlan plan;
    plan.participant_id = participant_id;
    plan.trial_index = index;
    plan.trial_count = config_.trials_per_participant;
    plan.trial_id = trial_id(participant_id, session.schedule.seed, index);
    const int slot = session.schedule.slots[static_cast<std::size_t>(index)];
    std::string image_a;
    std::string image_b;
    if (slot >= 0) {
        const auto &p = pairs_[static_cast<std::size_t>(slot)];
        plan.pair_id = p.pair_id;
        image_a = p.image_a;
        image_b = p.image_b;
    } else {
        const auto &c = catches_[static_cast<std::size_t>(~slot)];
        plan.pair_id = c.pair_id;
        plan.is_catch = true;
        image_a = c.image_a;
        image_b = c.image_b;
    }
    plan.left_is_a = left_is_a(session.schedule.seed, index);
    plan.left_image = plan.left_is_a ? image_a : image_b;
    plan.right_image = plan.left_is_a ? image_b : image_a;
    plan.issued_at_ms = session.issued_at_ms.value_or(0);
    return plan;
}

TrialPlan StudyService::next_trial(const std::string &participant_id) {
    std::lock_guard lock(mutex_);
    auto &session = session_locked(participant_id);
    if (session.completed >= config_.trials_per_participant) {
        throw Error(ErrorCode::SessionComplete,
                    fmt::format("participant '{}' has completed all {} trials", participant_id,
                                config_.trials_per_participant));
    }
    if (!session.issued_at_ms) {
        session.issued_at_ms = now_ms();
    }
    return plan_locked(participant_id, session, session.completed);
}

VoteAck StudyService::record_vote(const std::string &trial_id_text, Side choice, std::optional<double> response_ms) {
    if (response_ms && !(std::isfinite(*response_ms) && *response_ms >= 0)) {
        throw Error(ErrorCode::InvalidRequest, "response_ms must be a non-negative number");
    }
    const auto unknown = [&] { return Error(ErrorCode::UnknownTrial, fmt::format("unknown trial '{}'", trial_id_text)); };
    const auto parsed = parse_trial_id(trial_id_text);
    if (!parsed || parsed->index >= config_.trials_per_participant) {
        throw unknown();
    }

    std::lock_guard lock(mutex_);
    Session *session = nullptr;
    try {
        session = &session_locked(parsed->participant_id);
    } catch (const Error &) {
        throw unknown();
    }
    if (trial_id(parsed->participant_id, session->schedule.seed, parsed->index) != trial_id_text) {
        throw unknown();
    }
    if (parsed->index < session->completed) {
        throw Error(ErrorCode::DuplicateVote, fmt::format("trial '{}' already answered", trial_id_text));
    }
    if (parsed->index > session->completed) {
        throw Error(ErrorCode::UnknownTrial, fmt::format("trial '{}' has not been issued", trial_id_text));
    }

    const auto plan = plan_locked(parsed->participant_id, *session, parsed->index);
    VoteRecord vote;
    vote.pair_id = plan.pair_id;
    vote.participant_id = plan.participant_id;
    vote.choice = (choice == Side::left) == plan.left_is_a ? Choice::a : Choice::b;
    vote.is_catch = plan.is_catch;
    if (plan.is_catch) {
        vote.catch_expected = catches_[static_cast<std::size_t>(~session->schedule.slots[static_cast<std::size_t>(plan.trial_index)])].expected;
    }
    vote.response_ms = response_ms;

    json line = vote_to_json(vote);
    line["trial_id"] = plan.trial_id;
    line["trial_index"] = plan.trial_index;
    line["screen_choice"] = to_string(choice);
    line["left_is_a"] = plan.left_is_a;
    line["recorded_at"] = now_ms();
    append_line(line.dump() + "\n");

    ++session->completed;
    session->issued_at_ms.reset();
    catch_votes_ += vote.is_catch ? 1 : 0;
    votes_.push_back(std::move(vote));
    if (after_append_) {
        after_append_();
    }
    return VoteAck{plan.trial_id, session->completed, config_.trials_per_participant - session->completed};
}

void StudyService::append_line(const std::string &line) {
    const char *data = line.data();
    std::size_t left = line.size();
    while (left > 0) {
        const auto n = ::write(log_fd_, data, left);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw Error(ErrorCode::IoError, io_message("cannot append to vote log", config_.vote_log));
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(log_fd_) != 0) {
        throw Error(ErrorCode::IoError, io_message("cannot sync vote log", config_.vote_log));
    }
}

void StudyService::replay() {
    std::ifstream in(config_.vote_log, std::ios::binary);
    if (!in) {
        return;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    in.close();

    // A line without its newline was never acknowledged: drop it so that the
    // next append starts on a fresh line.
    const auto complete = text.empty() || text.back() == '\n' ? text.size() : text.rfind('\n') + 1;
    if (complete != text.size()) {
        if (::truncate(config_.vote_log.c_str(), static_cast<off_t>(complete)) != 0) {
            throw Error(ErrorCode::IoError, io_message("cannot truncate torn vote log", config_.vote_log));
        }
        text.resize(complete);
    }

    std::istringstream lines(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(lines, raw)) {
        ++lineno;
        if (raw.empty()) {
            continue;
        }
        const auto where = fmt::format("{}:{}", config_.vote_log.string(), lineno);
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::exception &e) {
            throw Error(ErrorCode::ParseError, fmt::format("{}: {}", where, e.what()));
        }
        const auto vote = vote_from_json(j, where);
        const auto index = j.value("trial_index", -1);
        auto &session = session_locked(vote.participant_id);
        if (index != session.completed || index >= config_.trials_per_participant) {
            config_fail(fmt::format("{}: vote log does not match the study configuration", where));
        }
        const auto plan = plan_locked(vote.participant_id, session, index);
        if (plan.pair_id != vote.pair_id || plan.trial_id != j.value("trial_id", std::string())) {
            config_fail(fmt::format("{}: vote log does not match the study configuration", where));
        }
        ++session.completed;
        catch_votes_ += vote.is_catch ? 1 : 0;
        votes_.push_back(vote);
    }
}

ExportData StudyService::export_votes() const {
    std::lock_guard lock(mutex_);
    ExportData out;
    std::ostringstream votes;
    write_votes(votes, votes_);
    out.votes_jsonl = votes.str();
    std::vector<StudyPair> skeletons;
    skeletons.reserve(pairs_.size());
    for (const auto &p : pairs_) {
        StudyPair s;
        s.pair_id = p.pair_id;
        s.image_a = p.image_a;
        s.image_b = p.image_b;
        s.species = p.species;
        skeletons.push_back(std::move(s));
    }
    std::ostringstream pairs;
    write_pairs(pairs, skeletons);
    out.pairs_json = pairs.str();
    return out;
}

void StudyService::write_export(const std::filesystem::path &dir) const {
    const auto data = export_votes();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto write = [](const std::filesystem::path &path, const std::string &text) {
        const auto tmp = std::filesystem::path(path.string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << text;
            if (!out) {
                throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", tmp.string()));
            }
        }
        std::filesystem::rename(tmp, path);
    };
    write(dir / "votes.jsonl", data.votes_jsonl);
    write(dir / "pairs.json", data.pairs_json);
}

std::size_t StudyService::vote_count() const {
    std::lock_guard lock(mutex_);
    return votes_.size();
}

std::size_t StudyService::catch_vote_count() const {
    std::lock_guard lock(mutex_);
    return catch_votes_;
}

int StudyService::completed(const std::string &participant_id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(participant_id);
    return it == sessions_.end() ? 0 : it->second.completed;
}

void StudyService::set_after_append_hook(std::function<void()> hook) {
    std::lock_guard lock(mutex_);
    after_append_ = std::move(hook);
}

}  // namespace seamcam
