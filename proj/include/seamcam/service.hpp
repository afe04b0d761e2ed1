#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "seamcam/study.hpp"

namespace seamcam {

enum class Side { left, right };
std::string_view to_string(Side s) noexcept;
std::optional<Side> parse_side(std::string_view text) noexcept;

/// Regular study pair served to participants.
struct PairEntry {
    std::string pair_id;
    std::string image_a;
    std::string image_b;
    std::string species;
};

/// Attention-check pair with an obvious answer, supplied at study setup.
struct CatchEntry {
    std::string pair_id;
    std::string image_a;
    std::string image_b;
    Choice expected = Choice::a;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path pair_manifest;
    std::filesystem::path catch_manifest;
    double catch_rate = 0.0;
    int trials_per_participant = 0;
    std::uint64_t seed_base = 0;
    std::filesystem::path vote_log;
    std::filesystem::path static_dir;  ///< empty: no static mount
    std::optional<std::set<std::string>> participants;  ///< absent: any token opens a session
    std::string operator_token;        ///< empty: export disabled over HTTP

    void validate() const;
};

/// Relative paths in the file are resolved against the file's directory.
[[nodiscard]] ServiceConfig load_service_config(const std::filesystem::path &path);

[[nodiscard]] std::vector<PairEntry> load_pair_manifest(const std::filesystem::path &path);
[[nodiscard]] std::vector<CatchEntry> load_catch_manifest(const std::filesystem::path &path);

struct TrialPlan {
    std::string trial_id;
    std::string pair_id;
    std::string left_image;
    std::string right_image;
    bool is_catch = false;
    std::string participant_id;
    std::int64_t issued_at_ms = 0;  ///< unix epoch milliseconds
    int trial_index = 0;
    int trial_count = 0;
    bool left_is_a = true;
};

/// Client payload: catch status, pair id and side assignment are withheld.
[[nodiscard]] nlohmann::json trial_to_client_json(const TrialPlan &plan);

struct VoteAck {
    std::string trial_id;
    int completed = 0;
    int remaining = 0;
};

struct ExportData {
    std::string votes_jsonl;  ///< VoteRecord lines in acknowledgement order
    std::string pairs_json;   ///< StudyPair skeletons for the regular pairs
};

/// Fixed per-participant schedule derived from the session seed.
struct SessionSchedule {
    std::uint64_t seed = 0;
    std::vector<int> slots;  ///< per trial: index into pairs (>= 0) or ~index into catches (< 0)
};

/// Collection service state. Sessions are pure functions of (seed_base,
/// participant id); the append-only vote log is the only persisted state and is
/// replayed on construction. Thread-safe.
class StudyService {
public:
    StudyService(ServiceConfig config, std::vector<PairEntry> pairs, std::vector<CatchEntry> catches);
    explicit StudyService(const ServiceConfig &config);
    ~StudyService();

    StudyService(const StudyService &) = delete;
    StudyService &operator=(const StudyService &) = delete;

    /// The current unanswered trial; repeated calls return the same plan.
    /// Throws UnknownParticipant or SessionComplete.
    [[nodiscard]] TrialPlan next_trial(const std::string &participant_id);

    /// Maps the screen side back to the canonical image and appends the vote
    /// durably before returning. Throws UnknownTrial or DuplicateVote.
    VoteAck record_vote(const std::string &trial_id, Side choice, std::optional<double> response_ms);

    [[nodiscard]] ExportData export_votes() const;
    void write_export(const std::filesystem::path &dir) const;

    [[nodiscard]] std::size_t vote_count() const;
    [[nodiscard]] std::size_t catch_vote_count() const;
    [[nodiscard]] int completed(const std::string &participant_id) const;
    [[nodiscard]] const ServiceConfig &config() const noexcept { return config_; }

    [[nodiscard]] SessionSchedule schedule_for(const std::string &participant_id) const;
    [[nodiscard]] static bool left_is_a(std::uint64_t session_seed, int trial_index) noexcept;

    /// Runs after a vote line is on disk and before the ack is returned.
    void set_after_append_hook(std::function<void()> hook);

private:
    struct Session {
        SessionSchedule schedule;
        int completed = 0;
        std::optional<std::int64_t> issued_at_ms;
    };

    Session &session_locked(const std::string &participant_id);
    TrialPlan plan_locked(const std::string &participant_id, const Session &session, int index) const;
    std::string trial_id(const std::string &participant_id, std::uint64_t seed, int index) const;
    void replay();
    void append_line(const std::string &line);

    ServiceConfig config_;
    std::vector<PairEntry> pairs_;
    std::vector<CatchEntry> catches_;
    int catch_count_ = 0;
    mutable std::mutex mutex_;
    std::map<std::string, Session> sessions_;
    std::vector<VoteRecord> votes_;
    std::size_t catch_votes_ = 0;
    int log_fd_ = -1;
    std::function<void()> after_append_;
};

class HttpServer {
public:
    explicit HttpServer(StudyService &service);
    ~HttpServer();

    HttpServer(const HttpServer &) = delete;
    HttpServer &operator=(const HttpServer &) = delete;

    /// Binds host:port (port 0 picks a free port) and returns the bound port.
    int bind(const std::string &host, int port);
    /// Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace seamcam
