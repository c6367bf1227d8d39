#pragma once

#include "chai/json.hpp"
#include "chai/session.hpp"

#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chai {

struct SessionSummary {
    std::string id;
    std::string activity;
    Mode mode = Mode::stepwise;
    Phase phase = Phase::awaiting_agent;
    std::vector<std::pair<std::string, std::size_t>> counts;  // per criterion, activity order
    std::string created_at;

    bool operator==(const SessionSummary&) const = default;
};

SessionSummary summarize(const SessionState& state);
Json summary_to_json(const SessionSummary& summary);
SessionSummary summary_from_json(const Json& doc);

/// Directory-backed persistence:
///   <root>/sessions/<id>.jsonl   append-only event log (source of truth)
///   <root>/index.json            SessionSummary rows
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
    [[nodiscard]] std::filesystem::path log_path(std::string_view id) const;

    /// Reserves the next "sNNNNNN" id by creating its log file exclusively.
    std::string allocate_id();

    [[nodiscard]] bool exists(std::string_view id) const;
    void append(std::string_view id, std::span<const SessionEvent> events);
    [[nodiscard]] std::vector<SessionEvent> load(std::string_view id) const;

    void put_summary(const SessionSummary& summary);
    [[nodiscard]] std::vector<SessionSummary> summaries() const;

private:
    std::filesystem::path root_;
    mutable std::mutex index_mutex_;
};

}  // namespace chai
