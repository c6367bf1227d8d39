#pragma once

#include "chai/agent.hpp"
#include "chai/config.hpp"
#include "chai/export.hpp"
#include "chai/session.hpp"
#include "chai/store.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chai {

enum class AgentKind { manual, scripted, remote };

struct AgentSpec {
    AgentKind kind = AgentKind::manual;
    std::vector<std::string> transcript;        // scripted
    std::optional<std::string> model;           // remote overrides
    std::optional<double> temperature;
};

/// Null for manual sessions. Remote agents need `config.agent`.
std::shared_ptr<AgentProvider> make_agent(const AgentSpec& spec, const ServiceConfig& config);

struct CreateSessionRequest {
    ActivityDefinition activity;
    SessionContext context;
    Mode mode = Mode::stepwise;
    std::shared_ptr<AgentProvider> agent;  // null: facilitator pastes replies
};

/// Application layer shared by the CLI and the HTTP API. Owns the live
/// sessions and their persistence; every mutation of one session runs under
/// that session's writer lock, in arrival order, and returns the state after
/// it was applied. Readers never take the writer lock.
class SessionService {
public:
    explicit SessionService(ServiceConfig config, Clock clock = utc_timestamp_now);
    ~SessionService();

    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }
    [[nodiscard]] SessionStore& store() noexcept { return store_; }

    [[nodiscard]] std::vector<SessionSummary> list() const;

    /// Creates the session and records the initial prompt. Does not contact
    /// the agent; call drive() for that.
    SessionState create(const CreateSessionRequest& request);

    [[nodiscard]] SessionState get(std::string_view id) const;

    /// Agents live in memory only; the event log records which one answered.
    void attach_agent(std::string_view id, std::shared_ptr<AgentProvider> agent);
    [[nodiscard]] bool has_agent(std::string_view id) const;

    /// Sends the pending outbound message to the attached agent and records
    /// the reply. No-op without an agent. Throws Error(transport) on failure,
    /// leaving the session awaiting the agent.
    SessionState drive(std::string_view id);

    /// Moves to the next step and, when an agent is attached, drives it.
    SessionState advance(std::string_view id, const AdvanceOptions& options = {});

    SessionState respond(std::string_view id, std::string_view text);
    SessionState add_artifact(std::string_view id, std::string_view criterion, std::string_view text,
                              std::string_view author);
    SessionState review(std::string_view id, std::string_view artifact_id, const ReviewDecision& decision);
    SessionState cluster(std::string_view id, std::span<const std::string> artifact_ids, std::string_view label);
    SessionState compose_hill(std::string_view id, std::span<const std::string> who,
                              std::span<const std::string> what, std::span<const std::string> wow,
                              std::string_view text);
    SessionState complete(std::string_view id, bool facilitator_override);

    [[nodiscard]] std::vector<SessionEvent> events_after(std::string_view id, std::uint64_t after) const;

    /// Blocks until an event past `after` exists or the timeout elapses.
    [[nodiscard]] std::vector<SessionEvent> wait_for_events(std::string_view id, std::uint64_t after,
                                                            std::chrono::milliseconds timeout) const;

    [[nodiscard]] ExportDocument export_session(std::string_view id, ExportFormat format) const;

    /// Wakes every blocked wait_for_events call; used at shutdown.
    void interrupt_waiters();

private:
    struct Entry;

    std::shared_ptr<Entry> entry(std::string_view id) const;
    SessionOptions session_options(std::string id) const;
    template <typename Op>
    SessionState mutate(std::string_view id, Op&& op);
    void publish(Entry& entry);

    ServiceConfig config_;
    Clock clock_;
    SessionStore store_;
    mutable std::mutex entries_mutex_;
    mutable std::map<std::string, std::shared_ptr<Entry>, std::less<>> entries_;
};

}  // namespace chai
