#pragma once

#include "chai/activity.hpp"
#include "chai/agent.hpp"
#include "chai/json.hpp"
#include "chai/parser.hpp"
#include "chai/prompt.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chai {

enum class Mode { full_run, stepwise };
enum class Phase { awaiting_agent, reviewing, complete };
enum class ArtifactStatus { proposed, accepted, rejected };
enum class Origin { agent, human };

std::string_view to_string(Mode mode) noexcept;
std::string_view to_string(Phase phase) noexcept;
std::string_view to_string(ArtifactStatus status) noexcept;
Mode mode_from_string(std::string_view name);
Phase phase_from_string(std::string_view name);
ArtifactStatus status_from_string(std::string_view name);

struct Artifact {
    std::string id;
    std::string criterion_key;
    std::string text;
    std::string original_text;
    Origin origin = Origin::agent;
    std::string author;  // set for human artifacts
    ArtifactStatus status = ArtifactStatus::proposed;
    std::optional<std::string> cluster_id;
    std::optional<int> step;  // step whose reply produced an agent artifact

    [[nodiscard]] bool terminal() const noexcept { return status != ArtifactStatus::proposed; }
    bool operator==(const Artifact&) const = default;
};

struct Cluster {
    std::string id;
    std::string label;
    std::vector<std::string> member_ids;  // insertion order, no duplicates

    bool operator==(const Cluster&) const = default;
};

struct HillStatement {
    std::string id;
    std::string text;
    std::vector<std::string> who_refs;
    std::vector<std::string> what_refs;
    std::vector<std::string> wow_refs;

    bool operator==(const HillStatement&) const = default;
};

/// Everything from an agent reply that did not become an artifact.
struct StepCommentary {
    std::optional<int> step;
    std::vector<std::string> disclaimers;
    std::vector<std::string> unparsed;

    bool operator==(const StepCommentary&) const = default;
};

struct SessionState {
    std::string id;
    std::string created_at;
    ActivityDefinition activity;
    SessionContext context;
    Mode mode = Mode::stepwise;
    Phase phase = Phase::awaiting_agent;
    std::optional<int> current_step;
    Json agent;  // descriptor recorded at session start
    AgentConversation conversation;
    std::string pending_outbound;   // last request, not yet answered
    std::size_t human_watermark = 0;  // board size when the last request went out
    std::vector<Artifact> board;
    std::vector<Cluster> clusters;
    std::vector<HillStatement> hills;
    std::vector<StepCommentary> commentary;
    bool completed_with_override = false;

    [[nodiscard]] const Artifact* find_artifact(std::string_view id) const noexcept;
    [[nodiscard]] const Cluster* find_cluster(std::string_view id) const noexcept;
    [[nodiscard]] const Cluster* find_cluster_by_label(std::string_view label) const noexcept;

    bool operator==(const SessionState&) const = default;
};

// -- events -----------------------------------------------------------------

enum class ReviewAction { accept, reject, amend };

std::string_view to_string(ReviewAction action) noexcept;
ReviewAction review_action_from_string(std::string_view name);

namespace events {

struct SessionStarted {
    std::string session_id;
    ActivityDefinition activity;
    std::string context;
    Mode mode = Mode::stepwise;
    Json agent;
    bool operator==(const SessionStarted&) const = default;
};

struct AgentRequested {
    std::optional<int> step;  // empty for a full run
    std::string text;
    bool operator==(const AgentRequested&) const = default;
};

struct AgentResponded {
    std::string text;
    Json agent;
    bool operator==(const AgentResponded&) const = default;
};

struct RecordedArtifact {
    std::string id;
    std::string criterion_key;
    std::string text;
    bool operator==(const RecordedArtifact&) const = default;
};

struct ArtifactsRecorded {
    std::optional<int> step;
    std::vector<RecordedArtifact> artifacts;
    std::vector<std::string> disclaimers;
    std::vector<std::string> unparsed;
    bool operator==(const ArtifactsRecorded&) const = default;
};

struct HumanArtifactAdded {
    std::string artifact_id;
    std::string criterion_key;
    std::string text;
    std::string author;
    bool operator==(const HumanArtifactAdded&) const = default;
};

struct ArtifactReviewed {
    std::string artifact_id;
    ReviewAction action = ReviewAction::accept;
    std::string text;  // amend only
    bool operator==(const ArtifactReviewed&) const = default;
};

struct ClusterAssigned {
    std::string cluster_id;
    std::string label;
    std::vector<std::string> artifact_ids;
    bool operator==(const ClusterAssigned&) const = default;
};

struct HillComposed {
    std::string hill_id;
    std::string text;
    std::vector<std::string> who_refs;
    std::vector<std::string> what_refs;
    std::vector<std::string> wow_refs;
    bool operator==(const HillComposed&) const = default;
};

struct SessionCompleted {
    bool facilitator_override = false;
    bool operator==(const SessionCompleted&) const = default;
};

}  // namespace events

using EventPayload = std::variant<events::SessionStarted, events::AgentRequested, events::AgentResponded,
                                  events::ArtifactsRecorded, events::HumanArtifactAdded,
                                  events::ArtifactReviewed, events::ClusterAssigned,
                                  events::HillComposed, events::SessionCompleted>;

struct SessionEvent {
    std::uint64_t sequence = 0;
    std::string timestamp;
    EventPayload payload;

    [[nodiscard]] std::string_view type_name() const noexcept;
    bool operator==(const SessionEvent&) const = default;
};

/// Applies one event to a state. Events are trusted to have been produced by
/// Session; a reference to something that does not exist throws Error(parse).
void apply_event(SessionState& state, const SessionEvent& event);

/// Pure fold over a log. Throws Error(parse) for an empty log, a sequence
/// gap, or a log that does not begin with SessionStarted.
SessionState replay(std::span<const SessionEvent> events);

// -- engine -----------------------------------------------------------------

using Clock = std::function<std::string()>;

/// ISO-8601 UTC with millisecond precision.
std::string utc_timestamp_now();

struct SessionOptions {
    std::string id = "s000001";
    Json agent = manual_agent_descriptor();
    ParserOptions parser;
    Clock clock = utc_timestamp_now;
};

struct AdvanceOptions {
    // By default, non-final steps that feed no criterion (the Hills
    // "diverge" step) are skipped; set to walk every step.
    bool visit_commentary_steps = false;
};

struct ReviewDecision {
    ReviewAction action = ReviewAction::accept;
    std::string text;

    static ReviewDecision accept() { return {ReviewAction::accept, {}}; }
    static ReviewDecision reject() { return {ReviewAction::reject, {}}; }
    static ReviewDecision amend(std::string text) { return {ReviewAction::amend, std::move(text)}; }
};

/// Human artifacts added since the last request and not rejected.
std::vector<const Artifact*> pending_human_artifacts(const SessionState& state);

/// Next-turn message: a list of pending human ideas per criterion, a blank
/// line, then the directive text.
std::string compose_turn_message(const SessionState& state, const ExecuteDirective& directive);

/// Event-sourced facilitation session. Every operation validates its
/// preconditions, emits events, and folds them into the state with the same
/// apply_event used by replay, so replay(events()) == state() always holds.
///
/// Not thread-safe; callers serialize mutations (see SessionService).
class Session {
public:
    static Session start(ActivityDefinition activity, SessionContext context, Mode mode,
                         SessionOptions options = {});

    /// Rebuilds a session from its log; further operations use `options`'
    /// clock and parser settings.
    static Session resume(std::vector<SessionEvent> events, SessionOptions options = {});

    [[nodiscard]] const SessionState& state() const noexcept { return state_; }
    [[nodiscard]] const std::vector<SessionEvent>& events() const noexcept { return events_; }
    [[nodiscard]] const std::string& pending_outbound() const noexcept { return state_.pending_outbound; }

    void apply_agent_response(std::string_view text, Json agent = manual_agent_descriptor());

    /// Returns the outbound message for the next step.
    const std::string& advance(const AdvanceOptions& options = {});

    std::string submit_human_artifact(std::string_view criterion, std::string_view text,
                                      std::string_view author);
    void review_artifact(std::string_view artifact_id, const ReviewDecision& decision);
    std::string assign_cluster(std::span<const std::string> artifact_ids, std::string_view label);
    std::string compose_hill(std::span<const std::string> who_ids, std::span<const std::string> what_ids,
                             std::span<const std::string> wow_ids, std::string_view text);
    void complete(bool facilitator_override = false);

private:
    explicit Session(SessionOptions options);

    void emit(EventPayload payload);
    void require_open() const;

    SessionOptions options_;
    SessionState state_;
    std::vector<SessionEvent> events_;
};

}  // namespace chai
