#include "chai/session.hpp"

#include "chai/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>

namespace chai {
namespace {

std::string make_id(char prefix, std::size_t ordinal) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%c%06zu", prefix, ordinal);
    return buffer;
}

Artifact* find_mutable(SessionState& state, std::string_view id) {
    for (auto& a : state.board) {
        if (a.id == id) return &a;
    }
    return nullptr;
}

Cluster* find_cluster_mutable(SessionState& state, std::string_view id) {
    for (auto& c : state.clusters) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

Artifact& require_artifact(SessionState& state, std::string_view id) {
    if (auto* a = find_mutable(state, id)) return *a;
    throw Error(ErrorKind::parse, "event references unknown artifact " + std::string(id));
}

void leave_cluster(SessionState& state, Artifact& artifact) {
    if (!artifact.cluster_id) return;
    if (auto* cluster = find_cluster_mutable(state, *artifact.cluster_id)) {
        std::erase(cluster->member_ids, artifact.id);
    }
    artifact.cluster_id.reset();
}

struct Applier {
    SessionState& state;
    const SessionEvent& event;

    void operator()(const events::SessionStarted& e) const {
        if (!state.id.empty()) throw Error(ErrorKind::parse, "SessionStarted may only appear once");
        state.id = e.session_id;
        state.created_at = event.timestamp;
        state.activity = e.activity;
        state.context = SessionContext{e.context};
        state.mode = e.mode;
        state.agent = e.agent;
        state.phase = Phase::awaiting_agent;
    }
    void operator()(const events::AgentRequested& e) const {
        state.phase = Phase::awaiting_agent;
        state.current_step = e.step;
        state.pending_outbound = e.text;
        state.human_watermark = state.board.size();
    }
    void operator()(const events::AgentResponded& e) const {
        if (state.pending_outbound.empty()) throw Error(ErrorKind::parse, "AgentResponded without a request");
        state.conversation.append(Role::facilitator, state.pending_outbound);
        state.conversation.append(Role::agent, e.text);
        state.pending_outbound.clear();
        state.phase = Phase::reviewing;
    }
    void operator()(const events::ArtifactsRecorded& e) const {
        for (const auto& r : e.artifacts) {
            Artifact a;
            a.id = r.id;
            a.criterion_key = r.criterion_key;
            a.text = r.text;
            a.original_text = r.text;
            a.origin = Origin::agent;
            a.step = e.step;
            state.board.push_back(std::move(a));
        }
        state.commentary.push_back({e.step, e.disclaimers, e.unparsed});
    }
    void operator()(const events::HumanArtifactAdded& e) const {
        Artifact a;
        a.id = e.artifact_id;
        a.criterion_key = e.criterion_key;
        a.text = e.text;
        a.original_text = e.text;
        a.origin = Origin::human;
        a.author = e.author;
        state.board.push_back(std::move(a));
    }
    void operator()(const events::ArtifactReviewed& e) const {
        auto& a = require_artifact(state, e.artifact_id);
        switch (e.action) {
            case ReviewAction::accept:
                a.status = ArtifactStatus::accepted;
                break;
            case ReviewAction::reject:
                a.status = ArtifactStatus::rejected;
                leave_cluster(state, a);
                break;
            case ReviewAction::amend:
                a.text = e.text;
                break;
        }
    }
    void operator()(const events::ClusterAssigned& e) const {
        auto* cluster = find_cluster_mutable(state, e.cluster_id);
        if (!cluster) {
            state.clusters.push_back({e.cluster_id, e.label, {}});
            cluster = &state.clusters.back();
        }
        for (const auto& id : e.artifact_ids) {
            auto& a = require_artifact(state, id);
            if (a.cluster_id == cluster->id) continue;
            leave_cluster(state, a);
            a.cluster_id = cluster->id;
            cluster->member_ids.push_back(a.id);
        }
    }
    void operator()(const events::HillComposed& e) const {
        state.hills.push_back({e.hill_id, e.text, e.who_refs, e.what_refs, e.wow_refs});
    }
    void operator()(const events::SessionCompleted& e) const {
        state.phase = Phase::complete;
        state.completed_with_override = e.facilitator_override;
    }
};

std::string clean(std::string_view s) { return std::string(text::trim(s)); }

}  // namespace

std::string_view to_string(Mode mode) noexcept { return mode == Mode::full_run ? "full_run" : "stepwise"; }

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::awaiting_agent: return "awaiting_agent";
        case Phase::reviewing: return "reviewing";
        case Phase::complete: return "complete";
    }
    return "unknown";
}

std::string_view to_string(ArtifactStatus status) noexcept {
    switch (status) {
        case ArtifactStatus::proposed: return "proposed";
        case ArtifactStatus::accepted: return "accepted";
        case ArtifactStatus::rejected: return "rejected";
    }
    return "unknown";
}

std::string_view to_string(ReviewAction action) noexcept {
    switch (action) {
        case ReviewAction::accept: return "accept";
        case ReviewAction::reject: return "reject";
        case ReviewAction::amend: return "amend";
    }
    return "unknown";
}

Mode mode_from_string(std::string_view name) {
    if (name == "stepwise") return Mode::stepwise;
    if (name == "full" || name == "full_run" || name == "full-run") return Mode::full_run;
    throw Error(ErrorKind::validation, "mode: unknown value \"" + std::string(name) + "\"");
}

Phase phase_from_string(std::string_view name) {
    if (name == "awaiting_agent") return Phase::awaiting_agent;
    if (name == "reviewing") return Phase::reviewing;
    if (name == "complete") return Phase::complete;
    throw Error(ErrorKind::parse, "unknown phase \"" + std::string(name) + "\"");
}

ArtifactStatus status_from_string(std::string_view name) {
    if (name == "proposed") return ArtifactStatus::proposed;
    if (name == "accepted") return ArtifactStatus::accepted;
    if (name == "rejected") return ArtifactStatus::rejected;
    throw Error(ErrorKind::parse, "unknown status \"" + std::string(name) + "\"");
}

ReviewAction review_action_from_string(std::string_view name) {
    if (name == "accept") return ReviewAction::accept;
    if (name == "reject") return ReviewAction::reject;
    if (name == "amend") return ReviewAction::amend;
    throw Error(ErrorKind::validation, "decision: unknown value \"" + std::string(name) + "\"");
}

const Artifact* SessionState::find_artifact(std::string_view artifact_id) const noexcept {
    for (const auto& a : board) {
        if (a.id == artifact_id) return &a;
    }
    return nullptr;
}

const Cluster* SessionState::find_cluster(std::string_view cluster_id) const noexcept {
    for (const auto& c : clusters) {
        if (c.id == cluster_id) return &c;
    }
    return nullptr;
}

const Cluster* SessionState::find_cluster_by_label(std::string_view label) const noexcept {
    for (const auto& c : clusters) {
        if (c.label == label) return &c;
    }
    return nullptr;
}

std::string_view SessionEvent::type_name() const noexcept {
    static constexpr std::string_view names[] = {
        "SessionStarted",     "AgentRequested",   "AgentResponded",
        "ArtifactsRecorded",  "HumanArtifactAdded", "ArtifactReviewed",
        "ClusterAssigned",    "HillComposed",     "SessionCompleted",
    };
    return names[payload.index()];
}

void apply_event(SessionState& state, const SessionEvent& event) {
    if (state.id.empty() && !std::holds_alternative<events::SessionStarted>(event.payload)) {
        throw Error(ErrorKind::parse, "log must begin with SessionStarted");
    }
    std::visit(Applier{state, event}, event.payload);
}

SessionState replay(std::span<const SessionEvent> log) {
    if (log.empty()) throw Error(ErrorKind::parse, "empty event log (SessionStarted required first)");
    SessionState state;
    std::uint64_t expected = 1;
    for (const auto& event : log) {
        if (event.sequence != expected) {
            throw Error(ErrorKind::parse, "event sequence gap: expected " + std::to_string(expected) + ", found " +
                                              std::to_string(event.sequence));
        }
        apply_event(state, event);
        ++expected;
    }
    return state;
}

std::string utc_timestamp_now() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::time_t seconds = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&seconds, &tm);
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buffer;
}

std::vector<const Artifact*> pending_human_artifacts(const SessionState& state) {
    std::vector<const Artifact*> pending;
    for (std::size_t i = state.human_watermark; i < state.board.size(); ++i) {
        const auto& a = state.board[i];
        if (a.origin == Origin::human && a.status != ArtifactStatus::rejected) pending.push_back(&a);
    }
    return pending;
}

std::string compose_turn_message(const SessionState& state, const ExecuteDirective& directive) {
    auto pending = pending_human_artifacts(state);
    std::string out;
    for (const auto& criterion : state.activity.criteria) {
        std::string block;
        std::size_t n = 0;
        for (const auto* a : pending) {
            if (a->criterion_key != criterion.key) continue;
            block += "\n" + std::to_string(++n) + ". " + a->text;
        }
        if (n == 0) continue;
        out += "The human participants added the following \"" + criterion.key + "\" ideas:" + block + "\n\n";
    }
    return out + directive.text;
}

// -- Session ----------------------------------------------------------------

Session::Session(SessionOptions options) : options_(std::move(options)) {
    if (!options_.clock) options_.clock = utc_timestamp_now;
}

Session Session::start(ActivityDefinition activity, SessionContext context, Mode mode, SessionOptions options) {
    auto violations = validate_activity(activity);
    if (text::is_blank(context.narrative)) violations.emplace_back("context: must not be empty");
    if (options.id.empty()) violations.emplace_back("id: must not be empty");
    if (!violations.empty()) throw Error(ErrorKind::validation, std::move(violations));

    auto directive = mode == Mode::stepwise ? make_step_directive(activity, 1) : make_full_run_directive(activity);
    auto prompt = compose_initial_prompt(activity, context, directive);

    Session session(std::move(options));
    session.emit(events::SessionStarted{session.options_.id, std::move(activity), std::move(context.narrative), mode,
                                        session.options_.agent});
    session.emit(events::AgentRequested{
        directive.scope == DirectiveScope::step ? std::optional<int>(directive.step) : std::nullopt,
        std::move(prompt.full_text)});
    return session;
}

Session Session::resume(std::vector<SessionEvent> log, SessionOptions options) {
    Session session(std::move(options));
    session.state_ = replay(log);
    session.events_ = std::move(log);
    session.options_.id = session.state_.id;
    return session;
}

void Session::emit(EventPayload payload) {
    SessionEvent event{events_.size() + 1, options_.clock(), std::move(payload)};
    apply_event(state_, event);
    events_.push_back(std::move(event));
}

void Session::require_open() const {
    if (state_.phase == Phase::complete) throw Error(ErrorKind::conflict, "session " + state_.id + " is complete");
}

void Session::apply_agent_response(std::string_view reply, Json agent) {
    require_open();
    if (state_.phase != Phase::awaiting_agent) {
        throw Error(ErrorKind::conflict, "no agent request is pending (phase " + std::string(to_string(state_.phase)) + ")");
    }
    if (text::is_blank(reply)) throw Error(ErrorKind::validation, "response: must not be empty");

    ParsedResponse parsed;
    if (state_.mode == Mode::full_run) {
        parsed = parse_full_response(reply, state_.activity.criteria, options_.parser);
    } else {
        const auto* step = state_.activity.find_step(state_.current_step.value_or(0));
        if (step && step->produces_criterion) {
            parsed = parse_step_response(reply, *step->produces_criterion, options_.parser);
        } else {
            parsed = parse_commentary(reply, options_.parser);
        }
    }

    events::ArtifactsRecorded recorded;
    recorded.step = state_.current_step;
    std::size_t next = state_.board.size();
    for (auto& draft : parsed.drafts) {
        recorded.artifacts.push_back({make_id('a', ++next), std::move(draft.criterion_key), std::move(draft.text)});
    }
    recorded.disclaimers = parsed.disclaimer_texts();
    recorded.unparsed = parsed.unparsed_texts();

    emit(events::AgentResponded{std::string(reply), std::move(agent)});
    emit(std::move(recorded));
}

const std::string& Session::advance(const AdvanceOptions& options) {
    require_open();
    if (state_.mode != Mode::stepwise) throw Error(ErrorKind::conflict, "advance requires a stepwise session");
    if (state_.phase != Phase::reviewing) {
        throw Error(ErrorKind::conflict, "cannot advance while " + std::string(to_string(state_.phase)));
    }
    const int last = state_.activity.step_count();
    int next = state_.current_step.value_or(0) + 1;
    if (next > last) throw Error(ErrorKind::conflict, "already at the last step; use complete");
    if (!options.visit_commentary_steps) {
        while (next < last && !state_.activity.find_step(next)->produces_criterion) ++next;
    }
    auto directive = make_step_directive(state_.activity, next);
    emit(events::AgentRequested{next, compose_turn_message(state_, directive)});
    return state_.pending_outbound;
}

std::string Session::submit_human_artifact(std::string_view criterion, std::string_view artifact_text,
                                           std::string_view author) {
    require_open();
    std::vector<std::string> violations;
    if (!state_.activity.find_criterion(criterion)) {
        violations.push_back("criterion: unknown criterion \"" + std::string(criterion) + "\"");
    }
    if (text::is_blank(artifact_text)) violations.emplace_back("text: must not be empty");
    if (!violations.empty()) throw Error(ErrorKind::validation, std::move(violations));

    auto id = make_id('a', state_.board.size() + 1);
    auto who = clean(author);
    emit(events::HumanArtifactAdded{id, std::string(criterion), clean(artifact_text),
                                    who.empty() ? std::string("facilitator") : who});
    return id;
}

void Session::review_artifact(std::string_view artifact_id, const ReviewDecision& decision) {
    require_open();
    const auto* artifact = state_.find_artifact(artifact_id);
    if (!artifact) throw Error(ErrorKind::not_found, "unknown artifact " + std::string(artifact_id));
    if (artifact->terminal()) {
        throw Error(ErrorKind::conflict,
                    "artifact " + artifact->id + " is already " + std::string(to_string(artifact->status)));
    }
    if (decision.action == ReviewAction::amend && text::is_blank(decision.text)) {
        throw Error(ErrorKind::validation, "text: amended text must not be empty");
    }
    emit(events::ArtifactReviewed{artifact->id, decision.action,
                                  decision.action == ReviewAction::amend ? clean(decision.text) : std::string()});
}

std::string Session::assign_cluster(std::span<const std::string> artifact_ids, std::string_view label) {
    require_open();
    auto name = clean(label);
    std::vector<std::string> violations;
    if (name.empty()) violations.emplace_back("label: must not be empty");
    if (artifact_ids.empty()) violations.emplace_back("artifacts: at least one required");
    if (!violations.empty()) throw Error(ErrorKind::validation, std::move(violations));

    std::vector<std::string> ids;
    for (const auto& id : artifact_ids) {
        const auto* a = state_.find_artifact(id);
        if (!a) throw Error(ErrorKind::not_found, "unknown artifact " + id);
        if (a->status == ArtifactStatus::rejected) {
            throw Error(ErrorKind::conflict, "artifact " + id + " is rejected and cannot be clustered");
        }
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    const auto* existing = state_.find_cluster_by_label(name);
    auto cluster_id = existing ? existing->id : make_id('c', state_.clusters.size() + 1);
    emit(events::ClusterAssigned{cluster_id, name, std::move(ids)});
    return cluster_id;
}

std::string Session::compose_hill(std::span<const std::string> who_ids, std::span<const std::string> what_ids,
                                  std::span<const std::string> wow_ids, std::string_view statement) {
    require_open();
    std::vector<std::string> violations;
    if (who_ids.empty()) violations.emplace_back("hill requires a who");
    if (what_ids.empty()) violations.emplace_back("hill requires a what");
    if (wow_ids.empty()) violations.emplace_back("hill requires a wow");
    if (text::is_blank(statement)) violations.emplace_back("text: must not be empty");

    auto check = [&](std::span<const std::string> ids, std::string_view criterion) {
        for (const auto& id : ids) {
            const auto* a = state_.find_artifact(id);
            if (!a) throw Error(ErrorKind::not_found, "unknown artifact " + id);
            if (a->status != ArtifactStatus::accepted) {
                violations.push_back("artifact " + id + " is not accepted");
            } else if (a->criterion_key != criterion) {
                violations.push_back("artifact " + id + " is not a \"" + std::string(criterion) + "\" artifact");
            }
        }
    };
    check(who_ids, "who");
    check(what_ids, "what");
    check(wow_ids, "wow");
    if (!violations.empty()) throw Error(ErrorKind::validation, std::move(violations));

    auto id = make_id('h', state_.hills.size() + 1);
    emit(events::HillComposed{id, clean(statement), {who_ids.begin(), who_ids.end()},
                              {what_ids.begin(), what_ids.end()}, {wow_ids.begin(), wow_ids.end()}});
    return id;
}

void Session::complete(bool facilitator_override) {
    require_open();
    if (state_.phase != Phase::reviewing) {
        throw Error(ErrorKind::conflict, "cannot complete while " + std::string(to_string(state_.phase)));
    }
    bool at_last = state_.mode == Mode::full_run || state_.current_step == state_.activity.step_count();
    if (!at_last && !facilitator_override) {
        throw Error(ErrorKind::conflict, "step " + std::to_string(state_.current_step.value_or(0)) + " of " +
                                             std::to_string(state_.activity.step_count()) +
                                             " is not the last step; complete with override");
    }
    emit(events::SessionCompleted{!at_last});
}

}  // namespace chai
