#include "chai/serialization.hpp"

#include "chai/error.hpp"
#include "text.hpp"

namespace chai {
namespace {

template <typename T>
Json optional_json(const std::optional<T>& value) {
    return value ? Json(*value) : Json(nullptr);
}

std::optional<int> optional_int(const Json& doc, const char* field) {
    if (!doc.contains(field) || doc.at(field).is_null()) return std::nullopt;
    return doc.at(field).get<int>();
}

std::vector<std::string> strings(const Json& doc, const char* field) {
    return doc.at(field).get<std::vector<std::string>>();
}

struct PayloadEncoder {
    Json operator()(const events::SessionStarted& e) const {
        return Json{{"session_id", e.session_id},
                    {"activity", activity_to_json(e.activity)},
                    {"context", e.context},
                    {"mode", to_string(e.mode)},
                    {"agent", e.agent}};
    }
    Json operator()(const events::AgentRequested& e) const {
        return Json{{"step", optional_json(e.step)}, {"text", e.text}};
    }
    Json operator()(const events::AgentResponded& e) const { return Json{{"text", e.text}, {"agent", e.agent}}; }
    Json operator()(const events::ArtifactsRecorded& e) const {
        Json artifacts = Json::array();
        for (const auto& a : e.artifacts) {
            artifacts.push_back(Json{{"id", a.id}, {"criterion", a.criterion_key}, {"text", a.text}});
        }
        return Json{{"step", optional_json(e.step)},
                    {"artifacts", std::move(artifacts)},
                    {"disclaimers", e.disclaimers},
                    {"unparsed", e.unparsed}};
    }
    Json operator()(const events::HumanArtifactAdded& e) const {
        return Json{{"artifact_id", e.artifact_id}, {"criterion", e.criterion_key}, {"text", e.text},
                    {"author", e.author}};
    }
    Json operator()(const events::ArtifactReviewed& e) const {
        Json doc{{"artifact_id", e.artifact_id}, {"action", to_string(e.action)}};
        if (e.action == ReviewAction::amend) doc["text"] = e.text;
        return doc;
    }
    Json operator()(const events::ClusterAssigned& e) const {
        return Json{{"cluster_id", e.cluster_id}, {"label", e.label}, {"artifact_ids", e.artifact_ids}};
    }
    Json operator()(const events::HillComposed& e) const {
        return Json{{"hill_id", e.hill_id}, {"text", e.text}, {"who", e.who_refs}, {"what", e.what_refs},
                    {"wow", e.wow_refs}};
    }
    Json operator()(const events::SessionCompleted& e) const { return Json{{"override", e.facilitator_override}}; }
};

EventPayload decode_payload(std::string_view type, const Json& p) {
    if (type == "SessionStarted") {
        return events::SessionStarted{p.at("session_id").get<std::string>(), activity_from_json(p.at("activity")),
                                      p.at("context").get<std::string>(),
                                      mode_from_string(p.at("mode").get<std::string>()), p.at("agent")};
    }
    if (type == "AgentRequested") return events::AgentRequested{optional_int(p, "step"), p.at("text").get<std::string>()};
    if (type == "AgentResponded") return events::AgentResponded{p.at("text").get<std::string>(), p.at("agent")};
    if (type == "ArtifactsRecorded") {
        events::ArtifactsRecorded e;
        e.step = optional_int(p, "step");
        for (const auto& a : p.at("artifacts")) {
            e.artifacts.push_back({a.at("id").get<std::string>(), a.at("criterion").get<std::string>(),
                                   a.at("text").get<std::string>()});
        }
        e.disclaimers = strings(p, "disclaimers");
        e.unparsed = strings(p, "unparsed");
        return e;
    }
    if (type == "HumanArtifactAdded") {
        return events::HumanArtifactAdded{p.at("artifact_id").get<std::string>(), p.at("criterion").get<std::string>(),
                                          p.at("text").get<std::string>(), p.at("author").get<std::string>()};
    }
    if (type == "ArtifactReviewed") {
        auto action = review_action_from_string(p.at("action").get<std::string>());
        return events::ArtifactReviewed{p.at("artifact_id").get<std::string>(), action,
                                        action == ReviewAction::amend ? p.at("text").get<std::string>() : ""};
    }
    if (type == "ClusterAssigned") {
        return events::ClusterAssigned{p.at("cluster_id").get<std::string>(), p.at("label").get<std::string>(),
                                       strings(p, "artifact_ids")};
    }
    if (type == "HillComposed") {
        return events::HillComposed{p.at("hill_id").get<std::string>(), p.at("text").get<std::string>(),
                                    strings(p, "who"), strings(p, "what"), strings(p, "wow")};
    }
    if (type == "SessionCompleted") return events::SessionCompleted{p.at("override").get<bool>()};
    throw Error(ErrorKind::parse, "unknown event type \"" + std::string(type) + "\"");
}

}  // namespace

Json event_to_json(const SessionEvent& event) {
    return Json{{"sequence", event.sequence},
                {"timestamp", event.timestamp},
                {"type", event.type_name()},
                {"payload", std::visit(PayloadEncoder{}, event.payload)}};
}

SessionEvent event_from_json(const Json& doc) {
    try {
        SessionEvent event;
        event.sequence = doc.at("sequence").get<std::uint64_t>();
        event.timestamp = doc.at("timestamp").get<std::string>();
        event.payload = decode_payload(doc.at("type").get<std::string>(), doc.at("payload"));
        return event;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed event: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::parse, std::string("malformed event: ") + e.what());
    }
}

std::string encode_event_line(const SessionEvent& event) {
    return event_to_json(event).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
}

std::vector<SessionEvent> parse_event_log(std::string_view log) {
    std::vector<SessionEvent> events;
    auto lines = text::split_lines(log);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::is_blank(lines[i])) continue;
        try {
            events.push_back(event_from_json(Json::parse(lines[i].begin(), lines[i].end())));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, "line " + std::to_string(i + 1) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, "line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return events;
}

Json artifact_to_json(const Artifact& a) {
    Json doc{{"id", a.id},
             {"criterion", a.criterion_key},
             {"text", a.text},
             {"original_text", a.original_text},
             {"origin", a.origin == Origin::agent ? "agent" : "human"}};
    if (a.origin == Origin::human) doc["author"] = a.author;
    doc["status"] = to_string(a.status);
    doc["cluster_id"] = optional_json(a.cluster_id);
    doc["step"] = optional_json(a.step);
    return doc;
}

Json state_to_json(const SessionState& state) {
    Json conversation = Json::array();
    for (const auto& m : state.conversation.messages()) {
        conversation.push_back(Json{{"ordinal", m.ordinal}, {"role", to_string(m.role)}, {"text", m.text}});
    }
    Json board = Json::array();
    for (const auto& a : state.board) board.push_back(artifact_to_json(a));
    Json clusters = Json::array();
    for (const auto& c : state.clusters) {
        clusters.push_back(Json{{"id", c.id}, {"label", c.label}, {"member_ids", c.member_ids}});
    }
    Json hills = Json::array();
    for (const auto& h : state.hills) {
        hills.push_back(Json{{"id", h.id}, {"text", h.text}, {"who", h.who_refs}, {"what", h.what_refs},
                             {"wow", h.wow_refs}});
    }
    Json commentary = Json::array();
    for (const auto& c : state.commentary) {
        commentary.push_back(Json{{"step", optional_json(c.step)}, {"disclaimers", c.disclaimers},
                                  {"unparsed", c.unparsed}});
    }
    Json pending = Json::array();
    for (const auto* a : pending_human_artifacts(state)) pending.push_back(a->id);

    return Json{{"id", state.id},
                {"created_at", state.created_at},
                {"activity", activity_to_json(state.activity)},
                {"context", state.context.narrative},
                {"mode", to_string(state.mode)},
                {"phase", to_string(state.phase)},
                {"current_step", optional_json(state.current_step)},
                {"agent", state.agent},
                {"pending_outbound", state.pending_outbound.empty() ? Json(nullptr) : Json(state.pending_outbound)},
                {"pending_human_artifacts", std::move(pending)},
                {"conversation", std::move(conversation)},
                {"board", std::move(board)},
                {"clusters", std::move(clusters)},
                {"hills", std::move(hills)},
                {"commentary", std::move(commentary)},
                {"completed_with_override", state.completed_with_override}};
}

}  // namespace chai
