#include "chai/agent.hpp"

#include "chai/error.hpp"
#include "text.hpp"

#include <fstream>
#include <sstream>

namespace chai {

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::system: return "system";
        case Role::facilitator: return "facilitator";
        case Role::agent: return "agent";
    }
    return "unknown";
}

Role role_from_string(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "facilitator") return Role::facilitator;
    if (name == "agent") return Role::agent;
    throw Error(ErrorKind::parse, "unknown role \"" + std::string(name) + "\"");
}

Role AgentConversation::next_role() const noexcept {
    if (messages_.empty() || messages_.back().role != Role::facilitator) return Role::facilitator;
    return Role::agent;
}

void AgentConversation::append(Role role, std::string text) {
    if (text::is_blank(text)) throw Error(ErrorKind::validation, "message: text must not be empty");
    if (role == Role::system) {
        if (!messages_.empty()) throw Error(ErrorKind::validation, "message: system message must come first");
    } else if (role != next_role()) {
        throw Error(ErrorKind::validation, "message: expected a " + std::string(to_string(next_role())) +
                                               " message, got " + std::string(to_string(role)));
    }
    messages_.push_back({role, std::move(text), messages_.size() + 1});
}

std::size_t AgentConversation::agent_reply_count() const noexcept {
    std::size_t n = 0;
    for (const auto& m : messages_) n += m.role == Role::agent ? 1 : 0;
    return n;
}

SendResult send(const AgentConversation& conversation, std::string_view outbound, AgentProvider& provider) {
    if (text::is_blank(outbound)) throw Error(ErrorKind::validation, "outbound message must not be empty");
    SendResult result{conversation, {}};
    result.conversation.append(Role::facilitator, std::string(outbound));
    result.reply = provider.reply(result.conversation.messages());
    if (text::is_blank(result.reply)) throw Error(ErrorKind::transport, "agent returned an empty reply");
    result.conversation.append(Role::agent, result.reply);
    return result;
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> transcript) : transcript_(std::move(transcript)) {}

std::string ScriptedProvider::reply(std::span<const Message> history) {
    std::size_t turn = 0;
    for (const auto& m : history) turn += m.role == Role::agent ? 1 : 0;
    if (turn >= transcript_.size()) {
        throw Error(ErrorKind::transport, "script exhausted after " + std::to_string(transcript_.size()) + " replies");
    }
    return transcript_[turn];
}

Json ScriptedProvider::descriptor() const { return Json{{"type", "scripted"}}; }

Json manual_agent_descriptor() { return Json{{"type", "manual"}}; }

std::vector<std::string> parse_transcript(std::string_view document) {
    Json doc;
    try {
        doc = Json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed transcript: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorKind::parse, "transcript must be a JSON array of strings");
    std::vector<std::string> replies;
    for (const auto& entry : doc) {
        if (!entry.is_string()) throw Error(ErrorKind::parse, "transcript entries must be strings");
        replies.push_back(entry.get<std::string>());
    }
    return replies;
}

std::vector<std::string> load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::not_found, "cannot open transcript " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_transcript(buffer.str());
}

std::string serialize_transcript(const std::vector<std::string>& transcript) {
    return Json(transcript).dump(2, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
}

void save_transcript(const std::filesystem::path& path, const std::vector<std::string>& transcript) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::validation, "cannot write transcript " + path.string());
    out << serialize_transcript(transcript);
}

std::vector<std::string> validate_profile(const AgentProfile& profile) {
    std::vector<std::string> violations;
    if (const auto* remote = std::get_if<RemoteProfile>(&profile)) {
        if (remote->endpoint.empty()) violations.emplace_back("agent.endpoint: must not be empty");
        if (remote->timeout_seconds <= 0) violations.emplace_back("agent.timeout_seconds: must be > 0");
        if (remote->max_retries < 0) violations.emplace_back("agent.max_retries: must be >= 0");
        if (remote->temperature < 0) violations.emplace_back("agent.temperature: must be >= 0");
    } else if (std::get<ScriptedProfile>(profile).transcript.empty()) {
        violations.emplace_back("agent.transcript: path must not be empty");
    }
    return violations;
}

std::unique_ptr<AgentProvider> make_provider(const AgentProfile& profile) {
    if (auto violations = validate_profile(profile); !violations.empty()) {
        throw Error(ErrorKind::validation, std::move(violations));
    }
    if (const auto* remote = std::get_if<RemoteProfile>(&profile)) return std::make_unique<RemoteProvider>(*remote);
    return std::make_unique<ScriptedProvider>(load_transcript(std::get<ScriptedProfile>(profile).transcript));
}

}  // namespace chai
