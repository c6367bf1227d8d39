#pragma once

#include "chai/json.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chai {

enum class Role { system, facilitator, agent };

std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view name);

struct Message {
    Role role = Role::facilitator;
    std::string text;
    std::size_t ordinal = 0;  // 1-based, contiguous

    bool operator==(const Message&) const = default;
};

/// Append-only chat history. After an optional leading system message the
/// roles strictly alternate facilitator, agent, facilitator, ...
class AgentConversation {
public:
    void append(Role role, std::string text);

    [[nodiscard]] const std::vector<Message>& messages() const noexcept { return messages_; }
    [[nodiscard]] std::size_t size() const noexcept { return messages_.size(); }
    [[nodiscard]] bool empty() const noexcept { return messages_.empty(); }
    [[nodiscard]] std::size_t agent_reply_count() const noexcept;
    [[nodiscard]] Role next_role() const noexcept;

    bool operator==(const AgentConversation&) const = default;

private:
    std::vector<Message> messages_;
};

/// A conversational agent. Implementations must be safe to call
/// concurrently for different conversations.
class AgentProvider {
public:
    virtual ~AgentProvider() = default;

    /// `history` ends with the outbound facilitator message. Returns the
    /// agent's reply or throws Error(transport).
    virtual std::string reply(std::span<const Message> history) = 0;

    /// Provenance recorded with each reply (type, model, temperature).
    [[nodiscard]] virtual Json descriptor() const = 0;
};

struct SendResult {
    AgentConversation conversation;
    std::string reply;
};

/// Appends the outbound message and the agent reply. The input conversation
/// is never modified, so a failed or cancelled send leaves it intact.
SendResult send(const AgentConversation& conversation, std::string_view outbound,
                AgentProvider& provider);

// -- scripted ---------------------------------------------------------------

/// Replays a stored transcript. The reply for a turn is the transcript entry
/// at the number of agent messages already in the history, so a provider can
/// be re-attached to a resumed conversation and stays deterministic.
class ScriptedProvider final : public AgentProvider {
public:
    explicit ScriptedProvider(std::vector<std::string> transcript);

    std::string reply(std::span<const Message> history) override;
    [[nodiscard]] Json descriptor() const override;

    [[nodiscard]] const std::vector<std::string>& transcript() const noexcept { return transcript_; }

private:
    std::vector<std::string> transcript_;
};

/// Transcript file: a UTF-8 JSON array of reply strings.
std::vector<std::string> parse_transcript(std::string_view document);
std::vector<std::string> load_transcript(const std::filesystem::path& path);
std::string serialize_transcript(const std::vector<std::string>& transcript);
void save_transcript(const std::filesystem::path& path, const std::vector<std::string>& transcript);

// -- remote -----------------------------------------------------------------

struct RemoteProfile {
    std::string endpoint;  // e.g. https://host/v1/chat/completions
    std::string model;
    double temperature = 0.7;
    double timeout_seconds = 60.0;
    int max_retries = 2;
    std::chrono::milliseconds retry_backoff{500};
    // Name of the environment variable holding the bearer token.
    std::string token_env = "CHAI_AGENT_TOKEN";
};

struct ScriptedProfile {
    std::filesystem::path transcript;
};

using AgentProfile = std::variant<ScriptedProfile, RemoteProfile>;

std::vector<std::string> validate_profile(const AgentProfile& profile);

/// Speaks the common chat-completion wire shape: the whole history goes out
/// as role/content messages on every call, one assistant message comes back.
class RemoteProvider final : public AgentProvider {
public:
    explicit RemoteProvider(RemoteProfile profile);

    std::string reply(std::span<const Message> history) override;
    [[nodiscard]] Json descriptor() const override;

    [[nodiscard]] const RemoteProfile& profile() const noexcept { return profile_; }

    /// Request body for the given history; exposed for tests.
    [[nodiscard]] Json request_body(std::span<const Message> history) const;

private:
    RemoteProfile profile_;
    std::string scheme_host_port_;
    std::string path_;
};

std::unique_ptr<AgentProvider> make_provider(const AgentProfile& profile);

/// Descriptor for replies pasted in by the facilitator.
Json manual_agent_descriptor();

}  // namespace chai
