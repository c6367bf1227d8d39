#include "chai/agent.hpp"
#include "chai/config.hpp"
#include "chai/error.hpp"

#include <httplib.h>

#include <thread>

namespace chai {
namespace {

std::string wire_role(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::facilitator: return "user";
        case Role::agent: return "assistant";
    }
    return "user";
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

RemoteProvider::RemoteProvider(RemoteProfile profile) : profile_(std::move(profile)) {
    if (auto violations = validate_profile(profile_); !violations.empty()) {
        throw Error(ErrorKind::validation, std::move(violations));
    }
    auto scheme_end = profile_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::validation, "agent.endpoint: expected scheme://host[:port]/path");
    }
    auto path_start = profile_.endpoint.find('/', scheme_end + 3);
    scheme_host_port_ = profile_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : profile_.endpoint.substr(path_start);
}

Json RemoteProvider::request_body(std::span<const Message> history) const {
    Json messages = Json::array();
    for (const auto& m : history) messages.push_back(Json{{"role", wire_role(m.role)}, {"content", m.text}});
    Json body = Json::object();
    if (!profile_.model.empty()) body["model"] = profile_.model;
    body["temperature"] = profile_.temperature;
    body["messages"] = std::move(messages);
    return body;
}

Json RemoteProvider::descriptor() const {
    return Json{{"type", "remote"}, {"model", profile_.model}, {"temperature", profile_.temperature}};
}

std::string RemoteProvider::reply(std::span<const Message> history) {
    httplib::Client client(scheme_host_port_);
    auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(profile_.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (auto token = process_env(profile_.token_env); token && !token->empty()) {
        headers.emplace("Authorization", "Bearer " + *token);
    }
    const auto body = request_body(history).dump();

    std::string last_error;
    for (int attempt = 0; attempt <= profile_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(profile_.retry_backoff * attempt);
        auto response = client.Post(path_, headers, body, "application/json");
        if (!response) {
            last_error = "transport error: " + httplib::to_string(response.error());
            continue;
        }
        if (response->status != 200) {
            last_error = "agent endpoint returned HTTP " + std::to_string(response->status);
            if (retryable(response->status)) continue;
            break;
        }
        try {
            auto doc = Json::parse(response->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::transport, std::string("malformed chat-completion response: ") + e.what());
        }
    }
    throw Error(ErrorKind::transport, last_error);
}

}  // namespace chai
