#pragma once

#include "chai/error.hpp"
#include "chai/json.hpp"
#include "chai/service.hpp"

#include <memory>
#include <string>

namespace chai {

/// Parses the "agent" member of a create request:
/// {"type":"manual"} | {"type":"scripted","transcript":[..]} |
/// {"type":"remote","model"?:..,"temperature"?:..}
AgentSpec agent_spec_from_json(const Json& doc);

/// HTTP status for an error kind (404, 409, 422, 502).
int http_status(ErrorKind kind) noexcept;

/// REST + server-sent-events front end for a SessionService. Routes and
/// bodies are documented in docs/api.md.
class ApiServer {
public:
    explicit ApiServer(SessionService& service, std::string api_token = {});
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds without serving. Port 0 picks a free port; returns the bound port.
    int bind(const std::string& host, int port);

    /// Serves on the bound socket until stop(). Blocks.
    void listen();

    /// listen() on a background thread, returning once the server is up.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace chai
