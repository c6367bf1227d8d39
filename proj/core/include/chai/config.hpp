#pragma once

#include "chai/agent.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chai {

/// Service configuration. File keys (all optional):
///   data_dir, disclaimer_cues, listen.host, listen.port,
///   agent.endpoint, agent.model, agent.temperature,
///   agent.timeout_seconds, agent.max_retries
/// Environment overrides: CHAI_DATA_DIR, CHAI_AGENT_ENDPOINT,
/// CHAI_AGENT_MODEL, CHAI_AGENT_TEMPERATURE, CHAI_API_TOKEN.
/// The agent bearer token is only ever read from CHAI_AGENT_TOKEN.
struct ServiceConfig {
    std::filesystem::path data_dir = "chai-data";
    std::optional<RemoteProfile> agent;
    std::vector<std::string> disclaimer_cues;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string api_token;  // shared local token; empty disables the check
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

std::optional<std::string> process_env(std::string_view name);

ServiceConfig parse_config(std::string_view document);
ServiceConfig load_config(const std::filesystem::path& path);
void apply_env_overrides(ServiceConfig& config, const EnvLookup& env = process_env);

}  // namespace chai
