#include "chai/config.hpp"

#include "chai/error.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace chai {

std::optional<std::string> process_env(std::string_view name) {
    const char* value = std::getenv(std::string(name).c_str());
    if (!value) return std::nullopt;
    return std::string(value);
}

ServiceConfig parse_config(std::string_view document) {
    ServiceConfig config;
    try {
        auto doc = Json::parse(document.begin(), document.end());
        if (!doc.is_object()) throw Error(ErrorKind::parse, "config must be a JSON object");
        if (doc.contains("data_dir")) config.data_dir = doc.at("data_dir").get<std::string>();
        if (doc.contains("disclaimer_cues")) config.disclaimer_cues = doc.at("disclaimer_cues").get<std::vector<std::string>>();
        if (doc.contains("listen")) {
            const auto& listen = doc.at("listen");
            config.host = listen.value("host", config.host);
            config.port = listen.value("port", config.port);
        }
        if (doc.contains("agent")) {
            const auto& a = doc.at("agent");
            RemoteProfile profile;
            profile.endpoint = a.value("endpoint", "");
            profile.model = a.value("model", "");
            profile.temperature = a.value("temperature", profile.temperature);
            profile.timeout_seconds = a.value("timeout_seconds", profile.timeout_seconds);
            profile.max_retries = a.value("max_retries", profile.max_retries);
            config.agent = profile;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed config: ") + e.what());
    }
    if (config.agent) {
        if (auto violations = validate_profile(*config.agent); !violations.empty()) {
            throw Error(ErrorKind::validation, std::move(violations));
        }
    }
    return config;
}

ServiceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::not_found, "cannot open config " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void apply_env_overrides(ServiceConfig& config, const EnvLookup& env) {
    if (auto v = env("CHAI_DATA_DIR"); v && !v->empty()) config.data_dir = *v;
    if (auto v = env("CHAI_API_TOKEN")) config.api_token = *v;
    auto endpoint = env("CHAI_AGENT_ENDPOINT");
    auto model = env("CHAI_AGENT_MODEL");
    auto temperature = env("CHAI_AGENT_TEMPERATURE");
    if ((endpoint || model || temperature) && !config.agent) config.agent = RemoteProfile{};
    if (endpoint) config.agent->endpoint = *endpoint;
    if (model) config.agent->model = *model;
    if (temperature) {
        try {
            config.agent->temperature = std::stod(*temperature);
        } catch (const std::exception&) {
            throw Error(ErrorKind::validation, "CHAI_AGENT_TEMPERATURE: not a number");
        }
    }
}

}  // namespace chai
