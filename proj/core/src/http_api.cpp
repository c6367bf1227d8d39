#include "chai/http_api.hpp"

#include "chai/error.hpp"
#include "chai/serialization.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

namespace chai {
namespace {

using namespace std::chrono_literals;

Json error_body(const Error& e) {
    return Json{{"error", to_string(e.kind())}, {"message", e.what()}, {"violations", e.violations()}};
}

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

Json request_json(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
        auto doc = Json::parse(req.body);
        if (!doc.is_object()) throw Error(ErrorKind::parse, "request body must be a JSON object");
        return doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed JSON body: ") + e.what());
    }
}

template <typename T>
T field(const Json& doc, const char* name) {
    if (!doc.contains(name)) throw Error(ErrorKind::validation, std::string(name) + ": required");
    try {
        return doc.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::validation, std::string(name) + ": wrong type");
    }
}

std::vector<std::string> id_list(const Json& doc, const char* name) {
    if (!doc.contains(name)) return {};
    const auto& v = doc.at(name);
    if (v.is_string()) return {v.get<std::string>()};
    return field<std::vector<std::string>>(doc, name);
}

ActivityDefinition activity_from_request(const Json& doc) {
    if (!doc.contains("activity")) throw Error(ErrorKind::validation, "activity: required");
    const auto& a = doc.at("activity");
    if (a.is_string()) {
        auto name = a.get<std::string>();
        auto builtin = find_builtin_activity(name);
        if (!builtin) throw Error(ErrorKind::not_found, "unknown activity \"" + name + "\"");
        return *builtin;
    }
    auto activity = activity_from_json(a);
    if (auto violations = validate_activity(activity); !violations.empty()) {
        throw Error(ErrorKind::validation, std::move(violations));
    }
    return activity;
}

Json prompt_json(const ComposedPrompt& prompt) {
    Json segments = Json::array();
    for (const auto& s : prompt.segments) segments.push_back(Json{{"kind", to_string(s.kind)}, {"text", s.text}});
    return Json{{"segments", std::move(segments)}, {"full_text", prompt.full_text}};
}

std::string sse_frame(const SessionEvent& e) {
    return "id: " + std::to_string(e.sequence) + "\nevent: " + std::string(e.type_name()) +
           "\ndata: " + event_to_json(e).dump() + "\n\n";
}

}  // namespace

AgentSpec agent_spec_from_json(const Json& doc) {
    AgentSpec spec;
    if (doc.is_null()) return spec;
    if (doc.is_string()) {
        auto type = doc.get<std::string>();
        if (type == "manual") return spec;
        if (type == "remote") {
            spec.kind = AgentKind::remote;
            return spec;
        }
        throw Error(ErrorKind::validation, "agent: unknown type \"" + type + "\"");
    }
    auto type = field<std::string>(doc, "type");
    if (type == "manual") return spec;
    if (type == "scripted") {
        spec.kind = AgentKind::scripted;
        spec.transcript = field<std::vector<std::string>>(doc, "transcript");
        return spec;
    }
    if (type == "remote") {
        spec.kind = AgentKind::remote;
        if (doc.contains("model")) spec.model = field<std::string>(doc, "model");
        if (doc.contains("temperature")) spec.temperature = field<double>(doc, "temperature");
        return spec;
    }
    throw Error(ErrorKind::validation, "agent: unknown type \"" + type + "\"");
}

int http_status(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::not_found: return 404;
        case ErrorKind::conflict: return 409;
        case ErrorKind::validation: return 422;
        case ErrorKind::parse: return 400;
        case ErrorKind::transport: return 502;
    }
    return 500;
}

struct ApiServer::Impl {
    SessionService& service;
    std::string api_token;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};

    Impl(SessionService& s, std::string token) : service(s), api_token(std::move(token)) { routes(); }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    // Wraps a handler with auth and the error-to-status mapping.
    httplib::Server::Handler guarded(Handler handler) {
        return [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
            if (!api_token.empty() && req.get_header_value("Authorization") != "Bearer " + api_token) {
                send_json(res, 401, Json{{"error", "unauthorized"}, {"message", "missing or wrong API token"}});
                return;
            }
            try {
                handler(req, res);
            } catch (const Error& e) {
                send_json(res, http_status(e.kind()), error_body(e));
            } catch (const std::exception& e) {
                send_json(res, 500, Json{{"error", "internal"}, {"message", e.what()}});
            }
        };
    }

    void state_reply(httplib::Response& res, const SessionState& state, int status = 200) {
        send_json(res, status, state_to_json(state));
    }

    void routes() {
        server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, Json{{"status", "ok"}});
        });

        server.Get("/activities", guarded([](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, Json(builtin_activity_names()));
        }));

        server.Get(R"(/activities/([^/]+))", guarded([](const httplib::Request& req, httplib::Response& res) {
            auto name = req.matches[1].str();
            auto activity = find_builtin_activity(name);
            if (!activity) throw Error(ErrorKind::not_found, "unknown activity \"" + name + "\"");
            send_json(res, 200, activity_to_json(*activity));
        }));

        server.Post("/prompt/preview", guarded([](const httplib::Request& req, httplib::Response& res) {
            auto body = request_json(req);
            auto activity = activity_from_request(body);
            auto context = SessionContext::from_text(field<std::string>(body, "context"));
            auto mode = mode_from_string(body.value("mode", "stepwise"));
            auto directive = mode == Mode::stepwise ? make_step_directive(activity, 1)
                                                    : make_full_run_directive(activity);
            send_json(res, 200, prompt_json(compose_initial_prompt(activity, context, directive)));
        }));

        server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
            Json rows = Json::array();
            for (const auto& s : service.list()) rows.push_back(summary_to_json(s));
            send_json(res, 200, rows);
        }));

        server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = request_json(req);
            CreateSessionRequest create{activity_from_request(body),
                                        SessionContext::from_text(field<std::string>(body, "context")),
                                        mode_from_string(body.value("mode", "stepwise")),
                                        make_agent(agent_spec_from_json(body.value("agent", Json())),
                                                   service.config())};
            auto state = service.create(create);
            auto reply = summary_to_json(summarize(state));
            reply["prompt"] = state.pending_outbound;
            try {
                state = service.drive(state.id);
                reply = summary_to_json(summarize(state));
                reply["prompt"] = state.conversation.empty() ? state.pending_outbound
                                                              : state.conversation.messages().front().text;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::transport) throw;
                reply["agent_error"] = e.what();
            }
            res.set_header("Location", "/sessions/" + state.id);
            send_json(res, 201, reply);
        }));

        server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            state_reply(res, service.get(req.matches[1].str()));
        }));

        server.Post(R"(/sessions/([^/]+)/advance)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = request_json(req);
            AdvanceOptions options;
            options.visit_commentary_steps = body.value("visit_commentary_steps", false);
            state_reply(res, service.advance(req.matches[1].str(), options));
        }));

        server.Post(R"(/sessions/([^/]+)/resend)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            state_reply(res, service.drive(req.matches[1].str()));
        }));

        server.Post(R"(/sessions/([^/]+)/agent-response)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        auto body = request_json(req);
                        state_reply(res, service.respond(req.matches[1].str(), field<std::string>(body, "text")));
                    }));

        server.Post(R"(/sessions/([^/]+)/artifacts)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = request_json(req);
            state_reply(res,
                        service.add_artifact(req.matches[1].str(), field<std::string>(body, "criterion"),
                                             field<std::string>(body, "text"), body.value("author", "")),
                        201);
        }));

        server.Post(R"(/sessions/([^/]+)/artifacts/([^/]+)/review)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        auto body = request_json(req);
                        ReviewDecision decision{review_action_from_string(field<std::string>(body, "decision")),
                                                body.value("text", "")};
                        state_reply(res, service.review(req.matches[1].str(), req.matches[2].str(), decision));
                    }));

        server.Post(R"(/sessions/([^/]+)/clusters)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = request_json(req);
            auto ids = id_list(body, "artifacts");
            state_reply(res, service.cluster(req.matches[1].str(), ids, field<std::string>(body, "label")));
        }));

        server.Post(R"(/sessions/([^/]+)/hills)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = request_json(req);
            auto who = id_list(body, "who");
            auto what = id_list(body, "what");
            auto wow = id_list(body, "wow");
            state_reply(res, service.compose_hill(req.matches[1].str(), who, what, wow, body.value("text", "")), 201);
        }));

        server.Post(R"(/sessions/([^/]+)/complete)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = request_json(req);
            state_reply(res, service.complete(req.matches[1].str(), body.value("override", false)));
        }));

        server.Get(R"(/sessions/([^/]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto format = export_format_from_string(req.has_param("format") ? req.get_param_value("format") : "md");
            auto doc = service.export_session(req.matches[1].str(), format);
            res.set_content(doc.content, format == ExportFormat::csv ? "text/csv; charset=utf-8"
                                                                      : "text/markdown; charset=utf-8");
        }));

        server.Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto id = req.matches[1].str();
            std::uint64_t after = 0;
            if (req.has_param("after")) after = std::stoull(req.get_param_value("after"));
            if (req.has_header("Last-Event-ID")) after = std::stoull(req.get_header_value("Last-Event-ID"));

            bool stream = req.get_param_value("stream") == "1" ||
                          req.get_header_value("Accept").find("text/event-stream") != std::string::npos;
            if (!stream) {
                Json rows = Json::array();
                for (const auto& e : service.events_after(id, after)) rows.push_back(event_to_json(e));
                send_json(res, 200, rows);
                return;
            }
            (void)service.get(id);  // 404 before the stream starts
            auto cursor = std::make_shared<std::uint64_t>(after);
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [this, id, cursor](std::size_t, httplib::DataSink& sink) {
                    if (stopping) {
                        sink.done();
                        return true;
                    }
                    auto fresh = service.wait_for_events(id, *cursor, 1s);
                    if (fresh.empty()) {
                        static constexpr std::string_view keepalive = ": keep-alive\n\n";
                        return sink.write(keepalive.data(), keepalive.size());
                    }
                    for (const auto& e : fresh) {
                        auto frame = sse_frame(e);
                        if (!sink.write(frame.data(), frame.size())) return false;
                        *cursor = e.sequence;
                    }
                    return true;
                });
        }));
    }
};

ApiServer::ApiServer(SessionService& service, std::string api_token)
    : impl_(std::make_unique<Impl>(service, std::move(api_token))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorKind::transport, "cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorKind::transport, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    while (!impl_->server.is_running()) std::this_thread::sleep_for(5ms);
}

void ApiServer::stop() {
    if (!impl_) return;
    impl_->stopping = true;
    impl_->service.interrupt_waiters();
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace chai
