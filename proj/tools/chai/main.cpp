// chai: command-line front end over the same SessionService the HTTP API uses.
// Exit codes: 0 ok, 1 agent/transport failure, 2 anything else.

#include "chai/activity.hpp"
#include "chai/config.hpp"
#include "chai/error.hpp"
#include "chai/http_api.hpp"
#include "chai/prompt.hpp"
#include "chai/serialization.hpp"
#include "chai/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <thread>

#include <pthread.h>

namespace fs = std::filesystem;
using namespace chai;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::not_found, "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_stdin() {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
}

// A builtin name, or a path to an activity document.
ActivityDefinition resolve_activity(const std::string& ref) {
    if (auto builtin = find_builtin_activity(ref)) return *builtin;
    if (fs::exists(ref)) return load_activity(read_file(ref));
    throw Error(ErrorKind::not_found, "unknown activity \"" + ref + "\"");
}

// manual | remote | scripted:FILE
AgentSpec parse_agent(const std::string& ref) {
    AgentSpec spec;
    if (ref.empty() || ref == "manual") return spec;
    if (ref == "remote") {
        spec.kind = AgentKind::remote;
        return spec;
    }
    if (ref.rfind("scripted:", 0) == 0) {
        spec.kind = AgentKind::scripted;
        spec.transcript = load_transcript(ref.substr(9));
        return spec;
    }
    throw Error(ErrorKind::validation, "agent: expected manual, remote or scripted:FILE, got \"" + ref + "\"");
}

std::string context_text(const std::string& ref) { return ref == "-" ? read_stdin() : read_file(ref); }

void print_board(std::ostream& out, const SessionState& state) {
    for (const auto& a : state.board) {
        const auto* cluster = a.cluster_id ? state.find_cluster(*a.cluster_id) : nullptr;
        out << a.id << '\t' << a.criterion_key << '\t' << to_string(a.status) << '\t'
            << (a.origin == Origin::agent ? std::string("agent") : "human:" + a.author) << '\t'
            << (cluster ? cluster->label : std::string("-")) << '\t' << a.text << '\n';
    }
}

// Agent-bound text, newline-terminated on the terminal.
void print_message(std::ostream& out, const std::string& text) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

void print_summary(std::ostream& out, const SessionState& state) {
    out << state.id << ' ' << to_string(state.phase);
    if (state.current_step) out << " step " << *state.current_step << '/' << state.activity.step_count();
    out << '\n';
}

struct Options {
    std::string config_path;
    std::string data_dir;

    std::string activity, context, mode = "stepwise", agent = "manual";
    int turns = 0;
    bool all_steps = false, override_ = false, as_json = false;

    std::string session, artifact, text, file, author, criterion, label, format = "md", out, log, amend;
    bool accept = false, reject = false;
    std::vector<std::string> ids, who, what, wow;
    std::string host;
    int port = 0;
};

ServiceConfig make_config(const Options& o) {
    ServiceConfig config = o.config_path.empty() ? ServiceConfig{} : load_config(o.config_path);
    apply_env_overrides(config);
    if (!o.data_dir.empty()) config.data_dir = o.data_dir;
    return config;
}

// Attaches the agent named on the command line, if any; agents are never
// persisted so each invocation that talks to one has to say which.
void attach(SessionService& service, const std::string& id, const std::string& agent) {
    if (auto provider = make_agent(parse_agent(agent), service.config())) service.attach_agent(id, provider);
}

int run(int argc, char** argv) {
    CLI::App app{"Facilitation sessions with a generative agent"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--data-dir", o.data_dir, "Session store directory");

    auto* activities = app.add_subcommand("activities", "List or show activity definitions");
    activities->require_subcommand(1);
    auto* act_list = activities->add_subcommand("list", "List builtin activities");
    auto* act_show = activities->add_subcommand("show", "Print an activity document");
    act_show->add_option("name", o.activity, "Builtin name or file")->required();

    auto* prompt = app.add_subcommand("prompt", "Print the initial prompt without starting a session");
    prompt->add_option("--activity", o.activity)->required();
    prompt->add_option("--context", o.context, "Context file, - for stdin")->required();
    prompt->add_option("--mode", o.mode)->check(CLI::IsMember({"stepwise", "full", "full_run"}));
    prompt->add_flag("--json", o.as_json, "Print segments and full text as JSON");

    auto* run_cmd = app.add_subcommand("run", "Start a session and drive the agent");
    run_cmd->add_option("--activity", o.activity)->required();
    run_cmd->add_option("--context", o.context, "Context file, - for stdin")->required();
    run_cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"stepwise", "full", "full_run"}));
    run_cmd->add_option("--agent", o.agent, "manual | remote | scripted:FILE");
    run_cmd->add_option("--turns", o.turns, "Agent turns to drive (default: whole transcript, else 1)")
        ->check(CLI::NonNegativeNumber);

    auto* respond = app.add_subcommand("respond", "Record a pasted agent reply");
    respond->add_option("--session", o.session)->required();
    auto* respond_src = respond->add_option_group("source");
    respond_src->add_option("--text", o.text);
    respond_src->add_option("--file", o.file, "Reply file, - for stdin");
    respond_src->require_option(1);

    auto* advance = app.add_subcommand("advance", "Request the next step");
    advance->add_option("--session", o.session)->required();
    advance->add_option("--agent", o.agent, "manual | remote | scripted:FILE");
    advance->add_flag("--all-steps", o.all_steps, "Also visit steps that produce no artifacts");

    auto* resend = app.add_subcommand("resend", "Send the pending request to the agent again");
    resend->add_option("--session", o.session)->required();
    resend->add_option("--agent", o.agent, "remote | scripted:FILE")->required();

    auto* complete = app.add_subcommand("complete", "Close the session");
    complete->add_option("--session", o.session)->required();
    complete->add_flag("--override", o.override_, "Complete before the last step");

    auto* board = app.add_subcommand("board", "Print the artifact board");
    board->add_option("--session", o.session)->required();
    board->add_flag("--json", o.as_json, "Print the full session state");

    auto* review = app.add_subcommand("review", "Accept, reject or amend an artifact");
    review->add_option("--session", o.session)->required();
    review->add_option("--artifact", o.artifact)->required();
    auto* decision = review->add_option_group("decision");
    decision->add_flag("--accept", o.accept);
    decision->add_flag("--reject", o.reject);
    decision->add_option("--amend", o.amend, "Replacement text");
    decision->require_option(1);

    auto* add = app.add_subcommand("add", "Add a participant's idea");
    add->add_option("--session", o.session)->required();
    add->add_option("--criterion", o.criterion)->required();
    add->add_option("--text", o.text)->required();
    add->add_option("--author", o.author);

    auto* cluster = app.add_subcommand("cluster", "Group artifacts under a label");
    cluster->add_option("--session", o.session)->required();
    cluster->add_option("--label", o.label)->required();
    cluster->add_option("--artifacts", o.ids, "Comma-separated artifact ids")->required()->delimiter(',');

    auto* hill = app.add_subcommand("hill", "Compose a hill statement from accepted artifacts");
    hill->add_option("--session", o.session)->required();
    hill->add_option("--who", o.who)->required()->delimiter(',');
    hill->add_option("--what", o.what)->required()->delimiter(',');
    hill->add_option("--wow", o.wow)->required()->delimiter(',');
    hill->add_option("--text", o.text);

    auto* export_cmd = app.add_subcommand("export", "Export the board");
    export_cmd->add_option("--session", o.session)->required();
    export_cmd->add_option("--format", o.format)->check(CLI::IsMember({"md", "markdown", "csv"}));
    export_cmd->add_option("--out", o.out);

    auto* replay_cmd = app.add_subcommand("replay", "Rebuild a session from an event log");
    replay_cmd->add_option("--log", o.log)->required()->check(CLI::ExistingFile);
    replay_cmd->add_flag("--json", o.as_json, "Print the full session state");

    auto* sessions = app.add_subcommand("sessions", "List stored sessions");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    serve->add_option("--host", o.host);
    serve->add_option("--port", o.port)->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto& out = std::cout;

    if (act_list->parsed()) {
        for (const auto& name : builtin_activity_names()) out << name << '\n';
        return 0;
    }
    if (act_show->parsed()) {
        out << serialize_activity(resolve_activity(o.activity));
        return 0;
    }
    if (prompt->parsed()) {
        auto activity = resolve_activity(o.activity);
        auto mode = mode_from_string(o.mode);
        auto directive = mode == Mode::stepwise ? make_step_directive(activity, 1) : make_full_run_directive(activity);
        auto composed = compose_initial_prompt(activity, SessionContext::from_text(context_text(o.context)), directive);
        if (!o.as_json) {
            out << composed.full_text;
            return 0;
        }
        Json segments = Json::array();
        for (const auto& s : composed.segments) segments.push_back(Json{{"kind", to_string(s.kind)}, {"text", s.text}});
        out << Json{{"segments", segments}, {"full_text", composed.full_text}}.dump(2) << '\n';
        return 0;
    }
    if (replay_cmd->parsed()) {
        auto events = parse_event_log(read_file(o.log));
        auto state = replay(events);
        if (o.as_json) {
            out << state_to_json(state).dump(2) << '\n';
            return 0;
        }
        print_summary(out, state);
        print_board(out, state);
        out << state.board.size() << " artifacts from " << events.size() << " events\n";
        return 0;
    }

    SessionService service(make_config(o));

    if (run_cmd->parsed()) {
        auto spec = parse_agent(o.agent);
        int turns = o.turns;
        if (!run_cmd->count("--turns")) {
            turns = spec.kind == AgentKind::scripted ? static_cast<int>(spec.transcript.size()) : 1;
        }
        CreateSessionRequest request{resolve_activity(o.activity), SessionContext::from_text(context_text(o.context)),
                                     mode_from_string(o.mode), make_agent(spec, service.config())};
        auto state = service.create(request);
        std::cerr << "session " << state.id << '\n';
        print_message(out, state.pending_outbound);
        if (!request.agent) return 0;
        for (int turn = 1; turn <= turns; ++turn) {
            state = turn == 1 ? service.drive(state.id) : service.advance(state.id);
            if (state.mode == Mode::full_run || state.current_step == state.activity.step_count()) break;
        }
        print_summary(std::cerr, state);
        return 0;
    }
    if (sessions->parsed()) {
        for (const auto& s : service.list()) {
            out << s.id << '\t' << s.activity << '\t' << to_string(s.mode) << '\t' << to_string(s.phase);
            for (const auto& [key, n] : s.counts) out << '\t' << key << '=' << n;
            out << '\n';
        }
        return 0;
    }
    if (serve->parsed()) {
        const auto& config = service.config();
        ApiServer server(service, config.api_token);
        int port = server.bind(o.host.empty() ? config.host : o.host, serve->count("--port") ? o.port : config.port);
        std::cerr << "listening on " << (o.host.empty() ? config.host : o.host) << ':' << port << std::endl;
        // Signals are taken synchronously on a helper thread; the server
        // threads inherit the blocked mask.
        sigset_t stop_signals;
        sigemptyset(&stop_signals);
        sigaddset(&stop_signals, SIGINT);
        sigaddset(&stop_signals, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
        std::thread([&server, stop_signals] {
            int sig = 0;
            sigwait(&stop_signals, &sig);
            server.stop();
        }).detach();
        server.listen();
        return 0;
    }

    SessionState state;
    if (respond->parsed()) {
        auto reply = !o.file.empty() ? (o.file == "-" ? read_stdin() : read_file(o.file)) : o.text;
        state = service.respond(o.session, reply);
    } else if (advance->parsed()) {
        attach(service, o.session, o.agent);
        AdvanceOptions options;
        options.visit_commentary_steps = o.all_steps;
        state = service.advance(o.session, options);
        if (!service.has_agent(o.session)) print_message(out, state.pending_outbound);
    } else if (resend->parsed()) {
        attach(service, o.session, o.agent);
        state = service.drive(o.session);
    } else if (complete->parsed()) {
        state = service.complete(o.session, o.override_);
    } else if (board->parsed()) {
        state = service.get(o.session);
        if (o.as_json) {
            out << state_to_json(state).dump(2) << '\n';
            return 0;
        }
        print_summary(out, state);
        print_board(out, state);
        return 0;
    } else if (review->parsed()) {
        ReviewDecision d{o.accept ? ReviewAction::accept : o.reject ? ReviewAction::reject : ReviewAction::amend,
                         o.amend};
        state = service.review(o.session, o.artifact, d);
    } else if (add->parsed()) {
        state = service.add_artifact(o.session, o.criterion, o.text, o.author);
        out << state.board.back().id << '\n';
    } else if (cluster->parsed()) {
        state = service.cluster(o.session, o.ids, o.label);
        out << state.clusters.back().id << '\n';
    } else if (hill->parsed()) {
        state = service.compose_hill(o.session, o.who, o.what, o.wow, o.text);
        out << state.hills.back().id << '\n';
    } else if (export_cmd->parsed()) {
        auto doc = service.export_session(o.session, export_format_from_string(o.format));
        if (o.out.empty()) {
            out << doc.content;
        } else {
            std::ofstream file(o.out, std::ios::binary);
            file << doc.content;
            if (!file) throw Error(ErrorKind::transport, "cannot write " + o.out);
        }
        return 0;
    }
    print_summary(std::cerr, state);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.violations().size() > 1) {
            for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
        }
        return e.kind() == ErrorKind::transport ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
