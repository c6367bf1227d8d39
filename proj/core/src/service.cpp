#include "chai/service.hpp"

#include "chai/error.hpp"
#include "text.hpp"

#include <condition_variable>
#include <filesystem>

namespace chai {

struct SessionService::Entry {
    std::mutex writer;  // one mutation at a time, in arrival order
    std::optional<Session> session;
    std::size_t persisted = 0;
    std::shared_ptr<AgentProvider> agent;

    mutable std::mutex published_mutex;
    mutable std::condition_variable published_cv;
    std::shared_ptr<const SessionState> snapshot;
    std::vector<SessionEvent> events;
    bool interrupted = false;
};

std::shared_ptr<AgentProvider> make_agent(const AgentSpec& spec, const ServiceConfig& config) {
    switch (spec.kind) {
        case AgentKind::manual:
            return nullptr;
        case AgentKind::scripted:
            return std::make_shared<ScriptedProvider>(spec.transcript);
        case AgentKind::remote: {
            if (!config.agent) throw Error(ErrorKind::validation, "agent: no remote agent is configured");
            auto profile = *config.agent;
            if (spec.model) profile.model = *spec.model;
            if (spec.temperature) profile.temperature = *spec.temperature;
            return std::make_shared<RemoteProvider>(std::move(profile));
        }
    }
    return nullptr;
}

SessionService::SessionService(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)), store_(config_.data_dir) {}

SessionService::~SessionService() { interrupt_waiters(); }

SessionOptions SessionService::session_options(std::string id) const {
    SessionOptions options;
    options.id = std::move(id);
    if (!config_.disclaimer_cues.empty()) options.parser.disclaimer_cues = config_.disclaimer_cues;
    options.clock = clock_;
    return options;
}

void SessionService::publish(Entry& e) {
    const auto& log = e.session->events();
    if (e.persisted < log.size()) {
        store_.append(e.session->state().id, std::span(log).subspan(e.persisted));
        e.persisted = log.size();
        store_.put_summary(summarize(e.session->state()));
    }
    {
        std::lock_guard lock(e.published_mutex);
        e.snapshot = std::make_shared<const SessionState>(e.session->state());
        e.events.insert(e.events.end(), log.begin() + static_cast<std::ptrdiff_t>(e.events.size()), log.end());
    }
    e.published_cv.notify_all();
}

std::shared_ptr<SessionService::Entry> SessionService::entry(std::string_view id) const {
    std::lock_guard lock(entries_mutex_);
    if (auto it = entries_.find(id); it != entries_.end()) return it->second;

    auto log = store_.load(id);
    auto e = std::make_shared<Entry>();
    e->session.emplace(Session::resume(std::move(log), session_options(std::string(id))));
    e->persisted = e->session->events().size();
    e->snapshot = std::make_shared<const SessionState>(e->session->state());
    e->events = e->session->events();
    entries_.emplace(std::string(id), e);
    return e;
}

template <typename Op>
SessionState SessionService::mutate(std::string_view id, Op&& op) {
    auto e = entry(id);
    std::lock_guard lock(e->writer);
    try {
        op(*e->session, e->agent);
    } catch (...) {
        publish(*e);  // keep whatever was emitted before the failure
        throw;
    }
    publish(*e);
    return e->session->state();
}

std::vector<SessionSummary> SessionService::list() const { return store_.summaries(); }

SessionState SessionService::create(const CreateSessionRequest& request) {
    auto violations = validate_activity(request.activity);
    if (text::is_blank(request.context.narrative)) violations.emplace_back("context: must not be empty");
    if (!violations.empty()) throw Error(ErrorKind::validation, std::move(violations));

    auto id = store_.allocate_id();
    auto options = session_options(id);
    if (request.agent) options.agent = request.agent->descriptor();

    auto e = std::make_shared<Entry>();
    try {
        e->session.emplace(Session::start(request.activity, request.context, request.mode, std::move(options)));
    } catch (...) {
        std::error_code ignored;
        std::filesystem::remove(store_.log_path(id), ignored);
        throw;
    }
    e->agent = request.agent;
    {
        std::lock_guard lock(e->writer);
        publish(*e);
    }
    {
        std::lock_guard lock(entries_mutex_);
        entries_.emplace(id, e);
    }
    return *e->snapshot;
}

SessionState SessionService::get(std::string_view id) const {
    auto e = entry(id);
    std::lock_guard lock(e->published_mutex);
    return *e->snapshot;
}

void SessionService::attach_agent(std::string_view id, std::shared_ptr<AgentProvider> agent) {
    auto e = entry(id);
    std::lock_guard lock(e->writer);
    e->agent = std::move(agent);
}

bool SessionService::has_agent(std::string_view id) const {
    auto e = entry(id);
    std::lock_guard lock(e->writer);
    return e->agent != nullptr;
}

namespace {

void drive_turn(Session& session, const std::shared_ptr<AgentProvider>& agent) {
    if (!agent) return;
    if (session.state().phase != Phase::awaiting_agent) {
        throw Error(ErrorKind::conflict, "no agent request is pending");
    }
    auto result = send(session.state().conversation, session.pending_outbound(), *agent);
    session.apply_agent_response(result.reply, agent->descriptor());
}

}  // namespace

SessionState SessionService::drive(std::string_view id) {
    return mutate(id, [](Session& s, const std::shared_ptr<AgentProvider>& agent) { drive_turn(s, agent); });
}

SessionState SessionService::advance(std::string_view id, const AdvanceOptions& options) {
    return mutate(id, [&](Session& s, const std::shared_ptr<AgentProvider>& agent) {
        s.advance(options);
        drive_turn(s, agent);
    });
}

SessionState SessionService::respond(std::string_view id, std::string_view reply) {
    return mutate(id, [&](Session& s, auto&) { s.apply_agent_response(reply, manual_agent_descriptor()); });
}

SessionState SessionService::add_artifact(std::string_view id, std::string_view criterion, std::string_view text,
                                          std::string_view author) {
    return mutate(id, [&](Session& s, auto&) { s.submit_human_artifact(criterion, text, author); });
}

SessionState SessionService::review(std::string_view id, std::string_view artifact_id,
                                    const ReviewDecision& decision) {
    return mutate(id, [&](Session& s, auto&) { s.review_artifact(artifact_id, decision); });
}

SessionState SessionService::cluster(std::string_view id, std::span<const std::string> artifact_ids,
                                     std::string_view label) {
    return mutate(id, [&](Session& s, auto&) { s.assign_cluster(artifact_ids, label); });
}

SessionState SessionService::compose_hill(std::string_view id, std::span<const std::string> who,
                                          std::span<const std::string> what, std::span<const std::string> wow,
                                          std::string_view text) {
    return mutate(id, [&](Session& s, auto&) { s.compose_hill(who, what, wow, text); });
}

SessionState SessionService::complete(std::string_view id, bool facilitator_override) {
    return mutate(id, [&](Session& s, auto&) { s.complete(facilitator_override); });
}

std::vector<SessionEvent> SessionService::events_after(std::string_view id, std::uint64_t after) const {
    auto e = entry(id);
    std::lock_guard lock(e->published_mutex);
    if (after >= e->events.size()) return {};
    return {e->events.begin() + static_cast<std::ptrdiff_t>(after), e->events.end()};
}

std::vector<SessionEvent> SessionService::wait_for_events(std::string_view id, std::uint64_t after,
                                                          std::chrono::milliseconds timeout) const {
    auto e = entry(id);
    std::unique_lock lock(e->published_mutex);
    e->published_cv.wait_for(lock, timeout, [&] { return e->interrupted || e->events.size() > after; });
    if (after >= e->events.size()) return {};
    return {e->events.begin() + static_cast<std::ptrdiff_t>(after), e->events.end()};
}

ExportDocument SessionService::export_session(std::string_view id, ExportFormat format) const {
    return chai::export_session(get(id), format);
}

void SessionService::interrupt_waiters() {
    std::lock_guard lock(entries_mutex_);
    for (auto& [id, e] : entries_) {
        {
            std::lock_guard inner(e->published_mutex);
            e->interrupted = true;
        }
        e->published_cv.notify_all();
    }
}

}  // namespace chai
