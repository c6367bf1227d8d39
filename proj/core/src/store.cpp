#include "chai/store.hpp"

#include "chai/error.hpp"
#include "chai/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace chai {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::not_found, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::validation, "cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error(ErrorKind::validation, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

bool valid_id(std::string_view id) {
    if (id.size() < 2 || id.front() != 's') return false;
    for (char c : id.substr(1)) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

}  // namespace

SessionSummary summarize(const SessionState& state) {
    SessionSummary summary{state.id, state.activity.name, state.mode, state.phase, {}, state.created_at};
    for (const auto& c : state.activity.criteria) {
        std::size_t n = 0;
        for (const auto& a : state.board) n += a.criterion_key == c.key ? 1 : 0;
        summary.counts.emplace_back(c.key, n);
    }
    return summary;
}

Json summary_to_json(const SessionSummary& summary) {
    Json counts = Json::object();
    for (const auto& [key, n] : summary.counts) counts[key] = n;
    return Json{{"id", summary.id},           {"activity", summary.activity}, {"mode", to_string(summary.mode)},
                {"phase", to_string(summary.phase)}, {"counts", std::move(counts)}, {"created_at", summary.created_at}};
}

SessionSummary summary_from_json(const Json& doc) {
    try {
        SessionSummary summary;
        summary.id = doc.at("id").get<std::string>();
        summary.activity = doc.at("activity").get<std::string>();
        summary.mode = mode_from_string(doc.at("mode").get<std::string>());
        summary.phase = phase_from_string(doc.at("phase").get<std::string>());
        for (const auto& [key, n] : doc.at("counts").items()) summary.counts.emplace_back(key, n.get<std::size_t>());
        summary.created_at = doc.at("created_at").get<std::string>();
        return summary;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed session summary: ") + e.what());
    }
}

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_ / "sessions"); }

fs::path SessionStore::log_path(std::string_view id) const {
    if (!valid_id(id)) throw Error(ErrorKind::not_found, "unknown session " + std::string(id));
    return root_ / "sessions" / (std::string(id) + ".jsonl");
}

std::string SessionStore::allocate_id() {
    std::size_t next = 1;
    for (const auto& entry : fs::directory_iterator(root_ / "sessions")) {
        auto stem = entry.path().stem().string();
        if (entry.path().extension() == ".jsonl" && valid_id(stem)) next = std::max(next, std::stoul(stem.substr(1)) + 1);
    }
    for (;; ++next) {
        char id[32];
        std::snprintf(id, sizeof id, "s%06zu", next);
        auto path = log_path(id);
        // "x": exclusive create, fails if another writer got there first.
        std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "wx"), &std::fclose);
        if (file) return id;
        if (!fs::exists(path)) throw Error(ErrorKind::validation, "cannot create " + path.string());
    }
}

bool SessionStore::exists(std::string_view id) const { return valid_id(id) && fs::exists(log_path(id)); }

void SessionStore::append(std::string_view id, std::span<const SessionEvent> events) {
    if (events.empty()) return;
    std::string lines;
    for (const auto& e : events) lines += encode_event_line(e);
    std::ofstream out(log_path(id), std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorKind::validation, "cannot append to log of session " + std::string(id));
    out << lines;
    if (!out.flush()) throw Error(ErrorKind::validation, "cannot append to log of session " + std::string(id));
}

std::vector<SessionEvent> SessionStore::load(std::string_view id) const {
    if (!exists(id)) throw Error(ErrorKind::not_found, "unknown session " + std::string(id));
    return parse_event_log(read_file(log_path(id)));
}

void SessionStore::put_summary(const SessionSummary& summary) {
    std::lock_guard lock(index_mutex_);
    auto path = root_ / "index.json";
    Json rows = Json::array();
    if (fs::exists(path)) {
        try {
            rows = Json::parse(read_file(path));
        } catch (const nlohmann::json::exception&) {
            rows = Json::array();  // the index is derived data; rebuild it
        }
    }
    bool replaced = false;
    for (auto& row : rows) {
        if (row.value("id", "") == summary.id) {
            row = summary_to_json(summary);
            replaced = true;
        }
    }
    if (!replaced) rows.push_back(summary_to_json(summary));
    write_atomically(path, rows.dump(2) + "\n");
}

std::vector<SessionSummary> SessionStore::summaries() const {
    std::lock_guard lock(index_mutex_);
    auto path = root_ / "index.json";
    std::vector<SessionSummary> out;
    if (!fs::exists(path)) return out;
    for (const auto& row : Json::parse(read_file(path))) out.push_back(summary_from_json(row));
    return out;
}

}  // namespace chai
