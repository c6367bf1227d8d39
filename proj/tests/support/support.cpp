#include "support.hpp"

#include "chai/error.hpp"
#include "chai/serialization.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace chai::testing {
namespace fs = std::filesystem;

// -- fixtures ---------------------------------------------------------------

fs::path data_dir() { return CHAI_TEST_DATA_DIR; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string golden_prompt() { return read_file(data_dir() / "hills_step1_prompt.txt"); }
std::string retailinc_context() { return read_file(data_dir() / "retailinc_context.txt"); }
fs::path transcript_path() { return data_dir() / "hills_table1_transcript.json"; }

const std::vector<std::string>& table1_who() {
    static const std::vector<std::string> v{
        "Retail store managers",
        "Inventory managers",
        "Supply chain managers",
        "Sales associates",
        "Customers (indirectly impacted by the system)",
        "Executives/decision-makers at RetailInc",
    };
    return v;
}

const std::vector<std::string>& table1_what() {
    static const std::vector<std::string> v{
        "Accurately predict sales trends",
        "Optimize inventory levels in real-time",
        "Identify underperforming products",
        "Identify overstocked products",
        "Determine reorder quantities and timing",
        "Monitor stock levels and alert managers when stock falls below a certain threshold",
        "Provide insights into customer demand and behavior",
        "Generate automated reports and analytics for inventory and sales data",
        "Minimize stockouts and overstocking",
        "Enable data-driven decision-making for inventory management",
    };
    return v;
}

const std::vector<std::string>& table1_wow() {
    static const std::vector<std::string> v{
        "Dramatically reduce stockouts and overstocking, resulting in increased sales and profitability",
        "Improve customer satisfaction by ensuring products are always in stock",
        "Increase efficiency and productivity for store and inventory managers",
        "Reduce waste and optimize resource utilization",
        "Provide a competitive advantage in the retail industry through advanced data analytics and artificial "
        "intelligence",
        "Ensure accuracy and reliability of sales and inventory data, leading to better decision-making",
        "Enhance the overall shopping experience for customers through better inventory management and product "
        "availability",
        "Enable RetailInc to respond quickly to changing market trends and customer demands",
        "Foster a culture of innovation and continuous improvement at RetailInc",
    };
    return v;
}

TempDir::TempDir() {
    static std::random_device rd;
    for (;;) {
        auto candidate = fs::temp_directory_path() / ("chai-test-" + std::to_string(rd()));
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

Clock counting_clock() {
    auto counter = std::make_shared<int>(0);
    return [counter] {
        char buf[16];
        std::snprintf(buf, sizeof buf, "T%06d", ++*counter);
        return std::string(buf);
    };
}

std::vector<std::string> log_without_timestamps(const fs::path& log) {
    std::vector<std::string> out;
    std::istringstream in(read_file(log));
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        auto doc = nlohmann::ordered_json::parse(line);
        doc.erase("timestamp");
        out.push_back(doc.dump());
    }
    return out;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

RunResult run_command(const std::string& command) {
    TempDir tmp;
    auto err_path = tmp.path() / "stderr";
    RunResult result;
    FILE* pipe = popen((command + " 2>" + shell_quote(err_path.string())).c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    std::array<char, 4096> buf{};
    for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), pipe)) > 0;) result.out.append(buf.data(), n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.err = read_file(err_path);
    return result;
}

// -- parser generators and oracles -----------------------------------------

namespace {

const std::regex& marker_re() {
    static const std::regex re(R"(^(\d+[.)]|[-*]|\xE2\x80\xA2)[ \t])");
    return re;
}

const std::regex& marker_prefix_re() {
    static const std::regex re(R"(^((\d+[.)]|[-*]|\xE2\x80\xA2)[ \t]+)*$)");
    return re;
}

std::string pick(Rng& rng, const std::vector<std::string>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string trim_ws(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> oracle_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const std::vector<std::string> kWords{
    "inventory", "forecast", "store", "managers", "real-time", "alerts", "customers", "data", "waste",
    "reorder", "stock", "levels", "trends", "pricing", "shelves", "suppliers", "insights", "decisions",
    "3D", "24/7", "1.5x", "-10%", "2)", "7.", "*", "**bold**", "_em_", "#tag", "|", "\"quoted\"",
    "\xE2\x80\x9C" "curly" "\xE2\x80\x9D", "caf\xC3\xA9", "na\xC3\xAFve", "\xE6\x97\xA5\xE6\x9C\xAC",
    "\xE2\x80\x94", "(aside)", "Step", "2:", "note:", "Note:", "these", "are", "just", "keep", "in",
    "mind", "x", "a", "an", "and", "\xE2\x80\xA2", "-", "1.", "100", "[link]", "ideas:",
};

}  // namespace

bool oracle_has_list_marker(const std::string& s) { return std::regex_search(s, marker_re()); }

std::string random_idea(Rng& rng) {
    for (;;) {
        int n = uniform(rng, 1, 9);
        std::string s;
        for (int i = 0; i < n; ++i) {
            if (i) s += chance(rng, 0.1) ? (chance(rng, 0.5) ? "  " : "\t") : " ";
            s += pick(rng, kWords);
        }
        s = trim_ws(s);
        if (!s.empty() && !oracle_has_list_marker(s)) return s;
    }
}

std::vector<ArtifactDraft> random_drafts(Rng& rng, const std::string& key) {
    std::vector<ArtifactDraft> drafts;
    int n = uniform(rng, 1, 15);
    for (int i = 0; i < n; ++i) drafts.push_back({key, random_idea(rng), static_cast<std::size_t>(i)});
    return drafts;
}

std::string random_mixed_reply(Rng& rng) {
    static const std::vector<std::string> disclaimers{
        "Note: These are just some potential users, and the team may need to further refine the list.",
        "**Note:** these are just examples.",
        "NOTE: may need refinement",
        "Keep in mind that the list is not exhaustive.",
        "please note the assumptions above",
        "_These are just_ starting points.",
    };
    static const std::vector<std::string> headings{
        "# Who", "**What:**", "\"Wow\":", "### Step 2: What", "Who (potential users):", "## Ideas",
    };
    static const std::vector<std::string> prose{
        "Sure! Here is a list of potential users:", "Here are some ideas:", "I hope this helps.",
        "Let me know if you want more.", "Great question", "These ideas came from the context above.",
    };
    static const std::vector<std::string> blanks{"", " ", "\t", "   "};
    static const std::vector<std::string> indents{"", "", "", "  ", "\t", "    "};

    std::string out;
    int n = uniform(rng, 0, 25);
    int number = 1;
    for (int i = 0; i < n; ++i) {
        std::string line;
        switch (uniform(rng, 0, 9)) {
            case 0: line = std::to_string(number++) + ". " + random_idea(rng); break;
            case 1: line = std::to_string(number++) + ") " + random_idea(rng); break;
            case 2: line = pick(rng, {"- ", "* ", "\xE2\x80\xA2 ", "-\t"}) + random_idea(rng); break;
            case 3: line = "- " + std::to_string(number++) + ". " + random_idea(rng); break;
            case 4: line = random_idea(rng); break;
            case 5: line = pick(rng, prose); break;
            case 6: line = pick(rng, disclaimers); break;
            case 7: line = pick(rng, headings); break;
            case 8: line = "| " + random_idea(rng) + " | x |"; break;
            default: line = pick(rng, blanks); break;
        }
        out += pick(rng, indents) + line + (chance(rng, 0.1) ? " " : "");
        if (i + 1 < n || chance(rng, 0.5)) out += chance(rng, 0.2) ? "\r\n" : "\n";
    }
    return out;
}

std::vector<std::string> partition_violations(const std::string& input, const ParsedResponse& parsed) {
    std::vector<std::string> problems;
    auto lines = oracle_lines(input);
    std::vector<int> seen(lines.size(), 0);

    auto claim = [&](std::size_t line, const std::string& what) -> const std::string* {
        if (line >= lines.size()) {
            problems.push_back(what + " points past the end (line " + std::to_string(line) + ")");
            return nullptr;
        }
        ++seen[line];
        return &lines[line];
    };

    std::size_t last = 0;
    bool first = true;
    for (const auto& d : parsed.drafts) {
        if (!first && d.source_line <= last) problems.push_back("drafts out of order at line " + std::to_string(d.source_line));
        first = false;
        last = d.source_line;
        const auto* src = claim(d.source_line, "draft");
        if (!src) continue;
        auto line = trim_ws(*src);
        if (d.text.empty()) problems.push_back("empty draft at line " + std::to_string(d.source_line));
        if (line.size() < d.text.size() || line.compare(line.size() - d.text.size(), d.text.size(), d.text) != 0 ||
            !std::regex_match(line.substr(0, line.size() - d.text.size()), marker_prefix_re())) {
            problems.push_back("draft \"" + d.text + "\" does not match line \"" + line + "\"");
        }
        if (oracle_has_list_marker(d.text)) problems.push_back("draft keeps a list marker: \"" + d.text + "\"");
    }
    for (const auto* list : {&parsed.disclaimers, &parsed.unparsed}) {
        for (const auto& t : *list) {
            const auto* src = claim(t.source_line, "line record");
            if (src && trim_ws(*src) != t.text) {
                problems.push_back("record \"" + t.text + "\" differs from line \"" + trim_ws(*src) + "\"");
            }
        }
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        bool blank = trim_ws(lines[i]).empty();
        if (blank && seen[i]) problems.push_back("blank line " + std::to_string(i) + " was classified");
        if (!blank && seen[i] != 1) {
            problems.push_back("line " + std::to_string(i) + " classified " + std::to_string(seen[i]) + " times");
        }
    }
    return problems;
}

namespace {

std::string oracle_heading_key(std::string s, const std::vector<CriterionDefinition>& criteria) {
    static const std::regex step(R"(^step\s+\d+\s*[:.)-]?\s*)", std::regex::icase);
    static const std::regex paren(R"(\s*\([^()]*\)$)");
    static const std::vector<std::string> curly{"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99"};
    for (const auto& q : curly) {
        for (auto pos = s.find(q); pos != std::string::npos; pos = s.find(q)) s.erase(pos, q.size());
    }
    for (int round = 0; round < 4; ++round) {
        s = trim_ws(s);
        while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '_' || s.front() == '"' ||
                              s.front() == '\'' || s.front() == ' ')) {
            s.erase(0, 1);
        }
        while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == ':' || s.back() == '.' ||
                              s.back() == '"' || s.back() == '\'' || s.back() == ' ')) {
            s.pop_back();
        }
        s = std::regex_replace(s, step, "");
        s = std::regex_replace(s, paren, "");
    }
    for (const auto& c : criteria) {
        if (lower(s) == lower(c.label) || lower(s) == lower(c.key)) return c.key;
    }
    return {};
}

}  // namespace

std::vector<ExpectedDraft> reference_full_split(const std::string& text,
                                                const std::vector<CriterionDefinition>& criteria) {
    static const std::regex item(R"(^((\d+[.)]|[-*]|\xE2\x80\xA2)[ \t]+)+(.*)$)");
    std::vector<ExpectedDraft> out;
    std::string current;
    for (const auto& raw : oracle_lines(text)) {
        auto line = trim_ws(raw);
        if (line.empty() || lower(line).rfind("note:", 0) == 0) continue;
        if (auto key = oracle_heading_key(line, criteria); !key.empty()) {
            current = key;
            continue;
        }
        std::smatch m;
        if (!current.empty() && std::regex_match(line, m, item)) out.push_back({current, trim_ws(m[3].str())});
    }
    return out;
}

FullReplyCase random_full_reply(Rng& rng, const std::vector<CriterionDefinition>& criteria) {
    FullReplyCase c;
    if (chance(rng, 0.6)) c.text += "Sure! Here is the entire exercise.\n\n";
    std::vector<std::size_t> order(criteria.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(uniform(rng, 1, static_cast<int>(order.size())));

    auto mentions_heading = [&](const std::string& idea) {
        for (const auto& cr : criteria) {
            if (lower(idea).find(lower(cr.label)) != std::string::npos ||
                lower(idea).find(lower(cr.key)) != std::string::npos) {
                return true;
            }
        }
        return false;
    };

    int step = 1;
    for (auto idx : order) {
        const auto& cr = criteria[idx];
        std::string heading;
        switch (uniform(rng, 0, 6)) {
            case 0: heading = "**" + cr.label + ":**"; break;
            case 1: heading = "### " + cr.label; break;
            case 2: heading = "\"" + cr.label + "\":"; break;
            case 3: heading = cr.label + " (" + cr.description + "):"; break;
            case 4: heading = "Step " + std::to_string(step) + ": " + cr.label; break;
            case 5: heading = "\xE2\x80\x9C" + cr.label + "\xE2\x80\x9D:"; break;
            default: heading = lower(cr.key) + ":"; break;
        }
        ++step;
        c.text += heading + "\n";
        int n = uniform(rng, 1, 8);
        bool bullets = chance(rng, 0.4);
        for (int i = 0; i < n; ++i) {
            std::string idea;
            do idea = random_idea(rng);
            while (mentions_heading(idea));
            c.text += (bullets ? std::string("- ") : std::to_string(i + 1) + ". ") + idea + "\n";
            c.expected.push_back({cr.key, idea});
        }
        if (chance(rng, 0.5)) c.text += "\nNote: These are just some ideas, and the team may refine them.\n";
        c.text += "\n";
    }
    return c;
}

// -- session oracles --------------------------------------------------------

std::string reference_turn_message(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups,
                                   const std::string& directive) {
    std::string out;
    for (const auto& [key, ideas] : groups) {
        if (ideas.empty()) continue;
        out += "The human participants added the following \"" + key + "\" ideas:\n";
        for (std::size_t i = 0; i < ideas.size(); ++i) out += std::to_string(i + 1) + ". " + ideas[i] + "\n";
        out += "\n";
    }
    return out + directive;
}

std::vector<std::string> state_violations(const SessionState& s) {
    std::vector<std::string> v;
    std::set<std::string> ids;
    std::map<std::string, int> memberships;
    for (const auto& a : s.board) {
        if (!ids.insert(a.id).second) v.push_back("duplicate artifact id " + a.id);
        if (!s.activity.find_criterion(a.criterion_key)) v.push_back(a.id + " has unknown criterion");
        if (a.text.empty()) v.push_back(a.id + " has empty text");
        if (a.cluster_id && a.status == ArtifactStatus::rejected) v.push_back(a.id + " is rejected but clustered");
    }
    std::set<std::string> labels;
    for (const auto& c : s.clusters) {
        if (c.label.empty()) v.push_back(c.id + " has an empty label");
        if (!labels.insert(c.label).second) v.push_back("duplicate cluster label " + c.label);
        for (const auto& m : c.member_ids) {
            ++memberships[m];
            const auto* a = s.find_artifact(m);
            if (!a) v.push_back(c.id + " lists unknown member " + m);
            else if (a->status == ArtifactStatus::rejected) v.push_back(c.id + " holds rejected " + m);
            else if (a->cluster_id != c.id) v.push_back(m + " does not point back at " + c.id);
        }
    }
    for (const auto& a : s.board) {
        if (a.cluster_id && memberships[a.id] != 1) v.push_back(a.id + " cluster membership count wrong");
        if (!a.cluster_id && memberships[a.id] != 0) v.push_back(a.id + " listed but has no cluster id");
    }
    for (const auto& h : s.hills) {
        for (const auto* refs : {&h.who_refs, &h.what_refs, &h.wow_refs}) {
            if (refs->empty()) v.push_back(h.id + " has an empty ref list");
            for (const auto& r : *refs) {
                const auto* a = s.find_artifact(r);
                if (!a || a->status != ArtifactStatus::accepted) v.push_back(h.id + " refs non-accepted " + r);
            }
        }
    }
    if (s.mode == Mode::stepwise) {
        if (!s.current_step || *s.current_step < 1 || *s.current_step > s.activity.step_count()) {
            v.push_back("current step out of range");
        }
    } else if (s.current_step) {
        v.push_back("full run has a current step");
    }
    if (s.phase == Phase::awaiting_agent && s.pending_outbound.empty()) v.push_back("awaiting with nothing sent");
    if (s.phase == Phase::reviewing && !s.pending_outbound.empty()) v.push_back("reviewing with a pending request");
    const auto& msgs = s.conversation.messages();
    for (std::size_t i = 0; i < msgs.size(); ++i) {
        if (msgs[i].ordinal != i + 1) v.push_back("conversation ordinal gap");
        if (msgs[i].role != (i % 2 == 0 ? Role::facilitator : Role::agent)) v.push_back("roles do not alternate");
        if (i > 0 && msgs[i].role == Role::facilitator &&
            msgs[i].text.find(s.context.narrative) != std::string::npos) {
            v.push_back("context sent more than once");
        }
    }
    return v;
}

std::vector<std::string> transition_violations(const SessionState& before, const SessionState& after) {
    std::vector<std::string> v;
    if (after.board.size() < before.board.size()) v.push_back("board shrank");
    for (std::size_t i = 0; i < std::min(before.board.size(), after.board.size()); ++i) {
        const auto& a = before.board[i];
        const auto& b = after.board[i];
        if (a.id != b.id || a.criterion_key != b.criterion_key || a.origin != b.origin ||
            a.original_text != b.original_text) {
            v.push_back(a.id + " identity changed");
        }
        if (a.status != ArtifactStatus::proposed && (b.status != a.status || b.text != a.text)) {
            v.push_back(a.id + " left a terminal status");
        }
        if (a.text != b.text && (a.status != ArtifactStatus::proposed || b.status != ArtifactStatus::proposed)) {
            v.push_back(a.id + " text changed outside an amend");
        }
    }
    if (after.hills.size() < before.hills.size() || after.clusters.size() < before.clusters.size()) {
        v.push_back("hills or clusters removed");
    }
    if (before.phase == Phase::complete && !(before == after)) v.push_back("complete session changed");
    auto grew = after.conversation.size() - before.conversation.size();
    if (before.phase == Phase::awaiting_agent && after.phase == Phase::reviewing) {
        if (grew != 2) v.push_back("reply did not add exactly two messages");
    } else if (grew != 0) {
        v.push_back("conversation changed without a reply");
    }
    return v;
}

ActivityDefinition random_activity(Rng& rng) {
    static const std::vector<std::string> names{"Empathy Map", "Affinity Mapping", "Obstacle Course", "Ideation",
                                                "Hills", "Stakeholder Map", "Big Idea Vignettes"};
    static const std::vector<std::string> keys{"who", "what", "wow", "says", "does", "thinks", "feels", "pain"};
    ActivityDefinition a;
    a.name = pick(rng, names);
    a.definition_text = "Definition " + random_idea(rng);
    int examples = uniform(rng, 1, 3);
    for (int i = 0; i < examples; ++i) a.examples.push_back("Example " + random_idea(rng));
    std::vector<std::string> pool = keys;
    std::shuffle(pool.begin(), pool.end(), rng);
    int ncrit = uniform(rng, 1, 4);
    for (int i = 0; i < ncrit; ++i) {
        std::string label = pool[i];
        label[0] = static_cast<char>(std::toupper(label[0]));
        a.criteria.push_back({pool[i], label, "meaning of " + pool[i]});
    }
    std::vector<std::optional<std::string>> produces;
    for (const auto& c : a.criteria) produces.push_back(c.key);
    int commentary = uniform(rng, 0, 2);
    for (int i = 0; i < commentary; ++i) {
        produces.insert(produces.begin() + uniform(rng, 0, static_cast<int>(produces.size())), std::nullopt);
    }
    for (std::size_t i = 0; i < produces.size(); ++i) {
        a.steps.push_back({static_cast<int>(i + 1), "Do step " + std::to_string(i + 1), produces[i]});
    }
    return a;
}

// -- random operation sequences ---------------------------------------------

namespace {

class SequenceDriver {
public:
    SequenceDriver(std::uint64_t seed, SequenceReport& report) : rng_(seed), report_(report) {}

    void run(int steps) {
        bool hills = chance(rng_, 0.5);
        auto activity = hills ? builtin_hills() : random_activity(rng_);
        auto mode = chance(rng_, 0.7) ? Mode::stepwise : Mode::full_run;
        narrative_ = "CTX-" + std::to_string(rng_()) + " " + random_idea(rng_);
        SessionOptions options;
        options.id = "s000042";
        options.clock = counting_clock();
        session_.emplace(Session::start(activity, SessionContext{narrative_}, mode, options));
        check_fresh(SessionState{}, 0, true);

        for (int i = 0; i < steps; ++i) {
            if (!step()) break;
        }
        report_.events = session_->events().size();
    }

private:
    const SessionState& state() const { return session_->state(); }

    void fail(const std::string& what) { report_.failures.push_back(what); }

    // Verifies the events emitted since `before_events` and every invariant.
    void check_fresh(const SessionState& before, std::size_t before_events, bool first = false) {
        const auto& events = session_->events();
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (events[i].sequence != i + 1) fail("sequence gap at " + std::to_string(i));
        }
        for (std::size_t i = before_events; i < events.size(); ++i) {
            auto line = encode_event_line(events[i]);
            auto back = parse_event_log(line);
            if (back.size() != 1 || !(back[0] == events[i])) fail("event " + std::to_string(i + 1) + " JSON round trip");
        }
        if (!(replay(events) == state())) fail("replay differs from live state after " + last_op_);
        for (auto& v : state_violations(state())) fail(last_op_ + ": " + v);
        if (!first) {
            for (auto& v : transition_violations(before, state())) fail(last_op_ + ": " + v);
        }
    }

    std::vector<const Artifact*> with_status(ArtifactStatus status, std::string_view key = {}) const {
        std::vector<const Artifact*> out;
        for (const auto& a : state().board) {
            if (a.status == status && (key.empty() || a.criterion_key == key)) out.push_back(&a);
        }
        return out;
    }

    template <typename T>
    const T& any_of(const std::vector<T>& v) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
    }

    std::string agent_reply(std::size_t& expected_drafts) {
        const auto& s = state();
        if (s.mode == Mode::full_run) {
            auto c = random_full_reply(rng_, s.activity.criteria);
            expected_drafts = c.expected.size();
            return c.text;
        }
        const auto* step = s.activity.find_step(*s.current_step);
        if (!step->produces_criterion) {
            expected_drafts = 0;
            return "Diverging now. Quantity over quality.\nNote: These are just starting points.";
        }
        auto drafts = random_drafts(rng_, *step->produces_criterion);
        expected_drafts = drafts.size();
        std::string text = chance(rng_, 0.5) ? "Here is the list:\n" : "";
        text += render_drafts(drafts);
        if (chance(rng_, 0.7)) text += "\n\nNote: These are just some ideas, and the team may refine them.";
        return text;
    }

    // Runs an operation expected to fail with `kind` and leave no trace.
    template <typename Op>
    void expect_rejected(const std::string& name, ErrorKind kind, Op&& op) {
        auto before = state();
        auto n = session_->events().size();
        last_op_ = name;
        ++report_.rejected_operations;
        try {
            op();
            fail(name + " was accepted");
        } catch (const Error& e) {
            if (e.kind() != kind) fail(name + " failed with " + std::string(to_string(e.kind())) + ": " + e.what());
        }
        if (session_->events().size() != n || !(state() == before)) fail(name + " left a trace");
    }

    bool step() {
        auto before = state();
        auto before_events = session_->events().size();
        ++report_.operations;

        if (before.phase == Phase::complete) {
            expect_rejected("mutation after complete", ErrorKind::conflict, [&] {
                session_->submit_human_artifact(before.activity.criteria.front().key, "late idea", "Ana");
            });
            return false;
        }

        if (chance(rng_, 0.12)) {
            invalid_op();
            return true;
        }

        int roll = uniform(rng_, 0, 99);
        try {
            if (before.phase == Phase::awaiting_agent && roll < 55) {
                last_op_ = "agent reply";
                std::size_t expected = 0;
                auto reply = agent_reply(expected);
                session_->apply_agent_response(reply, Json{{"type", "scripted"}});
                if (state().board.size() != before.board.size() + expected) fail("agent reply draft count");
            } else if (roll < 65) {
                last_op_ = "add human artifact";
                const auto& c = any_of(before.activity.criteria);
                session_->submit_human_artifact(c.key, random_idea(rng_), any_of(std::vector<std::string>{"Ana", "Ben", ""}));
            } else if (roll < 80) {
                auto proposed = with_status(ArtifactStatus::proposed);
                if (proposed.empty()) return true;
                const auto* a = any_of(proposed);
                int which = uniform(rng_, 0, 2);
                last_op_ = "review " + a->id;
                session_->review_artifact(a->id, which == 0   ? ReviewDecision::accept()
                                                 : which == 1 ? ReviewDecision::reject()
                                                              : ReviewDecision::amend(random_idea(rng_)));
            } else if (roll < 88) {
                std::vector<std::string> ids;
                for (const auto& a : before.board) {
                    if (a.status != ArtifactStatus::rejected && chance(rng_, 0.3)) ids.push_back(a.id);
                }
                if (ids.empty()) return true;
                last_op_ = "cluster";
                session_->assign_cluster(ids, any_of(std::vector<std::string>{"accuracy", "forecasting", "people"}));
            } else if (roll < 92) {
                auto who = with_status(ArtifactStatus::accepted, "who");
                auto what = with_status(ArtifactStatus::accepted, "what");
                auto wow = with_status(ArtifactStatus::accepted, "wow");
                if (who.empty() || what.empty() || wow.empty()) return true;
                last_op_ = "hill";
                std::vector<std::string> a{any_of(who)->id}, b{any_of(what)->id}, c{any_of(wow)->id};
                session_->compose_hill(a, b, c, "A hill: " + random_idea(rng_));
            } else if (before.phase == Phase::reviewing && before.mode == Mode::stepwise &&
                       *before.current_step < before.activity.step_count() && roll < 98) {
                last_op_ = "advance";
                AdvanceOptions opts;
                opts.visit_commentary_steps = chance(rng_, 0.3);
                session_->advance(opts);
            } else if (before.phase == Phase::reviewing) {
                bool at_last = before.mode == Mode::full_run || *before.current_step == before.activity.step_count();
                if (!at_last && !chance(rng_, 0.3)) return true;
                last_op_ = "complete";
                session_->complete(!at_last);
                if (state().completed_with_override == at_last) fail("override flag wrong");
            } else {
                return true;
            }
        } catch (const Error& e) {
            fail(last_op_ + " rejected unexpectedly: " + e.what());
        }
        check_fresh(before, before_events);
        return true;
    }

    void invalid_op() {
        const auto& s = state();
        switch (uniform(rng_, 0, 7)) {
            case 0:
                expect_rejected("review unknown", ErrorKind::not_found,
                                [&] { session_->review_artifact("a999999", ReviewDecision::accept()); });
                break;
            case 1: {
                auto terminal = with_status(ArtifactStatus::accepted);
                auto rejected = with_status(ArtifactStatus::rejected);
                terminal.insert(terminal.end(), rejected.begin(), rejected.end());
                if (terminal.empty()) return;
                auto id = any_of(terminal)->id;
                expect_rejected("review terminal", ErrorKind::conflict,
                                [&] { session_->review_artifact(id, ReviewDecision::reject()); });
                break;
            }
            case 2: {
                auto rejected = with_status(ArtifactStatus::rejected);
                if (rejected.empty()) return;
                std::vector<std::string> ids{any_of(rejected)->id};
                expect_rejected("cluster rejected", ErrorKind::conflict,
                                [&] { session_->assign_cluster(ids, "accuracy"); });
                break;
            }
            case 3: {
                auto proposed = with_status(ArtifactStatus::proposed, "who");
                auto what = with_status(ArtifactStatus::accepted, "what");
                auto wow = with_status(ArtifactStatus::accepted, "wow");
                if (proposed.empty() || what.empty() || wow.empty()) return;
                std::vector<std::string> a{any_of(proposed)->id}, b{any_of(what)->id}, c{any_of(wow)->id};
                expect_rejected("hill with proposed ref", ErrorKind::validation,
                                [&] { session_->compose_hill(a, b, c, "statement"); });
                break;
            }
            case 4:
                if (s.phase == Phase::awaiting_agent) {
                    expect_rejected("advance while awaiting", ErrorKind::conflict, [&] { session_->advance(); });
                } else {
                    expect_rejected("reply while reviewing", ErrorKind::conflict,
                                    [&] { session_->apply_agent_response("1. x"); });
                }
                break;
            case 5:
                expect_rejected("unknown criterion", ErrorKind::validation,
                                [&] { session_->submit_human_artifact("when", "idea", "Ana"); });
                break;
            case 6:
                expect_rejected("empty text", ErrorKind::validation, [&] {
                    session_->submit_human_artifact(s.activity.criteria.front().key, "  ", "Ana");
                });
                break;
            default:
                if (s.mode == Mode::full_run && s.phase == Phase::reviewing) {
                    expect_rejected("advance full run", ErrorKind::conflict, [&] { session_->advance(); });
                } else if (s.phase == Phase::reviewing && s.mode == Mode::stepwise &&
                           *s.current_step < s.activity.step_count()) {
                    expect_rejected("complete early", ErrorKind::conflict, [&] { session_->complete(false); });
                }
                break;
        }
    }

    Rng rng_;
    SequenceReport& report_;
    std::optional<Session> session_;
    std::string narrative_;
    std::string last_op_ = "start";
};

}  // namespace

SequenceReport run_random_sequence(std::uint64_t seed, int steps) {
    SequenceReport report;
    try {
        SequenceDriver(seed, report).run(steps);
    } catch (const std::exception& e) {
        report.failures.push_back(std::string("unexpected exception: ") + e.what());
    }
    return report;
}

}  // namespace chai::testing
