#include "chai/parser.hpp"

#include "text.hpp"

#include <array>

namespace chai {
namespace {

constexpr std::string_view kBullet = "\xE2\x80\xA2";  // •
constexpr std::array<std::string_view, 6> kQuotes{
    "\"", "'", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99",
};

bool is_ws(char c) { return c == ' ' || c == '\t'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a single list marker plus the whitespace after it, or 0.
std::size_t marker_length(std::string_view s) {
    std::size_t i = 0;
    if (!s.empty() && is_digit(s[0])) {
        while (i < s.size() && is_digit(s[i])) ++i;
        if (i >= s.size() || (s[i] != '.' && s[i] != ')')) return 0;
        ++i;
    } else if (s.starts_with(kBullet)) {
        i = kBullet.size();
    } else if (!s.empty() && (s[0] == '-' || s[0] == '*')) {
        i = 1;
    } else {
        return 0;
    }
    if (i >= s.size() || !is_ws(s[i])) return 0;
    while (i < s.size() && is_ws(s[i])) ++i;
    return i < s.size() ? i : 0;
}

std::string_view strip_leading_emphasis(std::string_view s) {
    bool bullet = s.size() >= 2 && s[0] == '*' && is_ws(s[1]);
    if (bullet) return s;
    while (!s.empty() && (s.front() == '*' || s.front() == '_')) s.remove_prefix(1);
    return text::trim(s);
}

bool strip_quote_prefix(std::string_view& s) {
    for (auto q : kQuotes) {
        if (s.starts_with(q)) {
            s.remove_prefix(q.size());
            return true;
        }
    }
    return false;
}

bool strip_quote_suffix(std::string_view& s) {
    for (auto q : kQuotes) {
        if (s.ends_with(q)) {
            s.remove_suffix(q.size());
            return true;
        }
    }
    return false;
}

// "Step 2:", "Step 2 -", "Step 2." prefixes.
bool strip_step_prefix(std::string_view& s) {
    if (!text::istarts_with(s, "step ")) return false;
    std::size_t i = 5;
    std::size_t digits = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == digits) return false;
    while (i < s.size() && (is_ws(s[i]) || s[i] == ':' || s[i] == '.' || s[i] == '-' || s[i] == ')')) ++i;
    if (i >= s.size()) return false;
    s.remove_prefix(i);
    return true;
}

bool strip_parenthetical_suffix(std::string_view& s) {
    if (!s.ends_with(')')) return false;
    auto open = s.rfind('(');
    if (open == std::string_view::npos || open == 0) return false;
    auto head = text::rtrim(s.substr(0, open));
    if (head.empty()) return false;
    s = head;
    return true;
}

std::string_view normalize_heading(std::string_view line) {
    auto s = text::trim(line);
    bool changed = true;
    while (changed && !s.empty()) {
        changed = false;
        auto before = s;
        while (!s.empty() && s.front() == '#') s.remove_prefix(1);
        while (!s.empty() && (s.front() == '*' || s.front() == '_' || is_ws(s.front()))) s.remove_prefix(1);
        while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == ':' || s.back() == '.' ||
                              is_ws(s.back()))) {
            s.remove_suffix(1);
        }
        strip_quote_prefix(s);
        strip_quote_suffix(s);
        if (auto m = marker_length(s); m > 0) s.remove_prefix(m);
        strip_step_prefix(s);
        strip_parenthetical_suffix(s);
        s = text::trim(s);
        changed = s != before;
    }
    return s;
}

/// Classifies the lines of one section. With a criterion, list items and
/// bare lines under an introductory "...:" line become drafts; without one
/// every non-disclaimer line is commentary.
class SectionParser {
public:
    SectionParser(std::optional<std::string> criterion, const ParserOptions& options, ParsedResponse& out)
        : criterion_(std::move(criterion)), options_(&options), out_(&out) {}

    void feed(std::size_t line_no, std::string_view raw) {
        auto line = text::trim(raw);
        if (line.empty()) {
            if (bare_armed_ && items_in_block_ > 0) bare_armed_ = false;
            return;
        }
        if (detect_disclaimer(line, *options_)) {
            out_->disclaimers.push_back({line_no, std::string(line)});
            bare_armed_ = false;
            return;
        }
        if (!criterion_) {
            out_->unparsed.push_back({line_no, std::string(line)});
            return;
        }
        if (auto body = list_item_body(line)) {
            out_->drafts.push_back({*criterion_, std::move(*body), line_no});
            if (bare_armed_) ++items_in_block_;
            return;
        }
        // Markdown tables and headings are never items.
        if (line.front() == '|' || line.front() == '#') {
            out_->unparsed.push_back({line_no, std::string(line)});
            bare_armed_ = false;
            return;
        }
        if (line.back() == ':') {
            out_->unparsed.push_back({line_no, std::string(line)});
            bare_armed_ = true;
            items_in_block_ = 0;
            return;
        }
        if (bare_armed_) {
            out_->drafts.push_back({*criterion_, std::string(line), line_no});
            ++items_in_block_;
            return;
        }
        out_->unparsed.push_back({line_no, std::string(line)});
    }

private:
    std::optional<std::string> criterion_;
    const ParserOptions* options_;
    ParsedResponse* out_;
    bool bare_armed_ = false;
    std::size_t items_in_block_ = 0;
};

}  // namespace

std::vector<std::string> ParsedResponse::disclaimer_texts() const {
    std::vector<std::string> out;
    out.reserve(disclaimers.size());
    for (const auto& d : disclaimers) out.push_back(d.text);
    return out;
}

std::vector<std::string> ParsedResponse::unparsed_texts() const {
    std::vector<std::string> out;
    out.reserve(unparsed.size());
    for (const auto& u : unparsed) out.push_back(u.text);
    return out;
}

std::vector<std::string> default_disclaimer_cues() { return {"these are just", "keep in mind", "please note"}; }

bool detect_disclaimer(std::string_view line, const ParserOptions& options) {
    auto s = strip_leading_emphasis(text::trim(line));
    if (text::istarts_with(s, "note:")) return true;
    for (const auto& cue : options.disclaimer_cues) {
        if (!cue.empty() && text::istarts_with(s, cue)) return true;
    }
    return false;
}

std::optional<std::string> list_item_body(std::string_view line) {
    auto s = text::trim(line);
    auto m = marker_length(s);
    if (m == 0) return std::nullopt;
    while (m > 0) {
        s = text::trim(s.substr(m));
        m = marker_length(s);
    }
    return std::string(s);
}

std::optional<std::size_t> match_criterion_heading(std::string_view line,
                                                   std::span<const CriterionDefinition> criteria) {
    auto normalized = normalize_heading(line);
    if (normalized.empty()) return std::nullopt;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (text::iequals(normalized, criteria[i].label) || text::iequals(normalized, criteria[i].key)) return i;
    }
    return std::nullopt;
}

ParsedResponse parse_step_response(std::string_view text, std::string_view expected_criterion,
                                   const ParserOptions& options) {
    ParsedResponse out;
    SectionParser section(std::string(expected_criterion), options, out);
    auto lines = text::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) section.feed(i, lines[i]);
    return out;
}

ParsedResponse parse_commentary(std::string_view text, const ParserOptions& options) {
    ParsedResponse out;
    SectionParser section(std::nullopt, options, out);
    auto lines = text::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) section.feed(i, lines[i]);
    return out;
}

ParsedResponse parse_full_response(std::string_view text, std::span<const CriterionDefinition> criteria,
                                   const ParserOptions& options) {
    ParsedResponse out;
    SectionParser section(std::nullopt, options, out);
    auto lines = text::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!detect_disclaimer(lines[i], options)) {
            if (auto match = match_criterion_heading(lines[i], criteria)) {
                out.unparsed.push_back({i, std::string(text::trim(lines[i]))});
                section = SectionParser(criteria[*match].key, options, out);
                continue;
            }
        }
        section.feed(i, lines[i]);
    }
    return out;
}

std::string render_drafts(std::span<const ArtifactDraft> drafts) {
    std::string out;
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". " + drafts[i].text;
    }
    return out;
}

}  // namespace chai
