#pragma once

#include "chai/activity.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chai {

/// One sticky-note sized idea extracted from an agent reply.
struct ArtifactDraft {
    std::string criterion_key;
    std::string text;              // trimmed, list marker removed
    std::size_t source_line = 0;   // 0-based line in the parsed input
};

struct TextLine {
    std::size_t source_line = 0;
    std::string text;  // trimmed
};

/// Every non-blank input line lands in exactly one of the three lists.
struct ParsedResponse {
    std::vector<ArtifactDraft> drafts;
    std::vector<TextLine> disclaimers;
    std::vector<TextLine> unparsed;

    [[nodiscard]] std::vector<std::string> disclaimer_texts() const;
    [[nodiscard]] std::vector<std::string> unparsed_texts() const;
};

std::vector<std::string> default_disclaimer_cues();

struct ParserOptions {
    // Hedging prefixes, matched case-insensitively at line start in
    // addition to the fixed "note:" cue.
    std::vector<std::string> disclaimer_cues = default_disclaimer_cues();
};

bool detect_disclaimer(std::string_view line, const ParserOptions& options = {});

/// Body of a numbered ("3." / "3)") or bulleted ("-", "*", "•") list line,
/// with nested markers removed; nullopt when the line is not a list item.
std::optional<std::string> list_item_body(std::string_view line);

/// Parses the reply to a single step whose items all belong to one criterion.
ParsedResponse parse_step_response(std::string_view text, std::string_view expected_criterion,
                                   const ParserOptions& options = {});

/// Parses an all-at-once reply. Sections start at lines that look like a
/// criterion heading ("Who:", "**What**", "### \"Wow\"", ...); text before
/// the first heading is unparsed.
ParsedResponse parse_full_response(std::string_view text,
                                   std::span<const CriterionDefinition> criteria,
                                   const ParserOptions& options = {});

/// Reply to a step that feeds no criterion: disclaimers are still split out,
/// everything else is commentary.
ParsedResponse parse_commentary(std::string_view text, const ParserOptions& options = {});

/// Index of the criterion whose heading this line is, if any.
std::optional<std::size_t> match_criterion_heading(std::string_view line,
                                                   std::span<const CriterionDefinition> criteria);

/// "N. {text}" per draft, one per line, no trailing newline.
std::string render_drafts(std::span<const ArtifactDraft> drafts);

}  // namespace chai
