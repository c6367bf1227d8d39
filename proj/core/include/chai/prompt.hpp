#pragma once

#include "chai/activity.hpp"

#include <array>
#include <string>
#include <string_view>

namespace chai {

/// Free-text background for a session: why the group is co-creating,
/// who participates, and the domain facts the agent should know.
struct SessionContext {
    std::string narrative;

    /// Throws Error(validation) when the narrative is blank.
    static SessionContext from_text(std::string narrative);

    bool operator==(const SessionContext&) const = default;
};

enum class DirectiveScope { full, step };

struct ExecuteDirective {
    DirectiveScope scope = DirectiveScope::full;
    int step = 0;  // 1-based; meaningful only for DirectiveScope::step
    std::string text;

    bool operator==(const ExecuteDirective&) const = default;
};

enum class SegmentKind { introduction, definition, examples, instructions, context, execute };

inline constexpr std::array<SegmentKind, 6> kSegmentOrder{
    SegmentKind::introduction, SegmentKind::definition, SegmentKind::examples,
    SegmentKind::instructions, SegmentKind::context,    SegmentKind::execute,
};

std::string_view to_string(SegmentKind kind) noexcept;

struct PromptSegment {
    SegmentKind kind;
    std::string text;

    bool operator==(const PromptSegment&) const = default;
};

struct ComposedPrompt {
    std::array<PromptSegment, 6> segments;
    std::string full_text;

    bool operator==(const ComposedPrompt&) const = default;
};

/// Builds the six-part initial prompt: four static segments from the
/// activity followed by the session context and the execute directive.
/// Throws Error(validation) if the directive does not fit the activity.
ComposedPrompt compose_initial_prompt(const ActivityDefinition& activity,
                                      const SessionContext& context,
                                      const ExecuteDirective& directive);

/// Step 1 carries the "Given the above context, " lead-in; later steps are
/// continuation turns and omit it.
ExecuteDirective make_step_directive(const ActivityDefinition& activity, int index);
ExecuteDirective make_full_run_directive(const ActivityDefinition& activity);

/// Segments joined by one blank line, LF only, no trailing blanks on any
/// line, exactly one trailing newline.
std::string render_full_text(const ComposedPrompt& prompt);

std::string render_introduction(std::string_view activity_name);

}  // namespace chai
