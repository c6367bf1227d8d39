#include "chai/prompt.hpp"

#include "chai/error.hpp"
#include "text.hpp"

namespace chai {
namespace {

constexpr std::string_view kDefinitionHeading = "Activity Explanation:";
constexpr std::string_view kMultiExampleHeading = "Examples of ideal outcomes:";
constexpr std::string_view kDefaultExampleLabel = "Example of an ideal outcome";
constexpr std::string_view kInstructionsHeading = "Instructions for this activity:";
constexpr std::string_view kContextHeading = "Relevant Activity Context:";
constexpr std::string_view kFirstTurnLeadIn = "Given the above context, ";

bool starts_with_vowel(std::string_view name) {
    auto trimmed = text::trim(name);
    if (trimmed.empty()) return false;
    switch (trimmed.front()) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
        case 'A': case 'E': case 'I': case 'O': case 'U':
            return true;
        default:
            return false;
    }
}

std::string render_examples(const ActivityDefinition& activity) {
    if (activity.examples.size() == 1) {
        std::string label(activity.example_label.value_or(std::string(kDefaultExampleLabel)));
        return label + ": \"" + text::canonical_block(activity.examples.front()) + "\"";
    }
    std::string out(kMultiExampleHeading);
    for (std::size_t i = 0; i < activity.examples.size(); ++i) {
        out += "\n" + std::to_string(i + 1) + ". \"" + text::canonical_block(activity.examples[i]) + "\"";
    }
    return out;
}

std::string render_instructions(const ActivityDefinition& activity) {
    std::string out(kInstructionsHeading);
    for (const auto& step : activity.steps) {
        out += "\n" + std::to_string(step.index) + ". " + text::canonical_block(step.instruction_text);
    }
    return out;
}

std::string headed(std::string_view heading, std::string_view body) {
    return std::string(heading) + "\n" + text::canonical_block(body);
}

}  // namespace

SessionContext SessionContext::from_text(std::string narrative) {
    if (text::is_blank(narrative)) throw Error(ErrorKind::validation, "context: must not be empty");
    return SessionContext{std::move(narrative)};
}

std::string_view to_string(SegmentKind kind) noexcept {
    switch (kind) {
        case SegmentKind::introduction: return "introduction";
        case SegmentKind::definition: return "definition";
        case SegmentKind::examples: return "examples";
        case SegmentKind::instructions: return "instructions";
        case SegmentKind::context: return "context";
        case SegmentKind::execute: return "execute";
    }
    return "unknown";
}

std::string render_introduction(std::string_view activity_name) {
    std::string_view article = starts_with_vowel(activity_name) ? "an" : "a";
    return "We are conducting " + std::string(article) + " \"" + std::string(text::trim(activity_name)) +
           "\" Design Thinking exercise.";
}

ExecuteDirective make_step_directive(const ActivityDefinition& activity, int index) {
    if (index < 1 || index > activity.step_count()) {
        throw Error(ErrorKind::validation, "step " + std::to_string(index) + " is out of range 1.." +
                                               std::to_string(activity.step_count()));
    }
    std::string sentence = "perform Step " + std::to_string(index) + " of the exercise.";
    std::string text = index == 1 ? std::string(kFirstTurnLeadIn) + sentence : "P" + sentence.substr(1);
    return {DirectiveScope::step, index, std::move(text)};
}

ExecuteDirective make_full_run_directive(const ActivityDefinition& activity) {
    return {DirectiveScope::full, 0,
            std::string(kFirstTurnLeadIn) + "perform the entire " + std::string(text::trim(activity.name)) +
                " exercise."};
}

ComposedPrompt compose_initial_prompt(const ActivityDefinition& activity, const SessionContext& context,
                                      const ExecuteDirective& directive) {
    if (directive.scope == DirectiveScope::step &&
        (directive.step < 1 || directive.step > activity.step_count())) {
        throw Error(ErrorKind::validation, "directive: step " + std::to_string(directive.step) + " is out of range");
    }
    if (text::is_blank(directive.text)) throw Error(ErrorKind::validation, "directive: text must not be empty");
    if (text::is_blank(context.narrative)) throw Error(ErrorKind::validation, "context: must not be empty");

    ComposedPrompt prompt{{{
        {SegmentKind::introduction, render_introduction(activity.name)},
        {SegmentKind::definition, headed(kDefinitionHeading, activity.definition_text)},
        {SegmentKind::examples, render_examples(activity)},
        {SegmentKind::instructions, render_instructions(activity)},
        {SegmentKind::context, headed(kContextHeading, context.narrative)},
        {SegmentKind::execute, text::canonical_block(directive.text)},
    }}, {}};
    prompt.full_text = render_full_text(prompt);
    return prompt;
}

std::string render_full_text(const ComposedPrompt& prompt) {
    std::string out;
    for (std::size_t i = 0; i < prompt.segments.size(); ++i) {
        if (i) out += "\n\n";
        out += text::canonical_block(prompt.segments[i].text);
    }
    out += '\n';
    return out;
}

}  // namespace chai
