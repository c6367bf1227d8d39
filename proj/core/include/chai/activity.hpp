#pragma once

#include "chai/json.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chai {

/// One board column of an activity, e.g. the "who" of a Hill.
struct CriterionDefinition {
    std::string key;  // lowercase alphanumeric plus hyphen
    std::string label;
    std::string description;

    bool operator==(const CriterionDefinition&) const = default;
};

struct StepDefinition {
    int index = 0;  // 1-based
    std::string instruction_text;
    // Board column this step's agent output feeds, if any.
    std::optional<std::string> produces_criterion;

    bool operator==(const StepDefinition&) const = default;
};

/// A reusable Design Thinking exercise. Holds the four static parts of the
/// initial prompt: name (introduction), definition, examples and steps.
struct ActivityDefinition {
    std::string name;
    std::string definition_text;
    std::vector<std::string> examples;
    // Lead-in used when exactly one example is rendered inline.
    std::optional<std::string> example_label;
    std::vector<CriterionDefinition> criteria;
    std::vector<StepDefinition> steps;

    [[nodiscard]] int step_count() const noexcept { return static_cast<int>(steps.size()); }
    [[nodiscard]] const CriterionDefinition* find_criterion(std::string_view key) const noexcept;
    [[nodiscard]] const StepDefinition* find_step(int index) const noexcept;

    bool operator==(const ActivityDefinition&) const = default;
};

/// The "Hills" exercise with its explanation, example and five steps.
ActivityDefinition builtin_hills();

/// Looks up a shipped activity by case-insensitive name ("hills").
std::optional<ActivityDefinition> find_builtin_activity(std::string_view name);
std::vector<std::string> builtin_activity_names();

/// Empty iff every invariant holds. Each entry names the offending field.
std::vector<std::string> validate_activity(const ActivityDefinition& activity);

/// Parses and validates an activity document. Throws Error(parse) for
/// malformed JSON or structure, Error(validation) listing all violations.
ActivityDefinition load_activity(std::string_view document);

/// Canonical form: 2-space indent, fixed key order, LF, trailing newline.
std::string serialize_activity(const ActivityDefinition& activity);

Json activity_to_json(const ActivityDefinition& activity);
ActivityDefinition activity_from_json(const Json& doc);

}  // namespace chai
