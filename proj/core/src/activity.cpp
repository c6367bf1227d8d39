#include "chai/activity.hpp"

#include "chai/error.hpp"
#include "text.hpp"

#include <set>

namespace chai {
namespace {

bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
        if (!ok) return false;
    }
    return true;
}

std::string at(std::string_view field, std::size_t position) {
    return std::string(field) + "[" + std::to_string(position) + "]";
}

const Json& require(const Json& doc, const char* field) {
    if (!doc.is_object() || !doc.contains(field)) {
        throw Error(ErrorKind::parse, std::string("missing field \"") + field + "\"");
    }
    return doc.at(field);
}

std::string require_string(const Json& doc, const char* field) {
    const auto& value = require(doc, field);
    if (!value.is_string()) throw Error(ErrorKind::parse, std::string("field \"") + field + "\" must be a string");
    return value.get<std::string>();
}

const Json& require_array(const Json& doc, const char* field) {
    const auto& value = require(doc, field);
    if (!value.is_array()) throw Error(ErrorKind::parse, std::string("field \"") + field + "\" must be an array");
    return value;
}

}  // namespace

const CriterionDefinition* ActivityDefinition::find_criterion(std::string_view key) const noexcept {
    for (const auto& c : criteria) {
        if (c.key == key) return &c;
    }
    return nullptr;
}

const StepDefinition* ActivityDefinition::find_step(int index) const noexcept {
    if (index < 1 || index > step_count()) return nullptr;
    return &steps[static_cast<std::size_t>(index - 1)];
}

std::vector<std::string> validate_activity(const ActivityDefinition& activity) {
    std::vector<std::string> violations;

    if (text::is_blank(activity.name)) violations.emplace_back("name: must not be empty");
    if (text::is_blank(activity.definition_text)) violations.emplace_back("definition: must not be empty");

    if (activity.examples.empty()) violations.emplace_back("examples: at least one required");
    for (std::size_t i = 0; i < activity.examples.size(); ++i) {
        if (text::is_blank(activity.examples[i])) violations.push_back(at("examples", i + 1) + ": must not be empty");
    }
    if (activity.example_label && text::is_blank(*activity.example_label)) {
        violations.emplace_back("example_label: must not be empty when present");
    }

    std::set<std::string, std::less<>> keys;
    for (std::size_t i = 0; i < activity.criteria.size(); ++i) {
        const auto& c = activity.criteria[i];
        auto where = at("criteria", i + 1);
        if (c.key.empty()) {
            violations.push_back(where + ": key must not be empty");
        } else if (!valid_key(c.key)) {
            violations.push_back(where + ": key \"" + c.key + "\" must be lowercase alphanumeric or hyphen");
        }
        if (!c.key.empty() && !keys.insert(c.key).second) {
            violations.push_back(where + ": duplicate key \"" + c.key + "\"");
        }
        if (text::is_blank(c.label)) violations.push_back(where + ": label must not be empty");
    }

    if (activity.steps.empty()) violations.emplace_back("steps: at least one required");
    bool contiguous = true;
    for (std::size_t i = 0; i < activity.steps.size(); ++i) {
        if (activity.steps[i].index != static_cast<int>(i + 1)) contiguous = false;
    }
    if (!contiguous) violations.emplace_back("steps: non-contiguous steps (indices must run 1..N in order)");
    for (std::size_t i = 0; i < activity.steps.size(); ++i) {
        const auto& s = activity.steps[i];
        auto where = at("steps", i + 1);
        if (text::is_blank(s.instruction_text)) violations.push_back(where + ": instruction must not be empty");
        if (s.produces_criterion && !activity.find_criterion(*s.produces_criterion)) {
            violations.push_back(where + ": unknown criterion");
        }
    }
    return violations;
}

Json activity_to_json(const ActivityDefinition& activity) {
    Json doc = Json::object();
    doc["name"] = activity.name;
    doc["definition"] = activity.definition_text;
    doc["examples"] = activity.examples;
    if (activity.example_label) doc["example_label"] = *activity.example_label;
    Json criteria = Json::array();
    for (const auto& c : activity.criteria) {
        criteria.push_back(Json{{"key", c.key}, {"label", c.label}, {"description", c.description}});
    }
    doc["criteria"] = std::move(criteria);
    Json steps = Json::array();
    for (const auto& s : activity.steps) {
        Json step{{"index", s.index}, {"instruction", s.instruction_text}};
        if (s.produces_criterion) step["produces_criterion"] = *s.produces_criterion;
        steps.push_back(std::move(step));
    }
    doc["steps"] = std::move(steps);
    return doc;
}

ActivityDefinition activity_from_json(const Json& doc) {
    if (!doc.is_object()) throw Error(ErrorKind::parse, "activity document must be a JSON object");

    ActivityDefinition activity;
    activity.name = require_string(doc, "name");
    activity.definition_text = require_string(doc, "definition");
    for (const auto& example : require_array(doc, "examples")) {
        if (!example.is_string()) throw Error(ErrorKind::parse, "examples must be strings");
        activity.examples.push_back(example.get<std::string>());
    }
    if (doc.contains("example_label")) activity.example_label = require_string(doc, "example_label");

    for (const auto& c : require_array(doc, "criteria")) {
        activity.criteria.push_back({require_string(c, "key"), require_string(c, "label"),
                                     c.contains("description") ? require_string(c, "description") : ""});
    }
    for (const auto& s : require_array(doc, "steps")) {
        const auto& index = require(s, "index");
        if (!index.is_number_integer()) throw Error(ErrorKind::parse, "step index must be an integer");
        StepDefinition step;
        step.index = index.get<int>();
        step.instruction_text = require_string(s, "instruction");
        if (s.contains("produces_criterion") && !s.at("produces_criterion").is_null()) {
            step.produces_criterion = require_string(s, "produces_criterion");
        }
        activity.steps.push_back(std::move(step));
    }
    return activity;
}

ActivityDefinition load_activity(std::string_view document) {
    Json doc;
    try {
        doc = Json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed activity document: ") + e.what());
    }
    auto activity = activity_from_json(doc);
    if (auto violations = validate_activity(activity); !violations.empty()) {
        throw Error(ErrorKind::validation, std::move(violations));
    }
    return activity;
}

std::string serialize_activity(const ActivityDefinition& activity) {
    return activity_to_json(activity).dump(2, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
}

std::optional<ActivityDefinition> find_builtin_activity(std::string_view name) {
    if (text::iequals(name, "hills")) return builtin_hills();
    return std::nullopt;
}

std::vector<std::string> builtin_activity_names() { return {"hills"}; }

}  // namespace chai
