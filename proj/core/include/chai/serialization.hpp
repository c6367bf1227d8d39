#pragma once

#include "chai/json.hpp"
#include "chai/session.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace chai {

// Event log: one JSON object per line, {"sequence","timestamp","type","payload"}.

Json event_to_json(const SessionEvent& event);
SessionEvent event_from_json(const Json& doc);

/// Compact JSON followed by LF.
std::string encode_event_line(const SessionEvent& event);

/// Parses a whole log. Blank lines are ignored; anything else that fails to
/// decode throws Error(parse) naming the line.
std::vector<SessionEvent> parse_event_log(std::string_view text);

Json artifact_to_json(const Artifact& artifact);
Json state_to_json(const SessionState& state);

}  // namespace chai
