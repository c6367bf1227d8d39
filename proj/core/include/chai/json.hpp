#pragma once

#include <nlohmann/json.hpp>

namespace chai {

// Insertion-ordered so that every document we write is byte-stable.
using Json = nlohmann::ordered_json;

}  // namespace chai
