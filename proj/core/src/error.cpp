#include "chai/error.hpp"

namespace chai {
namespace {

std::string join_violations(const std::vector<std::string>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v;
    }
    return out;
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::conflict: return "conflict";
        case ErrorKind::transport: return "transport";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind), violations_{message} {}

Error::Error(ErrorKind kind, std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), kind_(kind), violations_(std::move(violations)) {}

}  // namespace chai
