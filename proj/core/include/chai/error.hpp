#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chai {

enum class ErrorKind {
    parse,       // malformed document or event log
    validation,  // an invariant or precondition on the input was violated
    not_found,   // unknown session, artifact, or activity
    conflict,    // wrong phase or terminal status
    transport,   // agent unreachable, timed out, or script exhausted
};

std::string_view to_string(ErrorKind kind) noexcept;

/// The single exception type thrown by the library. Validation failures
/// carry every violation found, not just the first.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    Error(ErrorKind kind, std::vector<std::string> violations);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    ErrorKind kind_;
    std::vector<std::string> violations_;
};

}  // namespace chai
