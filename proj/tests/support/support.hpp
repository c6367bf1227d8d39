#pragma once

// Shared by the unit tests and the acceptance runner: fixtures, hand-rolled
// generators, and reference oracles that do not call into the code under test.

#include "chai/activity.hpp"
#include "chai/parser.hpp"
#include "chai/session.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace chai::testing {

using Rng = std::mt19937_64;

// -- fixtures ---------------------------------------------------------------

std::filesystem::path data_dir();
std::string read_file(const std::filesystem::path& path);
std::string golden_prompt();
std::string retailinc_context();
std::filesystem::path transcript_path();

// Expected Who/What/Wow columns of the golden board, copied by hand.
const std::vector<std::string>& table1_who();
const std::vector<std::string>& table1_what();
const std::vector<std::string>& table1_wow();

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// "T000001", "T000002", ... so logs are reproducible.
Clock counting_clock();

/// Event-log lines with the timestamp member removed.
std::vector<std::string> log_without_timestamps(const std::filesystem::path& log);

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs a command through /bin/sh, capturing stdout and stderr.
RunResult run_command(const std::string& command);
std::string shell_quote(const std::string& s);

// -- parser generators and oracles -----------------------------------------

/// True when `s` starts like a list item ("3.", "3)", "-", "*", "•" + space).
bool oracle_has_list_marker(const std::string& s);

/// Idea text: trimmed, single-line, marker-free, but otherwise adversarial
/// (digits, colons, quotes, emphasis, "#", "|", non-ASCII).
std::string random_idea(Rng& rng);
std::vector<ArtifactDraft> random_drafts(Rng& rng, const std::string& key);

/// A reply mixing every line shape the parser knows about.
std::string random_mixed_reply(Rng& rng);

/// Empty when every non-blank line of `input` is accounted for exactly once
/// and each record's text matches its source line; otherwise the problems.
std::vector<std::string> partition_violations(const std::string& input, const ParsedResponse& parsed);

struct ExpectedDraft {
    std::string key;
    std::string text;
    bool operator==(const ExpectedDraft&) const = default;
};

/// Straight-line reference split for all-at-once replies built from simple
/// headings and list items.
std::vector<ExpectedDraft> reference_full_split(const std::string& text,
                                                const std::vector<CriterionDefinition>& criteria);

/// Full-reply generator whose ground truth is known by construction.
struct FullReplyCase {
    std::string text;
    std::vector<ExpectedDraft> expected;
};
FullReplyCase random_full_reply(Rng& rng, const std::vector<CriterionDefinition>& criteria);

// -- session oracles --------------------------------------------------------

/// Assembles the human-ideas preamble by hand from (criterion key, text)
/// groups listed in activity order.
std::string reference_turn_message(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups,
                                   const std::string& directive);

/// Structural invariants of a single state.
std::vector<std::string> state_violations(const SessionState& state);

/// Invariants relating a state to the one before it.
std::vector<std::string> transition_violations(const SessionState& before, const SessionState& after);

struct SequenceReport {
    std::size_t operations = 0;
    std::size_t rejected_operations = 0;
    std::size_t events = 0;
    std::vector<std::string> failures;
};

/// Drives a session through `steps` random operations chosen to respect
/// preconditions (plus a few deliberately invalid ones), checking replay
/// equality and all invariants after every operation.
SequenceReport run_random_sequence(std::uint64_t seed, int steps);

ActivityDefinition random_activity(Rng& rng);

}  // namespace chai::testing
