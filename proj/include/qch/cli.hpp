#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qch/quantum_engine.hpp"

namespace qch::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kNumericalFailure = 2,
  kVerificationFailure = 3,
};

/// Malformed settings document. The message names the offending field.
class SettingsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a settings document:
///   {"alice": [[3 reals], [3 reals]], "bob": [[...], [...]],
///    "relabel": {"a1": [1,2,3], "a2": [...], "b1": [...], "b2": [...]}}
/// `relabel` and each of its keys are optional (identity when absent).
PhaseSettings parse_settings(const std::string& text);
std::string format_settings(const PhaseSettings& settings);
nlohmann::json settings_to_json(const PhaseSettings& settings);

/// Serializes with every floating-point number in %.17g form.
std::string dump_json(const nlohmann::json& doc, int indent = 2);

/// FNV-1a 64-bit digest, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

/// Runs one command. `args` excludes the program name. Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qch::cli
