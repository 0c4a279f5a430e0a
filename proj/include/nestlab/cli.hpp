#pragma once

// Problem files in, reports out. The nestlab executable is a thin wrapper
// around run(); tests and the python module call it directly.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "nestlab/numerics.hpp"

namespace nestlab::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kFormatVersion = "1";

enum ExitCode : int { kOk = 0, kValidation = 2, kIndeterminate = 3, kNumerical = 4 };

/// Malformed input. `pointer` is a JSON pointer into the problem file.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string pointer, const std::string& message)
      : std::runtime_error(message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Command-line overrides; unset fields fall back to the problem's params,
/// then NESTLAB_SEED (seed only), then the defaults.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> eq_tol;
  std::optional<int> budget;
};

struct Outcome {
  int exit_code = kOk;
  nlohmann::json report;
  std::string text;
};

/// `task` must equal the problem's "task" field. Never throws for bad input;
/// failures are mapped to exit codes with a diagnostic in the report.
Outcome run(const nlohmann::json& problem, const std::string& task, const Overrides& overrides = {});

/// Reads and parses the file, then calls run().
Outcome run_file(const std::string& path, const std::string& task, const Overrides& overrides = {});

/// Row-major nested [re, im] pairs.
nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j, const std::string& pointer = "");

/// Canonical serialization used for reports (sorted keys, fixed indent).
std::string dump_report(const nlohmann::json& report);

}  // namespace nestlab::cli
