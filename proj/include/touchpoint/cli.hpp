#pragma once

// Batch front end: problem-file parsing, command dispatch and JSON reports.
//
// Exit status: 0 pass, 1 input error, 2 solver convergence failure,
// 3 the command ran but its check did not pass.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "touchpoint/convex.hpp"
#include "touchpoint/errors.hpp"
#include "touchpoint/hilbert.hpp"

namespace touchpoint::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitConvergence = 2;
inline constexpr int kExitNotPassed = 3;

/// Problem-file error naming the offending field and, when known, its line.
class ParseError : public InputError {
 public:
  ParseError(const std::string& field, int line, const std::string& message);

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

struct SolverSettings {
  double tolerance = 1e-10;
  int max_iterations = 100000;
  /// nullopt means "auto".
  std::optional<double> gamma;
  std::uint64_t seed = 0;
};

struct ProblemSpec {
  Eigen::Index base_dimension = 0;
  std::vector<convex::ConvexSet> sets;
  SolverSettings solver;
  /// Optional square matrix on R^{N m} used by `touch` / `fixed-point`.
  std::optional<hilbert::Matrix> operator_matrix;
};

ProblemSpec parse_problem_text(const std::string& text);
ProblemSpec parse_problem(const std::filesystem::path& path);

/// Square matrix from `[[...], ...]` or `{"matrix": [[...], ...]}`.
hilbert::Matrix parse_matrix_text(const std::string& text);

struct Report {
  std::string command;
  std::string inputs_digest;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  std::map<std::string, double> residuals;
  std::map<std::string, double> thresholds;
  std::vector<std::string> notes;
  bool pass = false;
  int iterations = 0;
  double wall_time_ms = 0.0;

  nlohmann::ordered_json to_json() const;
};

/// Hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

/// Parses arguments, runs one command, writes the report to `out` (and --out),
/// diagnostics to `err`. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace touchpoint::cli
