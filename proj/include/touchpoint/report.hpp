#pragma once

#include <map>
#include <string>
#include <vector>

namespace touchpoint {

/// Named residual compared against a pass threshold.
struct Check {
  std::string name;
  double value;
  double threshold;
  bool passed;
};

/// Collection of residual checks plus free-form notes. Passes iff every check passes.
class VerificationReport {
 public:
  /// Records `value <= threshold`. NaN never passes.
  void add(std::string name, double value, double threshold);
  void note(std::string text) { notes_.push_back(std::move(text)); }
  /// Informational quantity that carries no pass/fail decision.
  void record(const std::string& name, double value) { values_[name] = value; }

  bool passed() const noexcept;
  const std::vector<Check>& checks() const noexcept { return checks_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }
  const std::map<std::string, double>& values() const noexcept { return values_; }
  /// Check by name, or nullptr.
  const Check* find(const std::string& name) const noexcept;

 private:
  std::vector<Check> checks_;
  std::vector<std::string> notes_;
  std::map<std::string, double> values_;
};

}  // namespace touchpoint
