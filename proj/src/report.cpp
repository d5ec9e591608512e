#include "touchpoint/report.hpp"

#include <algorithm>

namespace touchpoint {

void VerificationReport::add(std::string name, double value, double threshold) {
  const bool ok = value <= threshold;
  checks_.push_back(Check{std::move(name), value, threshold, ok});
}

bool VerificationReport::passed() const noexcept {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
}

const Check* VerificationReport::find(const std::string& name) const noexcept {
  auto it = std::find_if(checks_.begin(), checks_.end(), [&](const Check& c) { return c.name == name; });
  return it == checks_.end() ? nullptr : &*it;
}

}  // namespace touchpoint
