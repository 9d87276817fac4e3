#pragma once

#include <stdexcept>
#include <string>

namespace fg {

// Error carrying a machine-checkable rule name, e.g. "shape.action" or
// "spec.mass_range". `line` is set for file-backed validation (0 otherwise).
struct ValidationError : std::runtime_error {
  ValidationError(std::string rule_, const std::string& msg, size_t line_ = 0)
      : std::runtime_error(msg), rule(std::move(rule_)), line(line_) {}
  std::string rule;
  size_t line;
};

}  // namespace fg
