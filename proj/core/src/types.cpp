#include "sonibot/types.hpp"

#include <utility>

namespace sonibot {
namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::string text = "invalid configuration:";
  for (const auto& issue : issues) {
    text += "\n  " + issue.field + ": " + issue.message;
  }
  return text;
}

}  // namespace

InvalidConfig::InvalidConfig(std::vector<ConfigIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

void throw_if_invalid(std::vector<ConfigIssue> issues) {
  if (!issues.empty()) throw InvalidConfig(std::move(issues));
}

}  // namespace sonibot
