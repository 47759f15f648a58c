#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sonibot {

/// Opaque identifier of one perceived body track. A person who leaves the
/// field of view and comes back is a different UserId.
enum class UserId : std::uint32_t {};

constexpr std::uint32_t to_underlying(UserId id) noexcept {
  return static_cast<std::uint32_t>(id);
}

/// Time went backwards for a quantity that requires monotonic timestamps.
class ClockRegression : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One violated config invariant, addressed by dotted field path.
struct ConfigIssue {
  std::string field;
  std::string message;
};

class InvalidConfig : public std::runtime_error {
 public:
  explicit InvalidConfig(std::vector<ConfigIssue> issues);

  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// Throws InvalidConfig when issues is non-empty.
void throw_if_invalid(std::vector<ConfigIssue> issues);

}  // namespace sonibot
