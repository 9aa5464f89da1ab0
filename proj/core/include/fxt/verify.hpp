#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fxt {

enum class VerifyScope { kAll, kProblems, kFlows, kBounds, kExperiments };

std::string_view to_string(VerifyScope scope);
std::optional<VerifyScope> parse_verify_scope(std::string_view label);

struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;

  [[nodiscard]] bool ok() const noexcept { return failed == 0; }
};

/// Property suites behind `fxt verify`: oracle checks on the catalog, flow
/// identities, bound arithmetic, and dominance on the canonical experiments.
std::vector<SuiteResult> run_verification(VerifyScope scope);

}  // namespace fxt
