#pragma once

#include <string>
#include <vector>

namespace dn {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Property suites wired to the CLI `check` command and the acceptance
// runner. `samples` scales the main sampling loop where a suite has one;
// every tolerance is fixed in the implementation.
std::vector<std::string> check_suite_names();  // excludes "training"

CheckResult run_check(const std::string& name, uint64_t seed, int samples);

// Desk-scale training checks (slow): isotropic and anisotropic runs plus the
// explicit/LiNN mode-agreement bound. work_dir holds datasets and outputs.
std::vector<CheckResult> run_training_checks(const std::string& work_dir,
                                             uint64_t seed);

}  // namespace dn
