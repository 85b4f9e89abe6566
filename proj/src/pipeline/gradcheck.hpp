#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace princ {

struct GradcheckOptions {
  double step = 1e-5;
  std::size_t dims = 8;  // fixtures draw every dimension from [2, dims]
  std::uint64_t seed = 0;
  std::size_t fixtures = 20;
  double rel_tol = 1e-3;
  double abs_tol = 1e-8;
  double rel_floor = 1e-6;
  // Name of a check whose analytic gradient is perturbed before comparison.
  std::string corrupt;
};

struct GradcheckResult {
  std::string name;
  std::size_t fixtures = 0;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

// cls, ii, is, l2, kd, encode, project
const std::vector<std::string>& gradcheck_names();

std::vector<GradcheckResult> run_gradcheck(const GradcheckOptions& opts);

std::string format_gradcheck(const std::vector<GradcheckResult>& results);

}  // namespace princ
