#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "numeric/tensor.hpp"

namespace princ {

using ScalarFn = std::function<double()>;

// Central-difference gradient of f with respect to every entry of params:
// (f(p + h) - f(p - h)) / 2h. f must read the current param values; each
// entry is restored bitwise after probing.
std::vector<Tensor> finite_diff_grad(const ScalarFn& f, std::span<Param* const> params, double step);

struct GradComparison {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries = 0;
  bool passed = true;
};

// Elementwise comparison. Entries with max(|a|, |n|) >= rel_floor must satisfy
// |a - n| / max(|a|, |n|) < rel_tol; smaller ones sit at the finite-difference
// roundoff floor and must satisfy |a - n| <= abs_tol instead. max_rel_error
// covers the first group only.
GradComparison compare_gradients(std::span<const Tensor> analytic, std::span<const Tensor> numeric,
                                 double rel_tol = 1e-3, double abs_tol = 1e-8, double rel_floor = 1e-6);

}  // namespace princ
