#include "numeric/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "numeric/error.hpp"

namespace princ {

std::vector<Tensor> finite_diff_grad(const ScalarFn& f, std::span<Param* const> params, double step) {
  require(step > 0.0, "finite_diff_grad: step must be positive");
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (Param* p : params) {
    Tensor g = Tensor::zeros_like(p->value);
    auto values = p->value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = f();
      values[i] = saved - step;
      const double down = f();
      values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        fail(ErrorCode::invalid_argument, "finite_diff_grad: non-finite evaluation at " + p->name + "[" + std::to_string(i) + "]");
      }
      g[i] = (up - down) / (2.0 * step);
    }
    out.push_back(std::move(g));
  }
  return out;
}

GradComparison compare_gradients(std::span<const Tensor> analytic, std::span<const Tensor> numeric,
                                 double rel_tol, double abs_tol, double rel_floor) {
  if (analytic.size() != numeric.size()) {
    fail(ErrorCode::dimension_mismatch, "compare_gradients: tensor counts differ");
  }
  GradComparison cmp;
  for (std::size_t t = 0; t < analytic.size(); ++t) {
    if (!analytic[t].same_shape(numeric[t])) {
      fail(ErrorCode::dimension_mismatch, "compare_gradients: shapes " + shape_string(analytic[t].dims()) +
                                              " and " + shape_string(numeric[t].dims()));
    }
    for (std::size_t i = 0; i < analytic[t].size(); ++i) {
      const double a = analytic[t][i], n = numeric[t][i];
      const double diff = std::abs(a - n);
      const double mag = std::max(std::abs(a), std::abs(n));
      ++cmp.entries;
      cmp.max_abs_error = std::max(cmp.max_abs_error, diff);
      if (!std::isfinite(a) || !std::isfinite(n)) {
        cmp.passed = false;
        continue;
      }
      if (mag < rel_floor) {
        if (diff > abs_tol) cmp.passed = false;
        continue;
      }
      const double rel = diff / mag;
      cmp.max_rel_error = std::max(cmp.max_rel_error, rel);
      if (rel >= rel_tol) cmp.passed = false;
    }
  }
  return cmp;
}

}  // namespace princ
