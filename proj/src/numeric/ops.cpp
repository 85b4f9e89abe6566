#include "numeric/ops.hpp"

#include <algorithm>
#include <cmath>

#include "numeric/error.hpp"

namespace princ {

Tensor matvec(const Tensor& m, const Tensor& v) {
  if (m.rank() != 2 || v.rank() != 1 || m.cols() != v.size()) {
    fail(ErrorCode::dimension_mismatch,
         "matvec: matrix " + shape_string(m.dims()) + " vs vector " + shape_string(v.dims()));
  }
  const auto r = m.rows(), c = m.cols();
  Tensor out({r});
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += m.at(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::dimension_mismatch,
         "dot: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size()) {
    fail(ErrorCode::dimension_mismatch,
         "cosine_sim: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na <= kEpsilonNorm || nb <= kEpsilonNorm) {
    fail(ErrorCode::degenerate_vector, "cosine_sim: degenerate vector (norm below 1e-12)");
  }
  const double s = dot(a, b) / (na * nb);
  return std::clamp(s, -1.0, 1.0);
}

double cosine_sim(const Tensor& a, const Tensor& b) {
  return cosine_sim(a.data(), b.data());
}

std::vector<double> log_softmax(std::span<const double> logits) {
  require(!logits.empty(), "softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double x : logits) z += std::exp(x - mx);
  const double lz = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), "softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    z += out[i];
  }
  for (double& x : out) x /= z;
  return out;
}

Tensor softmax(const Tensor& logits) {
  return Tensor(logits.dims(), softmax(logits.data()));
}

}  // namespace princ
