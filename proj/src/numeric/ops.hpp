#pragma once

#include <span>
#include <vector>

#include "numeric/tensor.hpp"

namespace princ {

// Vectors whose norm falls below this are rejected as degenerate.
inline constexpr double kEpsilonNorm = 1e-12;

Tensor matvec(const Tensor& m, const Tensor& v);
double dot(std::span<const double> a, std::span<const double> b);
double cosine_sim(std::span<const double> a, std::span<const double> b);
double cosine_sim(const Tensor& a, const Tensor& b);

// Max-subtracted softmax / log-softmax.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
Tensor softmax(const Tensor& logits);

}  // namespace princ
