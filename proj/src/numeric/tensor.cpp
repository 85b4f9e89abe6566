#include "numeric/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

#include "numeric/error.hpp"

namespace princ {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

void check_dims(const std::vector<std::size_t>& dims) {
  for (auto d : dims) {
    if (d == 0) fail(ErrorCode::dimension_mismatch, "tensor dims must be positive, got " + shape_string(dims));
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(product(dims_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (product(dims_) != data_.size()) {
    fail(ErrorCode::dimension_mismatch,
         "tensor of shape " + shape_string(dims_) + " cannot hold " +
             std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::vector(std::vector<double> data) {
  const auto n = data.size();
  return Tensor({n}, std::move(data));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) fail(ErrorCode::dimension_mismatch, "rows() on tensor of shape " + shape_string(dims_));
  return dims_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) fail(ErrorCode::dimension_mismatch, "cols() on tensor of shape " + shape_string(dims_));
  return dims_[1];
}

double Tensor::item() const {
  if (data_.size() != 1) fail(ErrorCode::dimension_mismatch, "item() on tensor of shape " + shape_string(dims_));
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::identical(const Tensor& other) const {
  if (dims_ != other.dims_) return false;
  return data_.empty() ||
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

std::string shape_string(const std::vector<std::size_t>& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << 'x';
    os << dims[i];
  }
  os << ']';
  return os.str();
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Param::Param(std::string n, Tensor v)
    : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros_like(value)) {}

Param& ModelParams::add(std::string name, Tensor value) {
  if (contains(name)) fail(ErrorCode::invalid_argument, "duplicate parameter name '" + name + "'");
  params_.emplace_back(std::move(name), std::move(value));
  return params_.back();
}

Param* ModelParams::find(const std::string& name) {
  auto it = std::find_if(params_.begin(), params_.end(),
                         [&](const Param& p) { return p.name == name; });
  return it == params_.end() ? nullptr : &*it;
}

const Param* ModelParams::find(const std::string& name) const {
  return const_cast<ModelParams*>(this)->find(name);
}

Param& ModelParams::get(const std::string& name) {
  auto* p = find(name);
  if (!p) fail(ErrorCode::state, "no parameter named '" + name + "'");
  return *p;
}

const Param& ModelParams::get(const std::string& name) const {
  return const_cast<ModelParams*>(this)->get(name);
}

void ModelParams::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

std::uint64_t checksum(std::span<const Param* const> params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Param* p : params) {
    mix(p->name.data(), p->name.size());
    for (auto d : p->value.dims()) {
      const std::uint64_t d64 = d;
      mix(&d64, sizeof d64);
    }
    const auto data = p->value.data();
    mix(data.data(), data.size_bytes());
  }
  return h;
}

}  // namespace princ
