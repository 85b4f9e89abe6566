#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace princ {

// Dense row-major tensor of doubles. Rank 0 is a scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);
  Tensor(std::vector<std::size_t> dims, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> data);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.dims_); }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  double item() const;
  void fill(double v);
  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }

  // Bitwise equality of dims and payload.
  bool identical(const Tensor& other) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t>& dims);
double l2_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

// Trainable parameter: value plus an accumulator of the same shape.
struct Param {
  Param() = default;
  Param(std::string name, Tensor value);

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0); }
};

// Ordered collection of uniquely named parameters.
class ModelParams {
 public:
  Param& add(std::string name, Tensor value);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }

  std::vector<Param>& items() { return params_; }
  const std::vector<Param>& items() const { return params_; }
  std::size_t size() const { return params_.size(); }

  void zero_grad();

 private:
  std::vector<Param> params_;
};

// FNV-1a over the raw bytes of names, dims and payloads.
std::uint64_t checksum(std::span<const Param* const> params);

}  // namespace princ
