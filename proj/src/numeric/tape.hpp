#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "numeric/tensor.hpp"

namespace princ::ad {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  double item() const { return value().item(); }
};

// Append-only reverse-mode tape. Nodes are recorded in evaluation order, so a
// reverse sweep visits every node after all of its consumers.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Var constant(Tensor value);
  // Leaf whose gradient is accumulated into p.grad on backward().
  Var param(Param& p);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  Tensor& grad(std::size_t id) { return nodes_[id].grad; }
  bool live(std::size_t id) const { return nodes_[id].live; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and propagates to every live ancestor.
  void backward(Var root);

  Var record(Tensor value, bool live, Backward backward);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
    bool live = false;
  };
  std::vector<Node> nodes_;
};

Var add(Var a, Var b);
Var scale(Var a, double s);
Var tanh(Var a);
Var matvec(Var m, Var x);
// Mean of the selected rows of a [V x E] table.
Var mean_rows(Var table, std::span<const std::size_t> rows);
// Cosine similarity of two equal-length vectors; rejects degenerate inputs.
Var cosine(Var a, Var b);
// Gathers scalars into a vector.
Var stack(std::span<const Var> scalars);
// Sum of scalars.
Var sum(std::span<const Var> scalars);
// -log softmax(logits)[target]
Var cross_entropy(Var logits, std::size_t target);
// -sum_i p_i log softmax(logits)_i
Var soft_cross_entropy(Var logits, std::span<const double> p);
// ||a - target||^2 with target held constant. A matrix target may hold fewer
// rows than a; only the leading rows are compared.
Var squared_distance(Var a, const Tensor& target);

}  // namespace princ::ad
