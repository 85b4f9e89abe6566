#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "numeric/tape.hpp"
#include "numeric/tensor.hpp"

namespace princ {

// Projected vectors of one mini-batch with their prototype-store labels.
struct Batch {
  std::vector<ad::Var> vectors;
  std::vector<std::size_t> labels;

  std::size_t size() const { return vectors.size(); }
};

// Mean softmax cross-entropy over logits cos(v_i, c_k) / tau.
ad::Var loss_cls(const Batch& batch, std::span<const ad::Var> prototypes, double tau);

// Supervised contrastive loss over ordered positive pairs P = {(i, j): i != j, y_i == y_j}:
//   -(1/|P|) sum_P log( exp S(v_i, v_j) / sum_{k != i} exp S(v_i, v_k) )
// Zero when the batch has no positive pair.
ad::Var loss_ii(const Batch& batch);

// Instance-prototype contrastive loss:
//   -(1/(C T)) sum_j log( exp S(v_j, c_{y_j}) / sum_k exp S(v_j, c_k) )
ad::Var loss_is(const Batch& batch, std::span<const ad::Var> prototypes);

struct NamedVar {
  std::string name;
  ad::Var var;
};

// sum over reference names of ||current - reference||^2. Entries of current
// without a reference (novel prototypes) contribute nothing, and so do matrix
// rows past the end of a shorter reference (embedding rows phase 1 never trained).
ad::Var loss_l2_penalty(std::span<const NamedVar> current, const std::map<std::string, Tensor>& reference);

// -(1/N) sum_i p_i log q_i with q = softmax(q_logits / tau_kd).
ad::Var loss_kd(ad::Var q_logits, std::span<const double> p_soft, double tau_kd);

}  // namespace princ
