#include "losses/losses.hpp"

#include <cmath>

#include "numeric/error.hpp"

namespace princ {

namespace {

void check_batch(const Batch& batch, std::size_t num_prototypes) {
  require(batch.size() >= 1, "loss: empty batch");
  require(batch.vectors.size() == batch.labels.size(), "loss: vectors and labels differ in length");
  for (auto y : batch.labels) {
    if (y >= num_prototypes) {
      fail(ErrorCode::invalid_argument,
           "loss: label " + std::to_string(y) + " has no prototype (store size " + std::to_string(num_prototypes) + ")");
    }
  }
}

ad::Var zero_on(const Batch& batch) { return batch.vectors.front().tape->constant(Tensor::scalar(0.0)); }

std::vector<ad::Var> prototype_sims(ad::Var v, std::span<const ad::Var> prototypes) {
  std::vector<ad::Var> sims;
  sims.reserve(prototypes.size());
  for (const auto& c : prototypes) sims.push_back(ad::cosine(v, c));
  return sims;
}

}  // namespace

ad::Var loss_cls(const Batch& batch, std::span<const ad::Var> prototypes, double tau) {
  require(tau > 0.0, "loss_cls: tau must be positive");
  require(!prototypes.empty(), "loss_cls: empty prototype store");
  check_batch(batch, prototypes.size());
  std::vector<ad::Var> terms;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto sims = prototype_sims(batch.vectors[i], prototypes);
    terms.push_back(ad::cross_entropy(ad::scale(ad::stack(sims), 1.0 / tau), batch.labels[i]));
  }
  return ad::scale(ad::sum(terms), 1.0 / static_cast<double>(batch.size()));
}

ad::Var loss_ii(const Batch& batch) {
  require(batch.size() >= 2, "loss_ii: needs at least 2 instances, got " + std::to_string(batch.size()));
  require(batch.vectors.size() == batch.labels.size(), "loss_ii: vectors and labels differ in length");
  const std::size_t n = batch.size();

  // One cosine per unordered pair, shared by both orderings.
  std::vector<std::vector<ad::Var>> sim(n, std::vector<ad::Var>(n));
  bool any_positive = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) any_positive = any_positive || batch.labels[i] == batch.labels[j];
  }
  if (!any_positive) return zero_on(batch);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sim[i][j] = sim[j][i] = ad::cosine(batch.vectors[i], batch.vectors[j]);
    }
  }

  std::vector<ad::Var> terms;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ad::Var> row;
    std::vector<std::size_t> positives;  // positions within row
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      if (batch.labels[k] == batch.labels[i]) positives.push_back(row.size());
      row.push_back(sim[i][k]);
    }
    if (positives.empty()) continue;
    const auto logits = ad::stack(row);
    for (auto p : positives) terms.push_back(ad::cross_entropy(logits, p));
  }
  return ad::scale(ad::sum(terms), 1.0 / static_cast<double>(terms.size()));
}

ad::Var loss_is(const Batch& batch, std::span<const ad::Var> prototypes) {
  require(!prototypes.empty(), "loss_is: empty prototype store");
  check_batch(batch, prototypes.size());
  std::vector<ad::Var> terms;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto sims = prototype_sims(batch.vectors[j], prototypes);
    terms.push_back(ad::cross_entropy(ad::stack(sims), batch.labels[j]));
  }
  const double norm = static_cast<double>(prototypes.size()) * static_cast<double>(batch.size());
  return ad::scale(ad::sum(terms), 1.0 / norm);
}

ad::Var loss_l2_penalty(std::span<const NamedVar> current, const std::map<std::string, Tensor>& reference) {
  require(!current.empty(), "loss_l2_penalty: no parameters");
  std::vector<ad::Var> terms;
  std::size_t covered = 0;
  for (const auto& nv : current) {
    auto it = reference.find(nv.name);
    if (it == reference.end()) continue;
    const auto& value = nv.var.value();
    const auto& ref = it->second;
    const bool leading_rows =
        value.rank() == 2 && ref.rank() == 2 && ref.cols() == value.cols() && ref.rows() <= value.rows();
    if (!value.same_shape(ref) && !leading_rows) {
      fail(ErrorCode::dimension_mismatch, "loss_l2_penalty: '" + nv.name + "' is " + shape_string(nv.var.value().dims()) +
                                              " but snapshot holds " + shape_string(it->second.dims()));
    }
    terms.push_back(ad::squared_distance(nv.var, it->second));
    ++covered;
  }
  if (covered != reference.size()) {
    fail(ErrorCode::state, "loss_l2_penalty: " + std::to_string(reference.size() - covered) +
                               " snapshot parameter(s) missing from the live model");
  }
  return ad::sum(terms);
}

ad::Var loss_kd(ad::Var q_logits, std::span<const double> p_soft, double tau_kd) {
  require(tau_kd > 0.0, "loss_kd: tau_kd must be positive");
  const auto n = q_logits.value().size();
  require(n >= 1, "loss_kd: empty logits");
  if (p_soft.size() != n) {
    fail(ErrorCode::dimension_mismatch, "loss_kd: " + std::to_string(p_soft.size()) + " soft labels for " +
                                            std::to_string(n) + " logits");
  }
  double mass = 0.0;
  for (double p : p_soft) {
    require(p >= 0.0 && std::isfinite(p), "loss_kd: soft label entries must be finite and non-negative");
    mass += p;
  }
  require(std::abs(mass - 1.0) <= 1e-9, "loss_kd: soft labels must sum to 1");
  const auto ce = ad::soft_cross_entropy(ad::scale(q_logits, 1.0 / tau_kd), p_soft);
  return ad::scale(ce, 1.0 / static_cast<double>(n));
}

}  // namespace princ
