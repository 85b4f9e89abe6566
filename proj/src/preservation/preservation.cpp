#include "preservation/preservation.hpp"

#include <cmath>

#include "numeric/error.hpp"
#include "numeric/ops.hpp"

namespace princ {

ParameterSnapshot take_snapshot(const IntentModel& model, std::size_t trained_rows) {
  std::map<std::string, Tensor> tensors;
  for (const auto& p : model.params.items()) {
    if (p.name == param_names::kEmbedding && trained_rows < p.value.rows()) {
      const auto cols = p.value.cols();
      const auto data = p.value.data().first(trained_rows * cols);
      tensors.emplace(p.name, Tensor({trained_rows, cols}, std::vector<double>(data.begin(), data.end())));
    } else {
      tensors.emplace(p.name, p.value);
    }
  }
  for (const auto& e : model.prototypes.entries()) {
    if (e.stage == Stage::seen) tensors.emplace(e.param.name, e.param.value);
  }
  return ParameterSnapshot(std::move(tensors));
}

ReplayMemory build_memory(std::span<const Utterance> seen_data, double ratio, Rng& rng) {
  require(!seen_data.empty(), "build_memory: no seen data");
  require(ratio > 0.0 && ratio <= 1.0, "build_memory: ratio must be in (0, 1], got " + std::to_string(ratio));

  const auto n = seen_data.size();
  const auto capacity = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio * double(n))));

  // Group indices by intent in first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_intent;
  for (std::size_t i = 0; i < n; ++i) {
    auto& bucket = by_intent[seen_data[i].label];
    if (bucket.empty()) order.push_back(seen_data[i].label);
    bucket.push_back(i);
  }

  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  for (const auto& intent : order) {
    const auto& bucket = by_intent[intent];
    const auto quota = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio * double(bucket.size()))));
    for (auto k : rng.sample_without_replacement(bucket.size(), quota)) {
      chosen.push_back(bucket[k]);
      taken[bucket[k]] = true;
    }
  }

  if (chosen.size() > capacity) {
    std::vector<std::size_t> kept;
    for (auto k : rng.sample_without_replacement(chosen.size(), capacity)) kept.push_back(chosen[k]);
    chosen = std::move(kept);
  } else if (chosen.size() < capacity) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) rest.push_back(i);
    }
    for (auto k : rng.sample_without_replacement(rest.size(), capacity - chosen.size())) chosen.push_back(rest[k]);
  }

  ReplayMemory mem;
  mem.capacity = capacity;
  for (auto i : chosen) mem.items.push_back(seen_data[i]);
  return mem;
}

void compute_soft_labels(ReplayMemory& memory, const IntentModel& frozen, double tau_kd) {
  require(tau_kd > 0.0, "compute_soft_labels: tau_kd must be positive");
  const auto& store = frozen.prototypes;
  const auto n_seen = store.seen_count();
  require(n_seen >= 1, "compute_soft_labels: model has no seen prototypes");
  memory.soft_labels.clear();
  for (const auto& u : memory.items) {
    const auto label = store.index_of(u.label);
    if (label == kNoIndex || store[label].stage != Stage::seen) {
      fail(ErrorCode::state, "replay memory holds '" + u.label + "', which is not a seen intent");
    }
    const Tensor v = embed(frozen, u);
    std::vector<double> logits;
    for (std::size_t k = 0; k < n_seen; ++k) logits.push_back(cosine_sim(v, store[k].param.value) / tau_kd);
    memory.soft_labels.push_back(softmax(logits));
  }
}

}  // namespace princ
