#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "numeric/rng.hpp"
#include "numeric/tensor.hpp"
#include "prototype/model.hpp"
#include "text/tokenizer.hpp"

namespace princ {

// Frozen copy of the phase-1 encoder, projection and seen prototypes.
inline constexpr std::size_t kAllRows = static_cast<std::size_t>(-1);

class ParameterSnapshot {
 public:
  ParameterSnapshot() = default;
  explicit ParameterSnapshot(std::map<std::string, Tensor> tensors) : tensors_(std::move(tensors)) {}

  const std::map<std::string, Tensor>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }

 private:
  std::map<std::string, Tensor> tensors_;
};

// trained_rows keeps only the leading embedding rows (tokens of the phase-1
// training corpus); the remaining rows were never trained and stay free.
ParameterSnapshot take_snapshot(const IntentModel& model, std::size_t trained_rows = kAllRows);

struct ReplayMemory {
  std::vector<Utterance> items;
  std::size_t capacity = 0;
  // One distribution over the seen intents per item; empty until computed.
  std::vector<std::vector<double>> soft_labels;

  std::size_t size() const { return items.size(); }
  bool has_soft_labels() const { return !items.empty() && soft_labels.size() == items.size(); }
};

// Class-stratified sample of max(1, floor(ratio * |data|)) utterances.
// Per-intent quota max(1, floor(ratio * count)); overshoot is trimmed
// uniformly at random and any shortfall is topped up uniformly from the rest.
ReplayMemory build_memory(std::span<const Utterance> seen_data, double ratio, Rng& rng);

// Fills soft labels: softmax over cosine similarities to the seen prototypes
// divided by tau_kd, computed once with the frozen phase-1 model.
void compute_soft_labels(ReplayMemory& memory, const IntentModel& frozen, double tau_kd);

}  // namespace princ
