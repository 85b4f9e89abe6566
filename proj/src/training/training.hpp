#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "numeric/rng.hpp"
#include "preservation/preservation.hpp"
#include "prototype/model.hpp"
#include "text/encoder.hpp"
#include "text/tokenizer.hpp"

namespace princ {

enum class Preservation : std::uint8_t { none = 0, dakp = 1, ddkp = 2 };

const char* to_string(Preservation p);
Preservation parse_preservation(const std::string& s);

struct TrainConfig {
  double phase1_lr = 1e-2;
  double phase2_lr = 1e-2;
  std::size_t phase1_epochs = 50;
  std::size_t phase2_epochs = 20;
  std::size_t batch_size = 64;        // phase 1
  std::size_t phase2_batch_size = 5;  // joint few-shot batches
  double lambda = 1.0;
  Preservation preservation = Preservation::none;
  double memory_ratio = 0.1;
  double tau = 0.1;
  double tau_kd = 1.0;
  std::uint64_t seed = 0;
  EncoderConfig encoder;
  std::size_t prototype_dim = 32;

  // Learning rates sized for the from-scratch desk encoder.
  static TrainConfig desk() { return {}; }
  // Learning rates and batch sizes reported for a pretrained encoder.
  static TrainConfig paper();
};

void validate(const TrainConfig& cfg);

struct EpochRecord {
  int phase = 1;
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double cls = 0.0;
  double ii = 0.0;
  double is = 0.0;
  double kd = 0.0;
  double l2 = 0.0;  // lambda-weighted
  double total = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::uint64_t checksum = 0;
  double wall_seconds = 0.0;  // informational; excluded from record files
};

struct TrainedModel {
  IntentModel model;
  TrainReport report;
};

// One training example; soft_label is set for replay items only.
struct TrainItem {
  const Utterance* utterance = nullptr;
  const std::vector<double>* soft_label = nullptr;
};

struct Objective {
  ad::Var total;
  double cls = 0.0;
  double ii = 0.0;
  double is = 0.0;
  double kd = 0.0;
  double l2 = 0.0;  // lambda-weighted
};

// L_cls + L_ii + L_is, plus lambda * L2 against snapshot (when given) and
// the mean L_KD over items carrying a soft label.
Objective build_objective(const ModelBinding& bound, const PrototypeStore& store, std::span<const TrainItem> items,
                          const TrainConfig& cfg, const ParameterSnapshot* snapshot);

// Batch boundaries over n items; a trailing singleton joins the previous batch
// so every batch holds at least two instances.
std::vector<std::pair<std::size_t, std::size_t>> make_batches(std::size_t n, std::size_t batch_size);

// Phase 1: seen intents only, minimizing L_cls + L_ii + L_is. Intents are
// ordered by first appearance in data.
TrainedModel run_phase1(std::span<const Utterance> data, const Vocab& vocab, const TrainConfig& cfg, Rng& rng,
                        std::shared_ptr<const EmbeddingTable> embeddings = nullptr);

// Phase 2: appends novel prototypes (mean of projected supports) and
// fine-tunes everything on the joint few-shot supports under cfg.preservation.
TrainedModel run_phase2(std::span<const Utterance> joint_support, const IntentModel& phase1, const TrainConfig& cfg,
                        Rng& rng, const ParameterSnapshot* snapshot = nullptr, const ReplayMemory* memory = nullptr);

}  // namespace princ
