#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "data_io/checkpoint.hpp"
#include "data_io/dataset.hpp"
#include "evaluation/evaluation.hpp"
#include "preservation/preservation.hpp"
#include "training/training.hpp"
#include <json.hpp>

namespace princ {

// Provenance echoed into every checkpoint so later phases can rebuild the
// same split from the same dataset.
struct RunInfo {
  int phase = 1;
  TrainConfig train;
  std::string data_path;
  std::string manifest_path;
  std::string embeddings_path;
  std::vector<std::string> seen;
  std::vector<std::string> novel;
  std::uint64_t split_seed = 0;
  std::size_t k_shot = 0;  // 0 before phase 2
  // Leading vocab ids drawn from the phase-1 training corpus.
  std::size_t trained_vocab = 0;
};

nlohmann::json to_json(const RunInfo& info);
RunInfo run_info_from_json(const nlohmann::json& j);

GfsidSplit split_for(const Dataset& ds, std::uint64_t split_seed, std::size_t shots);

// Tokens of the phase-1 training pool take the leading ids; every other token
// of the dataset file follows, so novel vocabulary is not collapsed to [UNK].
Vocab build_vocab(const Dataset& ds, const GfsidSplit& split);

struct Phase1Run {
  IntentModel model;
  TrainReport report;
  GfsidSplit split;
  RunInfo info;
};

// Trains on the seen-train pool of split_for(ds, split_seed, 1).
Phase1Run train_phase1(const Dataset& ds, const TrainConfig& cfg, std::uint64_t split_seed,
                       std::shared_ptr<const EmbeddingTable> embeddings = nullptr);

// Novel supports from the split plus `shots` utterances per seen intent drawn
// from the seen-train pool.
std::vector<Utterance> joint_support(const Dataset& ds, const GfsidSplit& split, Rng& rng);

struct Phase2Run {
  IntentModel model;
  TrainReport report;
  GfsidSplit split;
  std::optional<ParameterSnapshot> snapshot;
  std::optional<ReplayMemory> memory;
  RunInfo info;
};

// Phase-2 stream is seeded with mix_seed(cfg.seed, 2); the DAKP snapshot or
// DDKP memory is prepared from the phase-1 model before fine-tuning.
Phase2Run train_phase2(const Dataset& ds, const IntentModel& phase1, const RunInfo& phase1_info,
                       const TrainConfig& cfg, std::size_t shots);

// Seen-test accuracy of a model holding seen prototypes only.
EvalReport eval_seen_only(const IntentModel& model, const Dataset& ds, const GfsidSplit& split);

Checkpoint to_checkpoint(const IntentModel& model, const RunInfo& info,
                         const std::optional<ParameterSnapshot>& snapshot = std::nullopt,
                         const std::optional<ReplayMemory>& memory = std::nullopt);

}  // namespace princ
