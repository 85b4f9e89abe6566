#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "numeric/rng.hpp"
#include "prototype/model.hpp"
#include "text/tokenizer.hpp"
#include "training/training.hpp"

namespace princ {

// Seen/novel partition of a labeled dataset. Pools hold dataset positions.
struct GfsidSplit {
  std::vector<std::string> seen;
  std::vector<std::string> novel;
  std::vector<std::size_t> seen_train;
  std::vector<std::size_t> seen_test;
  std::vector<std::size_t> novel_support;
  std::vector<std::size_t> novel_test;
  std::size_t shots = 0;
  std::uint64_t seed = 0;

  std::uint64_t fingerprint() const;
};

// Per seen intent: shuffle, hold out max(1, floor(0.2 n)) for test, train on
// the rest. Per novel intent: K supports without replacement, the rest is
// test. Seen intents are drawn first, so the seen partition does not depend
// on shots.
GfsidSplit make_split(std::span<const Utterance> data, std::span<const std::string> seen,
                      std::span<const std::string> novel, std::size_t shots, Rng& rng);

std::vector<Utterance> gather(std::span<const Utterance> data, std::span<const std::size_t> indices);

struct EpisodeSpec {
  std::size_t ways = 4;
  std::size_t shots = 1;
  std::size_t queries_per_class = 5;
  std::size_t episodes = 1000;
  bool novel_only = false;
};

void validate(const EpisodeSpec& spec);

struct Prediction {
  std::size_t truth = 0;
  std::size_t predicted = 0;
};

struct EvalReport {
  std::string mode;  // "noneps" or "eps"
  std::vector<std::string> intents;  // store order
  std::size_t seen_count = 0;
  std::vector<Prediction> predictions;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  double seen_accuracy = 0.0;
  double novel_accuracy = 0.0;
  std::size_t seen_total = 0;
  std::size_t novel_total = 0;
  std::vector<double> per_intent_accuracy;
  std::vector<std::size_t> per_intent_total;
  // Episodic only.
  std::size_t episodes = 0;
  double episode_mean = 0.0;
  double episode_stddev = 0.0;
  std::vector<double> episode_accuracy;
  std::uint64_t split_fingerprint = 0;
};

// Aggregates raw (truth, predicted) pairs into a report.
EvalReport score_predictions(std::string mode, std::vector<std::string> intents, std::size_t seen_count,
                             std::vector<Prediction> predictions);

// Classifies the given dataset positions against the full prototype store.
EvalReport evaluate_indices(const IntentModel& model, std::span<const Utterance> data,
                            std::span<const std::size_t> indices);

// One pass over seen_test + novel_test against every prototype.
EvalReport eval_nonepisodic(const IntentModel& model, std::span<const Utterance> data, const GfsidSplit& split);

// C-way K-shot episodes over the test pools with episode-local prototypes.
// Episode i draws from its own stream seeded by mix_seed(base, i), where base
// is taken from rng once.
EvalReport eval_episodic(const IntentModel& model, std::span<const Utterance> data, const GfsidSplit& split,
                         const EpisodeSpec& spec, Rng& rng);

struct ForgettingRow {
  Preservation mode = Preservation::none;
  double seen_accuracy = 0.0;
  double novel_accuracy = 0.0;
  double seen_delta = 0.0;   // vs none, accuracy points (x100)
  double novel_delta = 0.0;
};

std::vector<ForgettingRow> forgetting_diagnostics(const std::map<Preservation, EvalReport>& reports);

}  // namespace princ
