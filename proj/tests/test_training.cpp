#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "data_io/dataset.hpp"
#include "numeric/rng.hpp"
#include "pipeline/workflow.hpp"
#include "preservation/preservation.hpp"
#include "training/training.hpp"
#include "test_support.hpp"

using namespace princ;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.phase1_epochs = 8;
  cfg.phase2_epochs = 5;
  cfg.encoder = EncoderConfig{8, 16};
  cfg.prototype_dim = 8;
  cfg.seed = 3;
  return cfg;
}

Dataset small_dataset(std::uint64_t seed = 1) {
  Rng rng(seed);
  return generate_synthetic(4, 2, 20, rng);
}

std::uint64_t model_checksum(const IntentModel& m) {
  const auto ps = m.all_params();
  return checksum(ps);
}

void expect_same_report(const TrainReport& a, const TrainReport& b) {
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    EXPECT_EQ(a.epochs[i].total, b.epochs[i].total);
    EXPECT_EQ(a.epochs[i].cls, b.epochs[i].cls);
    EXPECT_EQ(a.epochs[i].steps, b.epochs[i].steps);
  }
  EXPECT_EQ(a.checksum, b.checksum);
}

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.phase1_epochs = 0;
  EXPECT_PRINC_ERROR(validate(cfg), ErrorCode::invalid_argument);
  cfg = {};
  cfg.batch_size = 1;
  EXPECT_PRINC_ERROR(validate(cfg), ErrorCode::invalid_argument);
  cfg = {};
  cfg.lambda = -1;
  EXPECT_PRINC_ERROR(validate(cfg), ErrorCode::invalid_argument);
  cfg = {};
  cfg.phase2_lr = 0;
  EXPECT_PRINC_ERROR(validate(cfg), ErrorCode::invalid_argument);
}

TEST(TrainConfig, Presets) {
  const TrainConfig paper = TrainConfig::paper();
  EXPECT_EQ(paper.phase1_lr, 1e-5);
  EXPECT_EQ(paper.phase2_lr, 1e-4);
  EXPECT_EQ(TrainConfig::desk().phase1_lr, 1e-2);
}

TEST(Batches, TrailingSingletonJoinsPrevious) {
  const auto b = make_batches(9, 4);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].first, 0u);
  EXPECT_EQ(b[0].second, 4u);
  EXPECT_EQ(b[1].first, 4u);
  EXPECT_EQ(b[1].second, 9u);
  EXPECT_EQ(make_batches(8, 4).size(), 2u);
}

TEST(Phase1, RejectsDegenerateData) {
  const TrainConfig cfg = small_config();
  Rng rng(1);
  const std::vector<Utterance> one_intent{{"a b", "x", 0}, {"b c", "x", 1}};
  const Vocab v = Vocab::build(one_intent);
  EXPECT_PRINC_ERROR(run_phase1(one_intent, v, cfg, rng), ErrorCode::invalid_argument);
  const std::vector<Utterance> empty;
  EXPECT_PRINC_ERROR(run_phase1(empty, v, cfg, rng), ErrorCode::invalid_argument);
}

TEST(Phase1, DeterministicAndComponentsSum) {
  const Dataset ds = small_dataset();
  const TrainConfig cfg = small_config();
  const Phase1Run a = train_phase1(ds, cfg, 7);
  const Phase1Run b = train_phase1(ds, cfg, 7);
  expect_same_report(a.report, b.report);
  EXPECT_EQ(model_checksum(a.model), model_checksum(b.model));
  ASSERT_EQ(a.report.epochs.size(), cfg.phase1_epochs);
  for (const auto& e : a.report.epochs) {
    EXPECT_EQ(e.phase, 1);
    EXPECT_NEAR(e.total, e.cls + e.ii + e.is + e.kd + e.l2, 1e-9);
    EXPECT_EQ(e.kd, 0.0);
    EXPECT_EQ(e.l2, 0.0);
  }
}

TEST(Phase1, LossMostlyNonIncreasing) {
  Rng rng(1);
  const Dataset ds = generate_synthetic(8, 4, 50, rng);
  TrainConfig cfg;
  cfg.seed = 1;
  const Phase1Run run = train_phase1(ds, cfg, 1);
  std::size_t down = 0;
  const auto& ep = run.report.epochs;
  for (std::size_t i = 1; i < ep.size(); ++i) down += ep[i].total <= ep[i - 1].total ? 1 : 0;
  EXPECT_GE(static_cast<double>(down), 0.8 * static_cast<double>(ep.size() - 1));
}

class Phase2Fixture : public ::testing::Test {
 protected:
  void SetUp() override {
    ds = small_dataset(2);
    cfg = small_config();
    phase1 = std::make_unique<Phase1Run>(train_phase1(ds, cfg, 5));
    split = split_for(ds, 5, 2);
    Rng rng(77);
    support = joint_support(ds, split, rng);
  }

  TrainedModel phase2(TrainConfig c, const ParameterSnapshot* snap = nullptr, const ReplayMemory* mem = nullptr) {
    Rng rng(123);
    return run_phase2(support, phase1->model, c, rng, snap, mem);
  }

  Dataset ds;
  TrainConfig cfg;
  std::unique_ptr<Phase1Run> phase1;
  GfsidSplit split;
  std::vector<Utterance> support;
};

TEST_F(Phase2Fixture, StoreHoldsSeenThenNovel) {
  const TrainedModel out = phase2(cfg);
  EXPECT_EQ(out.model.prototypes.seen_count(), ds.seen.size());
  EXPECT_EQ(out.model.prototypes.novel_count(), ds.novel.size());
  EXPECT_NO_THROW(out.model.prototypes.check_invariants());
  ASSERT_EQ(out.report.epochs.size(), cfg.phase2_epochs);
  for (const auto& e : out.report.epochs) EXPECT_NEAR(e.total, e.cls + e.ii + e.is + e.kd + e.l2, 1e-9);
}

TEST_F(Phase2Fixture, MissingPreservationStateRejected) {
  TrainConfig c = cfg;
  c.preservation = Preservation::dakp;
  EXPECT_PRINC_ERROR(phase2(c), ErrorCode::state);
  c.preservation = Preservation::ddkp;
  EXPECT_PRINC_ERROR(phase2(c), ErrorCode::state);
  ReplayMemory unlabeled;
  unlabeled.items.push_back(support.front());
  EXPECT_PRINC_ERROR(phase2(c, nullptr, &unlabeled), ErrorCode::state);
}

TEST_F(Phase2Fixture, ZeroLambdaMatchesNone) {
  const ParameterSnapshot snap = take_snapshot(phase1->model);
  TrainConfig dakp = cfg;
  dakp.preservation = Preservation::dakp;
  dakp.lambda = 0.0;
  const TrainedModel a = phase2(cfg);
  const TrainedModel b = phase2(dakp, &snap);
  expect_same_report(a.report, b.report);
}

TEST_F(Phase2Fixture, SnapshotAndSoftLabelsUntouched) {
  const ParameterSnapshot snap = take_snapshot(phase1->model);
  const ParameterSnapshot snap_copy = snap;
  TrainConfig c = cfg;
  c.preservation = Preservation::dakp;
  phase2(c, &snap);
  for (const auto& [name, t] : snap.tensors()) EXPECT_TRUE(t.identical(snap_copy.tensors().at(name)));

  Rng rng(4);
  const auto seen_train = gather(ds.utterances, split.seen_train);
  ReplayMemory mem = build_memory(seen_train, 0.2, rng);
  compute_soft_labels(mem, phase1->model, c.tau_kd);
  const auto labels = mem.soft_labels;
  c.preservation = Preservation::ddkp;
  const TrainedModel out = phase2(c, nullptr, &mem);
  EXPECT_EQ(mem.soft_labels, labels);
  bool any_kd = false;
  for (const auto& e : out.report.epochs) any_kd = any_kd || e.kd > 0.0;
  EXPECT_TRUE(any_kd);
}

TEST_F(Phase2Fixture, AllModesDeterministic) {
  for (auto mode : {Preservation::none, Preservation::dakp, Preservation::ddkp}) {
    TrainConfig c = cfg;
    c.preservation = mode;
    const Phase2Run a = train_phase2(ds, phase1->model, phase1->info, c, 2);
    const Phase2Run b = train_phase2(ds, phase1->model, phase1->info, c, 2);
    expect_same_report(a.report, b.report);
    EXPECT_EQ(model_checksum(a.model), model_checksum(b.model));
  }
}

// Full synthetic set, desk defaults, 5 shots per intent.
TEST(Phase2, LargeLambdaPinsParameters) {
  Rng rng(1);
  const Dataset ds = generate_synthetic(8, 4, 50, rng);
  TrainConfig cfg;
  cfg.seed = 1;
  const Phase1Run p1 = train_phase1(ds, cfg, 1);
  cfg.preservation = Preservation::dakp;
  cfg.lambda = 1e6;
  const Phase2Run out = train_phase2(ds, p1.model, p1.info, cfg, 5);
  ASSERT_TRUE(out.snapshot.has_value());
  for (const Param* p : out.model.all_params()) {
    auto it = out.snapshot->tensors().find(p->name);
    if (it == out.snapshot->tensors().end()) continue;
    double diff = 0.0, base = 0.0;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      diff += (p->value[i] - it->second[i]) * (p->value[i] - it->second[i]);
      base += it->second[i] * it->second[i];
    }
    EXPECT_LT(std::sqrt(diff / base), 1e-3) << p->name;
  }
}

TEST(Preservation, ParseNames) {
  EXPECT_EQ(parse_preservation("none"), Preservation::none);
  EXPECT_EQ(parse_preservation("dakp"), Preservation::dakp);
  EXPECT_EQ(parse_preservation("ddkp"), Preservation::ddkp);
  EXPECT_PRINC_ERROR(parse_preservation("both"), ErrorCode::invalid_argument);
}
