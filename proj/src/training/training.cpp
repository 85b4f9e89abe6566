#include "training/training.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "losses/losses.hpp"
#include "numeric/adam.hpp"
#include "numeric/error.hpp"
#include "numeric/tape.hpp"

namespace princ {

const char* to_string(Preservation p) {
  switch (p) {
    case Preservation::none: return "none";
    case Preservation::dakp: return "dakp";
    case Preservation::ddkp: return "ddkp";
  }
  return "?";
}

Preservation parse_preservation(const std::string& s) {
  if (s == "none") return Preservation::none;
  if (s == "dakp") return Preservation::dakp;
  if (s == "ddkp") return Preservation::ddkp;
  fail(ErrorCode::invalid_argument, "unknown preservation mode '" + s + "' (expected none, dakp or ddkp)");
}

TrainConfig TrainConfig::paper() {
  TrainConfig c;
  c.phase1_lr = 1e-5;
  c.phase2_lr = 1e-4;
  c.batch_size = 64;
  c.phase2_batch_size = 5;
  c.phase2_epochs = 20;
  return c;
}

void validate(const TrainConfig& cfg) {
  require(cfg.phase1_lr > 0.0 && cfg.phase2_lr > 0.0, "learning rates must be positive");
  require(cfg.phase1_epochs >= 1 && cfg.phase2_epochs >= 1, "epochs must be >= 1");
  require(cfg.batch_size >= 2 && cfg.phase2_batch_size >= 2, "batch sizes must be >= 2");
  require(cfg.lambda >= 0.0, "lambda must be >= 0");
  require(cfg.memory_ratio > 0.0 && cfg.memory_ratio <= 1.0, "memory ratio must be in (0, 1]");
  require(cfg.tau > 0.0 && cfg.tau_kd > 0.0, "temperatures must be positive");
  require(cfg.prototype_dim >= 1, "prototype dim must be >= 1");
  validate(cfg.encoder);
}

std::vector<std::pair<std::size_t, std::size_t>> make_batches(std::size_t n, std::size_t batch_size) {
  require(batch_size >= 1, "make_batches: batch size must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch_size) out.emplace_back(b, std::min(n, b + batch_size));
  if (out.size() > 1 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = n;
    out.pop_back();
  }
  return out;
}

Objective build_objective(const ModelBinding& bound, const PrototypeStore& store, std::span<const TrainItem> items,
                          const TrainConfig& cfg, const ParameterSnapshot* snapshot) {
  require(items.size() >= 2, "training batch needs at least 2 items");
  Batch batch;
  std::vector<ad::Var> kd_terms;
  const auto n_seen = store.seen_count();
  for (const auto& item : items) {
    const auto label = store.index_of(item.utterance->label);
    if (label == kNoIndex) fail(ErrorCode::state, "training label '" + item.utterance->label + "' has no prototype");
    auto v = bound.embed(*item.utterance);
    batch.vectors.push_back(v);
    batch.labels.push_back(label);
    if (item.soft_label) {
      std::vector<ad::Var> sims;
      for (const auto& c : bound.prototypes(n_seen)) sims.push_back(ad::cosine(v, c));
      kd_terms.push_back(loss_kd(ad::stack(sims), *item.soft_label, cfg.tau_kd));
    }
  }

  Objective obj;
  std::vector<ad::Var> parts;
  auto cls = loss_cls(batch, bound.prototypes(), cfg.tau);
  auto ii = loss_ii(batch);
  auto is = loss_is(batch, bound.prototypes());
  obj.cls = cls.item();
  obj.ii = ii.item();
  obj.is = is.item();
  parts = {cls, ii, is};
  if (!kd_terms.empty()) {
    auto kd = ad::scale(ad::sum(kd_terms), 1.0 / static_cast<double>(kd_terms.size()));
    obj.kd = kd.item();
    parts.push_back(kd);
  }
  if (snapshot) {
    const auto named = bound.named();
    auto l2 = ad::scale(loss_l2_penalty(named, snapshot->tensors()), cfg.lambda);
    obj.l2 = l2.item();
    parts.push_back(l2);
  }
  obj.total = ad::sum(parts);
  return obj;
}

namespace {

void accumulate(EpochRecord& rec, const Objective& obj) {
  ++rec.steps;
  rec.cls += obj.cls;
  rec.ii += obj.ii;
  rec.is += obj.is;
  rec.kd += obj.kd;
  rec.l2 += obj.l2;
  rec.total += obj.total.item();
}

void finish(EpochRecord& rec) {
  const double n = static_cast<double>(rec.steps);
  rec.cls /= n;
  rec.ii /= n;
  rec.is /= n;
  rec.kd /= n;
  rec.l2 /= n;
  rec.total /= n;
}

std::uint64_t model_checksum(const IntentModel& m) {
  const auto ps = m.all_params();
  return checksum(ps);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TrainedModel run_phase1(std::span<const Utterance> data, const Vocab& vocab, const TrainConfig& cfg, Rng& rng,
                        std::shared_ptr<const EmbeddingTable> embeddings) {
  validate(cfg);
  require(!data.empty(), "run_phase1: no training data");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::string> intents;
  for (const auto& u : data) {
    validate(u);
    if (std::find(intents.begin(), intents.end(), u.label) == intents.end()) intents.push_back(u.label);
  }
  require(intents.size() >= 2, "run_phase1: needs at least 2 seen intents, got " + std::to_string(intents.size()));
  require(data.size() >= 2, "run_phase1: needs at least 2 utterances");

  EncoderConfig enc = cfg.encoder;
  if (embeddings) {
    require(!embeddings->empty(), "run_phase1: empty embedding table");
    enc.hidden_dim = embeddings->begin()->second.size();
  }
  TrainedModel out{init_model(vocab, enc, cfg.prototype_dim, intents, rng, std::move(embeddings)), {}};
  IntentModel& model = out.model;

  AdamState adam;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batches = make_batches(data.size(), cfg.batch_size);
  for (std::size_t epoch = 0; epoch < cfg.phase1_epochs; ++epoch) {
    rng.shuffle(order);
    EpochRecord rec;
    rec.phase = 1;
    rec.epoch = epoch + 1;
    for (const auto& [b, e] : batches) {
      std::vector<TrainItem> items;
      for (std::size_t i = b; i < e; ++i) items.push_back({&data[order[i]], nullptr});
      ad::Tape tape;
      ModelBinding bound(tape, model);
      const auto obj = build_objective(bound, model.prototypes, items, cfg, nullptr);
      tape.backward(obj.total);
      const auto params = model.trainable();
      adam_step(params, cfg.phase1_lr, adam);
      accumulate(rec, obj);
    }
    finish(rec);
    out.report.epochs.push_back(rec);
  }
  out.report.checksum = model_checksum(model);
  out.report.wall_seconds = seconds_since(t0);
  return out;
}

TrainedModel run_phase2(std::span<const Utterance> joint_support, const IntentModel& phase1, const TrainConfig& cfg,
                        Rng& rng, const ParameterSnapshot* snapshot, const ReplayMemory* memory) {
  validate(cfg);
  require(!joint_support.empty(), "run_phase2: no support utterances");
  require(phase1.prototypes.novel_count() == 0, "run_phase2: model already holds novel prototypes");
  if (cfg.preservation == Preservation::dakp && (!snapshot || snapshot->empty())) {
    fail(ErrorCode::state, "run_phase2: dakp requires a parameter snapshot");
  }
  if (cfg.preservation == Preservation::ddkp && (!memory || !memory->has_soft_labels())) {
    fail(ErrorCode::state, "run_phase2: ddkp requires a replay memory with soft labels");
  }
  const auto t0 = std::chrono::steady_clock::now();

  // Novel intents in order of first appearance among the supports.
  std::vector<std::string> novel;
  for (const auto& u : joint_support) {
    validate(u);
    if (phase1.prototypes.index_of(u.label) == kNoIndex &&
        std::find(novel.begin(), novel.end(), u.label) == novel.end()) {
      novel.push_back(u.label);
    }
  }
  require(!novel.empty(), "run_phase2: supports contain no novel intent");

  SupportSets supports;
  for (const auto& name : novel) {
    std::vector<Tensor> vs;
    for (const auto& u : joint_support) {
      if (u.label == name) vs.push_back(embed(phase1, u));
    }
    supports.emplace_back(name, std::move(vs));
  }

  TrainedModel out{phase1, {}};
  IntentModel& model = out.model;
  model.prototypes = init_novel_prototypes(phase1.prototypes, supports);

  const ParameterSnapshot* penalty = cfg.preservation == Preservation::dakp ? snapshot : nullptr;
  const ReplayMemory* replay = cfg.preservation == Preservation::ddkp ? memory : nullptr;

  AdamState adam;
  std::vector<std::size_t> order(joint_support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batches = make_batches(joint_support.size(), cfg.phase2_batch_size);
  for (std::size_t epoch = 0; epoch < cfg.phase2_epochs; ++epoch) {
    rng.shuffle(order);
    EpochRecord rec;
    rec.phase = 2;
    rec.epoch = epoch + 1;
    for (const auto& [b, e] : batches) {
      std::vector<TrainItem> items;
      for (std::size_t i = b; i < e; ++i) items.push_back({&joint_support[order[i]], nullptr});
      if (replay) {
        const auto k = std::min(e - b, replay->size());
        for (auto r : rng.sample_without_replacement(replay->size(), k)) {
          items.push_back({&replay->items[r], &replay->soft_labels[r]});
        }
      }
      ad::Tape tape;
      ModelBinding bound(tape, model);
      const auto obj = build_objective(bound, model.prototypes, items, cfg, penalty);
      tape.backward(obj.total);
      const auto params = model.trainable();
      adam_step(params, cfg.phase2_lr, adam);
      accumulate(rec, obj);
    }
    finish(rec);
    out.report.epochs.push_back(rec);
  }
  out.report.checksum = model_checksum(model);
  out.report.wall_seconds = seconds_since(t0);
  return out;
}

}  // namespace princ
