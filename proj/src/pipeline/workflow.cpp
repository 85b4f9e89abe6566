#include "pipeline/workflow.hpp"

#include "data_io/records.hpp"
#include "numeric/error.hpp"

namespace princ {

using nlohmann::json;

json to_json(const RunInfo& info) {
  return json{{"phase", info.phase},
              {"train", to_json(info.train)},
              {"data", info.data_path},
              {"manifest", info.manifest_path},
              {"embeddings", info.embeddings_path},
              {"seen", info.seen},
              {"novel", info.novel},
              {"split_seed", info.split_seed},
              {"k_shot", info.k_shot},
              {"trained_vocab", info.trained_vocab}};
}

RunInfo run_info_from_json(const json& j) {
  RunInfo info;
  try {
    info.phase = j.at("phase").get<int>();
    merge_json(info.train, j.at("train"));
    info.data_path = j.value("data", std::string());
    info.manifest_path = j.value("manifest", std::string());
    info.embeddings_path = j.value("embeddings", std::string());
    info.seen = j.at("seen").get<std::vector<std::string>>();
    info.novel = j.at("novel").get<std::vector<std::string>>();
    info.split_seed = j.at("split_seed").get<std::uint64_t>();
    info.k_shot = j.value("k_shot", std::size_t{0});
    info.trained_vocab = j.value("trained_vocab", std::size_t{0});
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("checkpoint run info: ") + e.what());
  }
  return info;
}

GfsidSplit split_for(const Dataset& ds, std::uint64_t split_seed, std::size_t shots) {
  Rng rng(split_seed);
  return make_split(ds.utterances, ds.seen, ds.novel, shots, rng);
}

Vocab build_vocab(const Dataset& ds, const GfsidSplit& split) {
  Vocab v = Vocab::build(gather(ds.utterances, split.seen_train));
  for (const auto& u : ds.utterances) {
    for (const auto& tok : split_tokens(apply_template(u.text))) v.add(tok);
  }
  return v;
}

Phase1Run train_phase1(const Dataset& ds, const TrainConfig& cfg, std::uint64_t split_seed,
                       std::shared_ptr<const EmbeddingTable> embeddings) {
  auto split = split_for(ds, split_seed, 1);
  const auto train = gather(ds.utterances, split.seen_train);
  Rng rng(cfg.seed);
  const auto trained_vocab = Vocab::build(train).size();
  auto trained = run_phase1(train, build_vocab(ds, split), cfg, rng, std::move(embeddings));
  RunInfo info;
  info.phase = 1;
  info.train = cfg;
  info.seen = ds.seen;
  info.novel = ds.novel;
  info.split_seed = split_seed;
  info.trained_vocab = trained_vocab;
  return Phase1Run{std::move(trained.model), std::move(trained.report), std::move(split), std::move(info)};
}

std::vector<Utterance> joint_support(const Dataset& ds, const GfsidSplit& split, Rng& rng) {
  std::vector<Utterance> out;
  for (const auto& name : split.seen) {
    std::vector<std::size_t> pool;
    for (auto i : split.seen_train) {
      if (ds.utterances[i].label == name) pool.push_back(i);
    }
    if (pool.size() < split.shots) {
      fail(ErrorCode::invalid_argument, "seen intent '" + name + "' has " + std::to_string(pool.size()) +
                                            " training utterances, fewer than " + std::to_string(split.shots) +
                                            " shots");
    }
    for (auto k : rng.sample_without_replacement(pool.size(), split.shots)) out.push_back(ds.utterances[pool[k]]);
  }
  for (auto i : split.novel_support) out.push_back(ds.utterances[i]);
  return out;
}

Phase2Run train_phase2(const Dataset& ds, const IntentModel& phase1, const RunInfo& phase1_info,
                       const TrainConfig& cfg, std::size_t shots) {
  validate(cfg);
  if (phase1_info.phase != 1) fail(ErrorCode::state, "phase 2 must start from a phase-1 checkpoint");
  Phase2Run run;
  run.split = split_for(ds, phase1_info.split_seed, shots);
  Rng rng(mix_seed(cfg.seed, 2));
  const auto support = joint_support(ds, run.split, rng);

  if (cfg.preservation == Preservation::dakp) run.snapshot = take_snapshot(phase1, phase1_info.trained_vocab > 0 ? phase1_info.trained_vocab : kAllRows);
  if (cfg.preservation == Preservation::ddkp) {
    const auto seen_train = gather(ds.utterances, run.split.seen_train);
    run.memory = build_memory(seen_train, cfg.memory_ratio, rng);
    compute_soft_labels(*run.memory, phase1, cfg.tau_kd);
  }
  auto trained = run_phase2(support, phase1, cfg, rng, run.snapshot ? &*run.snapshot : nullptr,
                            run.memory ? &*run.memory : nullptr);
  run.model = std::move(trained.model);
  run.report = std::move(trained.report);
  run.info = phase1_info;
  run.info.phase = 2;
  run.info.train = cfg;
  run.info.k_shot = shots;
  return run;
}

EvalReport eval_seen_only(const IntentModel& model, const Dataset& ds, const GfsidSplit& split) {
  auto r = evaluate_indices(model, ds.utterances, split.seen_test);
  r.split_fingerprint = split.fingerprint();
  return r;
}

Checkpoint to_checkpoint(const IntentModel& model, const RunInfo& info,
                         const std::optional<ParameterSnapshot>& snapshot, const std::optional<ReplayMemory>& memory) {
  auto c = make_checkpoint(model);
  if (snapshot) c.snapshot = to_named(*snapshot);
  if (memory) c.memory = *memory;
  c.config = to_json(info).dump();
  return c;
}

}  // namespace princ
