// Batch front end over the princ C API: gen-data, train, eval, gradcheck.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "princ/princ.h"

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct DomainError {
  std::string message;
};

struct UsageError {
  std::string message;
};

void check(princ_status s, const std::string& context) {
  if (s != PRINC_OK) throw DomainError{context + ": " + princ_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<princ_dataset, Deleter<princ_dataset, princ_dataset_free>>;
using ModelPtr = std::unique_ptr<princ_model, Deleter<princ_model, princ_model_free>>;
using EvalPtr = std::unique_ptr<princ_eval_report, Deleter<princ_eval_report, princ_eval_report_free>>;
using GradPtr = std::unique_ptr<princ_gradcheck_report, Deleter<princ_gradcheck_report, princ_gradcheck_report_free>>;

template <class Fn, class H>
std::string read_buffer(Fn fn, const H* handle) {
  size_t len = 0;
  check(fn(handle, nullptr, 0, &len), "format");
  std::string out(len + 1, '\0');
  check(fn(handle, out.data(), out.size(), &len), "format");
  out.resize(len);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError{"cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json model_info(const princ_model* m) { return nlohmann::json::parse(read_buffer(princ_model_config_json, m)); }

DatasetPtr load_data(const std::string& path, const std::string& manifest, const std::string& embeddings) {
  princ_dataset* raw = nullptr;
  check(princ_dataset_load(path.c_str(), manifest.empty() ? nullptr : manifest.c_str(), &raw), "loading dataset");
  DatasetPtr ds(raw);
  if (!embeddings.empty()) check(princ_dataset_load_embeddings(ds.get(), embeddings.c_str()), "loading embeddings");
  return ds;
}

ModelPtr load_model(const std::string& path) {
  princ_model* raw = nullptr;
  check(princ_model_load(path.c_str(), &raw), "loading checkpoint");
  return ModelPtr(raw);
}

// Dataset named on the command line, else the one recorded in the checkpoint.
DatasetPtr data_for(const princ_model* m, std::string data, std::string manifest, std::string embeddings) {
  const auto info = model_info(m);
  if (data.empty()) {
    data = info.value("data", std::string());
    if (manifest.empty()) manifest = info.value("manifest", std::string());
  }
  if (embeddings.empty()) embeddings = info.value("embeddings", std::string());
  if (data.empty()) throw UsageError{"--data is required: the checkpoint does not name a dataset"};
  return load_data(data, manifest, embeddings);
}

struct GenArgs {
  size_t seen = 8;
  size_t novel = 4;
  size_t per_intent = 50;
  uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

int run_gen(const GenArgs& a) {
  princ_dataset* raw = nullptr;
  check(princ_dataset_generate(a.seen, a.novel, a.per_intent, a.seed, &raw), "generating dataset");
  DatasetPtr ds(raw);
  check(princ_dataset_save(ds.get(), a.out.c_str(), a.manifest.empty() ? nullptr : a.manifest.c_str()),
        "writing dataset");
  std::printf("wrote %zu utterances (%zu seen, %zu novel intents) to %s\n", princ_dataset_size(ds.get()),
              princ_dataset_seen_count(ds.get()), princ_dataset_novel_count(ds.get()), a.out.c_str());
  return 0;
}

struct TrainArgs {
  int phase = 1;
  std::string data, manifest, embeddings, from, out, report, config, preset = "desk", preserve;
  size_t k_shot = 1;
  uint64_t seed = 0;
  uint64_t split_seed = 0;
  double lambda = 1.0, memory_ratio = 0.1, tau = 0.1, tau_kd = 1.0, lr = 0.0;
  size_t epochs = 0, batch_size = 0, embedding_dim = 0, hidden_dim = 0, prototype_dim = 0;
};

int run_train(const TrainArgs& a, const CLI::App& cmd) {
  const auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  princ_train_options opts;
  princ_train_options_default(&opts);
  ModelPtr phase1;
  DatasetPtr ds;

  if (a.phase == 1) {
    if (a.data.empty()) throw UsageError{"train --phase 1 requires --data"};
    if (given("--from") || given("--preserve")) throw UsageError{"--from and --preserve apply to --phase 2 only"};
    check(princ_train_options_preset(&opts, a.preset.c_str()), "preset");
    ds = load_data(a.data, a.manifest, a.embeddings);
  } else {
    if (a.from.empty()) throw UsageError{"train --phase 2 requires --from <phase-1 checkpoint>"};
    if (a.preserve.empty()) throw UsageError{"train --phase 2 requires --preserve none|dakp|ddkp"};
    phase1 = load_model(a.from);
    if (princ_model_phase(phase1.get()) != 1) throw DomainError{"'" + a.from + "' is not a phase-1 checkpoint"};
    // Start from the phase-1 settings so encoder shapes and seeds carry over.
    const auto train = model_info(phase1.get()).at("train").dump();
    check(princ_train_options_merge_json(&opts, train.c_str()), "checkpoint config");
    if (given("--preset")) check(princ_train_options_preset(&opts, a.preset.c_str()), "preset");
    ds = data_for(phase1.get(), a.data, a.manifest, a.embeddings);
  }

  if (!a.config.empty()) check(princ_train_options_merge_json(&opts, read_file(a.config).c_str()), a.config);

  if (given("--seed")) opts.seed = a.seed;
  if (given("--lambda")) opts.lambda = a.lambda;
  if (given("--memory-ratio")) opts.memory_ratio = a.memory_ratio;
  if (given("--tau")) opts.tau = a.tau;
  if (given("--tau-kd")) opts.tau_kd = a.tau_kd;
  if (given("--embedding-dim")) opts.embedding_dim = a.embedding_dim;
  if (given("--hidden-dim")) opts.hidden_dim = a.hidden_dim;
  if (given("--prototype-dim")) opts.prototype_dim = a.prototype_dim;
  if (a.phase == 1) {
    if (given("--lr")) opts.phase1_lr = a.lr;
    if (given("--epochs")) opts.phase1_epochs = a.epochs;
    if (given("--batch-size")) opts.batch_size = a.batch_size;
  } else {
    if (given("--lr")) opts.phase2_lr = a.lr;
    if (given("--epochs")) opts.phase2_epochs = a.epochs;
    if (given("--batch-size")) opts.phase2_batch_size = a.batch_size;
    if (a.preserve == "none") opts.preservation = PRINC_PRESERVE_NONE;
    else if (a.preserve == "dakp") opts.preservation = PRINC_PRESERVE_DAKP;
    else if (a.preserve == "ddkp") opts.preservation = PRINC_PRESERVE_DDKP;
    else throw UsageError{"--preserve must be none, dakp or ddkp"};
  }

  princ_model* raw = nullptr;
  if (a.phase == 1) {
    const uint64_t split_seed = given("--split-seed") ? a.split_seed : opts.seed;
    check(princ_train_phase1(ds.get(), &opts, split_seed, &raw), "phase-1 training");
  } else {
    check(princ_train_phase2(ds.get(), phase1.get(), &opts, a.k_shot, &raw), "phase-2 training");
  }
  ModelPtr model(raw);
  check(princ_model_save(model.get(), a.out.c_str()), "writing checkpoint");
  if (!a.report.empty()) check(princ_model_write_train_report(model.get(), a.report.c_str()), "writing report");

  princ_eval_report* ev = nullptr;
  check(princ_eval_nonepisodic(model.get(), ds.get(), &ev), "evaluating");
  EvalPtr report(ev);
  std::printf("phase %d checkpoint %s (checksum %016llx, %zu prototypes)\n", a.phase, a.out.c_str(),
              static_cast<unsigned long long>(princ_model_checksum(model.get())),
              princ_model_prototype_count(model.get()));
  std::printf("%s", read_buffer(princ_eval_format, report.get()).c_str());
  return 0;
}

struct EvalArgs {
  std::string from, data, manifest, embeddings, mode, report;
  size_t ways = 0, shots = 0, episodes = 0, queries = 5;
  bool novel_only = false;
  uint64_t seed = 0;
};

int run_eval(const EvalArgs& a, const CLI::App& cmd) {
  if (a.mode != "noneps" && a.mode != "eps") throw UsageError{"--mode must be noneps or eps"};
  if (a.mode == "eps") {
    for (const char* f : {"--ways", "--shots", "--episodes"}) {
      if (cmd.count(f) == 0) throw UsageError{std::string("--mode eps requires ") + f};
    }
  }
  auto model = load_model(a.from);
  auto ds = data_for(model.get(), a.data, a.manifest, a.embeddings);
  princ_eval_report* raw = nullptr;
  if (a.mode == "noneps") {
    check(princ_eval_nonepisodic(model.get(), ds.get(), &raw), "evaluating");
  } else {
    check(princ_eval_episodic(model.get(), ds.get(), a.ways, a.shots, a.queries, a.episodes, a.novel_only ? 1 : 0,
                              a.seed, &raw),
          "evaluating");
  }
  EvalPtr report(raw);
  std::printf("%s", read_buffer(princ_eval_format, report.get()).c_str());
  if (!a.report.empty()) check(princ_eval_write(report.get(), a.report.c_str()), "writing report");
  return 0;
}

struct GradArgs {
  double step = 1e-5;
  size_t dims = 8;
  size_t fixtures = 20;
  uint64_t seed = 0;
  std::string corrupt;
};

int run_gradcheck(const GradArgs& a) {
  princ_gradcheck_options opts;
  princ_gradcheck_options_default(&opts);
  opts.step = a.step;
  opts.dims = a.dims;
  opts.fixtures = a.fixtures;
  opts.seed = a.seed;
  opts.corrupt = a.corrupt.empty() ? nullptr : a.corrupt.c_str();
  princ_gradcheck_report* raw = nullptr;
  check(princ_gradcheck_run(&opts, &raw), "gradcheck");
  GradPtr report(raw);
  std::printf("%s", read_buffer(princ_gradcheck_format, report.get()).c_str());
  return princ_gradcheck_passed(report.get()) ? 0 : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prototype-based generalized few-shot intent detection"};
  app.require_subcommand(1, 1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset and its manifest");
  gen_cmd->add_option("--seen", gen.seen, "Seen intents")->check(CLI::Range(size_t{2}, size_t{1000}));
  gen_cmd->add_option("--novel", gen.novel, "Novel intents")->check(CLI::Range(size_t{1}, size_t{1000}));
  gen_cmd->add_option("--per-intent", gen.per_intent, "Utterances per intent")
      ->check(CLI::Range(size_t{10}, size_t{1000000}));
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen.out, "Dataset path (JSONL)")->required();
  gen_cmd->add_option("--manifest", gen.manifest, "Manifest path (default: <out stem>.manifest.json)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Run phase 1 or phase 2 training");
  train_cmd->add_option("--phase", tr.phase, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
  train_cmd->add_option("--data", tr.data, "Dataset path");
  train_cmd->add_option("--manifest", tr.manifest, "Manifest path");
  train_cmd->add_option("--embeddings", tr.embeddings, "Precomputed hidden vectors (replaces the desk encoder)");
  train_cmd->add_option("--from", tr.from, "Phase-1 checkpoint (phase 2)");
  train_cmd->add_option("--preserve", tr.preserve, "none, dakp or ddkp (phase 2)");
  train_cmd->add_option("--lambda", tr.lambda, "Parameter penalty weight");
  train_cmd->add_option("--memory-ratio", tr.memory_ratio, "Replay memory size as a fraction of seen data");
  train_cmd->add_option("--k-shot", tr.k_shot, "Supports per intent (phase 2)");
  train_cmd->add_option("--seed", tr.seed, "Training seed");
  train_cmd->add_option("--split-seed", tr.split_seed, "Split seed (phase 1; default: --seed)");
  train_cmd->add_option("--lr", tr.lr, "Learning rate of this phase");
  train_cmd->add_option("--epochs", tr.epochs, "Epochs of this phase");
  train_cmd->add_option("--batch-size", tr.batch_size, "Batch size of this phase");
  train_cmd->add_option("--tau", tr.tau, "Classification temperature");
  train_cmd->add_option("--tau-kd", tr.tau_kd, "Distillation temperature");
  train_cmd->add_option("--embedding-dim", tr.embedding_dim, "Desk encoder embedding width");
  train_cmd->add_option("--hidden-dim", tr.hidden_dim, "Desk encoder hidden width");
  train_cmd->add_option("--prototype-dim", tr.prototype_dim, "Prototype space width");
  train_cmd->add_option("--preset", tr.preset, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  train_cmd->add_option("--config", tr.config, "JSON file of training settings (flags win)");
  train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
  train_cmd->add_option("--report", tr.report, "Per-epoch loss records (JSONL)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--from", ev.from, "Checkpoint")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset path (default: the one recorded in the checkpoint)");
  eval_cmd->add_option("--manifest", ev.manifest, "Manifest path");
  eval_cmd->add_option("--embeddings", ev.embeddings, "Precomputed hidden vectors");
  eval_cmd->add_option("--mode", ev.mode, "noneps or eps")->required();
  eval_cmd->add_option("--ways", ev.ways, "Intents per episode");
  eval_cmd->add_option("--shots", ev.shots, "Supports per intent per episode");
  eval_cmd->add_option("--queries", ev.queries, "Queries per intent per episode");
  eval_cmd->add_option("--episodes", ev.episodes, "Episode count");
  eval_cmd->add_flag("--novel-only", ev.novel_only, "Sample episode intents from novel intents only");
  eval_cmd->add_option("--seed", ev.seed, "Episode sampling seed");
  eval_cmd->add_option("--report", ev.report, "Record file (JSONL)");

  GradArgs gc;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  grad_cmd->add_option("--step", gc.step, "Finite-difference step");
  grad_cmd->add_option("--dims", gc.dims, "Largest fixture dimension")->check(CLI::Range(size_t{2}, size_t{64}));
  grad_cmd->add_option("--fixtures", gc.fixtures, "Fixtures per check")->check(CLI::Range(size_t{1}, size_t{10000}));
  grad_cmd->add_option("--seed", gc.seed, "Fixture seed");
  grad_cmd->add_option("--corrupt", gc.corrupt, "Perturb the analytic gradient of one check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*train_cmd) return run_train(tr, *train_cmd);
    if (*eval_cmd) return run_eval(ev, *eval_cmd);
    return run_gradcheck(gc);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.message << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.message << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}
