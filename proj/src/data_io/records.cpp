#include "data_io/records.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "numeric/error.hpp"

namespace princ {

using nlohmann::json;

json to_json(const TrainConfig& c) {
  return json{
      {"phase1_lr", c.phase1_lr},
      {"phase2_lr", c.phase2_lr},
      {"phase1_epochs", c.phase1_epochs},
      {"phase2_epochs", c.phase2_epochs},
      {"batch_size", c.batch_size},
      {"phase2_batch_size", c.phase2_batch_size},
      {"lambda", c.lambda},
      {"preservation", to_string(c.preservation)},
      {"memory_ratio", c.memory_ratio},
      {"tau", c.tau},
      {"tau_kd", c.tau_kd},
      {"seed", c.seed},
      {"embedding_dim", c.encoder.embedding_dim},
      {"hidden_dim", c.encoder.hidden_dim},
      {"prototype_dim", c.prototype_dim},
  };
}

void merge_json(TrainConfig& c, const json& j) {
  if (!j.is_object()) fail(ErrorCode::format, "training config must be a JSON object");
  static const std::set<std::string> known = {
      "phase1_lr", "phase2_lr",    "phase1_epochs", "phase2_epochs", "batch_size",    "phase2_batch_size",
      "lambda",    "preservation", "memory_ratio",  "tau",           "tau_kd",        "seed",
      "embedding_dim", "hidden_dim", "prototype_dim"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::format, "unknown training config key '" + key + "'");
  }
  try {
    c.phase1_lr = j.value("phase1_lr", c.phase1_lr);
    c.phase2_lr = j.value("phase2_lr", c.phase2_lr);
    c.phase1_epochs = j.value("phase1_epochs", c.phase1_epochs);
    c.phase2_epochs = j.value("phase2_epochs", c.phase2_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.phase2_batch_size = j.value("phase2_batch_size", c.phase2_batch_size);
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("preservation")) c.preservation = parse_preservation(j.at("preservation").get<std::string>());
    c.memory_ratio = j.value("memory_ratio", c.memory_ratio);
    c.tau = j.value("tau", c.tau);
    c.tau_kd = j.value("tau_kd", c.tau_kd);
    c.seed = j.value("seed", c.seed);
    c.encoder.embedding_dim = j.value("embedding_dim", c.encoder.embedding_dim);
    c.encoder.hidden_dim = j.value("hidden_dim", c.encoder.hidden_dim);
    c.prototype_dim = j.value("prototype_dim", c.prototype_dim);
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("training config: ") + e.what());
  }
}

std::string train_report_records(const TrainReport& report) {
  std::ostringstream os;
  for (const auto& e : report.epochs) {
    os << json{{"phase", e.phase}, {"epoch", e.epoch}, {"steps", e.steps}, {"cls", e.cls},
               {"ii", e.ii},       {"is", e.is},       {"kd", e.kd},       {"l2", e.l2},
               {"total", e.total}}
              .dump()
       << '\n';
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(report.checksum));
  os << json{{"checksum", hex}}.dump() << '\n';
  return os.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(ErrorCode::io, "failed writing '" + path + "'");
}

void write_train_report(const std::string& path, const TrainReport& report) {
  write_text(path, train_report_records(report));
}

std::string eval_report_records(const EvalReport& r) {
  std::ostringstream os;
  json summary{{"record", "summary"},
               {"mode", r.mode},
               {"total", r.total},
               {"correct", r.correct},
               {"accuracy", r.accuracy},
               {"seen_total", r.seen_total},
               {"seen_accuracy", r.seen_accuracy},
               {"novel_total", r.novel_total},
               {"novel_accuracy", r.novel_accuracy}};
  if (r.mode == "eps") {
    summary["episodes"] = r.episodes;
    summary["episode_mean"] = r.episode_mean;
    summary["episode_stddev"] = r.episode_stddev;
  }
  os << summary.dump() << '\n';
  for (std::size_t i = 0; i < r.intents.size(); ++i) {
    os << json{{"record", "intent"},
               {"intent", r.intents[i]},
               {"stage", i < r.seen_count ? "seen" : "novel"},
               {"total", r.per_intent_total[i]},
               {"accuracy", r.per_intent_accuracy[i]},
               {"confusion", r.confusion[i]}}
              .dump()
       << '\n';
  }
  for (std::size_t e = 0; e < r.episode_accuracy.size(); ++e) {
    os << json{{"record", "episode"}, {"episode", e}, {"accuracy", r.episode_accuracy[e]}}.dump() << '\n';
  }
  return os.str();
}

void write_eval_report(const std::string& path, const EvalReport& report) {
  write_text(path, eval_report_records(report));
}

std::string format_eval_table(const EvalReport& r) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %-6s %8s %9s\n", "intent", "stage", "queries", "accuracy");
  os << line;
  for (std::size_t i = 0; i < r.intents.size(); ++i) {
    std::snprintf(line, sizeof line, "%-24s %-6s %8zu %9.4f\n", r.intents[i].c_str(),
                  i < r.seen_count ? "seen" : "novel", r.per_intent_total[i], r.per_intent_accuracy[i]);
    os << line;
  }
  std::snprintf(line, sizeof line, "mode %s: %zu/%zu correct, accuracy %.4f (seen %.4f over %zu, novel %.4f over %zu)\n",
                r.mode.c_str(), r.correct, r.total, r.accuracy, r.seen_accuracy, r.seen_total, r.novel_accuracy,
                r.novel_total);
  os << line;
  if (r.mode == "eps") {
    std::snprintf(line, sizeof line, "episodes %zu: mean %.4f, stddev %.4f\n", r.episodes, r.episode_mean,
                  r.episode_stddev);
    os << line;
  }
  return os.str();
}

std::string format_forgetting_table(const std::vector<ForgettingRow>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %9s %9s %11s %11s\n", "mode", "seen", "novel", "seen_delta", "novel_delta");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-6s %9.4f %9.4f %+11.2f %+11.2f\n", to_string(r.mode), r.seen_accuracy,
                  r.novel_accuracy, r.seen_delta, r.novel_delta);
    os << line;
  }
  return os.str();
}

}  // namespace princ
