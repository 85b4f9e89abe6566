#include "princ/princ.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "data_io/checkpoint.hpp"
#include "data_io/dataset.hpp"
#include "data_io/records.hpp"
#include "numeric/error.hpp"
#include "pipeline/gradcheck.hpp"
#include "pipeline/workflow.hpp"

struct princ_dataset {
  princ::Dataset data;
  princ::Manifest manifest;
  std::string path;
  std::string manifest_path;
  std::shared_ptr<const princ::EmbeddingTable> embeddings;
  std::string embeddings_path;
};

struct princ_model {
  princ::IntentModel model;
  princ::RunInfo info;
  std::optional<princ::TrainReport> report;  // absent for loaded checkpoints
  std::optional<princ::ParameterSnapshot> snapshot;
  std::optional<princ::ReplayMemory> memory;
};

struct princ_eval_report {
  princ::EvalReport report;
};

struct princ_gradcheck_report {
  std::vector<princ::GradcheckResult> results;
};

namespace {

thread_local std::string g_last_error;

princ_status to_status(princ::ErrorCode code) {
  switch (code) {
    case princ::ErrorCode::invalid_argument: return PRINC_ERR_INVALID_ARGUMENT;
    case princ::ErrorCode::dimension_mismatch: return PRINC_ERR_DIMENSION_MISMATCH;
    case princ::ErrorCode::degenerate_vector: return PRINC_ERR_DEGENERATE_VECTOR;
    case princ::ErrorCode::io: return PRINC_ERR_IO;
    case princ::ErrorCode::format: return PRINC_ERR_FORMAT;
    case princ::ErrorCode::state: return PRINC_ERR_STATE;
  }
  return PRINC_ERR_INTERNAL;
}

template <class F>
princ_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return PRINC_OK;
  } catch (const princ::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return PRINC_ERR_INTERNAL;
}

void require_arg(const void* p, const char* what) {
  if (p == nullptr) princ::fail(princ::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

princ_status copy_out(const std::string& s, char* buf, size_t cap, size_t* len) {
  if (len != nullptr) *len = s.size();
  if (buf != nullptr && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return PRINC_OK;
}

princ::TrainConfig to_config(const princ_train_options& o) {
  princ::TrainConfig c;
  c.phase1_lr = o.phase1_lr;
  c.phase2_lr = o.phase2_lr;
  c.phase1_epochs = o.phase1_epochs;
  c.phase2_epochs = o.phase2_epochs;
  c.batch_size = o.batch_size;
  c.phase2_batch_size = o.phase2_batch_size;
  c.lambda = o.lambda;
  c.memory_ratio = o.memory_ratio;
  c.tau = o.tau;
  c.tau_kd = o.tau_kd;
  c.seed = o.seed;
  c.encoder.embedding_dim = o.embedding_dim;
  c.encoder.hidden_dim = o.hidden_dim;
  c.prototype_dim = o.prototype_dim;
  switch (o.preservation) {
    case PRINC_PRESERVE_NONE: c.preservation = princ::Preservation::none; break;
    case PRINC_PRESERVE_DAKP: c.preservation = princ::Preservation::dakp; break;
    case PRINC_PRESERVE_DDKP: c.preservation = princ::Preservation::ddkp; break;
    default: princ::fail(princ::ErrorCode::invalid_argument, "unknown preservation mode");
  }
  return c;
}

void from_config(const princ::TrainConfig& c, princ_train_options& o) {
  o.phase1_lr = c.phase1_lr;
  o.phase2_lr = c.phase2_lr;
  o.phase1_epochs = c.phase1_epochs;
  o.phase2_epochs = c.phase2_epochs;
  o.batch_size = c.batch_size;
  o.phase2_batch_size = c.phase2_batch_size;
  o.lambda = c.lambda;
  o.memory_ratio = c.memory_ratio;
  o.tau = c.tau;
  o.tau_kd = c.tau_kd;
  o.seed = c.seed;
  o.embedding_dim = c.encoder.embedding_dim;
  o.hidden_dim = c.encoder.hidden_dim;
  o.prototype_dim = c.prototype_dim;
  o.preservation = static_cast<princ_preservation>(c.preservation);
}

void check_same_dataset(const princ_model& m, const princ_dataset& ds) {
  if (m.info.seen != ds.data.seen || m.info.novel != ds.data.novel) {
    princ::fail(princ::ErrorCode::state, "dataset seen/novel intents differ from the ones the model was trained on");
  }
}

// A loaded model with a precomputed encoder takes its vectors from the dataset.
princ::IntentModel bound_model(const princ_model& m, const princ_dataset& ds) {
  princ::IntentModel model = m.model;
  if (model.encoder_kind == princ::EncoderKind::precomputed) {
    if (!ds.embeddings) princ::fail(princ::ErrorCode::state, "model needs precomputed embeddings; attach them to the dataset");
    model.embeddings = ds.embeddings;
  }
  return model;
}

}  // namespace

extern "C" {

const char* princ_last_error(void) { return g_last_error.c_str(); }

const char* princ_status_string(princ_status status) {
  switch (status) {
    case PRINC_OK: return "ok";
    case PRINC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PRINC_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case PRINC_ERR_DEGENERATE_VECTOR: return "degenerate vector";
    case PRINC_ERR_IO: return "i/o error";
    case PRINC_ERR_FORMAT: return "format error";
    case PRINC_ERR_STATE: return "invalid state";
    case PRINC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

princ_status princ_dataset_generate(size_t seen, size_t novel, size_t per_intent, uint64_t seed, princ_dataset** out) {
  return guarded([&] {
    require_arg(out, "out");
    princ::Rng rng(seed);
    auto ds = std::make_unique<princ_dataset>();
    ds->data = princ::generate_synthetic(seen, novel, per_intent, rng);
    ds->manifest = princ::Manifest{ds->data.seen, ds->data.novel, seed, per_intent};
    *out = ds.release();
  });
}

princ_status princ_dataset_load(const char* path, const char* manifest_path, princ_dataset** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    auto ds = std::make_unique<princ_dataset>();
    ds->path = path;
    ds->manifest_path = manifest_path != nullptr ? manifest_path : princ::default_manifest_path(path);
    ds->data.utterances = princ::load_dataset(ds->path);
    ds->manifest = princ::load_manifest(ds->manifest_path);
    ds->data.seen = ds->manifest.seen;
    ds->data.novel = ds->manifest.novel;
    *out = ds.release();
  });
}

princ_status princ_dataset_save(const princ_dataset* ds, const char* path, const char* manifest_path) {
  return guarded([&] {
    require_arg(ds, "dataset");
    require_arg(path, "path");
    princ::save_dataset(path, ds->data.utterances);
    princ::save_manifest(manifest_path != nullptr ? manifest_path : princ::default_manifest_path(path), ds->manifest);
  });
}

princ_status princ_dataset_load_embeddings(princ_dataset* ds, const char* path) {
  return guarded([&] {
    require_arg(ds, "dataset");
    require_arg(path, "path");
    auto loaded = princ::load_embeddings(path);
    princ::check_complete(loaded, ds->data.utterances.size());
    ds->embeddings = std::make_shared<const princ::EmbeddingTable>(std::move(loaded.table));
    ds->embeddings_path = path;
  });
}

size_t princ_dataset_size(const princ_dataset* ds) { return ds ? ds->data.utterances.size() : 0; }
size_t princ_dataset_seen_count(const princ_dataset* ds) { return ds ? ds->data.seen.size() : 0; }
size_t princ_dataset_novel_count(const princ_dataset* ds) { return ds ? ds->data.novel.size() : 0; }
void princ_dataset_free(princ_dataset* ds) { delete ds; }

void princ_train_options_default(princ_train_options* opts) {
  if (opts != nullptr) from_config(princ::TrainConfig::desk(), *opts);
}

princ_status princ_train_options_preset(princ_train_options* opts, const char* name) {
  return guarded([&] {
    require_arg(opts, "options");
    require_arg(name, "preset");
    const std::string n = name;
    if (n == "desk") {
      from_config(princ::TrainConfig::desk(), *opts);
    } else if (n == "paper") {
      from_config(princ::TrainConfig::paper(), *opts);
    } else {
      princ::fail(princ::ErrorCode::invalid_argument, "unknown preset '" + n + "' (expected desk or paper)");
    }
  });
}

princ_status princ_train_options_merge_json(princ_train_options* opts, const char* json_text) {
  return guarded([&] {
    require_arg(opts, "options");
    require_arg(json_text, "json");
    auto cfg = to_config(*opts);
    const auto j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) princ::fail(princ::ErrorCode::format, "training config is not valid JSON");
    princ::merge_json(cfg, j);
    from_config(cfg, *opts);
  });
}

princ_status princ_train_phase1(const princ_dataset* ds, const princ_train_options* opts, uint64_t split_seed,
                                princ_model** out) {
  return guarded([&] {
    require_arg(ds, "dataset");
    require_arg(opts, "options");
    require_arg(out, "out");
    auto run = princ::train_phase1(ds->data, to_config(*opts), split_seed, ds->embeddings);
    auto m = std::make_unique<princ_model>();
    m->model = std::move(run.model);
    m->info = std::move(run.info);
    m->info.data_path = ds->path;
    m->info.manifest_path = ds->manifest_path;
    m->info.embeddings_path = ds->embeddings_path;
    m->report = std::move(run.report);
    *out = m.release();
  });
}

princ_status princ_train_phase2(const princ_dataset* ds, const princ_model* phase1, const princ_train_options* opts,
                                size_t k_shot, princ_model** out) {
  return guarded([&] {
    require_arg(ds, "dataset");
    require_arg(phase1, "phase-1 model");
    require_arg(opts, "options");
    require_arg(out, "out");
    check_same_dataset(*phase1, *ds);
    const auto model = bound_model(*phase1, *ds);
    auto run = princ::train_phase2(ds->data, model, phase1->info, to_config(*opts), k_shot);
    auto m = std::make_unique<princ_model>();
    m->model = std::move(run.model);
    m->info = std::move(run.info);
    m->report = std::move(run.report);
    m->snapshot = std::move(run.snapshot);
    m->memory = std::move(run.memory);
    *out = m.release();
  });
}

princ_status princ_model_save(const princ_model* model, const char* path) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(path, "path");
    princ::save_checkpoint(princ::to_checkpoint(model->model, model->info, model->snapshot, model->memory), path);
  });
}

princ_status princ_model_load(const char* path, princ_model** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    const auto ckpt = princ::load_checkpoint(path);
    if (!ckpt.config) princ::fail(princ::ErrorCode::format, std::string("checkpoint '") + path + "' has no run info");
    const auto j = nlohmann::json::parse(*ckpt.config, nullptr, false);
    if (j.is_discarded()) princ::fail(princ::ErrorCode::format, "checkpoint run info is not valid JSON");
    auto m = std::make_unique<princ_model>();
    m->info = princ::run_info_from_json(j);
    m->model = princ::model_from_checkpoint(ckpt);
    if (ckpt.snapshot) m->snapshot = princ::snapshot_from(*ckpt.snapshot);
    m->memory = ckpt.memory;
    *out = m.release();
  });
}

int princ_model_phase(const princ_model* model) { return model ? model->info.phase : 0; }
size_t princ_model_prototype_count(const princ_model* model) { return model ? model->model.prototypes.size() : 0; }

uint64_t princ_model_checksum(const princ_model* model) {
  if (model == nullptr) return 0;
  const auto params = model->model.all_params();
  return princ::checksum(params);
}

int princ_model_has_memory(const princ_model* model) { return model && model->memory ? 1 : 0; }
int princ_model_has_snapshot(const princ_model* model) { return model && model->snapshot ? 1 : 0; }

princ_status princ_model_write_train_report(const princ_model* model, const char* path) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(path, "path");
    if (!model->report) princ::fail(princ::ErrorCode::state, "model has no training report (loaded from a checkpoint)");
    princ::write_train_report(path, *model->report);
  });
}

princ_status princ_model_config_json(const princ_model* model, char* buf, size_t cap, size_t* len) {
  return guarded([&] {
    require_arg(model, "model");
    copy_out(princ::to_json(model->info).dump(), buf, cap, len);
  });
}

void princ_model_free(princ_model* model) { delete model; }

princ_status princ_eval_nonepisodic(const princ_model* model, const princ_dataset* ds, princ_eval_report** out) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(ds, "dataset");
    require_arg(out, "out");
    check_same_dataset(*model, *ds);
    const auto m = bound_model(*model, *ds);
    auto r = std::make_unique<princ_eval_report>();
    if (model->info.phase == 1) {
      r->report = princ::eval_seen_only(m, ds->data, princ::split_for(ds->data, model->info.split_seed, 1));
    } else {
      const auto split = princ::split_for(ds->data, model->info.split_seed, model->info.k_shot);
      r->report = princ::eval_nonepisodic(m, ds->data.utterances, split);
    }
    *out = r.release();
  });
}

princ_status princ_eval_episodic(const princ_model* model, const princ_dataset* ds, size_t ways, size_t shots,
                                 size_t queries, size_t episodes, int novel_only, uint64_t seed,
                                 princ_eval_report** out) {
  return guarded([&] {
    require_arg(model, "model");
    require_arg(ds, "dataset");
    require_arg(out, "out");
    check_same_dataset(*model, *ds);
    const auto m = bound_model(*model, *ds);
    const auto split = princ::split_for(ds->data, model->info.split_seed, std::max<size_t>(model->info.k_shot, 1));
    princ::EpisodeSpec spec{ways, shots, queries, episodes, novel_only != 0};
    princ::Rng rng(seed);
    auto r = std::make_unique<princ_eval_report>();
    r->report = princ::eval_episodic(m, ds->data.utterances, split, spec, rng);
    *out = r.release();
  });
}

double princ_eval_accuracy(const princ_eval_report* r) { return r ? r->report.accuracy : 0.0; }
double princ_eval_seen_accuracy(const princ_eval_report* r) { return r ? r->report.seen_accuracy : 0.0; }
double princ_eval_novel_accuracy(const princ_eval_report* r) { return r ? r->report.novel_accuracy : 0.0; }
size_t princ_eval_total(const princ_eval_report* r) { return r ? r->report.total : 0; }
size_t princ_eval_correct(const princ_eval_report* r) { return r ? r->report.correct : 0; }

princ_status princ_eval_write(const princ_eval_report* r, const char* path) {
  return guarded([&] {
    require_arg(r, "report");
    require_arg(path, "path");
    princ::write_eval_report(path, r->report);
  });
}

princ_status princ_eval_format(const princ_eval_report* r, char* buf, size_t cap, size_t* len) {
  return guarded([&] {
    require_arg(r, "report");
    copy_out(princ::format_eval_table(r->report), buf, cap, len);
  });
}

void princ_eval_report_free(princ_eval_report* r) { delete r; }

void princ_gradcheck_options_default(princ_gradcheck_options* opts) {
  if (opts == nullptr) return;
  const princ::GradcheckOptions d;
  opts->step = d.step;
  opts->dims = d.dims;
  opts->seed = d.seed;
  opts->fixtures = d.fixtures;
  opts->corrupt = nullptr;
}

princ_status princ_gradcheck_run(const princ_gradcheck_options* opts, princ_gradcheck_report** out) {
  return guarded([&] {
    require_arg(opts, "options");
    require_arg(out, "out");
    princ::GradcheckOptions o;
    o.step = opts->step;
    o.dims = opts->dims;
    o.seed = opts->seed;
    o.fixtures = opts->fixtures;
    if (opts->corrupt != nullptr) o.corrupt = opts->corrupt;
    auto r = std::make_unique<princ_gradcheck_report>();
    r->results = princ::run_gradcheck(o);
    *out = r.release();
  });
}

int princ_gradcheck_passed(const princ_gradcheck_report* r) {
  if (r == nullptr) return 0;
  for (const auto& x : r->results) {
    if (!x.passed) return 0;
  }
  return 1;
}

size_t princ_gradcheck_count(const princ_gradcheck_report* r) { return r ? r->results.size() : 0; }

const char* princ_gradcheck_name(const princ_gradcheck_report* r, size_t i) {
  return r && i < r->results.size() ? r->results[i].name.c_str() : nullptr;
}

double princ_gradcheck_max_rel_error(const princ_gradcheck_report* r, size_t i) {
  return r && i < r->results.size() ? r->results[i].max_rel_error : 0.0;
}

princ_status princ_gradcheck_format(const princ_gradcheck_report* r, char* buf, size_t cap, size_t* len) {
  return guarded([&] {
    require_arg(r, "report");
    copy_out(princ::format_gradcheck(r->results), buf, cap, len);
  });
}

void princ_gradcheck_report_free(princ_gradcheck_report* r) { delete r; }

}  // extern "C"
