#include "evaluation/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "numeric/error.hpp"

namespace princ {

std::uint64_t GfsidSplit::fingerprint() const {
  std::uint64_t h = mix_seed(seed, shots);
  auto fold = [&h](std::span<const std::size_t> xs) {
    h = mix_seed(h, xs.size());
    for (auto x : xs) h = mix_seed(h, x);
  };
  fold(seen_train);
  fold(seen_test);
  fold(novel_support);
  fold(novel_test);
  return h;
}

GfsidSplit make_split(std::span<const Utterance> data, std::span<const std::string> seen,
                      std::span<const std::string> novel, std::size_t shots, Rng& rng) {
  require(shots >= 1, "make_split: shots must be >= 1");
  require(!seen.empty() && !novel.empty(), "make_split: needs at least one seen and one novel intent");
  std::set<std::string> seen_set(seen.begin(), seen.end()), novel_set(novel.begin(), novel.end());
  require(seen_set.size() == seen.size() && novel_set.size() == novel.size(), "make_split: duplicate intent names");
  for (const auto& s : seen) {
    if (novel_set.count(s)) fail(ErrorCode::invalid_argument, "make_split: intent '" + s + "' is both seen and novel");
  }

  std::map<std::string, std::vector<std::size_t>> by_intent;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& label = data[i].label;
    if (!seen_set.count(label) && !novel_set.count(label)) {
      fail(ErrorCode::invalid_argument, "make_split: label '" + label + "' is neither seen nor novel");
    }
    by_intent[label].push_back(i);
  }

  GfsidSplit split;
  split.seen.assign(seen.begin(), seen.end());
  split.novel.assign(novel.begin(), novel.end());
  split.shots = shots;
  split.seed = rng.seed();

  for (const auto& name : seen) {
    auto pool = by_intent[name];
    if (pool.size() < 2) {
      fail(ErrorCode::invalid_argument, "make_split: seen intent '" + name + "' needs at least 2 instances");
    }
    rng.shuffle(pool);
    const auto n_test = std::max<std::size_t>(1, pool.size() / 5);
    split.seen_test.insert(split.seen_test.end(), pool.begin(), pool.begin() + n_test);
    split.seen_train.insert(split.seen_train.end(), pool.begin() + n_test, pool.end());
  }
  for (const auto& name : novel) {
    const auto& pool = by_intent[name];
    if (pool.size() <= shots) {
      fail(ErrorCode::invalid_argument, "make_split: novel intent '" + name + "' has " + std::to_string(pool.size()) +
                                            " instances, needs more than " + std::to_string(shots));
    }
    const auto picks = rng.sample_without_replacement(pool.size(), shots);
    std::vector<bool> is_support(pool.size(), false);
    for (auto k : picks) is_support[k] = true;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      (is_support[k] ? split.novel_support : split.novel_test).push_back(pool[k]);
    }
  }
  for (auto* v : {&split.seen_train, &split.seen_test, &split.novel_support, &split.novel_test}) {
    std::sort(v->begin(), v->end());
  }
  return split;
}

std::vector<Utterance> gather(std::span<const Utterance> data, std::span<const std::size_t> indices) {
  std::vector<Utterance> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(data[i]);
  return out;
}

void validate(const EpisodeSpec& spec) {
  require(spec.ways >= 2, "episodes need at least 2 ways");
  require(spec.shots >= 1, "episodes need at least 1 shot");
  require(spec.queries_per_class >= 1, "episodes need at least 1 query per class");
  require(spec.episodes >= 1, "at least one episode is required");
}

EvalReport score_predictions(std::string mode, std::vector<std::string> intents, std::size_t seen_count,
                             std::vector<Prediction> predictions) {
  const auto n = intents.size();
  EvalReport r;
  r.mode = std::move(mode);
  r.intents = std::move(intents);
  r.seen_count = seen_count;
  r.confusion.assign(n, std::vector<std::size_t>(n, 0));
  r.per_intent_total.assign(n, 0);
  std::vector<std::size_t> per_correct(n, 0);
  std::size_t seen_correct = 0, novel_correct = 0;
  for (const auto& p : predictions) {
    if (p.truth >= n || p.predicted >= n) fail(ErrorCode::state, "prediction refers to an unknown intent");
    ++r.confusion[p.truth][p.predicted];
    ++r.per_intent_total[p.truth];
    const bool ok = p.truth == p.predicted;
    per_correct[p.truth] += ok;
    r.correct += ok;
    if (p.truth < seen_count) {
      ++r.seen_total;
      seen_correct += ok;
    } else {
      ++r.novel_total;
      novel_correct += ok;
    }
  }
  r.total = predictions.size();
  r.predictions = std::move(predictions);
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : double(a) / double(b); };
  r.accuracy = ratio(r.correct, r.total);
  r.seen_accuracy = ratio(seen_correct, r.seen_total);
  r.novel_accuracy = ratio(novel_correct, r.novel_total);
  r.per_intent_accuracy.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.per_intent_accuracy[i] = ratio(per_correct[i], r.per_intent_total[i]);
  return r;
}

EvalReport evaluate_indices(const IntentModel& model, std::span<const Utterance> data,
                            std::span<const std::size_t> indices) {
  if (indices.empty()) fail(ErrorCode::invalid_argument, "evaluation: empty test pool");
  const auto& store = model.prototypes;
  std::vector<Prediction> preds;
  preds.reserve(indices.size());
  for (auto i : indices) {
    const auto& u = data[i];
    const auto truth = store.index_of(u.label);
    if (truth == kNoIndex) fail(ErrorCode::state, "evaluation: test label '" + u.label + "' has no prototype");
    const auto c = classify(embed(model, u), store);
    preds.push_back({truth, c.index});
  }
  return score_predictions("noneps", store.intents(), store.seen_count(), std::move(preds));
}

EvalReport eval_nonepisodic(const IntentModel& model, std::span<const Utterance> data, const GfsidSplit& split) {
  std::vector<std::size_t> pool = split.seen_test;
  pool.insert(pool.end(), split.novel_test.begin(), split.novel_test.end());
  auto r = evaluate_indices(model, data, pool);
  r.split_fingerprint = split.fingerprint();
  return r;
}

EvalReport eval_episodic(const IntentModel& model, std::span<const Utterance> data, const GfsidSplit& split,
                         const EpisodeSpec& spec, Rng& rng) {
  validate(spec);
  const auto& store = model.prototypes;
  const auto per_class = spec.shots + spec.queries_per_class;

  // Candidate intents with their evaluation pools, in store order.
  std::vector<std::size_t> candidates;
  std::vector<std::vector<std::size_t>> pools(store.size());
  for (const auto* src : {&split.seen_test, &split.novel_test}) {
    for (auto i : *src) {
      const auto k = store.index_of(data[i].label);
      if (k == kNoIndex) fail(ErrorCode::state, "evaluation: test label '" + data[i].label + "' has no prototype");
      pools[k].push_back(i);
    }
  }
  for (std::size_t k = 0; k < store.size(); ++k) {
    if (spec.novel_only && store[k].stage != Stage::novel) continue;
    if (pools[k].size() < per_class) {
      fail(ErrorCode::invalid_argument, "episodic evaluation: intent '" + store[k].intent + "' has " +
                                            std::to_string(pools[k].size()) + " test instances, needs " +
                                            std::to_string(per_class));
    }
    candidates.push_back(k);
  }
  if (candidates.size() < spec.ways) {
    fail(ErrorCode::invalid_argument, "episodic evaluation: " + std::to_string(spec.ways) + " ways requested but only " +
                                          std::to_string(candidates.size()) + " intents are eligible");
  }

  // The model is frozen, so every pool item is projected once up front.
  std::map<std::size_t, Tensor> projected;
  for (auto k : candidates) {
    for (auto i : pools[k]) projected.emplace(i, embed(model, data[i]));
  }

  const std::uint64_t base = rng.next_u64();
  std::vector<Prediction> preds;
  std::vector<double> episode_acc;
  episode_acc.reserve(spec.episodes);
  for (std::size_t ep = 0; ep < spec.episodes; ++ep) {
    Rng er(mix_seed(base, ep));
    const auto ways = er.sample_without_replacement(candidates.size(), spec.ways);
    std::vector<Tensor> protos;
    std::vector<std::vector<std::size_t>> queries;
    for (auto w : ways) {
      const auto& pool = pools[candidates[w]];
      const auto picks = er.sample_without_replacement(pool.size(), per_class);
      Tensor mean = Tensor::zeros_like(projected.at(pool[picks[0]]));
      for (std::size_t s = 0; s < spec.shots; ++s) {
        const auto& v = projected.at(pool[picks[s]]);
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
      }
      for (auto& x : mean.data()) x /= static_cast<double>(spec.shots);
      protos.push_back(std::move(mean));
      std::vector<std::size_t> q;
      for (std::size_t s = spec.shots; s < per_class; ++s) q.push_back(pool[picks[s]]);
      queries.push_back(std::move(q));
    }
    std::size_t correct = 0, count = 0;
    for (std::size_t w = 0; w < ways.size(); ++w) {
      for (auto i : queries[w]) {
        const auto pred = nearest_prototype(projected.at(i), protos);
        preds.push_back({candidates[ways[w]], candidates[ways[pred]]});
        correct += pred == w;
        ++count;
      }
    }
    episode_acc.push_back(double(correct) / double(count));
  }

  auto r = score_predictions("eps", store.intents(), store.seen_count(), std::move(preds));
  r.episodes = spec.episodes;
  double mean = 0.0;
  for (double a : episode_acc) mean += a;
  mean /= double(episode_acc.size());
  double var = 0.0;
  for (double a : episode_acc) var += (a - mean) * (a - mean);
  r.episode_mean = mean;
  r.episode_stddev = std::sqrt(var / double(episode_acc.size()));
  r.episode_accuracy = std::move(episode_acc);
  r.split_fingerprint = split.fingerprint();
  return r;
}

std::vector<ForgettingRow> forgetting_diagnostics(const std::map<Preservation, EvalReport>& reports) {
  auto base = reports.find(Preservation::none);
  if (base == reports.end()) fail(ErrorCode::invalid_argument, "forgetting diagnostics need a 'none' baseline report");
  std::vector<ForgettingRow> rows;
  for (const auto& [mode, r] : reports) {
    if (r.split_fingerprint != base->second.split_fingerprint || r.mode != base->second.mode ||
        r.intents != base->second.intents) {
      fail(ErrorCode::invalid_argument, std::string("report for '") + to_string(mode) +
                                            "' was computed on a different split or protocol than the baseline");
    }
    ForgettingRow row;
    row.mode = mode;
    row.seen_accuracy = r.seen_accuracy;
    row.novel_accuracy = r.novel_accuracy;
    row.seen_delta = 100.0 * (r.seen_accuracy - base->second.seen_accuracy);
    row.novel_delta = 100.0 * (r.novel_accuracy - base->second.novel_accuracy);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace princ
