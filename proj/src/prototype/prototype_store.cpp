#include "prototype/prototype_store.hpp"

#include <set>

#include "numeric/error.hpp"
#include "numeric/ops.hpp"
#include "text/tokenizer.hpp"

namespace princ {

const char* to_string(Stage s) { return s == Stage::seen ? "seen" : "novel"; }

std::string prototype_param_name(const std::string& intent) { return "prototype/" + intent; }

void PrototypeStore::add(const std::string& intent, Tensor vector, Stage stage) {
  require(!intent.empty(), "prototype intent name is empty");
  if (index_of(intent) != kNoIndex) fail(ErrorCode::invalid_argument, "duplicate intent '" + intent + "' in prototype store");
  if (vector.rank() != 1) fail(ErrorCode::dimension_mismatch, "prototype must be a vector, got " + shape_string(vector.dims()));
  if (!entries_.empty() && vector.size() != dim()) {
    fail(ErrorCode::dimension_mismatch, "prototype for '" + intent + "' has dim " + std::to_string(vector.size()) +
                                            ", store dim is " + std::to_string(dim()));
  }
  if (l2_norm(vector.data()) <= kEpsilonNorm) {
    fail(ErrorCode::degenerate_vector, "prototype for '" + intent + "' is degenerate (norm below 1e-12)");
  }
  if (stage == Stage::seen && novel_count() > 0) {
    fail(ErrorCode::state, "seen prototype '" + intent + "' cannot follow novel prototypes");
  }
  entries_.push_back(PrototypeEntry{intent, Param(prototype_param_name(intent), std::move(vector)), stage});
}

std::size_t PrototypeStore::seen_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.stage == Stage::seen;
  return n;
}

std::size_t PrototypeStore::dim() const {
  if (entries_.empty()) fail(ErrorCode::state, "empty prototype store has no dimension");
  return entries_.front().param.value.size();
}

std::size_t PrototypeStore::index_of(const std::string& intent) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].intent == intent) return i;
  }
  return kNoIndex;
}

std::vector<std::string> PrototypeStore::intents() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.intent);
  return out;
}

std::vector<Param*> PrototypeStore::params() {
  std::vector<Param*> out;
  for (auto& e : entries_) out.push_back(&e.param);
  return out;
}

void PrototypeStore::check_invariants() const {
  std::set<std::string> names;
  bool novel_seen = false;
  for (const auto& e : entries_) {
    if (!names.insert(e.intent).second) fail(ErrorCode::state, "duplicate intent '" + e.intent + "'");
    if (e.param.value.size() != dim()) fail(ErrorCode::dimension_mismatch, "prototype dims differ within store");
    if (l2_norm(e.param.value.data()) <= kEpsilonNorm) {
      fail(ErrorCode::degenerate_vector, "prototype for '" + e.intent + "' is degenerate");
    }
    if (e.stage == Stage::novel) novel_seen = true;
    if (e.stage == Stage::seen && novel_seen) fail(ErrorCode::state, "seen prototype after novel block");
  }
}

Tensor project(const Tensor& hidden, const Tensor& projection) { return matvec(projection, hidden); }

ad::Var project(ad::Var hidden, ad::Var projection) { return ad::matvec(projection, hidden); }

PrototypeStore init_seen_prototypes(std::span<const std::string> intents, std::size_t dim, Rng& rng) {
  require(!intents.empty(), "init_seen_prototypes: no intents");
  require(dim >= 1, "init_seen_prototypes: dim must be >= 1");
  PrototypeStore store;
  for (const auto& name : intents) {
    Tensor v({dim});
    double norm = 0.0;
    // Redraw the (measure-zero) all-tiny case instead of normalizing noise.
    while (norm <= kEpsilonNorm) {
      for (auto& x : v.data()) x = rng.uniform(-0.5, 0.5);
      norm = l2_norm(v.data());
    }
    for (auto& x : v.data()) x /= norm;
    store.add(name, std::move(v), Stage::seen);
  }
  return store;
}

PrototypeStore init_novel_prototypes(const PrototypeStore& store,
                                     const SupportSets& supports) {
  require(!supports.empty(), "init_novel_prototypes: no novel intents");
  PrototypeStore out = store;
  const std::size_t dim = store.empty() ? supports.begin()->second.at(0).size() : store.dim();
  for (const auto& [intent, vectors] : supports) {
    if (vectors.empty()) fail(ErrorCode::invalid_argument, "novel intent '" + intent + "' has no support vectors");
    if (store.index_of(intent) != kNoIndex) {
      fail(ErrorCode::invalid_argument, "novel intent '" + intent + "' collides with an existing prototype");
    }
    Tensor mean({dim});
    for (const auto& v : vectors) {
      if (v.size() != dim) {
        fail(ErrorCode::dimension_mismatch, "support vector for '" + intent + "' has dim " + std::to_string(v.size()) +
                                                ", expected " + std::to_string(dim));
      }
      for (std::size_t i = 0; i < dim; ++i) mean[i] += v[i];
    }
    for (auto& x : mean.data()) x /= static_cast<double>(vectors.size());
    out.add(intent, std::move(mean), Stage::novel);
  }
  return out;
}

std::size_t nearest_prototype(const Tensor& v, std::span<const Tensor> prototypes, std::vector<double>* scores) {
  if (prototypes.empty()) fail(ErrorCode::invalid_argument, "classify: empty prototype set");
  if (l2_norm(v.data()) <= kEpsilonNorm) fail(ErrorCode::degenerate_vector, "classify: degenerate query vector");
  std::size_t best = 0;
  double best_score = -2.0;
  if (scores) scores->clear();
  for (std::size_t i = 0; i < prototypes.size(); ++i) {
    const double s = cosine_sim(v, prototypes[i]);
    if (scores) scores->push_back(s);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

Classification classify(const Tensor& v, const PrototypeStore& store) {
  if (store.empty()) fail(ErrorCode::invalid_argument, "classify: empty prototype store");
  std::vector<Tensor> protos;
  protos.reserve(store.size());
  for (const auto& e : store.entries()) protos.push_back(e.param.value);
  Classification c;
  c.index = nearest_prototype(v, protos, &c.scores);
  c.intent = store[c.index].intent;
  return c;
}

}  // namespace princ
