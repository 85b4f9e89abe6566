#include "prototype/model.hpp"

#include <cmath>

#include "numeric/error.hpp"

namespace princ {

std::unique_ptr<HiddenEncoder> IntentModel::make_encoder() const {
  if (encoder_kind == EncoderKind::precomputed) {
    if (!embeddings) fail(ErrorCode::state, "model uses precomputed embeddings but none are loaded");
    return std::make_unique<PrecomputedEncoder>(embeddings, encoder.hidden_dim);
  }
  return std::make_unique<DeskEncoder>(vocab, encoder);
}

std::vector<Param*> IntentModel::trainable() {
  std::vector<Param*> out;
  for (auto& p : params.items()) out.push_back(&p);
  for (auto* p : prototypes.params()) out.push_back(p);
  return out;
}

std::vector<const Param*> IntentModel::all_params() const {
  std::vector<const Param*> out;
  for (const auto& p : params.items()) out.push_back(&p);
  for (const auto& e : prototypes.entries()) out.push_back(&e.param);
  return out;
}

IntentModel init_model(const Vocab& vocab, const EncoderConfig& encoder, std::size_t prototype_dim,
                       std::span<const std::string> seen_intents, Rng& rng,
                       std::shared_ptr<const EmbeddingTable> embeddings) {
  validate(encoder);
  require(prototype_dim >= 1, "prototype dim must be >= 1");
  IntentModel m;
  m.encoder = encoder;
  m.prototype_dim = prototype_dim;
  m.vocab = vocab;
  if (embeddings) {
    m.encoder_kind = EncoderKind::precomputed;
    m.embeddings = std::move(embeddings);
  } else {
    init_desk_encoder(m.params, vocab.size(), encoder, rng);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(encoder.hidden_dim));
  Tensor w({prototype_dim, encoder.hidden_dim});
  for (auto& x : w.data()) x = rng.uniform(-bound, bound);
  m.params.add(param_names::kProjection, std::move(w));
  m.prototypes = init_seen_prototypes(seen_intents, prototype_dim, rng);
  return m;
}

ModelBinding::ModelBinding(ad::Tape& tape, IntentModel& model)
    : model_(&model), params_(tape, model.params), encoder_(model.make_encoder()) {
  for (std::size_t i = 0; i < model.prototypes.size(); ++i) {
    prototypes_.push_back(tape.param(model.prototypes[i].param));
    prototype_names_.push_back(model.prototypes[i].param.name);
  }
}

ModelBinding::ModelBinding(ad::Tape& tape, const IntentModel& model)
    : model_(&model), params_(tape, model.params), encoder_(model.make_encoder()) {
  for (const auto& e : model.prototypes.entries()) {
    prototypes_.push_back(tape.constant(e.param.value));
    prototype_names_.push_back(e.param.name);
  }
}

ad::Var ModelBinding::hidden(const Utterance& u) const { return encoder_->encode(u, params_); }

ad::Var ModelBinding::embed(const Utterance& u) const {
  return project(hidden(u), params_[param_names::kProjection]);
}

std::vector<NamedVar> ModelBinding::named() const {
  std::vector<NamedVar> out;
  for (const auto& p : model_->params.items()) out.push_back({p.name, params_[p.name]});
  for (std::size_t i = 0; i < prototypes_.size(); ++i) out.push_back({prototype_names_[i], prototypes_[i]});
  return out;
}

Tensor embed(const IntentModel& model, const Utterance& u) {
  ad::Tape tape;
  ModelBinding bound(tape, model);
  return bound.embed(u).value();
}

std::vector<Tensor> embed_all(const IntentModel& model, std::span<const Utterance> data) {
  std::vector<Tensor> out;
  out.reserve(data.size());
  // Fresh tape per item keeps memory flat; binding the params is cheap.
  for (const auto& u : data) out.push_back(embed(model, u));
  return out;
}

}  // namespace princ
