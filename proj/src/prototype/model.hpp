#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "losses/losses.hpp"
#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "prototype/prototype_store.hpp"
#include "text/encoder.hpp"
#include "text/tokenizer.hpp"

namespace princ {

enum class EncoderKind : std::uint8_t { desk = 0, precomputed = 1 };

// Encoder, projection W and prototype store: everything that maps an
// utterance to a prediction.
struct IntentModel {
  EncoderKind encoder_kind = EncoderKind::desk;
  EncoderConfig encoder;
  std::size_t prototype_dim = 32;
  Vocab vocab;
  ModelParams params;  // encoder weights (desk only) and the projection
  PrototypeStore prototypes;
  // Required when encoder_kind == precomputed; not serialized.
  std::shared_ptr<const EmbeddingTable> embeddings;

  std::unique_ptr<HiddenEncoder> make_encoder() const;
  // Every trainable parameter: params followed by prototypes in store order.
  std::vector<Param*> trainable();
  std::vector<const Param*> all_params() const;
};

// Builds an untrained model: desk encoder (or precomputed lookup), projection
// uniform in +-1/sqrt(h), seen prototypes from init_seen_prototypes.
IntentModel init_model(const Vocab& vocab, const EncoderConfig& encoder, std::size_t prototype_dim,
                       std::span<const std::string> seen_intents, Rng& rng,
                       std::shared_ptr<const EmbeddingTable> embeddings = nullptr);

// A model recorded on one tape for a single forward/backward pass.
class ModelBinding {
 public:
  // Trainable binding; gradients land in model params and prototypes.
  ModelBinding(ad::Tape& tape, IntentModel& model);
  // Frozen binding.
  ModelBinding(ad::Tape& tape, const IntentModel& model);

  ad::Var hidden(const Utterance& u) const;
  // v = W h(u)
  ad::Var embed(const Utterance& u) const;
  std::span<const ad::Var> prototypes() const { return prototypes_; }
  // Leading `count` prototypes (the seen block).
  std::span<const ad::Var> prototypes(std::size_t count) const { return std::span(prototypes_).first(count); }
  // All bound params and prototypes by name, for the parameter penalty.
  std::vector<NamedVar> named() const;

 private:
  const IntentModel* model_;
  ParamBinding params_;
  std::vector<ad::Var> prototypes_;
  std::vector<std::string> prototype_names_;
  std::unique_ptr<HiddenEncoder> encoder_;
};

// Frozen forward pass to prototype space.
Tensor embed(const IntentModel& model, const Utterance& u);
std::vector<Tensor> embed_all(const IntentModel& model, std::span<const Utterance> data);

}  // namespace princ
