#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>

#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "numeric/tensor.hpp"
#include "text/tokenizer.hpp"

namespace princ {

struct EncoderConfig {
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;
};

void validate(const EncoderConfig& cfg);

namespace param_names {
inline const std::string kEmbedding = "embedding";
inline const std::string kHiddenWeight = "encoder.hidden.weight";
inline const std::string kHiddenBias = "encoder.hidden.bias";
inline const std::string kOutputWeight = "encoder.output.weight";
inline const std::string kOutputBias = "encoder.output.bias";
inline const std::string kProjection = "projection";
}  // namespace param_names

// Parameters of a ModelParams collection recorded on one tape, either as
// trainable leaves or as constants.
class ParamBinding {
 public:
  // Trainable leaves: backward() accumulates into each Param::grad.
  ParamBinding(ad::Tape& tape, ModelParams& params);
  // Constants: nothing flows back.
  ParamBinding(ad::Tape& tape, const ModelParams& params);

  ad::Tape& tape() const { return *tape_; }
  ad::Var operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return vars_.count(name) != 0; }

 private:
  ad::Tape* tape_;
  std::unordered_map<std::string, ad::Var> vars_;
};

// Adds the desk-scale encoder parameters: embedding uniform in [-0.1, 0.1],
// affine weights uniform in +-1/sqrt(fan_in), zero biases.
void init_desk_encoder(ModelParams& params, std::size_t vocab_size, const EncoderConfig& cfg, Rng& rng);

// embedding lookup -> mean pool over every position -> affine -> tanh -> affine.
ad::Var encode(std::span<const std::size_t> ids, const ParamBinding& bound, const EncoderConfig& cfg);

// Maps dataset index to a dense hidden vector produced offline.
using EmbeddingTable = std::map<std::size_t, Tensor>;

// Anything that maps an utterance to a hidden vector in R^h on a tape.
class HiddenEncoder {
 public:
  virtual ~HiddenEncoder() = default;
  virtual std::size_t hidden_dim() const = 0;
  virtual ad::Var encode(const Utterance& u, const ParamBinding& bound) const = 0;
};

class DeskEncoder final : public HiddenEncoder {
 public:
  DeskEncoder(const Vocab& vocab, EncoderConfig cfg) : vocab_(&vocab), cfg_(cfg) {}

  std::size_t hidden_dim() const override { return cfg_.hidden_dim; }
  ad::Var encode(const Utterance& u, const ParamBinding& bound) const override;

 private:
  const Vocab* vocab_;
  EncoderConfig cfg_;
};

// Looks vectors up by Utterance::index; contributes no trainable parameters.
class PrecomputedEncoder final : public HiddenEncoder {
 public:
  PrecomputedEncoder(std::shared_ptr<const EmbeddingTable> table, std::size_t hidden_dim);

  std::size_t hidden_dim() const override { return hidden_dim_; }
  ad::Var encode(const Utterance& u, const ParamBinding& bound) const override;

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  std::size_t hidden_dim_;
};

}  // namespace princ
