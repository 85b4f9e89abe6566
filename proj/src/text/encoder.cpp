#include "text/encoder.hpp"

#include <cmath>

#include "numeric/error.hpp"

namespace princ {

void validate(const EncoderConfig& cfg) {
  require(cfg.embedding_dim >= 1 && cfg.hidden_dim >= 1, "encoder dims must be >= 1");
}

ParamBinding::ParamBinding(ad::Tape& tape, ModelParams& params) : tape_(&tape) {
  for (auto& p : params.items()) vars_.emplace(p.name, tape.param(p));
}

ParamBinding::ParamBinding(ad::Tape& tape, const ModelParams& params) : tape_(&tape) {
  for (const auto& p : params.items()) vars_.emplace(p.name, tape.constant(p.value));
}

ad::Var ParamBinding::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) fail(ErrorCode::state, "parameter '" + name + "' is not bound");
  return it->second;
}

namespace {

Tensor uniform_tensor(std::vector<std::size_t> dims, double bound, Rng& rng) {
  Tensor t(std::move(dims));
  for (auto& x : t.data()) x = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

void init_desk_encoder(ModelParams& params, std::size_t vocab_size, const EncoderConfig& cfg, Rng& rng) {
  validate(cfg);
  require(vocab_size >= 1, "init_desk_encoder: empty vocab");
  namespace pn = param_names;
  const auto e = cfg.embedding_dim, h = cfg.hidden_dim;
  params.add(pn::kEmbedding, uniform_tensor({vocab_size, e}, 0.1, rng));
  params.add(pn::kHiddenWeight, uniform_tensor({h, e}, 1.0 / std::sqrt(double(e)), rng));
  params.add(pn::kHiddenBias, Tensor({h}));
  params.add(pn::kOutputWeight, uniform_tensor({h, h}, 1.0 / std::sqrt(double(h)), rng));
  params.add(pn::kOutputBias, Tensor({h}));
}

ad::Var encode(std::span<const std::size_t> ids, const ParamBinding& bound, const EncoderConfig& cfg) {
  namespace pn = param_names;
  require(!ids.empty(), "encode: empty token sequence");
  const auto table = bound[pn::kEmbedding];
  const auto vocab_size = table.value().rows();
  for (auto id : ids) {
    if (id >= vocab_size) {
      fail(ErrorCode::invalid_argument,
           "encode: token id " + std::to_string(id) + " out of range for vocab of " + std::to_string(vocab_size));
    }
  }
  if (table.value().cols() != cfg.embedding_dim) {
    fail(ErrorCode::dimension_mismatch, "encode: embedding table " + shape_string(table.value().dims()) +
                                            " does not match embedding_dim " + std::to_string(cfg.embedding_dim));
  }
  auto pooled = ad::mean_rows(table, ids);
  auto hidden = ad::tanh(ad::add(ad::matvec(bound[pn::kHiddenWeight], pooled), bound[pn::kHiddenBias]));
  auto out = ad::add(ad::matvec(bound[pn::kOutputWeight], hidden), bound[pn::kOutputBias]);
  if (out.value().size() != cfg.hidden_dim) {
    fail(ErrorCode::dimension_mismatch, "encode: output has " + std::to_string(out.value().size()) +
                                            " entries, hidden_dim is " + std::to_string(cfg.hidden_dim));
  }
  return out;
}

ad::Var DeskEncoder::encode(const Utterance& u, const ParamBinding& bound) const {
  const auto ids = tokenize(apply_template(u.text), *vocab_);
  return princ::encode(ids, bound, cfg_);
}

PrecomputedEncoder::PrecomputedEncoder(std::shared_ptr<const EmbeddingTable> table, std::size_t hidden_dim)
    : table_(std::move(table)), hidden_dim_(hidden_dim) {
  require(table_ != nullptr, "PrecomputedEncoder: no embedding table");
  require(hidden_dim_ >= 1, "PrecomputedEncoder: hidden_dim must be >= 1");
}

ad::Var PrecomputedEncoder::encode(const Utterance& u, const ParamBinding& bound) const {
  auto it = table_->find(u.index);
  if (it == table_->end()) {
    fail(ErrorCode::state, "no precomputed embedding for utterance index " +
                               (u.index == kNoIndex ? std::string("<unset>") : std::to_string(u.index)));
  }
  if (it->second.size() != hidden_dim_) {
    fail(ErrorCode::dimension_mismatch, "precomputed embedding has " + std::to_string(it->second.size()) +
                                            " entries, expected " + std::to_string(hidden_dim_));
  }
  return bound.tape().constant(it->second);
}

}  // namespace princ
