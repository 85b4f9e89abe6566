#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "text/encoder.hpp"
#include "text/tokenizer.hpp"
#include "test_support.hpp"

using namespace princ;

namespace {

Tensor run_encode(const std::vector<std::size_t>& ids, ModelParams& params, const EncoderConfig& cfg) {
  ad::Tape tape;
  const ParamBinding bound(tape, static_cast<const ModelParams&>(params));
  return encode(ids, bound, cfg).value();
}

}  // namespace

TEST(Template, Examples) {
  EXPECT_EQ(apply_template("play a song"), "play a song. The intent is to [MASK]");
  EXPECT_EQ(apply_template("a"), "a. The intent is to [MASK]");
  EXPECT_EQ(apply_template("book a flight"), "book a flight. The intent is to [MASK]");
}

TEST(Tokenize, SplitsTemplate) {
  const std::vector<std::string> expected{"a", ".", "the", "intent", "is", "to", "[MASK]"};
  EXPECT_EQ(split_tokens("a. The intent is to [MASK]"), expected);
}

TEST(Tokenize, IdsFollowVocab) {
  const std::vector<Utterance> corpus{{"a", "x", 0}};
  const Vocab v = Vocab::build(corpus);
  const auto ids = tokenize("a. The intent is to [MASK]", v);
  ASSERT_EQ(ids.size(), 7u);
  const std::vector<std::string> expected{"a", ".", "the", "intent", "is", "to", "[MASK]"};
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(v.token(ids[i]), expected[i]);
  EXPECT_EQ(ids.back(), Vocab::kMask);
}

TEST(Tokenize, UnknownFallsBackToUnk) {
  const std::vector<Utterance> corpus{{"play jazz", "music", 0}};
  const Vocab v = Vocab::build(corpus);
  const auto ids = tokenize(apply_template("play polka"), v);
  EXPECT_EQ(ids[0], v.id("play"));
  EXPECT_EQ(ids[1], Vocab::kUnk);
}

TEST(Tokenize, Deterministic) {
  const std::vector<Utterance> corpus{{"set an alarm for six", "alarm", 0}};
  const Vocab v = Vocab::build(corpus);
  const auto s = apply_template("set an alarm for six");
  EXPECT_EQ(tokenize(s, v), tokenize(s, v));
}

TEST(Utterance, ValidationRejectsBlank) {
  EXPECT_PRINC_ERROR(validate(Utterance{"   ", "x", 0}), ErrorCode::invalid_argument);
  EXPECT_PRINC_ERROR(validate(Utterance{"hi", "", 0}), ErrorCode::invalid_argument);
}

TEST(Encode, ZeroParamsGiveZeroOutput) {
  const EncoderConfig cfg{4, 3};
  ModelParams params;
  Rng rng(1);
  init_desk_encoder(params, 10, cfg, rng);
  for (auto& p : params.items()) p.value.fill(0.0);
  const Tensor h = run_encode({3, 4, 5}, params, cfg);
  ASSERT_EQ(h.size(), 3u);
  for (double x : h.data()) EXPECT_EQ(x, 0.0);
}

TEST(Encode, SingleTokenPoolsToItsEmbedding) {
  const EncoderConfig cfg{3, 2};
  ModelParams params;
  Rng rng(2);
  init_desk_encoder(params, 6, cfg, rng);
  const Tensor& emb = params.get(param_names::kEmbedding).value;
  const Tensor& w1 = params.get(param_names::kHiddenWeight).value;
  const Tensor& b1 = params.get(param_names::kHiddenBias).value;
  const Tensor& w2 = params.get(param_names::kOutputWeight).value;
  const Tensor& b2 = params.get(param_names::kOutputBias).value;
  const std::size_t tok = 4;
  // Hand composition: W2 tanh(W1 e + b1) + b2
  std::vector<double> hidden(w1.rows());
  for (std::size_t r = 0; r < w1.rows(); ++r) {
    double s = b1[r];
    for (std::size_t c = 0; c < w1.cols(); ++c) s += w1.at(r, c) * emb.at(tok, c);
    hidden[r] = std::tanh(s);
  }
  const Tensor h = run_encode({tok}, params, cfg);
  for (std::size_t r = 0; r < w2.rows(); ++r) {
    double s = b2[r];
    for (std::size_t c = 0; c < w2.cols(); ++c) s += w2.at(r, c) * hidden[c];
    EXPECT_NEAR(h[r], s, 1e-14);
  }
}

TEST(Encode, PermutationInvariant) {
  const EncoderConfig cfg{5, 4};
  ModelParams params;
  Rng rng(3);
  init_desk_encoder(params, 12, cfg, rng);
  std::vector<std::size_t> ids{1, 7, 3, 3, 9, 11};
  const Tensor a = run_encode(ids, params, cfg);
  std::reverse(ids.begin(), ids.end());
  std::swap(ids[0], ids[2]);
  const Tensor b = run_encode(ids, params, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(Encode, OutputDimEqualsHiddenDim) {
  Rng rng(4);
  for (std::size_t h : {1u, 2u, 7u, 64u}) {
    const EncoderConfig cfg{3, h};
    ModelParams params;
    init_desk_encoder(params, 5, cfg, rng);
    EXPECT_EQ(run_encode({0, 2}, params, cfg).size(), h);
  }
}

TEST(Encode, DeskEncoderUsesTemplate) {
  const std::vector<Utterance> corpus{{"play jazz", "music", 0}};
  const Vocab v = Vocab::build(corpus);
  const EncoderConfig cfg{4, 3};
  ModelParams params;
  Rng rng(5);
  init_desk_encoder(params, v.size(), cfg, rng);
  const DeskEncoder enc(v, cfg);
  ad::Tape tape;
  const ParamBinding bound(tape, static_cast<const ModelParams&>(params));
  const Tensor via_encoder = enc.encode(corpus[0], bound).value();
  const Tensor direct = run_encode(tokenize(apply_template("play jazz"), v), params, cfg);
  EXPECT_TRUE(via_encoder.identical(direct));
}

TEST(Encode, PrecomputedLookup) {
  auto table = std::make_shared<EmbeddingTable>();
  (*table)[3] = Tensor::vector({1, 2, 3});
  const PrecomputedEncoder enc(table, 3);
  ModelParams params;
  ad::Tape tape;
  const ParamBinding bound(tape, static_cast<const ModelParams&>(params));
  EXPECT_TRUE(enc.encode(Utterance{"x", "y", 3}, bound).value().identical(Tensor::vector({1, 2, 3})));
}
