#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "numeric/rng.hpp"
#include "text/encoder.hpp"
#include "text/tokenizer.hpp"

namespace princ {

// Utterances plus the seen/novel partition of their labels.
struct Dataset {
  std::vector<Utterance> utterances;
  std::vector<std::string> seen;
  std::vector<std::string> novel;
};

// One JSON object per line with string fields "text" and "label". Blank
// lines are skipped; Utterance::index is the record position.
std::vector<Utterance> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<Utterance>& data);

struct Manifest {
  std::vector<std::string> seen;
  std::vector<std::string> novel;
  std::uint64_t seed = 0;
  std::size_t per_intent = 0;  // 0 when not generated
};

Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& m);
// d.jsonl -> d.manifest.json
std::string default_manifest_path(const std::string& data_path);

// Each intent owns 5 signature tokens; all intents share 20 filler tokens.
// Utterance length is uniform in [3, 10]; each position is a signature token
// with probability 0.6, otherwise a filler. Seen intents come first.
Dataset generate_synthetic(std::size_t seen, std::size_t novel, std::size_t per_intent, Rng& rng);

inline constexpr std::size_t kSignatureTokens = 5;
inline constexpr std::size_t kFillerTokens = 20;
inline constexpr double kSignatureProbability = 0.6;
std::string signature_token(std::size_t intent, std::size_t k);
std::string filler_token(std::size_t k);
std::string intent_name(std::size_t intent);

// Header line "h <dim>", then "<index> v_1 ... v_h" per record.
struct LoadedEmbeddings {
  std::size_t dim = 0;
  EmbeddingTable table;
};

LoadedEmbeddings load_embeddings(const std::string& path);
// Every dataset index in [0, n) must be present, and nothing else.
void check_complete(const LoadedEmbeddings& e, std::size_t dataset_size);

}  // namespace princ
