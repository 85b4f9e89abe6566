#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace princ {

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

// One labeled utterance. index is the zero-based position in its dataset
// file, used to look up precomputed embeddings.
struct Utterance {
  std::string text;
  std::string label;
  std::size_t index = kNoIndex;
};

// Checks the Utterance invariants (non-blank text, non-empty label).
void validate(const Utterance& u);

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kPadToken = "[PAD]";

// "<text>. The intent is to [MASK]"
std::string apply_template(std::string_view text);

// Lowercases, separates trailing punctuation into its own tokens, splits on
// whitespace. The literal [MASK] token is kept verbatim.
std::vector<std::string> split_tokens(std::string_view s);

class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kMask = 2;

  Vocab();
  // Adds tokens of the templated form of every utterance, in first-seen order.
  static Vocab build(std::span<const Utterance> corpus);
  // Restores a vocab from its id-ordered token list (checkpoint load).
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::size_t add(const std::string& token);
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

std::vector<std::size_t> tokenize(std::string_view templated, const Vocab& vocab);

}  // namespace princ
