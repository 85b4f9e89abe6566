#include "text/tokenizer.hpp"

#include <algorithm>
#include <cctype>

#include "numeric/error.hpp"

namespace princ {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

bool is_terminal_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

}  // namespace

void validate(const Utterance& u) {
  require(!is_blank(u.text), "utterance text is empty");
  require(!u.label.empty(), "utterance label is empty");
}

std::string apply_template(std::string_view text) {
  require(!is_blank(text), "apply_template: empty text");
  std::string out(text);
  out += ". The intent is to ";
  out += kMaskToken;
  return out;
}

std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) break;
    std::string_view word = s.substr(i, j - i);
    i = j;
    if (word == kMaskToken) {
      out.emplace_back(word);
      continue;
    }
    std::size_t end = word.size();
    while (end > 0 && is_terminal_punct(word[end - 1])) --end;
    if (end > 0) {
      std::string w(word.substr(0, end));
      std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
      out.push_back(std::move(w));
    }
    for (std::size_t k = end; k < word.size(); ++k) out.emplace_back(1, word[k]);
  }
  return out;
}

Vocab::Vocab() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
  add(std::string(kMaskToken));
}

Vocab Vocab::build(std::span<const Utterance> corpus) {
  Vocab v;
  for (const auto& u : corpus) {
    for (auto& tok : split_tokens(apply_template(u.text))) v.add(tok);
  }
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 3 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken || tokens[kMask] != kMaskToken) {
    fail(ErrorCode::format, "vocab does not start with the reserved tokens [PAD] [UNK] [MASK]");
  }
  Vocab v;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    if (v.ids_.count(tokens[i])) fail(ErrorCode::format, "vocab token '" + tokens[i] + "' appears twice");
    v.add(tokens[i]);
  }
  return v;
}

std::size_t Vocab::add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::size_t Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<std::size_t> tokenize(std::string_view templated, const Vocab& vocab) {
  std::vector<std::size_t> ids;
  for (const auto& tok : split_tokens(templated)) ids.push_back(vocab.id(tok));
  return ids;
}

}  // namespace princ
