#pragma once

#include <utility>
#include <span>
#include <string>
#include <vector>

#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "numeric/tensor.hpp"

namespace princ {

enum class Stage : std::uint8_t { seen = 0, novel = 1 };

const char* to_string(Stage s);

struct PrototypeEntry {
  std::string intent;
  Param param;  // named "prototype/<intent>"
  Stage stage;
};

std::string prototype_param_name(const std::string& intent);

// One trainable vector per intent. Seen entries always precede novel ones.
class PrototypeStore {
 public:
  void add(const std::string& intent, Tensor vector, Stage stage);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t seen_count() const;
  std::size_t novel_count() const { return size() - seen_count(); }
  std::size_t dim() const;

  const PrototypeEntry& operator[](std::size_t i) const { return entries_.at(i); }
  PrototypeEntry& operator[](std::size_t i) { return entries_.at(i); }
  const std::vector<PrototypeEntry>& entries() const { return entries_; }

  // Index of intent, or kNoIndex when absent.
  std::size_t index_of(const std::string& intent) const;
  std::vector<std::string> intents() const;
  std::vector<Param*> params();

  // Throws when any invariant (unique names, common dim, norms, ordering) is violated.
  void check_invariants() const;

 private:
  std::vector<PrototypeEntry> entries_;
};

// v = W h
Tensor project(const Tensor& hidden, const Tensor& projection);
ad::Var project(ad::Var hidden, ad::Var projection);

// Entries uniform in [-0.5, 0.5], renormalized to unit length, tagged seen.
PrototypeStore init_seen_prototypes(std::span<const std::string> intents, std::size_t dim, Rng& rng);

// Per-intent support vectors in prototype space, in intent order.
using SupportSets = std::vector<std::pair<std::string, std::vector<Tensor>>>;

// Appends one novel prototype per intent, the mean of its projected supports.
PrototypeStore init_novel_prototypes(const PrototypeStore& store,
                                     const SupportSets& supports);

struct Classification {
  std::size_t index = 0;
  std::string intent;
  std::vector<double> scores;
};

// Argmax of cosine similarity over every prototype; ties go to the lowest index.
Classification classify(const Tensor& v, const PrototypeStore& store);
// Same rule over an ad-hoc list of prototypes (episode-local prototypes).
std::size_t nearest_prototype(const Tensor& v, std::span<const Tensor> prototypes, std::vector<double>* scores = nullptr);

}  // namespace princ
