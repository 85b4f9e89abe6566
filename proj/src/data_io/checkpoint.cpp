#include "data_io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "numeric/error.hpp"

namespace princ {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'I', 'N', 'C', '1', '\0', '\0'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void tensors(const NamedTensors& ts) {
    u32(static_cast<std::uint32_t>(ts.size()));
    for (const auto& [name, t] : ts) {
      str(name);
      u32(static_cast<std::uint32_t>(t.rank()));
      for (auto d : t.dims()) u64(d);
      for (double x : t.data()) f64(x);
    }
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) fail(ErrorCode::format, "checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool flag() {
    const auto f = u8();
    if (f > 1) fail(ErrorCode::format, "checkpoint presence flag must be 0 or 1, got " + std::to_string(f));
    return f == 1;
  }
  NamedTensors tensors() {
    NamedTensors out;
    const auto count = u32();
    for (std::uint32_t k = 0; k < count; ++k) {
      auto name = str();
      const auto rank = u32();
      if (rank > 8) fail(ErrorCode::format, "tensor '" + name + "' has implausible rank " + std::to_string(rank));
      std::vector<std::size_t> dims;
      std::size_t n = 1;
      for (std::uint32_t r = 0; r < rank; ++r) {
        const auto d = u64();
        if (d == 0) fail(ErrorCode::format, "tensor '" + name + "' has a zero dimension");
        dims.push_back(static_cast<std::size_t>(d));
        n *= dims.back();
      }
      need(n * 8);
      std::vector<double> data(n);
      for (auto& x : data) x = f64();
      out.emplace_back(std::move(name), Tensor(std::move(dims), std::move(data)));
    }
    return out;
  }
  bool done() const { return pos_ == b_.size(); }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  const std::uint8_t* here() const { return b_.data() + pos_; }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

bool same_tensors(const NamedTensors& a, const NamedTensors& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first || !a[i].second.identical(b[i].second)) return false;
  }
  return true;
}

bool same_memory(const ReplayMemory& a, const ReplayMemory& b) {
  if (a.capacity != b.capacity || a.items.size() != b.items.size() || a.soft_labels.size() != b.soft_labels.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    if (a.items[i].text != b.items[i].text || a.items[i].label != b.items[i].label ||
        a.items[i].index != b.items[i].index) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.soft_labels.size(); ++i) {
    const auto& x = a.soft_labels[i];
    const auto& y = b.soft_labels[i];
    if (x.size() != y.size() || (!x.empty() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0)) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& o) const {
  if (version != o.version || !same_tensors(tensors, o.tensors) || vocab != o.vocab ||
      prototype_tags != o.prototype_tags || config != o.config) {
    return false;
  }
  if (snapshot.has_value() != o.snapshot.has_value() || (snapshot && !same_tensors(*snapshot, *o.snapshot))) {
    return false;
  }
  if (memory.has_value() != o.memory.has_value() || (memory && !same_memory(*memory, *o.memory))) return false;
  return true;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(c.version);
  w.tensors(c.tensors);
  w.u32(static_cast<std::uint32_t>(c.vocab.size()));
  for (const auto& t : c.vocab) w.str(t);
  w.u32(static_cast<std::uint32_t>(c.prototype_tags.size()));
  for (const auto& [name, stage] : c.prototype_tags) {
    w.str(name);
    w.u8(static_cast<std::uint8_t>(stage));
  }
  w.u8(c.snapshot ? 1 : 0);
  if (c.snapshot) w.tensors(*c.snapshot);
  w.u8(c.memory ? 1 : 0);
  if (c.memory) {
    const auto& m = *c.memory;
    w.u32(static_cast<std::uint32_t>(m.capacity));
    w.u32(static_cast<std::uint32_t>(m.items.size()));
    for (std::size_t i = 0; i < m.items.size(); ++i) {
      w.str(m.items[i].text);
      w.str(m.items[i].label);
      w.u64(m.items[i].index);
      const auto* soft = i < m.soft_labels.size() ? &m.soft_labels[i] : nullptr;
      w.u32(soft ? static_cast<std::uint32_t>(soft->size()) : 0);
      if (soft) {
        for (double p : *soft) w.f64(p);
      }
    }
  }
  w.u8(c.config ? 1 : 0);
  if (c.config) w.str(*c.config);
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(sizeof kMagic);
  if (std::memcmp(r.here(), kMagic, sizeof kMagic) != 0) fail(ErrorCode::format, "not a checkpoint (bad magic bytes)");
  r.skip(sizeof kMagic);
  Checkpoint c;
  c.version = r.u32();
  if (c.version != kCheckpointVersion) {
    fail(ErrorCode::format, "unsupported checkpoint version " + std::to_string(c.version) + " (expected " +
                                std::to_string(kCheckpointVersion) + ")");
  }
  c.tensors = r.tensors();
  const auto nv = r.u32();
  for (std::uint32_t i = 0; i < nv; ++i) c.vocab.push_back(r.str());
  const auto np = r.u32();
  for (std::uint32_t i = 0; i < np; ++i) {
    auto name = r.str();
    const auto tag = r.u8();
    if (tag > 1) fail(ErrorCode::format, "prototype '" + name + "' has unknown stage tag " + std::to_string(tag));
    c.prototype_tags.emplace_back(std::move(name), static_cast<Stage>(tag));
  }
  if (r.flag()) c.snapshot = r.tensors();
  if (r.flag()) {
    ReplayMemory m;
    m.capacity = r.u32();
    const auto count = r.u32();
    bool any_soft = false;
    std::vector<std::vector<double>> soft(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      Utterance u;
      u.text = r.str();
      u.label = r.str();
      u.index = static_cast<std::size_t>(r.u64());
      const auto n = r.u32();
      r.need(std::size_t(n) * 8);
      for (std::uint32_t k = 0; k < n; ++k) soft[i].push_back(r.f64());
      any_soft = any_soft || n > 0;
      m.items.push_back(std::move(u));
    }
    if (any_soft) m.soft_labels = std::move(soft);
    c.memory = std::move(m);
  }
  if (r.flag()) c.config = r.str();
  if (!r.done()) fail(ErrorCode::format, "checkpoint has trailing bytes at offset " + std::to_string(r.pos()));
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Checkpoint make_checkpoint(const IntentModel& model) {
  Checkpoint c;
  for (const auto& p : model.params.items()) c.tensors.emplace_back(p.name, p.value);
  for (const auto& e : model.prototypes.entries()) {
    c.tensors.emplace_back(e.param.name, e.param.value);
    c.prototype_tags.emplace_back(e.intent, e.stage);
  }
  c.vocab = model.vocab.tokens();
  return c;
}

IntentModel model_from_checkpoint(const Checkpoint& ckpt, std::shared_ptr<const EmbeddingTable> embeddings) {
  namespace pn = param_names;
  IntentModel m;
  m.vocab = Vocab::from_tokens(ckpt.vocab);
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) {
    if (!by_name.emplace(name, &t).second) fail(ErrorCode::format, "checkpoint repeats tensor '" + name + "'");
  }
  auto take = [&](const std::string& name) -> const Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) fail(ErrorCode::format, "checkpoint lacks tensor '" + name + "'");
    return *it->second;
  };

  const Tensor& proj = take(pn::kProjection);
  if (proj.rank() != 2) fail(ErrorCode::format, "projection must be a matrix");
  m.prototype_dim = proj.rows();
  m.encoder.hidden_dim = proj.cols();
  if (by_name.count(pn::kEmbedding)) {
    m.encoder_kind = EncoderKind::desk;
    const Tensor& emb = take(pn::kEmbedding);
    if (emb.rank() != 2 || emb.rows() != m.vocab.size()) {
      fail(ErrorCode::format, "embedding table " + shape_string(emb.dims()) + " does not match vocab of " +
                                  std::to_string(m.vocab.size()));
    }
    m.encoder.embedding_dim = emb.cols();
    for (const auto* name : {&pn::kEmbedding, &pn::kHiddenWeight, &pn::kHiddenBias, &pn::kOutputWeight,
                             &pn::kOutputBias}) {
      m.params.add(*name, take(*name));
    }
  } else {
    m.encoder_kind = EncoderKind::precomputed;
    m.embeddings = std::move(embeddings);
  }
  m.params.add(pn::kProjection, proj);
  for (const auto& [intent, stage] : ckpt.prototype_tags) {
    m.prototypes.add(intent, take(prototype_param_name(intent)), stage);
  }
  const auto expected = m.params.size() + m.prototypes.size();
  if (expected != ckpt.tensors.size()) {
    fail(ErrorCode::format, "checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, model uses " +
                                std::to_string(expected));
  }
  return m;
}

NamedTensors to_named(const ParameterSnapshot& s) {
  NamedTensors out;
  for (const auto& [name, t] : s.tensors()) out.emplace_back(name, t);
  return out;
}

ParameterSnapshot snapshot_from(const NamedTensors& t) {
  std::map<std::string, Tensor> m;
  for (const auto& [name, tensor] : t) {
    if (!m.emplace(name, tensor).second) fail(ErrorCode::format, "snapshot repeats tensor '" + name + "'");
  }
  return ParameterSnapshot(std::move(m));
}

}  // namespace princ
