#include "data_io/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "numeric/error.hpp"
#include <json.hpp>

namespace princ {

using nlohmann::json;

namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::vector<Utterance> load_dataset(const std::string& path) {
  auto in = open_in(path);
  std::vector<Utterance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto where = path + ":" + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail(ErrorCode::format, where + ": not a JSON object");
    for (const char* key : {"text", "label"}) {
      if (!j.contains(key) || !j[key].is_string()) {
        fail(ErrorCode::format, where + ": missing string field \"" + key + "\"");
      }
    }
    Utterance u{j["text"].get<std::string>(), j["label"].get<std::string>(), out.size()};
    try {
      validate(u);
    } catch (const Error& e) {
      fail(ErrorCode::format, where + ": " + e.what());
    }
    out.push_back(std::move(u));
  }
  if (out.empty()) fail(ErrorCode::format, path + ": no records");
  return out;
}

void save_dataset(const std::string& path, const std::vector<Utterance>& data) {
  auto out = open_out(path);
  for (const auto& u : data) out << json{{"text", u.text}, {"label", u.label}}.dump() << '\n';
  if (!out) fail(ErrorCode::io, "failed writing '" + path + "'");
}

Manifest load_manifest(const std::string& path) {
  auto in = open_in(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("seen") || !j.contains("novel")) {
    fail(ErrorCode::format, path + ": manifest must be an object with \"seen\" and \"novel\" arrays");
  }
  Manifest m;
  try {
    m.seen = j.at("seen").get<std::vector<std::string>>();
    m.novel = j.at("novel").get<std::vector<std::string>>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.per_intent = j.value("per_intent", std::size_t{0});
  } catch (const json::exception& e) {
    fail(ErrorCode::format, path + ": " + e.what());
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& m) {
  auto out = open_out(path);
  json j{{"seen", m.seen}, {"novel", m.novel}, {"seed", m.seed}, {"per_intent", m.per_intent}};
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::io, "failed writing '" + path + "'");
}

std::string default_manifest_path(const std::string& data_path) {
  return std::filesystem::path(data_path).replace_extension(".manifest.json").string();
}

std::string intent_name(std::size_t intent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "intent_%02zu", intent);
  return buf;
}

std::string signature_token(std::size_t intent, std::size_t k) {
  return "sig" + std::to_string(intent) + "x" + std::to_string(k);
}

std::string filler_token(std::size_t k) { return "fill" + std::to_string(k); }

Dataset generate_synthetic(std::size_t seen, std::size_t novel, std::size_t per_intent, Rng& rng) {
  require(seen >= 2, "generate_synthetic: needs at least 2 seen intents");
  require(novel >= 1, "generate_synthetic: needs at least 1 novel intent");
  require(per_intent >= 10, "generate_synthetic: needs at least 10 utterances per intent");
  Dataset ds;
  for (std::size_t i = 0; i < seen + novel; ++i) {
    const auto name = intent_name(i);
    (i < seen ? ds.seen : ds.novel).push_back(name);
    for (std::size_t n = 0; n < per_intent; ++n) {
      const auto len = rng.between(3, 10);
      std::string text;
      for (std::size_t p = 0; p < len; ++p) {
        if (p) text += ' ';
        text += rng.uniform01() < kSignatureProbability ? signature_token(i, rng.below(kSignatureTokens))
                                                        : filler_token(rng.below(kFillerTokens));
      }
      ds.utterances.push_back({std::move(text), name, ds.utterances.size()});
    }
  }
  return ds;
}

LoadedEmbeddings load_embeddings(const std::string& path) {
  auto in = open_in(path);
  LoadedEmbeddings out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto where = path + ":" + std::to_string(lineno);
    std::istringstream ls(line);
    if (!header) {
      std::string tag;
      long long dim = 0;
      if (!(ls >> tag >> dim) || tag != "h" || dim < 1) fail(ErrorCode::format, where + ": expected header 'h <dim>'");
      out.dim = static_cast<std::size_t>(dim);
      header = true;
      continue;
    }
    long long index = -1;
    if (!(ls >> index) || index < 0) fail(ErrorCode::format, where + ": expected a non-negative utterance index");
    std::vector<double> values;
    double x;
    while (ls >> x) values.push_back(x);
    if (!ls.eof()) fail(ErrorCode::format, where + ": unparsable value");
    if (values.size() != out.dim) {
      fail(ErrorCode::dimension_mismatch, where + ": " + std::to_string(values.size()) + " values, header declares " +
                                              std::to_string(out.dim));
    }
    const auto key = static_cast<std::size_t>(index);
    if (!out.table.emplace(key, Tensor::vector(std::move(values))).second) {
      fail(ErrorCode::format, where + ": duplicate index " + std::to_string(key));
    }
  }
  if (!header) fail(ErrorCode::format, path + ": missing header");
  return out;
}

void check_complete(const LoadedEmbeddings& e, std::size_t dataset_size) {
  if (e.table.size() != dataset_size) {
    fail(ErrorCode::format, "embedding file has " + std::to_string(e.table.size()) + " records for a dataset of " +
                                std::to_string(dataset_size));
  }
  for (const auto& [k, v] : e.table) {
    if (k >= dataset_size) fail(ErrorCode::format, "embedding index " + std::to_string(k) + " is outside the dataset");
  }
}

}  // namespace princ
