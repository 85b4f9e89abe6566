// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "data_io/checkpoint.hpp"
#include "data_io/dataset.hpp"
#include "data_io/records.hpp"
#include "evaluation/evaluation.hpp"
#include "losses/losses.hpp"
#include "numeric/ops.hpp"
#include "numeric/rng.hpp"
#include "numeric/tape.hpp"
#include "pipeline/gradcheck.hpp"
#include "pipeline/workflow.hpp"
#include "prototype/prototype_store.hpp"

using namespace princ;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const Preservation kModes[] = {Preservation::none, Preservation::dakp, Preservation::ddkp};

struct SeedRuns {
  Dataset ds;
  Phase1Run phase1;
  double phase1_acc = 0.0;
  // [k][mode] -> run and its non-episodic report
  std::map<std::size_t, std::map<Preservation, Phase2Run>> runs;
  std::map<std::size_t, std::map<Preservation, EvalReport>> reports;
  double seconds = 0.0;
};

SeedRuns run_seed(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng gen(seed);
  Dataset ds = generate_synthetic(8, 4, 50, gen);
  TrainConfig cfg;
  cfg.seed = seed;
  Phase1Run p1 = train_phase1(ds, cfg, seed);
  SeedRuns out{std::move(ds), std::move(p1)};
  out.phase1_acc = eval_seen_only(out.phase1.model, out.ds, out.phase1.split).accuracy;
  for (std::size_t k : {1u, 5u}) {
    for (auto mode : kModes) {
      TrainConfig c = cfg;
      c.preservation = mode;
      Phase2Run run = train_phase2(out.ds, out.phase1.model, out.phase1.info, c, k);
      out.reports[k][mode] = eval_nonepisodic(run.model, out.ds.utterances, run.split);
      out.runs[k].emplace(mode, std::move(run));
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

bool criterion6_invariants(std::string& detail) {
  Rng rng(2024);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng.between(2, 8);
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = rng.uniform(-5, 5);
    for (auto& x : b) x = rng.uniform(-5, 5);
    const double s = cosine_sim(a, b);
    if (s < -1 - 1e-12 || s > 1 + 1e-12 || s != cosine_sim(b, a)) ++bad;

    PrototypeStore store;
    const std::size_t c = rng.between(1, 5);
    for (std::size_t k = 0; k < c; ++k) {
      Tensor p({n});
      for (auto& x : p.data()) x = rng.uniform(-1, 1);
      store.add("p" + std::to_string(k), p, Stage::seen);
    }
    auto scaled = a;
    const double alpha = rng.uniform(1e-3, 1e3);
    for (auto& x : scaled) x *= alpha;
    if (classify(Tensor::vector(a), store).index != classify(Tensor::vector(scaled), store).index) ++bad;

    auto logits = a;
    const auto p = softmax(logits);
    double total = 0.0;
    for (double x : p) total += x;
    if (std::abs(total - 1.0) > 1e-12) ++bad;
    const double shift = rng.uniform(-100, 100);
    for (auto& x : logits) x += shift;
    const auto q = softmax(logits);
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs(p[k] - q[k]) > 1e-12) ++bad;

    ad::Tape tape;
    const std::map<std::string, Tensor> ref{{"w", Tensor::vector(a)}};
    const std::vector<NamedVar> same{{"w", tape.constant(Tensor::vector(a))}};
    auto moved_v = a;
    moved_v[rng.below(n)] += rng.uniform(1e-6, 1.0);
    const std::vector<NamedVar> moved{{"w", tape.constant(Tensor::vector(moved_v))}};
    if (loss_l2_penalty(same, ref).item() != 0.0 || !(loss_l2_penalty(moved, ref).item() > 0.0)) ++bad;

    // Gibbs: cross-entropy of p against any q is at least that against p itself.
    const double tau = rng.uniform(0.5, 2.0);
    std::vector<double> scaled_a(n);
    for (std::size_t k = 0; k < n; ++k) scaled_a[k] = a[k] / tau;
    const auto target = softmax(scaled_a);
    const double at_p = loss_kd(tape.constant(Tensor::vector(a)), target, tau).item();
    const double at_q = loss_kd(tape.constant(Tensor::vector(b)), target, tau).item();
    if (at_q + 1e-12 < at_p) ++bad;
  }
  detail = "1000 random cases, " + std::to_string(bad) + " violations";
  return bad == 0;
}

// Per-utterance argmax recomputed from raw prototype vectors with plain loops.
std::size_t brute_force_correct(const IntentModel& model, const std::vector<Utterance>& data,
                                const std::vector<std::size_t>& indices) {
  std::size_t correct = 0;
  for (std::size_t i : indices) {
    const Tensor v = embed(model, data[i]);
    double vn = 0.0;
    for (double x : v.data()) vn += x * x;
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t k = 0; k < model.prototypes.size(); ++k) {
      const Tensor& c = model.prototypes[k].param.value;
      double dot = 0.0, cn = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) {
        dot += v[j] * c[j];
        cn += c[j] * c[j];
      }
      const double s = dot / (std::sqrt(vn) * std::sqrt(cn));
      if (s > best_score) best_score = s, best = k;
    }
    correct += model.prototypes[best].intent == data[i].label ? 1 : 0;
  }
  return correct;
}

}  // namespace

int main() {
  try {
    {
      const auto t0 = Clock::now();
      GradcheckOptions opts;  // step 1e-5, 20 fixtures, dims <= 8
      const auto results = run_gradcheck(opts);
      const double secs = seconds_since(t0);
      bool ok = secs < 10.0;
      double worst = 0.0;
      for (const auto& r : results) {
        ok = ok && r.passed && r.max_rel_error < 1e-3 && r.fixtures >= 20;
        worst = std::max(worst, r.max_rel_error);
      }
      verdict(1, ok && results.size() == 7,
              fmt("7 checks x 20 fixtures, max rel err %.2e, %.2fs", worst, secs));
    }

    std::vector<SeedRuns> seeds;
    for (std::uint64_t s = 1; s <= 3; ++s) {
      seeds.push_back(run_seed(s));
      std::printf("  seed %llu: %.1fs, phase-1 seen acc %.3f\n", static_cast<unsigned long long>(s),
                  seeds.back().seconds, seeds.back().phase1_acc);
      for (std::size_t k : {1u, 5u}) {
        for (auto mode : kModes) {
          const auto& r = seeds.back().reports[k][mode];
          std::printf("    k=%zu %-4s joint %.3f seen %.3f novel %.3f\n", k, to_string(mode), r.accuracy,
                      r.seen_accuracy, r.novel_accuracy);
        }
      }
    }

    {
      std::vector<double> p1, joint5;
      double slowest = 0.0;
      bool every_mode = true;
      for (auto mode : kModes) {
        std::vector<double> acc;
        for (const auto& s : seeds) acc.push_back(s.reports.at(5).at(mode).accuracy);
        if (mean(acc) < 0.80) every_mode = false;
        if (mode == Preservation::none) joint5 = acc;
      }
      for (const auto& s : seeds) {
        p1.push_back(s.phase1_acc);
        slowest = std::max(slowest, s.seconds);
      }
      verdict(2, mean(p1) >= 0.95 && every_mode && slowest < 120.0,
              fmt("phase-1 mean %.3f, 5-shot joint mean (none) %.3f, all modes >= 0.80: %.0f, slowest seed %.1fs",
                  mean(p1), mean(joint5), every_mode ? 1.0 : 0.0, slowest)
                  );
    }

    {
      auto med = [&](Preservation m, bool seen) {
        std::vector<double> v;
        for (const auto& s : seeds) {
          const auto& r = s.reports.at(1).at(m);
          v.push_back(100.0 * (seen ? r.seen_accuracy : r.novel_accuracy));
        }
        return median(v);
      };
      const double ns = med(Preservation::none, true), nn = med(Preservation::none, false);
      const double as = med(Preservation::dakp, true), an = med(Preservation::dakp, false);
      const double ds = med(Preservation::ddkp, true), dn = med(Preservation::ddkp, false);
      const bool ok = ds >= ns + 3 && as >= ns + 3 && dn >= nn - 2 && an >= nn - 2;
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "1-shot medians seen/novel: none %.1f/%.1f, dakp %.1f/%.1f, ddkp %.1f/%.1f", ns, nn, as, an, ds,
                    dn);
      std::string detail = buf;
      if (ds < ns + 3) detail += "; ddkp seen below none + 3";
      if (as < ns + 3) detail += "; dakp seen below none + 3";
      if (dn < nn - 2) detail += "; ddkp novel below none - 2";
      if (an < nn - 2) detail += "; dakp novel below none - 2";
      verdict(3, ok, detail);
    }

    {
      bool ok = true;
      std::string detail;
      for (auto mode : kModes) {
        std::vector<double> one, five;
        for (const auto& s : seeds) {
          one.push_back(s.reports.at(1).at(mode).accuracy);
          five.push_back(s.reports.at(5).at(mode).accuracy);
        }
        ok = ok && median(five) >= median(one);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s%s 1-shot %.3f 5-shot %.3f", detail.empty() ? "" : ", ", to_string(mode),
                      median(one), median(five));
        detail += buf;
      }
      verdict(4, ok, detail);
    }

    {
      const auto& s = seeds.front();
      const auto& run = s.runs.at(1).at(Preservation::none);
      EpisodeSpec spec;
      spec.ways = 4;
      spec.shots = 1;
      spec.queries_per_class = 5;
      spec.episodes = 1000;
      Rng rng(1);
      const EvalReport eps = eval_episodic(run.model, s.ds.utterances, run.split, spec, rng);
      std::size_t confusion_total = 0;
      for (const auto& row : eps.confusion)
        for (auto c : row) confusion_total += c;
      bool split_ok = true;
      for (const auto& seed : seeds) {
        const GfsidSplit& sp = seed.phase1.split;
        std::map<std::string, std::size_t> train, test;
        for (auto i : sp.seen_train) train[seed.ds.utterances[i].label]++;
        for (auto i : sp.seen_test) test[seed.ds.utterances[i].label]++;
        for (const auto& name : sp.seen) split_ok = split_ok && train[name] == 40 && test[name] == 10;
      }
      Rng sizes(5);
      for (int t = 0; t < 200 && split_ok; ++t) {
        const std::size_t n = sizes.between(2, 200);
        std::vector<Utterance> data;
        for (std::size_t i = 0; i < n; ++i) data.push_back({"x", "a", i});
        for (std::size_t i = 0; i < 3; ++i) data.push_back({"y", "b", n + i});
        const std::vector<std::string> seen{"a"}, novel{"b"};
        const GfsidSplit sp = make_split(data, seen, novel, 1, sizes);
        const std::size_t test = std::max<std::size_t>(1, n / 5);
        split_ok = sp.seen_test.size() == test && sp.seen_train.size() == n - test;
      }
      const bool ok = eps.total == 20000 && confusion_total == 20000 && eps.episodes == 1000 && split_ok;
      verdict(5, ok,
              fmt("4-way 1-shot x1000 episodes scored %.0f queries; 80/20 split exact: %.0f", static_cast<double>(eps.total),
                  split_ok ? 1.0 : 0.0)
                  );
    }

    {
      std::string detail;
      bool ok = criterion6_invariants(detail);

      const auto& s = seeds.front();
      const auto& ddkp = s.runs.at(1).at(Preservation::ddkp);
      const Checkpoint ck = to_checkpoint(ddkp.model, ddkp.info, ddkp.snapshot, ddkp.memory);
      const auto bytes = encode_checkpoint(ck);
      const Checkpoint back = decode_checkpoint(bytes);
      const bool roundtrip = back == ck && encode_checkpoint(back) == bytes;
      ok = ok && roundtrip;

      bool deterministic = true;
      TrainConfig cfg;
      cfg.seed = 1;
      const Phase1Run again = train_phase1(s.ds, cfg, 1);
      deterministic = encode_checkpoint(to_checkpoint(again.model, again.info)) ==
                          encode_checkpoint(to_checkpoint(s.phase1.model, s.phase1.info)) &&
                      train_report_records(again.report) == train_report_records(s.phase1.report);
      for (auto mode : kModes) {
        TrainConfig c = cfg;
        c.preservation = mode;
        const Phase2Run r = train_phase2(s.ds, again.model, again.info, c, 1);
        const auto& orig = s.runs.at(1).at(mode);
        deterministic = deterministic &&
                        encode_checkpoint(to_checkpoint(r.model, r.info, r.snapshot, r.memory)) ==
                            encode_checkpoint(to_checkpoint(orig.model, orig.info, orig.snapshot, orig.memory)) &&
                        train_report_records(r.report) == train_report_records(orig.report);
      }
      ok = ok && deterministic;
      detail += std::string("; checkpoint round-trip ") + (roundtrip ? "bitwise" : "MISMATCH") + "; rerun " +
                (deterministic ? "bitwise identical" : "DIFFERS");
      verdict(6, ok, detail);
    }

    {
      const auto& s = seeds.front();
      const auto& run = s.runs.at(1).at(Preservation::none);
      std::vector<std::size_t> pool = run.split.seen_test;  // 80 items
      pool.insert(pool.end(), run.split.novel_test.begin(), run.split.novel_test.begin() + 20);
      const EvalReport r = evaluate_indices(run.model, s.ds.utterances, pool);
      const std::size_t brute = brute_force_correct(run.model, s.ds.utterances, pool);
      const bool ok = pool.size() == 100 && r.total == 100 && r.correct == brute &&
                      r.accuracy == static_cast<double>(brute) / 100.0;
      verdict(7, ok, fmt("100 instances: library %.0f correct, brute force %.0f", static_cast<double>(r.correct),
                         static_cast<double>(brute)));
    }
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
