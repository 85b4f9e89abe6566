#include "pipeline/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "losses/losses.hpp"
#include "numeric/error.hpp"
#include "numeric/finite_diff.hpp"
#include "numeric/rng.hpp"
#include "prototype/prototype_store.hpp"
#include "text/encoder.hpp"

namespace princ {

namespace {

// A fixture owns its parameters and rebuilds the scalar objective on a fresh tape.
struct Fixture {
  ModelParams params;
  std::function<ad::Var(ad::Tape&, const ParamBinding&)> build;
};

Tensor random_tensor(std::vector<std::size_t> dims, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(dims));
  for (auto& x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

std::vector<ad::Var> vars_with_prefix(const ParamBinding& bound, const std::string& prefix, std::size_t n) {
  std::vector<ad::Var> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(bound[prefix + std::to_string(i)]);
  return out;
}

Fixture classification_fixture(Rng& rng, std::size_t max_dim, bool with_tau) {
  const std::size_t d = rng.between(2, max_dim);
  const std::size_t t = rng.between(2, 5);
  const std::size_t c = rng.between(2, 4);
  Fixture f;
  for (std::size_t i = 0; i < t; ++i) f.params.add("v" + std::to_string(i), random_tensor({d}, rng));
  for (std::size_t k = 0; k < c; ++k) f.params.add("c" + std::to_string(k), random_tensor({d}, rng));
  std::vector<std::size_t> labels(t);
  for (auto& y : labels) y = rng.below(c);
  f.build = [t, c, labels, with_tau](ad::Tape&, const ParamBinding& b) {
    Batch batch{vars_with_prefix(b, "v", t), labels};
    const auto protos = vars_with_prefix(b, "c", c);
    return with_tau ? loss_cls(batch, protos, 0.1) : loss_is(batch, protos);
  };
  return f;
}

Fixture contrastive_fixture(Rng& rng, std::size_t max_dim) {
  const std::size_t d = rng.between(2, max_dim);
  const std::size_t t = rng.between(3, 6);  // three items over two labels share one
  Fixture f;
  for (std::size_t i = 0; i < t; ++i) f.params.add("v" + std::to_string(i), random_tensor({d}, rng));
  std::vector<std::size_t> labels(t);
  for (auto& y : labels) y = rng.below(2);
  f.build = [t, labels](ad::Tape&, const ParamBinding& b) { return loss_ii(Batch{vars_with_prefix(b, "v", t), labels}); };
  return f;
}

Fixture l2_fixture(Rng& rng, std::size_t max_dim) {
  const std::size_t d = rng.between(2, max_dim);
  const std::size_t r = rng.between(2, max_dim);
  Fixture f;
  f.params.add("weight", random_tensor({r, d}, rng));
  f.params.add("bias", random_tensor({r}, rng));
  f.params.add("prototype/new", random_tensor({d}, rng));
  std::map<std::string, Tensor> reference{{"weight", random_tensor({r, d}, rng)}, {"bias", random_tensor({r}, rng)}};
  f.build = [reference](ad::Tape&, const ParamBinding& b) {
    std::vector<NamedVar> named;
    for (const char* n : {"weight", "bias", "prototype/new"}) named.push_back({n, b[n]});
    return loss_l2_penalty(named, reference);
  };
  return f;
}

Fixture kd_fixture(Rng& rng, std::size_t max_dim) {
  const std::size_t n = rng.between(2, max_dim);
  Fixture f;
  f.params.add("logits", random_tensor({n}, rng, -3.0, 3.0));
  std::vector<double> p(n);
  for (auto& x : p) x = rng.uniform(0.05, 1.0);
  double total = 0.0;
  for (double x : p) total += x;
  for (auto& x : p) x /= total;
  const double tau_kd = rng.uniform(0.5, 2.0);
  f.build = [p, tau_kd](ad::Tape&, const ParamBinding& b) { return loss_kd(b["logits"], p, tau_kd); };
  return f;
}

Fixture encode_fixture(Rng& rng, std::size_t max_dim) {
  const EncoderConfig cfg{rng.between(2, max_dim), rng.between(2, max_dim)};
  const std::size_t vocab = rng.between(4, 10);
  Fixture f;
  init_desk_encoder(f.params, vocab, cfg, rng);
  // Larger weights than the initializer so tanh is exercised away from zero.
  for (auto& p : f.params.items()) {
    for (auto& x : p.value.data()) x = rng.uniform(-1.0, 1.0);
  }
  std::vector<std::size_t> ids(rng.between(1, 6));
  for (auto& id : ids) id = rng.below(vocab);
  const Tensor target = random_tensor({cfg.hidden_dim}, rng);
  f.build = [ids, cfg, target](ad::Tape&, const ParamBinding& b) {
    return ad::squared_distance(encode(ids, b, cfg), target);
  };
  return f;
}

Fixture project_fixture(Rng& rng, std::size_t max_dim) {
  const std::size_t h = rng.between(2, max_dim);
  const std::size_t c = rng.between(2, max_dim);
  Fixture f;
  f.params.add("hidden", random_tensor({h}, rng));
  f.params.add(param_names::kProjection, random_tensor({c, h}, rng));
  const Tensor target = random_tensor({c}, rng);
  f.build = [target](ad::Tape&, const ParamBinding& b) {
    return ad::squared_distance(project(b["hidden"], b[param_names::kProjection]), target);
  };
  return f;
}

Fixture make_fixture(const std::string& name, Rng& rng, std::size_t max_dim) {
  if (name == "cls") return classification_fixture(rng, max_dim, true);
  if (name == "is") return classification_fixture(rng, max_dim, false);
  if (name == "ii") return contrastive_fixture(rng, max_dim);
  if (name == "l2") return l2_fixture(rng, max_dim);
  if (name == "kd") return kd_fixture(rng, max_dim);
  if (name == "encode") return encode_fixture(rng, max_dim);
  return project_fixture(rng, max_dim);
}

}  // namespace

const std::vector<std::string>& gradcheck_names() {
  static const std::vector<std::string> names = {"cls", "ii", "is", "l2", "kd", "encode", "project"};
  return names;
}

std::vector<GradcheckResult> run_gradcheck(const GradcheckOptions& opts) {
  require(opts.step > 0.0, "gradcheck step must be positive");
  require(opts.dims >= 2, "gradcheck dims must be at least 2");
  require(opts.fixtures >= 1, "gradcheck needs at least one fixture");
  const auto& names = gradcheck_names();
  if (!opts.corrupt.empty() && std::find(names.begin(), names.end(), opts.corrupt) == names.end()) {
    fail(ErrorCode::invalid_argument, "unknown gradcheck target '" + opts.corrupt + "'");
  }

  std::vector<GradcheckResult> results;
  for (std::size_t n = 0; n < names.size(); ++n) {
    GradcheckResult res;
    res.name = names[n];
    Rng rng(mix_seed(opts.seed, n));
    for (std::size_t k = 0; k < opts.fixtures; ++k) {
      Fixture fx = make_fixture(names[n], rng, opts.dims);
      std::vector<Param*> leaves;
      for (auto& p : fx.params.items()) leaves.push_back(&p);

      fx.params.zero_grad();
      {
        ad::Tape tape;
        ParamBinding bound(tape, fx.params);
        tape.backward(fx.build(tape, bound));
      }
      std::vector<Tensor> analytic;
      for (auto* p : leaves) analytic.push_back(p->grad);
      if (names[n] == opts.corrupt) analytic[0][0] = analytic[0][0] * 1.01 + 1e-3;

      const ModelParams& frozen = fx.params;
      const auto numeric = finite_diff_grad(
          [&] {
            ad::Tape tape;
            ParamBinding bound(tape, frozen);
            return fx.build(tape, bound).item();
          },
          leaves, opts.step);

      const auto cmp = compare_gradients(analytic, numeric, opts.rel_tol, opts.abs_tol, opts.rel_floor);
      res.fixtures += 1;
      res.entries += cmp.entries;
      res.max_rel_error = std::max(res.max_rel_error, cmp.max_rel_error);
      res.max_abs_error = std::max(res.max_abs_error, cmp.max_abs_error);
      res.passed = res.passed && cmp.passed;
    }
    results.push_back(res);
  }
  return results;
}

std::string format_gradcheck(const std::vector<GradcheckResult>& results) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %8s %8s %14s %14s %s\n", "check", "fixtures", "entries", "max_rel_err",
                "max_abs_err", "status");
  os << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-8s %8zu %8zu %14.3e %14.3e %s\n", r.name.c_str(), r.fixtures, r.entries,
                  r.max_rel_error, r.max_abs_error, r.passed ? "pass" : "FAIL");
    os << line;
  }
  return os.str();
}

}  // namespace princ
