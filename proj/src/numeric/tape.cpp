#include "numeric/tape.hpp"

#include <cmath>

#include "numeric/error.hpp"
#include "numeric/ops.hpp"

namespace princ::ad {

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::record(Tensor value, bool live, Backward backward) {
  Tensor grad = Tensor::zeros_like(value);
  nodes_.push_back(Node{std::move(value), std::move(grad), std::move(backward), live});
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Tape::param(Param& p) {
  return record(p.value, true, [&p](Tape& t, std::size_t self) {
    auto g = t.grad(self).data();
    auto dst = p.grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  });
}

void Tape::backward(Var root) {
  if (root.tape != this) fail(ErrorCode::state, "backward: variable belongs to another tape");
  if (value(root.id).size() != 1) {
    fail(ErrorCode::dimension_mismatch, "backward: root must be scalar, got " + shape_string(value(root.id).dims()));
  }
  nodes_[root.id].grad[0] += 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.live && n.backward) n.backward(*this, i);
  }
}

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) fail(ErrorCode::state, "variables recorded on different tapes");
  return *a.tape;
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::dimension_mismatch,
         std::string(op) + ": shapes " + shape_string(a.dims()) + " and " + shape_string(b.dims()));
  }
}

}  // namespace

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  check_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const bool live = t.live(a.id) || t.live(b.id);
  return t.record(std::move(out), live, [a = a.id, b = b.id](Tape& t, std::size_t self) {
    const auto g = t.grad(self).data();
    auto ga = t.grad(a).data();
    auto gb = t.grad(b).data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape;
  Tensor out = a.value();
  for (auto& x : out.data()) x *= s;
  return t.record(std::move(out), t.live(a.id), [a = a.id, s](Tape& t, std::size_t self) {
    const auto g = t.grad(self).data();
    auto ga = t.grad(a).data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var tanh(Var a) {
  Tape& t = *a.tape;
  Tensor out = a.value();
  for (auto& x : out.data()) x = std::tanh(x);
  return t.record(std::move(out), t.live(a.id), [a = a.id](Tape& t, std::size_t self) {
    const auto g = t.grad(self).data();
    const auto y = t.value(self).data();
    auto ga = t.grad(a).data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var matvec(Var m, Var x) {
  Tape& t = same_tape(m, x);
  Tensor out = princ::matvec(m.value(), x.value());
  const bool live = t.live(m.id) || t.live(x.id);
  return t.record(std::move(out), live, [m = m.id, x = x.id](Tape& t, std::size_t self) {
    const auto g = t.grad(self).data();
    const Tensor& mv = t.value(m);
    const auto xv = t.value(x).data();
    const auto rows = mv.rows(), cols = mv.cols();
    if (t.live(m)) {
      auto gm = t.grad(m).data();
      for (std::size_t i = 0; i < rows; ++i) {
        if (g[i] == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) gm[i * cols + j] += g[i] * xv[j];
      }
    }
    if (t.live(x)) {
      auto gx = t.grad(x).data();
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) gx[j] += g[i] * mv.at(i, j);
      }
    }
  });
}

Var mean_rows(Var table, std::span<const std::size_t> rows) {
  Tape& t = *table.tape;
  const Tensor& tv = table.value();
  if (tv.rank() != 2) fail(ErrorCode::dimension_mismatch, "mean_rows: table must be a matrix, got " + shape_string(tv.dims()));
  require(!rows.empty(), "mean_rows: empty row selection");
  const auto cols = tv.cols();
  Tensor out({cols});
  for (auto r : rows) {
    if (r >= tv.rows()) {
      fail(ErrorCode::invalid_argument,
           "mean_rows: row " + std::to_string(r) + " out of range for " + std::to_string(tv.rows()) + " rows");
    }
    for (std::size_t j = 0; j < cols; ++j) out[j] += tv.at(r, j);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& x : out.data()) x *= inv;
  std::vector<std::size_t> picked(rows.begin(), rows.end());
  return t.record(std::move(out), t.live(table.id),
                  [table = table.id, picked = std::move(picked), inv](Tape& t, std::size_t self) {
                    const auto g = t.grad(self).data();
                    Tensor& gt = t.grad(table);
                    const auto cols = g.size();
                    for (auto r : picked) {
                      for (std::size_t j = 0; j < cols; ++j) gt.at(r, j) += inv * g[j];
                    }
                  });
}

Var cosine(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const double s = cosine_sim(a.value(), b.value());
  const bool live = t.live(a.id) || t.live(b.id);
  return t.record(Tensor::scalar(s), live, [a = a.id, b = b.id](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    if (g == 0.0) return;
    const auto av = t.value(a).data();
    const auto bv = t.value(b).data();
    const double na = l2_norm(av), nb = l2_norm(bv);
    const double c = dot(av, bv) / (na * nb);
    // d cos / da = b / (|a||b|) - cos * a / |a|^2, symmetric for b.
    auto ga = t.grad(a).data();
    auto gb = t.grad(b).data();
    for (std::size_t i = 0; i < av.size(); ++i) {
      ga[i] += g * (bv[i] / (na * nb) - c * av[i] / (na * na));
      gb[i] += g * (av[i] / (na * nb) - c * bv[i] / (nb * nb));
    }
  });
}

Var stack(std::span<const Var> scalars) {
  require(!scalars.empty(), "stack: no inputs");
  Tape& t = *scalars.front().tape;
  std::vector<double> values;
  std::vector<std::size_t> ids;
  values.reserve(scalars.size());
  bool live = false;
  for (const Var& s : scalars) {
    if (s.tape != &t) fail(ErrorCode::state, "stack: variables recorded on different tapes");
    values.push_back(s.item());
    ids.push_back(s.id);
    live = live || t.live(s.id);
  }
  return t.record(Tensor::vector(std::move(values)), live, [ids = std::move(ids)](Tape& t, std::size_t self) {
    const auto g = t.grad(self).data();
    for (std::size_t i = 0; i < ids.size(); ++i) t.grad(ids[i])[0] += g[i];
  });
}

Var sum(std::span<const Var> scalars) {
  require(!scalars.empty(), "sum: no inputs");
  Tape& t = *scalars.front().tape;
  double total = 0.0;
  bool live = false;
  std::vector<std::size_t> ids;
  for (const Var& s : scalars) {
    if (s.tape != &t) fail(ErrorCode::state, "sum: variables recorded on different tapes");
    total += s.item();
    ids.push_back(s.id);
    live = live || t.live(s.id);
  }
  return t.record(Tensor::scalar(total), live, [ids = std::move(ids)](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (auto id : ids) t.grad(id)[0] += g;
  });
}

Var cross_entropy(Var logits, std::size_t target) {
  Tape& t = *logits.tape;
  const auto lv = logits.value().data();
  if (target >= lv.size()) {
    fail(ErrorCode::invalid_argument,
         "cross_entropy: target " + std::to_string(target) + " out of range for " + std::to_string(lv.size()) + " logits");
  }
  const auto ls = log_softmax(lv);
  return t.record(Tensor::scalar(-ls[target]), t.live(logits.id),
                  [l = logits.id, target](Tape& t, std::size_t self) {
                    const double g = t.grad(self)[0];
                    const auto p = softmax(t.value(l).data());
                    auto gl = t.grad(l).data();
                    for (std::size_t i = 0; i < p.size(); ++i) {
                      gl[i] += g * (p[i] - (i == target ? 1.0 : 0.0));
                    }
                  });
}

Var soft_cross_entropy(Var logits, std::span<const double> p) {
  Tape& t = *logits.tape;
  const auto lv = logits.value().data();
  if (p.size() != lv.size()) {
    fail(ErrorCode::dimension_mismatch,
         "soft_cross_entropy: " + std::to_string(p.size()) + " targets for " + std::to_string(lv.size()) + " logits");
  }
  const auto ls = log_softmax(lv);
  double v = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    v -= p[i] * ls[i];
    mass += p[i];
  }
  std::vector<double> target(p.begin(), p.end());
  return t.record(Tensor::scalar(v), t.live(logits.id),
                  [l = logits.id, target = std::move(target), mass](Tape& t, std::size_t self) {
                    const double g = t.grad(self)[0];
                    const auto q = softmax(t.value(l).data());
                    auto gl = t.grad(l).data();
                    for (std::size_t i = 0; i < q.size(); ++i) gl[i] += g * (mass * q[i] - target[i]);
                  });
}

Var squared_distance(Var a, const Tensor& target) {
  Tape& t = *a.tape;
  const auto& value = a.value();
  const bool leading_rows = value.rank() == 2 && target.rank() == 2 && target.cols() == value.cols() &&
                            target.rows() <= value.rows();
  if (!leading_rows) check_same_shape("squared_distance", value, target);
  const auto av = value.data();
  const auto tv = target.data();
  double s = 0.0;
  for (std::size_t i = 0; i < tv.size(); ++i) {
    const double d = av[i] - tv[i];
    s += d * d;
  }
  return t.record(Tensor::scalar(s), t.live(a.id), [a = a.id, target](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const auto av = t.value(a).data();
    const auto tv = target.data();
    auto ga = t.grad(a).data();
    for (std::size_t i = 0; i < tv.size(); ++i) ga[i] += 2.0 * g * (av[i] - tv[i]);
  });
}

}  // namespace princ::ad
