#include "numeric/adam.hpp"

#include <cmath>

#include "numeric/error.hpp"

namespace princ {

void adam_step(std::span<Param* const> params, double lr, AdamState& state, const AdamConfig& cfg) {
  require(lr > 0.0, "adam_step: learning rate must be positive");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (Param* p : params) {
    auto it = state.moments.find(p->name);
    if (it == state.moments.end()) {
      it = state.moments.emplace(p->name, std::make_pair(Tensor::zeros_like(p->value), Tensor::zeros_like(p->value))).first;
    }
    auto& [m, v] = it->second;
    if (!m.same_shape(p->value)) {
      fail(ErrorCode::dimension_mismatch, "adam_step: moment shape for '" + p->name + "' is " +
                                              shape_string(m.dims()) + ", parameter is " + shape_string(p->value.dims()));
    }
    auto x = p->value.data();
    const auto g = p->grad.data();
    auto md = m.data();
    auto vd = v.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      md[i] = cfg.beta1 * md[i] + (1.0 - cfg.beta1) * g[i];
      vd[i] = cfg.beta2 * vd[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = md[i] / c1;
      const double vhat = vd[i] / c2;
      x[i] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
    p->zero_grad();
  }
}

}  // namespace princ
