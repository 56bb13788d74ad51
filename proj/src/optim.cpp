// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#include "klap/optim.hpp"

#include <cmath>

#include "klap/errors.hpp"

namespace klap {

OptimState OptimState::make(size_t n, double lr0_, double lr_min_, int64_t total) {
    OptimState s;
    s.lr0 = lr0_;
    s.lr_min = lr_min_;
    s.total_steps = total > 0 ? total : 1;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    return s;
}

double OptimState::current_lr() const {
    double t = double(step < total_steps ? step : total_steps);
    double phase = 3.14159265358979323846 * t / double(total_steps);
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(phase));
}

namespace {

inline void adam_update(float& value, double g, double& m, double& v, double lr, double c1, double c2, double beta1,
                        double beta2, double eps) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    double mhat = m / c1;
    double vhat = v / c2;
    value = float(double(value) - lr * mhat / (std::sqrt(vhat) + eps));
}

} // namespace

void adam_step(ParamStore& params, std::span<const double> grads, OptimState& state) {
    if (grads.size() != params.values.size() || state.m.size() != params.values.size()) {
        throw LengthError("adam_step: parameter/gradient/state length mismatch");
    }
    const double lr = state.current_lr();
    state.step += 1;
    const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
    for (size_t i = 0; i < grads.size(); ++i) {
        adam_update(params.values[i], grads[i], state.m[i], state.v[i], lr, c1, c2, state.beta1, state.beta2,
                    state.eps);
    }
}

void adam_step_masked(std::vector<float>& values, std::span<const double> grads, OptimState& state,
                      std::span<const size_t> indices) {
    if (grads.size() != values.size() || state.m.size() != values.size()) {
        throw LengthError("adam_step_masked: parameter/gradient/state length mismatch");
    }
    const double lr = state.current_lr();
    state.step += 1;
    const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
    for (size_t i : indices) {
        adam_update(values[i], grads[i], state.m[i], state.v[i], lr, c1, c2, state.beta1, state.beta2, state.eps);
    }
}

} // namespace klap
