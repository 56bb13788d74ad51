// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "klap/net.hpp"

namespace klap {

// Adam with bias correction and cosine-annealed learning rate:
// lr(t) = lr_min + 0.5*(lr0 - lr_min)*(1 + cos(pi*t/T)), t = completed steps.
struct OptimState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr0 = 2e-4;
    double lr_min = 1e-6;
    int64_t total_steps = 1;
    int64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;

    static OptimState make(size_t n, double lr0, double lr_min, int64_t total_steps);
    double current_lr() const;
};

// One Adam step over all parameters. LengthError on size mismatch.
void adam_step(ParamStore& params, std::span<const double> grads, OptimState& state);

// Masked variant: only the listed value indices are read/updated; everything
// else (params, moments) is untouched.
void adam_step_masked(std::vector<float>& values, std::span<const double> grads, OptimState& state,
                      std::span<const size_t> indices);

} // namespace klap
