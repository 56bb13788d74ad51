// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "klap/cfa.hpp"
#include "klap/rng.hpp"

namespace klap {

enum class MapDirection { Forward, Inverse };

// Tone + gamma + color-correction + white-balance chain used to turn sRGB
// sources into RAW-like synthesis ground truth (inverse direction, r-CM) and
// back again for visualization (forward direction, CM).
struct SynthConfig {
    double gamma = 2.2;
    bool tone_enabled = true;
    std::array<std::array<double, 3>, 3> ccm = {{{1.66, -0.53, -0.13}, {-0.24, 1.46, -0.22}, {0.02, -0.62, 1.60}}};
    std::array<double, 3> awb_gains = {2.0, 1.0, 1.6};

    // Derived; filled in by finalize().
    std::array<std::array<double, 3>, 3> ccm_inv = {};

    // Validates invariants and precomputes the CCM inverse.
    // SingularMatrixError if |det ccm| <= 1e-8, ConfigError for bad gains/gamma.
    void finalize();

    static SynthConfig defaults();
    // Tone off, gamma 1, identity CCM, unit gains.
    static SynthConfig identity();
};

struct NoiseParams {
    double gamma_gain = 0.01; // Poisson gain; 0 disables the Poisson term
    double sigma = 0.02;      // Gaussian standard deviation
    uint64_t seed = 0;

    void validate() const; // ConfigError on negative parameters

    static NoiseParams train_default() { return {0.01, 0.02, 0}; }
    static NoiseParams strong_noise() { return {0.04, 0.08, 0}; }
};

// Scalar maps. Inputs are clamped to [0,1] first; all are monotone on [0,1].
double tone_map(double v, MapDirection dir);
double gamma_map(double v, double gamma, MapDirection dir);

// Per-pixel 3x3 matrix multiply by ccm (Forward) or its inverse (Inverse),
// clamped to [0,1].
RgbImage ccm_apply(const RgbImage& rgb, const SynthConfig& config, MapDirection dir);

// Forward multiplies channel c by gains[c]; Inverse divides. Clamped.
RgbImage awb_apply(const RgbImage& rgb, const SynthConfig& config, MapDirection dir);

// Reverse color-related mapping: tone degradation -> inverse gamma ->
// inverse CCM -> inverse AWB. Output is the synthesis GT label space.
RgbImage r_cm(const RgbImage& rgb, const SynthConfig& config);

// Forward chain, exact reverse order of r_cm: AWB -> CCM -> gamma -> tone.
RgbImage cm(const RgbImage& rgb, const SynthConfig& config);

// One pre-clamp noisy sample: gamma_gain * Poisson(y/gamma_gain) + N(0, sigma^2).
// E[x] = y, Var[x] = gamma_gain*y + sigma^2.
double sample_noisy_value(double y, const NoiseParams& params, Rng& rng);

// Apply the mixed Poisson-Gaussian model per pixel, then clamp to [0,1].
RgbImage add_noise(const RgbImage& img, const NoiseParams& params, Rng& rng);
RawImage add_noise(const RawImage& img, const NoiseParams& params, Rng& rng);

// gt = r_cm(srgb); input = mosaic(add_noise(gt), kind). Dimensions must be
// multiples of 24 (the LCM of all pattern periods).
std::pair<RawImage, RgbImage> synth_pair(const RgbImage& srgb, const SynthConfig& config, const NoiseParams& noise,
                                         CfaKind kind);

} // namespace klap
