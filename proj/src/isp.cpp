// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#include "klap/isp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace klap {

namespace {

double det3(const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::array<std::array<double, 3>, 3> invert3(const std::array<std::array<double, 3>, 3>& m, double det) {
    std::array<std::array<double, 3>, 3> inv;
    double id = 1.0 / det;
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * id;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * id;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * id;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id;
    return inv;
}

inline double clamp01d(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

RgbImage matrix_apply(const RgbImage& rgb, const std::array<std::array<double, 3>, 3>& m) {
    RgbImage out(rgb.height, rgb.width);
    size_t n = rgb.pixel_count();
    const float* r = rgb.plane(0);
    const float* g = rgb.plane(1);
    const float* b = rgb.plane(2);
    float* ro = out.plane(0);
    float* go = out.plane(1);
    float* bo = out.plane(2);
    for (size_t i = 0; i < n; ++i) {
        double rv = r[i], gv = g[i], bv = b[i];
        ro[i] = float(clamp01d(m[0][0] * rv + m[0][1] * gv + m[0][2] * bv));
        go[i] = float(clamp01d(m[1][0] * rv + m[1][1] * gv + m[1][2] * bv));
        bo[i] = float(clamp01d(m[2][0] * rv + m[2][1] * gv + m[2][2] * bv));
    }
    return out;
}

} // namespace

void SynthConfig::finalize() {
    if (gamma <= 0.0) throw ConfigError("synth.gamma must be > 0");
    for (double g : awb_gains) {
        if (!(g > 0.0)) throw ConfigError("synth.awb_gains must be > 0");
    }
    double det = det3(ccm);
    if (std::abs(det) <= 1e-8) throw SingularMatrixError("synth.ccm is singular (|det| <= 1e-8)");
    ccm_inv = invert3(ccm, det);
}

SynthConfig SynthConfig::defaults() {
    SynthConfig c;
    c.finalize();
    return c;
}

SynthConfig SynthConfig::identity() {
    SynthConfig c;
    c.gamma = 1.0;
    c.tone_enabled = false;
    c.ccm = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    c.awb_gains = {1.0, 1.0, 1.0};
    c.finalize();
    return c;
}

void NoiseParams::validate() const {
    if (gamma_gain < 0.0) throw ConfigError("noise.gamma must be >= 0");
    if (sigma < 0.0) throw ConfigError("noise.sigma must be >= 0");
}

double tone_map(double v, MapDirection dir) {
    v = clamp01d(v);
    if (dir == MapDirection::Forward) {
        return v * v * (3.0 - 2.0 * v);
    }
    // Inverse smoothstep.
    return 0.5 - std::sin(std::asin(1.0 - 2.0 * v) / 3.0);
}

double gamma_map(double v, double gamma, MapDirection dir) {
    v = clamp01d(v);
    double e = dir == MapDirection::Inverse ? gamma : 1.0 / gamma;
    return std::pow(v, e);
}

RgbImage ccm_apply(const RgbImage& rgb, const SynthConfig& config, MapDirection dir) {
    return matrix_apply(rgb, dir == MapDirection::Forward ? config.ccm : config.ccm_inv);
}

RgbImage awb_apply(const RgbImage& rgb, const SynthConfig& config, MapDirection dir) {
    RgbImage out(rgb.height, rgb.width);
    size_t n = rgb.pixel_count();
    for (int ch = 0; ch < 3; ++ch) {
        double k = dir == MapDirection::Forward ? config.awb_gains[size_t(ch)] : 1.0 / config.awb_gains[size_t(ch)];
        const float* src = rgb.plane(ch);
        float* dst = out.plane(ch);
        for (size_t i = 0; i < n; ++i) dst[i] = float(clamp01d(double(src[i]) * k));
    }
    return out;
}

RgbImage r_cm(const RgbImage& rgb, const SynthConfig& config) {
    RgbImage img = rgb;
    if (config.tone_enabled) {
        for (float& v : img.data) v = float(tone_map(double(v), MapDirection::Inverse));
    }
    if (config.gamma != 1.0) {
        for (float& v : img.data) v = float(gamma_map(double(v), config.gamma, MapDirection::Inverse));
    }
    img = ccm_apply(img, config, MapDirection::Inverse);
    img = awb_apply(img, config, MapDirection::Inverse);
    return img;
}

RgbImage cm(const RgbImage& rgb, const SynthConfig& config) {
    RgbImage img = awb_apply(rgb, config, MapDirection::Forward);
    img = ccm_apply(img, config, MapDirection::Forward);
    if (config.gamma != 1.0) {
        for (float& v : img.data) v = float(gamma_map(double(v), config.gamma, MapDirection::Forward));
    }
    if (config.tone_enabled) {
        for (float& v : img.data) v = float(tone_map(double(v), MapDirection::Forward));
    }
    return img;
}

double sample_noisy_value(double y, const NoiseParams& params, Rng& rng) {
    double x = y;
    if (params.gamma_gain > 0.0) {
        x = params.gamma_gain * double(rng.poisson(y / params.gamma_gain));
    }
    if (params.sigma > 0.0) {
        x += rng.gaussian(0.0, params.sigma);
    }
    return x;
}

RgbImage add_noise(const RgbImage& img, const NoiseParams& params, Rng& rng) {
    RgbImage out(img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = float(clamp01d(sample_noisy_value(double(img.data[i]), params, rng)));
    }
    return out;
}

RawImage add_noise(const RawImage& img, const NoiseParams& params, Rng& rng) {
    RawImage out(img.height, img.width, img.kind);
    out.bit_depth_hint = img.bit_depth_hint;
    for (size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = float(clamp01d(sample_noisy_value(double(img.data[i]), params, rng)));
    }
    return out;
}

std::pair<RawImage, RgbImage> synth_pair(const RgbImage& srgb, const SynthConfig& config, const NoiseParams& noise,
                                         CfaKind kind) {
    if (srgb.height % kPatternLcm != 0 || srgb.width % kPatternLcm != 0) {
        throw DimensionError("synth_pair: dimensions must be multiples of " + std::to_string(kPatternLcm) + ", got " +
                             std::to_string(srgb.width) + "x" + std::to_string(srgb.height));
    }
    RgbImage gt = r_cm(srgb, config);
    Rng rng(noise.seed);
    RgbImage noisy = add_noise(gt, noise, rng);
    RawImage raw = mosaic(noisy, kind);
    return {std::move(raw), std::move(gt)};
}

} // namespace klap
