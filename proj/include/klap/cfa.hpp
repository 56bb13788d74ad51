// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "klap/errors.hpp"

namespace klap {

// Sensor color-filter-array layouts. A pattern is a 2x2 Bayer arrangement of
// homogeneous single-color units of unit_size x unit_size pixels, base order
// Gr R / B Gb (GRBG).
enum class CfaKind : int { Bayer = 0, Quad = 1, Nona = 2, QxQ = 3 };

constexpr int kCfaCount = 4;
constexpr CfaKind kAllCfa[kCfaCount] = {CfaKind::Bayer, CfaKind::Quad, CfaKind::Nona, CfaKind::QxQ};

// Least common multiple of all pattern periods (2, 4, 6, 8).
constexpr int kPatternLcm = 24;

constexpr int unit_size(CfaKind k) {
    switch (k) {
    case CfaKind::Bayer: return 1;
    case CfaKind::Quad: return 2;
    case CfaKind::Nona: return 3;
    case CfaKind::QxQ: return 4;
    }
    return 1;
}

constexpr int period(CfaKind k) { return 2 * unit_size(k); }

const char* to_string(CfaKind k);
CfaKind cfa_from_string(const std::string& name); // ConfigError on unknown name

enum class Channel : int { R = 0, G = 1, B = 2 };

// Color of the filter at (row, col). Total over all non-negative coordinates.
constexpr Channel cfa_color_at(CfaKind kind, int row, int col) {
    int s = unit_size(kind);
    int ur = (row / s) % 2;
    int uc = (col / s) % 2;
    // (0,0)=Gr (0,1)=R (1,0)=B (1,1)=Gb
    if (ur == 0 && uc == 1) return Channel::R;
    if (ur == 1 && uc == 0) return Channel::B;
    return Channel::G;
}

// Single-channel mosaic frame. Values in [0,1], row-major.
struct RawImage {
    int height = 0;
    int width = 0;
    CfaKind kind = CfaKind::Bayer;
    int bit_depth_hint = 16;
    std::vector<float> data; // height*width

    RawImage() = default;
    RawImage(int h, int w, CfaKind k) : height(h), width(w), kind(k), data(size_t(h) * size_t(w), 0.f) {}

    float& at(int r, int c) { return data[size_t(r) * size_t(width) + size_t(c)]; }
    float at(int r, int c) const { return data[size_t(r) * size_t(width) + size_t(c)]; }
    size_t pixel_count() const { return size_t(height) * size_t(width); }
};

// 3-channel linear-light frame, channel-major (C,H,W), row-major planes.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<float> data; // 3*height*width

    RgbImage() = default;
    RgbImage(int h, int w) : height(h), width(w), data(size_t(3) * size_t(h) * size_t(w), 0.f) {}

    float& at(int ch, int r, int c) { return data[(size_t(ch) * size_t(height) + size_t(r)) * size_t(width) + size_t(c)]; }
    float at(int ch, int r, int c) const {
        return data[(size_t(ch) * size_t(height) + size_t(r)) * size_t(width) + size_t(c)];
    }
    float* plane(int ch) { return data.data() + size_t(ch) * size_t(height) * size_t(width); }
    const float* plane(int ch) const { return data.data() + size_t(ch) * size_t(height) * size_t(width); }
    size_t pixel_count() const { return size_t(height) * size_t(width); }
};

// Sample the CFA channel of every pixel. DimensionError unless H and W are
// multiples of the pattern period.
RawImage mosaic(const RgbImage& rgb, CfaKind kind);

// Copy the mosaic value into all three channels of every pixel.
RgbImage replicate_to_rgb(const RawImage& raw);

// Average non-overlapping blocks of a finer pattern into a coarser one.
// Allowed: QxQ->{Quad,Bayer}, Quad->Bayer, Nona->Bayer. BinningError otherwise
// (in particular for Bayer input, where no binning operation exists).
RawImage pixel_bin(const RawImage& raw, CfaKind to_kind);

// Bilinear upsampling by an integer factor, half-pixel-center convention with
// border clamping.
RgbImage upsample_bilinear(const RgbImage& img, int factor);

// Clamp every sample of an image to [0,1] in place.
void clamp01(RgbImage& img);
void clamp01(RawImage& img);

} // namespace klap
