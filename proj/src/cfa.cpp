// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#include "klap/cfa.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace klap {

const char* to_string(CfaKind k) {
    switch (k) {
    case CfaKind::Bayer: return "bayer";
    case CfaKind::Quad: return "quad";
    case CfaKind::Nona: return "nona";
    case CfaKind::QxQ: return "qxq";
    }
    return "?";
}

CfaKind cfa_from_string(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (s == "bayer") return CfaKind::Bayer;
    if (s == "quad") return CfaKind::Quad;
    if (s == "nona") return CfaKind::Nona;
    if (s == "qxq") return CfaKind::QxQ;
    throw ConfigError("unknown CFA kind: '" + name + "' (expected bayer|quad|nona|qxq)");
}

RawImage mosaic(const RgbImage& rgb, CfaKind kind) {
    int p = period(kind);
    if (rgb.height % p != 0 || rgb.width % p != 0) {
        throw DimensionError("mosaic: image " + std::to_string(rgb.width) + "x" + std::to_string(rgb.height) +
                             " is not a multiple of the " + to_string(kind) + " period " + std::to_string(p));
    }
    RawImage out(rgb.height, rgb.width, kind);
    for (int r = 0; r < rgb.height; ++r) {
        for (int c = 0; c < rgb.width; ++c) {
            out.at(r, c) = rgb.at(int(cfa_color_at(kind, r, c)), r, c);
        }
    }
    return out;
}

RgbImage replicate_to_rgb(const RawImage& raw) {
    RgbImage out(raw.height, raw.width);
    for (int ch = 0; ch < 3; ++ch) {
        float* dst = out.plane(ch);
        std::copy(raw.data.begin(), raw.data.end(), dst);
    }
    return out;
}

RawImage pixel_bin(const RawImage& raw, CfaKind to_kind) {
    if (raw.kind == CfaKind::Bayer) {
        throw BinningError("pixel_bin: no binning operation exists for Bayer input");
    }
    int uf = unit_size(raw.kind);
    int ut = unit_size(to_kind);
    if (ut >= uf || uf % ut != 0) {
        throw BinningError(std::string("pixel_bin: unsupported transition ") + to_string(raw.kind) + " -> " +
                           to_string(to_kind));
    }
    int f = uf / ut;
    assert(f >= 2);
    RawImage out(raw.height / f, raw.width / f, to_kind);
    const double norm = 1.0 / double(f * f);
    for (int r = 0; r < out.height; ++r) {
        for (int c = 0; c < out.width; ++c) {
            double acc = 0.0;
            for (int i = 0; i < f; ++i) {
                for (int j = 0; j < f; ++j) {
                    acc += double(raw.at(r * f + i, c * f + j));
                }
            }
            // Blocks align with unit boundaries, so every block is single-color.
            assert(cfa_color_at(raw.kind, r * f, c * f) == cfa_color_at(to_kind, r, c));
            out.at(r, c) = float(acc * norm);
        }
    }
    return out;
}

RgbImage upsample_bilinear(const RgbImage& img, int factor) {
    if (factor <= 1) return img;
    int H = img.height, W = img.width;
    int oh = H * factor, ow = W * factor;
    RgbImage out(oh, ow);

    std::vector<int> c0(size_t(ow)), c1(size_t(ow));
    std::vector<double> wc(size_t(ow));
    for (int j = 0; j < ow; ++j) {
        double x = (j + 0.5) / double(factor) - 0.5;
        double fx = std::floor(x);
        int i0 = int(fx);
        int i1 = i0 + 1;
        wc[size_t(j)] = x - fx;
        c0[size_t(j)] = std::clamp(i0, 0, W - 1);
        c1[size_t(j)] = std::clamp(i1, 0, W - 1);
    }
    for (int ch = 0; ch < 3; ++ch) {
        const float* src = img.plane(ch);
        float* dst = out.plane(ch);
        for (int i = 0; i < oh; ++i) {
            double y = (i + 0.5) / double(factor) - 0.5;
            double fy = std::floor(y);
            int r0 = std::clamp(int(fy), 0, H - 1);
            int r1 = std::clamp(int(fy) + 1, 0, H - 1);
            double wy = y - fy;
            const float* row0 = src + size_t(r0) * size_t(W);
            const float* row1 = src + size_t(r1) * size_t(W);
            float* orow = dst + size_t(i) * size_t(ow);
            for (int j = 0; j < ow; ++j) {
                double wx = wc[size_t(j)];
                double top = double(row0[c0[size_t(j)]]) * (1.0 - wx) + double(row0[c1[size_t(j)]]) * wx;
                double bot = double(row1[c0[size_t(j)]]) * (1.0 - wx) + double(row1[c1[size_t(j)]]) * wx;
                orow[j] = float(top * (1.0 - wy) + bot * wy);
            }
        }
    }
    return out;
}

void clamp01(RgbImage& img) {
    for (float& v : img.data) v = std::clamp(v, 0.f, 1.f);
}

void clamp01(RawImage& img) {
    for (float& v : img.data) v = std::clamp(v, 0.f, 1.f);
}

} // namespace klap
