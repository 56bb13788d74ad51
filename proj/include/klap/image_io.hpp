// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "klap/cfa.hpp"

namespace klap {

// Raw frames travel as binary PGM (P5), maxval 65535, samples big-endian per
// the Netpbm convention, value = round(v * 65535). RGB frames as binary PPM
// (P6) with the same scaling. A `<name>.meta.json` sidecar carries the CFA
// kind and synthesis parameters for raw files.

struct RawMeta {
    CfaKind cfa = CfaKind::Bayer;
    double gamma = 2.2;
    double noise_gamma = 0.0;
    double noise_sigma = 0.0;
    uint64_t seed = 0;
};

void write_pgm16(const std::filesystem::path& path, const RawImage& img);
RawImage read_pgm16(const std::filesystem::path& path); // kind left at Bayer; use sidecar

void write_ppm16(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_ppm16(const std::filesystem::path& path);

// Sidecar path for a raw file: "<stem-with-extension>.meta.json".
std::filesystem::path meta_path_for(const std::filesystem::path& raw_path);
void write_raw_meta(const std::filesystem::path& raw_path, const RawMeta& meta);
RawMeta read_raw_meta(const std::filesystem::path& raw_path);

// Convenience: raw + sidecar round trip.
void write_raw_with_meta(const std::filesystem::path& path, const RawImage& img, const RawMeta& meta);
RawImage read_raw_with_meta(const std::filesystem::path& path, RawMeta* meta_out = nullptr);

} // namespace klap
