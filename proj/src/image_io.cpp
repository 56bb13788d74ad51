// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#include "klap/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

namespace klap {

namespace {

uint16_t to_u16(float v) {
    float c = std::clamp(v, 0.f, 1.f);
    long q = std::lround(double(c) * 65535.0);
    return uint16_t(std::clamp(q, 0L, 65535L));
}

void write_samples_be(std::ofstream& os, const std::vector<float>& data) {
    std::vector<unsigned char> buf(data.size() * 2);
    for (size_t i = 0; i < data.size(); ++i) {
        uint16_t q = to_u16(data[i]);
        buf[2 * i] = (unsigned char)(q >> 8);
        buf[2 * i + 1] = (unsigned char)(q & 0xff);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

// Reads one whitespace-delimited token, skipping '#' comments.
std::string next_token(std::istream& is) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(char(c));
            while ((c = is.peek()) != EOF && !std::isspace(c)) tok.push_back(char(is.get()));
            return tok;
        }
    }
    return tok;
}

struct PnmHeader {
    std::string magic;
    int width = 0, height = 0, maxval = 0;
};

PnmHeader read_header(std::istream& is, const std::filesystem::path& path) {
    PnmHeader h;
    h.magic = next_token(is);
    std::string w = next_token(is), ht = next_token(is), mv = next_token(is);
    if (w.empty() || ht.empty() || mv.empty()) throw FormatError("truncated PNM header in " + path.string());
    try {
        h.width = std::stoi(w);
        h.height = std::stoi(ht);
        h.maxval = std::stoi(mv);
    } catch (const std::exception&) {
        throw FormatError("bad PNM header in " + path.string());
    }
    if (h.width <= 0 || h.height <= 0) throw FormatError("bad PNM dimensions in " + path.string());
    // Exactly one whitespace byte separates header and samples; already consumed by get() above?
    // next_token leaves the stream right after the maxval token, so consume the single separator.
    is.get();
    return h;
}

std::vector<float> read_samples(std::istream& is, size_t count, int maxval, const std::filesystem::path& path) {
    std::vector<float> out(count);
    const double scale = 1.0 / double(maxval);
    if (maxval > 255) {
        std::vector<unsigned char> buf(count * 2);
        is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
        if (size_t(is.gcount()) != buf.size()) throw FormatError("truncated PNM payload in " + path.string());
        for (size_t i = 0; i < count; ++i) {
            uint16_t q = uint16_t((buf[2 * i] << 8) | buf[2 * i + 1]);
            out[i] = float(double(q) * scale);
        }
    } else {
        std::vector<unsigned char> buf(count);
        is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
        if (size_t(is.gcount()) != buf.size()) throw FormatError("truncated PNM payload in " + path.string());
        for (size_t i = 0; i < count; ++i) out[i] = float(double(buf[i]) * scale);
    }
    return out;
}

} // namespace

void write_pgm16(const std::filesystem::path& path, const RawImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "P5\n" << img.width << " " << img.height << "\n65535\n";
    write_samples_be(os, img.data);
    if (!os) throw IoError("write failed: " + path.string());
}

RawImage read_pgm16(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    PnmHeader h = read_header(is, path);
    if (h.magic != "P5") throw FormatError("not a binary PGM: " + path.string());
    RawImage img(h.height, h.width, CfaKind::Bayer);
    img.data = read_samples(is, img.pixel_count(), h.maxval, path);
    return img;
}

void write_ppm16(const std::filesystem::path& path, const RgbImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "P6\n" << img.width << " " << img.height << "\n65535\n";
    // PPM interleaves RGB per pixel.
    size_t n = img.pixel_count();
    std::vector<unsigned char> buf(n * 6);
    for (size_t i = 0; i < n; ++i) {
        for (int ch = 0; ch < 3; ++ch) {
            uint16_t q = to_u16(img.data[size_t(ch) * n + i]);
            buf[6 * i + size_t(2 * ch)] = (unsigned char)(q >> 8);
            buf[6 * i + size_t(2 * ch) + 1] = (unsigned char)(q & 0xff);
        }
    }
    os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

RgbImage read_ppm16(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    PnmHeader h = read_header(is, path);
    if (h.magic != "P6") throw FormatError("not a binary PPM: " + path.string());
    RgbImage img(h.height, h.width);
    std::vector<float> inter = read_samples(is, img.pixel_count() * 3, h.maxval, path);
    size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        for (int ch = 0; ch < 3; ++ch) img.data[size_t(ch) * n + i] = inter[3 * i + size_t(ch)];
    }
    return img;
}

std::filesystem::path meta_path_for(const std::filesystem::path& raw_path) {
    std::filesystem::path p = raw_path;
    p += ".meta.json";
    return p;
}

void write_raw_meta(const std::filesystem::path& raw_path, const RawMeta& meta) {
    nlohmann::json j;
    j["cfa"] = to_string(meta.cfa);
    j["gamma"] = meta.gamma;
    j["noise_gamma"] = meta.noise_gamma;
    j["noise_sigma"] = meta.noise_sigma;
    j["seed"] = meta.seed;
    std::ofstream os(meta_path_for(raw_path));
    if (!os) throw IoError("cannot open " + meta_path_for(raw_path).string() + " for writing");
    os << j.dump(2) << "\n";
}

RawMeta read_raw_meta(const std::filesystem::path& raw_path) {
    std::ifstream is(meta_path_for(raw_path));
    if (!is) throw IoError("cannot open " + meta_path_for(raw_path).string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sidecar " + meta_path_for(raw_path).string() + ": " + e.what());
    }
    RawMeta m;
    try {
        m.cfa = cfa_from_string(j.at("cfa").get<std::string>());
        m.gamma = j.at("gamma").get<double>();
        m.noise_gamma = j.at("noise_gamma").get<double>();
        m.noise_sigma = j.at("noise_sigma").get<double>();
        m.seed = j.at("seed").get<uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sidecar " + meta_path_for(raw_path).string() + ": " + e.what());
    }
    return m;
}

void write_raw_with_meta(const std::filesystem::path& path, const RawImage& img, const RawMeta& meta) {
    write_pgm16(path, img);
    write_raw_meta(path, meta);
}

RawImage read_raw_with_meta(const std::filesystem::path& path, RawMeta* meta_out) {
    RawImage img = read_pgm16(path);
    RawMeta m = read_raw_meta(path);
    img.kind = m.cfa;
    if (meta_out) *meta_out = m;
    return img;
}

} // namespace klap
