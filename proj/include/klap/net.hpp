// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "klap/cfa.hpp"
#include "klap/rng.hpp"

namespace klap {

// Compact fully-convolutional restoration network: 3x3 head (1->C), B residual
// blocks [3x3 (C->2C) -> multiplicative channel gate (2C->C) -> 3x3 (C->C) ->
// skip add], 3x3 tail (C->3). Stride 1, replicate padding everywhere.
struct NetSpec {
    int width = 16;  // C
    int blocks = 4;  // B

    void validate() const; // ConfigError: C > 0 and even, B >= 1
    int64_t param_count() const;
    int kernel_count() const;

    bool operator==(const NetSpec&) const = default;
};

// One convolution layer's parameters are stored kernel-contiguously: for each
// output channel, 9*in_ch weights followed by that channel's bias. A "kernel"
// (the unit of attribution and adaptation) is exactly one such slice.
struct LayerShape {
    std::string name;
    int in_ch = 0;
    int out_ch = 0;
    size_t offset = 0;

    size_t kernel_size() const { return size_t(9) * size_t(in_ch) + 1; }
    size_t size() const { return size_t(out_ch) * kernel_size(); }
};

struct KernelSlice {
    size_t offset = 0;
    size_t size = 0;
    int layer = 0;
    int out_channel = 0;
};

struct Layout {
    std::vector<LayerShape> layers;
    std::vector<KernelSlice> kernels;
    size_t total = 0;

    static Layout make(const NetSpec& spec);
};

// Flat parameter vector (32-bit floats, matching the checkpoint format
// bit-for-bit) plus its layer/kernel index map.
struct ParamStore {
    NetSpec spec;
    Layout layout;
    std::vector<float> values;

    size_t size() const { return values.size(); }

    static ParamStore zeros(const NetSpec& spec);
    static ParamStore random_init(const NetSpec& spec, Rng& rng);
};

// Activations retained by a forward pass, for the backward pass and for
// block-output feature losses.
struct ForwardTrace {
    NetSpec spec;
    int H = 0, W = 0;
    std::vector<double> input;                 // H*W
    std::vector<std::vector<double>> x;        // blocks+1 entries of C*H*W; x[0] = head output
    std::vector<std::vector<double>> pre_gate; // blocks entries of 2C*H*W
    std::vector<std::vector<double>> gated;    // blocks entries of C*H*W
    std::vector<double> out;                   // 3*H*W, unclamped
};

// Forward pass. ShapeError on empty input. Internal math is double precision;
// float parameters are widened on use.
void net_forward(const NetSpec& spec, const float* params, const double* input, int H, int W, ForwardTrace& trace);
// Double-parameter variant (parameter-space interpolation, gradient checks).
void net_forward_d(const NetSpec& spec, const double* params, const double* input, int H, int W, ForwardTrace& trace);

void net_forward(const ParamStore& params, const RawImage& raw, ForwardTrace& trace);

// Inference helper: forward + clamp to [0,1].
RgbImage net_infer(const ParamStore& params, const RawImage& raw);

// Exact reverse-mode gradients. `out_grad` is dLoss/d(trace.out) (3*H*W).
// `feature_grads`, when given, holds one C*H*W gradient per block that is
// added to that block output's upstream gradient (feature-matching losses).
// Parameter gradients are accumulated into `param_grads` (length = layout
// total); `input_grad` (H*W), if non-null, is overwritten.
// TraceMismatchError if the trace does not match `spec`.
void net_backward(const NetSpec& spec, const float* params, const ForwardTrace& trace, const double* out_grad,
                  double* param_grads, double* input_grad = nullptr,
                  const std::vector<std::vector<double>>* feature_grads = nullptr);
void net_backward_d(const NetSpec& spec, const double* params, const ForwardTrace& trace, const double* out_grad,
                    double* param_grads, double* input_grad = nullptr,
                    const std::vector<std::vector<double>>* feature_grads = nullptr);

// Mean absolute error and its subgradient with respect to `pred` (sign/n,
// zero at exact ties). `grad` may be null.
double l1_loss(const double* pred, const double* target, size_t n, double* grad);
double l1_loss(const double* pred, const float* target, size_t n, double* grad);
// Image-level convenience; ShapeError on mismatched shapes.
std::pair<double, std::vector<double>> l1_loss(const RgbImage& pred, const RgbImage& target);

// Clamped copy of the trace output.
RgbImage trace_output_clamped(const ForwardTrace& trace);

} // namespace klap
