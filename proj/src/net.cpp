// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#include "klap/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "klap/errors.hpp"

namespace klap {

void NetSpec::validate() const {
    if (width <= 0 || width % 2 != 0) throw ConfigError("net.width must be a positive even integer");
    if (blocks < 1) throw ConfigError("net.blocks must be >= 1");
}

int64_t NetSpec::param_count() const {
    int64_t C = width, B = blocks;
    return 9 * C + C + B * (9 * C * 2 * C + 2 * C + 9 * C * C + C) + 9 * 3 * C + 3;
}

int NetSpec::kernel_count() const { return width + 3 * width * blocks + 3; }

Layout Layout::make(const NetSpec& spec) {
    spec.validate();
    Layout lay;
    int C = spec.width;
    size_t off = 0;
    auto add = [&](const std::string& name, int in_ch, int out_ch) {
        LayerShape ls{name, in_ch, out_ch, off};
        int layer_idx = int(lay.layers.size());
        for (int k = 0; k < out_ch; ++k) {
            lay.kernels.push_back(KernelSlice{off + size_t(k) * ls.kernel_size(), ls.kernel_size(), layer_idx, k});
        }
        off += ls.size();
        lay.layers.push_back(std::move(ls));
    };
    add("head", 1, C);
    for (int b = 0; b < spec.blocks; ++b) {
        add("block" + std::to_string(b) + ".conv1", C, 2 * C);
        add("block" + std::to_string(b) + ".conv2", C, C);
    }
    add("tail", C, 3);
    lay.total = off;
    return lay;
}

ParamStore ParamStore::zeros(const NetSpec& spec) {
    ParamStore p;
    p.spec = spec;
    p.layout = Layout::make(spec);
    p.values.assign(p.layout.total, 0.f);
    return p;
}

ParamStore ParamStore::random_init(const NetSpec& spec, Rng& rng) {
    ParamStore p = zeros(spec);
    for (const LayerShape& ls : p.layout.layers) {
        double stddev = std::sqrt(2.0 / (9.0 * double(ls.in_ch)));
        for (int k = 0; k < ls.out_ch; ++k) {
            size_t base = ls.offset + size_t(k) * ls.kernel_size();
            for (size_t i = 0; i < size_t(9 * ls.in_ch); ++i) {
                p.values[base + i] = float(rng.gaussian(0.0, stddev));
            }
            p.values[base + size_t(9 * ls.in_ch)] = 0.f; // bias
        }
    }
    return p;
}

namespace {

// Replicate-pad one H*W plane into an (H+2)*(W+2) buffer.
void pad_replicate(const double* src, int H, int W, double* dst) {
    int pw = W + 2;
    for (int r = 0; r < H; ++r) {
        double* drow = dst + size_t(r + 1) * size_t(pw);
        const double* srow = src + size_t(r) * size_t(W);
        drow[0] = srow[0];
        std::memcpy(drow + 1, srow, size_t(W) * sizeof(double));
        drow[W + 1] = srow[W - 1];
    }
    std::memcpy(dst, dst + pw, size_t(pw) * sizeof(double));
    std::memcpy(dst + size_t(H + 1) * size_t(pw), dst + size_t(H) * size_t(pw), size_t(pw) * sizeof(double));
}

// Adjoint of pad_replicate: accumulate padded-plane gradients back onto the
// source pixels they were copied from. Overwrites dst.
void pad_replicate_adjoint(const double* gpad, int H, int W, double* dst) {
    int pw = W + 2;
    std::fill(dst, dst + size_t(H) * size_t(W), 0.0);
    for (int pr = 0; pr < H + 2; ++pr) {
        int sr = std::clamp(pr - 1, 0, H - 1);
        double* drow = dst + size_t(sr) * size_t(W);
        const double* grow = gpad + size_t(pr) * size_t(pw);
        drow[0] += grow[0];
        for (int pc = 1; pc <= W; ++pc) drow[pc - 1] += grow[pc];
        drow[W - 1] += grow[W + 1];
    }
}

template <typename PT>
void conv3x3_forward(const PT* wb, int cin, int cout, const double* padded, int H, int W, double* out) {
    const int pw = W + 2;
    const size_t hw = size_t(H) * size_t(W);
    const size_t ksz = size_t(9) * size_t(cin) + 1;
    for (int co = 0; co < cout; ++co) {
        const PT* wk = wb + size_t(co) * ksz;
        double* oplane = out + size_t(co) * hw;
        std::fill(oplane, oplane + hw, double(wk[9 * cin]));
        for (int ci = 0; ci < cin; ++ci) {
            const double* pplane = padded + size_t(ci) * size_t(H + 2) * size_t(pw);
            const PT* w9 = wk + size_t(ci) * 9;
            for (int r = 0; r < H; ++r) {
                double* orow = oplane + size_t(r) * size_t(W);
                for (int kr = 0; kr < 3; ++kr) {
                    const double* prow = pplane + size_t(r + kr) * size_t(pw);
                    const double w0 = double(w9[kr * 3 + 0]);
                    const double w1 = double(w9[kr * 3 + 1]);
                    const double w2 = double(w9[kr * 3 + 2]);
                    for (int c = 0; c < W; ++c) {
                        orow[c] += w0 * prow[c] + w1 * prow[c + 1] + w2 * prow[c + 2];
                    }
                }
            }
        }
    }
}

// Weight/bias gradients. Accumulates into gwb (same interleaved layout).
template <typename PT>
void conv3x3_backward_params(const double* padded, int cin, int cout, const double* gout, int H, int W, double* gwb) {
    const int pw = W + 2;
    const size_t hw = size_t(H) * size_t(W);
    const size_t ksz = size_t(9) * size_t(cin) + 1;
    (void)sizeof(PT);
    for (int co = 0; co < cout; ++co) {
        const double* gplane = gout + size_t(co) * hw;
        double* gk = gwb + size_t(co) * ksz;
        double gb = 0.0;
        for (size_t i = 0; i < hw; ++i) gb += gplane[i];
        gk[9 * cin] += gb;
        for (int ci = 0; ci < cin; ++ci) {
            const double* pplane = padded + size_t(ci) * size_t(H + 2) * size_t(pw);
            double acc[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
            for (int r = 0; r < H; ++r) {
                const double* grow = gplane + size_t(r) * size_t(W);
                for (int kr = 0; kr < 3; ++kr) {
                    const double* prow = pplane + size_t(r + kr) * size_t(pw);
                    double s0 = 0, s1 = 0, s2 = 0;
                    for (int c = 0; c < W; ++c) {
                        const double g = grow[c];
                        s0 += prow[c] * g;
                        s1 += prow[c + 1] * g;
                        s2 += prow[c + 2] * g;
                    }
                    acc[kr * 3 + 0] += s0;
                    acc[kr * 3 + 1] += s1;
                    acc[kr * 3 + 2] += s2;
                }
            }
            for (int i = 0; i < 9; ++i) gk[size_t(ci) * 9 + size_t(i)] += acc[i];
        }
    }
}

// Input gradients (through the replicate padding). Overwrites gin.
template <typename PT>
void conv3x3_backward_input(const PT* wb, int cin, int cout, const double* gout, int H, int W, double* gin,
                            double* gpad_scratch /* (H+2)*(W+2) */) {
    const int pw = W + 2;
    const size_t hw = size_t(H) * size_t(W);
    const size_t ksz = size_t(9) * size_t(cin) + 1;
    for (int ci = 0; ci < cin; ++ci) {
        std::fill(gpad_scratch, gpad_scratch + size_t(H + 2) * size_t(pw), 0.0);
        for (int co = 0; co < cout; ++co) {
            const double* gplane = gout + size_t(co) * hw;
            const PT* w9 = wb + size_t(co) * ksz + size_t(ci) * 9;
            for (int r = 0; r < H; ++r) {
                const double* grow = gplane + size_t(r) * size_t(W);
                for (int kr = 0; kr < 3; ++kr) {
                    double* prow = gpad_scratch + size_t(r + kr) * size_t(pw);
                    const double w0 = double(w9[kr * 3 + 0]);
                    const double w1 = double(w9[kr * 3 + 1]);
                    const double w2 = double(w9[kr * 3 + 2]);
                    for (int c = 0; c < W; ++c) {
                        const double g = grow[c];
                        prow[c] += w0 * g;
                        prow[c + 1] += w1 * g;
                        prow[c + 2] += w2 * g;
                    }
                }
            }
        }
        pad_replicate_adjoint(gpad_scratch, H, W, gin + size_t(ci) * hw);
    }
}

void gate_forward(const double* in, int C, size_t hw, double* out) {
    const double* a = in;
    const double* b = in + size_t(C) * hw;
    for (size_t i = 0; i < size_t(C) * hw; ++i) out[i] = a[i] * b[i];
}

void gate_backward(const double* in, const double* gout, int C, size_t hw, double* gin) {
    const double* a = in;
    const double* b = in + size_t(C) * hw;
    double* ga = gin;
    double* gb = gin + size_t(C) * hw;
    for (size_t i = 0; i < size_t(C) * hw; ++i) {
        ga[i] = gout[i] * b[i];
        gb[i] = gout[i] * a[i];
    }
}

struct PadBuffer {
    std::vector<double> buf;
    int H = 0, W = 0;

    // Pad `channels` planes of src into the buffer.
    const double* fill(const double* src, int channels, int H_, int W_) {
        H = H_;
        W = W_;
        size_t plane = size_t(H + 2) * size_t(W + 2);
        if (buf.size() < plane * size_t(channels)) buf.resize(plane * size_t(channels));
        for (int c = 0; c < channels; ++c) {
            pad_replicate(src + size_t(c) * size_t(H) * size_t(W), H, W, buf.data() + size_t(c) * plane);
        }
        return buf.data();
    }
};

template <typename PT>
void forward_impl(const NetSpec& spec, const PT* params, const double* input, int H, int W, ForwardTrace& trace) {
    spec.validate();
    if (H <= 0 || W <= 0) throw ShapeError("net_forward: empty input");
    const int C = spec.width, B = spec.blocks;
    const size_t hw = size_t(H) * size_t(W);
    const Layout lay = Layout::make(spec);

    trace.spec = spec;
    trace.H = H;
    trace.W = W;
    trace.input.assign(input, input + hw);
    trace.x.assign(size_t(B) + 1, {});
    trace.pre_gate.assign(size_t(B), {});
    trace.gated.assign(size_t(B), {});

    PadBuffer pad;

    trace.x[0].resize(size_t(C) * hw);
    conv3x3_forward(params + lay.layers[0].offset, 1, C, pad.fill(input, 1, H, W), H, W, trace.x[0].data());

    for (int b = 0; b < B; ++b) {
        const LayerShape& l1 = lay.layers[size_t(1 + 2 * b)];
        const LayerShape& l2 = lay.layers[size_t(2 + 2 * b)];
        trace.pre_gate[size_t(b)].resize(size_t(2 * C) * hw);
        conv3x3_forward(params + l1.offset, C, 2 * C, pad.fill(trace.x[size_t(b)].data(), C, H, W), H, W,
                        trace.pre_gate[size_t(b)].data());
        trace.gated[size_t(b)].resize(size_t(C) * hw);
        gate_forward(trace.pre_gate[size_t(b)].data(), C, hw, trace.gated[size_t(b)].data());
        trace.x[size_t(b) + 1].resize(size_t(C) * hw);
        conv3x3_forward(params + l2.offset, C, C, pad.fill(trace.gated[size_t(b)].data(), C, H, W), H, W,
                        trace.x[size_t(b) + 1].data());
        const double* prev = trace.x[size_t(b)].data();
        double* cur = trace.x[size_t(b) + 1].data();
        for (size_t i = 0; i < size_t(C) * hw; ++i) cur[i] += prev[i];
    }

    trace.out.resize(size_t(3) * hw);
    conv3x3_forward(params + lay.layers.back().offset, C, 3, pad.fill(trace.x[size_t(B)].data(), C, H, W), H, W,
                    trace.out.data());
}

template <typename PT>
void backward_impl(const NetSpec& spec, const PT* params, const ForwardTrace& trace, const double* out_grad,
                   double* param_grads, double* input_grad,
                   const std::vector<std::vector<double>>* feature_grads) {
    if (!(trace.spec == spec)) throw TraceMismatchError("net_backward: trace was produced by a different NetSpec");
    const int C = spec.width, B = spec.blocks;
    const int H = trace.H, W = trace.W;
    const size_t hw = size_t(H) * size_t(W);
    if (trace.out.size() != 3 * hw || trace.x.size() != size_t(B) + 1) {
        throw TraceMismatchError("net_backward: incomplete trace");
    }
    if (feature_grads && feature_grads->size() != size_t(B)) {
        throw ShapeError("net_backward: feature_grads must have one entry per block");
    }
    const Layout lay = Layout::make(spec);

    PadBuffer pad;
    std::vector<double> gpad(size_t(H + 2) * size_t(W + 2));
    std::vector<double> gx(size_t(C) * hw);       // gradient wrt current block output
    std::vector<double> gtmp(size_t(C) * hw);     // gradient wrt conv2 input (gated)
    std::vector<double> gpre(size_t(2 * C) * hw); // gradient wrt pre-gate
    std::vector<double> gprev(size_t(C) * hw);

    // Tail.
    {
        const LayerShape& lt = lay.layers.back();
        const double* padded = pad.fill(trace.x[size_t(B)].data(), C, H, W);
        conv3x3_backward_params<PT>(padded, C, 3, out_grad, H, W, param_grads + lt.offset);
        conv3x3_backward_input(params + lt.offset, C, 3, out_grad, H, W, gx.data(), gpad.data());
    }

    for (int b = B - 1; b >= 0; --b) {
        if (feature_grads) {
            const std::vector<double>& fg = (*feature_grads)[size_t(b)];
            if (fg.size() == gx.size()) {
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += fg[i];
            } else if (!fg.empty()) {
                throw ShapeError("net_backward: feature gradient has wrong size");
            }
        }
        const LayerShape& l1 = lay.layers[size_t(1 + 2 * b)];
        const LayerShape& l2 = lay.layers[size_t(2 + 2 * b)];

        // conv2: input was gated[b]; upstream is gx (residual add passes it through).
        {
            const double* padded = pad.fill(trace.gated[size_t(b)].data(), C, H, W);
            conv3x3_backward_params<PT>(padded, C, C, gx.data(), H, W, param_grads + l2.offset);
            conv3x3_backward_input(params + l2.offset, C, C, gx.data(), H, W, gtmp.data(), gpad.data());
        }
        gate_backward(trace.pre_gate[size_t(b)].data(), gtmp.data(), C, hw, gpre.data());
        {
            const double* padded = pad.fill(trace.x[size_t(b)].data(), C, H, W);
            conv3x3_backward_params<PT>(padded, C, 2 * C, gpre.data(), H, W, param_grads + l1.offset);
            conv3x3_backward_input(params + l1.offset, C, 2 * C, gpre.data(), H, W, gprev.data(), gpad.data());
        }
        // Residual skip: block input also receives gx directly.
        for (size_t i = 0; i < gx.size(); ++i) gx[i] = gprev[i] + gx[i];
    }

    // Head.
    {
        const LayerShape& lh = lay.layers[0];
        const double* padded = pad.fill(trace.input.data(), 1, H, W);
        conv3x3_backward_params<PT>(padded, 1, C, gx.data(), H, W, param_grads + lh.offset);
        if (input_grad) {
            conv3x3_backward_input(params + lh.offset, 1, C, gx.data(), H, W, input_grad, gpad.data());
        }
    }
}

} // namespace

void net_forward(const NetSpec& spec, const float* params, const double* input, int H, int W, ForwardTrace& trace) {
    forward_impl(spec, params, input, H, W, trace);
}

void net_forward_d(const NetSpec& spec, const double* params, const double* input, int H, int W, ForwardTrace& trace) {
    forward_impl(spec, params, input, H, W, trace);
}

void net_forward(const ParamStore& params, const RawImage& raw, ForwardTrace& trace) {
    std::vector<double> input(raw.data.begin(), raw.data.end());
    forward_impl(params.spec, params.values.data(), input.data(), raw.height, raw.width, trace);
}

RgbImage net_infer(const ParamStore& params, const RawImage& raw) {
    ForwardTrace trace;
    net_forward(params, raw, trace);
    return trace_output_clamped(trace);
}

void net_backward(const NetSpec& spec, const float* params, const ForwardTrace& trace, const double* out_grad,
                  double* param_grads, double* input_grad, const std::vector<std::vector<double>>* feature_grads) {
    backward_impl(spec, params, trace, out_grad, param_grads, input_grad, feature_grads);
}

void net_backward_d(const NetSpec& spec, const double* params, const ForwardTrace& trace, const double* out_grad,
                    double* param_grads, double* input_grad, const std::vector<std::vector<double>>* feature_grads) {
    backward_impl(spec, params, trace, out_grad, param_grads, input_grad, feature_grads);
}

double l1_loss(const double* pred, const double* target, size_t n, double* grad) {
    double acc = 0.0;
    const double inv = 1.0 / double(n);
    for (size_t i = 0; i < n; ++i) {
        double d = pred[i] - target[i];
        acc += std::abs(d);
        if (grad) grad[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
    }
    return acc * inv;
}

double l1_loss(const double* pred, const float* target, size_t n, double* grad) {
    double acc = 0.0;
    const double inv = 1.0 / double(n);
    for (size_t i = 0; i < n; ++i) {
        double d = pred[i] - double(target[i]);
        acc += std::abs(d);
        if (grad) grad[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
    }
    return acc * inv;
}

std::pair<double, std::vector<double>> l1_loss(const RgbImage& pred, const RgbImage& target) {
    if (pred.height != target.height || pred.width != target.width) {
        throw ShapeError("l1_loss: shape mismatch");
    }
    std::vector<double> p(pred.data.begin(), pred.data.end());
    std::vector<double> grad(p.size());
    double loss = l1_loss(p.data(), target.data.data(), p.size(), grad.data());
    return {loss, std::move(grad)};
}

RgbImage trace_output_clamped(const ForwardTrace& trace) {
    RgbImage out(trace.H, trace.W);
    for (size_t i = 0; i < trace.out.size(); ++i) {
        out.data[i] = float(std::clamp(trace.out[i], 0.0, 1.0));
    }
    return out;
}

} // namespace klap
