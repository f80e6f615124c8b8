#pragma once

// Templated NHWC tensor engine: forward, exact backward, softmax cross-entropy.
// T = float for production, double for finite-difference gradient checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "histofeat/common.hpp"
#include "histofeat/parallel.hpp"

namespace histofeat::nn {

template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        long long n = 1;
        for (int d : shape) {
            if (d <= 0) throw ShapeError("non-positive tensor dimension");
            n *= d;
        }
        data.assign(std::size_t(n), T(0));
    }

    std::size_t numel() const { return data.size(); }
    int dim(std::size_t i) const { return shape.at(i); }
    int rank() const { return int(shape.size()); }

    void zero() { std::fill(data.begin(), data.end(), T(0)); }
};

using Tensor = TensorT<float>;

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

template <typename T>
struct ParamsT {
    std::vector<std::pair<std::string, TensorT<T>>> items;

    const TensorT<T>& at(const std::string& name) const {
        for (const auto& [n, t] : items)
            if (n == name) return t;
        throw ShapeError("missing parameter: " + name);
    }
    TensorT<T>& at(const std::string& name) {
        for (auto& [n, t] : items)
            if (n == name) return t;
        throw ShapeError("missing parameter: " + name);
    }
    const TensorT<T>* find(const std::string& name) const {
        for (const auto& [n, t] : items)
            if (n == name) return &t;
        return nullptr;
    }
    void add(const std::string& name, TensorT<T> t) {
        if (find(name)) throw ShapeError("duplicate parameter: " + name);
        items.emplace_back(name, std::move(t));
    }
};

using Params = ParamsT<float>;

template <typename T, typename U>
ParamsT<T> cast_params(const ParamsT<U>& in) {
    ParamsT<T> out;
    for (const auto& [name, t] : in.items) {
        TensorT<T> c(t.shape);
        for (std::size_t i = 0; i < t.data.size(); ++i) c.data[i] = T(t.data[i]);
        out.items.emplace_back(name, std::move(c));
    }
    return out;
}

enum class LayerKind { Conv2d, DepthwiseConv2d, PointwiseConv2d, Relu, GlobalAvgPool, Dense };

struct Layer {
    LayerKind kind;
    int stride = 1;
    int padding = 0;
    std::string wname;  // empty for parameterless layers
    std::string bname;
};

inline std::string layer_name(const Layer& l) {
    switch (l.kind) {
        case LayerKind::Conv2d: return "conv2d(" + l.wname + ")";
        case LayerKind::DepthwiseConv2d: return "depthwise(" + l.wname + ")";
        case LayerKind::PointwiseConv2d: return "pointwise(" + l.wname + ")";
        case LayerKind::Relu: return "relu";
        case LayerKind::GlobalAvgPool: return "global_avg_pool";
        case LayerKind::Dense: return "dense(" + l.wname + ")";
    }
    return "?";
}

namespace detail {

inline int conv_out_dim(int in, int kernel, int stride, int pad) {
    int out = (in + 2 * pad - kernel) / stride + 1;
    return out;
}

template <typename T>
void check_finite(const TensorT<T>& t, const std::string& where) {
    for (T v : t.data)
        if (!std::isfinite(double(v))) throw NumericalError("non-finite value after " + where);
}

// ---- conv2d: w [kh,kw,ic,oc], b [oc] ----

template <typename T>
TensorT<T> conv2d_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b, int stride,
                      int pad) {
    if (x.rank() != 4) throw ShapeError("conv2d expects NHWC input, got " + shape_str(x.shape));
    if (w.rank() != 4) throw ShapeError("conv2d weight must be rank 4");
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), IC = x.dim(3);
    const int KH = w.dim(0), KW = w.dim(1), OC = w.dim(3);
    if (w.dim(2) != IC)
        throw ShapeError("conv2d channel mismatch: input " + shape_str(x.shape) + " weight " +
                         shape_str(w.shape));
    if (b.rank() != 1 || b.dim(0) != OC) throw ShapeError("conv2d bias shape");
    const int OH = conv_out_dim(H, KH, stride, pad);
    const int OW = conv_out_dim(W, KW, stride, pad);
    if (OH <= 0 || OW <= 0) throw ShapeError("conv2d output would be empty");
    TensorT<T> y({N, OH, OW, OC});
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox)
                for (int oc = 0; oc < OC; ++oc) {
                    T acc = b.data[std::size_t(oc)];
                    for (int ky = 0; ky < KH; ++ky) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < KW; ++kx) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= W) continue;
                            const std::size_t xi = ((std::size_t(n) * H + iy) * W + ix) * IC;
                            const std::size_t wi = ((std::size_t(ky) * KW + kx) * IC) * OC;
                            for (int ic = 0; ic < IC; ++ic)
                                acc += x.data[xi + ic] * w.data[wi + std::size_t(ic) * OC + oc];
                        }
                    }
                    y.data[((std::size_t(n) * OH + oy) * OW + ox) * OC + oc] = acc;
                }
    return y;
}

template <typename T>
void conv2d_bwd(const TensorT<T>& x, const TensorT<T>& w, int stride, int pad,
                const TensorT<T>& dy, TensorT<T>& dx, TensorT<T>* dw, TensorT<T>* db) {
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), IC = x.dim(3);
    const int KH = w.dim(0), KW = w.dim(1), OC = w.dim(3);
    const int OH = dy.dim(1), OW = dy.dim(2);
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox)
                for (int oc = 0; oc < OC; ++oc) {
                    const T g = dy.data[((std::size_t(n) * OH + oy) * OW + ox) * OC + oc];
                    if (db) db->data[std::size_t(oc)] += g;
                    for (int ky = 0; ky < KH; ++ky) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < KW; ++kx) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= W) continue;
                            const std::size_t xi = ((std::size_t(n) * H + iy) * W + ix) * IC;
                            const std::size_t wi = ((std::size_t(ky) * KW + kx) * IC) * OC;
                            for (int ic = 0; ic < IC; ++ic) {
                                dx.data[xi + ic] += g * w.data[wi + std::size_t(ic) * OC + oc];
                                if (dw) dw->data[wi + std::size_t(ic) * OC + oc] += g * x.data[xi + ic];
                            }
                        }
                    }
                }
}

// ---- depthwise conv: w [kh,kw,c], b [c] ----

template <typename T>
TensorT<T> depthwise_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b, int stride,
                         int pad) {
    if (x.rank() != 4) throw ShapeError("depthwise expects NHWC input");
    if (w.rank() != 3) throw ShapeError("depthwise weight must be rank 3");
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    const int KH = w.dim(0), KW = w.dim(1);
    if (w.dim(2) != C)
        throw ShapeError("depthwise channel mismatch: input " + shape_str(x.shape) + " weight " +
                         shape_str(w.shape));
    if (b.rank() != 1 || b.dim(0) != C) throw ShapeError("depthwise bias shape");
    const int OH = conv_out_dim(H, KH, stride, pad);
    const int OW = conv_out_dim(W, KW, stride, pad);
    if (OH <= 0 || OW <= 0) throw ShapeError("depthwise output would be empty");
    TensorT<T> y({N, OH, OW, C});
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox)
                for (int c = 0; c < C; ++c) {
                    T acc = b.data[std::size_t(c)];
                    for (int ky = 0; ky < KH; ++ky) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < KW; ++kx) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= W) continue;
                            acc += x.data[((std::size_t(n) * H + iy) * W + ix) * C + c] *
                                   w.data[(std::size_t(ky) * KW + kx) * C + c];
                        }
                    }
                    y.data[((std::size_t(n) * OH + oy) * OW + ox) * C + c] = acc;
                }
    return y;
}

template <typename T>
void depthwise_bwd(const TensorT<T>& x, const TensorT<T>& w, int stride, int pad,
                   const TensorT<T>& dy, TensorT<T>& dx, TensorT<T>* dw, TensorT<T>* db) {
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    const int KH = w.dim(0), KW = w.dim(1);
    const int OH = dy.dim(1), OW = dy.dim(2);
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox)
                for (int c = 0; c < C; ++c) {
                    const T g = dy.data[((std::size_t(n) * OH + oy) * OW + ox) * C + c];
                    if (db) db->data[std::size_t(c)] += g;
                    for (int ky = 0; ky < KH; ++ky) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < KW; ++kx) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= W) continue;
                            const std::size_t xi = ((std::size_t(n) * H + iy) * W + ix) * C + c;
                            const std::size_t wi = (std::size_t(ky) * KW + kx) * C + c;
                            dx.data[xi] += g * w.data[wi];
                            if (dw) dw->data[wi] += g * x.data[xi];
                        }
                    }
                }
}

// ---- pointwise conv: w [ic,oc], b [oc]; stride subsamples, no padding ----

template <typename T>
TensorT<T> pointwise_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                         int stride) {
    if (x.rank() != 4) throw ShapeError("pointwise expects NHWC input");
    if (w.rank() != 2) throw ShapeError("pointwise weight must be rank 2");
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), IC = x.dim(3);
    const int OC = w.dim(1);
    if (w.dim(0) != IC)
        throw ShapeError("pointwise channel mismatch: input " + shape_str(x.shape) + " weight " +
                         shape_str(w.shape));
    if (b.rank() != 1 || b.dim(0) != OC) throw ShapeError("pointwise bias shape");
    const int OH = (H - 1) / stride + 1;
    const int OW = (W - 1) / stride + 1;
    TensorT<T> y({N, OH, OW, OC});
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox) {
                const std::size_t xi =
                    ((std::size_t(n) * H + std::size_t(oy) * stride) * W +
                     std::size_t(ox) * stride) *
                    IC;
                const std::size_t yi = ((std::size_t(n) * OH + oy) * OW + ox) * OC;
                for (int oc = 0; oc < OC; ++oc) {
                    T acc = b.data[std::size_t(oc)];
                    for (int ic = 0; ic < IC; ++ic)
                        acc += x.data[xi + ic] * w.data[std::size_t(ic) * OC + oc];
                    y.data[yi + oc] = acc;
                }
            }
    return y;
}

template <typename T>
void pointwise_bwd(const TensorT<T>& x, const TensorT<T>& w, int stride, const TensorT<T>& dy,
                   TensorT<T>& dx, TensorT<T>* dw, TensorT<T>* db) {
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), IC = x.dim(3);
    const int OC = w.dim(1);
    const int OH = dy.dim(1), OW = dy.dim(2);
    for (int n = 0; n < N; ++n)
        for (int oy = 0; oy < OH; ++oy)
            for (int ox = 0; ox < OW; ++ox) {
                const std::size_t xi =
                    ((std::size_t(n) * H + std::size_t(oy) * stride) * W +
                     std::size_t(ox) * stride) *
                    IC;
                const std::size_t yi = ((std::size_t(n) * OH + oy) * OW + ox) * OC;
                for (int oc = 0; oc < OC; ++oc) {
                    const T g = dy.data[yi + oc];
                    if (db) db->data[std::size_t(oc)] += g;
                    for (int ic = 0; ic < IC; ++ic) {
                        dx.data[xi + ic] += g * w.data[std::size_t(ic) * OC + oc];
                        if (dw) dw->data[std::size_t(ic) * OC + oc] += g * x.data[xi + ic];
                    }
                }
            }
}

// ---- relu / gap / dense ----

template <typename T>
TensorT<T> relu_fwd(const TensorT<T>& x) {
    TensorT<T> y = x;
    for (auto& v : y.data) v = v > T(0) ? v : T(0);
    return y;
}

template <typename T>
void relu_bwd(const TensorT<T>& x, const TensorT<T>& dy, TensorT<T>& dx) {
    for (std::size_t i = 0; i < x.data.size(); ++i)
        dx.data[i] += x.data[i] > T(0) ? dy.data[i] : T(0);
}

template <typename T>
TensorT<T> gap_fwd(const TensorT<T>& x) {
    if (x.rank() != 4) throw ShapeError("global_avg_pool expects NHWC input");
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    TensorT<T> y({N, C});
    const T inv = T(1) / T(H * W);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            T acc = T(0);
            for (int yx = 0; yx < H * W; ++yx)
                acc += x.data[(std::size_t(n) * H * W + yx) * C + c];
            y.data[std::size_t(n) * C + c] = acc * inv;
        }
    return y;
}

template <typename T>
void gap_bwd(const TensorT<T>& x, const TensorT<T>& dy, TensorT<T>& dx) {
    const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
    const T inv = T(1) / T(H * W);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T g = dy.data[std::size_t(n) * C + c] * inv;
            for (int yx = 0; yx < H * W; ++yx)
                dx.data[(std::size_t(n) * H * W + yx) * C + c] += g;
        }
}

template <typename T>
TensorT<T> dense_fwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    if (x.rank() != 2) throw ShapeError("dense expects rank-2 input, got " + shape_str(x.shape));
    if (w.rank() != 2) throw ShapeError("dense weight must be rank 2");
    const int N = x.dim(0), D = x.dim(1), U = w.dim(1);
    if (w.dim(0) != D)
        throw ShapeError("dense shape mismatch: input " + shape_str(x.shape) + " weight " +
                         shape_str(w.shape));
    if (b.rank() != 1 || b.dim(0) != U) throw ShapeError("dense bias shape");
    TensorT<T> y({N, U});
    for (int n = 0; n < N; ++n)
        for (int u = 0; u < U; ++u) {
            T acc = b.data[std::size_t(u)];
            for (int i = 0; i < D; ++i)
                acc += x.data[std::size_t(n) * D + i] * w.data[std::size_t(i) * U + u];
            y.data[std::size_t(n) * U + u] = acc;
        }
    return y;
}

template <typename T>
void dense_bwd(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& dy, TensorT<T>& dx,
               TensorT<T>* dw, TensorT<T>* db) {
    const int N = x.dim(0), D = x.dim(1), U = w.dim(1);
    for (int n = 0; n < N; ++n)
        for (int u = 0; u < U; ++u) {
            const T g = dy.data[std::size_t(n) * U + u];
            if (db) db->data[std::size_t(u)] += g;
            for (int i = 0; i < D; ++i) {
                dx.data[std::size_t(n) * D + i] += g * w.data[std::size_t(i) * U + u];
                if (dw) dw->data[std::size_t(i) * U + u] += g * x.data[std::size_t(n) * D + i];
            }
        }
}

}  // namespace detail

// Forward through a layer sequence; cache keeps every activation for backward.
// acts[0] is the input, acts[i+1] the output of layer i.
template <typename T>
std::vector<TensorT<T>> forward_seq(const std::vector<Layer>& seq, const ParamsT<T>& params,
                                    const TensorT<T>& input, bool check_finite = true) {
    std::vector<TensorT<T>> acts;
    acts.reserve(seq.size() + 1);
    acts.push_back(input);
    for (const auto& l : seq) {
        const TensorT<T>& x = acts.back();
        TensorT<T> y;
        switch (l.kind) {
            case LayerKind::Conv2d:
                y = detail::conv2d_fwd(x, params.at(l.wname), params.at(l.bname), l.stride,
                                       l.padding);
                break;
            case LayerKind::DepthwiseConv2d:
                y = detail::depthwise_fwd(x, params.at(l.wname), params.at(l.bname), l.stride,
                                          l.padding);
                break;
            case LayerKind::PointwiseConv2d:
                y = detail::pointwise_fwd(x, params.at(l.wname), params.at(l.bname), l.stride);
                break;
            case LayerKind::Relu:
                y = detail::relu_fwd(x);
                break;
            case LayerKind::GlobalAvgPool:
                y = detail::gap_fwd(x);
                break;
            case LayerKind::Dense:
                y = detail::dense_fwd(x, params.at(l.wname), params.at(l.bname));
                break;
        }
        if (check_finite) detail::check_finite(y, layer_name(l));
        acts.push_back(std::move(y));
    }
    return acts;
}

// Index of the activation that serves as the feature vector: output of the last
// ReLU (the penultimate dense layer's activations).
inline std::size_t feature_activation_index(const std::vector<Layer>& seq) {
    for (std::size_t i = seq.size(); i-- > 0;)
        if (seq[i].kind == LayerKind::Relu) return i + 1;
    throw ShapeError("layer sequence has no relu feature tap");
}

template <typename T>
struct SampleLoss {
    T loss = T(0);
    TensorT<T> dlogits;  // softmax - onehot, one row
};

// Stable per-row softmax cross-entropy.  logits: [N,C]; returns per-row losses
// and gradient wrt logits (unscaled by 1/N).
template <typename T>
SampleLoss<T> softmax_xent_row(const TensorT<T>& logits, int row, int label) {
    const int C = logits.dim(1);
    if (label < 0 || label >= C) throw InvalidInput("label out of range: " + std::to_string(label));
    const T* l = logits.data.data() + std::size_t(row) * C;
    T m = l[0];
    for (int c = 1; c < C; ++c) m = std::max(m, l[c]);
    T sum = T(0);
    for (int c = 0; c < C; ++c) sum += std::exp(l[c] - m);
    const T lse = m + std::log(sum);
    SampleLoss<T> out;
    out.loss = lse - l[label];
    out.dlogits = TensorT<T>({1, C});
    for (int c = 0; c < C; ++c) out.dlogits.data[std::size_t(c)] = std::exp(l[c] - m) / sum;
    out.dlogits.data[std::size_t(label)] -= T(1);
    return out;
}

// Zero-filled gradient buffers for the non-frozen parameters, preserving order.
template <typename T>
ParamsT<T> grad_buffers(const ParamsT<T>& params, const std::set<std::string>& frozen) {
    ParamsT<T> g;
    for (const auto& [name, t] : params.items)
        if (!frozen.count(name)) g.items.emplace_back(name, TensorT<T>(t.shape));
    return g;
}

// Backward for one sample given its forward cache; accumulates into `grads`
// (entries exist only for non-frozen params) and returns nothing else.
template <typename T>
void backward_sample(const std::vector<Layer>& seq, const ParamsT<T>& params,
                     const std::vector<TensorT<T>>& acts, const TensorT<T>& dlogits,
                     ParamsT<T>& grads) {
    TensorT<T> dy = dlogits;
    for (std::size_t i = seq.size(); i-- > 0;) {
        const Layer& l = seq[i];
        const TensorT<T>& x = acts[i];
        TensorT<T> dx(x.shape);
        TensorT<T>* dw = nullptr;
        TensorT<T>* db = nullptr;
        if (!l.wname.empty()) {
            for (auto& [name, t] : grads.items) {
                if (name == l.wname) dw = &t;
                if (name == l.bname) db = &t;
            }
        }
        switch (l.kind) {
            case LayerKind::Conv2d:
                detail::conv2d_bwd(x, params.at(l.wname), l.stride, l.padding, dy, dx, dw, db);
                break;
            case LayerKind::DepthwiseConv2d:
                detail::depthwise_bwd(x, params.at(l.wname), l.stride, l.padding, dy, dx, dw, db);
                break;
            case LayerKind::PointwiseConv2d:
                detail::pointwise_bwd(x, params.at(l.wname), l.stride, dy, dx, dw, db);
                break;
            case LayerKind::Relu:
                detail::relu_bwd(x, dy, dx);
                break;
            case LayerKind::GlobalAvgPool:
                detail::gap_bwd(x, dy, dx);
                break;
            case LayerKind::Dense:
                detail::dense_bwd(x, params.at(l.wname), dy, dx, dw, db);
                break;
        }
        dy = std::move(dx);
    }
}

template <typename T>
TensorT<T> slice_sample(const TensorT<T>& batch, int n) {
    std::vector<int> s = batch.shape;
    const std::size_t row = batch.numel() / std::size_t(s[0]);
    s[0] = 1;
    TensorT<T> out(s);
    std::copy(batch.data.begin() + std::size_t(n) * row,
              batch.data.begin() + std::size_t(n + 1) * row, out.data.begin());
    return out;
}

template <typename T>
struct LossGradsT {
    T loss = T(0);
    ParamsT<T> grads;
};

// Mean cross-entropy and exact parameter gradients.  Per-sample gradients are
// computed independently (shards may run in parallel) and folded in ascending
// sample order, so the result is bit-identical for any thread count.
template <typename T>
LossGradsT<T> loss_and_grads_seq(const std::vector<Layer>& seq, const ParamsT<T>& params,
                                 const TensorT<T>& batch, const std::vector<int>& labels,
                                 const std::set<std::string>& frozen, int threads) {
    const int N = batch.dim(0);
    if (int(labels.size()) != N)
        throw ShapeError("labels size " + std::to_string(labels.size()) + " != batch " +
                         std::to_string(N));
    LossGradsT<T> out;
    out.grads = grad_buffers(params, frozen);

    constexpr int kChunk = 32;
    std::vector<ParamsT<T>> sample_grads(std::size_t(std::min(N, kChunk)));
    for (auto& g : sample_grads) g = grad_buffers(params, frozen);
    std::vector<T> sample_loss(sample_grads.size());

    for (int base = 0; base < N; base += kChunk) {
        const int count = std::min(kChunk, N - base);
        parallel_for(std::size_t(count), threads, [&](std::size_t k) {
            const int n = base + int(k);
            for (auto& [name, t] : sample_grads[k].items) t.zero();
            TensorT<T> x = slice_sample(batch, n);
            auto acts = forward_seq(seq, params, x);
            auto sl = softmax_xent_row(acts.back(), 0, labels[std::size_t(n)]);
            sample_loss[k] = sl.loss;
            backward_sample(seq, params, acts, sl.dlogits, sample_grads[k]);
        });
        for (int k = 0; k < count; ++k) {
            out.loss += sample_loss[std::size_t(k)];
            for (std::size_t p = 0; p < out.grads.items.size(); ++p) {
                auto& dst = out.grads.items[p].second.data;
                const auto& src = sample_grads[std::size_t(k)].items[p].second.data;
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
            }
        }
    }

    const T inv = T(1) / T(N);
    out.loss *= inv;
    for (auto& [name, t] : out.grads.items)
        for (auto& v : t.data) v *= inv;
    if (!std::isfinite(double(out.loss))) throw NumericalError("non-finite loss");
    return out;
}

}  // namespace histofeat::nn
