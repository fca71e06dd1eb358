#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "auricle/parallel.hpp"
#include "auricle/tensor.hpp"

// Forward and backward kernels for the handful of layer types the encoder
// uses. Everything is templated on the scalar so the finite-difference
// checker can run the exact same code in double.
//
// Conventions:
//  - activations are {B, C, H, W} or {B, F}, weights use torch-style layouts
//    ({C_out, C_in, kh, kw} for conv, {out, in} for dense),
//  - backward takes the values the math needs explicitly instead of opaque
//    cache objects; pool layers return their argmax indices for reuse,
//  - forward passes may fan out across the batch (disjoint writes), backward
//    accumulates weight gradients serially in sample order so results do not
//    depend on the thread count.

namespace auricle {

// --- conv 3x3, stride 1, same padding ---------------------------------------

namespace detail {

// Scatter a {C_in * 9, H * W} patch matrix into column-major-by-position form
// for one sample: row (c * 9 + ky * 3 + kx), column (y * W + x).
template <typename S>
void im2col3x3(const S* x, std::int64_t c_in, std::int64_t h, std::int64_t w, S* col) {
    const std::int64_t hw = h * w;
    for (std::int64_t c = 0; c < c_in; ++c) {
        const S* plane = x + c * hw;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                S* row = col + (c * 9 + ky * 3 + kx) * hw;
                const std::int64_t dy = ky - 1, dx = kx - 1;
                for (std::int64_t y = 0; y < h; ++y) {
                    const std::int64_t sy = y + dy;
                    S* out = row + y * w;
                    if (sy < 0 || sy >= h) {
                        std::fill(out, out + w, S(0));
                        continue;
                    }
                    const S* src = plane + sy * w;
                    const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
                    const std::int64_t x1 = std::min(w, w - dx);
                    if (x0 > 0) std::fill(out, out + x0, S(0));
                    for (std::int64_t xx = x0; xx < x1; ++xx) out[xx] = src[xx + dx];
                    if (x1 < w) std::fill(out + x1, out + w, S(0));
                }
            }
        }
    }
}

// Transpose of im2col3x3: accumulate patch-matrix gradients back into the
// input image.
template <typename S>
void col2im3x3(const S* col, std::int64_t c_in, std::int64_t h, std::int64_t w, S* dx) {
    const std::int64_t hw = h * w;
    for (std::int64_t c = 0; c < c_in; ++c) {
        S* plane = dx + c * hw;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const S* row = col + (c * 9 + ky * 3 + kx) * hw;
                const std::int64_t dy = ky - 1, dxo = kx - 1;
                for (std::int64_t y = 0; y < h; ++y) {
                    const std::int64_t sy = y + dy;
                    if (sy < 0 || sy >= h) continue;
                    S* dst = plane + sy * w;
                    const S* src = row + y * w;
                    const std::int64_t x0 = std::max<std::int64_t>(0, -dxo);
                    const std::int64_t x1 = std::min(w, w - dxo);
                    for (std::int64_t xx = x0; xx < x1; ++xx) dst[xx + dxo] += src[xx];
                }
            }
        }
    }
}

}  // namespace detail

// x {B, C_in, H, W}, w {C_out, C_in, 3, 3}, b {C_out} -> {B, C_out, H, W}
template <typename S>
TensorOf<S> conv3x3_forward(const TensorOf<S>& x, const TensorOf<S>& w, const TensorOf<S>& b) {
    require_rank("conv3x3", x, 4);
    require_rank("conv3x3", w, 4);
    if (w.dim(1) != x.dim(1) || w.dim(2) != 3 || w.dim(3) != 3) {
        throw ShapeError("conv3x3: weight " + TensorOf<S>::shape_string(w.shape()) +
                         " does not match input " + TensorOf<S>::shape_string(x.shape()));
    }
    require_shape("conv3x3 bias", b, {w.dim(0)});
    const std::int64_t bsz = x.dim(0), c_in = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::int64_t c_out = w.dim(0), k = c_in * 9, hw = h * wd;

    TensorOf<S> y({bsz, c_out, h, wd});
    parallel_for(bsz, [&](std::int64_t s) {
        std::vector<S> col(static_cast<std::size_t>(k) * hw);
        detail::im2col3x3(x.data() + s * c_in * hw, c_in, h, wd, col.data());
        S* ys = y.data() + s * c_out * hw;
        for (std::int64_t c = 0; c < c_out; ++c) {
            S* row = ys + c * hw;
            std::fill(row, row + hw, b[c]);
        }
        gemm_accumulate(w.data(), col.data(), ys, c_out, k, hw);
    });
    return y;
}

template <typename S>
void conv3x3_backward(const TensorOf<S>& x, const TensorOf<S>& w, const TensorOf<S>& dy,
                      TensorOf<S>* dx, TensorOf<S>* dw, TensorOf<S>* db) {
    const std::int64_t bsz = x.dim(0), c_in = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::int64_t c_out = w.dim(0), k = c_in * 9, hw = h * wd;
    require_shape("conv3x3 backward", dy, {bsz, c_out, h, wd});

    *dx = TensorOf<S>(x.shape());
    *dw = TensorOf<S>(w.shape());
    *db = TensorOf<S>({c_out});
    const TensorOf<S> wt = transpose(TensorOf<S>({c_out, k}, std::vector<S>(w.values())));

    std::vector<S> col(static_cast<std::size_t>(k) * hw);
    std::vector<S> dcol(static_cast<std::size_t>(k) * hw);
    for (std::int64_t s = 0; s < bsz; ++s) {
        const S* dys = dy.data() + s * c_out * hw;

        // dX: scatter W^T * dY back through the patch layout.
        std::fill(dcol.begin(), dcol.end(), S(0));
        gemm_accumulate(wt.data(), dys, dcol.data(), k, c_out, hw);
        detail::col2im3x3(dcol.data(), c_in, h, wd, dx->data() + s * c_in * hw);

        // dW: dY * col(x)^T, accumulated across the batch in sample order.
        detail::im2col3x3(x.data() + s * c_in * hw, c_in, h, wd, col.data());
        const TensorOf<S> colt =
            transpose(TensorOf<S>({k, hw}, std::vector<S>(col.begin(), col.end())));
        gemm_accumulate(dys, colt.data(), dw->data(), c_out, hw, k);

        for (std::int64_t c = 0; c < c_out; ++c) {
            S acc = S(0);
            const S* row = dys + c * hw;
            for (std::int64_t i = 0; i < hw; ++i) acc += row[i];
            (*db)[c] += acc;
        }
    }
}

// --- relu --------------------------------------------------------------------

template <typename S>
TensorOf<S> relu_forward(const TensorOf<S>& x) {
    TensorOf<S> y(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
    return y;
}

template <typename S>
TensorOf<S> relu_backward(const TensorOf<S>& x, const TensorOf<S>& dy) {
    if (!x.same_shape(dy)) throw ShapeError("relu backward: shape mismatch");
    TensorOf<S> dx(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) dx[i] = x[i] > S(0) ? dy[i] : S(0);
    return dx;
}

// --- max pooling -------------------------------------------------------------

// 2x2 window, stride 2, floor semantics for odd extents. Ties go to the
// first element in scan order, and the returned indices (flat offsets within
// each sample) drive the backward scatter.
template <typename S>
TensorOf<S> maxpool2_forward(const TensorOf<S>& x, std::vector<std::int64_t>* indices) {
    require_rank("maxpool2", x, 4);
    const std::int64_t bsz = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::int64_t oh = h / 2, ow = w / 2;
    if (oh == 0 || ow == 0) {
        throw ShapeError("maxpool2: input " + TensorOf<S>::shape_string(x.shape()) + " too small");
    }
    TensorOf<S> y({bsz, c, oh, ow});
    indices->assign(static_cast<std::size_t>(y.numel()), 0);
    parallel_for(bsz, [&](std::int64_t s) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
            const S* plane = x.data() + (s * c + ch) * h * w;
            for (std::int64_t oy = 0; oy < oh; ++oy) {
                for (std::int64_t ox = 0; ox < ow; ++ox) {
                    std::int64_t best = (oy * 2) * w + ox * 2;
                    S best_v = plane[best];
                    for (int ky = 0; ky < 2; ++ky) {
                        for (int kx = 0; kx < 2; ++kx) {
                            const std::int64_t idx = (oy * 2 + ky) * w + ox * 2 + kx;
                            if (plane[idx] > best_v) {
                                best_v = plane[idx];
                                best = idx;
                            }
                        }
                    }
                    const std::int64_t o = ((s * c + ch) * oh + oy) * ow + ox;
                    y[o] = best_v;
                    (*indices)[o] = (ch * h * w) + best;
                }
            }
        }
    });
    return y;
}

template <typename S>
TensorOf<S> maxpool2_backward(const TensorOf<S>& dy, const std::vector<std::int64_t>& indices,
                              const std::vector<std::int64_t>& in_shape) {
    TensorOf<S> dx(in_shape);
    const std::int64_t bsz = in_shape[0];
    const std::int64_t per_sample = in_shape[1] * in_shape[2] * in_shape[3];
    const std::int64_t out_per_sample = dy.numel() / bsz;
    for (std::int64_t s = 0; s < bsz; ++s) {
        S* dst = dx.data() + s * per_sample;
        for (std::int64_t i = 0; i < out_per_sample; ++i) {
            const std::int64_t o = s * out_per_sample + i;
            dst[indices[o]] += dy[o];
        }
    }
    return dx;
}

// Collapse each channel to its spatial maximum: {B, C, H, W} -> {B, C}.
template <typename S>
TensorOf<S> global_maxpool_forward(const TensorOf<S>& x, std::vector<std::int64_t>* indices) {
    require_rank("global_maxpool", x, 4);
    const std::int64_t bsz = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    TensorOf<S> y({bsz, c});
    indices->assign(static_cast<std::size_t>(bsz * c), 0);
    parallel_for(bsz, [&](std::int64_t s) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
            const S* plane = x.data() + (s * c + ch) * hw;
            std::int64_t best = 0;
            for (std::int64_t i = 1; i < hw; ++i) {
                if (plane[i] > plane[best]) best = i;
            }
            y.at(s, ch) = plane[best];
            (*indices)[s * c + ch] = best;
        }
    });
    return y;
}

template <typename S>
TensorOf<S> global_maxpool_backward(const TensorOf<S>& dy, const std::vector<std::int64_t>& indices,
                                    const std::vector<std::int64_t>& in_shape) {
    TensorOf<S> dx(in_shape);
    const std::int64_t bsz = in_shape[0], c = in_shape[1], hw = in_shape[2] * in_shape[3];
    for (std::int64_t s = 0; s < bsz; ++s) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
            dx.data()[(s * c + ch) * hw + indices[s * c + ch]] += dy.at(s, ch);
        }
    }
    return dx;
}

// --- dense -------------------------------------------------------------------

// x {B, in}, w {out, in}, b {out} -> {B, out}
template <typename S>
TensorOf<S> dense_forward(const TensorOf<S>& x, const TensorOf<S>& w, const TensorOf<S>& b) {
    require_rank("dense", x, 2);
    require_rank("dense", w, 2);
    if (x.dim(1) != w.dim(1)) {
        throw ShapeError("dense: input width " + std::to_string(x.dim(1)) +
                         " does not match weight " + TensorOf<S>::shape_string(w.shape()));
    }
    require_shape("dense bias", b, {w.dim(0)});
    TensorOf<S> y = matmul_nt(x, w);
    for (std::int64_t i = 0; i < y.dim(0); ++i)
        for (std::int64_t j = 0; j < y.dim(1); ++j) y.at(i, j) += b[j];
    return y;
}

template <typename S>
void dense_backward(const TensorOf<S>& x, const TensorOf<S>& w, const TensorOf<S>& dy,
                    TensorOf<S>* dx, TensorOf<S>* dw, TensorOf<S>* db) {
    require_shape("dense backward", dy, {x.dim(0), w.dim(0)});
    *dx = matmul(dy, w);
    *dw = matmul_tn(dy, x);
    *db = TensorOf<S>({w.dim(0)});
    for (std::int64_t i = 0; i < dy.dim(0); ++i)
        for (std::int64_t j = 0; j < dy.dim(1); ++j) (*db)[j] += dy.at(i, j);
}

// --- layer norm --------------------------------------------------------------

inline constexpr double kLayerNormEps = 1e-5;

template <typename S>
struct LayerNormCache {
    TensorOf<S> xhat;  // normalized input, {B, F}
    TensorOf<S> rstd;  // 1 / sqrt(var + eps), {B}
};

// Row-wise normalization over the feature axis with population variance,
// then an affine gamma/beta.
template <typename S>
TensorOf<S> layernorm_forward(const TensorOf<S>& x, const TensorOf<S>& gamma,
                              const TensorOf<S>& beta, LayerNormCache<S>* cache) {
    require_rank("layernorm", x, 2);
    const std::int64_t bsz = x.dim(0), f = x.dim(1);
    require_shape("layernorm gamma", gamma, {f});
    require_shape("layernorm beta", beta, {f});

    TensorOf<S> y(x.shape());
    cache->xhat = TensorOf<S>(x.shape());
    cache->rstd = TensorOf<S>({bsz});
    for (std::int64_t i = 0; i < bsz; ++i) {
        const S* row = x.data() + i * f;
        S mean = S(0);
        for (std::int64_t j = 0; j < f; ++j) mean += row[j];
        mean /= static_cast<S>(f);
        S var = S(0);
        for (std::int64_t j = 0; j < f; ++j) {
            const S d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<S>(f);
        const S rstd = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
        cache->rstd[i] = rstd;
        for (std::int64_t j = 0; j < f; ++j) {
            const S xh = (row[j] - mean) * rstd;
            cache->xhat.at(i, j) = xh;
            y.at(i, j) = gamma[j] * xh + beta[j];
        }
    }
    return y;
}

template <typename S>
void layernorm_backward(const LayerNormCache<S>& cache, const TensorOf<S>& gamma,
                        const TensorOf<S>& dy, TensorOf<S>* dx, TensorOf<S>* dgamma,
                        TensorOf<S>* dbeta) {
    const std::int64_t bsz = dy.dim(0), f = dy.dim(1);
    *dx = TensorOf<S>(dy.shape());
    *dgamma = TensorOf<S>({f});
    *dbeta = TensorOf<S>({f});
    for (std::int64_t i = 0; i < bsz; ++i) {
        const S* dyr = dy.data() + i * f;
        const S* xh = cache.xhat.data() + i * f;
        S sum_dxhat = S(0), sum_dxhat_xhat = S(0);
        for (std::int64_t j = 0; j < f; ++j) {
            const S dxhat = dyr[j] * gamma[j];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xh[j];
            (*dgamma)[j] += dyr[j] * xh[j];
            (*dbeta)[j] += dyr[j];
        }
        const S inv_f = S(1) / static_cast<S>(f);
        for (std::int64_t j = 0; j < f; ++j) {
            const S dxhat = dyr[j] * gamma[j];
            (*dx).at(i, j) =
                cache.rstd[i] * (dxhat - inv_f * sum_dxhat - xh[j] * inv_f * sum_dxhat_xhat);
        }
    }
}

// --- tanh --------------------------------------------------------------------

template <typename S>
TensorOf<S> tanh_forward(const TensorOf<S>& x) {
    TensorOf<S> y(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = std::tanh(x[i]);
    return y;
}

// Takes the forward output, since d tanh = 1 - tanh^2.
template <typename S>
TensorOf<S> tanh_backward(const TensorOf<S>& y, const TensorOf<S>& dy) {
    if (!y.same_shape(dy)) throw ShapeError("tanh backward: shape mismatch");
    TensorOf<S> dx(y.shape());
    for (std::int64_t i = 0; i < y.numel(); ++i) dx[i] = dy[i] * (S(1) - y[i] * y[i]);
    return dx;
}

}  // namespace auricle
