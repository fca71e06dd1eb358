#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "auricle/layers.hpp"
#include "auricle/rng.hpp"
#include "auricle/tensor.hpp"

namespace auricle {

enum class SimilarityKind { bilinear, cosine };

// Architecture knobs. The encoder is a stack of conv3x3 -> relu -> maxpool2
// blocks followed by a global max pool, so the embedding width equals the
// last channel count. The projection keeps pair scoring apart from the
// embedding that downstream heads consume.
struct ModelConfig {
    int n_mels = 64;
    int frames = 96;
    std::vector<int> channels = {32, 64, 128, 256};
    int proj_dim = 512;
    SimilarityKind similarity = SimilarityKind::bilinear;
    double temperature = 0.2;  // cosine head only
    bool symmetric_loss = false;

    int embed_dim() const { return channels.empty() ? 0 : channels.back(); }
};

template <typename S>
struct ConvBlockParamsT {
    TensorOf<S> w;  // {C_out, C_in, 3, 3}
    TensorOf<S> b;  // {C_out}
};

template <typename S>
struct EncoderParamsT {
    std::vector<ConvBlockParamsT<S>> blocks;
};

template <typename S>
struct ProjectionParamsT {
    TensorOf<S> w;      // {k, d}
    TensorOf<S> b;      // {k}
    TensorOf<S> gamma;  // {k}
    TensorOf<S> beta;   // {k}
};

template <typename S>
struct BilinearParamsT {
    TensorOf<S> w;  // {k, k}, starts at identity
};

template <typename S>
struct ClassifierParamsT {
    TensorOf<S> w;  // {n_classes, d}
    TensorOf<S> b;  // {n_classes}
};

// --- initialization ----------------------------------------------------------

// Uniform +-sqrt(6 / (fan_in + fan_out)); biases stay zero.
template <typename S>
void glorot_fill(TensorOf<S>& t, std::int64_t fan_in, std::int64_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<S>(rng.uniform(-a, a));
}

template <typename S>
EncoderParamsT<S> init_encoder(const ModelConfig& cfg, std::uint64_t seed) {
    EncoderParamsT<S> p;
    int c_in = 1;
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        const int c_out = cfg.channels[i];
        ConvBlockParamsT<S> blk;
        blk.w = TensorOf<S>({c_out, c_in, 3, 3});
        blk.b = TensorOf<S>({c_out});
        Rng rng = Rng::derive(seed, {Rng::tag("init.conv"), static_cast<std::uint64_t>(i)});
        glorot_fill(blk.w, static_cast<std::int64_t>(c_in) * 9,
                    static_cast<std::int64_t>(c_out) * 9, rng);
        p.blocks.push_back(std::move(blk));
        c_in = c_out;
    }
    return p;
}

template <typename S>
ProjectionParamsT<S> init_projection(const ModelConfig& cfg, std::uint64_t seed) {
    ProjectionParamsT<S> p;
    const int d = cfg.embed_dim(), k = cfg.proj_dim;
    p.w = TensorOf<S>({k, d});
    p.b = TensorOf<S>({k});
    p.gamma = TensorOf<S>::full({k}, S(1));
    p.beta = TensorOf<S>({k});
    Rng rng = Rng::derive(seed, {Rng::tag("init.proj")});
    glorot_fill(p.w, d, k, rng);
    return p;
}

template <typename S>
BilinearParamsT<S> init_bilinear(const ModelConfig& cfg) {
    BilinearParamsT<S> p;
    const int k = cfg.proj_dim;
    p.w = TensorOf<S>({k, k});
    for (int i = 0; i < k; ++i) p.w.at(i, i) = S(1);
    return p;
}

template <typename S>
ClassifierParamsT<S> init_classifier(int n_classes, int d, std::uint64_t seed) {
    ClassifierParamsT<S> p;
    p.w = TensorOf<S>({n_classes, d});
    p.b = TensorOf<S>({n_classes});
    Rng rng = Rng::derive(seed, {Rng::tag("init.clf")});
    glorot_fill(p.w, d, n_classes, rng);
    return p;
}

// --- encoder -----------------------------------------------------------------

template <typename S>
struct EncoderCacheT {
    std::vector<TensorOf<S>> conv_in;   // input to each block's conv
    std::vector<TensorOf<S>> conv_out;  // pre-relu, per block
    std::vector<std::vector<std::int64_t>> pool_idx;
    std::vector<std::vector<std::int64_t>> pool_in_shape;
    std::vector<std::int64_t> gmp_idx;
    std::vector<std::int64_t> gmp_in_shape;
};

// x {B, 1, n_mels, frames} -> embedding h {B, d}
template <typename S>
TensorOf<S> encoder_forward(const EncoderParamsT<S>& p, const TensorOf<S>& x,
                            EncoderCacheT<S>* cache) {
    cache->conv_in.clear();
    cache->conv_out.clear();
    cache->pool_idx.clear();
    cache->pool_in_shape.clear();

    TensorOf<S> cur = x;
    for (const auto& blk : p.blocks) {
        cache->conv_in.push_back(cur);
        TensorOf<S> z = conv3x3_forward(cur, blk.w, blk.b);
        cache->conv_out.push_back(z);
        TensorOf<S> a = relu_forward(z);
        cache->pool_in_shape.push_back(a.shape());
        std::vector<std::int64_t> idx;
        cur = maxpool2_forward(a, &idx);
        cache->pool_idx.push_back(std::move(idx));
    }
    cache->gmp_in_shape = cur.shape();
    return global_maxpool_forward(cur, &cache->gmp_idx);
}

// dh {B, d} -> parameter gradients, accumulated into *grads (zero tensors
// shaped like the parameters).
template <typename S>
void encoder_backward(const EncoderParamsT<S>& p, const EncoderCacheT<S>& cache,
                      const TensorOf<S>& dh, EncoderParamsT<S>* grads) {
    TensorOf<S> d = global_maxpool_backward(dh, cache.gmp_idx, cache.gmp_in_shape);
    for (std::int64_t i = static_cast<std::int64_t>(p.blocks.size()) - 1; i >= 0; --i) {
        d = maxpool2_backward(d, cache.pool_idx[i], cache.pool_in_shape[i]);
        d = relu_backward(cache.conv_out[i], d);
        TensorOf<S> dx, dw, db;
        conv3x3_backward(cache.conv_in[i], p.blocks[i].w, d, &dx, &dw, &db);
        for (std::int64_t j = 0; j < dw.numel(); ++j) grads->blocks[i].w[j] += dw[j];
        for (std::int64_t j = 0; j < db.numel(); ++j) grads->blocks[i].b[j] += db[j];
        d = std::move(dx);
    }
}

// --- projection --------------------------------------------------------------

template <typename S>
struct ProjectionCacheT {
    TensorOf<S> input;  // h
    TensorOf<S> pre_ln;
    LayerNormCache<S> ln;
    TensorOf<S> output;  // z = tanh(ln)
};

// h {B, d} -> z {B, k}: dense, layer norm, tanh.
template <typename S>
TensorOf<S> projection_forward(const ProjectionParamsT<S>& p, const TensorOf<S>& h,
                               ProjectionCacheT<S>* cache) {
    cache->input = h;
    cache->pre_ln = dense_forward(h, p.w, p.b);
    TensorOf<S> normed = layernorm_forward(cache->pre_ln, p.gamma, p.beta, &cache->ln);
    cache->output = tanh_forward(normed);
    return cache->output;
}

template <typename S>
TensorOf<S> projection_backward(const ProjectionParamsT<S>& p, const ProjectionCacheT<S>& cache,
                                const TensorOf<S>& dz, ProjectionParamsT<S>* grads) {
    TensorOf<S> d = tanh_backward(cache.output, dz);
    TensorOf<S> d_pre, dgamma, dbeta;
    layernorm_backward(cache.ln, p.gamma, d, &d_pre, &dgamma, &dbeta);
    for (std::int64_t j = 0; j < dgamma.numel(); ++j) grads->gamma[j] += dgamma[j];
    for (std::int64_t j = 0; j < dbeta.numel(); ++j) grads->beta[j] += dbeta[j];
    TensorOf<S> dh, dw, db;
    dense_backward(cache.input, p.w, d_pre, &dh, &dw, &db);
    for (std::int64_t j = 0; j < dw.numel(); ++j) grads->w[j] += dw[j];
    for (std::int64_t j = 0; j < db.numel(); ++j) grads->b[j] += db[j];
    return dh;
}

// --- similarity heads --------------------------------------------------------

// scores[i][j] = a_i^T W p_j. With W at its identity initialization this is
// a plain dot product.
template <typename S>
TensorOf<S> bilinear_scores(const BilinearParamsT<S>& p, const TensorOf<S>& anchors,
                            const TensorOf<S>& positives) {
    return matmul_nt(matmul(anchors, p.w), positives);
}

template <typename S>
void bilinear_backward(const BilinearParamsT<S>& p, const TensorOf<S>& anchors,
                       const TensorOf<S>& positives, const TensorOf<S>& dscores,
                       TensorOf<S>* danchors, TensorOf<S>* dpositives, BilinearParamsT<S>* grads) {
    *danchors = matmul(dscores, matmul_nt(positives, p.w));
    *dpositives = matmul_tn(dscores, matmul(anchors, p.w));
    TensorOf<S> dw = matmul_tn(anchors, matmul(dscores, positives));
    for (std::int64_t j = 0; j < dw.numel(); ++j) grads->w[j] += dw[j];
}

namespace detail {

template <typename S>
TensorOf<S> normalize_rows(const TensorOf<S>& x, TensorOf<S>* norms) {
    const std::int64_t b = x.dim(0), k = x.dim(1);
    TensorOf<S> out(x.shape());
    *norms = TensorOf<S>({b});
    for (std::int64_t i = 0; i < b; ++i) {
        S acc = S(0);
        for (std::int64_t j = 0; j < k; ++j) acc += x.at(i, j) * x.at(i, j);
        if (acc == S(0)) {
            throw DegenerateInputError("cosine: zero-norm projection at row " + std::to_string(i));
        }
        const S n = std::sqrt(acc);
        (*norms)[i] = n;
        for (std::int64_t j = 0; j < k; ++j) out.at(i, j) = x.at(i, j) / n;
    }
    return out;
}

}  // namespace detail

// scores[i][j] = cos(a_i, p_j) / temperature
template <typename S>
TensorOf<S> cosine_scores(const TensorOf<S>& anchors, const TensorOf<S>& positives,
                          double temperature) {
    TensorOf<S> na, np;
    TensorOf<S> ah = detail::normalize_rows(anchors, &na);
    TensorOf<S> ph = detail::normalize_rows(positives, &np);
    TensorOf<S> s = matmul_nt(ah, ph);
    const S inv_t = static_cast<S>(1.0 / temperature);
    for (std::int64_t i = 0; i < s.numel(); ++i) s[i] *= inv_t;
    return s;
}

template <typename S>
void cosine_backward(const TensorOf<S>& anchors, const TensorOf<S>& positives, double temperature,
                     const TensorOf<S>& dscores, TensorOf<S>* danchors, TensorOf<S>* dpositives) {
    TensorOf<S> na, np;
    TensorOf<S> ah = detail::normalize_rows(anchors, &na);
    TensorOf<S> ph = detail::normalize_rows(positives, &np);
    const S inv_t = static_cast<S>(1.0 / temperature);
    TensorOf<S> ds(dscores.shape());
    for (std::int64_t i = 0; i < ds.numel(); ++i) ds[i] = dscores[i] * inv_t;

    // Through s = ah * ph^T, then through each row normalization:
    // d x = (d xhat - xhat * (xhat . d xhat)) / |x|.
    TensorOf<S> dah = matmul(ds, ph);
    TensorOf<S> dph = matmul_tn(ds, ah);
    const std::int64_t b = anchors.dim(0), k = anchors.dim(1);
    *danchors = TensorOf<S>(anchors.shape());
    *dpositives = TensorOf<S>(positives.shape());
    for (std::int64_t i = 0; i < b; ++i) {
        S proj_a = S(0), proj_p = S(0);
        for (std::int64_t j = 0; j < k; ++j) {
            proj_a += ah.at(i, j) * dah.at(i, j);
            proj_p += ph.at(i, j) * dph.at(i, j);
        }
        for (std::int64_t j = 0; j < k; ++j) {
            danchors->at(i, j) = (dah.at(i, j) - ah.at(i, j) * proj_a) / na[i];
            dpositives->at(i, j) = (dph.at(i, j) - ph.at(i, j) * proj_p) / np[i];
        }
    }
}

// --- classifier --------------------------------------------------------------

template <typename S>
TensorOf<S> classifier_logits(const ClassifierParamsT<S>& p, const TensorOf<S>& h) {
    return dense_forward(h, p.w, p.b);
}

// --- bundles -----------------------------------------------------------------

// Everything pretraining updates, with stable names for the optimizer and
// the checkpoint writer.
template <typename S>
struct ContrastiveModelT {
    ModelConfig config;
    EncoderParamsT<S> encoder;
    ProjectionParamsT<S> projection;
    BilinearParamsT<S> bilinear;

    std::vector<std::pair<std::string, TensorOf<S>*>> named_params() {
        std::vector<std::pair<std::string, TensorOf<S>*>> out;
        for (std::size_t i = 0; i < encoder.blocks.size(); ++i) {
            const std::string base = "encoder.block" + std::to_string(i);
            out.emplace_back(base + ".w", &encoder.blocks[i].w);
            out.emplace_back(base + ".b", &encoder.blocks[i].b);
        }
        out.emplace_back("proj.w", &projection.w);
        out.emplace_back("proj.b", &projection.b);
        out.emplace_back("proj.gamma", &projection.gamma);
        out.emplace_back("proj.beta", &projection.beta);
        if (config.similarity == SimilarityKind::bilinear) {
            out.emplace_back("sim.w", &bilinear.w);
        }
        return out;
    }
};

template <typename S>
ContrastiveModelT<S> init_model(const ModelConfig& cfg, std::uint64_t seed) {
    ContrastiveModelT<S> m;
    m.config = cfg;
    m.encoder = init_encoder<S>(cfg, seed);
    m.projection = init_projection<S>(cfg, seed);
    m.bilinear = init_bilinear<S>(cfg);
    return m;
}

// Zero tensors shaped like the model, for gradient accumulation.
template <typename S>
ContrastiveModelT<S> zeros_like(const ContrastiveModelT<S>& m) {
    ContrastiveModelT<S> g;
    g.config = m.config;
    for (const auto& blk : m.encoder.blocks) {
        g.encoder.blocks.push_back({TensorOf<S>(blk.w.shape()), TensorOf<S>(blk.b.shape())});
    }
    g.projection.w = TensorOf<S>(m.projection.w.shape());
    g.projection.b = TensorOf<S>(m.projection.b.shape());
    g.projection.gamma = TensorOf<S>(m.projection.gamma.shape());
    g.projection.beta = TensorOf<S>(m.projection.beta.shape());
    g.bilinear.w = TensorOf<S>(m.bilinear.w.shape());
    return g;
}

template <typename To, typename From>
ContrastiveModelT<To> cast_model(const ContrastiveModelT<From>& m) {
    ContrastiveModelT<To> out;
    out.config = m.config;
    for (const auto& blk : m.encoder.blocks) {
        out.encoder.blocks.push_back({cast<To>(blk.w), cast<To>(blk.b)});
    }
    out.projection.w = cast<To>(m.projection.w);
    out.projection.b = cast<To>(m.projection.b);
    out.projection.gamma = cast<To>(m.projection.gamma);
    out.projection.beta = cast<To>(m.projection.beta);
    out.bilinear.w = cast<To>(m.bilinear.w);
    return out;
}

using ContrastiveModel = ContrastiveModelT<float>;

}  // namespace auricle
