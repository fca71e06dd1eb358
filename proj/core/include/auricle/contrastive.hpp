#pragma once

#include <cstdint>
#include <vector>

#include "auricle/frontend.hpp"
#include "auricle/losses.hpp"
#include "auricle/model.hpp"
#include "auricle/rng.hpp"
#include "auricle/tensor.hpp"

namespace auricle {

// Anchor and positive start offsets for one clip: two independent uniform
// draws over every valid segment position, so the windows may overlap or
// coincide. The clip must hold at least one full segment.
struct SegmentPair {
    std::int64_t anchor_start = 0;
    std::int64_t positive_start = 0;
};

inline SegmentPair sample_segment_pair(std::int64_t clip_samples, std::int64_t segment_samples,
                                       Rng& rng) {
    if (clip_samples < segment_samples) {
        throw BoundsError("sample_segment_pair: clip of " + std::to_string(clip_samples) +
                          " samples is shorter than a " + std::to_string(segment_samples) +
                          " sample segment");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(clip_samples - segment_samples) + 1;
    SegmentPair p;
    p.anchor_start = static_cast<std::int64_t>(rng.uniform_int(span));
    p.positive_start = static_cast<std::int64_t>(rng.uniform_int(span));
    return p;
}

// One pretraining batch: feature patches for B anchors and their positives,
// laid out {B, 1, n_mels, frames}. Row i of the score matrix scores anchor i
// against every positive, so the off-diagonal positives are the negatives
// and anchors never appear on the negative side.
template <typename S>
struct ContrastiveBatchT {
    TensorOf<S> anchors;
    TensorOf<S> positives;
};

using ContrastiveBatch = ContrastiveBatchT<float>;

template <typename S>
struct ObjectiveCacheT {
    EncoderCacheT<S> enc_a, enc_p;
    ProjectionCacheT<S> proj_a, proj_p;
    TensorOf<S> za, zp;
    TensorOf<S> scores;
    TensorOf<S> probs;    // row softmax of scores
    TensorOf<S> probs_t;  // row softmax of scores^T, symmetric variant only
};

// Full pretraining objective: encode both sides, project, score, InfoNCE.
template <typename S>
S contrastive_forward(const ContrastiveModelT<S>& m, const ContrastiveBatchT<S>& batch,
                      ObjectiveCacheT<S>* cache) {
    const TensorOf<S> ha = encoder_forward(m.encoder, batch.anchors, &cache->enc_a);
    const TensorOf<S> hp = encoder_forward(m.encoder, batch.positives, &cache->enc_p);
    cache->za = projection_forward(m.projection, ha, &cache->proj_a);
    cache->zp = projection_forward(m.projection, hp, &cache->proj_p);
    if (m.config.similarity == SimilarityKind::bilinear) {
        cache->scores = bilinear_scores(m.bilinear, cache->za, cache->zp);
    } else {
        cache->scores = cosine_scores(cache->za, cache->zp, m.config.temperature);
    }
    S loss = info_nce_forward(cache->scores, &cache->probs);
    if (m.config.symmetric_loss) {
        const TensorOf<S> st = transpose(cache->scores);
        loss = S(0.5) * (loss + info_nce_forward(st, &cache->probs_t));
    }
    return loss;
}

template <typename S>
void contrastive_backward(const ContrastiveModelT<S>& m, const ContrastiveBatchT<S>& batch,
                          const ObjectiveCacheT<S>& cache, ContrastiveModelT<S>* grads) {
    (void)batch;  // activations live in the cache
    TensorOf<S> dscores = info_nce_backward(cache.probs);
    if (m.config.symmetric_loss) {
        const TensorOf<S> d_t = transpose(info_nce_backward(cache.probs_t));
        for (std::int64_t i = 0; i < dscores.numel(); ++i) {
            dscores[i] = S(0.5) * (dscores[i] + d_t[i]);
        }
    }

    TensorOf<S> dza, dzp;
    if (m.config.similarity == SimilarityKind::bilinear) {
        bilinear_backward(m.bilinear, cache.za, cache.zp, dscores, &dza, &dzp, &grads->bilinear);
    } else {
        cosine_backward(cache.za, cache.zp, m.config.temperature, dscores, &dza, &dzp);
    }

    const TensorOf<S> dha = projection_backward(m.projection, cache.proj_a, dza, &grads->projection);
    const TensorOf<S> dhp = projection_backward(m.projection, cache.proj_p, dzp, &grads->projection);
    encoder_backward(m.encoder, cache.enc_a, dha, &grads->encoder);
    encoder_backward(m.encoder, cache.enc_p, dhp, &grads->encoder);
}

// Assemble a batch from raw clips: per pair, derive an rng stream from
// (seed, epoch, pair slot), draw the two windows, run the frontend.
struct ClipView {
    const std::vector<float>* samples;
    std::int64_t clip_index;
};

template <typename S>
ContrastiveBatchT<S> build_batch(const Frontend& fe, const std::vector<ClipView>& clips,
                                 std::uint64_t seed, std::uint64_t epoch) {
    const auto& cfg = fe.config();
    const std::int64_t b = static_cast<std::int64_t>(clips.size());
    const std::int64_t n = cfg.segment_samples();
    ContrastiveBatchT<S> batch{TensorOf<S>({b, 1, cfg.n_mels, cfg.segment_frames()}),
                               TensorOf<S>({b, 1, cfg.n_mels, cfg.segment_frames()})};
    const std::int64_t patch = static_cast<std::int64_t>(cfg.n_mels) * cfg.segment_frames();
    for (std::int64_t i = 0; i < b; ++i) {
        const std::vector<float>& x = *clips[i].samples;
        Rng rng = Rng::derive(seed, {Rng::tag("pair"), epoch,
                                     static_cast<std::uint64_t>(clips[i].clip_index)});
        const SegmentPair p = sample_segment_pair(static_cast<std::int64_t>(x.size()), n, rng);
        const std::vector<float> a(x.begin() + p.anchor_start, x.begin() + p.anchor_start + n);
        const std::vector<float> q(x.begin() + p.positive_start,
                                   x.begin() + p.positive_start + n);
        const Tensor fa = fe.logmel(a);
        const Tensor fq = fe.logmel(q);
        for (std::int64_t j = 0; j < patch; ++j) {
            batch.anchors[i * patch + j] = static_cast<S>(fa[j]);
            batch.positives[i * patch + j] = static_cast<S>(fq[j]);
        }
    }
    return batch;
}

}  // namespace auricle
