#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "auricle/tensor.hpp"

namespace auricle {

// Row-wise softmax with max subtraction. Shared by both losses below.
template <typename S>
TensorOf<S> softmax_rows(const TensorOf<S>& logits) {
    require_rank("softmax", logits, 2);
    const std::int64_t b = logits.dim(0), n = logits.dim(1);
    TensorOf<S> probs(logits.shape());
    for (std::int64_t i = 0; i < b; ++i) {
        const S* row = logits.data() + i * n;
        S* out = probs.data() + i * n;
        S mx = row[0];
        for (std::int64_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        S denom = S(0);
        for (std::int64_t j = 0; j < n; ++j) {
            out[j] = std::exp(row[j] - mx);
            denom += out[j];
        }
        for (std::int64_t j = 0; j < n; ++j) out[j] /= denom;
    }
    return probs;
}

// Contrastive loss over a square score matrix: each row is classified
// against its diagonal entry, so the other columns act as negatives. With
// uninformative (constant) scores this is ln(B).
template <typename S>
S info_nce_forward(const TensorOf<S>& scores, TensorOf<S>* probs) {
    require_rank("info_nce", scores, 2);
    if (scores.dim(0) != scores.dim(1)) {
        throw ShapeError("info_nce: score matrix must be square, got " +
                         TensorOf<S>::shape_string(scores.shape()));
    }
    const std::int64_t b = scores.dim(0);
    *probs = softmax_rows(scores);
    S loss = S(0);
    for (std::int64_t i = 0; i < b; ++i) {
        loss -= std::log(probs->at(i, i));
    }
    return loss / static_cast<S>(b);
}

// d loss / d scores = (softmax - I) / B
template <typename S>
TensorOf<S> info_nce_backward(const TensorOf<S>& probs) {
    const std::int64_t b = probs.dim(0);
    TensorOf<S> d(probs.shape());
    const S inv_b = S(1) / static_cast<S>(b);
    for (std::int64_t i = 0; i < b; ++i) {
        for (std::int64_t j = 0; j < b; ++j) {
            d.at(i, j) = (probs.at(i, j) - (i == j ? S(1) : S(0))) * inv_b;
        }
    }
    return d;
}

// Mean softmax cross-entropy against integer labels (downstream heads).
template <typename S>
S softmax_xent_forward(const TensorOf<S>& logits, const std::vector<int>& labels,
                       TensorOf<S>* probs) {
    require_rank("softmax_xent", logits, 2);
    if (static_cast<std::int64_t>(labels.size()) != logits.dim(0)) {
        throw ShapeError("softmax_xent: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(logits.dim(0)) + " rows");
    }
    const std::int64_t b = logits.dim(0), n = logits.dim(1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n) {
            throw BoundsError("softmax_xent: label " + std::to_string(labels[i]) +
                              " outside [0, " + std::to_string(n) + ")");
        }
    }
    *probs = softmax_rows(logits);
    S loss = S(0);
    for (std::int64_t i = 0; i < b; ++i) loss -= std::log(probs->at(i, labels[i]));
    return loss / static_cast<S>(b);
}

template <typename S>
TensorOf<S> softmax_xent_backward(const TensorOf<S>& probs, const std::vector<int>& labels) {
    const std::int64_t b = probs.dim(0), n = probs.dim(1);
    TensorOf<S> d(probs.shape());
    const S inv_b = S(1) / static_cast<S>(b);
    for (std::int64_t i = 0; i < b; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            d.at(i, j) = (probs.at(i, j) - (j == labels[i] ? S(1) : S(0))) * inv_b;
        }
    }
    return d;
}

}  // namespace auricle
