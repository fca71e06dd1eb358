#include "auricle/eval.hpp"

#include <cmath>

#include "auricle/errors.hpp"
#include "auricle/losses.hpp"

namespace auricle {

std::vector<std::vector<float>> split_segments(const std::vector<float>& samples,
                                               int segment_samples) {
    if (samples.empty()) throw BoundsError("split_segments: empty clip");
    std::vector<std::vector<float>> out;
    if (static_cast<int>(samples.size()) < segment_samples) {
        std::vector<float> seg(samples);
        seg.resize(segment_samples, 0.0f);
        out.push_back(std::move(seg));
        return out;
    }
    const std::size_t count = samples.size() / segment_samples;
    for (std::size_t k = 0; k < count; ++k) {
        out.emplace_back(samples.begin() + k * segment_samples,
                         samples.begin() + (k + 1) * segment_samples);
    }
    return out;
}

ClipPrediction predict_clip(const Frontend& fe, const EncoderParamsT<float>& encoder,
                            const ClassifierParamsT<float>& classifier,
                            const std::vector<float>& samples, bool average_logits) {
    const auto& cfg = fe.config();
    const auto segments = split_segments(samples, cfg.segment_samples());
    const std::int64_t k = static_cast<std::int64_t>(segments.size());

    Tensor patches({k, 1, cfg.n_mels, cfg.segment_frames()});
    const std::int64_t patch = static_cast<std::int64_t>(cfg.n_mels) * cfg.segment_frames();
    for (std::int64_t s = 0; s < k; ++s) {
        const Tensor f = fe.logmel(segments[s]);
        for (std::int64_t j = 0; j < patch; ++j) patches[s * patch + j] = f[j];
    }

    EncoderCacheT<float> cache;
    const Tensor h = encoder_forward(encoder, patches, &cache);
    const Tensor logits = classifier_logits(classifier, h);
    const std::int64_t c = logits.dim(1);

    ClipPrediction pred;
    pred.probs.assign(c, 0.0);
    if (average_logits) {
        Tensor mean({1, c});
        for (std::int64_t s = 0; s < k; ++s) {
            for (std::int64_t j = 0; j < c; ++j) mean[j] += logits.at(s, j) / k;
        }
        const Tensor probs = softmax_rows(mean);
        for (std::int64_t j = 0; j < c; ++j) pred.probs[j] = probs[j];
    } else {
        const Tensor probs = softmax_rows(logits);
        for (std::int64_t s = 0; s < k; ++s) {
            for (std::int64_t j = 0; j < c; ++j) {
                pred.probs[j] += static_cast<double>(probs.at(s, j)) / k;
            }
        }
    }

    pred.predicted = 0;
    for (std::int64_t j = 1; j < c; ++j) {
        if (pred.probs[j] > pred.probs[pred.predicted]) pred.predicted = static_cast<int>(j);
    }
    return pred;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw MetricError("accuracy: " + std::to_string(predictions.size()) +
                          " predictions vs " + std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw MetricError("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace auricle
