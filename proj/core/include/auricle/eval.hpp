#pragma once

#include <vector>

#include "auricle/frontend.hpp"
#include "auricle/model.hpp"

namespace auricle {

struct ClipPrediction {
    std::vector<double> probs;  // length C, sums to 1
    int predicted = 0;          // argmax, lowest index on ties
};

// Non-overlapping full segments in clip order. A trailing partial segment is
// dropped, except that a clip shorter than one segment yields a single
// zero-padded segment so every clip is scored.
std::vector<std::vector<float>> split_segments(const std::vector<float>& samples,
                                               int segment_samples);

// Clip-level inference: featurize each segment, encode, classify, average
// the per-segment softmax probabilities (or, optionally, the logits before
// one softmax).
ClipPrediction predict_clip(const Frontend& fe, const EncoderParamsT<float>& encoder,
                            const ClassifierParamsT<float>& classifier,
                            const std::vector<float>& samples, bool average_logits = false);

// Mean exact-match rate.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

}  // namespace auricle
