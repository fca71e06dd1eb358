#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "auricle/audio.hpp"
#include "auricle/config.hpp"
#include "auricle/model.hpp"
#include "auricle/tensor.hpp"

namespace auricle {

// One line of the training log. Accuracy fields are NaN where they do not
// apply (pretraining, or no eval set given).
struct EpochRecord {
    int epoch = 0;  // 1-based
    double loss = 0.0;
    double train_accuracy = 0.0;
    double eval_accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Saved training artifact: the resolved config (minus environment keys), the
// epoch it was written at, the model, optionally a downstream classifier,
// and optimizer moments for resumption.
struct Checkpoint {
    RunConfig config;
    int epoch = 0;
    ContrastiveModel model;
    bool has_classifier = false;
    ClassifierParamsT<float> classifier;
    std::vector<std::pair<std::string, Tensor>> optimizer;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct PretrainResult {
    Checkpoint checkpoint;
    TrainLog log;
};

// Contrastive pre-training on unlabeled clips. Clips shorter than one 960 ms
// segment are skipped; at least batch_size eligible clips are required. When
// run_dir is non-empty, a checkpoint lands there every cfg.checkpoint_every
// epochs (so a non-finite-loss abort still leaves the last good one) plus at
// the end.
PretrainResult pretrain(const RunConfig& cfg, const std::vector<AudioClip>& corpus,
                        const std::string& run_dir = "", const EpochCallback& on_epoch = {});

struct DownstreamResult {
    Checkpoint checkpoint;  // model + classifier
    TrainLog log;
};

// Linear probe: classifier trained on frozen embeddings, one fresh random
// 960 ms segment per clip per epoch. Encoder parameters are never touched.
DownstreamResult train_probe(const Checkpoint& source, const std::vector<AudioClip>& clips,
                             const std::vector<int>& labels, const RunConfig& cfg,
                             const std::vector<AudioClip>* eval_clips = nullptr,
                             const std::vector<int>* eval_labels = nullptr,
                             const EpochCallback& on_epoch = {});

// Same loop with gradients flowing into the encoder as well.
DownstreamResult finetune(const Checkpoint& source, const std::vector<AudioClip>& clips,
                          const std::vector<int>& labels, const RunConfig& cfg,
                          const std::vector<AudioClip>* eval_clips = nullptr,
                          const std::vector<int>* eval_labels = nullptr,
                          const EpochCallback& on_epoch = {});

}  // namespace auricle
