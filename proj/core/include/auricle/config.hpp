#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auricle/model.hpp"

namespace auricle {

enum class Mode { synth, features, pretrain, probe, finetune, eval };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

// Resolved run settings. Parsed from the flat `key = value` config format
// plus overrides; every mode shares the same key namespace and reads the
// subset it needs. Defaults that depend on the mode (learning rate, batch
// size) are filled in during parsing, so a RunConfig is always complete.
struct RunConfig {
    Mode mode = Mode::pretrain;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = "runs";

    // inputs and artifacts
    std::string manifest;
    std::string eval_manifest;
    std::string checkpoint;

    // training
    int epochs = 0;
    int batch_size = 64;
    double learning_rate = 1e-4;
    int checkpoint_every = 0;  // 0 = final checkpoint only

    // model geometry (for probe/finetune/eval this is replaced by whatever
    // the loaded checkpoint was trained with)
    std::string preset = "full";
    std::vector<int> channels = {32, 64, 128, 256};
    int proj_dim = 512;
    SimilarityKind similarity = SimilarityKind::bilinear;
    double temperature = 0.2;
    bool symmetric_loss = false;

    // downstream
    int classes = 4;
    bool average_logits = false;  // clip-level averaging in logit space

    // synth
    int clips_per_class = 8;
    double clip_seconds = 4.0;

    ModelConfig model_config() const {
        ModelConfig m;
        m.channels = channels;
        m.proj_dim = proj_dim;
        m.similarity = similarity;
        m.temperature = temperature;
        m.symmetric_loss = symmetric_loss;
        return m;
    }
};

// Parses config text. `source` names the file in error messages (line
// numbers are 1-based); `overrides` are `key=value` strings applied last.
// Unknown keys, type mismatches, and missing mode-required keys all throw
// ConfigError. Checkpoint-embedded configs are parsed with
// `require_mode_keys = false`, since input paths may be absent there.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::string& source = "<config>", bool require_mode_keys = true);
RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides);

// Canonical `key = value` rendering of the resolved config. Environment
// keys (out_dir, threads) only appear when requested: the copy written into
// a run directory carries them, the copy embedded in a checkpoint does not,
// so checkpoints stay byte-identical across hosts and output locations.
std::string serialize_config(const RunConfig& cfg, bool include_environment);

}  // namespace auricle
