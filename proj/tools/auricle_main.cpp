// Command-line front end: synth | features | pretrain | probe | finetune | eval.
// Every invocation materializes a fresh run directory with the resolved
// config and the mode's artifacts; exit status is 0 only once those are
// fully written.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "auricle/audio.hpp"
#include "auricle/config.hpp"
#include "auricle/errors.hpp"
#include "auricle/eval.hpp"
#include "auricle/frontend.hpp"
#include "auricle/manifest.hpp"
#include "auricle/parallel.hpp"
#include "auricle/synth.hpp"
#include "auricle/tensor_file.hpp"
#include "auricle/trainer.hpp"

namespace fs = std::filesystem;
using namespace auricle;

namespace {

// <out_dir>/<mode>-<timestamp>[-k]: existing directories are never reused.
fs::path make_run_dir(const RunConfig& cfg) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);

    const fs::path base = fs::path(cfg.out_dir) / (mode_name(cfg.mode) + "-" + stamp);
    fs::path dir = base;
    for (int k = 1; fs::exists(dir); ++k) {
        dir = base.string() + "-" + std::to_string(k);
    }
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

nlohmann::json record_json(const EpochRecord& rec) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["loss"] = rec.loss;
    if (!std::isnan(rec.train_accuracy)) j["train_accuracy"] = rec.train_accuracy;
    if (!std::isnan(rec.eval_accuracy)) j["eval_accuracy"] = rec.eval_accuracy;
    j["seconds"] = rec.seconds;
    return j;
}

// Streams one JSON record per epoch and mirrors a short line to stdout.
class EpochLogger {
public:
    explicit EpochLogger(const fs::path& path, int total_epochs)
        : out_(path, std::ios::trunc), total_(total_epochs) {
        if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
    }

    void operator()(const EpochRecord& rec) {
        out_ << record_json(rec).dump() << "\n";
        out_.flush();
        std::printf("epoch %d/%d  loss %.4f", rec.epoch, total_, rec.loss);
        if (!std::isnan(rec.train_accuracy)) std::printf("  train_acc %.4f", rec.train_accuracy);
        if (!std::isnan(rec.eval_accuracy)) std::printf("  eval_acc %.4f", rec.eval_accuracy);
        std::printf("  (%.1fs)\n", rec.seconds);
        std::fflush(stdout);
    }

private:
    std::ofstream out_;
    int total_;
};

struct LoadedSet {
    std::vector<AudioClip> clips;
    std::vector<int> labels;  // -1 where absent
};

LoadedSet load_clips(const std::string& manifest_path, bool require_labels) {
    LoadedSet set;
    const auto entries = load_manifest(manifest_path);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (require_labels && !entries[i].has_label()) {
            throw ManifestError(manifest_path + ": entry " + std::to_string(i + 1) + " ('" +
                                entries[i].path + "') has no label");
        }
        AudioClip clip = load_wav_16k(entries[i].path);
        clip.id = fs::path(entries[i].path).stem().string();
        set.clips.push_back(std::move(clip));
        set.labels.push_back(entries[i].label);
    }
    return set;
}

int run_synth(const RunConfig& cfg, const fs::path& run_dir) {
    SynthSpec spec;
    spec.num_classes = cfg.classes;
    spec.clips_per_class = cfg.clips_per_class;
    spec.clip_seconds = cfg.clip_seconds;
    const auto corpus = generate_corpus(spec, cfg.seed);

    fs::create_directories(run_dir / "wav");
    std::vector<ManifestEntry> all, train, test;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::string rel = "wav/" + corpus[i].clip.id + ".wav";
        save_wav((run_dir / rel).string(), corpus[i].clip);
        const ManifestEntry entry{rel, corpus[i].label};
        all.push_back(entry);
        (i % 2 == 0 ? train : test).push_back(entry);
    }
    save_manifest((run_dir / "manifest.jsonl").string(), all);
    save_manifest((run_dir / "manifest-train.jsonl").string(), train);
    save_manifest((run_dir / "manifest-test.jsonl").string(), test);
    std::printf("wrote %zu clips (%d classes) to %s\n", corpus.size(), cfg.classes,
                run_dir.string().c_str());
    return 0;
}

int run_features(const RunConfig& cfg, const fs::path& run_dir) {
    const LoadedSet set = load_clips(cfg.manifest, /*require_labels=*/false);
    const Frontend fe;

    TensorFile file;
    file.config_text = serialize_config(cfg, /*include_environment=*/false);
    for (std::size_t i = 0; i < set.clips.size(); ++i) {
        const auto segments = split_segments(set.clips[i].samples, fe.config().segment_samples());
        for (std::size_t s = 0; s < segments.size(); ++s) {
            char name[64];
            std::snprintf(name, sizeof(name), "clip%06zu.seg%03zu", i, s);
            file.tensors.emplace_back(name, fe.logmel(segments[s]));
        }
    }
    save_tensor_file((run_dir / "features.bin").string(), file);
    std::printf("wrote %zu patches from %zu clips to %s\n", file.tensors.size(), set.clips.size(),
                (run_dir / "features.bin").string().c_str());
    return 0;
}

int run_pretrain(const RunConfig& cfg, const fs::path& run_dir) {
    const LoadedSet set = load_clips(cfg.manifest, /*require_labels=*/false);
    EpochLogger logger(run_dir / "train.log.jsonl", cfg.epochs);
    pretrain(cfg, set.clips, run_dir.string(), std::ref(logger));
    std::printf("checkpoint: %s\n", (run_dir / "checkpoint.bin").string().c_str());
    return 0;
}

int run_downstream(const RunConfig& cfg, const fs::path& run_dir, bool update_encoder) {
    const Checkpoint source = load_checkpoint(cfg.checkpoint);
    const LoadedSet train_set = load_clips(cfg.manifest, /*require_labels=*/true);
    LoadedSet eval_set;
    const bool with_eval = !cfg.eval_manifest.empty();
    if (with_eval) eval_set = load_clips(cfg.eval_manifest, /*require_labels=*/true);

    EpochLogger logger(run_dir / "train.log.jsonl", cfg.epochs);
    const auto result =
        update_encoder
            ? finetune(source, train_set.clips, train_set.labels, cfg,
                       with_eval ? &eval_set.clips : nullptr,
                       with_eval ? &eval_set.labels : nullptr, std::ref(logger))
            : train_probe(source, train_set.clips, train_set.labels, cfg,
                          with_eval ? &eval_set.clips : nullptr,
                          with_eval ? &eval_set.labels : nullptr, std::ref(logger));
    save_checkpoint(result.checkpoint, (run_dir / "checkpoint.bin").string());
    std::printf("checkpoint: %s\n", (run_dir / "checkpoint.bin").string().c_str());
    return 0;
}

int run_eval(const RunConfig& cfg, const fs::path& run_dir) {
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
    if (!ckpt.has_classifier) {
        throw ConfigError("eval: checkpoint '" + cfg.checkpoint +
                          "' has no classifier head (train a probe or fine-tune first)");
    }
    const auto entries = load_manifest(cfg.manifest);
    const Frontend fe;

    std::ofstream out(run_dir / "predictions.jsonl", std::ios::trunc);
    if (!out) throw IoError("cannot open predictions file");

    std::vector<int> preds, labels;
    for (const ManifestEntry& entry : entries) {
        AudioClip clip = load_wav_16k(entry.path);
        const ClipPrediction p =
            predict_clip(fe, ckpt.model.encoder, ckpt.classifier, clip.samples, cfg.average_logits);
        nlohmann::json j;
        j["id"] = fs::path(entry.path).stem().string();
        j["path"] = entry.path;
        if (entry.has_label()) j["label"] = entry.label;
        j["predicted"] = p.predicted;
        j["probs"] = p.probs;
        out << j.dump() << "\n";
        if (entry.has_label()) {
            preds.push_back(p.predicted);
            labels.push_back(entry.label);
        }
    }
    if (!labels.empty()) {
        const double acc = accuracy(preds, labels);
        nlohmann::json j;
        j["accuracy"] = acc;
        j["clips"] = labels.size();
        out << j.dump() << "\n";
        std::printf("accuracy %.4f over %zu labeled clips\n", acc, labels.size());
    } else {
        std::printf("no labeled clips; wrote predictions only\n");
    }
    if (!out) throw IoError("short write to predictions file");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contrastive audio representation trainer"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    long long seed = -1;
    int threads = 0;

    for (const char* name : {"synth", "features", "pretrain", "probe", "finetune", "eval"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file (key = value lines)");
        sub->add_option("--set", sets, "override, key=value (repeatable)")->take_all();
        sub->add_option("--out", out_dir, "parent directory for the run directory");
        sub->add_option("--threads", threads, "worker threads (1 = deterministic serial)");
        sub->add_option("--seed", seed, "root rng seed");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        // Precedence: config file, then --set, then the dedicated flags; the
        // subcommand always decides the mode.
        std::vector<std::string> overrides = sets;
        if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
        if (threads > 0) overrides.push_back("threads=" + std::to_string(threads));
        if (!out_dir.empty()) overrides.push_back("out_dir=" + out_dir);
        overrides.push_back("mode=" + app.get_subcommands().front()->get_name());

        const RunConfig cfg = config_path.empty()
                                  ? parse_config("", overrides, "<flags>")
                                  : parse_config_file(config_path, overrides);
        set_threads(cfg.threads);

        const fs::path run_dir = make_run_dir(cfg);
        write_text(run_dir / "config.resolved", serialize_config(cfg, /*include_environment=*/true));
        std::printf("run directory: %s\n", run_dir.string().c_str());

        switch (cfg.mode) {
            case Mode::synth: return run_synth(cfg, run_dir);
            case Mode::features: return run_features(cfg, run_dir);
            case Mode::pretrain: return run_pretrain(cfg, run_dir);
            case Mode::probe: return run_downstream(cfg, run_dir, false);
            case Mode::finetune: return run_downstream(cfg, run_dir, true);
            case Mode::eval: return run_eval(cfg, run_dir);
        }
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error[%s]: %s\n", e.category().c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal]: %s\n", e.what());
        return 1;
    }
}
