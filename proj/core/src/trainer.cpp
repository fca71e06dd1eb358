#include "auricle/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "auricle/contrastive.hpp"
#include "auricle/errors.hpp"
#include "auricle/eval.hpp"
#include "auricle/frontend.hpp"
#include "auricle/losses.hpp"
#include "auricle/optim.hpp"
#include "auricle/parallel.hpp"
#include "auricle/tensor_file.hpp"

namespace auricle {
namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<std::pair<std::string, Tensor*>> named(ContrastiveModel& m) {
    return m.named_params();
}

// Classifier parameters under the optimizer, keyed separately from the
// pretraining parameter namespace.
std::vector<std::pair<std::string, Tensor*>> named(ClassifierParamsT<float>& c) {
    return {{"clf.w", &c.w}, {"clf.b", &c.b}};
}

std::string epoch_checkpoint_name(int epoch) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "checkpoint-epoch%04d.bin", epoch);
    return buf;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    TensorFile file;
    file.config_text =
        serialize_config(ckpt.config, /*include_environment=*/false) +
        "meta.epoch = " + std::to_string(ckpt.epoch) + "\n";

    // Order is part of the byte layout: model, classifier, optimizer.
    ContrastiveModel& model = const_cast<ContrastiveModel&>(ckpt.model);
    for (const auto& [name, tensor] : model.named_params()) {
        file.tensors.emplace_back(name, *tensor);
    }
    if (ckpt.has_classifier) {
        file.tensors.emplace_back("clf.w", ckpt.classifier.w);
        file.tensors.emplace_back("clf.b", ckpt.classifier.b);
    }
    for (const auto& [name, tensor] : ckpt.optimizer) {
        file.tensors.emplace_back(name, tensor);
    }
    save_tensor_file(path, file);
}

Checkpoint load_checkpoint(const std::string& path) {
    const TensorFile file = load_tensor_file(path);

    // Split the meta lines off before handing the rest to the config parser.
    std::string config_text;
    int epoch = 0;
    {
        std::istringstream in(file.config_text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("meta.epoch", 0) == 0) {
                const std::size_t eq = line.find('=');
                if (eq == std::string::npos) {
                    throw ParseError("checkpoint '" + path + "': malformed meta.epoch line");
                }
                epoch = std::stoi(line.substr(eq + 1));
            } else if (line.rfind("meta.", 0) == 0) {
                throw ParseError("checkpoint '" + path + "': unknown meta key in config block");
            } else {
                config_text += line + "\n";
            }
        }
    }

    Checkpoint ckpt;
    ckpt.config = parse_config(config_text, {}, path + " (embedded config)",
                               /*require_mode_keys=*/false);
    ckpt.epoch = epoch;
    ckpt.model = init_model<float>(ckpt.config.model_config(), ckpt.config.seed);

    auto params = ckpt.model.named_params();
    std::vector<bool> filled(params.size(), false);
    for (const auto& [name, tensor] : file.tensors) {
        if (name.rfind("optim.", 0) == 0) {
            ckpt.optimizer.emplace_back(name, tensor);
            continue;
        }
        if (name == "clf.w" || name == "clf.b") {
            ckpt.has_classifier = true;
            (name == "clf.w" ? ckpt.classifier.w : ckpt.classifier.b) = tensor;
            continue;
        }
        bool matched = false;
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (params[i].first != name) continue;
            if (params[i].second->shape() != tensor.shape()) {
                throw ParseError("checkpoint '" + path + "': tensor '" + name + "' has shape " +
                                 Tensor::shape_string(tensor.shape()) +
                                 " but the embedded config implies " +
                                 Tensor::shape_string(params[i].second->shape()));
            }
            *params[i].second = tensor;
            filled[i] = matched = true;
            break;
        }
        if (!matched) {
            throw ParseError("checkpoint '" + path + "': unexpected tensor '" + name + "'");
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!filled[i]) {
            throw ParseError("checkpoint '" + path + "': missing tensor '" + params[i].first + "'");
        }
    }
    if (ckpt.has_classifier &&
        (ckpt.classifier.w.rank() != 2 || ckpt.classifier.b.rank() != 1 ||
         ckpt.classifier.w.dim(0) != ckpt.classifier.b.dim(0))) {
        throw ParseError("checkpoint '" + path + "': inconsistent classifier tensors");
    }
    return ckpt;
}

PretrainResult pretrain(const RunConfig& cfg, const std::vector<AudioClip>& corpus,
                        const std::string& run_dir, const EpochCallback& on_epoch) {
    const Frontend fe;
    const int seg = fe.config().segment_samples();

    // Eligible = holds at least one full segment; indices stay stable so the
    // per-clip rng streams do not depend on what else was filtered out.
    std::vector<ClipView> eligible;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (static_cast<int>(corpus[i].samples.size()) >= seg) {
            eligible.push_back({&corpus[i].samples, static_cast<std::int64_t>(i)});
        }
    }
    const int n = static_cast<int>(eligible.size());
    const int b = cfg.batch_size;
    if (n < b) {
        throw CorpusError("pretrain: " + std::to_string(n) + " eligible clips for batch size " +
                          std::to_string(b));
    }

    ContrastiveModel model = init_model<float>(cfg.model_config(), cfg.seed);
    Adam adam({static_cast<float>(cfg.learning_rate)});
    auto params = named(model);

    const auto write = [&](int epoch, const std::string& name) {
        Checkpoint ckpt{cfg, epoch, model, false, {}, adam.export_state()};
        save_checkpoint(ckpt, (std::filesystem::path(run_dir) / name).string());
    };

    TrainLog log;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double t0 = now_seconds();
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = Rng::derive(cfg.seed, {Rng::tag("shuffle"), static_cast<std::uint64_t>(epoch)});
        shuffle_rng.shuffle(order.begin(), order.end());

        const int batches = n / b;
        double loss_sum = 0.0;
        for (int bi = 0; bi < batches; ++bi) {
            std::vector<ClipView> views(b);
            for (int j = 0; j < b; ++j) views[j] = eligible[order[bi * b + j]];
            const ContrastiveBatch batch =
                build_batch<float>(fe, views, cfg.seed, static_cast<std::uint64_t>(epoch));

            ObjectiveCacheT<float> cache;
            const float loss = contrastive_forward(model, batch, &cache);
            if (!std::isfinite(loss)) {
                throw TrainingError("pretrain: non-finite loss at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(bi));
            }
            loss_sum += loss;

            ContrastiveModel grads = zeros_like(model);
            contrastive_backward(model, batch, cache, &grads);
            adam.step(params, named(grads));
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = batches > 0 ? loss_sum / batches : 0.0;
        rec.train_accuracy = rec.eval_accuracy = std::nan("");
        rec.seconds = now_seconds() - t0;
        log.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (!run_dir.empty() && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
            write(epoch, epoch_checkpoint_name(epoch));
        }
    }

    PretrainResult result;
    result.checkpoint = Checkpoint{cfg, cfg.epochs, model, false, {}, adam.export_state()};
    result.log = log;
    if (!run_dir.empty()) write(cfg.epochs, "checkpoint.bin");
    return result;
}

namespace {

// Shared downstream loop; the only difference between probe and fine-tuning
// is whether encoder gradients exist and get applied.
DownstreamResult train_downstream(const Checkpoint& source, const std::vector<AudioClip>& clips,
                                  const std::vector<int>& labels, const RunConfig& cfg,
                                  bool update_encoder, const std::vector<AudioClip>* eval_clips,
                                  const std::vector<int>* eval_labels,
                                  const EpochCallback& on_epoch) {
    if (clips.size() != labels.size()) {
        throw ManifestError("downstream: " + std::to_string(clips.size()) + " clips vs " +
                            std::to_string(labels.size()) + " labels");
    }
    const int classes = cfg.classes;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            throw ManifestError("downstream: clip " + std::to_string(i) + " has label " +
                                std::to_string(labels[i]) + " outside [0, " +
                                std::to_string(classes) + ")");
        }
    }
    if (cfg.learning_rate < 0) throw TrainingError("downstream: negative learning rate");

    const Frontend fe;
    const auto& fcfg = fe.config();
    const int seg = fcfg.segment_samples();
    const std::int64_t patch = static_cast<std::int64_t>(fcfg.n_mels) * fcfg.segment_frames();

    const int n = static_cast<int>(clips.size());
    const int b = std::min(cfg.batch_size, n);
    if (n < 1) throw CorpusError("downstream: empty training set");

    ContrastiveModel model = source.model;  // copy; probe leaves it untouched
    const int d = model.config.embed_dim();
    ClassifierParamsT<float> clf = init_classifier<float>(classes, d, cfg.seed);

    Adam adam({static_cast<float>(cfg.learning_rate)});
    auto clf_params = named(clf);
    auto enc_params = std::vector<std::pair<std::string, Tensor*>>{};
    if (update_encoder) {
        for (std::size_t i = 0; i < model.encoder.blocks.size(); ++i) {
            const std::string base = "encoder.block" + std::to_string(i);
            enc_params.emplace_back(base + ".w", &model.encoder.blocks[i].w);
            enc_params.emplace_back(base + ".b", &model.encoder.blocks[i].b);
        }
    }

    TrainLog log;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double t0 = now_seconds();
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = Rng::derive(cfg.seed, {Rng::tag("shuffle"), static_cast<std::uint64_t>(epoch)});
        shuffle_rng.shuffle(order.begin(), order.end());

        const int batches = n / b;
        double loss_sum = 0.0;
        std::int64_t hits = 0, total = 0;
        for (int bi = 0; bi < batches; ++bi) {
            Tensor x({b, 1, fcfg.n_mels, fcfg.segment_frames()});
            std::vector<int> y(b);
            for (int j = 0; j < b; ++j) {
                const int ci = order[bi * b + j];
                y[j] = labels[ci];
                const std::vector<float>& s = clips[ci].samples;
                // Fresh random full segment per clip per epoch; short clips
                // are zero-padded the same way evaluation pads them.
                std::vector<float> window(seg, 0.0f);
                if (static_cast<int>(s.size()) <= seg) {
                    std::copy(s.begin(), s.end(), window.begin());
                } else {
                    Rng rng = Rng::derive(cfg.seed, {Rng::tag("seg"), static_cast<std::uint64_t>(epoch),
                                                     static_cast<std::uint64_t>(ci)});
                    const auto start = static_cast<std::int64_t>(
                        rng.uniform_int(static_cast<std::uint64_t>(s.size()) - seg + 1));
                    std::copy(s.begin() + start, s.begin() + start + seg, window.begin());
                }
                const Tensor f = fe.logmel(window);
                std::copy(f.data(), f.data() + patch, x.data() + j * patch);
            }

            EncoderCacheT<float> cache;
            const Tensor h = encoder_forward(model.encoder, x, &cache);
            const Tensor logits = classifier_logits(clf, h);
            Tensor probs;
            const float loss = softmax_xent_forward(logits, y, &probs);
            if (!std::isfinite(loss)) {
                throw TrainingError("downstream: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " + std::to_string(bi));
            }
            loss_sum += loss;
            for (int j = 0; j < b; ++j) {
                int arg = 0;
                for (int c = 1; c < classes; ++c) {
                    if (probs.at(j, c) > probs.at(j, arg)) arg = c;
                }
                hits += arg == y[j];
                ++total;
            }

            const Tensor dlogits = softmax_xent_backward(probs, y);
            Tensor dh, dw, db;
            dense_backward(h, clf.w, dlogits, &dh, &dw, &db);
            ClassifierParamsT<float> clf_grads{dw, db};
            if (update_encoder) {
                ContrastiveModel grads = zeros_like(model);
                encoder_backward(model.encoder, cache, dh, &grads.encoder);
                auto all_params = enc_params;
                auto all_grads = std::vector<std::pair<std::string, Tensor*>>{};
                for (std::size_t i = 0; i < grads.encoder.blocks.size(); ++i) {
                    const std::string base = "encoder.block" + std::to_string(i);
                    all_grads.emplace_back(base + ".w", &grads.encoder.blocks[i].w);
                    all_grads.emplace_back(base + ".b", &grads.encoder.blocks[i].b);
                }
                for (auto& kv : named(clf)) all_params.push_back(kv);
                for (auto& kv : named(clf_grads)) all_grads.push_back(kv);
                adam.step(all_params, all_grads);
            } else {
                adam.step(clf_params, named(clf_grads));
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = batches > 0 ? loss_sum / batches : 0.0;
        rec.train_accuracy = total > 0 ? static_cast<double>(hits) / total : std::nan("");
        rec.eval_accuracy = std::nan("");
        if (eval_clips && eval_labels) {
            std::vector<int> preds(eval_clips->size());
            for (std::size_t i = 0; i < eval_clips->size(); ++i) {
                preds[i] = predict_clip(fe, model.encoder, clf, (*eval_clips)[i].samples,
                                        cfg.average_logits)
                               .predicted;
            }
            rec.eval_accuracy = accuracy(preds, *eval_labels);
        }
        rec.seconds = now_seconds() - t0;
        log.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }

    // The artifact keeps the source run's model geometry so eval can rebuild
    // the encoder without the original config file.
    RunConfig out_cfg = cfg;
    out_cfg.channels = source.config.channels;
    out_cfg.proj_dim = source.config.proj_dim;
    out_cfg.similarity = source.config.similarity;
    out_cfg.temperature = source.config.temperature;
    out_cfg.symmetric_loss = source.config.symmetric_loss;

    DownstreamResult result;
    result.checkpoint = Checkpoint{out_cfg, cfg.epochs, model, true, clf, adam.export_state()};
    result.log = log;
    return result;
}

}  // namespace

DownstreamResult train_probe(const Checkpoint& source, const std::vector<AudioClip>& clips,
                             const std::vector<int>& labels, const RunConfig& cfg,
                             const std::vector<AudioClip>* eval_clips,
                             const std::vector<int>* eval_labels, const EpochCallback& on_epoch) {
    return train_downstream(source, clips, labels, cfg, /*update_encoder=*/false, eval_clips,
                            eval_labels, on_epoch);
}

DownstreamResult finetune(const Checkpoint& source, const std::vector<AudioClip>& clips,
                          const std::vector<int>& labels, const RunConfig& cfg,
                          const std::vector<AudioClip>* eval_clips,
                          const std::vector<int>* eval_labels, const EpochCallback& on_epoch) {
    return train_downstream(source, clips, labels, cfg, /*update_encoder=*/true, eval_clips,
                            eval_labels, on_epoch);
}

}  // namespace auricle
