#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "auricle/config.hpp"
#include "auricle/errors.hpp"

using namespace auricle;

namespace {

// Asserts the parse fails and that the message carries the given fragments.
void expect_error(const std::string& text, const std::vector<std::string>& overrides,
                  const std::vector<std::string>& fragments) {
    try {
        parse_config(text, overrides);
        FAIL("expected ConfigError for: ", text);
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (const std::string& frag : fragments) {
            INFO("message: ", msg);
            CHECK(msg.find(frag) != std::string::npos);
        }
    }
}

}  // namespace

TEST_CASE("config: minimal text fills mode-dependent defaults") {
    const RunConfig synth = parse_config("mode = synth", {});
    CHECK(synth.mode == Mode::synth);
    CHECK(synth.seed == 1);
    CHECK(synth.threads == 1);
    CHECK(synth.out_dir == "runs");
    CHECK(synth.batch_size == 64);
    CHECK(synth.learning_rate == 1e-3);  // non-pretraining default
    CHECK(synth.channels == std::vector<int>({32, 64, 128, 256}));
    CHECK(synth.proj_dim == 512);
    CHECK(synth.classes == 4);
    CHECK(synth.clips_per_class == 8);
    CHECK(synth.clip_seconds == 4.0);

    const RunConfig pre = parse_config(
        "mode = pretrain\nmanifest = m.jsonl\nepochs = 3", {});
    CHECK(pre.learning_rate == 1e-4);
}

TEST_CASE("config: every key parses into its typed field") {
    const std::string text =
        "mode = finetune\n"
        "seed = 42\n"
        "threads = 2\n"
        "out_dir = /tmp/run\n"
        "manifest = train.jsonl\n"
        "eval_manifest = test.jsonl\n"
        "checkpoint = model.ckpt\n"
        "epochs = 7\n"
        "batch_size = 16\n"
        "learning_rate = 5e-5\n"
        "checkpoint_every = 2\n"
        "preset = desk\n"
        "similarity = cosine\n"
        "temperature = 0.1\n"
        "symmetric_loss = true\n"
        "classes = 6\n"
        "average = logits\n"
        "clips_per_class = 12\n"
        "clip_seconds = 2.5\n";
    const RunConfig cfg = parse_config(text, {});
    CHECK(cfg.mode == Mode::finetune);
    CHECK(cfg.seed == 42);
    CHECK(cfg.threads == 2);
    CHECK(cfg.out_dir == "/tmp/run");
    CHECK(cfg.manifest == "train.jsonl");
    CHECK(cfg.eval_manifest == "test.jsonl");
    CHECK(cfg.checkpoint == "model.ckpt");
    CHECK(cfg.epochs == 7);
    CHECK(cfg.batch_size == 16);
    CHECK(cfg.learning_rate == 5e-5);
    CHECK(cfg.checkpoint_every == 2);
    CHECK(cfg.channels == std::vector<int>({8, 16, 32, 64}));
    CHECK(cfg.proj_dim == 64);
    CHECK(cfg.similarity == SimilarityKind::cosine);
    CHECK(cfg.temperature == 0.1);
    CHECK(cfg.symmetric_loss == true);
    CHECK(cfg.classes == 6);
    CHECK(cfg.average_logits == true);
    CHECK(cfg.clips_per_class == 12);
    CHECK(cfg.clip_seconds == 2.5);
}

TEST_CASE("config: overrides apply after the text, later overrides win") {
    const std::string text = "mode = synth\nbatch_size = 64\n";
    CHECK(parse_config(text, {"batch_size=128"}).batch_size == 128);
    CHECK(parse_config(text, {"batch_size=128", "batch_size=32"}).batch_size == 32);
    CHECK(parse_config(text, {"seed = 9"}).seed == 9);  // spaces allowed
}

TEST_CASE("config: comments and blank lines are ignored") {
    const std::string text =
        "# run settings\n"
        "\n"
        "mode = synth   # inline comment\n"
        "seed = 5\n";
    const RunConfig cfg = parse_config(text, {});
    CHECK(cfg.mode == Mode::synth);
    CHECK(cfg.seed == 5);
}

TEST_CASE("config: unknown keys name the key and its location") {
    expect_error("mode = synth\nbogus_key = 1\n", {}, {"unknown key 'bogus_key'", ":2"});
    expect_error("mode = synth", {"nope=1"}, {"unknown key 'nope'", "--set #1"});
}

TEST_CASE("config: malformed lines are rejected with their line number") {
    expect_error("mode = synth\njust words\n", {}, {"expected `key = value`", ":2"});
    expect_error("mode = synth\n = 3\n", {}, {"empty key"});
}

TEST_CASE("config: type mismatches cite the key and offending value") {
    expect_error("mode = synth\nlearning_rate = fast\n", {},
                 {"'learning_rate'", "expects a number", "'fast'"});
    expect_error("mode = synth\nepochs = 2.5\n", {}, {"'epochs'", "expects an integer"});
    expect_error("mode = synth\nsymmetric_loss = maybe\n", {}, {"expects true|false"});
    expect_error("mode = synth\nchannels = 32,,64\n", {}, {"empty element"});
    expect_error("mode = synth\nsimilarity = euclid\n", {}, {"expects bilinear|cosine"});
    expect_error("mode = synth\naverage = both\n", {}, {"expects probs|logits"});
    expect_error("mode = synth\npreset = huge\n", {}, {"expects full|desk"});
}

TEST_CASE("config: range checks") {
    expect_error("mode = synth\nseed = -1\n", {}, {"must be non-negative"});
    expect_error("mode = synth\nthreads = 0\n", {}, {"must be >= 1"});
    expect_error("mode = synth\nepochs = -1\n", {}, {"must be >= 0"});
    expect_error("mode = synth\nlearning_rate = 0\n", {}, {"must be > 0"});
    expect_error("mode = synth\nlearning_rate = -1e-4\n", {}, {"must be > 0"});
    expect_error("mode = synth\ntemperature = 0\n", {}, {"must be > 0"});
    expect_error("mode = synth\nclasses = 0\n", {}, {"must be >= 1"});
    expect_error("mode = synth\nproj_dim = 0\n", {}, {"must be >= 1"});
    expect_error("mode = synth\nchannels = 32,0\n", {}, {"entries must be >= 1"});
    expect_error("mode = synth\nclips_per_class = 0\n", {}, {"must be >= 1"});
    expect_error("mode = synth\nclip_seconds = 0.5\n", {}, {"must cover one 0.96 s segment"});
    expect_error("mode = synth\ncheckpoint_every = -1\n", {}, {"must be >= 0"});
}

TEST_CASE("config: contrastive batches need at least one negative") {
    expect_error("mode = pretrain\nmanifest = m\nepochs = 1\nbatch_size = 1\n", {},
                 {"batch_size", ">= 2", "pretrain"});
    // Downstream heads can run row by row.
    const RunConfig probe = parse_config(
        "mode = probe\ncheckpoint = c\nmanifest = m\nepochs = 1\nbatch_size = 1\n", {});
    CHECK(probe.batch_size == 1);
}

TEST_CASE("config: mode is mandatory and validated") {
    expect_error("seed = 3\n", {}, {"missing required key 'mode'"});
    expect_error("mode = train\n", {}, {"unknown mode 'train'"});
    CHECK(mode_from_name("eval") == Mode::eval);
    CHECK(mode_name(Mode::features) == "features");
}

TEST_CASE("config: missing mode-required keys are reported together") {
    expect_error("mode = pretrain\n", {}, {"mode 'pretrain'", "manifest, epochs"});
    expect_error("mode = probe\n", {}, {"checkpoint, manifest, epochs"});
    expect_error("mode = eval\nmanifest = m\n", {}, {"checkpoint"});
    expect_error("mode = features\n", {}, {"manifest"});

    // Checkpoint-embedded configs skip that validation.
    const RunConfig cfg = parse_config("mode = pretrain\n", {}, "<ckpt>", false);
    CHECK(cfg.mode == Mode::pretrain);
}

TEST_CASE("config: explicit geometry beats the preset") {
    const RunConfig cfg = parse_config(
        "mode = synth\npreset = desk\nchannels = 4,8\n", {});
    CHECK(cfg.channels == std::vector<int>({4, 8}));
    CHECK(cfg.proj_dim == 64);  // still the preset's projection width
}

TEST_CASE("config: serialization round-trips the resolved settings") {
    const RunConfig cfg = parse_config(
        "mode = pretrain\nmanifest = m.jsonl\nepochs = 9\npreset = desk\n"
        "learning_rate = 3e-4\nsimilarity = cosine\ntemperature = 0.25\n"
        "symmetric_loss = true\nseed = 77\nbatch_size = 32\naverage = logits\n",
        {});
    const std::string text = serialize_config(cfg, false);
    CHECK(text.find("threads") == std::string::npos);
    CHECK(text.find("out_dir") == std::string::npos);
    CHECK(serialize_config(cfg, true).find("threads = 1") != std::string::npos);
    CHECK(serialize_config(cfg, true).find("out_dir = runs") != std::string::npos);

    const RunConfig back = parse_config(text, {}, "<reparsed>", false);
    CHECK(back.mode == cfg.mode);
    CHECK(back.seed == cfg.seed);
    CHECK(back.manifest == cfg.manifest);
    CHECK(back.epochs == cfg.epochs);
    CHECK(back.batch_size == cfg.batch_size);
    CHECK(back.learning_rate == cfg.learning_rate);
    CHECK(back.channels == cfg.channels);
    CHECK(back.proj_dim == cfg.proj_dim);
    CHECK(back.similarity == cfg.similarity);
    CHECK(back.temperature == cfg.temperature);
    CHECK(back.symmetric_loss == cfg.symmetric_loss);
    CHECK(back.classes == cfg.classes);
    CHECK(back.average_logits == cfg.average_logits);
    CHECK(back.clips_per_class == cfg.clips_per_class);
    CHECK(back.clip_seconds == cfg.clip_seconds);
}

TEST_CASE("config: file loading reports missing paths") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/auricle.cfg", {}), IoError);

    const auto p = std::filesystem::temp_directory_path() / "auricle_cfg_test.cfg";
    {
        std::ofstream f(p);
        f << "mode = synth\nseed = 123\n";
    }
    const RunConfig cfg = parse_config_file(p.string(), {"seed=124"});
    CHECK(cfg.seed == 124);
    std::filesystem::remove(p);
}
