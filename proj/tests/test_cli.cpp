// Drives the installed binary end to end through std::system. The binary
// path arrives via AURICLE_BIN (set by ctest); every invocation gets its
// stdout/stderr captured to files in a per-test scratch directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* bin = std::getenv("AURICLE_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "AURICLE_BIN must point at the CLI binary");
    return bin;
}

struct Invocation {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream f(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct Scratch {
    fs::path root;
    int calls = 0;

    explicit Scratch(const std::string& stem) {
        static int sequence = 0;
        root = fs::temp_directory_path() /
               (stem + std::to_string(::getpid()) + "-" + std::to_string(sequence++));
        fs::create_directories(root);
    }
    ~Scratch() { fs::remove_all(root); }

    fs::path file(const std::string& name) const { return root / name; }

    Invocation run(const std::string& args) {
        const fs::path out = root / ("stdout-" + std::to_string(calls) + ".txt");
        const fs::path err = root / ("stderr-" + std::to_string(calls) + ".txt");
        ++calls;
        const std::string cmd =
            "'" + binary() + "' " + args + " >" + out.string() + " 2>" + err.string();
        const int rc = std::system(cmd.c_str());
        Invocation result;
        result.status = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
        result.out = slurp(out);
        result.err = slurp(err);
        return result;
    }
};

// The binary prints "run directory: <path>" before doing any work.
fs::path run_dir_of(const Invocation& inv) {
    const std::string marker = "run directory: ";
    const std::size_t at = inv.out.find(marker);
    REQUIRE_MESSAGE(at != std::string::npos, "stdout: ", inv.out, "stderr: ", inv.err);
    const std::size_t end = inv.out.find('\n', at);
    return inv.out.substr(at + marker.size(), end - at - marker.size());
}

std::vector<std::string> nonempty_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

}  // namespace

TEST_CASE("cli: failures exit nonzero and name an error category") {
    Scratch sc("auricle-cli-err-");

    CHECK(sc.run("").status != 0);  // missing subcommand

    const Invocation bad_type = sc.run("pretrain --set epochs=fast --out " + sc.root.string());
    CHECK(bad_type.status == 1);
    CHECK(bad_type.err.find("error[config]") != std::string::npos);
    CHECK(bad_type.err.find("epochs") != std::string::npos);

    const Invocation no_manifest = sc.run("pretrain --out " + sc.root.string());
    CHECK(no_manifest.status == 1);
    CHECK(no_manifest.err.find("error[config]") != std::string::npos);
    CHECK(no_manifest.err.find("manifest") != std::string::npos);

    const Invocation gone = sc.run("eval --set checkpoint=" + sc.file("missing.bin").string() +
                                   " --set manifest=" + sc.file("m.jsonl").string() + " --out " +
                                   sc.root.string());
    CHECK(gone.status == 1);
    CHECK(gone.err.find("error[io]") != std::string::npos);
}

TEST_CASE("cli: synth writes a corpus with balanced split manifests") {
    Scratch sc("auricle-cli-synth-");
    const Invocation inv =
        sc.run("synth --out " + sc.root.string() +
               " --seed 5 --set classes=2 --set clips_per_class=4 --set clip_seconds=1.2");
    REQUIRE_MESSAGE(inv.status == 0, "stderr: ", inv.err);
    const fs::path run = run_dir_of(inv);

    CHECK(fs::exists(run / "config.resolved"));
    const std::string resolved = slurp(run / "config.resolved");
    CHECK(resolved.find("mode = synth") != std::string::npos);
    CHECK(resolved.find("seed = 5") != std::string::npos);

    int wavs = 0;
    for (const auto& entry : fs::directory_iterator(run / "wav")) {
        wavs += entry.path().extension() == ".wav";
    }
    CHECK(wavs == 8);

    const auto all = nonempty_lines(slurp(run / "manifest.jsonl"));
    const auto train = nonempty_lines(slurp(run / "manifest-train.jsonl"));
    const auto test = nonempty_lines(slurp(run / "manifest-test.jsonl"));
    REQUIRE(all.size() == 8);
    REQUIRE(train.size() == 4);
    REQUIRE(test.size() == 4);

    // Pairs of consecutive clips share a class, so the even/odd split keeps
    // both halves balanced: two clips per class in each.
    int train_label_counts[2] = {0, 0};
    for (const std::string& line : train) {
        const auto j = nlohmann::json::parse(line);
        REQUIRE(j.contains("path"));
        REQUIRE(j.contains("label"));
        const int label = j["label"];
        REQUIRE(label >= 0);
        REQUIRE(label < 2);
        ++train_label_counts[label];
    }
    CHECK(train_label_counts[0] == 2);
    CHECK(train_label_counts[1] == 2);
}

TEST_CASE("cli: later overrides win over config files and earlier flags") {
    Scratch sc("auricle-cli-prec-");
    write_file(sc.file("base.cfg"),
               "classes = 2\nclips_per_class = 2\nclip_seconds = 1\nseed = 3\n");

    const Invocation inv = sc.run("synth --config " + sc.file("base.cfg").string() +
                                  " --set clips_per_class=3 --set seed=4 --seed 9 --out " +
                                  sc.root.string());
    REQUIRE_MESSAGE(inv.status == 0, "stderr: ", inv.err);
    const fs::path run = run_dir_of(inv);

    const std::string resolved = slurp(run / "config.resolved");
    CHECK(resolved.find("clips_per_class = 3") != std::string::npos);
    CHECK(resolved.find("seed = 9") != std::string::npos);

    int wavs = 0;
    for (const auto& entry : fs::directory_iterator(run / "wav")) {
        wavs += entry.path().extension() == ".wav";
    }
    CHECK(wavs == 6);  // 2 classes x 3 clips
}

TEST_CASE("cli: the pipeline chains synth, pretrain, probe, and eval") {
    Scratch sc("auricle-cli-pipe-");

    const Invocation synth =
        sc.run("synth --out " + sc.root.string() +
               " --seed 11 --set classes=2 --set clips_per_class=4 --set clip_seconds=1.2");
    REQUIRE_MESSAGE(synth.status == 0, "stderr: ", synth.err);
    const fs::path synth_run = run_dir_of(synth);

    // Feature dump: 1.2 s clips hold exactly one 960 ms segment each.
    const Invocation features =
        sc.run("features --set manifest=" + (synth_run / "manifest.jsonl").string() + " --out " +
               sc.root.string());
    REQUIRE_MESSAGE(features.status == 0, "stderr: ", features.err);
    CHECK(fs::exists(run_dir_of(features) / "features.bin"));
    CHECK(features.out.find("8 patches") != std::string::npos);

    write_file(sc.file("pretrain.cfg"), "manifest = " + (synth_run / "manifest.jsonl").string() +
                                            "\nepochs = 2\nbatch_size = 4\nchannels = 4,8\n"
                                            "proj_dim = 8\nlearning_rate = 0.001\n");
    const Invocation pre =
        sc.run("pretrain --config " + sc.file("pretrain.cfg").string() + " --seed 13 --out " +
               sc.root.string());
    REQUIRE_MESSAGE(pre.status == 0, "stderr: ", pre.err);
    const fs::path pre_run = run_dir_of(pre);
    REQUIRE(fs::exists(pre_run / "checkpoint.bin"));
    CHECK(pre.out.find("checkpoint:") != std::string::npos);

    const auto pre_log = nonempty_lines(slurp(pre_run / "train.log.jsonl"));
    REQUIRE(pre_log.size() == 2);
    for (const std::string& line : pre_log) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("epoch"));
        CHECK(j.contains("loss"));
        CHECK_FALSE(j.contains("train_accuracy"));  // unlabeled phase
    }

    const Invocation probe = sc.run(
        "probe --set checkpoint=" + (pre_run / "checkpoint.bin").string() +
        " --set manifest=" + (synth_run / "manifest-train.jsonl").string() +
        " --set eval_manifest=" + (synth_run / "manifest-test.jsonl").string() +
        " --set epochs=2 --set batch_size=4 --set learning_rate=0.01 --set classes=2" +
        " --seed 17 --out " + sc.root.string());
    REQUIRE_MESSAGE(probe.status == 0, "stderr: ", probe.err);
    const fs::path probe_run = run_dir_of(probe);
    REQUIRE(fs::exists(probe_run / "checkpoint.bin"));

    const auto probe_log = nonempty_lines(slurp(probe_run / "train.log.jsonl"));
    REQUIRE(probe_log.size() == 2);
    for (const std::string& line : probe_log) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("train_accuracy"));
        CHECK(j.contains("eval_accuracy"));
    }

    const Invocation eval =
        sc.run("eval --set checkpoint=" + (probe_run / "checkpoint.bin").string() +
               " --set manifest=" + (synth_run / "manifest-test.jsonl").string() + " --out " +
               sc.root.string());
    REQUIRE_MESSAGE(eval.status == 0, "stderr: ", eval.err);
    const fs::path eval_run = run_dir_of(eval);
    CHECK(eval.out.find("accuracy") != std::string::npos);

    const auto preds = nonempty_lines(slurp(eval_run / "predictions.jsonl"));
    REQUIRE(preds.size() == 5);  // 4 clips + summary
    for (int i = 0; i < 4; ++i) {
        const auto j = nlohmann::json::parse(preds[i]);
        REQUIRE(j.contains("predicted"));
        REQUIRE(j.contains("probs"));
        REQUIRE(j.contains("label"));
        const std::vector<double> probs = j["probs"];
        REQUIRE(probs.size() == 2);
        // float32 softmax rows, so the sum carries a few ULP
        CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-6));
    }
    const auto summary = nlohmann::json::parse(preds.back());
    REQUIRE(summary.contains("accuracy"));
    CHECK(summary["clips"] == 4);

    // A pretraining checkpoint has no classifier head to evaluate with.
    const Invocation headless =
        sc.run("eval --set checkpoint=" + (pre_run / "checkpoint.bin").string() +
               " --set manifest=" + (synth_run / "manifest-test.jsonl").string() + " --out " +
               sc.root.string());
    CHECK(headless.status == 1);
    CHECK(headless.err.find("error[config]") != std::string::npos);
    CHECK(headless.err.find("no classifier") != std::string::npos);
}
