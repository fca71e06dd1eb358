#include "auricle/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "auricle/errors.hpp"

namespace auricle {

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::synth: return "synth";
        case Mode::features: return "features";
        case Mode::pretrain: return "pretrain";
        case Mode::probe: return "probe";
        case Mode::finetune: return "finetune";
        case Mode::eval: return "eval";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    for (Mode m : {Mode::synth, Mode::features, Mode::pretrain, Mode::probe, Mode::finetune,
                   Mode::eval}) {
        if (mode_name(m) == name) return m;
    }
    throw ConfigError("unknown mode '" + name +
                      "' (expected synth|features|pretrain|probe|finetune|eval)");
}

namespace {

const char* const kKnownKeys[] = {
    "mode",        "seed",          "threads",    "out_dir",         "manifest",
    "eval_manifest", "checkpoint",  "epochs",     "batch_size",      "learning_rate",
    "checkpoint_every", "preset",   "channels",   "proj_dim",        "similarity",
    "temperature", "symmetric_loss", "classes",   "average",         "clips_per_class",
    "clip_seconds",
};

bool known_key(const std::string& k) {
    for (const char* kk : kKnownKeys) {
        if (k == kk) return true;
    }
    return false;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

// Raw key/value pairs with the location they came from, for error messages.
struct RawEntry {
    std::string value;
    std::string where;
};

using RawMap = std::map<std::string, RawEntry>;

[[noreturn]] void bad(const RawMap& raw, const std::string& key, const std::string& what) {
    const auto it = raw.find(key);
    const std::string where = it == raw.end() ? "" : it->second.where + ": ";
    throw ConfigError(where + "key '" + key + "' " + what);
}

long long parse_int(const RawMap& raw, const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        bad(raw, key, "expects an integer, got '" + v + "'");
    }
    return out;
}

double parse_double(const RawMap& raw, const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) {
        bad(raw, key, "expects a number, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const RawMap& raw, const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    bad(raw, key, "expects true|false, got '" + v + "'");
}

std::vector<int> parse_int_list(const RawMap& raw, const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) bad(raw, key, "has an empty element in '" + v + "'");
        out.push_back(static_cast<int>(parse_int(raw, key, item)));
    }
    if (out.empty()) bad(raw, key, "expects a comma-separated integer list, got '" + v + "'");
    return out;
}

void add_line(RawMap& raw, const std::string& line, const std::string& where) {
    std::string body = line;
    if (const std::size_t hash = body.find('#'); hash != std::string::npos) {
        body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) return;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
        throw ConfigError(where + ": expected `key = value`, got '" + trim(line) + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    raw[key] = {value, where};
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::string& source, bool require_mode_keys) {
    RawMap raw;
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            add_line(raw, line, source + ":" + std::to_string(lineno));
        }
    }
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        add_line(raw, overrides[i], "--set #" + std::to_string(i + 1));
    }

    for (const auto& [key, entry] : raw) {
        if (!known_key(key)) {
            throw ConfigError(entry.where + ": unknown key '" + key + "'");
        }
    }

    const auto has = [&raw](const char* k) { return raw.count(k) != 0; };
    const auto get = [&raw](const char* k) -> const std::string& { return raw.at(k).value; };

    if (!has("mode")) throw ConfigError(source + ": missing required key 'mode'");

    RunConfig cfg;
    cfg.mode = mode_from_name(get("mode"));

    if (has("seed")) {
        const long long s = parse_int(raw, "seed", get("seed"));
        if (s < 0) bad(raw, "seed", "must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (has("threads")) {
        cfg.threads = static_cast<int>(parse_int(raw, "threads", get("threads")));
        if (cfg.threads < 1) bad(raw, "threads", "must be >= 1");
    }
    if (has("out_dir")) cfg.out_dir = get("out_dir");
    if (has("manifest")) cfg.manifest = get("manifest");
    if (has("eval_manifest")) cfg.eval_manifest = get("eval_manifest");
    if (has("checkpoint")) cfg.checkpoint = get("checkpoint");

    if (has("epochs")) {
        cfg.epochs = static_cast<int>(parse_int(raw, "epochs", get("epochs")));
        if (cfg.epochs < 0) bad(raw, "epochs", "must be >= 0");
    }
    if (has("batch_size")) {
        cfg.batch_size = static_cast<int>(parse_int(raw, "batch_size", get("batch_size")));
    }
    const int min_batch = cfg.mode == Mode::pretrain ? 2 : 1;
    if (cfg.batch_size < min_batch) {
        bad(raw, "batch_size", "must be >= " + std::to_string(min_batch) + " in mode '" +
                                   mode_name(cfg.mode) + "'");
    }

    cfg.learning_rate = cfg.mode == Mode::pretrain ? 1e-4 : 1e-3;
    if (has("learning_rate")) {
        cfg.learning_rate = parse_double(raw, "learning_rate", get("learning_rate"));
        if (!(cfg.learning_rate > 0)) bad(raw, "learning_rate", "must be > 0");
    }
    if (has("checkpoint_every")) {
        cfg.checkpoint_every =
            static_cast<int>(parse_int(raw, "checkpoint_every", get("checkpoint_every")));
        if (cfg.checkpoint_every < 0) bad(raw, "checkpoint_every", "must be >= 0");
    }

    if (has("preset")) cfg.preset = get("preset");
    if (cfg.preset == "full") {
        cfg.channels = {32, 64, 128, 256};
        cfg.proj_dim = 512;
    } else if (cfg.preset == "desk") {
        cfg.channels = {8, 16, 32, 64};
        cfg.proj_dim = 64;
    } else {
        bad(raw, "preset", "expects full|desk, got '" + cfg.preset + "'");
    }
    // Explicit geometry wins over the preset.
    if (has("channels")) {
        cfg.channels = parse_int_list(raw, "channels", get("channels"));
        for (int c : cfg.channels) {
            if (c < 1) bad(raw, "channels", "entries must be >= 1");
        }
    }
    if (has("proj_dim")) {
        cfg.proj_dim = static_cast<int>(parse_int(raw, "proj_dim", get("proj_dim")));
        if (cfg.proj_dim < 1) bad(raw, "proj_dim", "must be >= 1");
    }

    if (has("similarity")) {
        const std::string& s = get("similarity");
        if (s == "bilinear") {
            cfg.similarity = SimilarityKind::bilinear;
        } else if (s == "cosine") {
            cfg.similarity = SimilarityKind::cosine;
        } else {
            bad(raw, "similarity", "expects bilinear|cosine, got '" + s + "'");
        }
    }
    if (has("temperature")) {
        cfg.temperature = parse_double(raw, "temperature", get("temperature"));
        if (!(cfg.temperature > 0)) bad(raw, "temperature", "must be > 0");
    }
    if (has("symmetric_loss")) {
        cfg.symmetric_loss = parse_bool(raw, "symmetric_loss", get("symmetric_loss"));
    }

    if (has("classes")) {
        cfg.classes = static_cast<int>(parse_int(raw, "classes", get("classes")));
        if (cfg.classes < 1) bad(raw, "classes", "must be >= 1");
    }
    if (has("average")) {
        const std::string& s = get("average");
        if (s == "probs") {
            cfg.average_logits = false;
        } else if (s == "logits") {
            cfg.average_logits = true;
        } else {
            bad(raw, "average", "expects probs|logits, got '" + s + "'");
        }
    }
    if (has("clips_per_class")) {
        cfg.clips_per_class =
            static_cast<int>(parse_int(raw, "clips_per_class", get("clips_per_class")));
        if (cfg.clips_per_class < 1) bad(raw, "clips_per_class", "must be >= 1");
    }
    if (has("clip_seconds")) {
        cfg.clip_seconds = parse_double(raw, "clip_seconds", get("clip_seconds"));
        if (cfg.clip_seconds < 0.96) bad(raw, "clip_seconds", "must cover one 0.96 s segment");
    }

    if (!require_mode_keys) return cfg;

    // Mode-required keys, reported together.
    std::vector<const char*> required;
    switch (cfg.mode) {
        case Mode::synth: break;
        case Mode::features: required = {"manifest"}; break;
        case Mode::pretrain: required = {"manifest", "epochs"}; break;
        case Mode::probe:
        case Mode::finetune: required = {"checkpoint", "manifest", "epochs"}; break;
        case Mode::eval: required = {"checkpoint", "manifest"}; break;
    }
    std::string missing;
    for (const char* k : required) {
        if (!has(k)) missing += missing.empty() ? k : std::string(", ") + k;
    }
    if (!missing.empty()) {
        throw ConfigError(source + ": mode '" + mode_name(cfg.mode) +
                          "' is missing required keys: " + missing);
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw IoError("config: cannot open '" + path + "'");
    std::ostringstream text;
    text << f.rdbuf();
    return parse_config(text.str(), overrides, path);
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc() ? std::string(buf, p) : std::to_string(v);
}

}  // namespace

std::string serialize_config(const RunConfig& cfg, bool include_environment) {
    std::ostringstream out;
    out << "mode = " << mode_name(cfg.mode) << "\n";
    out << "seed = " << cfg.seed << "\n";
    if (include_environment) {
        out << "threads = " << cfg.threads << "\n";
        out << "out_dir = " << cfg.out_dir << "\n";
    }
    if (!cfg.manifest.empty()) out << "manifest = " << cfg.manifest << "\n";
    if (!cfg.eval_manifest.empty()) out << "eval_manifest = " << cfg.eval_manifest << "\n";
    if (!cfg.checkpoint.empty()) out << "checkpoint = " << cfg.checkpoint << "\n";
    out << "epochs = " << cfg.epochs << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "learning_rate = " << fmt_double(cfg.learning_rate) << "\n";
    out << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    out << "channels = ";
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        out << (i ? "," : "") << cfg.channels[i];
    }
    out << "\n";
    out << "proj_dim = " << cfg.proj_dim << "\n";
    out << "similarity = "
        << (cfg.similarity == SimilarityKind::bilinear ? "bilinear" : "cosine") << "\n";
    out << "temperature = " << fmt_double(cfg.temperature) << "\n";
    out << "symmetric_loss = " << (cfg.symmetric_loss ? "true" : "false") << "\n";
    out << "classes = " << cfg.classes << "\n";
    out << "average = " << (cfg.average_logits ? "logits" : "probs") << "\n";
    out << "clips_per_class = " << cfg.clips_per_class << "\n";
    out << "clip_seconds = " << fmt_double(cfg.clip_seconds) << "\n";
    return out.str();
}

}  // namespace auricle
