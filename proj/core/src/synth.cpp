#include "auricle/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "auricle/errors.hpp"
#include "auricle/rng.hpp"

namespace auricle {
namespace {

constexpr int kNoiseComponents = 192;

// Unit-amplitude sinusoid advanced by complex rotation, so a 4-second clip
// does not cost 64k libm sin() calls per component.
class Phasor {
public:
    Phasor(double freq_hz, double phase, int sample_rate) {
        const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
        rot_re_ = std::cos(w);
        rot_im_ = std::sin(w);
        re_ = std::cos(phase);
        im_ = std::sin(phase);
    }

    double sin_value() const { return im_; }
    double cos_value() const { return re_; }

    void advance() {
        const double re = re_ * rot_re_ - im_ * rot_im_;
        im_ = re_ * rot_im_ + im_ * rot_re_;
        re_ = re;
    }

private:
    double rot_re_, rot_im_;
    double re_, im_;
};

std::vector<double> frequency_pool(int size) {
    // Log-spaced between 300 Hz and 4 kHz, inside the mel band and well
    // below Nyquist.
    std::vector<double> pool(size);
    for (int k = 0; k < size; ++k) {
        pool[k] = 300.0 * std::pow(4000.0 / 300.0, static_cast<double>(k) / (size - 1));
    }
    return pool;
}

void validate(const SynthSpec& spec) {
    if (spec.num_classes < 1) throw SpecError("synth: num_classes must be >= 1");
    if (spec.clips_per_class < 1) throw SpecError("synth: clips_per_class must be >= 1");
    if (static_cast<int>(spec.signatures.size()) != spec.num_classes) {
        throw SpecError("synth: " + std::to_string(spec.signatures.size()) + " signatures for " +
                        std::to_string(spec.num_classes) + " classes");
    }
    const double nyquist = spec.sample_rate / 2.0;
    std::set<std::vector<double>> seen;
    for (const ClassSignature& sig : spec.signatures) {
        if (sig.sine_hz.empty()) throw SpecError("synth: class signature with no sines");
        for (double f : sig.sine_hz) {
            if (f <= 0 || f >= nyquist) {
                throw SpecError("synth: sine frequency " + std::to_string(f) +
                                " Hz outside (0, Nyquist)");
            }
        }
        if (sig.noise_hi_hz >= nyquist || sig.noise_lo_hz <= 0 ||
            sig.noise_lo_hz >= sig.noise_hi_hz) {
            throw SpecError("synth: invalid noise band");
        }
        std::vector<double> key = sig.sine_hz;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) {
            throw SpecError("synth: duplicate class signature (same sine set)");
        }
    }
    const double min_len = 15360.0 / spec.sample_rate;
    if (spec.clip_seconds < min_len) {
        throw SpecError("synth: clips must be at least one 960 ms segment long");
    }
}

}  // namespace

std::vector<ClassSignature> default_signatures(int num_classes) {
    if (num_classes < 1) throw SpecError("synth: num_classes must be >= 1");

    std::vector<std::vector<int>> picks;
    if (num_classes == 4) {
        // Every pair of classes shares exactly one pool frequency, and every
        // frequency belongs to exactly two classes: no single band gives a
        // class away.
        picks = {{0, 2, 4}, {0, 3, 5}, {1, 2, 5}, {1, 3, 4}};
    } else {
        int pool = 6;
        auto choose3 = [](int p) { return p * (p - 1) * (p - 2) / 6; };
        while (choose3(pool) < num_classes) ++pool;
        for (int a = 0; a < pool && static_cast<int>(picks.size()) < num_classes; ++a) {
            for (int b = a + 1; b < pool && static_cast<int>(picks.size()) < num_classes; ++b) {
                for (int c = b + 1; c < pool && static_cast<int>(picks.size()) < num_classes; ++c) {
                    picks.push_back({a, b, c});
                }
            }
        }
    }

    int pool_size = 6;
    for (const auto& p : picks) pool_size = std::max(pool_size, p.back() + 1);
    const std::vector<double> pool = frequency_pool(pool_size);

    std::vector<ClassSignature> out;
    for (int c = 0; c < num_classes; ++c) {
        ClassSignature sig;
        for (int k : picks[c]) sig.sine_hz.push_back(pool[k]);
        sig.am_rate_hz = 1.0 * std::pow(1.5, c % 6);
        out.push_back(std::move(sig));
    }
    return out;
}

std::vector<LabeledClip> generate_corpus(const SynthSpec& spec_in, std::uint64_t seed) {
    SynthSpec spec = spec_in;
    if (spec.signatures.empty()) spec.signatures = default_signatures(spec.num_classes);
    validate(spec);

    const int total = spec.num_classes * spec.clips_per_class;
    const int n = static_cast<int>(std::lround(spec.clip_seconds * spec.sample_rate));

    // Pair layout (i/2) % C keeps the parity split balanced; when
    // clips_per_class is odd the last C clips are dealt out one per class.
    std::vector<int> labels(total);
    const int paired = spec.clips_per_class % 2 == 0
                           ? total
                           : spec.num_classes * (spec.clips_per_class - 1);
    for (int i = 0; i < paired; ++i) labels[i] = (i / 2) % spec.num_classes;
    for (int i = paired; i < total; ++i) labels[i] = i - paired;

    std::vector<LabeledClip> corpus(total);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < total; ++i) {
        const int label = labels[i];
        const ClassSignature& sig = spec.signatures[label];
        Rng rng = Rng::derive(seed, {Rng::tag("clip"), static_cast<std::uint64_t>(i)});

        // Fixed draw order: sine phases, AM phase, SNR, then noise phases.
        std::vector<Phasor> sines;
        for (double f : sig.sine_hz) {
            sines.emplace_back(f, rng.uniform(0.0, two_pi), spec.sample_rate);
        }
        Phasor am(sig.am_rate_hz, rng.uniform(0.0, two_pi), spec.sample_rate);
        const double snr_db = rng.uniform(spec.snr_lo_db, spec.snr_hi_db);

        const double sine_amp = 1.0 / static_cast<double>(sines.size());
        std::vector<double> x(n);
        double signal_power = 0.0;
        for (int t = 0; t < n; ++t) {
            double s = 0.0;
            for (Phasor& p : sines) {
                s += p.sin_value();
                p.advance();
            }
            const double env = 1.0 - sig.am_depth * (0.5 + 0.5 * am.sin_value());
            am.advance();
            const double v = sine_amp * s * env;
            x[t] = v;
            signal_power += v * v;
        }
        signal_power /= n;

        const double noise_power = signal_power / std::pow(10.0, snr_db / 10.0);
        const double comp_amp = std::sqrt(2.0 * noise_power / kNoiseComponents);
        std::vector<Phasor> noise;
        noise.reserve(kNoiseComponents);
        for (int k = 0; k < kNoiseComponents; ++k) {
            const double f = sig.noise_lo_hz +
                             (sig.noise_hi_hz - sig.noise_lo_hz) * k / (kNoiseComponents - 1);
            noise.emplace_back(f, rng.uniform(0.0, two_pi), spec.sample_rate);
        }
        for (int t = 0; t < n; ++t) {
            double v = 0.0;
            for (Phasor& p : noise) {
                v += p.cos_value();
                p.advance();
            }
            x[t] += comp_amp * v;
        }

        double peak = 0.0;
        for (double v : x) peak = std::max(peak, std::fabs(v));
        const double gain = peak > 0.0 ? 0.95 / peak : 1.0;

        LabeledClip& out = corpus[i];
        out.label = label;
        out.clip.sample_rate = spec.sample_rate;
        char id[32];
        std::snprintf(id, sizeof(id), "clip-%06d", i);
        out.clip.id = id;
        out.clip.samples.resize(n);
        for (int t = 0; t < n; ++t) {
            out.clip.samples[t] = static_cast<float>(x[t] * gain);
        }
    }
    return corpus;
}

std::pair<std::vector<int>, std::vector<int>> parity_split(int n) {
    std::pair<std::vector<int>, std::vector<int>> out;
    for (int i = 0; i < n; ++i) {
        (i % 2 == 0 ? out.first : out.second).push_back(i);
    }
    return out;
}

}  // namespace auricle
