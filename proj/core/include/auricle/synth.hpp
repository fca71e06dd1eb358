#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "auricle/audio.hpp"

namespace auricle {

// A class is a fixed chord: a small set of sine frequencies, plus a noise
// band and a slow amplitude-modulation rate. Frequencies are drawn from a
// shared pool so any two classes overlap in at most one component; telling
// classes apart requires the combination, which is what makes a linear probe
// on a trained embedding beat one on a random encoder.
struct ClassSignature {
    std::vector<double> sine_hz;
    double noise_lo_hz = 4500.0;
    double noise_hi_hz = 7000.0;
    double am_rate_hz = 1.0;
    double am_depth = 0.5;
};

struct SynthSpec {
    int num_classes = 4;
    int clips_per_class = 8;
    double clip_seconds = 4.0;
    int sample_rate = kWorkingRateHz;
    double snr_lo_db = 5.0;
    double snr_hi_db = 20.0;
    std::vector<ClassSignature> signatures;  // filled from default_signatures() when empty
};

struct LabeledClip {
    AudioClip clip;
    int label = 0;
};

// Three-sine signatures over a log-spaced pool in [300, 4000] Hz. The
// four-class set is hand-picked so every pair of classes shares exactly one
// frequency; other class counts fall back to lexicographic triples.
std::vector<ClassSignature> default_signatures(int num_classes);

// Deterministic corpus: same spec and seed give bitwise-identical samples.
// Clip i gets label (i/2) % C (pairs keep both index parities inside one
// class), so the parity split below stays balanced within one clip.
std::vector<LabeledClip> generate_corpus(const SynthSpec& spec, std::uint64_t seed);

// Disjoint split by clip index parity: (even indices, odd indices).
std::pair<std::vector<int>, std::vector<int>> parity_split(int n);

}  // namespace auricle
