#pragma once

#include <cstdint>
#include <vector>

#include "auricle/tensor.hpp"

namespace auricle {

// Fixed analysis geometry: 25 ms windows every 10 ms at 16 kHz, 64 mel bins
// between 60 Hz and 7.8 kHz. A 960 ms segment yields exactly 96 frames once
// the edges are reflection-padded by (win - hop) / 2.
struct FrontendConfig {
    int sample_rate = 16000;
    int win_length = 400;   // 25 ms
    int hop_length = 160;   // 10 ms
    int fft_size = 512;
    int n_mels = 64;
    double fmin_hz = 60.0;
    double fmax_hz = 7800.0;
    double log_offset = 1e-6;

    int segment_samples() const { return 15360; }  // 960 ms
    int segment_frames() const { return segment_samples() / hop_length; }
};

// HTK-style mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Radix-2 iterative FFT with precomputed twiddles. Size must be a power of
// two; forward() transforms in place.
class Fft {
public:
    explicit Fft(int n);
    int size() const { return n_; }
    void forward(std::vector<double>& re, std::vector<double>& im) const;

private:
    int n_;
    std::vector<int> bitrev_;
    std::vector<double> tw_re_;
    std::vector<double> tw_im_;
};

// Triangular mel filterbank over the one-sided power spectrum. Rows are
// filters, columns are FFT bins; each triangle peaks at 1 (no area
// normalization).
class MelBank {
public:
    explicit MelBank(const FrontendConfig& cfg);
    int n_mels() const { return n_mels_; }
    int n_bins() const { return n_bins_; }
    // weights[m * n_bins + k]
    const std::vector<double>& weights() const { return weights_; }
    void apply(const double* power, double* mel_out) const;

private:
    int n_mels_;
    int n_bins_;
    std::vector<double> weights_;
};

// Stateless per-segment feature extractor. Not part of the gradient path;
// features are inputs to the network.
class Frontend {
public:
    explicit Frontend(const FrontendConfig& cfg = {});

    const FrontendConfig& config() const { return cfg_; }

    // Input must be exactly segment_samples() long; output is {n_mels, frames}
    // of natural-log mel energies, floored at log(log_offset) for silence.
    Tensor logmel(const std::vector<float>& segment) const;

private:
    FrontendConfig cfg_;
    Fft fft_;
    MelBank bank_;
    std::vector<double> window_;
};

}  // namespace auricle
