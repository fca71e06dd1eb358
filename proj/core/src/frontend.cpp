#include "auricle/frontend.hpp"

#include <cmath>
#include <numbers>

#include "auricle/errors.hpp"

namespace auricle {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Fft::Fft(int n) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0) {
        throw ShapeError("fft: size must be a power of two >= 2, got " + std::to_string(n));
    }
    bitrev_.resize(n);
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1) << (bits - 1 - b);
        bitrev_[i] = r;
    }
    tw_re_.resize(n / 2);
    tw_im_.resize(n / 2);
    for (int k = 0; k < n / 2; ++k) {
        const double ang = -2.0 * std::numbers::pi * k / n;
        tw_re_[k] = std::cos(ang);
        tw_im_[k] = std::sin(ang);
    }
}

void Fft::forward(std::vector<double>& re, std::vector<double>& im) const {
    if (static_cast<int>(re.size()) != n_ || static_cast<int>(im.size()) != n_) {
        throw ShapeError("fft: buffer size does not match transform size " + std::to_string(n_));
    }
    for (int i = 0; i < n_; ++i) {
        const int j = bitrev_[i];
        if (j > i) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (int len = 2; len <= n_; len <<= 1) {
        const int half = len / 2;
        const int stride = n_ / len;
        for (int base = 0; base < n_; base += len) {
            for (int k = 0; k < half; ++k) {
                const double wr = tw_re_[k * stride];
                const double wi = tw_im_[k * stride];
                const int a = base + k;
                const int b = a + half;
                const double tr = re[b] * wr - im[b] * wi;
                const double ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
    }
}

MelBank::MelBank(const FrontendConfig& cfg)
    : n_mels_(cfg.n_mels), n_bins_(cfg.fft_size / 2 + 1) {
    if (cfg.fmin_hz < 0 || cfg.fmax_hz <= cfg.fmin_hz ||
        cfg.fmax_hz > cfg.sample_rate / 2.0) {
        throw ConfigError("melbank: invalid band " + std::to_string(cfg.fmin_hz) + ".." +
                          std::to_string(cfg.fmax_hz) + " Hz at rate " +
                          std::to_string(cfg.sample_rate));
    }
    weights_.assign(static_cast<std::size_t>(n_mels_) * n_bins_, 0.0);

    // n_mels + 2 points equally spaced on the mel axis; triangle m spans
    // [edge m, edge m+2] and peaks at edge m+1.
    const double mel_lo = hz_to_mel(cfg.fmin_hz);
    const double mel_hi = hz_to_mel(cfg.fmax_hz);
    std::vector<double> edges(n_mels_ + 2);
    for (int i = 0; i < n_mels_ + 2; ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels_ + 1));
    }

    const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
    for (int m = 0; m < n_mels_; ++m) {
        const double f_lo = edges[m], f_c = edges[m + 1], f_hi = edges[m + 2];
        for (int k = 0; k < n_bins_; ++k) {
            const double f = k * bin_hz;
            double w = 0.0;
            if (f > f_lo && f < f_c) {
                w = (f - f_lo) / (f_c - f_lo);
            } else if (f == f_c) {
                w = 1.0;
            } else if (f > f_c && f < f_hi) {
                w = (f_hi - f) / (f_hi - f_c);
            }
            weights_[static_cast<std::size_t>(m) * n_bins_ + k] = w;
        }
    }
}

void MelBank::apply(const double* power, double* mel_out) const {
    for (int m = 0; m < n_mels_; ++m) {
        const double* row = weights_.data() + static_cast<std::size_t>(m) * n_bins_;
        double acc = 0.0;
        for (int k = 0; k < n_bins_; ++k) acc += row[k] * power[k];
        mel_out[m] = acc;
    }
}

Frontend::Frontend(const FrontendConfig& cfg) : cfg_(cfg), fft_(cfg.fft_size), bank_(cfg) {
    if (cfg.win_length > cfg.fft_size) {
        throw ConfigError("frontend: window " + std::to_string(cfg.win_length) +
                          " longer than FFT size " + std::to_string(cfg.fft_size));
    }
    if (cfg.segment_samples() % cfg.hop_length != 0) {
        throw ConfigError("frontend: segment length must be a multiple of the hop");
    }
    // Periodic Hann.
    window_.resize(cfg.win_length);
    for (int n = 0; n < cfg.win_length; ++n) {
        window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg.win_length);
    }
}

Tensor Frontend::logmel(const std::vector<float>& segment) const {
    const int n = cfg_.segment_samples();
    if (static_cast<int>(segment.size()) != n) {
        throw ShapeError("frontend: expected " + std::to_string(n) + " samples, got " +
                         std::to_string(segment.size()));
    }
    const int frames = cfg_.segment_frames();
    const int pad = (cfg_.win_length - cfg_.hop_length) / 2;

    // Reflect the edges so every frame is fully inside the padded signal and
    // the frame count comes out to exactly samples / hop.
    std::vector<double> x(n + 2 * pad);
    for (int i = 0; i < pad; ++i) x[i] = segment[pad - i];
    for (int i = 0; i < n; ++i) x[pad + i] = segment[i];
    for (int i = 0; i < pad; ++i) x[pad + n + i] = segment[n - 2 - i];

    const int n_bins = cfg_.fft_size / 2 + 1;
    std::vector<double> re(cfg_.fft_size), im(cfg_.fft_size);
    std::vector<double> power(n_bins), mel(cfg_.n_mels);

    Tensor out({cfg_.n_mels, frames});
    for (int t = 0; t < frames; ++t) {
        const double* frame = x.data() + static_cast<std::size_t>(t) * cfg_.hop_length;
        for (int i = 0; i < cfg_.win_length; ++i) re[i] = frame[i] * window_[i];
        std::fill(re.begin() + cfg_.win_length, re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        fft_.forward(re, im);
        for (int k = 0; k < n_bins; ++k) power[k] = re[k] * re[k] + im[k] * im[k];
        bank_.apply(power.data(), mel.data());
        for (int m = 0; m < cfg_.n_mels; ++m) {
            out.at(m, t) = static_cast<float>(std::log(mel[m] + cfg_.log_offset));
        }
    }
    return out;
}

}  // namespace auricle
