#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace auricle {

// Everything downstream of the loader works at this rate.
inline constexpr int kWorkingRateHz = 16000;

struct AudioClip {
    std::vector<float> samples;  // mono, [-1, 1]
    int sample_rate = 0;
    std::string id;  // opaque; file stem or synth clip name

    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// Reads a RIFF/WAVE file. Accepts 8/16/32-bit PCM and 32-bit float, mono or
// stereo (averaged down). Unknown chunks are skipped. Throws ParseError on
// malformed containers and UnsupportedFormatError on codecs we do not handle.
AudioClip load_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] first, so a clip
// that came out of load_wav at 16 bits round-trips exactly.
void save_wav(const std::string& path, const AudioClip& clip);

// Linear-interpolation resampler. Output length is round(n * target / source).
std::vector<float> resample_linear(const std::vector<float>& in, int source_rate, int target_rate);

// load_wav + resample to kWorkingRateHz when needed.
AudioClip load_wav_16k(const std::string& path);

}  // namespace auricle
