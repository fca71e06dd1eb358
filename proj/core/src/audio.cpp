#include "auricle/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "auricle/errors.hpp"

namespace auricle {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float decode_sample(const unsigned char* p, std::uint16_t format, int bits) {
    if (format == kFormatFloat) {
        float v;
        std::memcpy(&v, p, 4);
        return std::clamp(v, -1.0f, 1.0f);
    }
    switch (bits) {
        case 8: {
            // 8-bit WAV is unsigned with a 128 midpoint.
            const int v = static_cast<int>(p[0]) - 128;
            return std::clamp(static_cast<float>(v) / 127.0f, -1.0f, 1.0f);
        }
        case 16: {
            const auto v = static_cast<std::int16_t>(read_u16(p));
            return std::clamp(static_cast<float>(v) / 32767.0f, -1.0f, 1.0f);
        }
        case 32: {
            const auto v = static_cast<std::int32_t>(read_u32(p));
            return std::clamp(static_cast<float>(static_cast<double>(v) / 2147483647.0), -1.0f, 1.0f);
        }
        default:
            throw UnsupportedFormatError("wav: unsupported PCM depth " + std::to_string(bits) + " bits");
    }
}

}  // namespace

AudioClip load_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("wav: cannot open '" + path + "' for reading");

    unsigned char hdr[12];
    if (!f.read(reinterpret_cast<char*>(hdr), 12)) {
        throw ParseError("wav: '" + path + "' shorter than a RIFF header");
    }
    if (std::memcmp(hdr, "RIFF", 4) != 0 || std::memcmp(hdr + 8, "WAVE", 4) != 0) {
        throw ParseError("wav: '" + path + "' is not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    std::vector<unsigned char> payload;
    bool have_data = false;

    unsigned char chunk_hdr[8];
    while (f.read(reinterpret_cast<char*>(chunk_hdr), 8)) {
        const std::uint32_t size = read_u32(chunk_hdr + 4);
        if (std::memcmp(chunk_hdr, "fmt ", 4) == 0) {
            if (size < 16) throw ParseError("wav: fmt chunk in '" + path + "' is truncated");
            std::vector<unsigned char> fmt(size);
            if (!f.read(reinterpret_cast<char*>(fmt.data()), size)) {
                throw ParseError("wav: fmt chunk in '" + path + "' ends early");
            }
            format = read_u16(fmt.data());
            channels = read_u16(fmt.data() + 2);
            rate = read_u32(fmt.data() + 4);
            bits = read_u16(fmt.data() + 14);
            if (format == kFormatExtensible) {
                // The real codec hides in the extension's GUID; its first two
                // bytes follow the same PCM/float numbering.
                if (size < 40) throw ParseError("wav: extensible fmt chunk in '" + path + "' is truncated");
                format = read_u16(fmt.data() + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(chunk_hdr, "data", 4) == 0) {
            payload.resize(size);
            if (!f.read(reinterpret_cast<char*>(payload.data()), size)) {
                throw ParseError("wav: data chunk in '" + path + "' ends early");
            }
            have_data = true;
        } else {
            f.seekg(size, std::ios::cur);
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        if (size % 2 == 1) f.seekg(1, std::ios::cur);
        if (have_fmt && have_data) break;
    }

    if (!have_fmt) throw ParseError("wav: '" + path + "' has no fmt chunk");
    if (!have_data) throw ParseError("wav: '" + path + "' has no data chunk");
    if (format != kFormatPcm && format != kFormatFloat) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "0x%04x", format);
        throw UnsupportedFormatError("wav: format tag " + std::string(tag) + " in '" + path +
                                     "' (only PCM and float32)");
    }
    if (format == kFormatFloat && bits != 32) {
        throw UnsupportedFormatError("wav: float WAV must be 32-bit, got " + std::to_string(bits));
    }
    if (format == kFormatPcm && bits != 8 && bits != 16 && bits != 32) {
        throw UnsupportedFormatError("wav: unsupported PCM depth " + std::to_string(bits) + " bits");
    }
    if (channels != 1 && channels != 2) {
        throw UnsupportedFormatError("wav: " + std::to_string(channels) + " channels (only mono/stereo)");
    }
    if (rate == 0) throw ParseError("wav: zero sample rate in '" + path + "'");

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t stride = bytes_per_sample * channels;
    const std::size_t frames = payload.size() / stride;

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char* p = payload.data() + i * stride;
        if (channels == 1) {
            clip.samples[i] = decode_sample(p, format, bits);
        } else {
            const float l = decode_sample(p, format, bits);
            const float r = decode_sample(p + bytes_per_sample, format, bits);
            clip.samples[i] = 0.5f * (l + r);
        }
    }
    return clip;
}

void save_wav(const std::string& path, const AudioClip& clip) {
    if (clip.sample_rate <= 0) throw IoError("wav: refusing to write clip with rate 0");

    const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    const std::uint32_t riff_size = 36 + data_bytes;
    const std::uint32_t rate = static_cast<std::uint32_t>(clip.sample_rate);
    const std::uint32_t byte_rate = rate * 2;

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("wav: cannot open '" + path + "' for writing");

    auto put_u16 = [&f](std::uint16_t v) {
        const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                    static_cast<unsigned char>(v >> 8)};
        f.write(reinterpret_cast<const char*>(b), 2);
    };
    auto put_u32 = [&f](std::uint32_t v) {
        const unsigned char b[4] = {
            static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
            static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>(v >> 24)};
        f.write(reinterpret_cast<const char*>(b), 4);
    };

    f.write("RIFF", 4);
    put_u32(riff_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(16);
    put_u16(kFormatPcm);
    put_u16(1);  // mono
    put_u32(rate);
    put_u32(byte_rate);
    put_u16(2);   // block align
    put_u16(16);  // bits
    f.write("data", 4);
    put_u32(data_bytes);

    for (float s : clip.samples) {
        const float c = std::clamp(s, -1.0f, 1.0f);
        const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0f));
        put_u16(static_cast<std::uint16_t>(v));
    }
    if (!f) throw IoError("wav: short write to '" + path + "'");
}

std::vector<float> resample_linear(const std::vector<float>& in, int source_rate, int target_rate) {
    if (source_rate <= 0 || target_rate <= 0) {
        throw UnsupportedFormatError("resample: rates must be positive, got " +
                                     std::to_string(source_rate) + " -> " + std::to_string(target_rate));
    }
    if (source_rate == target_rate || in.empty()) return in;

    const auto out_len = static_cast<std::size_t>(std::llround(
        static_cast<double>(in.size()) * target_rate / source_rate));
    std::vector<float> out(out_len);
    const double step = static_cast<double>(source_rate) / target_rate;
    const double last = static_cast<double>(in.size() - 1);
    for (std::size_t i = 0; i < out_len; ++i) {
        const double pos = std::min(static_cast<double>(i) * step, last);
        const auto i0 = static_cast<std::size_t>(pos);
        const std::size_t i1 = std::min(i0 + 1, in.size() - 1);
        const double frac = pos - static_cast<double>(i0);
        out[i] = static_cast<float>((1.0 - frac) * in[i0] + frac * in[i1]);
    }
    return out;
}

AudioClip load_wav_16k(const std::string& path) {
    AudioClip clip = load_wav(path);
    if (clip.sample_rate != kWorkingRateHz) {
        clip.samples = resample_linear(clip.samples, clip.sample_rate, kWorkingRateHz);
        clip.sample_rate = kWorkingRateHz;
    }
    return clip;
}

}  // namespace auricle
