#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "speecht/common.hpp"
#include "speecht/landmarks.hpp"

namespace speecht {

struct AudioBuffer {
    std::vector<double> samples;  // amplitudes in [-1, 1]
    int sample_rate_hz = 0;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

// PCM16 RIFF/WAVE reader. Stereo is downmixed by averaging the channels;
// samples are normalized by 32768.
inline AudioBuffer read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open WAV file: " + path);
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0)
        throw FormatError("not a RIFF/WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const char* id = reinterpret_cast<const char*>(data.data() + pos);
        const std::uint32_t chunk_size = detail::read_u32(data.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (body + 16 > data.size()) throw IoError("truncated fmt chunk: " + path);
            format = detail::read_u16(data.data() + body);
            channels = detail::read_u16(data.data() + body + 2);
            rate = detail::read_u32(data.data() + body + 4);
            bits = detail::read_u16(data.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) throw FormatError("data chunk before fmt chunk: " + path);
            if (format != 1 || bits != 16)
                throw FormatError("unsupported WAV encoding (need PCM16): " + path);
            if (channels == 0 || channels > 2)
                throw FormatError("unsupported channel count: " + path);
            if (body + chunk_size > data.size())
                throw IoError("truncated data chunk: " + path);
            const std::size_t frames = chunk_size / (2u * channels);
            AudioBuffer buf;
            buf.sample_rate_hz = static_cast<int>(rate);
            buf.samples.resize(frames);
            const unsigned char* p = data.data() + body;
            for (std::size_t i = 0; i < frames; ++i) {
                double acc = 0.0;
                for (std::uint16_t c = 0; c < channels; ++c) {
                    const std::int16_t s = static_cast<std::int16_t>(
                        detail::read_u16(p + (i * channels + c) * 2));
                    acc += static_cast<double>(s);
                }
                buf.samples[i] = acc / channels / 32768.0;
            }
            return buf;
        }
        pos = body + chunk_size + (chunk_size & 1);
    }
    throw FormatError("no data chunk found: " + path);
}

inline void write_wav(const AudioBuffer& buf, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.samples.size() * 2);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        out.write(reinterpret_cast<char*>(b), 2);
    };
    out.write("RIFF", 4);
    put_u32(36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1);  // PCM
    put_u16(1);  // mono
    put_u32(static_cast<std::uint32_t>(buf.sample_rate_hz));
    put_u32(static_cast<std::uint32_t>(buf.sample_rate_hz * 2));
    put_u16(2);
    put_u16(16);
    out.write("data", 4);
    put_u32(data_bytes);
    for (double s : buf.samples) {
        double clamped = std::min(1.0, std::max(-1.0, s));
        auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
        put_u16(static_cast<std::uint16_t>(v));
    }
}

enum class SegmentKind { silence, tone, noise_burst, voiced_fricative_like };

struct SynthSegment {
    SegmentKind kind = SegmentKind::silence;
    double duration_s = 0.0;
    std::optional<double> frequency_hz;  // tones and voiced segments
    double amplitude = 0.0;              // [0, 1]
};

struct SynthSpec {
    std::vector<SynthSegment> segments;
    int sample_rate_hz = 16000;
};

// Deterministic test-signal generator. Ground truth carries +g/-g at tone
// boundaries and +b/-b at noise-burst boundaries; boundary times are the
// cumulative segment durations. Segment edges get a 5 ms cosine ramp so
// boundaries read as energy transitions rather than broadband clicks.
inline std::pair<AudioBuffer, LandmarkSequence> synthesize(const SynthSpec& spec,
                                                           std::uint32_t seed) {
    const int sr = spec.sample_rate_hz;
    if (sr < 8000) throw ValidationError("sample_rate_hz must be >= 8000");
    AudioBuffer buf;
    buf.sample_rate_hz = sr;
    LandmarkSequence truth;
    truth.sample_id = "synthetic";
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);

    double t0 = 0.0;
    for (const auto& seg : spec.segments) {
        if (seg.duration_s <= 0.0) throw ValidationError("segment duration must be > 0");
        const auto n = static_cast<std::size_t>(std::llround(seg.duration_s * sr));
        const std::size_t ramp = std::min<std::size_t>(n / 2, static_cast<std::size_t>(0.005 * sr));
        const bool tonal =
            seg.kind == SegmentKind::tone || seg.kind == SegmentKind::voiced_fricative_like;
        if (tonal) {
            if (!seg.frequency_hz) throw ValidationError("tonal segment needs frequency_hz");
            if (*seg.frequency_hz >= sr / 2.0)
                throw ValidationError("tone frequency at or above Nyquist");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / sr;
            double x = 0.0;
            switch (seg.kind) {
                case SegmentKind::silence:
                    break;
                case SegmentKind::tone:
                    x = std::sin(2.0 * std::numbers::pi * *seg.frequency_hz * t);
                    break;
                case SegmentKind::noise_burst:
                    x = noise(rng);
                    break;
                case SegmentKind::voiced_fricative_like: {
                    // band-limited sawtooth plus high-frequency noise
                    const double f0 = *seg.frequency_hz;
                    double saw = 0.0;
                    for (int h = 1; h * f0 < sr / 2.0 && h <= 12; ++h)
                        saw += std::sin(2.0 * std::numbers::pi * h * f0 * t) / h;
                    x = 0.6 * saw * (2.0 / std::numbers::pi) + 0.3 * noise(rng);
                    break;
                }
            }
            double env = seg.amplitude;
            if (ramp > 0) {
                if (i < ramp)
                    env *= 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / ramp);
                else if (i >= n - ramp)
                    env *= 0.5 -
                           0.5 * std::cos(std::numbers::pi * static_cast<double>(n - 1 - i) / ramp);
            }
            buf.samples.push_back(std::min(1.0, std::max(-1.0, env * x)));
        }
        const double t1 = t0 + seg.duration_s;
        if (seg.kind == SegmentKind::tone && seg.amplitude > 0.0) {
            truth.events.push_back({LandmarkKind::g, Sign::plus, t0});
            truth.events.push_back({LandmarkKind::g, Sign::minus, t1});
        } else if (seg.kind == SegmentKind::noise_burst && seg.amplitude > 0.0) {
            truth.events.push_back({LandmarkKind::b, Sign::plus, t0});
            truth.events.push_back({LandmarkKind::b, Sign::minus, t1});
        }
        t0 = t1;
    }
    if (buf.samples.empty()) throw ValidationError("spec produced no samples");
    truth.sort_by_time();
    return {std::move(buf), std::move(truth)};
}

}  // namespace speecht
