#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "speecht/audio.hpp"
#include "speecht/dsp.hpp"
#include "speecht/landmarks.hpp"

namespace speecht {

struct PitchParams {
    double f0_min_hz = 70.0;
    double f0_max_hz = 400.0;
    double voicing_threshold = 0.5;  // normalized autocorrelation peak
};

struct DetectorParams {
    // six analysis bands; the first g_band_count cover the low-frequency
    // region used for glottal events, the last high_band_count drive b/f/v
    std::vector<double> band_edges_hz = {0.0, 400.0, 800.0, 1500.0, 3500.0, 5000.0, 8000.0};
    int g_band_count = 3;     // 0 - 1.5 kHz
    int high_band_count = 3;  // 1.5 - 8 kHz
    double frame_s = 0.025;
    double hop_s = 0.010;
    double coarse_smooth_s = 0.050;
    double fine_smooth_s = 0.026;
    double ror_threshold_db_g = 9.0;
    double ror_threshold_db_b = 6.0;
    PitchParams pitch;
    double jump_threshold_semitones = 4.0;

    void validate(int sample_rate_hz) const {
        if (band_edges_hz.size() < 2) throw ValidationError("need at least one band");
        for (std::size_t i = 1; i < band_edges_hz.size(); ++i)
            if (band_edges_hz[i] <= band_edges_hz[i - 1])
                throw ValidationError("band edges must be strictly increasing");
        if (band_edges_hz.back() > sample_rate_hz / 2.0 + 1e-9)
            throw ValidationError("last band edge above Nyquist");
        if (frame_s <= 0 || hop_s <= 0 || ror_threshold_db_g <= 0 || ror_threshold_db_b <= 0)
            throw ValidationError("detector thresholds and frame sizes must be > 0");
    }
};

struct EnergyTracks {
    std::vector<std::vector<double>> band_db;  // [band][frame]
    std::vector<double> frame_time_s;          // frame centers
    std::size_t num_frames() const { return frame_time_s.size(); }
};

struct PitchTrack {
    std::vector<double> f0_hz;  // 0 when unvoiced
    std::vector<bool> voiced;
    std::vector<double> frame_time_s;
};

inline constexpr double kEnergyFloorEps = 1e-10;

inline double energy_db(double mean_square) {
    return 10.0 * std::log10(mean_square + kEnergyFloorEps);
}

// Frame-wise band energies: Hann-windowed FFT per frame, power summed per
// band and normalized so the result tracks the mean squared band-filtered
// signal. Floor at 10*log10(eps) = -100 dB.
inline EnergyTracks compute_band_energies(const AudioBuffer& audio, const DetectorParams& params) {
    params.validate(audio.sample_rate_hz);
    const int sr = audio.sample_rate_hz;
    const auto frame_len = static_cast<std::size_t>(std::lround(params.frame_s * sr));
    const auto hop = static_cast<std::size_t>(std::lround(params.hop_s * sr));
    if (audio.samples.size() < frame_len)
        throw ValidationError("audio shorter than one frame");

    const std::size_t nfft = dsp::next_pow2(frame_len);
    const std::size_t nbins = nfft / 2 + 1;
    const std::size_t nbands = params.band_edges_hz.size() - 1;

    // precompute window and band membership per bin
    std::vector<double> window(frame_len);
    double win_pow = 0.0;
    for (std::size_t i = 0; i < frame_len; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(frame_len));
        win_pow += window[i] * window[i];
    }
    std::vector<int> bin_band(nbins, -1);
    for (std::size_t k = 0; k < nbins; ++k) {
        const double f = static_cast<double>(k) * sr / static_cast<double>(nfft);
        for (std::size_t b = 0; b < nbands; ++b) {
            const bool last = b == nbands - 1;
            if (f >= params.band_edges_hz[b] &&
                (f < params.band_edges_hz[b + 1] || (last && f <= params.band_edges_hz[b + 1])))
                bin_band[k] = static_cast<int>(b);
        }
    }

    EnergyTracks tracks;
    tracks.band_db.assign(nbands, {});
    std::vector<std::complex<double>> buf(nfft);
    for (std::size_t start = 0; start + frame_len <= audio.samples.size(); start += hop) {
        std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
        for (std::size_t i = 0; i < frame_len; ++i)
            buf[i] = audio.samples[start + i] * window[i];
        dsp::fft(buf);
        std::vector<double> band_pow(nbands, 0.0);
        for (std::size_t k = 0; k < nbins; ++k) {
            if (bin_band[k] < 0) continue;
            const double p = std::norm(buf[k]) * (k == 0 || k == nbins - 1 ? 1.0 : 2.0);
            band_pow[static_cast<std::size_t>(bin_band[k])] += p;
        }
        // Parseval: sum_k |X_k|^2 = nfft * sum_n |w x|^2
        const double scale = 1.0 / (static_cast<double>(nfft) * win_pow);
        for (std::size_t b = 0; b < nbands; ++b)
            tracks.band_db[b].push_back(energy_db(band_pow[b] * scale));
        tracks.frame_time_s.push_back((static_cast<double>(start) + frame_len / 2.0) / sr);
    }
    return tracks;
}

// ror[t] = E[t] - E[t - lag], leading positions 0.
inline std::vector<double> rate_of_rise(const std::vector<double>& track, double delta_s,
                                        double hop_s) {
    if (delta_s < hop_s) throw ValidationError("rate_of_rise: delta_s must be >= hop_s");
    const auto lag = static_cast<std::size_t>(std::lround(delta_s / hop_s));
    std::vector<double> ror(track.size(), 0.0);
    for (std::size_t t = lag; t < track.size(); ++t) ror[t] = track[t] - track[t - lag];
    return ror;
}

inline PitchTrack pitch_track(const AudioBuffer& audio, const DetectorParams& params) {
    const auto& pp = params.pitch;
    if (pp.f0_min_hz < 50.0 || pp.f0_max_hz > 500.0 || pp.f0_min_hz >= pp.f0_max_hz)
        throw ValidationError("pitch range must satisfy 50 <= f0_min < f0_max <= 500");
    const int sr = audio.sample_rate_hz;
    const auto hop = static_cast<std::size_t>(std::lround(params.hop_s * sr));
    const auto frame_len = static_cast<std::size_t>(std::lround(params.frame_s * sr));
    // pitch needs at least two periods of f0_min in view
    const std::size_t win = std::max(frame_len, static_cast<std::size_t>(2.2 * sr / pp.f0_min_hz));
    const auto lag_min = static_cast<std::size_t>(std::floor(sr / pp.f0_max_hz));
    const auto lag_max = static_cast<std::size_t>(std::ceil(sr / pp.f0_min_hz));

    PitchTrack track;
    for (std::size_t start = 0; start + frame_len <= audio.samples.size(); start += hop) {
        const double center = (static_cast<double>(start) + frame_len / 2.0);
        std::size_t w0 = 0;
        if (center > win / 2.0) w0 = static_cast<std::size_t>(center - win / 2.0);
        if (w0 + win > audio.samples.size())
            w0 = audio.samples.size() > win ? audio.samples.size() - win : 0;
        const std::size_t wlen = std::min(win, audio.samples.size() - w0);
        const double* x = audio.samples.data() + w0;

        double mean = 0.0;
        for (std::size_t i = 0; i < wlen; ++i) mean += x[i];
        mean /= static_cast<double>(wlen);
        double r0 = 0.0;
        for (std::size_t i = 0; i < wlen; ++i) r0 += (x[i] - mean) * (x[i] - mean);

        double best_corr = 0.0;
        std::size_t best_lag = 0;
        std::vector<double> corr(lag_max + 2, 0.0);
        if (r0 > 1e-9 && wlen > lag_max + 1) {
            for (std::size_t lag = lag_min; lag <= std::min(lag_max, wlen - 1); ++lag) {
                double r = 0.0;
                for (std::size_t i = 0; i + lag < wlen; ++i)
                    r += (x[i] - mean) * (x[i + lag] - mean);
                // length-normalized so longer lags are not penalized
                corr[lag] = r / r0 * static_cast<double>(wlen) / static_cast<double>(wlen - lag);
                if (corr[lag] > best_corr) {
                    best_corr = corr[lag];
                    best_lag = lag;
                }
            }
        }
        const bool voiced = best_corr >= pp.voicing_threshold && best_lag > 0;
        double f0 = 0.0;
        if (voiced) {
            double lag_refined = static_cast<double>(best_lag);
            if (best_lag > lag_min && best_lag < lag_max) {
                const double y0 = corr[best_lag - 1], y1 = corr[best_lag], y2 = corr[best_lag + 1];
                const double denom = y0 - 2.0 * y1 + y2;
                if (std::abs(denom) > 1e-12) lag_refined += 0.5 * (y0 - y2) / denom;
            }
            f0 = sr / lag_refined;
            if (f0 < pp.f0_min_hz || f0 > pp.f0_max_hz) f0 = sr / static_cast<double>(best_lag);
        }
        track.f0_hz.push_back(f0);
        track.voiced.push_back(voiced);
        track.frame_time_s.push_back(center / sr);
    }
    return track;
}

namespace detail {

// linear-domain combined energy over a band index range
inline std::vector<double> combined_linear(const EnergyTracks& tracks, std::size_t b0,
                                           std::size_t b1) {
    std::vector<double> out(tracks.num_frames(), 0.0);
    for (std::size_t b = b0; b < b1; ++b)
        for (std::size_t t = 0; t < out.size(); ++t)
            out[t] += std::pow(10.0, tracks.band_db[b][t] / 10.0);
    return out;
}

struct Candidate {
    Sign sign;
    double time_s;
};

// Two-pass edge localization: coarse ROR runs above threshold pick a region,
// then the edge time is the half-amplitude crossing of the raw linear track,
// interpolated between frame centers.
inline std::vector<Candidate> edge_candidates(const std::vector<double>& db_track,
                                              const std::vector<double>& linear_track,
                                              const std::vector<double>& times,
                                              const DetectorParams& params, double threshold_db) {
    const auto coarse_frames =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.coarse_smooth_s /
                                                                      params.hop_s)));
    auto coarse = dsp::moving_average(db_track, coarse_frames | 1);
    auto ror = rate_of_rise(coarse, std::max(params.coarse_smooth_s, params.hop_s), params.hop_s);

    std::vector<Candidate> out;
    const std::size_t n = ror.size();
    auto scan = [&](bool rising) {
        std::size_t t = 0;
        while (t < n) {
            const double v = rising ? ror[t] : -ror[t];
            if (v < threshold_db) {
                ++t;
                continue;
            }
            std::size_t peak = t, end = t;
            while (end < n && (rising ? ror[end] : -ror[end]) >= threshold_db) {
                if ((rising ? ror[end] : -ror[end]) > (rising ? ror[peak] : -ror[peak]))
                    peak = end;
                ++end;
            }
            // refine around the peak on the raw linear track
            const std::size_t lo = peak > 8 ? peak - 8 : 0;
            const std::size_t hi = std::min(n - 1, peak + 4);
            double vmin = linear_track[lo], vmax = linear_track[lo];
            for (std::size_t k = lo; k <= hi; ++k) {
                vmin = std::min(vmin, linear_track[k]);
                vmax = std::max(vmax, linear_track[k]);
            }
            const double mid = 0.5 * (vmin + vmax);
            double when = times[peak];
            for (std::size_t k = lo; k < hi; ++k) {
                const double a = linear_track[k], b = linear_track[k + 1];
                const bool crosses = rising ? (a <= mid && b > mid) : (a >= mid && b < mid);
                if (crosses) {
                    const double frac = std::abs(b - a) > 1e-300 ? (mid - a) / (b - a) : 0.0;
                    when = times[k] + frac * (times[k + 1] - times[k]);
                    break;
                }
            }
            out.push_back({rising ? Sign::plus : Sign::minus, when});
            t = end;
        }
    };
    scan(true);
    scan(false);
    std::sort(out.begin(), out.end(),
              [](const Candidate& a, const Candidate& b) { return a.time_s < b.time_s; });
    return out;
}

// Keep a +,-,+,- alternation per kind; stray events are dropped.
inline void append_alternating(LandmarkSequence& seq, LandmarkKind kind,
                               const std::vector<Candidate>& cands) {
    Sign expected = Sign::plus;
    for (const auto& c : cands) {
        if (c.sign != expected) continue;
        seq.events.push_back({kind, c.sign, std::max(0.0, c.time_s)});
        expected = expected == Sign::plus ? Sign::minus : Sign::plus;
    }
}

inline bool voiced_at(const PitchTrack& pitch, std::size_t frame) {
    return frame < pitch.voiced.size() && pitch.voiced[frame];
}

}  // namespace detail

inline LandmarkSequence detect(const AudioBuffer& audio, const DetectorParams& params,
                               const std::string& sample_id = "") {
    LandmarkSequence seq;
    seq.sample_id = sample_id;
    const auto frame_len = static_cast<std::size_t>(std::lround(params.frame_s *
                                                                audio.sample_rate_hz));
    if (audio.samples.size() < frame_len) return seq;

    const auto tracks = compute_band_energies(audio, params);
    if (tracks.num_frames() < 2) return seq;
    const auto pitch = pitch_track(audio, params);
    const std::size_t nbands = tracks.band_db.size();
    const auto g_hi = std::min<std::size_t>(nbands, static_cast<std::size_t>(params.g_band_count));
    const auto high_lo = nbands - std::min<std::size_t>(nbands,
                                                        static_cast<std::size_t>(
                                                            params.high_band_count));
    const auto& times = tracks.frame_time_s;

    auto to_db = [](const std::vector<double>& lin) {
        std::vector<double> out(lin.size());
        for (std::size_t i = 0; i < lin.size(); ++i) out[i] = energy_db(lin[i]);
        return out;
    };

    // g: low-frequency energy edges
    const auto g_lin = detail::combined_linear(tracks, 0, g_hi);
    const auto g_db = to_db(g_lin);
    detail::append_alternating(
        seq, LandmarkKind::g,
        detail::edge_candidates(g_db, g_lin, times, params, params.ror_threshold_db_g));

    // b and f: high-frequency energy edges, split by voicing at the edge
    const auto h_lin = detail::combined_linear(tracks, high_lo, nbands);
    const auto h_db = to_db(h_lin);
    const auto h_edges =
        detail::edge_candidates(h_db, h_lin, times, params, params.ror_threshold_db_b);
    auto frame_of = [&](double t) {
        const double idx = (t - times.front()) / params.hop_s;
        const auto k = static_cast<std::ptrdiff_t>(std::lround(idx));
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
            k, 0, static_cast<std::ptrdiff_t>(times.size()) - 1));
    };
    std::vector<detail::Candidate> b_cands, f_cands, v_cands;
    for (const auto& c : h_edges) {
        b_cands.push_back(c);
        // look just inside the noisy region: after an onset, before an offset
        const std::size_t probe = frame_of(c.time_s + (c.sign == Sign::plus ? 0.03 : -0.03));
        if (detail::voiced_at(pitch, probe))
            v_cands.push_back(c);
        else
            f_cands.push_back(c);
    }
    detail::append_alternating(seq, LandmarkKind::b, b_cands);
    detail::append_alternating(seq, LandmarkKind::f, f_cands);
    detail::append_alternating(seq, LandmarkKind::v, v_cands);

    // s: sustained band-2 energy with voicing, threshold relative to the
    // track's own dynamic range (no events on low-dynamics input)
    {
        const auto& s_db = tracks.band_db[std::min<std::size_t>(1, nbands - 1)];
        const double smax = *std::max_element(s_db.begin(), s_db.end());
        std::vector<detail::Candidate> s_cands;
        if (smax - energy_db(0.0) > 30.0) {
            const double thr = smax - 20.0;
            const auto min_run = static_cast<std::size_t>(std::lround(0.05 / params.hop_s));
            std::size_t t = 0;
            while (t < s_db.size()) {
                if (s_db[t] < thr || !detail::voiced_at(pitch, t)) {
                    ++t;
                    continue;
                }
                std::size_t end = t;
                while (end < s_db.size() && s_db[end] >= thr && detail::voiced_at(pitch, end))
                    ++end;
                if (end - t >= min_run) {
                    s_cands.push_back({Sign::plus, times[t]});
                    s_cands.push_back({Sign::minus, times[end - 1]});
                }
                t = end;
            }
        }
        detail::append_alternating(seq, LandmarkKind::s, s_cands);
    }

    // p: voicing run boundaries (runs of at least 3 frames)
    {
        std::vector<detail::Candidate> p_cands;
        std::size_t t = 0;
        while (t < pitch.voiced.size()) {
            if (!pitch.voiced[t]) {
                ++t;
                continue;
            }
            std::size_t end = t;
            while (end < pitch.voiced.size() && pitch.voiced[end]) ++end;
            if (end - t >= 3) {
                p_cands.push_back({Sign::plus, pitch.frame_time_s[t]});
                p_cands.push_back({Sign::minus, pitch.frame_time_s[end - 1]});
            }
            t = end;
        }
        detail::append_alternating(seq, LandmarkKind::p, p_cands);
    }

    // j: F0 jumps between adjacent voiced frames
    {
        std::vector<detail::Candidate> j_cands;
        for (std::size_t t = 1; t < pitch.f0_hz.size(); ++t) {
            if (!pitch.voiced[t] || !pitch.voiced[t - 1]) continue;
            const double semis = 12.0 * std::log2(pitch.f0_hz[t] / pitch.f0_hz[t - 1]);
            if (std::abs(semis) >= params.jump_threshold_semitones)
                j_cands.push_back({semis > 0 ? Sign::plus : Sign::minus, pitch.frame_time_s[t]});
        }
        detail::append_alternating(seq, LandmarkKind::j, j_cands);
    }

    seq.sort_by_time();
    return seq;
}

}  // namespace speecht
