#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "speecht/common.hpp"

namespace speecht::dsp {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 FFT, in place. Length must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw ValidationError("fft: length must be a nonzero power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Magnitude spectrum of a Hann-windowed segment, zero-padded to the next
// power of two. Returns bins 0..N/2 (inclusive Nyquist).
inline std::vector<double> magnitude_spectrum(std::span<const double> segment,
                                              std::size_t min_fft = 0) {
    if (segment.empty()) throw ValidationError("magnitude_spectrum: empty segment");
    std::size_t nfft = next_pow2(std::max(segment.size(), std::max<std::size_t>(min_fft, 2)));
    std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
    const std::size_t n = segment.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n));
        buf[i] = segment[i] * w;
    }
    fft(buf);
    std::vector<double> mag(nfft / 2 + 1);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(buf[i]);
    return mag;
}

inline double bin_to_hz(std::size_t bin, std::size_t nfft_half, double sample_rate_hz) {
    // nfft_half = number of bins minus one (index of the Nyquist bin)
    return static_cast<double>(bin) * sample_rate_hz / (2.0 * static_cast<double>(nfft_half));
}

// Centered moving average; window is an odd frame count.
inline std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
    if (window <= 1 || x.size() < 2) return x;
    if (window % 2 == 0) ++window;
    const std::size_t half = window / 2;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(x.size() - 1, i + half);
        double s = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) s += x[j];
        out[i] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

}  // namespace speecht::dsp
