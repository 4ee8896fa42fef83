#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "speecht/corpus.hpp"
#include "speecht/landmarks.hpp"

namespace speecht {

// Ordered pair of consecutive landmarks. Rendered as "<sign1><kind1>-<sign2><kind2>",
// e.g. (+s, -v) -> "+s--v".
struct BigramKey {
    Sign sign1;
    LandmarkKind kind1;
    Sign sign2;
    LandmarkKind kind2;

    auto operator<=>(const BigramKey&) const = default;
};

inline std::string render_key(const BigramKey& k) {
    return std::string{static_cast<char>(k.sign1), static_cast<char>(k.kind1), '-',
                       static_cast<char>(k.sign2), static_cast<char>(k.kind2)};
}

inline BigramKey parse_key(const std::string& s) {
    if (s.size() != 5 || s[2] != '-')
        throw ValidationError("bad bigram key '" + s + "'");
    return BigramKey{parse_sign(s[0]), parse_kind(s[1]), parse_sign(s[3]), parse_kind(s[4])};
}

struct DurationRecord {
    BigramKey key;
    double duration_s;
};

// The six duration statistics per bigram key.
struct DurationStats {
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;   // n-1 denominator
    double iqr = 0.0;   // Q3 - Q1, linear-interpolation quartiles
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

enum class StatKind { mean, median, std, iqr, min, max };

inline const std::vector<StatKind>& all_stat_kinds() {
    static const std::vector<StatKind> kinds = {StatKind::mean, StatKind::median, StatKind::std,
                                                StatKind::iqr,  StatKind::min,    StatKind::max};
    return kinds;
}

inline std::string stat_name(StatKind s) {
    switch (s) {
        case StatKind::mean: return "mean";
        case StatKind::median: return "median";
        case StatKind::std: return "std";
        case StatKind::iqr: return "iqr";
        case StatKind::min: return "min";
        case StatKind::max: return "max";
    }
    throw ValidationError("bad stat kind");
}

inline StatKind parse_stat_name(const std::string& s) {
    for (auto k : all_stat_kinds())
        if (stat_name(k) == s) return k;
    throw ValidationError("unknown statistic '" + s + "'");
}

inline double stat_value(const DurationStats& st, StatKind s) {
    switch (s) {
        case StatKind::mean: return st.mean;
        case StatKind::median: return st.median;
        case StatKind::std: return st.std;
        case StatKind::iqr: return st.iqr;
        case StatKind::min: return st.min;
        case StatKind::max: return st.max;
    }
    throw ValidationError("bad stat kind");
}

struct SampleFeatures {
    std::string sample_id;
    std::optional<Label> label;
    std::map<BigramKey, DurationStats> stats;
};

inline std::vector<DurationRecord> build_bigrams(const LandmarkSequence& seq) {
    std::vector<DurationRecord> out;
    if (seq.events.size() < 2) return out;
    out.reserve(seq.events.size() - 1);
    for (std::size_t i = 0; i + 1 < seq.events.size(); ++i) {
        const auto& a = seq.events[i];
        const auto& b = seq.events[i + 1];
        out.push_back({BigramKey{a.sign, a.kind, b.sign, b.kind}, b.time_s - a.time_s});
    }
    return out;
}

namespace detail {

// quantile with linear interpolation on the sorted data
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline DurationStats aggregate_stats(std::vector<double> durations) {
    if (durations.empty()) throw ValidationError("aggregate_stats: empty input");
    std::sort(durations.begin(), durations.end());
    const std::size_t n = durations.size();
    DurationStats st;
    st.count = n;
    st.min = durations.front();
    st.max = durations.back();
    double sum = 0.0;
    for (double d : durations) sum += d;
    st.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double d : durations) ss += (d - st.mean) * (d - st.mean);
    st.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    st.median = detail::quantile_sorted(durations, 0.5);
    st.iqr = detail::quantile_sorted(durations, 0.75) - detail::quantile_sorted(durations, 0.25);
    return st;
}

inline SampleFeatures compute_sample_features(const LandmarkSequence& seq,
                                              std::optional<Label> label = std::nullopt) {
    SampleFeatures features;
    features.sample_id = seq.sample_id;
    features.label = label;
    std::map<BigramKey, std::vector<double>> durations;
    for (const auto& rec : build_bigrams(seq)) durations[rec.key].push_back(rec.duration_s);
    for (auto& [key, values] : durations) features.stats[key] = aggregate_stats(std::move(values));
    return features;
}

}  // namespace speecht
