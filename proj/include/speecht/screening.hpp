#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "speecht/mann_whitney.hpp"
#include "speecht/timing.hpp"

namespace speecht {

struct SignificanceResult {
    BigramKey key;
    double u_statistic;       // U of the Health group
    double p_value;
    double health_mean;       // mean of the tested per-sample statistic values
    double depression_mean;
    double health_mean_pooled;      // mean over raw durations, pooled across samples
    double depression_mean_pooled;
    StatKind feature_tested;
    bool selected;
};

struct ScreeningOptions {
    double alpha = 0.05;
    StatKind feature = StatKind::mean;
    std::size_t min_support = 3;  // samples per group a key must appear in
    bool benjamini_hochberg = false;
};

// One Mann-Whitney test per bigram key with enough support in both groups.
// Group observations are the per-sample values of the selected statistic.
inline std::vector<SignificanceResult> screen_significant(
    const std::vector<SampleFeatures>& features, const ScreeningOptions& opts) {
    if (opts.alpha <= 0.0 || opts.alpha > 1.0)
        throw ValidationError("alpha must be in (0, 1]");
    bool have_health = false, have_depression = false;
    for (const auto& f : features) {
        if (!f.label) continue;
        (*f.label == Label::Health ? have_health : have_depression) = true;
    }
    if (!have_health || !have_depression)
        throw ValidationError("screening needs samples from both groups");

    struct KeyData {
        std::vector<double> health, depression;
        double health_dur_sum = 0.0, depression_dur_sum = 0.0;
        std::size_t health_dur_n = 0, depression_dur_n = 0;
    };
    std::map<BigramKey, KeyData> per_key;
    for (const auto& f : features) {
        if (!f.label) continue;
        const bool health = *f.label == Label::Health;
        for (const auto& [key, st] : f.stats) {
            auto& kd = per_key[key];
            const double v = stat_value(st, opts.feature);
            (health ? kd.health : kd.depression).push_back(v);
            // pooled raw-duration mean, reconstructed as count * per-sample mean
            (health ? kd.health_dur_sum : kd.depression_dur_sum) +=
                st.mean * static_cast<double>(st.count);
            (health ? kd.health_dur_n : kd.depression_dur_n) += st.count;
        }
    }

    std::vector<SignificanceResult> results;
    for (const auto& [key, kd] : per_key) {
        if (kd.health.size() < opts.min_support || kd.depression.size() < opts.min_support)
            continue;
        const auto mw = mann_whitney_u(kd.health, kd.depression);
        SignificanceResult r;
        r.key = key;
        r.u_statistic = mw.u_statistic;
        r.p_value = mw.p_value;
        auto mean_of = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        r.health_mean = mean_of(kd.health);
        r.depression_mean = mean_of(kd.depression);
        r.health_mean_pooled = kd.health_dur_sum / static_cast<double>(kd.health_dur_n);
        r.depression_mean_pooled =
            kd.depression_dur_sum / static_cast<double>(kd.depression_dur_n);
        r.feature_tested = opts.feature;
        r.selected = false;
        results.push_back(r);
    }
    std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
        if (a.p_value != b.p_value) return a.p_value < b.p_value;
        return a.key < b.key;
    });

    if (opts.benjamini_hochberg) {
        const auto m = static_cast<double>(results.size());
        std::size_t cutoff = 0;  // largest i with p_(i) <= i/m * alpha
        for (std::size_t i = 0; i < results.size(); ++i)
            if (results[i].p_value <= (static_cast<double>(i + 1) / m) * opts.alpha)
                cutoff = i + 1;
        for (std::size_t i = 0; i < cutoff; ++i) results[i].selected = true;
    } else {
        for (auto& r : results) r.selected = r.p_value < opts.alpha;
    }
    return results;
}

// CSV mirroring the screening table; both mean conventions are emitted.
inline void write_screening_csv(const std::vector<SignificanceResult>& results,
                                std::ostream& out) {
    out << "key,u_statistic,p_value,health_mean,depression_mean,selected,"
           "health_mean_pooled,depression_mean_pooled,feature_tested\n";
    char buf[256];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%.6g,%d,%.6g,%.6g,%s",
                      render_key(r.key).c_str(), r.u_statistic, r.p_value, r.health_mean,
                      r.depression_mean, r.selected ? 1 : 0, r.health_mean_pooled,
                      r.depression_mean_pooled, stat_name(r.feature_tested).c_str());
        out << buf << "\n";
    }
}

inline void write_screening_csv(const std::vector<SignificanceResult>& results,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    write_screening_csv(results, out);
}

}  // namespace speecht
