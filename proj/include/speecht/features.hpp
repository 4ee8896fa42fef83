#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "speecht/screening.hpp"
#include "speecht/timing.hpp"

namespace speecht {

// Ordered (key, statistic) layout shared by every vector in a corpus.
struct FeatureSchema {
    std::vector<BigramKey> keys;      // selected bigram keys, ordered
    std::vector<StatKind> stats;      // statistics per key, ordered

    std::size_t dimension() const { return keys.size() * stats.size(); }
    std::size_t index_of(std::size_t key_idx, std::size_t stat_idx) const {
        return key_idx * stats.size() + stat_idx;
    }
};

inline FeatureSchema make_schema(const std::vector<SignificanceResult>& screening,
                                 std::vector<StatKind> stats = all_stat_kinds()) {
    FeatureSchema schema;
    schema.stats = std::move(stats);
    for (const auto& r : screening)
        if (r.selected) schema.keys.push_back(r.key);
    std::sort(schema.keys.begin(), schema.keys.end());
    return schema;
}

struct FeatureVector {
    std::string sample_id;
    std::optional<Label> label;
    std::vector<double> values;
    std::vector<bool> imputation_mask;  // true where a default filled in
};

// Per-entry medians over the samples that carry the entry; entries nobody
// carries fall back to 0.
inline std::vector<double> compute_defaults(const std::vector<SampleFeatures>& train,
                                            const FeatureSchema& schema) {
    if (schema.dimension() == 0) throw ValidationError("empty feature schema");
    std::vector<double> defaults(schema.dimension(), 0.0);
    for (std::size_t k = 0; k < schema.keys.size(); ++k) {
        std::vector<std::vector<double>> observed(schema.stats.size());
        for (const auto& f : train) {
            auto it = f.stats.find(schema.keys[k]);
            if (it == f.stats.end()) continue;
            for (std::size_t s = 0; s < schema.stats.size(); ++s)
                observed[s].push_back(stat_value(it->second, schema.stats[s]));
        }
        for (std::size_t s = 0; s < schema.stats.size(); ++s) {
            if (observed[s].empty()) continue;
            std::sort(observed[s].begin(), observed[s].end());
            defaults[schema.index_of(k, s)] = detail::quantile_sorted(observed[s], 0.5);
        }
    }
    return defaults;
}

inline FeatureVector build_feature_vector(const SampleFeatures& features,
                                          const FeatureSchema& schema,
                                          const std::vector<double>& defaults) {
    if (schema.dimension() == 0) throw ValidationError("empty feature schema");
    if (defaults.size() != schema.dimension())
        throw ValidationError("defaults length does not match schema dimension");
    FeatureVector v;
    v.sample_id = features.sample_id;
    v.label = features.label;
    v.values.resize(schema.dimension());
    v.imputation_mask.resize(schema.dimension());
    for (std::size_t k = 0; k < schema.keys.size(); ++k) {
        auto it = features.stats.find(schema.keys[k]);
        for (std::size_t s = 0; s < schema.stats.size(); ++s) {
            const std::size_t i = schema.index_of(k, s);
            if (it != features.stats.end()) {
                v.values[i] = stat_value(it->second, schema.stats[s]);
                v.imputation_mask[i] = false;
            } else {
                v.values[i] = defaults[i];
                v.imputation_mask[i] = true;
            }
        }
    }
    return v;
}

// z-score parameters fitted on the training split
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const std::vector<FeatureVector>& train) {
        if (train.empty()) throw ValidationError("standardizer needs training vectors");
        const std::size_t d = train.front().values.size();
        Standardizer st;
        st.mean.assign(d, 0.0);
        st.scale.assign(d, 1.0);
        for (const auto& v : train) {
            if (v.values.size() != d) throw ValidationError("inconsistent vector dimension");
            for (std::size_t i = 0; i < d; ++i) st.mean[i] += v.values[i];
        }
        for (double& m : st.mean) m /= static_cast<double>(train.size());
        std::vector<double> ss(d, 0.0);
        for (const auto& v : train)
            for (std::size_t i = 0; i < d; ++i)
                ss[i] += (v.values[i] - st.mean[i]) * (v.values[i] - st.mean[i]);
        for (std::size_t i = 0; i < d; ++i) {
            const double sd = std::sqrt(ss[i] / static_cast<double>(train.size()));
            st.scale[i] = sd > 1e-12 ? sd : 1.0;
        }
        return st;
    }

    std::vector<double> apply(const std::vector<double>& values) const {
        if (values.size() != mean.size()) throw ValidationError("dimension mismatch");
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            out[i] = (values[i] - mean[i]) / scale[i];
        return out;
    }
};

}  // namespace speecht
