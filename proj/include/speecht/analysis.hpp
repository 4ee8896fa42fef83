#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "speecht/audio.hpp"
#include "speecht/dsp.hpp"
#include "speecht/prompting.hpp"
#include "speecht/timing.hpp"

namespace speecht {

// Offline attention export: either per-token received attention per layer
// (reduction recorded by the exporter) or full head x query x key tensors,
// reduced here by mean over heads and query positions.
struct AttentionDump {
    std::size_t num_layers = 0;
    std::vector<std::pair<std::size_t, std::size_t>> token_offsets;  // char spans
    std::vector<std::vector<double>> per_token_received;             // [layer][token]
    std::string reduction;  // provenance note, recorded in outputs

    static AttentionDump from_json(const nlohmann::json& j) {
        AttentionDump dump;
        dump.num_layers = j.at("num_layers").get<std::size_t>();
        for (const auto& span : j.at("token_offsets"))
            dump.token_offsets.emplace_back(span.at(0).get<std::size_t>(),
                                            span.at(1).get<std::size_t>());
        if (j.contains("per_token_received")) {
            dump.per_token_received =
                j.at("per_token_received").get<std::vector<std::vector<double>>>();
            dump.reduction = j.value("reduction", "exporter-provided");
        } else if (j.contains("tensors")) {
            // tensors[layer][head][query][key] with per-query rows summing to 1
            for (const auto& layer : j.at("tensors")) {
                std::vector<double> received(dump.token_offsets.size(), 0.0);
                std::size_t rows = 0;
                for (const auto& head : layer) {
                    for (const auto& query : head) {
                        if (query.size() != received.size())
                            throw FormatError("attention tensor key dimension mismatch");
                        double row_sum = 0.0;
                        for (std::size_t k = 0; k < received.size(); ++k) {
                            const double a = query.at(k).get<double>();
                            if (a < 0.0) throw ValidationError("negative attention value");
                            received[k] += a;
                            row_sum += a;
                        }
                        if (std::abs(row_sum - 1.0) > 1e-3)
                            throw ValidationError("attention row does not sum to 1");
                        ++rows;
                    }
                }
                for (double& r : received) r /= static_cast<double>(rows);
                dump.per_token_received.push_back(std::move(received));
            }
            dump.reduction = "mean over heads and query positions";
        } else {
            throw FormatError("attention dump needs per_token_received or tensors");
        }
        if (dump.per_token_received.size() != dump.num_layers)
            throw FormatError("attention dump layer count mismatch");
        for (const auto& layer : dump.per_token_received)
            for (double a : layer)
                if (a < 0.0) throw ValidationError("negative attention value");
        return dump;
    }

    static AttentionDump load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigurationError("cannot open attention dump: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
};

enum class LayerGroup { early, middle, final, all };

inline std::string layer_group_name(LayerGroup g) {
    switch (g) {
        case LayerGroup::early: return "early";
        case LayerGroup::middle: return "middle";
        case LayerGroup::final: return "final";
        case LayerGroup::all: return "all";
    }
    throw ValidationError("bad layer group");
}

inline LayerGroup parse_layer_group(const std::string& s) {
    if (s == "early") return LayerGroup::early;
    if (s == "middle") return LayerGroup::middle;
    if (s == "final") return LayerGroup::final;
    if (s == "all") return LayerGroup::all;
    throw ValidationError("unknown layer group '" + s + "'");
}

// 0-based layer indices for a group; layers are 1-indexed in the convention
// early = 2-4, middle = [20%, 80%] of depth, final = last 4.
inline std::vector<std::size_t> resolve_layers(LayerGroup group, std::size_t num_layers) {
    std::vector<std::size_t> out;
    switch (group) {
        case LayerGroup::early:
            for (std::size_t l = 2; l <= 4 && l <= num_layers; ++l) out.push_back(l - 1);
            break;
        case LayerGroup::middle: {
            const auto lo = static_cast<std::size_t>(
                std::ceil(0.2 * static_cast<double>(num_layers)));
            const auto hi = static_cast<std::size_t>(
                std::floor(0.8 * static_cast<double>(num_layers)));
            for (std::size_t l = std::max<std::size_t>(lo, 1); l <= hi; ++l)
                out.push_back(l - 1);
            break;
        }
        case LayerGroup::final:
            for (std::size_t l = num_layers > 4 ? num_layers - 3 : 1; l <= num_layers; ++l)
                out.push_back(l - 1);
            break;
        case LayerGroup::all:
            for (std::size_t l = 1; l <= num_layers; ++l) out.push_back(l - 1);
            break;
    }
    if (out.empty())
        throw ValidationError("layer group '" + layer_group_name(group) +
                              "' resolves to zero layers");
    return out;
}

struct PairImportance {
    BigramKey key;
    double mu = 0.0;     // mean attention over the group's layers
    double sigma = 0.0;  // std across layers (n-1)
    double score = 0.0;  // mu * (1 + 0.5 * sigma)
};

inline double importance_score(double mu, double sigma) {
    if (mu < 0.0 || sigma < 0.0)
        throw ValidationError("importance_score: mu and sigma must be >= 0");
    return mu * (1.0 + 0.5 * sigma);
}

// The prompt's recorded spans, filtered to the requested keys.
inline std::map<BigramKey, std::vector<std::pair<std::size_t, std::size_t>>> locate_pair_spans(
    const Prompt& prompt, const std::vector<BigramKey>& keys) {
    std::map<BigramKey, std::vector<std::pair<std::size_t, std::size_t>>> out;
    for (const auto& key : keys) out[key] = {};
    for (const auto& span : prompt.spans) {
        const BigramKey key = parse_key(span.key);
        auto it = out.find(key);
        if (it != out.end()) it->second.emplace_back(span.begin, span.end);
    }
    for (auto& [key, spans] : out) std::sort(spans.begin(), spans.end());
    return out;
}

// Per layer in the group, a key's score is the mean received attention over
// tokens intersecting its spans; mu/sigma summarize across the group.
inline std::map<BigramKey, PairImportance> pair_attention_stats(
    const AttentionDump& dump,
    const std::map<BigramKey, std::vector<std::pair<std::size_t, std::size_t>>>& spans,
    LayerGroup group) {
    const auto layers = resolve_layers(group, dump.num_layers);
    std::map<BigramKey, PairImportance> out;
    for (const auto& [key, key_spans] : spans) {
        std::vector<std::size_t> tokens;
        for (std::size_t t = 0; t < dump.token_offsets.size(); ++t) {
            const auto& [tb, te] = dump.token_offsets[t];
            for (const auto& [sb, se] : key_spans)
                if (tb < se && sb < te) {
                    tokens.push_back(t);
                    break;
                }
        }
        PairImportance imp;
        imp.key = key;
        if (!tokens.empty()) {
            std::vector<double> layer_scores;
            for (std::size_t l : layers) {
                double s = 0.0;
                for (std::size_t t : tokens) s += dump.per_token_received[l][t];
                layer_scores.push_back(s / static_cast<double>(tokens.size()));
            }
            double sum = 0.0;
            for (double s : layer_scores) sum += s;
            imp.mu = sum / static_cast<double>(layer_scores.size());
            if (layer_scores.size() > 1) {
                double ss = 0.0;
                for (double s : layer_scores) ss += (s - imp.mu) * (s - imp.mu);
                imp.sigma = std::sqrt(ss / static_cast<double>(layer_scores.size() - 1));
            }
        }
        imp.score = importance_score(imp.mu, imp.sigma);
        out[key] = imp;
    }
    return out;
}

// Audio slices between consecutive occurrences of the key's two events.
inline std::vector<AudioBuffer> extract_pair_segments(const AudioBuffer& audio,
                                                      const LandmarkSequence& seq,
                                                      const BigramKey& key) {
    std::vector<AudioBuffer> out;
    for (std::size_t i = 0; i + 1 < seq.events.size(); ++i) {
        const auto& a = seq.events[i];
        const auto& b = seq.events[i + 1];
        if (a.sign != key.sign1 || a.kind != key.kind1 || b.sign != key.sign2 ||
            b.kind != key.kind2)
            continue;
        if (b.time_s - a.time_s < 0.002) {
            std::cerr << "warning: skipping sub-2ms segment for key " << render_key(key)
                      << " at " << a.time_s << "s\n";
            continue;
        }
        const auto lo = static_cast<std::size_t>(a.time_s * audio.sample_rate_hz);
        const auto hi = std::min(audio.samples.size(),
                                 static_cast<std::size_t>(b.time_s * audio.sample_rate_hz));
        if (hi <= lo) continue;
        AudioBuffer slice;
        slice.sample_rate_hz = audio.sample_rate_hz;
        slice.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                             audio.samples.begin() + static_cast<std::ptrdiff_t>(hi));
        out.push_back(std::move(slice));
    }
    return out;
}

inline const std::vector<double>& default_analysis_bands() {
    static const std::vector<double> bands = {0.0, 500.0, 2000.0, 4000.0, 8000.0};
    return bands;
}

// E_b = (1/N) sum over band bins of |X(f)|^2, N = bins in band.
inline std::map<std::size_t, double> band_energy_profile(const AudioBuffer& segment,
                                                         const std::vector<double>& band_edges) {
    if (segment.samples.size() < static_cast<std::size_t>(0.002 * segment.sample_rate_hz))
        throw ValidationError("segment shorter than 2 ms");
    const auto mag = dsp::magnitude_spectrum(segment.samples);
    const std::size_t half = mag.size() - 1;
    std::map<std::size_t, double> out;
    for (std::size_t b = 0; b + 1 < band_edges.size(); ++b) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < mag.size(); ++k) {
            const double f = dsp::bin_to_hz(k, half, segment.sample_rate_hz);
            const bool last = b + 2 == band_edges.size();
            if (f >= band_edges[b] && (f < band_edges[b + 1] || (last && f <= band_edges[b + 1]))) {
                sum += mag[k] * mag[k];
                ++count;
            }
        }
        if (count == 0)
            throw ValidationError("band " + std::to_string(b) + " contains no FFT bins");
        out[b] = sum / static_cast<double>(count);
    }
    return out;
}

struct SpectralProfile {
    std::map<std::size_t, double> band_energies;
    double centroid_hz = 0.0;
    double bandwidth_hz = 0.0;
    double rolloff85_hz = 0.0;
};

inline double spectral_centroid(const AudioBuffer& segment) {
    const auto mag = dsp::magnitude_spectrum(segment.samples);
    const std::size_t half = mag.size() - 1;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        num += dsp::bin_to_hz(k, half, segment.sample_rate_hz) * mag[k];
        den += mag[k];
    }
    if (den <= 0.0) throw ValidationError("spectral_centroid: silent segment");
    return num / den;
}

inline double spectral_bandwidth(const AudioBuffer& segment) {
    const auto mag = dsp::magnitude_spectrum(segment.samples);
    const std::size_t half = mag.size() - 1;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        num += dsp::bin_to_hz(k, half, segment.sample_rate_hz) * mag[k];
        den += mag[k];
    }
    if (den <= 0.0) throw ValidationError("spectral_bandwidth: silent segment");
    const double centroid = num / den;
    double spread = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        const double f = dsp::bin_to_hz(k, half, segment.sample_rate_hz);
        spread += (f - centroid) * (f - centroid) * mag[k];
    }
    return std::sqrt(spread / den);
}

// smallest frequency with cumulative power >= fraction of the total
inline double spectral_rolloff(const AudioBuffer& segment, double fraction = 0.85) {
    const auto mag = dsp::magnitude_spectrum(segment.samples);
    const std::size_t half = mag.size() - 1;
    double total = 0.0;
    for (double m : mag) total += m * m;
    if (total <= 0.0) throw ValidationError("spectral_rolloff: silent segment");
    double cum = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        cum += mag[k] * mag[k];
        if (cum >= fraction * total) return dsp::bin_to_hz(k, half, segment.sample_rate_hz);
    }
    return dsp::bin_to_hz(half, half, segment.sample_rate_hz);
}

inline SpectralProfile spectral_profile(const AudioBuffer& segment,
                                        const std::vector<double>& band_edges =
                                            default_analysis_bands()) {
    SpectralProfile p;
    p.band_energies = band_energy_profile(segment, band_edges);
    p.centroid_hz = spectral_centroid(segment);
    p.bandwidth_hz = spectral_bandwidth(segment);
    p.rolloff85_hz = spectral_rolloff(segment);
    return p;
}

struct GroupFeatureSummary {
    double mean = 0.0, median = 0.0, iqr = 0.0;
};

struct GroupComparison {
    // feature name -> group name -> summary; band energies keyed "band_<i>"
    std::map<std::string, std::map<std::string, GroupFeatureSummary>> features;
};

inline GroupComparison group_compare(
    const std::map<Label, std::vector<SpectralProfile>>& profiles_by_label) {
    auto health = profiles_by_label.find(Label::Health);
    auto depression = profiles_by_label.find(Label::Depression);
    if (health == profiles_by_label.end() || health->second.empty() ||
        depression == profiles_by_label.end() || depression->second.empty())
        throw ValidationError("group_compare: both groups must be non-empty");

    auto summarize = [](std::vector<double> values) {
        GroupFeatureSummary s;
        std::sort(values.begin(), values.end());
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        s.median = detail::quantile_sorted(values, 0.5);
        s.iqr = detail::quantile_sorted(values, 0.75) - detail::quantile_sorted(values, 0.25);
        return s;
    };

    GroupComparison cmp;
    for (const auto& [label, profiles] : profiles_by_label) {
        const std::string group = label_name(label);
        auto collect = [&](const std::string& feature, auto getter) {
            std::vector<double> values;
            for (const auto& p : profiles) values.push_back(getter(p));
            cmp.features[feature][group] = summarize(std::move(values));
        };
        collect("centroid_hz", [](const SpectralProfile& p) { return p.centroid_hz; });
        collect("bandwidth_hz", [](const SpectralProfile& p) { return p.bandwidth_hz; });
        collect("rolloff85_hz", [](const SpectralProfile& p) { return p.rolloff85_hz; });
        for (const auto& [band, unused] : profiles.front().band_energies) {
            collect("band_" + std::to_string(band) + "_energy",
                    [band = band](const SpectralProfile& p) {
                        return p.band_energies.at(band);
                    });
        }
    }
    return cmp;
}

inline void write_group_compare_csv(const GroupComparison& cmp, std::ostream& out) {
    out << "feature,group,mean,median,iqr\n";
    char buf[200];
    for (const auto& [feature, groups] : cmp.features)
        for (const auto& [group, s] : groups) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.6g,%.6g", feature.c_str(),
                          group.c_str(), s.mean, s.median, s.iqr);
            out << buf << "\n";
        }
}

inline void write_importance_csv(const std::map<BigramKey, PairImportance>& importance,
                                 LayerGroup group, const std::string& reduction,
                                 std::ostream& out) {
    out << "# reduction: " << reduction << "\n";
    out << "key,layer_group,mu,sigma,score\n";
    char buf[200];
    for (const auto& [key, imp] : importance) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.6g,%.6g", render_key(key).c_str(),
                      layer_group_name(group).c_str(), imp.mu, imp.sigma, imp.score);
        out << buf << "\n";
    }
}

}  // namespace speecht
