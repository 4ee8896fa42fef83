#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "speecht/common.hpp"

namespace speecht {

// C = max(p, 1 - p): the larger predicted class probability.
inline double confidence(double p1) {
    if (p1 <= 0.0 || p1 >= 1.0) throw ValidationError("confidence: p1 must be in (0, 1)");
    return std::max(p1, 1.0 - p1);
}

struct CalibrationBin {
    double lower, upper;
    std::size_t count = 0;
    double mean_confidence = 0.0;
    double accuracy = 0.0;
};

struct CalibrationReport {
    double ece = 0.0;
    std::vector<CalibrationBin> bins;
    std::size_t n = 0;
};

// Equal-width bins over [0,1]; a confidence on a boundary belongs to the
// upper bin, except 1.0 which stays in the last bin.
inline CalibrationReport expected_calibration_error(const std::vector<double>& confidences,
                                                    const std::vector<bool>& correct,
                                                    std::size_t num_bins = 10) {
    if (confidences.empty()) throw ValidationError("ECE: no samples");
    if (confidences.size() != correct.size())
        throw ValidationError("ECE: confidences/correct length mismatch");
    if (num_bins == 0) throw ValidationError("ECE: need at least one bin");

    CalibrationReport report;
    report.n = confidences.size();
    report.bins.resize(num_bins);
    std::vector<double> conf_sum(num_bins, 0.0);
    std::vector<std::size_t> correct_count(num_bins, 0);
    for (std::size_t b = 0; b < num_bins; ++b) {
        report.bins[b].lower = static_cast<double>(b) / static_cast<double>(num_bins);
        report.bins[b].upper = static_cast<double>(b + 1) / static_cast<double>(num_bins);
    }
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        const double c = confidences[i];
        if (c < 0.0 || c > 1.0) throw ValidationError("ECE: confidence outside [0, 1]");
        auto b = static_cast<std::size_t>(c * static_cast<double>(num_bins));
        if (b >= num_bins) b = num_bins - 1;
        ++report.bins[b].count;
        conf_sum[b] += c;
        if (correct[i]) ++correct_count[b];
    }
    for (std::size_t b = 0; b < num_bins; ++b) {
        auto& bin = report.bins[b];
        if (bin.count == 0) continue;
        bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
        bin.accuracy =
            static_cast<double>(correct_count[b]) / static_cast<double>(bin.count);
        report.ece += static_cast<double>(bin.count) / static_cast<double>(report.n) *
                      std::abs(bin.mean_confidence - bin.accuracy);
    }
    return report;
}

inline nlohmann::ordered_json calibration_report_json(const CalibrationReport& r) {
    nlohmann::ordered_json bins = nlohmann::ordered_json::array();
    for (const auto& b : r.bins)
        bins.push_back({{"lower", b.lower},
                        {"upper", b.upper},
                        {"count", b.count},
                        {"mean_confidence", b.mean_confidence},
                        {"accuracy", b.accuracy}});
    return nlohmann::ordered_json{{"ece", r.ece}, {"n", r.n}, {"bins", bins}};
}

// reliability table, one row per bin
inline void write_reliability_csv(const CalibrationReport& r, std::ostream& out) {
    out << "lower,upper,count,mean_confidence,accuracy\n";
    char buf[160];
    for (const auto& b : r.bins) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%zu,%.6g,%.6g", b.lower, b.upper, b.count,
                      b.mean_confidence, b.accuracy);
        out << buf << "\n";
    }
}

inline void write_reliability_csv(const CalibrationReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    write_reliability_csv(r, out);
}

}  // namespace speecht
