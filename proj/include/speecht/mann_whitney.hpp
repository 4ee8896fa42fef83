#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

#include "speecht/common.hpp"

namespace speecht {

struct MannWhitneyResult {
    double u_statistic;  // U of the first group
    double p_value;      // two-sided, in (0, 1]
    bool exact;          // enumeration path vs normal approximation
};

namespace mw_detail {

// Average ranks over the pooled sample; returns ranks for group a, plus the
// tie-correction sum  Σ (t³ - t)  over tie groups.
inline void rank_groups(const std::vector<double>& a, const std::vector<double>& b,
                        double& rank_sum_a, double& tie_sum, bool& has_ties) {
    struct Entry {
        double value;
        bool in_a;
    };
    std::vector<Entry> pooled;
    pooled.reserve(a.size() + b.size());
    for (double v : a) pooled.push_back({v, true});
    for (double v : b) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Entry& x, const Entry& y) { return x.value < y.value; });
    rank_sum_a = 0.0;
    tie_sum = 0.0;
    has_ties = false;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
        const double t = static_cast<double>(j - i);
        if (j - i > 1) {
            has_ties = true;
            tie_sum += t * t * t - t;
        }
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].in_a) rank_sum_a += avg_rank;
        i = j;
    }
}

// Distribution of the rank sum of a size-na subset of ranks {1..N}, by full
// enumeration. counts[s] = number of subsets with rank sum s.
inline void enumerate_rank_sums(std::size_t n_total, std::size_t n_a, std::size_t next,
                                std::size_t sum, std::size_t picked,
                                std::vector<std::size_t>& counts) {
    if (picked == n_a) {
        counts[sum] += 1;
        return;
    }
    if (next > n_total) return;
    // not enough ranks left
    if (n_total - next + 1 < n_a - picked) return;
    enumerate_rank_sums(n_total, n_a, next + 1, sum + next, picked + 1, counts);
    enumerate_rank_sums(n_total, n_a, next + 1, sum, picked, counts);
}

}  // namespace mw_detail

// Exact two-sided p by full enumeration over all rank assignments.
// Requires untied data.
inline MannWhitneyResult mann_whitney_u_exact(const std::vector<double>& a,
                                              const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney_u: empty group");
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;
    double rank_sum_a, tie_sum;
    bool ties;
    mw_detail::rank_groups(a, b, rank_sum_a, tie_sum, ties);
    if (ties) throw ValidationError("mann_whitney_u_exact: tied data");
    const double u_a = rank_sum_a - static_cast<double>(na * (na + 1)) / 2.0;
    const auto u_int = static_cast<std::size_t>(std::llround(u_a));

    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<std::size_t> counts(max_sum + 1, 0);
    mw_detail::enumerate_rank_sums(n, na, 1, 0, 0, counts);
    const std::size_t min_rank_sum = na * (na + 1) / 2;
    std::size_t total = 0, le = 0, ge = 0;
    for (std::size_t s = min_rank_sum; s <= max_sum; ++s) {
        const std::size_t u = s - min_rank_sum;
        total += counts[s];
        if (u <= u_int) le += counts[s];
        if (u >= u_int) ge += counts[s];
    }
    const double p_le = static_cast<double>(le) / static_cast<double>(total);
    const double p_ge = static_cast<double>(ge) / static_cast<double>(total);
    const double p = std::min(1.0, 2.0 * std::min(p_le, p_ge));
    return {u_a, p, true};
}

// Normal approximation with tie correction and continuity correction.
inline MannWhitneyResult mann_whitney_u_approx(const std::vector<double>& a,
                                               const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney_u: empty group");
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const double n = na + nb;
    double rank_sum_a, tie_sum;
    bool ties;
    mw_detail::rank_groups(a, b, rank_sum_a, tie_sum, ties);
    const double u_a = rank_sum_a - na * (na + 1.0) / 2.0;
    const double mu = na * nb / 2.0;
    double var = na * nb / 12.0 * (n + 1.0);
    if (n > 1.0) var = na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    double p = 1.0;
    if (var > 0.0) {
        double num = u_a - mu;
        // continuity correction toward the mean
        if (num > 0.5) num -= 0.5;
        else if (num < -0.5) num += 0.5;
        else num = 0.0;
        const double z = num / std::sqrt(var);
        p = std::erfc(std::abs(z) / std::sqrt(2.0));
        p = std::min(1.0, std::max(p, 1e-300));
    }
    return {u_a, p, false};
}

// Exact enumeration when the pooled size is small and no ties; otherwise the
// normal approximation.
inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                        const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney_u: empty group");
    double rank_sum_a, tie_sum;
    bool ties;
    mw_detail::rank_groups(a, b, rank_sum_a, tie_sum, ties);
    if (a.size() + b.size() <= 12 && !ties) return mann_whitney_u_exact(a, b);
    return mann_whitney_u_approx(a, b);
}

}  // namespace speecht
