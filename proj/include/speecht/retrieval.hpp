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

#include "speecht/features.hpp"
#include "speecht/mine.hpp"

namespace speecht {

enum class MiMode { per_test, corpus_averaged };

inline std::string mi_mode_name(MiMode m) {
    return m == MiMode::per_test ? "per_test" : "corpus_averaged";
}

struct MiScore {
    std::string train_id;
    double score;  // nats
    MiMode mode;
};

struct RetrievalSet {
    std::string test_id;
    std::vector<std::string> health_ids;
    std::vector<std::string> depression_ids;
    std::size_t n = 0;
};

struct MiRankOptions {
    MiMode mode = MiMode::per_test;
    MineParams mine;
    bool retrain_per_test = false;  // default: one estimator per corpus
};

namespace detail {

// One row per bigram key: the key's statistic sub-vector.
inline Eigen::MatrixXd key_rows(const std::vector<double>& values, std::size_t num_stats) {
    const std::size_t num_keys = values.size() / num_stats;
    Eigen::MatrixXd rows(num_keys, num_stats);
    for (std::size_t k = 0; k < num_keys; ++k)
        for (std::size_t s = 0; s < num_stats; ++s)
            rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) =
                values[k * num_stats + s];
    return rows;
}

}  // namespace detail

// MI-based ranking of training samples. Feature vectors are standardized and
// split into per-key rows; a statistics network scores test/train row pairs.
class MiRanker {
public:
    MiRanker(std::vector<FeatureVector> train, const FeatureSchema& schema,
             const MiRankOptions& options)
        : options_(options), num_stats_(schema.stats.size()) {
        if (train.empty()) throw ValidationError("MiRanker: no training vectors");
        if (schema.keys.size() < 2) {
            std::cerr << "warning: fewer than 2 aligned rows per sample; "
                         "MI ranking is disabled\n";
            usable_ = false;
        }
        standardizer_ = Standardizer::fit(train);
        for (auto& v : train) {
            train_rows_.push_back(detail::key_rows(standardizer_.apply(v.values), num_stats_));
            train_ids_.push_back(v.sample_id);
        }
        if (usable_ && !options_.retrain_per_test) {
            // per-corpus estimator: joint pairs couple each row with itself,
            // so psi learns row similarity; marginals shuffle the t side
            const auto total = static_cast<Eigen::Index>(train_rows_.size() *
                                                         train_rows_.front().rows());
            Eigen::MatrixXd pooled(total, static_cast<Eigen::Index>(num_stats_));
            Eigen::Index r = 0;
            for (const auto& rows : train_rows_)
                for (Eigen::Index i = 0; i < rows.rows(); ++i) pooled.row(r++) = rows.row(i);
            estimator_ = train_mine(pooled, pooled, options_.mine);
        }
    }

    bool usable() const { return usable_; }
    const Standardizer& standardizer() const { return standardizer_; }

    // per_test scores for one test vector, sorted descending (ties by id)
    std::vector<MiScore> score(const FeatureVector& test) const {
        std::vector<MiScore> scores = score_unsorted(test);
        sort_scores(scores);
        return scores;
    }

    // Corpus average: mean over the per-test scores of every test vector,
    // per training sample.
    std::vector<MiScore> score_corpus_averaged(const std::vector<FeatureVector>& tests) const {
        if (tests.empty()) throw ValidationError("corpus_averaged needs test vectors");
        std::map<std::string, double> sums;
        for (const auto& t : tests)
            for (const auto& s : score_unsorted(t)) sums[s.train_id] += s.score;
        std::vector<MiScore> out;
        for (const auto& [id, sum] : sums)
            out.push_back({id, sum / static_cast<double>(tests.size()),
                           MiMode::corpus_averaged});
        sort_scores(out);
        return out;
    }

private:
    std::vector<MiScore> score_unsorted(const FeatureVector& test) const {
        if (!usable_) return {};
        const Eigen::MatrixXd test_rows =
            detail::key_rows(standardizer_.apply(test.values), num_stats_);
        MineEstimator est = estimator_;
        if (options_.retrain_per_test) {
            // joint pairs: (test row, train row) aligned by key, pooled
            const auto total = static_cast<Eigen::Index>(train_rows_.size() * test_rows.rows());
            Eigen::MatrixXd xs(total, test_rows.cols()), ts(total, test_rows.cols());
            Eigen::Index r = 0;
            for (const auto& rows : train_rows_)
                for (Eigen::Index i = 0; i < rows.rows(); ++i) {
                    xs.row(r) = test_rows.row(i);
                    ts.row(r) = rows.row(i);
                    ++r;
                }
            est = train_mine(xs, ts, options_.mine);
        }
        std::vector<MiScore> scores;
        for (std::size_t i = 0; i < train_rows_.size(); ++i) {
            if (train_ids_[i] == test.sample_id) continue;
            scores.push_back(
                {train_ids_[i], estimate_mi(est, test_rows, train_rows_[i]), MiMode::per_test});
        }
        return scores;
    }

    static void sort_scores(std::vector<MiScore>& scores) {
        std::sort(scores.begin(), scores.end(), [](const MiScore& a, const MiScore& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.train_id < b.train_id;
        });
    }

    MiRankOptions options_;
    std::size_t num_stats_;
    bool usable_ = true;
    Standardizer standardizer_;
    std::vector<Eigen::MatrixXd> train_rows_;
    std::vector<std::string> train_ids_;
    MineEstimator estimator_;
};

// Top n per class from a sorted (or unsorted) score list.
inline RetrievalSet select_balanced(std::vector<MiScore> scores,
                                    const std::map<std::string, Label>& labels, std::size_t n,
                                    const std::string& test_id = "") {
    if (n == 0) throw ValidationError("select_balanced: n must be >= 1");
    std::sort(scores.begin(), scores.end(), [](const MiScore& a, const MiScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.train_id < b.train_id;
    });
    RetrievalSet set;
    set.test_id = test_id;
    set.n = n;
    for (const auto& s : scores) {
        if (s.train_id == test_id) continue;
        auto it = labels.find(s.train_id);
        if (it == labels.end())
            throw ValidationError("no label for scored sample '" + s.train_id + "'");
        auto& bucket = it->second == Label::Health ? set.health_ids : set.depression_ids;
        if (bucket.size() < n) bucket.push_back(s.train_id);
    }
    if (set.health_ids.size() < n)
        throw ValidationError("not enough scored samples in class Health");
    if (set.depression_ids.size() < n)
        throw ValidationError("not enough scored samples in class Depression");
    return set;
}

// Text-RAG baseline: overall top n by cosine similarity, not class-balanced.
inline std::vector<std::string> cosine_rank(
    const std::vector<double>& test_embedding,
    const std::vector<std::pair<std::string, std::vector<double>>>& train_embeddings,
    std::size_t n) {
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    const double tn = norm(test_embedding);
    if (tn == 0.0) throw ValidationError("cosine_rank: zero test embedding");
    std::vector<std::pair<double, std::string>> sims;
    for (const auto& [id, emb] : train_embeddings) {
        if (emb.size() != test_embedding.size())
            throw ValidationError("cosine_rank: dimension mismatch for '" + id + "'");
        const double en = norm(emb);
        if (en == 0.0) throw ValidationError("cosine_rank: zero embedding for '" + id + "'");
        double dot = 0.0;
        for (std::size_t i = 0; i < emb.size(); ++i) dot += emb[i] * test_embedding[i];
        sims.emplace_back(dot / (tn * en), id);
    }
    std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(n, sims.size()); ++i) out.push_back(sims[i].second);
    return out;
}

inline void write_scores_csv(const std::vector<MiScore>& scores, std::uint32_t seed,
                             std::ostream& out) {
    out << "train_id,score_nats,mode,seed\n";
    char buf[128];
    for (const auto& s : scores) {
        std::snprintf(buf, sizeof(buf), "%.9g", s.score);
        out << s.train_id << ',' << buf << ',' << mi_mode_name(s.mode) << ',' << seed << "\n";
    }
}

inline nlohmann::ordered_json retrieval_set_json(const RetrievalSet& set) {
    return nlohmann::ordered_json{{"test_id", set.test_id},
                                  {"health_ids", set.health_ids},
                                  {"depression_ids", set.depression_ids},
                                  {"n", set.n}};
}

}  // namespace speecht
