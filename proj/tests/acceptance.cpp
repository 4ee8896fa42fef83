// Acceptance gate: ten self-contained checks of the library's core numerical
// claims, each verified against an independent in-file oracle and printed as
// a single PASS/FAIL line. Exits nonzero if any check fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "speecht/analysis.hpp"
#include "speecht/gpc.hpp"
#include "speecht/mann_whitney.hpp"
#include "speecht/mine.hpp"
#include "speecht/pipeline.hpp"

using namespace speecht;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- harness --

struct Outcome {
    bool passed = true;
    std::string detail;
    double seconds = 0.0;
};

struct Check {
    Outcome* out;
    void fail(const std::string& why) {
        if (out->passed) out->detail = why;  // keep the first failure
        out->passed = false;
    }
    void expect(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
    void expect_near(double got, double want, double tol, const std::string& what) {
        if (!(std::abs(got - want) <= tol)) {
            std::ostringstream s;
            s << what << ": got " << got << ", want " << want << " +/- " << tol;
            fail(s.str());
        }
    }
};

template <typename Fn>
Outcome timed(Fn&& fn) {
    Outcome out;
    Check chk{&out};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fn(chk);
    } catch (const std::exception& e) {
        chk.fail(std::string("unexpected exception: ") + e.what());
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ------------------------------------------------- rank-test oracle (1) ----

double u_by_counting(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) {
            if (x > y) u += 1.0;
            else if (x == y) u += 0.5;
        }
    return u;
}

double exact_p_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double u_obs = u_by_counting(a, b);
    std::vector<bool> mask(pooled.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    std::sort(mask.begin(), mask.end());
    std::size_t le = 0, ge = 0, total = 0;
    do {
        std::vector<double> ga, gb;
        for (std::size_t i = 0; i < pooled.size(); ++i) (mask[i] ? ga : gb).push_back(pooled[i]);
        const double u = u_by_counting(ga, gb);
        ++total;
        if (u <= u_obs + 1e-12) ++le;
        if (u >= u_obs - 1e-12) ++ge;
    } while (std::next_permutation(mask.begin(), mask.end()));
    return std::min(1.0, 2.0 * std::min(static_cast<double>(le) / total,
                                        static_cast<double>(ge) / total));
}

// -------------------------------------------- exact-posterior oracle (3) ---

// Integrates the exact classification posterior on the 4-point 1-D problem
// with tensor-product Gauss-Hermite quadrature over the training latents;
// no Gaussian posterior approximation anywhere. For each outer node the test
// latent is conditionally Gaussian, integrated by a 1-D quadrature.
const std::vector<std::vector<double>> kInputs = {{-2.0}, {-1.0}, {1.0}, {2.0}};
const std::vector<int> kTargets = {-1, -1, 1, 1};

class BruteForceGpc {
public:
    BruteForceGpc(const std::vector<int>& targets, double sigma2, double length)
        : sigma2_(sigma2), length_(length) {
        double mean = 0.0;
        for (const auto& row : kInputs) mean += row[0];
        mean /= static_cast<double>(kInputs.size());
        double ss = 0.0;
        for (const auto& row : kInputs) ss += (row[0] - mean) * (row[0] - mean);
        loc_ = mean;
        scale_ = std::sqrt(ss / static_cast<double>(kInputs.size()));
        for (const auto& row : kInputs) z_.push_back((row[0] - loc_) / scale_);

        const int n = static_cast<int>(z_.size());
        Eigen::MatrixXd K(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                K(i, j) = k(z_[static_cast<std::size_t>(i)], z_[static_cast<std::size_t>(j)]);
        K.diagonal().array() += 1e-8;
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        const Eigen::MatrixXd L = llt.matrixL();

        const auto outer = gh::rule(kOuterNodes);
        const double root2 = std::sqrt(2.0);
        Eigen::VectorXd u(n);
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        while (true) {
            double weight = 1.0;
            for (int i = 0; i < n; ++i) {
                u(i) = root2 * outer.nodes(idx[static_cast<std::size_t>(i)]);
                weight *= outer.weights(idx[static_cast<std::size_t>(i)]);
            }
            const Eigen::VectorXd f = L * u;
            double lik = weight;
            for (int i = 0; i < n; ++i)
                lik *= sigmoid(static_cast<double>(targets[static_cast<std::size_t>(i)]) * f(i));
            lik_.push_back(lik);
            kinv_f_.push_back(llt.solve(f));
            int carry = n - 1;
            while (carry >= 0 && ++idx[static_cast<std::size_t>(carry)] == kOuterNodes) {
                idx[static_cast<std::size_t>(carry)] = 0;
                --carry;
            }
            if (carry < 0) break;
        }
        kinv_ = K.inverse();
    }

    double p1(double test_x) const {
        const double zs = (test_x - loc_) / scale_;
        const int n = static_cast<int>(z_.size());
        Eigen::VectorXd kstar(n);
        for (int i = 0; i < n; ++i) kstar(i) = k(zs, z_[static_cast<std::size_t>(i)]);
        const double var = std::max(sigma2_ - kstar.dot(kinv_ * kstar), 1e-12);
        const double sd = std::sqrt(2.0 * var);
        const auto inner = gh::rule(20);
        double numer = 0.0, denom = 0.0;
        for (std::size_t s = 0; s < lik_.size(); ++s) {
            const double mean = kstar.dot(kinv_f_[s]);
            double cond = 0.0;
            for (int q = 0; q < 20; ++q)
                cond += inner.weights(q) * sigmoid(mean + sd * inner.nodes(q));
            cond /= std::sqrt(std::numbers::pi);
            numer += lik_[s] * cond;
            denom += lik_[s];
        }
        return numer / denom;
    }

private:
    static constexpr int kOuterNodes = 12;
    double k(double a, double b) const {
        return sigma2_ * std::exp(-(a - b) * (a - b) / (2.0 * length_ * length_));
    }
    double sigma2_, length_, loc_ = 0.0, scale_ = 1.0;
    std::vector<double> z_;
    std::vector<double> lik_;
    std::vector<Eigen::VectorXd> kinv_f_;
    Eigen::MatrixXd kinv_;
};

// ----------------------------------------------- shared synthetic corpus ---

// Landmark corpus where depression samples hold every bigram pair roughly
// twice as long as health samples; gaps between pairs are constant.
LandmarkSequence corpus_sequence(const std::string& id, bool depressed, std::size_t idx) {
    LandmarkSequence seq;
    seq.sample_id = id;
    double t = 0.05;
    auto pair_len = [&](int rep) {
        return (depressed ? 0.16 : 0.08) + 0.002 * static_cast<double>(idx) + 0.001 * rep;
    };
    for (int rep = 0; rep < 4; ++rep) {
        seq.events.push_back({LandmarkKind::s, rep % 2 == 0 ? Sign::plus : Sign::minus, t});
        seq.events.push_back(
            {LandmarkKind::v, rep % 2 == 0 ? Sign::minus : Sign::plus, t + pair_len(rep)});
        t += pair_len(rep) + 0.1;
    }
    for (int rep = 0; rep < 4; ++rep) {
        seq.events.push_back({LandmarkKind::g, rep % 2 == 0 ? Sign::plus : Sign::minus, t});
        t += pair_len(rep) / 2.0 + 0.05;
    }
    return seq;
}

// 40 samples total: 12 train + 8 dev per class.
PipelineConfig build_corpus(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir / "input");
    auto add = [&](std::ostream& manifest, const std::string& prefix, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i)
            for (const bool depressed : {false, true}) {
                const std::string id = prefix + (depressed ? "_d" : "_h") + std::to_string(i);
                const auto path = dir / "input" / (id + ".csv");
                export_landmarks(corpus_sequence(id, depressed, i), path.string());
                manifest << nlohmann::ordered_json{
                                {"sample_id", id},
                                {"landmark_path", path.string()},
                                {"label", depressed ? "Depression" : "Health"}}
                                .dump()
                         << "\n";
            }
    };
    {
        std::ofstream train(dir / "train.jsonl");
        add(train, "tr", 12);
        std::ofstream dev(dir / "dev.jsonl");
        add(dev, "dev", 8);
    }
    PipelineConfig cfg;
    cfg.train_manifest = (dir / "train.jsonl").string();
    cfg.dev_manifest = (dir / "dev.jsonl").string();
    cfg.output_dir = (dir / "artifacts").string();
    cfg.retrieval.mine.steps = 200;
    cfg.retrieval.n = 2;
    cfg.gateway.backend = "mock_oracle";
    cfg.gateway.k_runs = 2;
    return cfg;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
    std::map<std::string, std::string> bytes;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file()) bytes[entry.path().string()] = slurp(entry.path());
    return bytes;
}

AudioBuffer make_tone(double freq, double seconds, double amp) {
    AudioBuffer buf;
    buf.sample_rate_hz = 16000;
    buf.samples.resize(static_cast<std::size_t>(seconds * 16000));
    for (std::size_t i = 0; i < buf.samples.size(); ++i)
        buf.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / 16000.0);
    return buf;
}

// ----------------------------------------------------------- criteria ------

void criterion_rank_test(Check& chk) {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    // exact enumeration vs independent brute force at every small size split
    for (std::size_t na = 1; na <= 9; ++na)
        for (std::size_t nb = 1; na + nb <= 10; ++nb)
            for (int trial = 0; trial < 3; ++trial) {
                std::vector<double> a(na), b(nb);
                for (auto& x : a) x = value(rng);
                for (auto& x : b) x = value(rng);
                const auto r = mann_whitney_u_exact(a, b);
                chk.expect_near(r.u_statistic, u_by_counting(a, b), 1e-12, "U statistic");
                chk.expect_near(r.p_value, exact_p_oracle(a, b), 1e-12,
                                "exact p at " + std::to_string(na) + "v" + std::to_string(nb));
            }
    // normal approximation against exact on random untied draws
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t na = 5 + rng() % 2;
        const std::size_t nb = std::min<std::size_t>(5 + rng() % 3, 12 - na);
        std::vector<double> a(na), b(nb);
        for (auto& x : a) x = value(rng);
        for (auto& x : b) x = value(rng);
        const double gap =
            std::abs(mann_whitney_u_exact(a, b).p_value - mann_whitney_u_approx(a, b).p_value);
        chk.expect(gap <= 0.03, "approximate p deviates " + std::to_string(gap));
    }
}

void criterion_mi_estimates(Check& chk) {
    const struct {
        double rho, truth, abs_tol, rel_tol;
    } cases[] = {{0.0, 0.0, 0.05, 0.0}, {0.5, 0.1438, 0.0, 0.20}, {0.9, 0.8304, 0.0, 0.20}};
    for (const auto& c : cases)
        for (unsigned seed : {11u, 12u, 13u}) {
            std::mt19937 rng(seed);
            std::normal_distribution<double> normal(0.0, 1.0);
            Eigen::MatrixXd x(2000, 1), t(2000, 1);
            for (int i = 0; i < 2000; ++i) {
                const double u = normal(rng), v = normal(rng);
                x(i, 0) = u;
                t(i, 0) = c.rho * u + std::sqrt(1.0 - c.rho * c.rho) * v;
            }
            MineParams params;
            params.seed = seed;
            const double mi = estimate_mi(train_mine(x, t, params), x, t);
            const double tol = std::max(c.abs_tol, c.rel_tol * c.truth);
            chk.expect_near(mi, c.truth, tol,
                            "MI at rho=" + std::to_string(c.rho) + " seed " +
                                std::to_string(seed));
        }
}

void criterion_classifier_posterior(Check& chk) {
    GpcHyper hyper;
    hyper.sigma2 = 1.0;
    hyper.length_scale = 1.0;
    const auto model = GpcModel::fit(kInputs, kTargets, hyper);
    std::vector<int> flipped(kTargets);
    for (int& y : flipped) y = -y;
    const auto mirror = GpcModel::fit(kInputs, flipped, hyper);
    const BruteForceGpc oracle(kTargets, 1.0, 1.0);
    for (int i = 0; i <= 20; ++i) {
        const double x = -2.0 + 0.2 * i;
        const double p = model.predict_proba({x});
        chk.expect_near(p, oracle.p1(x), 0.05, "posterior at x=" + std::to_string(x));
        chk.expect_near(mirror.predict_proba({x}), 1.0 - p, 1e-6,
                        "label-flip antisymmetry at x=" + std::to_string(x));
    }
}

void criterion_calibration_error(Check& chk) {
    chk.expect_near(expected_calibration_error({0.9, 0.9, 0.6}, {true, false, true}, 10).ece,
                    0.4, 1e-9, "three-sample hand case");
    const std::vector<double> conf(20, 1.0);
    const std::vector<bool> correct(20, true);
    chk.expect(expected_calibration_error(conf, correct, 10).ece == 0.0,
               "perfectly calibrated predictions must give exactly 0");
}

void criterion_detector_ground_truth(Check& chk) {
    std::size_t matched = 0, total = 0;
    for (unsigned seed = 1; seed <= 50; ++seed) {
        std::mt19937 rng(seed);
        auto pick = [&](double lo, double hi) {
            return lo + (hi - lo) * (static_cast<double>(rng() % 1000) / 999.0);
        };
        SynthSpec spec;
        spec.segments = {{SegmentKind::silence, pick(0.20, 0.30), {}, 0.0},
                         {SegmentKind::tone, pick(0.25, 0.40), pick(600.0, 1200.0),
                          pick(0.70, 0.90)},
                         {SegmentKind::silence, pick(0.20, 0.30), {}, 0.0},
                         {SegmentKind::noise_burst, pick(0.10, 0.15), {}, pick(0.50, 0.70)},
                         {SegmentKind::silence, pick(0.20, 0.30), {}, 0.0}};
        auto [audio, truth] = synthesize(spec, seed);
        const auto detected = detect(audio, DetectorParams{});

        for (const auto& want : truth.events) {
            if (want.kind != LandmarkKind::g && want.kind != LandmarkKind::b) continue;
            ++total;
            for (const auto& got : detected.events)
                if (got.kind == want.kind && got.sign == want.sign &&
                    std::abs(got.time_s - want.time_s) <= 0.020) {
                    ++matched;
                    break;
                }
        }
        std::map<LandmarkKind, Sign> next;
        for (const auto& e : detected.events) {
            auto [it, inserted] = next.try_emplace(e.kind, Sign::plus);
            chk.expect(e.sign == it->second,
                       "sign alternation broken for seed " + std::to_string(seed));
            it->second = it->second == Sign::plus ? Sign::minus : Sign::plus;
        }
    }
    const double rate = static_cast<double>(matched) / static_cast<double>(total);
    chk.expect(rate >= 0.95, "only " + std::to_string(100.0 * rate) +
                                 "% of ground-truth boundary events matched within 20 ms");
}

void criterion_spectral_oracles(Check& chk) {
    const auto t = make_tone(1000.0, 0.5, 0.8);
    chk.expect_near(spectral_centroid(t), 1000.0, 10.0, "tone centroid");
    chk.expect_near(spectral_rolloff(t), 1000.0, 20.0, "tone rolloff");
    chk.expect(spectral_bandwidth(t) < 50.0, "tone bandwidth must stay below 50 Hz");

    // band energies must re-sum to the full spectral power (discrete Parseval)
    AudioBuffer noise;
    noise.sample_rate_hz = 16000;
    noise.samples.resize(4800);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> amp(-0.5, 0.5);
    for (auto& s : noise.samples) s = amp(rng);

    const auto& edges = default_analysis_bands();
    const auto profile = band_energy_profile(noise, edges);
    const auto mag = dsp::magnitude_spectrum(noise.samples);
    const std::size_t half = mag.size() - 1;
    double totalp = 0.0;
    for (double m : mag) totalp += m * m;
    double reconstructed = 0.0;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        std::size_t count = 0;
        for (std::size_t k = 0; k < mag.size(); ++k) {
            const double f = dsp::bin_to_hz(k, half, noise.sample_rate_hz);
            const bool last = b + 2 == edges.size();
            if (f >= edges[b] && (f < edges[b + 1] || (last && f <= edges[b + 1]))) ++count;
        }
        reconstructed += profile.at(b) * static_cast<double>(count);
    }
    chk.expect(std::abs(reconstructed - totalp) <= 1e-6 * totalp,
               "band energies do not re-sum to the total spectral power");
}

void criterion_end_to_end(Check& chk, const PipelineConfig& cfg) {
    chk.expect(cmd_extract(cfg).ok(), "extract stage reported errors");
    chk.expect(cmd_screen(cfg).ok(), "screen stage reported errors");
    const auto outcome = cmd_predict(cfg);
    chk.expect(outcome.stage.ok() && outcome.report.failed_runs == 0,
               "predict stage reported errors");
    for (double f1 : outcome.report.f1_runs)
        chk.expect(f1 == 1.0, "oracle-backend F1 was " + std::to_string(f1) + ", not 1.0");
    chk.expect(!outcome.report.f1_runs.empty(), "no prediction runs completed");

    const auto before = snapshot_dir(cfg.output_dir);
    const auto again_extract = cmd_extract(cfg);
    const auto again_screen = cmd_screen(cfg);
    const auto again_predict = cmd_predict(cfg);
    chk.expect(again_extract.written.empty() && again_screen.written.empty() &&
                   again_predict.stage.written.empty(),
               "rerun rewrote artifacts that should have been up to date");
    chk.expect(snapshot_dir(cfg.output_dir) == before,
               "rerun with the same seeds changed artifact bytes");
}

void criterion_retrieval_contract(Check& chk, const PipelineConfig& cfg) {
    const auto d = load_pipeline_data(cfg);
    MiRankOptions opts;
    opts.mine = cfg.retrieval.mine;
    const MiRanker ranker(d.train_vectors, d.schema, opts);
    chk.expect(ranker.usable(), "MI ranker failed to train on the synthetic corpus");

    const std::size_t n = 3;
    std::map<std::string, double> sums;
    for (const auto& test : d.dev_vectors) {
        const auto scores = ranker.score(test);
        const auto set = select_balanced(scores, d.train_labels, n, test.sample_id);
        chk.expect(set.health_ids.size() == n && set.depression_ids.size() == n,
                   "retrieval set for " + test.sample_id + " is not n-per-class");
        for (const auto& s : scores) sums[s.train_id] += s.score;
    }
    for (const auto& avg : ranker.score_corpus_averaged(d.dev_vectors))
        chk.expect_near(avg.score,
                        sums.at(avg.train_id) / static_cast<double>(d.dev_vectors.size()), 1e-9,
                        "corpus-averaged score for " + avg.train_id);
}

void criterion_prompt_fidelity(Check& chk) {
    auto golden = [&](const std::string& name) {
        const auto text = slurp(fs::path(GOLDEN_DIR) / name);
        chk.expect(!text.empty(), "missing golden file " + name);
        return text;
    };
    chk.expect(assemble_zero_shot("hello").text == golden("zero_shot.txt"),
               "zero-shot prompt differs from its golden file");
    chk.expect(assemble_text_rag({{"I feel fine lately.", Label::Health}},
                                 "I can't sleep at night.")
                       .text == golden("text_rag.txt"),
               "text example prompt differs from its golden file");

    const BigramKey sv{Sign::plus, LandmarkKind::s, Sign::minus, LandmarkKind::v};
    const BigramKey gg{Sign::plus, LandmarkKind::g, Sign::minus, LandmarkKind::g};
    auto stats_of = [](double mean, double std) {
        DurationStats st{};
        st.mean = st.median = st.min = st.max = mean;
        st.std = std;
        st.count = 2;
        return st;
    };
    auto sample_with = [](const std::string& id,
                          const std::map<BigramKey, DurationStats>& stats) {
        SampleFeatures f;
        f.sample_id = id;
        f.stats = stats;
        return f;
    };
    RetrievalSet set;
    set.test_id = "test";
    set.health_ids = {"h1"};
    set.depression_ids = {"d1"};
    set.n = 1;
    const std::map<std::string, SampleFeatures> features = {
        {"h1", sample_with("h1", {{gg, stats_of(0.12, 0.2)}, {sv, stats_of(0.08, 0.1)}})},
        {"d1", sample_with("d1", {{gg, stats_of(0.30, 0.0)}, {sv, stats_of(0.10, 0.1)}})}};
    const auto test = sample_with("test", {{sv, stats_of(0.09, 0.1)}});
    chk.expect(assemble_timing_prompt(set, features, test, {gg, sv}).text ==
                   golden("timing_rag.txt"),
               "timing prompt differs from its golden file");

    chk.expect(format_timing_line(stats_of(0.08, 0.1), sv).text ==
                   "+s--v (mean: 0.08, var: 0.01)",
               "timing line rendering changed");
}

void criterion_importance_formula(Check& chk) {
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> value(0.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double mu = value(rng), sigma = value(rng), delta = value(rng) + 1e-6;
        const double score = importance_score(mu, sigma);
        chk.expect_near(score, mu * (1.0 + 0.5 * sigma), 1e-12, "importance score");
        chk.expect(importance_score(mu + delta, sigma) >= score,
                   "importance must be monotone in the mean");
        chk.expect(importance_score(mu, sigma + delta) >= score,
                   "importance must be monotone in the spread");
    }
}

struct Criterion {
    std::string name;
    Outcome outcome;
    double budget_s;
};

}  // namespace

int main() {
    const PipelineConfig corpus_cfg = build_corpus("acceptance_corpus");

    std::vector<Criterion> results;
    results.push_back({"rank test matches brute-force enumeration",
                       timed(criterion_rank_test), 10.0});
    results.push_back({"MI estimates recover analytic Gaussian values",
                       timed(criterion_mi_estimates), 60.0});
    results.push_back({"classifier matches exact posterior integration",
                       timed(criterion_classifier_posterior), 5.0});
    results.push_back({"calibration error hand cases",
                       timed(criterion_calibration_error), 0.0});
    results.push_back({"detector recovers synthetic ground truth",
                       timed(criterion_detector_ground_truth), 30.0});
    results.push_back({"spectral descriptors and power conservation",
                       timed(criterion_spectral_oracles), 0.0});
    results.push_back({"end-to-end oracle run with byte-identical rerun",
                       timed([&](Check& chk) { criterion_end_to_end(chk, corpus_cfg); }), 0.0});
    results.push_back({"balanced retrieval sets and averaged-score consistency",
                       timed([&](Check& chk) { criterion_retrieval_contract(chk, corpus_cfg); }),
                       0.0});
    results.push_back({"prompt templates match golden files",
                       timed(criterion_prompt_fidelity), 0.0});
    results.push_back({"importance score formula and monotonicity",
                       timed(criterion_importance_formula), 0.0});

    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& r = results[i];
        if (r.budget_s > 0.0 && r.outcome.seconds > r.budget_s) {
            r.outcome.passed = false;
            if (r.outcome.detail.empty())
                r.outcome.detail = "exceeded time budget of " + std::to_string(r.budget_s) + " s";
        }
        std::printf("%2zu. %-58s [%s] (%.2f s)%s%s\n", i + 1, r.name.c_str(),
                    r.outcome.passed ? "PASS" : "FAIL", r.outcome.seconds,
                    r.outcome.passed ? "" : " -- ",
                    r.outcome.passed ? "" : r.outcome.detail.c_str());
        if (!r.outcome.passed) ++failures;
    }
    return failures;
}
