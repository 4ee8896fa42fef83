#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "speecht/corpus.hpp"
#include "speecht/features.hpp"

namespace speecht {

struct GpcHyper {
    std::optional<double> sigma2;        // default 1
    std::optional<double> length_scale;  // default: median pairwise distance
    int max_newton_iters = 50;
    double tol = 1e-8;
    bool grid_search = false;  // maximize the Laplace marginal likelihood
};

inline double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma2,
                         double length_scale) {
    if (x.size() != y.size()) throw ValidationError("rbf_kernel: dimension mismatch");
    if (sigma2 <= 0.0 || length_scale <= 0.0)
        throw ValidationError("rbf_kernel: sigma2 and length scale must be > 0");
    return sigma2 * std::exp(-(x - y).squaredNorm() / (2.0 * length_scale * length_scale));
}

namespace gh {

// Gauss-Hermite nodes/weights for weight e^{-z^2}, by Golub-Welsch.
struct Rule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

inline Rule rule(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double off = std::sqrt(i / 2.0);
        jacobi(i, i - 1) = off;
        jacobi(i - 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    Rule r;
    r.nodes = solver.eigenvalues();
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        r.weights(i) = std::sqrt(std::numbers::pi) * v0 * v0;
    }
    return r;
}

}  // namespace gh

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Binary GPC with logistic likelihood, fitted by the Laplace approximation
// (Newton iterations on the latent posterior mode). Labels map
// Health -> -1, Depression -> +1.
class GpcModel {
public:
    static constexpr double kJitter = 1e-8;
    static constexpr int kQuadratureNodes = 20;

    static GpcModel fit(const std::vector<std::vector<double>>& inputs,
                        const std::vector<int>& targets, const GpcHyper& hyper = {}) {
        if (inputs.empty() || inputs.size() != targets.size())
            throw ValidationError("fit_gpc: inputs/targets size mismatch");
        bool has_pos = false, has_neg = false;
        for (int t : targets) {
            if (t == 1) has_pos = true;
            else if (t == -1) has_neg = true;
            else throw ValidationError("fit_gpc: targets must be -1 or +1");
        }
        if (!has_pos || !has_neg) throw ValidationError("fit_gpc: both classes required");

        GpcModel model;
        const auto n = static_cast<Eigen::Index>(inputs.size());
        const auto d = static_cast<Eigen::Index>(inputs.front().size());
        Eigen::MatrixXd raw(n, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<Eigen::Index>(inputs[static_cast<std::size_t>(i)].size()) != d)
                throw ValidationError("fit_gpc: ragged input rows");
            for (Eigen::Index j = 0; j < d; ++j)
                raw(i, j) = inputs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        // standardize per dimension
        model.loc_ = raw.colwise().mean();
        Eigen::MatrixXd centered = raw.rowwise() - model.loc_.transpose();
        model.scale_ = (centered.array().square().colwise().mean()).sqrt();
        for (Eigen::Index j = 0; j < d; ++j)
            if (model.scale_(j) < 1e-12) model.scale_(j) = 1.0;
        model.X_ = centered.array().rowwise() / model.scale_.transpose().array();
        model.y_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            model.y_(i) = static_cast<double>(targets[static_cast<std::size_t>(i)]);

        const double median_dist = model.median_pairwise_distance();
        const double base_l = hyper.length_scale.value_or(median_dist);
        const double base_s2 = hyper.sigma2.value_or(1.0);
        if (!hyper.grid_search) {
            model.fit_laplace(base_s2, base_l, hyper);
            return model;
        }
        double best_lml = -1e300, best_l = base_l, best_s2 = base_s2;
        for (double lf : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            for (double s2 : {0.5, 1.0, 2.0}) {
                GpcModel trial = model;
                try {
                    trial.fit_laplace(s2, median_dist * lf, hyper);
                } catch (const Error&) {
                    continue;
                }
                if (trial.log_marginal_ > best_lml) {
                    best_lml = trial.log_marginal_;
                    best_l = median_dist * lf;
                    best_s2 = s2;
                }
            }
        }
        model.fit_laplace(best_s2, best_l, hyper);
        return model;
    }

    static GpcModel fit(const std::vector<FeatureVector>& vectors, const GpcHyper& hyper = {}) {
        std::vector<std::vector<double>> inputs;
        std::vector<int> targets;
        for (const auto& v : vectors) {
            if (!v.label) throw ValidationError("fit_gpc: unlabeled feature vector");
            inputs.push_back(v.values);
            targets.push_back(*v.label == Label::Depression ? 1 : -1);
        }
        return fit(inputs, targets, hyper);
    }

    // p(y = +1 | x) by 20-node Gauss-Hermite quadrature of the logistic link
    double predict_proba(const std::vector<double>& x) const {
        if (static_cast<Eigen::Index>(x.size()) != X_.cols())
            throw ValidationError("predict_proba: dimension mismatch");
        Eigen::VectorXd xs(X_.cols());
        for (Eigen::Index j = 0; j < X_.cols(); ++j)
            xs(j) = (x[static_cast<std::size_t>(j)] - loc_(j)) / scale_(j);

        Eigen::VectorXd kstar(X_.rows());
        for (Eigen::Index i = 0; i < X_.rows(); ++i)
            kstar(i) = rbf_kernel(X_.row(i).transpose(), xs, sigma2_, length_);
        const double mean = kstar.dot(grad_);
        const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(
            sqrt_w_.asDiagonal() * kstar);
        double var = sigma2_ + kJitter - v.squaredNorm();
        var = std::max(var, 1e-12);

        static const gh::Rule quad = gh::rule(kQuadratureNodes);
        double p = 0.0;
        const double sd = std::sqrt(2.0 * var);
        for (int q = 0; q < kQuadratureNodes; ++q)
            p += quad.weights(q) * sigmoid(mean + sd * quad.nodes(q));
        p /= std::sqrt(std::numbers::pi);
        if (!std::isfinite(p)) throw NumericalError("predict_proba: non-finite probability");
        return std::min(1.0 - 1e-12, std::max(1e-12, p));
    }

    double log_marginal_likelihood() const { return log_marginal_; }
    double sigma2() const { return sigma2_; }
    double length_scale() const { return length_; }
    int newton_iterations() const { return newton_iters_; }

    nlohmann::ordered_json to_json() const {
        auto mat = [](const Eigen::MatrixXd& m) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                nlohmann::ordered_json row = nlohmann::ordered_json::array();
                for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
                rows.push_back(row);
            }
            return rows;
        };
        auto vec = [](const Eigen::VectorXd& v) {
            nlohmann::ordered_json out = nlohmann::ordered_json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
            return out;
        };
        return nlohmann::ordered_json{
            {"format_version", 1}, {"sigma2", sigma2_},   {"length_scale", length_},
            {"inputs", mat(X_)},   {"targets", vec(y_)},  {"location", vec(loc_)},
            {"scale", vec(scale_)}, {"mode", vec(mode_)}};
    }

    static GpcModel from_json(const nlohmann::json& j, const GpcHyper& hyper = {}) {
        if (j.at("format_version").get<int>() != 1)
            throw FormatError("unsupported GPC model format version");
        GpcModel m;
        const auto& inputs = j.at("inputs");
        const auto n = static_cast<Eigen::Index>(inputs.size());
        const auto d = static_cast<Eigen::Index>(inputs.at(0).size());
        m.X_.resize(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index jj = 0; jj < d; ++jj)
                m.X_(i, jj) = inputs.at(static_cast<std::size_t>(i))
                                  .at(static_cast<std::size_t>(jj)).get<double>();
        auto load_vec = [&](const char* key, Eigen::VectorXd& v) {
            const auto& arr = j.at(key);
            v.resize(static_cast<Eigen::Index>(arr.size()));
            for (std::size_t i = 0; i < arr.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = arr.at(i).get<double>();
        };
        load_vec("targets", m.y_);
        load_vec("location", m.loc_);
        load_vec("scale", m.scale_);
        m.fit_laplace(j.at("sigma2").get<double>(), j.at("length_scale").get<double>(), hyper);
        return m;
    }

private:
    double median_pairwise_distance() const {
        std::vector<double> dists;
        for (Eigen::Index i = 0; i < X_.rows(); ++i)
            for (Eigen::Index j = i + 1; j < X_.rows(); ++j) {
                const double d = (X_.row(i) - X_.row(j)).norm();
                if (d > 1e-12) dists.push_back(d);
            }
        if (dists.empty()) return 1.0;
        std::sort(dists.begin(), dists.end());
        return dists[dists.size() / 2];
    }

    void fit_laplace(double sigma2, double length, const GpcHyper& hyper) {
        sigma2_ = sigma2;
        length_ = length;
        const Eigen::Index n = X_.rows();
        Eigen::MatrixXd K(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                K(i, j) = rbf_kernel(X_.row(i).transpose(), X_.row(j).transpose(), sigma2_,
                                     length_);
                K(j, i) = K(i, j);
            }
        K.diagonal().array() += kJitter;

        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        double prev_nlp = 1e300;
        int increases = 0;
        newton_iters_ = 0;
        for (int iter = 0; iter < hyper.max_newton_iters; ++iter) {
            ++newton_iters_;
            Eigen::VectorXd pi(n), w(n), grad(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                pi(i) = sigmoid(f(i));
                w(i) = std::max(pi(i) * (1.0 - pi(i)), 1e-12);
                grad(i) = (y_(i) + 1.0) / 2.0 - pi(i);
            }
            sqrt_w_ = w.array().sqrt();
            Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) +
                                sqrt_w_.asDiagonal() * K * sqrt_w_.asDiagonal();
            Eigen::LLT<Eigen::MatrixXd> llt(B);
            if (llt.info() != Eigen::Success)
                throw NumericalError("fit_gpc: Cholesky failure");
            L_ = llt.matrixL();
            const Eigen::VectorXd b = w.cwiseProduct(f) + grad;
            const Eigen::VectorXd inner = sqrt_w_.asDiagonal() * (K * b);
            const Eigen::VectorXd solved =
                L_.transpose().triangularView<Eigen::Upper>().solve(
                    L_.triangularView<Eigen::Lower>().solve(inner));
            a = b - sqrt_w_.asDiagonal() * solved;
            f = K * a;

            double loglik = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                loglik += -std::log1p(std::exp(-std::abs(y_(i) * f(i)))) -
                          std::max(0.0, -y_(i) * f(i));
            const double nlp = 0.5 * a.dot(f) - loglik;
            if (nlp > prev_nlp + 1e-12) {
                if (++increases >= 2) throw NumericalError("fit_gpc: Newton diverged");
            } else {
                increases = 0;
            }
            prev_nlp = nlp;

            Eigen::VectorXd obj_grad(n);
            for (Eigen::Index i = 0; i < n; ++i)
                obj_grad(i) = (y_(i) + 1.0) / 2.0 - sigmoid(f(i)) - a(i);
            if (obj_grad.lpNorm<Eigen::Infinity>() < hyper.tol) break;
        }
        mode_ = f;
        grad_.resize(n);
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pi = sigmoid(f(i));
            grad_(i) = (y_(i) + 1.0) / 2.0 - pi;
            w(i) = std::max(pi * (1.0 - pi), 1e-12);
        }
        sqrt_w_ = w.array().sqrt();
        Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) +
                            sqrt_w_.asDiagonal() * K * sqrt_w_.asDiagonal();
        Eigen::LLT<Eigen::MatrixXd> llt(B);
        if (llt.info() != Eigen::Success) throw NumericalError("fit_gpc: Cholesky failure");
        L_ = llt.matrixL();
        double loglik = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            loglik += -std::log1p(std::exp(-std::abs(y_(i) * f(i)))) -
                      std::max(0.0, -y_(i) * f(i));
        log_marginal_ = -0.5 * a.dot(f) + loglik -
                        L_.diagonal().array().log().sum();
    }

    Eigen::MatrixXd X_;  // standardized training inputs
    Eigen::VectorXd y_;  // targets in {-1, +1}
    Eigen::VectorXd loc_, scale_;
    double sigma2_ = 1.0, length_ = 1.0;
    Eigen::VectorXd mode_;    // posterior mode f-hat
    Eigen::VectorXd grad_;    // t - pi at the mode
    Eigen::VectorXd sqrt_w_;  // W^(1/2) diagonal
    Eigen::MatrixXd L_;       // chol(I + W^1/2 K W^1/2)
    double log_marginal_ = 0.0;
    int newton_iters_ = 0;
};

}  // namespace speecht
