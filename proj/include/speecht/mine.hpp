#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "speecht/common.hpp"

namespace speecht {

struct MineParams {
    std::vector<int> hidden = {64, 64};
    double learning_rate = 1e-3;  // Adam
    int steps = 2000;
    int batch_size = 64;
    double ma_decay = 0.99;  // moving average for the log-term denominator
    std::uint32_t seed = 0;
};

// Statistics network for the Donsker-Varadhan bound:
//   I >= E_joint[psi] - log E_marginal[e^psi]
// Training corrects the biased log-term gradient with an exponential moving
// average of the marginal denominator.
class MineEstimator {
public:
    MineEstimator() = default;

    MineEstimator(int input_dim, const std::vector<int>& hidden, std::uint32_t seed)
        : input_dim_(input_dim) {
        std::mt19937 rng(seed);
        std::vector<int> sizes;
        sizes.push_back(input_dim);
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(1);
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const int fan_in = sizes[l], fan_out = sizes[l + 1];
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> init(-bound, bound);
            Eigen::MatrixXd w(fan_out, fan_in);
            for (int r = 0; r < fan_out; ++r)
                for (int c = 0; c < fan_in; ++c) w(r, c) = init(rng);
            weights_.push_back(std::move(w));
            biases_.push_back(Eigen::VectorXd::Zero(fan_out));
        }
    }

    int input_dim() const { return input_dim_; }

    // psi for each row of a (B x input_dim) batch
    Eigen::VectorXd forward(const Eigen::MatrixXd& input) const {
        if (input.cols() != input_dim_) throw ValidationError("MINE input dimension mismatch");
        Eigen::MatrixXd a = input;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Eigen::MatrixXd z =
                (a * weights_[l].transpose()).rowwise() + biases_[l].transpose();
            a = l + 1 < weights_.size() ? z.cwiseMax(0.0) : z;
        }
        return a.col(0);
    }

    // One combined backward pass: output_grad holds dLoss/dpsi per row.
    void accumulate_gradients(const Eigen::MatrixXd& input, const Eigen::VectorXd& output_grad,
                              std::vector<Eigen::MatrixXd>& grad_w,
                              std::vector<Eigen::VectorXd>& grad_b) const {
        std::vector<Eigen::MatrixXd> activations;  // pre-layer inputs
        activations.push_back(input);
        std::vector<Eigen::MatrixXd> zs;
        Eigen::MatrixXd a = input;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Eigen::MatrixXd z =
                (a * weights_[l].transpose()).rowwise() + biases_[l].transpose();
            zs.push_back(z);
            a = l + 1 < weights_.size() ? z.cwiseMax(0.0) : z;
            activations.push_back(a);
        }
        Eigen::MatrixXd delta = output_grad;  // B x 1
        for (std::size_t l = weights_.size(); l-- > 0;) {
            grad_w[l] += delta.transpose() * activations[l];
            grad_b[l] += delta.colwise().sum().transpose();
            if (l > 0) {
                Eigen::MatrixXd mask = (zs[l - 1].array() > 0.0).cast<double>();
                delta = (delta * weights_[l]).cwiseProduct(mask);
            }
        }
    }

    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;

private:
    int input_dim_ = 0;
};

// Trains psi on aligned joint pairs (x_rows[i], t_rows[i]); marginal batches
// pair x rows with independently drawn t rows.
inline MineEstimator train_mine(const Eigen::MatrixXd& x_rows, const Eigen::MatrixXd& t_rows,
                                const MineParams& params) {
    if (x_rows.rows() != t_rows.rows() || x_rows.cols() != t_rows.cols())
        throw ValidationError("train_mine: row matrices must have equal shape");
    const auto n = static_cast<int>(x_rows.rows());
    if (n < 2) throw ValidationError("train_mine: need at least 2 rows");
    const int d = static_cast<int>(x_rows.cols());

    MineEstimator est(2 * d, params.hidden, params.seed);
    std::mt19937 rng(params.seed + 0x9e3779b9u);
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int batch = std::min(params.batch_size, n);

    // Adam state
    std::vector<Eigen::MatrixXd> m_w, v_w, grad_w;
    std::vector<Eigen::VectorXd> m_b, v_b, grad_b;
    for (std::size_t l = 0; l < est.weights_.size(); ++l) {
        m_w.push_back(Eigen::MatrixXd::Zero(est.weights_[l].rows(), est.weights_[l].cols()));
        v_w.push_back(m_w.back());
        grad_w.push_back(m_w.back());
        m_b.push_back(Eigen::VectorXd::Zero(est.biases_[l].size()));
        v_b.push_back(m_b.back());
        grad_b.push_back(m_b.back());
    }
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double ema = -1.0;

    Eigen::MatrixXd joint(batch, 2 * d), marginal(batch, 2 * d);
    for (int step = 1; step <= params.steps; ++step) {
        for (int i = 0; i < batch; ++i) {
            const int j = pick(rng);
            joint.row(i) << x_rows.row(j), t_rows.row(j);
        }
        for (int i = 0; i < batch; ++i) {
            const int jx = pick(rng);
            const int jt = pick(rng);
            marginal.row(i) << x_rows.row(jx), t_rows.row(jt);
        }
        const Eigen::VectorXd psi_joint = est.forward(joint);
        const Eigen::VectorXd psi_marg = est.forward(marginal);
        const Eigen::VectorXd exp_marg = psi_marg.array().min(30.0).exp();
        const double mean_exp = exp_marg.mean();
        if (!std::isfinite(mean_exp) || !psi_joint.allFinite())
            throw TrainingError("non-finite MINE loss", static_cast<std::size_t>(step));
        ema = ema < 0.0 ? mean_exp : params.ma_decay * ema + (1.0 - params.ma_decay) * mean_exp;

        for (std::size_t l = 0; l < grad_w.size(); ++l) {
            grad_w[l].setZero();
            grad_b[l].setZero();
        }
        // minimize -(E[psi_joint] - log E[e^psi_marg]); the log-term gradient
        // uses the EMA denominator
        const Eigen::VectorXd g_joint =
            Eigen::VectorXd::Constant(batch, -1.0 / static_cast<double>(batch));
        const Eigen::VectorXd g_marg = exp_marg / (static_cast<double>(batch) * ema);
        est.accumulate_gradients(joint, g_joint, grad_w, grad_b);
        est.accumulate_gradients(marginal, g_marg, grad_w, grad_b);

        const double bc1 = 1.0 - std::pow(beta1, step);
        const double bc2 = 1.0 - std::pow(beta2, step);
        for (std::size_t l = 0; l < grad_w.size(); ++l) {
            m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * grad_w[l];
            v_w[l] = beta2 * v_w[l].array().matrix() +
                     (1.0 - beta2) * grad_w[l].cwiseProduct(grad_w[l]);
            est.weights_[l] -=
                (params.learning_rate * (m_w[l] / bc1).array() /
                 ((v_w[l] / bc2).array().sqrt() + adam_eps))
                    .matrix();
            m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * grad_b[l];
            v_b[l] = beta2 * v_b[l].array().matrix() +
                     (1.0 - beta2) * grad_b[l].cwiseProduct(grad_b[l]);
            est.biases_[l] -= (params.learning_rate * (m_b[l] / bc1).array() /
                               ((v_b[l] / bc2).array().sqrt() + adam_eps))
                                  .matrix();
        }
    }
    return est;
}

// Evaluates the bound on the given rows without weight updates. The joint
// term pairs rows by index; the marginal term uses deterministic cyclic
// shifts of the t side (all n-1 shifts when affordable).
inline double estimate_mi(const MineEstimator& est, const Eigen::MatrixXd& x_rows,
                          const Eigen::MatrixXd& t_rows) {
    if (x_rows.rows() != t_rows.rows() || x_rows.cols() != t_rows.cols())
        throw ValidationError("estimate_mi: row matrices must have equal shape");
    const auto n = static_cast<int>(x_rows.rows());
    const int d = static_cast<int>(x_rows.cols());
    if (2 * d != est.input_dim()) throw ValidationError("estimate_mi: dimension mismatch");
    if (n == 0) throw ValidationError("estimate_mi: no rows");

    Eigen::MatrixXd joint(n, 2 * d);
    joint << x_rows, t_rows;
    const Eigen::VectorXd psi_joint = est.forward(joint);
    const double joint_term = psi_joint.mean();

    const int max_marginal = 200000;
    const int shifts = n > 1 ? std::max(1, std::min(n - 1, max_marginal / n)) : 1;
    double max_psi = -1e300;
    std::vector<Eigen::VectorXd> psi_blocks;
    Eigen::MatrixXd marg(n, 2 * d);
    for (int s = 1; s <= shifts; ++s) {
        for (int i = 0; i < n; ++i)
            marg.row(i) << x_rows.row(i), t_rows.row(n > 1 ? (i + s) % n : i);
        psi_blocks.push_back(est.forward(marg));
        max_psi = std::max(max_psi, psi_blocks.back().maxCoeff());
    }
    double sum_exp = 0.0;
    std::size_t count = 0;
    for (const auto& block : psi_blocks) {
        sum_exp += (block.array() - max_psi).exp().sum();
        count += static_cast<std::size_t>(block.size());
    }
    const double log_mean_exp = max_psi + std::log(sum_exp / static_cast<double>(count));
    const double mi = joint_term - log_mean_exp;
    if (!std::isfinite(mi)) throw NumericalError("estimate_mi produced a non-finite value");
    return mi;
}

}  // namespace speecht
