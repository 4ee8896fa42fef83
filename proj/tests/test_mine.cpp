#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "speecht/mine.hpp"

using namespace speecht;

namespace {

// correlated standard-normal pairs with correlation rho;
// analytic MI = -0.5 * ln(1 - rho^2)
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gaussian_pairs(int n, double rho, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(n, 1), t(n, 1);
    for (int i = 0; i < n; ++i) {
        const double u = normal(rng), v = normal(rng);
        x(i, 0) = u;
        t(i, 0) = rho * u + std::sqrt(1.0 - rho * rho) * v;
    }
    return {x, t};
}

}  // namespace

TEST_CASE("independent rows give an estimate near zero") {
    auto [x, t] = gaussian_pairs(2000, 0.0, 1);
    const auto est = train_mine(x, t, MineParams{});
    CHECK(std::abs(estimate_mi(est, x, t)) < 0.05);
}

TEST_CASE("rho = 0.9 recovers the analytic MI within 20%") {
    auto [x, t] = gaussian_pairs(2000, 0.9, 2);
    const auto est = train_mine(x, t, MineParams{});
    const double truth = -0.5 * std::log(1.0 - 0.9 * 0.9);  // 0.8304 nats
    CHECK(estimate_mi(est, x, t) == doctest::Approx(truth).epsilon(0.20));
}

TEST_CASE("rho = 0.5 recovers the analytic MI within 20%") {
    auto [x, t] = gaussian_pairs(2000, 0.5, 3);
    const auto est = train_mine(x, t, MineParams{});
    const double truth = -0.5 * std::log(1.0 - 0.5 * 0.5);  // 0.1438 nats
    CHECK(estimate_mi(est, x, t) == doctest::Approx(truth).epsilon(0.20));
}

TEST_CASE("training is deterministic under a fixed seed") {
    auto [x, t] = gaussian_pairs(300, 0.7, 4);
    MineParams params;
    params.steps = 200;
    const auto a = train_mine(x, t, params);
    const auto b = train_mine(x, t, params);
    REQUIRE(a.weights_.size() == b.weights_.size());
    for (std::size_t l = 0; l < a.weights_.size(); ++l) {
        CHECK(a.weights_[l] == b.weights_[l]);
        CHECK(a.biases_[l] == b.biases_[l]);
    }
    params.seed = 5;
    const auto c = train_mine(x, t, params);
    CHECK(a.weights_[0] != c.weights_[0]);
}

TEST_CASE("aligned pairs score at least as high as permuted pairs when converged") {
    auto [x, t] = gaussian_pairs(2000, 0.9, 6);
    const auto est = train_mine(x, t, MineParams{});
    const double aligned = estimate_mi(est, x, t);

    std::mt19937 rng(7);
    Eigen::MatrixXd shuffled = t;
    for (int i = static_cast<int>(shuffled.rows()) - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        shuffled.row(i).swap(shuffled.row(pick(rng)));
    }
    CHECK(aligned > estimate_mi(est, x, shuffled));
}

TEST_CASE("degenerate and invalid inputs") {
    auto [x, t] = gaussian_pairs(50, 0.5, 8);
    MineParams params;
    params.steps = 50;
    const auto est = train_mine(x, t, params);

    // single repeated row pair stays finite
    Eigen::MatrixXd one_x(1, 1), one_t(1, 1);
    one_x << 0.3;
    one_t << 0.3;
    CHECK(std::isfinite(estimate_mi(est, one_x, one_t)));

    Eigen::MatrixXd wide(4, 2);
    wide.setZero();
    CHECK_THROWS_AS(estimate_mi(est, wide, wide), ValidationError);

    Eigen::MatrixXd empty(0, 1);
    CHECK_THROWS_AS(estimate_mi(est, empty, empty), ValidationError);

    Eigen::MatrixXd single(1, 1);
    single << 1.0;
    CHECK_THROWS_AS(train_mine(single, single, params), ValidationError);
    Eigen::MatrixXd mismatched(3, 1);
    mismatched.setZero();
    Eigen::MatrixXd other(4, 1);
    other.setZero();
    CHECK_THROWS_AS(train_mine(mismatched, other, params), ValidationError);
}

TEST_CASE("non-finite input raises a training error carrying the step") {
    Eigen::MatrixXd x(4, 1), t(4, 1);
    x << 1.0, 2.0, std::nan(""), 4.0;
    t << 1.0, 2.0, 3.0, 4.0;
    MineParams params;
    params.steps = 10;
    params.batch_size = 4;
    try {
        train_mine(x, t, params);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(e.step_index >= 1);
    }
}
