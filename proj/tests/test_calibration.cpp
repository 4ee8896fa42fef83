#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "speecht/calibration.hpp"

using namespace speecht;

TEST_CASE("confidence is the larger class probability") {
    CHECK(confidence(0.5) == 0.5);
    CHECK(confidence(0.8) == doctest::Approx(0.8));
    CHECK(confidence(0.2) == doctest::Approx(0.8));
    CHECK_THROWS_AS(confidence(0.0), ValidationError);
    CHECK_THROWS_AS(confidence(1.0), ValidationError);
    CHECK_THROWS_AS(confidence(-0.1), ValidationError);
    // C >= 0.5 for any valid input
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> uni(1e-9, 1.0 - 1e-9);
    for (int i = 0; i < 1000; ++i) CHECK(confidence(uni(rng)) >= 0.5);
}

TEST_CASE("ECE hand computation") {
    // the 0.9 samples share a bin (conf 0.9, acc 0.5), 0.6 sits alone
    // (conf 0.6, acc 1.0): ECE = 2/3 * 0.4 + 1/3 * 0.4 = 0.4
    const auto r = expected_calibration_error({0.9, 0.9, 0.6}, {true, false, true});
    CHECK(r.ece == doctest::Approx(0.4));
    CHECK(r.n == 3);
}

TEST_CASE("perfectly calibrated and maximally miscalibrated extremes") {
    CHECK(expected_calibration_error({1.0, 1.0, 1.0}, {true, true, true}).ece ==
          doctest::Approx(0.0));
    CHECK(expected_calibration_error({1.0, 1.0}, {false, false}).ece == doctest::Approx(1.0));
}

TEST_CASE("ECE is bounded and invariant to sample order") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> conf;
    std::vector<bool> ok;
    for (int i = 0; i < 200; ++i) {
        conf.push_back(uni(rng));
        ok.push_back(uni(rng) < 0.5);
    }
    const double base = expected_calibration_error(conf, ok).ece;
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);

    std::vector<std::size_t> order(conf.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> conf2;
    std::vector<bool> ok2;
    for (std::size_t i : order) {
        conf2.push_back(conf[i]);
        ok2.push_back(ok[i]);
    }
    CHECK(expected_calibration_error(conf2, ok2).ece == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("bins partition the samples") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> conf;
    std::vector<bool> ok;
    for (int i = 0; i < 137; ++i) {
        conf.push_back(uni(rng));
        ok.push_back(true);
    }
    for (std::size_t bins : {1UL, 5UL, 10UL, 17UL}) {
        const auto r = expected_calibration_error(conf, ok, bins);
        REQUIRE(r.bins.size() == bins);
        std::size_t total = 0;
        for (std::size_t b = 0; b < bins; ++b) {
            total += r.bins[b].count;
            CHECK(r.bins[b].lower == doctest::Approx(double(b) / double(bins)));
            CHECK(r.bins[b].upper == doctest::Approx(double(b + 1) / double(bins)));
        }
        CHECK(total == conf.size());
    }
}

TEST_CASE("boundary confidences go to the upper bin, 1.0 stays in the last") {
    // 0.5 belongs to [0.5,0.6), not [0.4,0.5)
    const auto r = expected_calibration_error({0.5, 1.0}, {true, true}, 10);
    CHECK(r.bins[5].count == 1);
    CHECK(r.bins[4].count == 0);
    CHECK(r.bins[9].count == 1);
}

TEST_CASE("ECE input validation") {
    CHECK_THROWS_AS(expected_calibration_error({}, {}), ValidationError);
    CHECK_THROWS_AS(expected_calibration_error({0.5}, {true, false}), ValidationError);
    CHECK_THROWS_AS(expected_calibration_error({1.5}, {true}), ValidationError);
    CHECK_THROWS_AS(expected_calibration_error({-0.1}, {true}), ValidationError);
    CHECK_THROWS_AS(expected_calibration_error({0.5}, {true}, 0), ValidationError);
}

TEST_CASE("calibration report serializes bins and ece") {
    const auto r = expected_calibration_error({0.9, 0.9, 0.6}, {true, false, true});
    const auto j = calibration_report_json(r);
    CHECK(j["ece"] == doctest::Approx(0.4));
    CHECK(j["n"] == 3);
    REQUIRE(j["bins"].size() == 10);
    CHECK(j["bins"][9]["count"] == 2);
    CHECK(j["bins"][9]["accuracy"] == doctest::Approx(0.5));
    CHECK(j["bins"][9]["mean_confidence"] == doctest::Approx(0.9));
}

TEST_CASE("reliability CSV lists one row per bin") {
    const auto r = expected_calibration_error({0.9, 0.9, 0.6}, {true, false, true}, 5);
    std::ostringstream out;
    write_reliability_csv(r, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "lower,upper,count,mean_confidence,accuracy");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);
    // the two 0.9 samples share the [0.8, 1.0] bin; the 0.6 sample sits alone
    CHECK(out.str().find("0.80,1.00,2,0.9,0.5") != std::string::npos);
    CHECK(out.str().find("0.60,0.80,1,0.6,1") != std::string::npos);
    CHECK(out.str().find("0.00,0.20,0,0,0") != std::string::npos);
}
