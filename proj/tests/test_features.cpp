#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "speecht/features.hpp"

using namespace speecht;

namespace {

const BigramKey kSV{Sign::plus, LandmarkKind::s, Sign::minus, LandmarkKind::v};
const BigramKey kGG{Sign::plus, LandmarkKind::g, Sign::minus, LandmarkKind::g};

SampleFeatures make_sample(const std::string& id,
                           const std::map<BigramKey, std::vector<double>>& durations,
                           std::optional<Label> label = std::nullopt) {
    SampleFeatures f;
    f.sample_id = id;
    f.label = label;
    for (const auto& [key, values] : durations) f.stats[key] = aggregate_stats(values);
    return f;
}

std::vector<SignificanceResult> fake_screening() {
    SignificanceResult sv{}, gg{};
    sv.key = kSV;
    sv.selected = true;
    gg.key = kGG;
    gg.selected = true;
    SignificanceResult skipped{};
    skipped.key = {Sign::plus, LandmarkKind::b, Sign::minus, LandmarkKind::b};
    skipped.selected = false;
    return {gg, sv, skipped};  // deliberately unsorted
}

}  // namespace

TEST_CASE("make_schema keeps only selected keys, sorted") {
    const auto schema = make_schema(fake_screening());
    REQUIRE(schema.keys.size() == 2);
    CHECK(schema.keys[0] < schema.keys[1]);
    CHECK(std::find(schema.keys.begin(), schema.keys.end(), kSV) != schema.keys.end());
    CHECK(schema.stats.size() == 6);
    CHECK(schema.dimension() == 12);
}

TEST_CASE("index_of lays entries out key-major") {
    FeatureSchema schema;
    schema.keys = {kGG, kSV};
    schema.stats = {StatKind::mean, StatKind::max};
    CHECK(schema.dimension() == 4);
    CHECK(schema.index_of(0, 0) == 0);
    CHECK(schema.index_of(0, 1) == 1);
    CHECK(schema.index_of(1, 0) == 2);
    CHECK(schema.index_of(1, 1) == 3);
}

TEST_CASE("compute_defaults takes per-entry medians over carriers") {
    FeatureSchema schema;
    schema.keys = {kSV};
    schema.stats = {StatKind::mean};
    const std::vector<SampleFeatures> train = {
        make_sample("a", {{kSV, {0.1}}}),
        make_sample("b", {{kSV, {0.3}}}),
        make_sample("c", {{kSV, {0.2}}}),
        make_sample("d", {{kGG, {9.0}}}),  // does not carry kSV
    };
    const auto defaults = compute_defaults(train, schema);
    REQUIRE(defaults.size() == 1);
    CHECK(defaults[0] == doctest::Approx(0.2));
}

TEST_CASE("compute_defaults falls back to zero when nobody carries an entry") {
    FeatureSchema schema;
    schema.keys = {kSV};
    schema.stats = {StatKind::mean};
    const auto defaults = compute_defaults({make_sample("a", {{kGG, {1.0}}})}, schema);
    CHECK(defaults[0] == 0.0);
}

TEST_CASE("build_feature_vector fills gaps from defaults and flags them") {
    FeatureSchema schema;
    schema.keys = {kGG, kSV};
    schema.stats = {StatKind::mean, StatKind::max};
    const std::vector<double> defaults = {0.5, 0.6, 0.7, 0.8};
    const auto sample = make_sample("s", {{kSV, {0.1, 0.3}}}, Label::Depression);
    const auto v = build_feature_vector(sample, schema, defaults);
    CHECK(v.sample_id == "s");
    CHECK(v.label == Label::Depression);
    REQUIRE(v.values.size() == 4);
    // kGG missing -> defaults + mask
    CHECK(v.values[0] == 0.5);
    CHECK(v.values[1] == 0.6);
    CHECK(v.imputation_mask[0]);
    CHECK(v.imputation_mask[1]);
    // kSV present -> real stats
    CHECK(v.values[2] == doctest::Approx(0.2));
    CHECK(v.values[3] == doctest::Approx(0.3));
    CHECK_FALSE(v.imputation_mask[2]);
    CHECK_FALSE(v.imputation_mask[3]);
}

TEST_CASE("empty schema and mismatched defaults are rejected") {
    FeatureSchema empty;
    CHECK_THROWS_AS(compute_defaults({}, empty), ValidationError);
    FeatureSchema schema;
    schema.keys = {kSV};
    schema.stats = {StatKind::mean};
    CHECK_THROWS_AS(build_feature_vector(make_sample("s", {}), schema, {1.0, 2.0}),
                    ValidationError);
}

TEST_CASE("standardizer gives zero mean and unit variance on its training set") {
    std::vector<FeatureVector> train;
    for (double x : {1.0, 2.0, 3.0, 4.0}) {
        FeatureVector v;
        v.values = {x, 10.0 * x, 7.0};  // last column constant
        train.push_back(v);
    }
    const auto st = Standardizer::fit(train);
    double mean0 = 0.0, var0 = 0.0;
    for (const auto& v : train) mean0 += st.apply(v.values)[0];
    mean0 /= 4.0;
    for (const auto& v : train) {
        const double z = st.apply(v.values)[0];
        var0 += (z - mean0) * (z - mean0);
    }
    var0 /= 4.0;
    CHECK(mean0 == doctest::Approx(0.0));
    CHECK(var0 == doctest::Approx(1.0));
    // constant column: guard keeps output finite and zero
    CHECK(st.apply(train[0].values)[2] == doctest::Approx(0.0));

    CHECK_THROWS_AS(st.apply({1.0}), ValidationError);
    CHECK_THROWS_AS(Standardizer::fit({}), ValidationError);
}
