#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "speecht/corpus.hpp"
#include "speecht/landmarks.hpp"

using namespace speecht;

TEST_CASE("load_manifest parses fields and labels") {
    std::istringstream in(
        R"({"sample_id":"s1","landmark_path":"s1.lmk","label":"Health"})"
        "\n"
        R"({"sample_id":"s2","audio_path":"s2.wav","label":"Depression"})"
        "\n");
    const auto corpus = load_manifest(in, "train");
    REQUIRE(corpus.samples.size() == 2);
    CHECK(corpus.samples[0].sample_id == "s1");
    CHECK(corpus.samples[0].landmark_path == "s1.lmk");
    CHECK(corpus.samples[0].label == Label::Health);
    CHECK(corpus.samples[1].label == Label::Depression);
    CHECK(corpus.split == "train");
}

TEST_CASE("load_manifest: empty file gives empty corpus") {
    std::istringstream in("");
    CHECK(load_manifest(in).samples.empty());
}

TEST_CASE("load_manifest rejects duplicate ids") {
    std::istringstream in(
        R"({"sample_id":"s1","landmark_path":"a"})"
        "\n"
        R"({"sample_id":"s1","landmark_path":"b"})"
        "\n");
    CHECK_THROWS_AS(load_manifest(in), ValidationError);
}

TEST_CASE("load_manifest reports the malformed line number") {
    std::istringstream in(
        R"({"sample_id":"s1","landmark_path":"a"})"
        "\nnot json\n");
    try {
        load_manifest(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 2);
    }
}

TEST_CASE("load_manifest requires audio or landmarks") {
    std::istringstream in(R"({"sample_id":"s1","label":"Health"})" "\n");
    CHECK_THROWS_AS(load_manifest(in), ValidationError);
}

TEST_CASE("landmark CSV round trip is identity") {
    LandmarkSequence seq;
    seq.sample_id = "s1";
    seq.events = {{LandmarkKind::g, Sign::plus, 0.125},
                  {LandmarkKind::s, Sign::plus, 0.25},
                  {LandmarkKind::v, Sign::minus, 0.40625}};
    std::ostringstream out;
    export_landmarks(seq, out);
    std::istringstream in(out.str());
    const auto loaded = import_landmarks(in);
    CHECK(loaded.sample_id == "s1");
    CHECK(loaded.events == seq.events);
}

TEST_CASE("import_landmarks sorts rows by time") {
    std::istringstream in(
        "sample_id,kind,sign,time_s\n"
        "s1,g,-,0.300000\n"
        "s1,g,+,0.100000\n");
    const auto seq = import_landmarks(in);
    REQUIRE(seq.events.size() == 2);
    CHECK(seq.events[0].sign == Sign::plus);
    CHECK(seq.events[0].time_s == doctest::Approx(0.1));
}

TEST_CASE("import_landmarks validates the inventory") {
    std::istringstream bad_kind(
        "sample_id,kind,sign,time_s\n"
        "s1,x,+,0.100000\n");
    CHECK_THROWS_AS(import_landmarks(bad_kind), ValidationError);

    std::istringstream negative(
        "sample_id,kind,sign,time_s\n"
        "s1,g,+,-0.100000\n");
    CHECK_THROWS_AS(import_landmarks(negative), ValidationError);
}
