#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "speecht/detector.hpp"
#include "speecht/gateway.hpp"
#include "speecht/mine.hpp"
#include "speecht/prompting.hpp"
#include "speecht/retrieval.hpp"
#include "speecht/screening.hpp"

namespace speecht {

// Single structured config for the whole pipeline; a full-precision snapshot
// is stored beside every run's outputs and a hash of it stamps each artifact.
struct PipelineConfig {
    std::string train_manifest;
    std::string dev_manifest;
    std::string output_dir = "artifacts";
    std::size_t workers = 1;

    DetectorParams detector;
    ScreeningOptions screening;

    struct Retrieval {
        std::string mode = "mi_per_test";  // mi_per_test | mi_corpus_averaged | cosine
        std::size_t n = 2;                 // examples per class
        MineParams mine;
        bool retrain_per_test = false;
        std::uint32_t seed = 0;
    } retrieval;

    struct Prompting {
        std::string template_id = "timing_rag";  // zero_shot | text_rag | timing_rag
        TimingFormat format;
    } prompting;

    struct Gateway {
        std::string backend = "mock_fixed";  // http | mock_fixed | mock_oracle | mock_majority
        std::string fixed_response = "Health";
        GenerationConfig generation;
        std::size_t k_runs = 1;
        std::string log_path;  // relative to output_dir; empty disables logging
    } gateway;

    struct Calibration {
        std::size_t bins = 10;
        bool grid_search = false;
    } calibration;

    void validate() const {
        if (retrieval.n < 1) throw ValidationError("config: retrieval.n must be >= 1");
        if (screening.alpha <= 0.0 || screening.alpha > 1.0)
            throw ValidationError("config: screening.alpha must be in (0, 1]");
        if (gateway.k_runs < 1) throw ValidationError("config: gateway.k_runs must be >= 1");
        if (calibration.bins < 1) throw ValidationError("config: calibration.bins must be >= 1");
        if (workers < 1) throw ValidationError("config: workers must be >= 1");
        if (retrieval.mode != "mi_per_test" && retrieval.mode != "mi_corpus_averaged" &&
            retrieval.mode != "cosine")
            throw ValidationError("config: unknown retrieval.mode '" + retrieval.mode + "'");
        if (prompting.template_id != "zero_shot" && prompting.template_id != "text_rag" &&
            prompting.template_id != "timing_rag")
            throw ValidationError("config: unknown prompting.template '" +
                                  prompting.template_id + "'");
        if (gateway.backend != "http" && gateway.backend != "mock_fixed" &&
            gateway.backend != "mock_oracle" && gateway.backend != "mock_majority")
            throw ValidationError("config: unknown gateway.backend '" + gateway.backend + "'");
    }
};

inline nlohmann::ordered_json config_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["train_manifest"] = c.train_manifest;
    j["dev_manifest"] = c.dev_manifest;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    j["detector"] = {{"band_edges_hz", c.detector.band_edges_hz},
                     {"g_band_count", c.detector.g_band_count},
                     {"high_band_count", c.detector.high_band_count},
                     {"frame_s", c.detector.frame_s},
                     {"hop_s", c.detector.hop_s},
                     {"ror_threshold_db_g", c.detector.ror_threshold_db_g},
                     {"ror_threshold_db_b", c.detector.ror_threshold_db_b}};
    j["screening"] = {{"alpha", c.screening.alpha},
                      {"feature", stat_name(c.screening.feature)},
                      {"min_support", c.screening.min_support},
                      {"benjamini_hochberg", c.screening.benjamini_hochberg}};
    j["retrieval"] = {{"mode", c.retrieval.mode},
                      {"n", c.retrieval.n},
                      {"retrain_per_test", c.retrieval.retrain_per_test},
                      {"seed", c.retrieval.seed},
                      {"mine",
                       {{"hidden", c.retrieval.mine.hidden},
                        {"learning_rate", c.retrieval.mine.learning_rate},
                        {"steps", c.retrieval.mine.steps},
                        {"batch_size", c.retrieval.mine.batch_size},
                        {"ma_decay", c.retrieval.mine.ma_decay}}}};
    j["prompting"] = {{"template", c.prompting.template_id},
                      {"selector", c.prompting.format.selector},
                      {"milliseconds", c.prompting.format.milliseconds}};
    j["gateway"] = {{"backend", c.gateway.backend},
                    {"fixed_response", c.gateway.fixed_response},
                    {"model_name", c.gateway.generation.model_name},
                    {"temperature", c.gateway.generation.temperature},
                    {"max_tokens", c.gateway.generation.max_tokens},
                    {"endpoint_url", c.gateway.generation.endpoint_url},
                    {"timeout_s", c.gateway.generation.timeout_s},
                    {"max_retries", c.gateway.generation.max_retries},
                    {"k_runs", c.gateway.k_runs},
                    {"log_path", c.gateway.log_path}};
    j["calibration"] = {{"bins", c.calibration.bins},
                        {"grid_search", c.calibration.grid_search}};
    return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    auto get = [&](const nlohmann::json& obj, const char* key, auto& out) {
        if (obj.contains(key)) out = obj.at(key).get<std::decay_t<decltype(out)>>();
    };
    get(j, "train_manifest", c.train_manifest);
    get(j, "dev_manifest", c.dev_manifest);
    get(j, "output_dir", c.output_dir);
    get(j, "workers", c.workers);
    if (j.contains("detector")) {
        const auto& d = j.at("detector");
        get(d, "band_edges_hz", c.detector.band_edges_hz);
        get(d, "g_band_count", c.detector.g_band_count);
        get(d, "high_band_count", c.detector.high_band_count);
        get(d, "frame_s", c.detector.frame_s);
        get(d, "hop_s", c.detector.hop_s);
        get(d, "ror_threshold_db_g", c.detector.ror_threshold_db_g);
        get(d, "ror_threshold_db_b", c.detector.ror_threshold_db_b);
    }
    if (j.contains("screening")) {
        const auto& s = j.at("screening");
        get(s, "alpha", c.screening.alpha);
        if (s.contains("feature"))
            c.screening.feature = parse_stat_name(s.at("feature").get<std::string>());
        get(s, "min_support", c.screening.min_support);
        get(s, "benjamini_hochberg", c.screening.benjamini_hochberg);
    }
    if (j.contains("retrieval")) {
        const auto& r = j.at("retrieval");
        get(r, "mode", c.retrieval.mode);
        get(r, "n", c.retrieval.n);
        get(r, "retrain_per_test", c.retrieval.retrain_per_test);
        get(r, "seed", c.retrieval.seed);
        if (r.contains("mine")) {
            const auto& m = r.at("mine");
            get(m, "hidden", c.retrieval.mine.hidden);
            get(m, "learning_rate", c.retrieval.mine.learning_rate);
            get(m, "steps", c.retrieval.mine.steps);
            get(m, "batch_size", c.retrieval.mine.batch_size);
            get(m, "ma_decay", c.retrieval.mine.ma_decay);
        }
    }
    if (j.contains("prompting")) {
        const auto& p = j.at("prompting");
        get(p, "template", c.prompting.template_id);
        get(p, "selector", c.prompting.format.selector);
        get(p, "milliseconds", c.prompting.format.milliseconds);
    }
    if (j.contains("gateway")) {
        const auto& g = j.at("gateway");
        get(g, "backend", c.gateway.backend);
        get(g, "fixed_response", c.gateway.fixed_response);
        get(g, "model_name", c.gateway.generation.model_name);
        get(g, "temperature", c.gateway.generation.temperature);
        get(g, "max_tokens", c.gateway.generation.max_tokens);
        get(g, "endpoint_url", c.gateway.generation.endpoint_url);
        get(g, "timeout_s", c.gateway.generation.timeout_s);
        get(g, "max_retries", c.gateway.generation.max_retries);
        get(g, "k_runs", c.gateway.k_runs);
        get(g, "log_path", c.gateway.log_path);
    }
    if (j.contains("calibration")) {
        const auto& cal = j.at("calibration");
        get(cal, "bins", c.calibration.bins);
        get(cal, "grid_search", c.calibration.grid_search);
    }
    c.validate();
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigurationError(std::string("malformed config: ") + e.what());
    }
    return config_from_json(j);
}

// FNV-1a 64-bit over the canonical config snapshot; stamps every artifact.
inline std::string config_hash(const PipelineConfig& c) {
    const std::string dump = config_json(c).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace speecht
