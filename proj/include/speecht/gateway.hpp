#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
// glibc's resolv.h (dragged in by httplib) defines `_res` as an object-like
// macro, which mangles any header included after it that uses the name.
#ifdef _res
#undef _res
#endif
#include <json.hpp>

#include "speecht/corpus.hpp"
#include "speecht/prompting.hpp"

namespace speecht {

struct GenerationConfig {
    std::string model_name = "local-model";
    double temperature = 0.0;
    int max_tokens = 8;
    std::optional<int> seed;
    std::string endpoint_url;  // e.g. http://localhost:8080
    double timeout_s = 30.0;
    int max_retries = 3;
    int embed_dim = 384;  // mock embedding dimension
};

enum class BackendKind { http, mock_fixed, mock_oracle, mock_majority };

inline std::string backend_name(BackendKind b) {
    switch (b) {
        case BackendKind::http: return "http";
        case BackendKind::mock_fixed: return "mock_fixed";
        case BackendKind::mock_oracle: return "mock_oracle";
        case BackendKind::mock_majority: return "mock_majority";
    }
    throw ValidationError("bad backend kind");
}

inline BackendKind parse_backend_name(const std::string& s) {
    if (s == "http") return BackendKind::http;
    if (s == "mock_fixed") return BackendKind::mock_fixed;
    if (s == "mock_oracle") return BackendKind::mock_oracle;
    if (s == "mock_majority") return BackendKind::mock_majority;
    throw ValidationError("unknown backend '" + s + "'");
}

struct Backend {
    BackendKind kind = BackendKind::mock_fixed;
    std::string fixed_response;                  // mock_fixed
    std::map<std::string, Label> oracle_labels;  // mock_oracle: test_id -> truth
    std::string log_path;  // when set, HTTP requests/responses append here as
                           // JSONL; credential headers are always redacted
    // test hook; defaults to a real sleep
    std::function<void(double)> sleep_s = [](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
};

struct UnparseableOutput : Error {
    using Error::Error;
};

namespace detail {

inline std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    // scheme://host[:port] [/base-path]
    auto scheme_end = url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline void append_log(const std::string& log_path, nlohmann::ordered_json entry) {
    if (log_path.empty()) return;
    std::ofstream out(log_path, std::ios::app);
    if (!out) throw IoError("cannot open request log: " + log_path);
    out << entry.dump() << "\n";
}

inline std::string http_post_json(const GenerationConfig& cfg, const std::string& path,
                                  const nlohmann::json& body, const Backend& backend) {
    if (cfg.endpoint_url.empty())
        throw ConfigurationError("http backend requires endpoint_url");
    const char* key = std::getenv("LLM_API_KEY");
    if (key == nullptr || *key == '\0')
        throw ConfigurationError("http backend requires LLM_API_KEY in the environment");

    auto [base, base_path] = split_endpoint(cfg.endpoint_url);
    httplib::Client client(base);
    client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
    httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    const std::string payload = body.dump();
    double delay = 0.5;
    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            backend.sleep_s(delay);
            delay *= 2.0;  // monotone non-decreasing backoff
        }
        // the credential never reaches the log, only a redaction marker
        append_log(backend.log_path,
                   {{"event", "request"},
                    {"url", cfg.endpoint_url + path},
                    {"attempt", attempt},
                    {"headers", {{"Authorization", "Bearer [REDACTED]"}}},
                    {"body", body}});
        auto res = client.Post(base_path + path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            append_log(backend.log_path,
                       {{"event", "response"}, {"attempt", attempt}, {"error", last_error}});
            continue;
        }
        append_log(backend.log_path, {{"event", "response"},
                                      {"attempt", attempt},
                                      {"status", res->status},
                                      {"body", res->body}});
        if (res->status >= 200 && res->status < 300) return res->body;
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
        if (res->status >= 400 && res->status < 500 && res->status != 429)
            throw EndpointError(last_error);  // not transient, no retry
    }
    throw TransportError("retries exhausted; last error: " + last_error);
}

inline std::string majority_vote(const std::string& prompt_text) {
    // count labeled blocks in either template vocabulary
    auto count = [&](const std::string& needle) {
        std::size_t n = 0, pos = 0;
        while ((pos = prompt_text.find(needle, pos)) != std::string::npos) {
            ++n;
            pos += needle.size();
        }
        return n;
    };
    const std::size_t health = count("Class: Health") + count("Classification: Health");
    const std::size_t depression =
        count("Class: Depression") + count("Classification: Depressed");
    return depression > health ? "Depression" : "Health";  // tie -> Health
}

}  // namespace detail

inline std::string complete(const Prompt& prompt, const GenerationConfig& cfg,
                            const Backend& backend) {
    switch (backend.kind) {
        case BackendKind::mock_fixed:
            return backend.fixed_response;
        case BackendKind::mock_oracle: {
            auto it = backend.oracle_labels.find(prompt.test_id);
            if (it == backend.oracle_labels.end())
                throw ConfigurationError("mock_oracle has no label for '" + prompt.test_id + "'");
            return label_name(it->second);
        }
        case BackendKind::mock_majority:
            return detail::majority_vote(prompt.text);
        case BackendKind::http: {
            nlohmann::json body{{"model", cfg.model_name},
                                {"messages",
                                 {{{"role", "user"}, {"content", prompt.text}}}},
                                {"temperature", cfg.temperature},
                                {"max_tokens", cfg.max_tokens}};
            if (cfg.seed) body["seed"] = *cfg.seed;
            const std::string raw =
                detail::http_post_json(cfg, "/chat/completions", body, backend);
            try {
                const auto parsed = nlohmann::json::parse(raw);
                return parsed.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw EndpointError(std::string("malformed completion response: ") + e.what());
            }
        }
    }
    throw ValidationError("bad backend kind");
}

// Embeddings endpoint; mock backends return a seeded hash-derived vector.
inline std::vector<double> embed(const std::string& text, const GenerationConfig& cfg,
                                 const Backend& backend) {
    if (text.empty()) throw ValidationError("embed: empty text");
    if (backend.kind != BackendKind::http) {
        std::mt19937 rng(static_cast<std::uint32_t>(fnv1a(text)));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> v(static_cast<std::size_t>(cfg.embed_dim));
        for (double& x : v) x = normal(rng);
        return v;
    }
    nlohmann::json body{{"model", cfg.model_name}, {"input", text}};
    const std::string raw = detail::http_post_json(cfg, "/embeddings", body, backend);
    try {
        const auto parsed = nlohmann::json::parse(raw);
        return parsed.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw EndpointError(std::string("malformed embedding response: ") + e.what());
    }
}

// Case-insensitive keyword scan; the earlier of "depress*" / "health(y)" wins.
inline Label parse_label(const std::string& raw) {
    std::string lower(raw.size(), '\0');
    std::transform(raw.begin(), raw.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t depression_pos = std::string::npos, health_pos = std::string::npos;
    std::size_t i = 0;
    while (i < lower.size()) {
        if (!std::isalpha(static_cast<unsigned char>(lower[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < lower.size() && std::isalpha(static_cast<unsigned char>(lower[j]))) ++j;
        const std::string token = lower.substr(i, j - i);
        if (depression_pos == std::string::npos && token.starts_with("depress"))
            depression_pos = i;
        if (health_pos == std::string::npos && (token == "health" || token == "healthy"))
            health_pos = i;
        i = j;
    }
    if (depression_pos == std::string::npos && health_pos == std::string::npos)
        throw UnparseableOutput("no label keyword in completion: '" + raw + "'");
    if (health_pos == std::string::npos) return Label::Depression;
    if (depression_pos == std::string::npos) return Label::Health;
    return depression_pos < health_pos ? Label::Depression : Label::Health;
}

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline double evaluate_f1(const std::map<std::string, Label>& predictions,
                          const std::map<std::string, Label>& truth,
                          Label positive = Label::Depression,
                          ConfusionCounts* counts_out = nullptr) {
    if (predictions.size() != truth.size())
        throw ValidationError("evaluate_f1: prediction/truth key sets differ");
    ConfusionCounts c;
    for (const auto& [id, pred] : predictions) {
        auto it = truth.find(id);
        if (it == truth.end())
            throw ValidationError("evaluate_f1: no truth for '" + id + "'");
        const bool p = pred == positive, t = it->second == positive;
        if (p && t) ++c.tp;
        else if (p && !t) ++c.fp;
        else if (!p && t) ++c.fn;
        else ++c.tn;
    }
    if (counts_out) *counts_out = c;
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    return denom > 0.0 ? 2.0 * static_cast<double>(c.tp) / denom : 0.0;
}

struct TrialReport {
    std::vector<double> f1_runs;
    double f1_avg = 0.0, f1_max = 0.0, f1_std = 0.0;
    std::vector<std::uint32_t> seeds;
    std::vector<ConfusionCounts> confusions;
    std::size_t failed_runs = 0;
};

// Runs the end-to-end prediction k times with distinct seeds; a failing run
// is recorded and excluded from the aggregates.
inline TrialReport run_trials(
    const std::function<double(std::uint32_t seed, ConfusionCounts&)>& pipeline, std::size_t k,
    const std::vector<std::uint32_t>& seeds) {
    if (k < 1) throw ValidationError("run_trials: k must be >= 1");
    if (seeds.size() < k) throw ValidationError("run_trials: need a seed per run");
    TrialReport report;
    for (std::size_t i = 0; i < k; ++i) {
        try {
            ConfusionCounts c;
            const double f1 = pipeline(seeds[i], c);
            report.seeds.push_back(seeds[i]);
            report.f1_runs.push_back(f1);
            report.confusions.push_back(c);
        } catch (const std::exception& e) {
            ++report.failed_runs;
            std::fprintf(stderr, "warning: run with seed %u failed: %s\n", seeds[i], e.what());
        }
    }
    if (!report.f1_runs.empty()) {
        double sum = 0.0;
        report.f1_max = report.f1_runs.front();
        for (double f : report.f1_runs) {
            sum += f;
            report.f1_max = std::max(report.f1_max, f);
        }
        report.f1_avg = sum / static_cast<double>(report.f1_runs.size());
        if (report.f1_runs.size() > 1) {
            double ss = 0.0;
            for (double f : report.f1_runs) ss += (f - report.f1_avg) * (f - report.f1_avg);
            report.f1_std = std::sqrt(ss / static_cast<double>(report.f1_runs.size() - 1));
        }
    }
    return report;
}

inline nlohmann::ordered_json trial_report_json(const TrialReport& r) {
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.f1_runs.size(); ++i) {
        runs.push_back({{"seed", r.seeds[i]},
                        {"f1", r.f1_runs[i]},
                        {"tp", r.confusions[i].tp},
                        {"fp", r.confusions[i].fp},
                        {"fn", r.confusions[i].fn},
                        {"tn", r.confusions[i].tn}});
    }
    return nlohmann::ordered_json{{"f1_avg", r.f1_avg},     {"f1_max", r.f1_max},
                                  {"f1_std", r.f1_std},     {"failed_runs", r.failed_runs},
                                  {"runs", runs}};
}

}  // namespace speecht
