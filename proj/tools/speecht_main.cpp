#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "speecht/pipeline.hpp"

namespace {

int report_stage(const std::string& name, const speecht::StageResult& result) {
    std::printf("%s: %zu written, %zu up-to-date, %zu errors\n", name.c_str(),
                result.written.size(), result.skipped.size(), result.errors.size());
    for (const auto& e : result.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
    return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"speecht: landmark timing pipeline for speech-based depression screening"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir_override;
    std::int64_t seed_override = -1;
    std::int64_t workers_override = -1;
    app.add_option("--config", config_path, "pipeline config JSON")->required();
    app.add_option("--output-dir", output_dir_override, "override config output_dir");
    app.add_option("--seed", seed_override, "override retrieval/run seed");
    app.add_option("--workers", workers_override, "override worker count");

    auto* extract = app.add_subcommand("extract", "detect or import landmarks per sample");
    auto* features = app.add_subcommand("features", "export the feature-vector table");
    auto* screen = app.add_subcommand("screen", "significance screening of bigram keys");
    auto* retrieve = app.add_subcommand("retrieve", "rank and select retrieval examples");
    auto* predict = app.add_subcommand("predict", "prompt the LLM and score F1");
    auto* calibrate = app.add_subcommand("calibrate", "fit the classifier and measure ECE");
    auto* analyze = app.add_subcommand("analyze", "attention importance and spectral tables");
    auto* report = app.add_subcommand("report", "summarize existing artifacts");

    std::string dump_path, layer_group = "all";
    analyze->add_option("--dump", dump_path, "attention dump JSON")->required();
    analyze->add_option("--layers", layer_group, "layer group: early|middle|final|all");

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = speecht::load_config(config_path);
        if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
        if (seed_override >= 0)
            cfg.retrieval.seed = static_cast<std::uint32_t>(seed_override);
        if (workers_override > 0) cfg.workers = static_cast<std::size_t>(workers_override);
        cfg.validate();

        if (extract->parsed()) return report_stage("extract", speecht::cmd_extract(cfg));
        if (features->parsed()) return report_stage("features", speecht::cmd_features(cfg));
        if (screen->parsed()) return report_stage("screen", speecht::cmd_screen(cfg));
        if (retrieve->parsed()) return report_stage("retrieve", speecht::cmd_retrieve(cfg));
        if (predict->parsed()) {
            const auto outcome = speecht::cmd_predict(cfg);
            std::printf("predict: f1_avg=%.4f f1_max=%.4f f1_std=%.4f (%zu/%zu runs)\n",
                        outcome.report.f1_avg, outcome.report.f1_max, outcome.report.f1_std,
                        outcome.report.f1_runs.size(),
                        outcome.report.f1_runs.size() + outcome.report.failed_runs);
            const int rc = report_stage("predict", outcome.stage);
            return outcome.report.failed_runs > 0 ? 1 : rc;
        }
        if (calibrate->parsed()) {
            const auto outcome = speecht::cmd_calibrate(cfg);
            std::printf("calibrate: ece=%.4f over %zu samples\n", outcome.report.ece,
                        outcome.report.n);
            return report_stage("calibrate", outcome.stage);
        }
        if (analyze->parsed())
            return report_stage("analyze",
                                speecht::cmd_analyze(cfg, dump_path,
                                                     speecht::parse_layer_group(layer_group)));
        if (report->parsed()) return report_stage("report", speecht::cmd_report(cfg));
    } catch (const speecht::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
