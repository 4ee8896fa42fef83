#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "speecht/analysis.hpp"
#include "speecht/audio.hpp"
#include "speecht/calibration.hpp"
#include "speecht/config.hpp"
#include "speecht/detector.hpp"
#include "speecht/features.hpp"
#include "speecht/gpc.hpp"

namespace speecht {

struct StageResult {
    std::vector<std::string> written;  // paths created or updated this run
    std::vector<std::string> skipped;  // paths already up to date
    std::vector<std::string> errors;   // per-sample error messages

    bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Content-addressed write: leaves the file untouched (mtime included) when
// the bytes already match, which makes every stage idempotent.
inline bool write_if_changed(const std::filesystem::path& path, const std::string& content) {
    if (auto existing = read_file(path); existing && *existing == content) return false;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << content;
    return true;
}

inline void record(StageResult& result, const std::filesystem::path& path, bool wrote) {
    (wrote ? result.written : result.skipped).push_back(path.string());
}

}  // namespace detail

inline std::filesystem::path artifact_path(const PipelineConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.output_dir) / name;
}

inline std::filesystem::path landmark_artifact(const PipelineConfig& cfg,
                                               const std::string& sample_id) {
    return artifact_path(cfg, "landmarks") / (sample_id + ".csv");
}

inline std::string artifact_stamp(const PipelineConfig& cfg) {
    return "# config_hash: " + config_hash(cfg) + "\n";
}

inline Corpus load_split(const PipelineConfig& cfg, const std::string& split) {
    return load_manifest(split == "train" ? cfg.train_manifest : cfg.dev_manifest, split);
}

// Stage 1: landmark files per sample, from imported landmark CSVs when the
// manifest provides them and from the detector on raw audio otherwise.
inline StageResult cmd_extract(const PipelineConfig& cfg) {
    cfg.validate();
    StageResult result;
    std::vector<CorpusSample> samples;
    for (const auto& split : {"train", "dev"}) {
        const auto corpus = load_split(cfg, split);
        samples.insert(samples.end(), corpus.samples.begin(), corpus.samples.end());
    }

    struct Extracted {
        std::string content;  // landmark CSV bytes
        std::string error;
    };
    std::vector<Extracted> extracted(samples.size());
    auto process = [&](std::size_t i) {
        const auto& s = samples[i];
        try {
            LandmarkSequence seq;
            if (s.landmark_path) {
                seq = import_landmarks(*s.landmark_path);
                seq.sample_id = s.sample_id;
            } else if (s.audio_path) {
                const auto audio = read_wav(*s.audio_path);
                seq = detect(audio, cfg.detector, s.sample_id);
            } else {
                throw ValidationError("neither audio nor landmarks available");
            }
            std::ostringstream out;
            out << artifact_stamp(cfg);
            export_landmarks(seq, out);
            extracted[i].content = out.str();
        } catch (const std::exception& e) {
            extracted[i].error = "sample '" + s.sample_id + "': " + e.what();
        }
    };

    const std::size_t workers = std::min<std::size_t>(cfg.workers, samples.size());
    if (workers > 1) {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < samples.size(); i += workers) process(i);
            });
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < samples.size(); ++i) process(i);
    }

    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!extracted[i].error.empty()) {
            result.errors.push_back(extracted[i].error);
            continue;
        }
        const auto path = landmark_artifact(cfg, samples[i].sample_id);
        detail::record(result, path, detail::write_if_changed(path, extracted[i].content));
    }
    return result;
}

// Read one extracted landmark artifact back, skipping the stamp line.
inline LandmarkSequence load_extracted_landmarks(const PipelineConfig& cfg,
                                                 const std::string& sample_id) {
    const auto path = landmark_artifact(cfg, sample_id);
    std::ifstream in(path);
    if (!in)
        throw IoError("missing landmark artifact for '" + sample_id +
                      "' (run extract first): " + path.string());
    std::string first;
    if (in.peek() == '#') std::getline(in, first);
    auto seq = import_landmarks(in);
    seq.sample_id = sample_id;
    return seq;
}

inline std::vector<SampleFeatures> load_split_features(const PipelineConfig& cfg,
                                                       const std::string& split) {
    std::vector<SampleFeatures> out;
    for (const auto& s : load_split(cfg, split).samples)
        out.push_back(compute_sample_features(load_extracted_landmarks(cfg, s.sample_id),
                                              s.label));
    return out;
}

inline std::vector<SignificanceResult> run_screening(const PipelineConfig& cfg) {
    return screen_significant(load_split_features(cfg, "train"), cfg.screening);
}

// Stage 2: significance screening table and the selected-key schema.
inline StageResult cmd_screen(const PipelineConfig& cfg) {
    cfg.validate();
    StageResult result;
    const auto results = run_screening(cfg);

    std::ostringstream csv;
    csv << artifact_stamp(cfg);
    write_screening_csv(results, csv);
    const auto csv_path = artifact_path(cfg, "screening.csv");
    detail::record(result, csv_path, detail::write_if_changed(csv_path, csv.str()));

    const auto schema = make_schema(results);
    nlohmann::ordered_json sj;
    sj["config_hash"] = config_hash(cfg);
    sj["keys"] = nlohmann::ordered_json::array();
    for (const auto& k : schema.keys) sj["keys"].push_back(render_key(k));
    sj["stats"] = nlohmann::ordered_json::array();
    for (auto st : schema.stats) sj["stats"].push_back(stat_name(st));
    const auto schema_path = artifact_path(cfg, "schema.json");
    detail::record(result, schema_path,
                   detail::write_if_changed(schema_path, sj.dump(2) + "\n"));
    return result;
}

// Everything the prediction and calibration stages share.
struct PipelineData {
    Corpus train, dev;
    std::vector<SampleFeatures> train_features, dev_features;
    std::map<std::string, SampleFeatures> train_feature_map;
    FeatureSchema schema;
    std::vector<double> defaults;
    std::vector<FeatureVector> train_vectors, dev_vectors;
    std::map<std::string, Label> train_labels, dev_labels;
};

inline PipelineData load_pipeline_data(const PipelineConfig& cfg) {
    PipelineData d;
    d.train = load_split(cfg, "train");
    d.dev = load_split(cfg, "dev");
    d.train_features = load_split_features(cfg, "train");
    d.dev_features = load_split_features(cfg, "dev");
    for (const auto& f : d.train_features) d.train_feature_map[f.sample_id] = f;
    d.schema = make_schema(run_screening(cfg));
    if (d.schema.keys.empty())
        throw ValidationError("screening selected no keys; loosen alpha or check the corpus");
    d.defaults = compute_defaults(d.train_features, d.schema);
    for (const auto& f : d.train_features) {
        d.train_vectors.push_back(build_feature_vector(f, d.schema, d.defaults));
        if (f.label) d.train_labels[f.sample_id] = *f.label;
    }
    for (const auto& f : d.dev_features) {
        d.dev_vectors.push_back(build_feature_vector(f, d.schema, d.defaults));
        if (f.label) d.dev_labels[f.sample_id] = *f.label;
    }
    return d;
}

inline std::string read_transcript(const Corpus& corpus, const std::string& sample_id) {
    for (const auto& s : corpus.samples)
        if (s.sample_id == sample_id) {
            if (!s.transcript_path)
                throw ValidationError("sample '" + sample_id + "' has no transcript");
            auto text = detail::read_file(*s.transcript_path);
            if (!text) throw IoError("cannot open transcript: " + *s.transcript_path);
            while (!text->empty() && (text->back() == '\n' || text->back() == '\r'))
                text->pop_back();
            return *text;
        }
    throw ValidationError("unknown sample '" + sample_id + "'");
}

// Retrieval scores for one dev sample under the configured mode.
inline std::vector<MiScore> score_for_test(const PipelineConfig& cfg, const PipelineData& d,
                                           const MiRanker& ranker,
                                           const FeatureVector& test) {
    if (cfg.retrieval.mode == "cosine") {
        std::vector<std::pair<std::string, std::vector<double>>> train;
        for (const auto& v : d.train_vectors)
            if (v.sample_id != test.sample_id) train.emplace_back(v.sample_id, v.values);
        const auto ranked = cosine_rank(test.values, train, train.size());
        std::vector<MiScore> scores;
        for (std::size_t i = 0; i < ranked.size(); ++i)
            scores.push_back({ranked[i], static_cast<double>(ranked.size() - i),
                              MiMode::per_test});
        return scores;
    }
    if (cfg.retrieval.mode == "mi_corpus_averaged")
        return ranker.score_corpus_averaged(d.dev_vectors);
    return ranker.score(test);
}

inline Prompt build_prompt(const PipelineConfig& cfg, const PipelineData& d,
                           const RetrievalSet& set, const SampleFeatures& test) {
    if (cfg.prompting.template_id == "zero_shot")
        return assemble_zero_shot(read_transcript(d.dev, test.sample_id));
    if (cfg.prompting.template_id == "text_rag") {
        std::vector<std::pair<std::string, Label>> examples;
        for (std::size_t i = 0; i < set.n; ++i) {
            examples.emplace_back(read_transcript(d.train, set.health_ids[i]), Label::Health);
            examples.emplace_back(read_transcript(d.train, set.depression_ids[i]),
                                  Label::Depression);
        }
        auto p = assemble_text_rag(examples, read_transcript(d.dev, test.sample_id));
        p.test_id = test.sample_id;
        return p;
    }
    return assemble_timing_prompt(set, d.train_feature_map, test, d.schema.keys,
                                  cfg.prompting.format);
}

inline Backend make_backend(const PipelineConfig& cfg, const PipelineData& d) {
    Backend backend;
    if (cfg.gateway.backend == "http") backend.kind = BackendKind::http;
    else if (cfg.gateway.backend == "mock_oracle") backend.kind = BackendKind::mock_oracle;
    else if (cfg.gateway.backend == "mock_majority") backend.kind = BackendKind::mock_majority;
    else backend.kind = BackendKind::mock_fixed;
    backend.fixed_response = cfg.gateway.fixed_response;
    if (backend.kind == BackendKind::mock_oracle) backend.oracle_labels = d.dev_labels;
    if (!cfg.gateway.log_path.empty())
        backend.log_path = (std::filesystem::path(cfg.output_dir) / cfg.gateway.log_path)
                               .string();
    return backend;
}

struct PredictOutcome {
    StageResult stage;
    TrialReport report;
};

// Stage 3: retrieval, prompting, completion, parsing, and F1 over k runs.
inline PredictOutcome cmd_predict(const PipelineConfig& cfg) {
    cfg.validate();
    PredictOutcome outcome;
    const auto d = load_pipeline_data(cfg);
    if (d.dev_labels.size() != d.dev.samples.size())
        throw ValidationError("every dev sample needs a label to score F1");

    MiRankOptions ropts;
    ropts.mine = cfg.retrieval.mine;
    ropts.mine.seed = cfg.retrieval.seed;
    ropts.retrain_per_test = cfg.retrieval.retrain_per_test;
    ropts.mode = cfg.retrieval.mode == "mi_corpus_averaged" ? MiMode::corpus_averaged
                                                            : MiMode::per_test;
    const MiRanker ranker(d.train_vectors, d.schema, ropts);
    const Backend backend = make_backend(cfg, d);

    // retrieval sets and prompts are seed-independent; build them once
    std::vector<RetrievalSet> sets;
    std::vector<Prompt> prompts;
    const bool needs_retrieval = cfg.prompting.template_id != "zero_shot";
    for (std::size_t i = 0; i < d.dev_vectors.size(); ++i) {
        RetrievalSet set;
        set.test_id = d.dev_vectors[i].sample_id;
        if (needs_retrieval) {
            const auto scores = score_for_test(cfg, d, ranker, d.dev_vectors[i]);
            set = select_balanced(scores, d.train_labels, cfg.retrieval.n,
                                  d.dev_vectors[i].sample_id);
        }
        auto prompt = build_prompt(cfg, d, set, d.dev_features[i]);
        prompt.test_id = d.dev_vectors[i].sample_id;
        sets.push_back(std::move(set));
        prompts.push_back(std::move(prompt));
    }

    std::vector<std::uint32_t> seeds;
    for (std::size_t i = 0; i < cfg.gateway.k_runs; ++i)
        seeds.push_back(cfg.retrieval.seed + static_cast<std::uint32_t>(i));

    std::ostringstream completions;
    std::map<std::string, Label> first_run_predictions;
    auto one_run = [&](std::uint32_t seed, ConfusionCounts& counts) {
        GenerationConfig gen = cfg.gateway.generation;
        gen.seed = static_cast<int>(seed);
        std::map<std::string, Label> predictions;
        for (const auto& prompt : prompts) {
            const std::string raw = complete(prompt, gen, backend);
            completions << nlohmann::ordered_json{{"test_id", prompt.test_id},
                                                  {"seed", seed},
                                                  {"completion", raw}}
                               .dump()
                        << "\n";
            predictions[prompt.test_id] = parse_label(raw);
        }
        if (seed == seeds.front()) first_run_predictions = predictions;
        return evaluate_f1(predictions, d.dev_labels, Label::Depression, &counts);
    };
    outcome.report = run_trials(one_run, cfg.gateway.k_runs, seeds);

    auto& result = outcome.stage;
    const std::string stamp = artifact_stamp(cfg);

    std::ostringstream sets_out;
    for (const auto& set : sets) {
        auto j = retrieval_set_json(set);
        j["config_hash"] = config_hash(cfg);
        sets_out << j.dump() << "\n";
    }
    const auto sets_path = artifact_path(cfg, "retrieval_sets.jsonl");
    detail::record(result, sets_path, detail::write_if_changed(sets_path, sets_out.str()));

    std::ostringstream prompts_out;
    for (const auto& prompt : prompts) {
        auto j = prompt_json(prompt);
        j["config_hash"] = config_hash(cfg);
        prompts_out << j.dump() << "\n";
    }
    const auto prompts_path = artifact_path(cfg, "prompts.jsonl");
    detail::record(result, prompts_path,
                   detail::write_if_changed(prompts_path, prompts_out.str()));

    const auto completions_path = artifact_path(cfg, "completions.jsonl");
    detail::record(result, completions_path,
                   detail::write_if_changed(completions_path, completions.str()));

    std::ostringstream pred_csv;
    pred_csv << stamp << "sample_id,truth,prediction\n";
    for (const auto& [id, pred] : first_run_predictions)
        pred_csv << id << ',' << label_name(d.dev_labels.at(id)) << ',' << label_name(pred)
                 << "\n";
    const auto pred_path = artifact_path(cfg, "predictions.csv");
    detail::record(result, pred_path, detail::write_if_changed(pred_path, pred_csv.str()));

    auto report_j = trial_report_json(outcome.report);
    report_j["config_hash"] = config_hash(cfg);
    const auto report_path = artifact_path(cfg, "trial_report.json");
    detail::record(result, report_path,
                   detail::write_if_changed(report_path, report_j.dump(2) + "\n"));

    nlohmann::ordered_json seeds_j;
    seeds_j["config_hash"] = config_hash(cfg);
    seeds_j["seeds"] = outcome.report.seeds;
    const auto seeds_path = artifact_path(cfg, "seeds.json");
    detail::record(result, seeds_path,
                   detail::write_if_changed(seeds_path, seeds_j.dump(2) + "\n"));

    const auto cfg_path = artifact_path(cfg, "config_snapshot.json");
    auto cfg_j = config_json(cfg);
    cfg_j["config_hash"] = config_hash(cfg);
    detail::record(result, cfg_path, detail::write_if_changed(cfg_path, cfg_j.dump(2) + "\n"));
    return outcome;
}

struct CalibrateOutcome {
    StageResult stage;
    CalibrationReport report;
};

// Fit the probabilistic classifier on train vectors and measure calibration
// of its confidences against dev-set correctness.
inline CalibrateOutcome cmd_calibrate(const PipelineConfig& cfg) {
    cfg.validate();
    CalibrateOutcome outcome;
    const auto d = load_pipeline_data(cfg);
    if (d.train_labels.size() != d.train.samples.size() ||
        d.dev_labels.size() != d.dev.samples.size())
        throw ValidationError("calibration needs labels on every train and dev sample");

    GpcHyper hyper;
    hyper.grid_search = cfg.calibration.grid_search;
    const auto model = GpcModel::fit(d.train_vectors, hyper);

    std::vector<double> confidences;
    std::vector<bool> correct;
    std::ostringstream probs_csv;
    probs_csv << artifact_stamp(cfg) << "sample_id,p_depression,confidence,prediction,truth\n";
    char row[256];
    for (const auto& v : d.dev_vectors) {
        const double p1 = model.predict_proba(v.values);
        const Label pred = p1 > 0.5 ? Label::Depression : Label::Health;
        const Label truth = d.dev_labels.at(v.sample_id);
        confidences.push_back(confidence(p1));
        correct.push_back(pred == truth);
        std::snprintf(row, sizeof(row), "%s,%.6g,%.6g,%s,%s", v.sample_id.c_str(), p1,
                      confidence(p1), label_name(pred).c_str(), label_name(truth).c_str());
        probs_csv << row << "\n";
    }
    outcome.report = expected_calibration_error(confidences, correct, cfg.calibration.bins);

    auto& result = outcome.stage;
    const auto probs_path = artifact_path(cfg, "dev_probabilities.csv");
    detail::record(result, probs_path, detail::write_if_changed(probs_path, probs_csv.str()));

    auto report_j = calibration_report_json(outcome.report);
    report_j["config_hash"] = config_hash(cfg);
    const auto report_path = artifact_path(cfg, "calibration.json");
    detail::record(result, report_path,
                   detail::write_if_changed(report_path, report_j.dump(2) + "\n"));

    std::ostringstream reliability;
    reliability << artifact_stamp(cfg);
    write_reliability_csv(outcome.report, reliability);
    const auto rel_path = artifact_path(cfg, "reliability.csv");
    detail::record(result, rel_path, detail::write_if_changed(rel_path, reliability.str()));

    auto model_j = model.to_json();
    model_j["config_hash"] = config_hash(cfg);
    const auto model_path = artifact_path(cfg, "gpc_model.json");
    detail::record(result, model_path,
                   detail::write_if_changed(model_path, model_j.dump() + "\n"));
    return outcome;
}

inline Prompt prompt_from_json(const nlohmann::json& j) {
    Prompt p;
    p.text = j.at("text").get<std::string>();
    p.test_id = j.value("test_id", "");
    for (const auto& s : j.at("spans"))
        p.spans.push_back({s.at("key").get<std::string>(), s.at("begin").get<std::size_t>(),
                           s.at("end").get<std::size_t>()});
    return p;
}

// Attention-importance table over an exported dump, plus spectral group
// comparison when the corpus carries raw audio.
inline StageResult cmd_analyze(const PipelineConfig& cfg, const std::string& dump_path,
                               LayerGroup group = LayerGroup::all) {
    cfg.validate();
    StageResult result;
    const auto dump = AttentionDump::load(dump_path);

    const auto prompts_file = detail::read_file(artifact_path(cfg, "prompts.jsonl"));
    if (!prompts_file || prompts_file->empty())
        throw ConfigurationError("no prompt archive found; run predict first");
    std::istringstream lines(*prompts_file);
    std::string first_line;
    std::getline(lines, first_line);
    const auto prompt = prompt_from_json(nlohmann::json::parse(first_line));

    std::vector<BigramKey> keys;
    for (const auto& span : prompt.spans) {
        const auto key = parse_key(span.key);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    const auto spans = locate_pair_spans(prompt, keys);
    const auto importance = pair_attention_stats(dump, spans, group);

    std::ostringstream imp_csv;
    imp_csv << artifact_stamp(cfg);
    write_importance_csv(importance, group, dump.reduction, imp_csv);
    const auto imp_path = artifact_path(cfg, "importance.csv");
    detail::record(result, imp_path, detail::write_if_changed(imp_path, imp_csv.str()));

    // spectral comparison over samples that carry raw audio
    if (!keys.empty()) {
        const BigramKey key = keys.front();
        std::map<Label, std::vector<SpectralProfile>> profiles;
        for (const auto& split : {"train", "dev"}) {
            for (const auto& s : load_split(cfg, split).samples) {
                if (!s.audio_path || !s.label) continue;
                try {
                    const auto audio = read_wav(*s.audio_path);
                    const auto seq = load_extracted_landmarks(cfg, s.sample_id);
                    for (const auto& segment : extract_pair_segments(audio, seq, key))
                        profiles[*s.label].push_back(spectral_profile(segment));
                } catch (const std::exception& e) {
                    result.errors.push_back("sample '" + s.sample_id + "': " + e.what());
                }
            }
        }
        if (profiles.count(Label::Health) && !profiles[Label::Health].empty() &&
            profiles.count(Label::Depression) && !profiles[Label::Depression].empty()) {
            std::ostringstream cmp_csv;
            cmp_csv << artifact_stamp(cfg);
            write_group_compare_csv(group_compare(profiles), cmp_csv);
            const auto cmp_path = artifact_path(cfg, "spectral_compare.csv");
            detail::record(result, cmp_path,
                           detail::write_if_changed(cmp_path, cmp_csv.str()));
        }
    }
    return result;
}

// Feature vectors as a CSV table (one row per sample, both splits).
inline StageResult cmd_features(const PipelineConfig& cfg) {
    cfg.validate();
    StageResult result;
    const auto d = load_pipeline_data(cfg);
    std::ostringstream csv;
    csv << artifact_stamp(cfg);
    csv << "sample_id,split,label";
    for (std::size_t k = 0; k < d.schema.keys.size(); ++k)
        for (std::size_t s = 0; s < d.schema.stats.size(); ++s)
            csv << ',' << render_key(d.schema.keys[k]) << '_'
                << stat_name(d.schema.stats[s]);
    csv << "\n";
    char num[48];
    auto emit = [&](const std::vector<FeatureVector>& vectors, const char* split) {
        for (const auto& v : vectors) {
            csv << v.sample_id << ',' << split << ','
                << (v.label ? label_name(*v.label) : "");
            for (double x : v.values) {
                std::snprintf(num, sizeof(num), "%.6g", x);
                csv << ',' << num;
            }
            csv << "\n";
        }
    };
    emit(d.train_vectors, "train");
    emit(d.dev_vectors, "dev");
    const auto path = artifact_path(cfg, "feature_vectors.csv");
    detail::record(result, path, detail::write_if_changed(path, csv.str()));
    return result;
}

// Retrieval scores and balanced sets, without touching the gateway.
inline StageResult cmd_retrieve(const PipelineConfig& cfg) {
    cfg.validate();
    StageResult result;
    const auto d = load_pipeline_data(cfg);
    MiRankOptions ropts;
    ropts.mine = cfg.retrieval.mine;
    ropts.mine.seed = cfg.retrieval.seed;
    ropts.retrain_per_test = cfg.retrieval.retrain_per_test;
    const MiRanker ranker(d.train_vectors, d.schema, ropts);

    std::ostringstream scores_out, sets_out;
    for (const auto& test : d.dev_vectors) {
        const auto scores = score_for_test(cfg, d, ranker, test);
        scores_out << "# test_id: " << test.sample_id << "\n";
        write_scores_csv(scores, cfg.retrieval.seed, scores_out);
        const auto set = select_balanced(scores, d.train_labels, cfg.retrieval.n,
                                         test.sample_id);
        auto j = retrieval_set_json(set);
        j["config_hash"] = config_hash(cfg);
        sets_out << j.dump() << "\n";
    }
    const auto scores_path = artifact_path(cfg, "retrieval_scores.csv");
    detail::record(result, scores_path,
                   detail::write_if_changed(scores_path, artifact_stamp(cfg) + scores_out.str()));
    const auto sets_path = artifact_path(cfg, "retrieval_sets.jsonl");
    detail::record(result, sets_path, detail::write_if_changed(sets_path, sets_out.str()));
    return result;
}

// One-page JSON summary of whatever artifacts exist in the output directory.
inline StageResult cmd_report(const PipelineConfig& cfg) {
    cfg.validate();
    StageResult result;
    nlohmann::ordered_json report;
    report["config_hash"] = config_hash(cfg);
    nlohmann::ordered_json present = nlohmann::ordered_json::array();
    for (const char* name :
         {"screening.csv", "schema.json", "feature_vectors.csv", "retrieval_scores.csv",
          "retrieval_sets.jsonl", "prompts.jsonl", "completions.jsonl", "predictions.csv",
          "trial_report.json", "seeds.json", "calibration.json", "reliability.csv",
          "dev_probabilities.csv", "gpc_model.json", "importance.csv",
          "spectral_compare.csv", "config_snapshot.json"})
        if (std::filesystem::exists(artifact_path(cfg, name))) present.push_back(name);
    report["artifacts"] = present;
    if (auto trial = detail::read_file(artifact_path(cfg, "trial_report.json"))) {
        const auto j = nlohmann::json::parse(*trial);
        report["f1_avg"] = j.at("f1_avg");
        report["f1_max"] = j.at("f1_max");
        report["f1_std"] = j.at("f1_std");
    }
    if (auto cal = detail::read_file(artifact_path(cfg, "calibration.json")))
        report["ece"] = nlohmann::json::parse(*cal).at("ece");
    const auto path = artifact_path(cfg, "report.json");
    detail::record(result, path, detail::write_if_changed(path, report.dump(2) + "\n"));
    return result;
}

}  // namespace speecht
