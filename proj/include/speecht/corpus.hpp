#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "speecht/common.hpp"

namespace speecht {

enum class Label { Health, Depression };

inline std::string label_name(Label l) {
    return l == Label::Health ? "Health" : "Depression";
}

inline Label parse_label_name(const std::string& s) {
    if (s == "Health") return Label::Health;
    if (s == "Depression") return Label::Depression;
    throw ValidationError("unknown label '" + s + "'");
}

struct CorpusSample {
    std::string sample_id;
    std::optional<std::string> audio_path;
    std::optional<std::string> transcript_path;
    std::optional<std::string> landmark_path;
    std::optional<Label> label;
};

struct Corpus {
    std::string split;  // tag such as "train" or "dev"
    std::vector<CorpusSample> samples;
};

// Manifest is JSONL, one sample per line. Keys: sample_id (required),
// audio_path, transcript_path, landmark_path, label.
inline Corpus load_manifest(std::istream& in, const std::string& split = "") {
    Corpus corpus;
    corpus.split = split;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.ends_with('\r')) line.pop_back();
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("malformed manifest line: ") + e.what(), line_no);
        }
        if (!row.is_object() || !row.contains("sample_id"))
            throw ParseError("manifest line missing sample_id", line_no);
        CorpusSample s;
        s.sample_id = row.at("sample_id").get<std::string>();
        if (!seen.insert(s.sample_id).second)
            throw ValidationError("duplicate sample_id '" + s.sample_id + "'");
        auto opt_str = [&](const char* key) -> std::optional<std::string> {
            if (row.contains(key) && !row.at(key).is_null())
                return row.at(key).get<std::string>();
            return std::nullopt;
        };
        s.audio_path = opt_str("audio_path");
        s.transcript_path = opt_str("transcript_path");
        s.landmark_path = opt_str("landmark_path");
        if (auto l = opt_str("label")) s.label = parse_label_name(*l);
        if (!s.audio_path && !s.landmark_path)
            throw ValidationError("sample '" + s.sample_id +
                                  "' has neither audio_path nor landmark_path");
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

inline Corpus load_manifest(const std::string& path, const std::string& split = "") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    return load_manifest(in, split);
}

inline void save_manifest(const Corpus& corpus, std::ostream& out) {
    for (const auto& s : corpus.samples) {
        nlohmann::ordered_json row;
        row["sample_id"] = s.sample_id;
        if (s.audio_path) row["audio_path"] = *s.audio_path;
        if (s.transcript_path) row["transcript_path"] = *s.transcript_path;
        if (s.landmark_path) row["landmark_path"] = *s.landmark_path;
        if (s.label) row["label"] = label_name(*s.label);
        out << row.dump() << "\n";
    }
}

inline void save_manifest(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    save_manifest(corpus, out);
}

}  // namespace speecht
