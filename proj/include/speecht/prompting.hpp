#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "speecht/retrieval.hpp"
#include "speecht/timing.hpp"

namespace speecht {

enum class TemplateId { zero_shot, text_rag, timing_rag };

inline std::string template_name(TemplateId t) {
    switch (t) {
        case TemplateId::zero_shot: return "zero_shot";
        case TemplateId::text_rag: return "text_rag";
        case TemplateId::timing_rag: return "timing_rag";
    }
    throw ValidationError("bad template id");
}

struct KeySpan {
    std::string key;    // rendered bigram key
    std::size_t begin;  // [begin, end) in Prompt::text
    std::size_t end;
};

struct Prompt {
    std::string text;
    std::vector<std::string> example_ids;
    std::string test_id;
    std::vector<KeySpan> spans;
    TemplateId template_id = TemplateId::zero_shot;
};

// statistics available in a timing line; "var" is std squared
inline const std::vector<std::string>& timing_stat_names() {
    static const std::vector<std::string> names = {"mean", "var", "median", "std",
                                                   "iqr",  "min", "max"};
    return names;
}

struct TimingFormat {
    std::vector<std::string> selector = {"mean", "var"};
    bool milliseconds = false;  // render durations in ms with 0 decimals
};

namespace detail {

inline double round_half_up(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::floor(v * scale + 0.5) / scale;
}

inline std::string format_value(double v, bool milliseconds) {
    char buf[64];
    if (milliseconds)
        std::snprintf(buf, sizeof(buf), "%.0f", round_half_up(v * 1000.0, 0));
    else
        std::snprintf(buf, sizeof(buf), "%.2f", round_half_up(v, 2));
    return buf;
}

inline double timing_stat_value(const DurationStats& st, const std::string& name) {
    if (name == "var") return st.std * st.std;
    return stat_value(st, parse_stat_name(name));
}

}  // namespace detail

struct TimingLine {
    std::string key;   // rendered bigram key
    std::string text;  // e.g. "+s--v (mean: 0.08, var: 0.01)"
};

// Renders one bigram line, e.g. "+s--v (mean: 0.08, var: 0.01)".
inline TimingLine format_timing_line(const DurationStats& stats, const BigramKey& key,
                                     const TimingFormat& format = {}) {
    if (format.selector.empty()) throw ValidationError("empty timing-line selector");
    for (const auto& name : format.selector) {
        bool known = false;
        for (const auto& n : timing_stat_names()) known = known || n == name;
        if (!known) throw ValidationError("unknown timing statistic '" + name + "'");
    }
    TimingLine line;
    line.key = render_key(key);
    std::string body;
    for (std::size_t i = 0; i < format.selector.size(); ++i) {
        if (i) body += ", ";
        double v = detail::timing_stat_value(stats, format.selector[i]);
        if (format.milliseconds && format.selector[i] == "var") {
            // variance in ms^2 once durations are in ms
            v = stats.std * 1000.0;
            v = v * v;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.0f", detail::round_half_up(v, 0));
            body += format.selector[i] + ": " + buf;
            continue;
        }
        body += format.selector[i] + ": " + detail::format_value(v, format.milliseconds);
    }
    line.text = line.key + " (" + body + ")";
    return line;
}

// Parses a rendered timing line back to (key, stat values).
inline std::pair<BigramKey, std::map<std::string, double>> parse_timing_line(
    const std::string& text) {
    const auto open = text.find(" (");
    if (open == std::string::npos || !text.ends_with(')'))
        throw FormatError("bad timing line '" + text + "'");
    const BigramKey key = parse_key(text.substr(0, open));
    std::map<std::string, double> values;
    std::string body = text.substr(open + 2, text.size() - open - 3);
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto colon = body.find(": ", pos);
        if (colon == std::string::npos) throw FormatError("bad timing line '" + text + "'");
        const std::string name = body.substr(pos, colon - pos);
        auto comma = body.find(", ", colon);
        const std::string num = body.substr(
            colon + 2, comma == std::string::npos ? std::string::npos : comma - colon - 2);
        values[name] = std::stod(num);
        pos = comma == std::string::npos ? body.size() : comma + 2;
    }
    return {key, values};
}

inline constexpr const char* kZeroShotHeader =
    "You are a mental health expert. \n"
    "\n"
    "Your task is to classify if a patient is depressed or healthy based on their dialogue.\n"
    "\n"
    "You must respond with ONLY ONE WORD: either 'Depressed' or 'Health'.\n";

inline constexpr const char* kTimingHeader =
    "The task is to classify patients as 'Depression' or 'Health' based on their statistical "
    "feature patterns. \n"
    "\n"
    "Each example below shows a sequence of statistical values followed by the correct "
    "classification Class.\n";

inline Prompt assemble_zero_shot(const std::string& dialogue) {
    if (dialogue.empty()) throw ValidationError("empty dialogue");
    Prompt p;
    p.template_id = TemplateId::zero_shot;
    p.text = std::string(kZeroShotHeader) + "\nConversation:\n" + dialogue + "\n\nDiagnosis:";
    return p;
}

inline Prompt assemble_text_rag(
    const std::vector<std::pair<std::string, Label>>& examples,  // (dialogue, label)
    const std::string& test_dialogue) {
    if (examples.empty()) throw ValidationError("text-RAG needs at least one example");
    Prompt p;
    p.template_id = TemplateId::text_rag;
    std::string text = std::string(kZeroShotHeader) +
                       "\nHere are some example cases with their classifications:\n";
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& [dialogue, label] = examples[i];
        const std::string rendered = label == Label::Health ? "Health" : "Depressed";
        text += "\nCase " + std::to_string(i + 1) + ":\n" + dialogue +
                "\n\nClassification: " + rendered + "\n";
    }
    text += "\nNow classify the following case with ONLY ONE WORD (Depressed or Health):\n\n" +
            test_dialogue + "\n\nClassification:";
    p.text = std::move(text);
    return p;
}

// Timing-RAG prompt: header, example blocks alternating Health/Depression
// (Health first), then the unlabeled test block. Every bigram-key occurrence
// is recorded as a character span.
inline Prompt assemble_timing_prompt(const RetrievalSet& retrieved,
                                     const std::map<std::string, SampleFeatures>& features,
                                     const SampleFeatures& test,
                                     const std::vector<BigramKey>& selected_keys,
                                     const TimingFormat& format = {}) {
    if (retrieved.health_ids.empty() && retrieved.depression_ids.empty())
        throw ValidationError("empty retrieval set");
    if (selected_keys.empty()) throw ValidationError("no selected keys");

    Prompt p;
    p.template_id = TemplateId::timing_rag;
    p.test_id = test.sample_id;
    std::string text = std::string(kTimingHeader);

    auto append_block = [&](const SampleFeatures& sample, const std::string& label_line) {
        text += "\n";
        for (const auto& key : selected_keys) {
            auto it = sample.stats.find(key);
            if (it == sample.stats.end()) continue;
            const TimingLine line = format_timing_line(it->second, key, format);
            p.spans.push_back({line.key, text.size(), text.size() + line.key.size()});
            text += line.text + "\n";
        }
        text += label_line;
    };

    const std::size_t rounds = std::max(retrieved.health_ids.size(),
                                        retrieved.depression_ids.size());
    for (std::size_t i = 0; i < rounds; ++i) {
        for (int cls = 0; cls < 2; ++cls) {
            const auto& ids = cls == 0 ? retrieved.health_ids : retrieved.depression_ids;
            if (i >= ids.size()) continue;
            auto it = features.find(ids[i]);
            if (it == features.end())
                throw ValidationError("missing features for retrieved id '" + ids[i] + "'");
            append_block(it->second,
                         std::string("Class: ") + (cls == 0 ? "Health" : "Depression") + "\n");
            p.example_ids.push_back(ids[i]);
        }
    }
    append_block(test, "Class:");
    p.text = std::move(text);
    return p;
}

inline nlohmann::ordered_json prompt_json(const Prompt& p) {
    nlohmann::ordered_json spans = nlohmann::ordered_json::array();
    for (const auto& s : p.spans)
        spans.push_back({{"key", s.key}, {"begin", s.begin}, {"end", s.end}});
    return nlohmann::ordered_json{{"test_id", p.test_id},
                                  {"template_id", template_name(p.template_id)},
                                  {"text", p.text},
                                  {"example_ids", p.example_ids},
                                  {"spans", spans}};
}

}  // namespace speecht
