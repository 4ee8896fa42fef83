#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "speecht/common.hpp"

namespace speecht {

// The seven landmark kinds: glottal, burst, syllabic, voiced frication,
// periodicity, frication, F0 jump.
enum class LandmarkKind : char { g = 'g', b = 'b', s = 's', v = 'v', p = 'p', f = 'f', j = 'j' };

enum class Sign : char { plus = '+', minus = '-' };

inline bool is_landmark_kind(char c) {
    return c == 'g' || c == 'b' || c == 's' || c == 'v' || c == 'p' || c == 'f' || c == 'j';
}

inline LandmarkKind parse_kind(char c) {
    if (!is_landmark_kind(c))
        throw ValidationError(std::string("unknown landmark kind '") + c + "'");
    return static_cast<LandmarkKind>(c);
}

inline Sign parse_sign(char c) {
    if (c == '+') return Sign::plus;
    if (c == '-') return Sign::minus;
    throw ValidationError(std::string("unknown landmark sign '") + c + "'");
}

struct LandmarkEvent {
    LandmarkKind kind;
    Sign sign;
    double time_s;

    bool operator==(const LandmarkEvent&) const = default;
};

inline std::string render_event(const LandmarkEvent& e) {
    return std::string{static_cast<char>(e.sign), static_cast<char>(e.kind)};
}

struct LandmarkSequence {
    std::string sample_id;
    std::vector<LandmarkEvent> events;  // non-decreasing time_s

    void sort_by_time() {
        std::stable_sort(events.begin(), events.end(),
                         [](const LandmarkEvent& a, const LandmarkEvent& b) {
                             return a.time_s < b.time_s;
                         });
    }
};

// CSV header is fixed; time is written with 6 decimal digits.
inline constexpr const char* kLandmarkCsvHeader = "sample_id,kind,sign,time_s";

inline void export_landmarks(const LandmarkSequence& seq, std::ostream& out) {
    out << kLandmarkCsvHeader << "\n";
    char buf[64];
    for (const auto& e : seq.events) {
        std::snprintf(buf, sizeof(buf), "%.6f", e.time_s);
        out << seq.sample_id << ',' << static_cast<char>(e.kind) << ','
            << static_cast<char>(e.sign) << ',' << buf << "\n";
    }
}

inline void export_landmarks(const LandmarkSequence& seq, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    export_landmarks(seq, out);
}

inline LandmarkSequence import_landmarks(std::istream& in) {
    LandmarkSequence seq;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw FormatError("landmark CSV is empty");
    ++line_no;
    if (line.ends_with('\r')) line.pop_back();
    if (line != kLandmarkCsvHeader)
        throw FormatError("landmark CSV header mismatch: got '" + line + "'");
    while (std::getline(in, line)) {
        ++line_no;
        if (line.ends_with('\r')) line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id, kind, sign, time;
        if (!std::getline(row, id, ',') || !std::getline(row, kind, ',') ||
            !std::getline(row, sign, ',') || !std::getline(row, time, ','))
            throw ParseError("malformed landmark row '" + line + "'", line_no);
        if (kind.size() != 1 || sign.size() != 1)
            throw ParseError("malformed kind/sign in row '" + line + "'", line_no);
        LandmarkEvent e{parse_kind(kind[0]), parse_sign(sign[0]), 0.0};
        try {
            std::size_t pos = 0;
            e.time_s = std::stod(time, &pos);
            if (pos != time.size()) throw std::invalid_argument(time);
        } catch (const std::exception&) {
            throw ParseError("bad time value '" + time + "'", line_no);
        }
        if (e.time_s < 0.0)
            throw ValidationError("negative landmark time " + time);
        if (seq.sample_id.empty()) seq.sample_id = id;
        seq.events.push_back(e);
    }
    seq.sort_by_time();
    return seq;
}

inline LandmarkSequence import_landmarks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open landmark file: " + path);
    auto seq = import_landmarks(in);
    return seq;
}

}  // namespace speecht
