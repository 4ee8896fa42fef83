#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace speecht {

// Error hierarchy used across the library. Validation errors cover contract
// violations on inputs; format/io errors cover file problems; the remaining
// types are specific to one subsystem each.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

struct TrainingError : Error {
    TrainingError(const std::string& msg, std::size_t step)
        : Error(msg + " (step " + std::to_string(step) + ")"), step_index(step) {}
    std::size_t step_index;
};

struct NumericalError : Error {
    using Error::Error;
};

struct TransportError : Error {
    using Error::Error;
};

struct EndpointError : Error {
    using Error::Error;
};

struct ConfigurationError : Error {
    using Error::Error;
};

// FNV-1a, used to fingerprint configs and artifact inputs. Stable across
// platforms, unlike std::hash.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string fnv1a_hex(std::string_view data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace speecht
