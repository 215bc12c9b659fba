#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gazezsl {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Input parsed but violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Vector/matrix sizes disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Bad configuration value. `field` is a dotted path such as "filter.ws".
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fixed by the standard; the distribution adaptors are not, so they live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    double normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives an independent stream seed from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view text, char delim);
std::vector<std::string> split_ws(std::string_view text);
std::string_view trim(std::string_view text);

// 64-bit FNV-1a, used for artifact digests.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex_digest(std::uint64_t h);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers write into
// per-index slots so results never depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

unsigned default_threads();

}  // namespace gazezsl
