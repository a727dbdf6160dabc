#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ilfo {

// Deterministic random stream. Every consumer owns its own Rng; independent
// streams are derived from a master seed via fork() so that changing how one
// component draws cannot shift another component's sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Derives an independent stream keyed by `tag` (splitmix64 of seed ^ tag).
  Rng fork(std::uint64_t tag) const {
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Shortest round-trip decimal representation; used everywhere a double is
// written to a file so that outputs are byte-stable and parse back exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

inline long parse_long(const std::string& s) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace ilfo
