#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace depnet {

// Substream labels used to derive independent generators from one user seed.
// The derivation is fixed; changing it changes every seeded result.
enum class RngUse : std::uint64_t {
  NodeSelection = 0,
  ValueDraw = 1,
  InitialState = 2,
  Structure = 3,
};

namespace detail {

// SplitMix64 finalizer, used only to spread a user seed over substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
}

}  // namespace detail

/**
 * Deterministic random stream: a seeded mt19937_64 plus draw helpers.
 *
 * The helpers avoid std::*_distribution on purpose: their output is
 * implementation-defined, while the engine itself is fully specified by
 * the standard. Everything drawn here is bit-reproducible across
 * compilers and standard libraries.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, RngUse use)
      : eng_(detail::derive_seed(seed, static_cast<std::uint64_t>(use))) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Bias is below 2^-26 for the table sizes
  // this library allows, which is irrelevant at Monte Carlo scale.
  std::uint64_t next_below(std::uint64_t n) {
    auto v = static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

  // Inverse-CDF draw over a normalized row, scanned in value order.
  int draw_categorical(std::span<const double> row) {
    const double u = next_double();
    double cum = 0.0;
    int last_positive = -1;
    for (int v = 0; v < static_cast<int>(row.size()); ++v) {
      if (row[v] > 0.0) last_positive = v;
      cum += row[v];
      if (u < cum) return v;
    }
    // Rounding pushed the total below u; fall back to the last value
    // that carries mass.
    return last_positive >= 0 ? last_positive : static_cast<int>(row.size()) - 1;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace depnet
