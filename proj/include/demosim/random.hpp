// Counter-based random streams.
//
// Every draw is a pure function of (seed, key, purpose, counter): the key
// is either a person id combined with the step, or a migration group
// combined with the step. Editing the population therefore never shifts the
// random numbers seen by unrelated persons. The mixing function is the
// SplitMix64 finaliser applied to a chained combination of the key words.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace demosim {

enum class Purpose : std::uint32_t {
  InitialAge = 1,
  Death = 2,
  Conception = 3,
  Twin = 4,
  SexAtBirth = 5,
  MigrationFlow = 6,
  MigrantSelection = 7,
  ImmigrantTemplate = 8,
  ImmigrantSynthesis = 9,
  ReturnSelection = 10,
  Test = 99,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t entity, std::int64_t step,
                                   Purpose purpose) {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ entity);
  h = splitmix64(h ^ static_cast<std::uint64_t>(step) * 0x9e3779b97f4a7c15ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return h;
}

/// UniformRandomBitGenerator over one keyed substream.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  constexpr RandomStream(std::uint64_t seed, std::uint64_t entity, std::int64_t step,
                         Purpose purpose)
      : key_(stream_key(seed, entity, step, purpose)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return splitmix64(key_ + 0xd1b54a32d192ed03ULL * ++counter_); }

  /// Uniform on [0, 1) with 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// First uniform of a keyed substream; the hot path for per-person draws.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t entity, std::int64_t step,
                            Purpose purpose) {
  return RandomStream(seed, entity, step, purpose).uniform();
}

/// Poisson quantile function at `u`. Monotone in the mean for fixed `u`,
/// so runs that differ only in a rate share their random numbers.
inline std::int64_t poisson_quantile(double mean, double u) {
  if (!(mean > 0.0)) return 0;
  if (mean < 500.0) {
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p < 1e-300 && static_cast<double>(k) > mean) break;
    }
    return k;
  }
  // Large means: start at the mode and sum the lower tail explicitly.
  const auto mode = static_cast<std::int64_t>(std::floor(mean));
  auto pmf = [mean](std::int64_t k) {
    return std::exp(static_cast<double>(k) * std::log(mean) - mean -
                    std::lgamma(static_cast<double>(k) + 1.0));
  };
  const double spread = 12.0 * std::sqrt(mean) + 10.0;
  const std::int64_t low = std::max<std::int64_t>(0, mode - static_cast<std::int64_t>(spread));
  double cdf_mode = 0.0;
  for (std::int64_t k = low; k <= mode; ++k) cdf_mode += pmf(k);
  std::int64_t k = mode;
  if (u < cdf_mode) {
    double cdf = cdf_mode;
    while (k > 0) {
      const double below = cdf - pmf(k);
      if (u >= below) break;
      cdf = below;
      --k;
    }
    return k;
  }
  double cdf = cdf_mode;
  while (u >= cdf) {
    ++k;
    const double p = pmf(k);
    cdf += p;
    if (p < 1e-300) break;
  }
  return k;
}

}  // namespace demosim
