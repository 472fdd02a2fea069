#ifndef PAIRBENCH_RNG_HPP
#define PAIRBENCH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pairbench {

/// Seedable random stream with reproducible substream derivation.
///
/// The engine is std::mt19937_64 (bit-exact across platforms by the
/// standard), but all value transforms (uniform, normal, shuffle) are
/// implemented here so that draw sequences do not depend on the standard
/// library's unspecified distribution algorithms. Every run of a benchmark
/// owns a tree of streams derived from one root seed; see derive().
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Derives an independent substream from a root seed and a path of
  /// integer tags. Streams with different paths are decorrelated by
  /// splitmix64-style mixing of the accumulated state.
  static RngStream derive(std::uint64_t root,
                          std::initializer_list<std::uint64_t> path) {
    return RngStream(mix_path(root, path.begin(), path.end()));
  }

  static RngStream derive(std::uint64_t root,
                          const std::vector<std::uint64_t>& path) {
    return RngStream(mix_path(root, path.begin(), path.end()));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + uniform() * (b - a); }

  /// Uniform integer in [lo, hi], inclusive, by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Standard normal via Box-Muller (the sine branch is discarded so the
  /// draw count per call is fixed).
  double normal(double mean, double stddev) {
    // u1 in (0,1] so the log is finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    return mean + stddev * r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates; used instead of std::shuffle, whose draw sequence is
  /// implementation-defined.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t k = v.size(); k > 1; --k) {
      const std::size_t j =
          static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(k) - 1));
      std::swap(v[k - 1], v[j]);
    }
  }

private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

} // namespace pairbench

#endif // PAIRBENCH_RNG_HPP
