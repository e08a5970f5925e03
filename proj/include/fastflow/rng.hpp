#ifndef FASTFLOW_RNG_HPP
#define FASTFLOW_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fastflow {

/// Seeded random source with a fully pinned output sequence.
///
/// The engine is std::mt19937_64, whose output is fixed by the standard. Bounded integers
/// (Lemire's multiply-shift with rejection), unit doubles (top 53 bits) and shuffles are
/// implemented here instead of through <random> distributions, whose algorithms are left to
/// the library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Fisher-Yates, drawing from the back.
  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t k = items.size(); k > 1; --k) {
      const auto j = static_cast<std::size_t>(below(k));
      using std::swap;
      swap(items[k - 1], items[j]);
    }
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of one run in a sweep: the base seed folded with (param, density, replicate) indices.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t param_index, std::uint64_t density_index,
                                    std::uint64_t seed_index) {
  std::uint64_t z = mix64(base);
  z = mix64(z ^ param_index);
  z = mix64(z ^ density_index);
  return mix64(z ^ seed_index);
}

}  // namespace fastflow

#endif  // FASTFLOW_RNG_HPP
