#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace spinesim {

/// SplitMix64 finalizer; used only to decorrelate seeds of derived streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// A seeded random stream. Streams are never shared between workers; child
/// streams are derived from (parent key, child key) so results do not depend
/// on the order in which children are visited.
class RandomStream {
 public:
  using Engine = std::mt19937_64;

  explicit RandomStream(std::uint64_t key) : key_{key}, engine_{mix64(key)} {}

  std::uint64_t key() const { return key_; }

  RandomStream derive(std::uint64_t child) const { return RandomStream{mix64(key_ ^ mix64(child))}; }
  RandomStream derive(std::span<const std::uint32_t> path) const {
    std::uint64_t h = 0x51ed2701a3c4b5d7ULL ^ path.size();
    for (auto c : path) h = mix64(h ^ c);
    return derive(h);
  }

  /// Uniform on [0,1).
  double uniform() { return std::generate_canonical<double, 64>(engine_); }
  /// Uniform on (0,1], safe for log().
  double uniform_open() { return 1.0 - uniform(); }
  double exponential() { return -std::log(uniform_open()); }
  double normal() { return normal_(engine_); }
  long binomial(long n, double p) { return std::binomial_distribution<long>{n, p}(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>{0, n - 1}(engine_); }

  Engine& engine() { return engine_; }

 private:
  std::uint64_t key_;
  Engine engine_;
  std::normal_distribution<double> normal_{};
};

}  // namespace spinesim
