#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace pbsync {

/// Seeded random stream used everywhere in the simulator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random>, because the standard library distributions are allowed to differ
/// between implementations and golden traces must not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal draw (Box-Muller, second value cached).
  double gaussian();

  bool bernoulli(double p);

  /// Independent stream seed derived from a run seed and a stream tag.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Stream tags used by the simulator. Each consumer owns one stream so that
/// adding or removing draws in one place never shifts another's sequence.
enum class RngStream : std::uint64_t {
  Placement = 1,
  ClockInit = 2,
  TimestampNoise = 3,
  Jitter = 4,
  Loss = 5,
  ListenerSkew = 6,
};

inline Rng make_stream(std::uint64_t seed, RngStream s) {
  return Rng(Rng::derive(seed, static_cast<std::uint64_t>(s)));
}

}  // namespace pbsync
