#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace pbsync {

/// Signed nanosecond quantity: offsets, delays, noise draws.
using Nanos = std::int64_t;

using NodeId = std::uint32_t;

inline constexpr Nanos kNanosPerMicro = 1'000;
inline constexpr Nanos kNanosPerMilli = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

/// Ground-truth simulation time, nanoseconds since simulation start.
struct TrueTime {
  std::uint64_t ns = 0;

  static constexpr TrueTime from_seconds(double s) {
    return TrueTime{static_cast<std::uint64_t>(s * 1e9 + 0.5)};
  }
  static constexpr TrueTime max() {
    return TrueTime{std::numeric_limits<std::uint64_t>::max()};
  }
  constexpr double seconds() const { return static_cast<double>(ns) * 1e-9; }

  friend constexpr auto operator<=>(TrueTime, TrueTime) = default;
};

/// Advances a true instant by a non-negative duration.
inline TrueTime operator+(TrueTime t, Nanos d) {
  if (d < 0 && static_cast<std::uint64_t>(-d) > t.ns) {
    throw std::out_of_range("TrueTime would become negative");
  }
  return TrueTime{t.ns + static_cast<std::uint64_t>(d)};
}

inline Nanos operator-(TrueTime a, TrueTime b) {
  return static_cast<Nanos>(a.ns) - static_cast<Nanos>(b.ns);
}

/// A reading of one node's own clock. Differences between readings of
/// different clocks are offsets, not durations.
struct LocalTime {
  std::int64_t ns = 0;

  friend constexpr auto operator<=>(LocalTime, LocalTime) = default;
};

inline constexpr Nanos operator-(LocalTime a, LocalTime b) { return a.ns - b.ns; }
inline constexpr LocalTime operator+(LocalTime a, Nanos d) { return LocalTime{a.ns + d}; }

}  // namespace pbsync
