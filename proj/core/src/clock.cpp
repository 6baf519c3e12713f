#include "pbsync/clock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pbsync {

void validate(const ClockState& clock) {
  if (!(std::abs(clock.rho) <= kMaxDrift)) {
    throw std::invalid_argument("clock drift " + std::to_string(clock.rho) + " exceeds 1e-3");
  }
}

namespace {

__extension__ typedef __int128 Wide;

// round(rho * t) to nearest, ties to even, computed exactly: rho is
// mantissa * 2^shift with an integer mantissa, so the product is an exact
// 128-bit integer scaled by a power of two.
std::int64_t scaled_drift(double rho, std::uint64_t t) {
  if (rho == 0.0 || t == 0) return 0;
  int exp = 0;
  const double m = std::frexp(rho, &exp);
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(m, 53));
  const int shift = 53 - exp;  // rho = mantissa / 2^shift, shift > 0 for |rho| < 1
  const Wide prod = static_cast<Wide>(mantissa) * static_cast<Wide>(t);
  if (shift >= 120) return 0;  // |prod| < 2^117, so |rho * t| < 1/8
  const Wide q = prod >> shift;  // floor
  const Wide r = prod - (q << shift);
  const Wide half = static_cast<Wide>(1) << (shift - 1);
  const bool up = r > half || (r == half && (q & 1) != 0);
  return static_cast<std::int64_t>(up ? q + 1 : q);
}

}  // namespace

LocalTime local_time(const ClockState& clock, TrueTime t) {
  validate(clock);
  std::int64_t out = 0;
  if (t.ns > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) ||
      __builtin_add_overflow(clock.theta, static_cast<std::int64_t>(t.ns), &out) ||
      __builtin_add_overflow(out, scaled_drift(clock.rho, t.ns), &out)) {
    throw ClockOverflowError("local time overflows 64-bit nanoseconds at t=" +
                             std::to_string(t.ns));
  }
  return LocalTime{out};
}

Nanos draw_noise(const TimestampNoise& noise, Rng& rng) {
  if (noise.stddev_ns <= 0.0) return 0;
  const double limit = 4.0 * noise.stddev_ns;
  const double x = std::clamp(noise.stddev_ns * rng.gaussian(), -limit, limit);
  return static_cast<Nanos>(std::nearbyint(x));
}

LocalTime timestamp_event(const ClockState& clock, TrueTime t, const TimestampNoise& noise,
                          Rng& rng) {
  return local_time(clock, t) + draw_noise(noise, rng);
}

ClockState apply_offset_correction(ClockState clock, Nanos delta_hat, TrueTime at) {
  clock.theta -= delta_hat;
  clock.last_correction_at = at;
  return clock;
}

}  // namespace pbsync
