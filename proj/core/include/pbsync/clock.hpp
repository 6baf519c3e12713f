#pragma once

#include <stdexcept>

#include "pbsync/rng.hpp"
#include "pbsync/time.hpp"

namespace pbsync {

/// Largest drift magnitude accepted by the clock model.
inline constexpr double kMaxDrift = 1e-3;

/// A node clock following C(t) = theta + (1 + rho) * t.
struct ClockState {
  Nanos theta = 0;       ///< offset, ns
  double rho = 0.0;      ///< fractional rate error (1.5e-6 is 1.5 ppm)
  TrueTime last_correction_at{};
};

/// Zero-mean timestamping noise: Gaussian, clipped at +/- 4 sigma,
/// rounded to the nearest nanosecond.
struct TimestampNoise {
  double stddev_ns = 0.0;
};

class ClockOverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Throws std::invalid_argument if |rho| exceeds kMaxDrift.
void validate(const ClockState& clock);

/// theta + round((1 + rho) * t), rounding to nearest with ties to even.
LocalTime local_time(const ClockState& clock, TrueTime t);

/// One draw of timestamp noise. Consumes no randomness when stddev is zero.
Nanos draw_noise(const TimestampNoise& noise, Rng& rng);

/// Physical-layer timestamp of an event at true time t.
LocalTime timestamp_event(const ClockState& clock, TrueTime t, const TimestampNoise& noise,
                          Rng& rng);

/// Subtracts the estimated offset to the reference. Drift is left alone.
ClockState apply_offset_correction(ClockState clock, Nanos delta_hat, TrueTime at);

/// Ground-truth offset local(a, t) - local(b, t).
inline Nanos true_offset(const ClockState& a, const ClockState& b, TrueTime t) {
  return local_time(a, t) - local_time(b, t);
}

}  // namespace pbsync
