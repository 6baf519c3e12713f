#pragma once

// Noiseless forward model of one exchange, built straight from the clock law.
// Tests compare the estimators against the offsets this model was built with.

#include "pbsync/clock.hpp"
#include "pbsync/protocol.hpp"

namespace pbsync::testing {

struct ExchangeTiming {
  TrueTime t1;         ///< Sync leaves the master
  Nanos d_ms = 0;      ///< master -> slave
  Nanos d_mx = 0;      ///< master -> listener
  Nanos gap = 0;       ///< slave holds the DelayRequest this long after Sync arrival
  Nanos d_sm = 0;      ///< slave -> master
  Nanos d_sx = 0;      ///< slave -> listener
};

inline ExchangeRecord forward_model(const ClockState& m, const ClockState& s, const ClockState& x,
                                    const ExchangeTiming& e) {
  const TrueTime t2 = e.t1 + e.d_ms;
  const TrueTime t3 = t2 + e.gap;
  ExchangeRecord r;
  r.t1_m = local_time(m, e.t1);
  r.t2_s = local_time(s, t2);
  r.t3_s = local_time(s, t3);
  r.t4_m = local_time(m, t3 + e.d_sm);
  r.t2_x = local_time(x, e.t1 + e.d_mx);
  r.t4_x = local_time(x, t3 + e.d_sx);
  return r;
}

}  // namespace pbsync::testing
