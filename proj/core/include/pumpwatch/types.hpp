#pragma once

#include <cstdint>

namespace pumpwatch {

// Integer UTC seconds. Every timestamp in the library uses this.
using Timestamp = std::int64_t;

inline constexpr Timestamp kMinute = 60;
inline constexpr Timestamp kHour = 3600;
inline constexpr Timestamp kDay = 24 * kHour;

// Base granularity of the market feed.
inline constexpr Timestamp kMarketStep = 5 * kMinute;

constexpr Timestamp floor_to(Timestamp t, Timestamp step) {
  Timestamp q = t / step;
  if (t % step != 0 && t < 0) --q;
  return q * step;
}

constexpr Timestamp ceil_to(Timestamp t, Timestamp step) {
  Timestamp f = floor_to(t, step);
  return f == t ? t : f + step;
}

}  // namespace pumpwatch
