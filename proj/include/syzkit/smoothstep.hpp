#pragma once

namespace syzkit {

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0,1]; C^2 at both ends.
struct Smoothstep {
  double value;
  double slope;      // d/dt
  double curvature;  // d^2/dt^2
};

inline Smoothstep quintic_smoothstep(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {t3 * (t * (6.0 * t - 15.0) + 10.0), 30.0 * t2 * (t - 1.0) * (t - 1.0),
          60.0 * t * (t - 1.0) * (2.0 * t - 1.0)};
}

/// Maximum of the quintic smoothstep slope, attained at t = 1/2.
inline constexpr double kQuinticMaxSlope = 1.875;

/// Rises from 0 at x = lo to 1 at x = hi.
inline Smoothstep window_step(double x, double lo, double hi) {
  const double w = hi - lo;
  Smoothstep s = quintic_smoothstep((x - lo) / w);
  s.slope /= w;
  s.curvature /= w * w;
  return s;
}

}  // namespace syzkit
