#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "core.hpp"

// Deterministic compartmental (stock-and-flow) SIR model:
//
//   dS/dt = -a S I
//   dI/dt =  a S I - b I
//   dR/dt =  b I
//
// integrated with fixed-step classical RK4 so that weekly samples fall on
// grid points and reruns are bit-identical.

namespace sirvar::sd {

struct Derivatives {
  double ds;
  double di;
  double dr;
};

inline Derivatives sir_derivatives(const CompartmentState& x, double a, double b) noexcept {
  const double infection = a * x.s * x.i;
  const double recovery = b * x.i;
  return {-infection, infection - recovery, recovery};
}

/// Number of RK4 steps covering `horizon_days`. Guards against 105/0.1
/// landing a hair below 1050.
inline std::size_t step_count(double horizon_days, double dt) noexcept {
  return static_cast<std::size_t>(std::floor(horizon_days / dt + 1e-9));
}

/// RK4 from (S, I, R) = (n - i0, i0, 0) with explicit rates a and b.
inline Trajectory integrate_rates(double a, double b, double n, double i0, double horizon_days,
                                  double dt = defaults::kDt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (!(horizon_days > 0.0) || !std::isfinite(horizon_days))
    throw InvalidArgument("horizon must be > 0");
  if (dt > horizon_days) throw InvalidArgument("dt must not exceed the horizon");
  if (!(a >= 0.0) || !(b >= 0.0)) throw InvalidArgument("rates must be >= 0");
  if (!(n > 0.0) || !(i0 >= 0.0) || i0 > n) throw InvalidArgument("need 0 <= i0 <= n, n > 0");

  const double tol = 1e-6 * n;
  const std::size_t steps = step_count(horizon_days, dt);

  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(steps + 1);
  CompartmentState x{n - i0, i0, 0.0};
  traj.states.push_back(x);

  auto shifted = [](const CompartmentState& base, const Derivatives& k, double h) {
    return CompartmentState{base.s + h * k.ds, base.i + h * k.di, base.r + h * k.dr};
  };

  for (std::size_t step = 1; step <= steps; ++step) {
    const Derivatives k1 = sir_derivatives(x, a, b);
    const Derivatives k2 = sir_derivatives(shifted(x, k1, dt / 2), a, b);
    const Derivatives k3 = sir_derivatives(shifted(x, k2, dt / 2), a, b);
    const Derivatives k4 = sir_derivatives(shifted(x, k3, dt), a, b);
    CompartmentState next{
        x.s + dt / 6 * (k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds),
        x.i + dt / 6 * (k1.di + 2 * k2.di + 2 * k3.di + k4.di),
        x.r + dt / 6 * (k1.dr + 2 * k2.dr + 2 * k3.dr + k4.dr),
    };

    const bool out_of_region = next.s < -tol || next.i < -tol || next.r < -tol ||
                               std::abs(next.total() - n) > tol || next.s > x.s + tol ||
                               next.r < x.r - tol || !std::isfinite(next.total());
    if (out_of_region)
      throw StepTooLarge("state left the valid region at t=" +
                         std::to_string(static_cast<double>(step) * dt) +
                         " days; reduce dt (currently " + std::to_string(dt) + ")");

    // Round-off below the tolerance is folded back onto the boundary.
    if (next.s < 0.0) next.s = 0.0;
    if (next.i < 0.0) next.i = 0.0;
    if (next.s > x.s) next.s = x.s;
    if (next.r < x.r) next.r = x.r;
    x = next;
    traj.states.push_back(x);
  }
  return traj;
}

inline Trajectory integrate(const SirParams& params, double horizon_days,
                            double dt = defaults::kDt) {
  const auto [a, b] = derived_rates(params);
  return integrate_rates(a, b, static_cast<double>(params.population()),
                         static_cast<double>(params.initial_infected()), horizon_days, dt);
}

/// Infected prevalence at the end of each week: infected[w] = I(7*(w+1)).
///
/// Exact when 7/dt is an integer; otherwise linear interpolation between the
/// two bracketing steps.
inline WeeklySeries weekly_sample(const Trajectory& traj, int weeks = defaults::kWeeks) {
  if (weeks < 1) throw InvalidArgument("weeks must be >= 1");
  if (traj.states.empty()) throw InvalidArgument("empty trajectory");
  const double needed = 7.0 * weeks;
  if (traj.duration() + 1e-9 < needed)
    throw HorizonTooShort("trajectory spans " + std::to_string(traj.duration()) +
                          " days but " + std::to_string(weeks) + " weeks need " +
                          std::to_string(needed));

  std::vector<double> infected;
  infected.reserve(static_cast<std::size_t>(weeks));
  for (int w = 0; w < weeks; ++w) {
    const double pos = 7.0 * (w + 1) / traj.dt;
    const double nearest = std::round(pos);
    double value;
    if (std::abs(pos - nearest) < 1e-9) {
      value = traj.states[static_cast<std::size_t>(nearest)].i;
    } else {
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const double frac = pos - static_cast<double>(lo);
      value = (1.0 - frac) * traj.states[lo].i + frac * traj.states[lo + 1].i;
    }
    infected.push_back(value < 0.0 ? 0.0 : value);
  }
  return WeeklySeries(std::move(infected));
}

/// integrate + weekly_sample over exactly `weeks` weeks.
inline WeeklySeries run_weekly(const SirParams& params, int weeks = defaults::kWeeks,
                               double dt = defaults::kDt) {
  const double days = 7.0 * weeks;
  // Extend to the next grid point when dt does not divide the horizon.
  const double covered = dt * std::ceil(days / dt - 1e-9);
  return weekly_sample(integrate(params, covered, dt), weeks);
}

inline double peak_infected(const Trajectory& traj) noexcept {
  double peak = 0.0;
  for (const auto& x : traj.states) peak = std::max(peak, x.i);
  return peak;
}

}  // namespace sirvar::sd
