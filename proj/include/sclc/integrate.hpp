#pragma once

#include <functional>
#include <optional>

#include "sclc/timeseries.hpp"
#include "sclc/types.hpp"

namespace sclc {

/// Divergence is a result, not an error: the validation harness relies on
/// "unstable" verdicts from blown-up runs.
struct SimVerdict {
  bool diverged = false;
  double t_blowup = 0.0;
};

inline bool state_diverged(const Vec& x) {
  return !x.allFinite() || x.norm() > kDivergenceThreshold;
}

struct IntegrateResult {
  TimeSeries series;
  SimVerdict verdict;
};

using VectorField = std::function<Vec(double t, const Vec& x)>;

/// Classical 4th-order Runge-Kutta on the uniform grid t0=0, dt, ..., T.
/// Produces floor(T/dt)+1 samples; stops early with a diverged verdict when
/// the state leaves the finite range.
IntegrateResult integrate(const VectorField& dynamics, const Vec& x0, double dt, double T);

/// One RK4 step of `f` from state x at time t.
Vec rk4_step(const VectorField& f, double t, const Vec& x, double dt);

}  // namespace sclc
