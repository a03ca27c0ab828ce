#include "sclc/integrate.hpp"

#include <cmath>

namespace sclc {

Vec rk4_step(const VectorField& f, double t, const Vec& x, double dt) {
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * dt, x + (0.5 * dt) * k1);
  const Vec k3 = f(t + 0.5 * dt, x + (0.5 * dt) * k2);
  const Vec k4 = f(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

IntegrateResult integrate(const VectorField& dynamics, const Vec& x0, double dt, double T) {
  if (dt <= 0.0 || T < dt) throw ModelError("integrate: require dt > 0 and T >= dt");
  const auto steps = static_cast<Eigen::Index>(std::floor(T / dt + 1e-12));
  IntegrateResult out;
  out.series = TimeSeries(dt, 0.0, static_cast<int>(x0.size()), steps + 1);

  Vec x = x0;
  out.series.data.col(0) = x;
  for (Eigen::Index k = 0; k < steps; ++k) {
    x = rk4_step(dynamics, static_cast<double>(k) * dt, x, dt);
    if (state_diverged(x)) {
      out.verdict.diverged = true;
      out.verdict.t_blowup = static_cast<double>(k + 1) * dt;
      out.series.data.conservativeResize(Eigen::NoChange, k + 1);
      return out;
    }
    out.series.data.col(k + 1) = x;
  }
  return out;
}

}  // namespace sclc
