#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "sclc/controller.hpp"
#include "sclc/integrate.hpp"
#include "sclc/plant.hpp"
#include "sclc/timeseries.hpp"

namespace sclc {

/// Extra wiring used by the frequency-sweep measurement: an optional gain
/// on the primary-control path and an exogenous injection added at the
/// plant input (after the perturbation gauge).
struct SimOptions {
  double up_gain = 1.0;
  std::function<void(double t, Vec& out)> injection;  // plant-input addition; may be empty
  bool record = true;  // false: keep only the xp_hat series (sweep fast path)
};

struct SimResult {
  TimeSeries x, xp_hat, xs_hat, up, us, u, mu;
  SimVerdict verdict;
  std::map<std::string, double> l2;  // L2 norm per series

  bool converged() const { return !verdict.diverged; }
};

/// Full nonlinear closed loop (Fig-1(a) wiring): plant + observer + composed
/// controller, with the perturbation gauge acting on the total command.
/// All sub-states advance in one RK4 step on the combined state vector.
SimResult simulate_closed_loop(const NonlinearPlant& plant, const SclcController& ctrl,
                               const Perturbation& pert, const Vec& x0, double T, double dt,
                               const SimOptions& options = {});

/// Primary/secondary pair integrated as two coupled subsystems with their
/// own controllers (analysis wiring, perturbation fixed to none).
struct DecomposedResult {
  SimResult primary;    // x holds x_p; up holds u_p
  SimResult secondary;  // x holds x_s; us holds u_s
};
DecomposedResult simulate_decomposed(const NonlinearPlant& plant, const SclcController& ctrl,
                                     const Vec& x0, double T, double dt);

/// Plain state feedback u = -K x on the nonlinear plant (the JLC baseline).
SimResult simulate_linear_law(const NonlinearPlant& plant, const LinearLaw& law, const Vec& x0,
                              double T, double dt);

/// Finite-difference linearization of the combined closed-loop field
/// [x; xs_hat; H-state] at the origin under the given wiring (injection
/// ignored). Used to size settling windows and stable integration steps.
Mat closed_loop_jacobian(const NonlinearPlant& plant, const SclcController& ctrl,
                         const Perturbation& pert, const SimOptions& options = {});

}  // namespace sclc
