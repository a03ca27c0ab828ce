#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sclc/controller.hpp"
#include "sclc/freq_response.hpp"
#include "sclc/plant.hpp"
#include "sclc/simulate.hpp"

namespace sclc {

// ---------------------------------------------------------------------------
// k_l estimation
// ---------------------------------------------------------------------------

/// One probe trajectory x_p(t) driving the secondary subsystem open-loop.
struct KlProbe {
  std::string name;
  std::function<Vec(double t)> xp;
};

struct KlEstimate {
  double kl = 0.0;
  double beta = 0.0;           // L2 norm of the zero-input secondary response
  int probe_count = 0;
  int argmax_probe = -1;
  double safety = 1.2;
  std::vector<double> ratios;  // ||u_s|| / ||x_p|| per probe (NaN: excluded)
  std::vector<std::string> probe_names;
  bool any_excluded = false;
};

/// Deterministic probe family: decaying exponentials at the primary
/// closed-loop rates and sinusoids at the peak frequencies, along each state
/// axis and the x0 direction, at amplitudes {0.1, 1, 10} * ||x0||.
std::vector<KlProbe> make_probe_family(int n, const Vec& x0, const std::vector<double>& rates,
                                       const std::vector<double>& freqs,
                                       const std::vector<double>& amp_scales = {0.1, 1.0, 10.0});

/// Drives the secondary subsystem (secondary dynamics + secondary law) from
/// zero initial state with each probe, records ||u_s||/||x_p||, and returns
/// max ratio x safety factor. Diverging probes are excluded and reported.
KlEstimate estimate_kl(const NonlinearPlant& plant, const SclcController& ctrl,
                       const std::vector<KlProbe>& probes, double T, double dt,
                       double safety = 1.2, ExecPolicy policy = ExecPolicy::Parallel);

// ---------------------------------------------------------------------------
// Loop operators
// ---------------------------------------------------------------------------

/// Diagonal perturbation evaluated on the imaginary axis.
using DeltaEval = std::function<CVec(double w)>;  // m diagonal entries

/// G_Delta(jw) = (jwI - A + B (I + Delta(jw)) H(jw) K)^{-1} B Delta(jw).
/// The factor order keeps B left of the perturbed input, matching the
/// primary dynamics; the stored K is the positive feedback gain of
/// u_p = -H K x_p.
FrequencyResponse g_delta_response(const Mat& A, const Mat& B, const Mat& K,
                                   const StateSpaceModel& H, const DeltaEval& delta,
                                   const std::vector<double>& grid,
                                   ExecPolicy policy = ExecPolicy::Parallel);

/// The Delta -> 0 linearization G_0(jw) B = (jwI - A + B H(jw) K)^{-1} B.
FrequencyResponse g0b_response(const Mat& A, const Mat& B, const Mat& K, const StateSpaceModel& H,
                               const std::vector<double>& grid,
                               ExecPolicy policy = ExecPolicy::Parallel);

// ---------------------------------------------------------------------------
// Theoretical (small-gain) margins for the whole system
// ---------------------------------------------------------------------------

struct TheoreticalSearchConfig {
  double wlo = 1e-3;
  double whi = 1e3;
  int ppd = 40;
  double rel_tol = 0.005;  // bisection terminates at 0.5% relative width
};

/// Small-gain feasibility of one gain level: the perturbed primary loop must
/// stay Hurwitz and k_l sup_w sigma(G_gamma(jw)) < 1 on the corner set
/// {+-gamma uniform, +-gamma per channel}.
bool gain_level_feasible(double kl, double gamma, const Mat& A, const Mat& B, const Mat& K,
                         const StateSpaceModel& H, const TheoreticalSearchConfig& cfg,
                         ExecPolicy policy = ExecPolicy::Parallel);

/// Same for a uniform/per-channel delay level; stability of the delayed
/// primary loop is checked by the generalized Nyquist winding of
/// det(I + L(jw)).
bool delay_level_feasible(double kl, double tau, const Mat& A, const Mat& B, const Mat& K,
                          const StateSpaceModel& H, const TheoreticalSearchConfig& cfg,
                          ExecPolicy policy = ExecPolicy::Parallel);

/// Largest feasible gamma (resp. tau) by bisection to 0.5% relative width.
/// k_l = 0 returns infinity; infeasible at 0+ returns 0.
double theoretical_gain_margin(double kl, const Mat& A, const Mat& B, const Mat& K,
                               const StateSpaceModel& H, const TheoreticalSearchConfig& cfg = {},
                               ExecPolicy policy = ExecPolicy::Parallel);
double theoretical_delay_margin(double kl, const Mat& A, const Mat& B, const Mat& K,
                                const StateSpaceModel& H, const TheoreticalSearchConfig& cfg = {},
                                ExecPolicy policy = ExecPolicy::Parallel);

// ---------------------------------------------------------------------------
// Data-driven (frequency-sweep) path
// ---------------------------------------------------------------------------

struct SweepConfig {
  double wlo = 1e-2;
  double whi = 1e2;
  int ppd = 25;
  double amplitude = 0.0;       // 0: auto (1% of max(||x0||, 1))
  int min_settle_periods = 10;  // actual settle adapts to the slowest mode
  double settle_time_constants = 8.0;  // absolute settle in units of the slowest mode
  int measure_periods = 5;
  double dt = 1e-3;  // pre-run step; each dwell picks min(period/256, stable step)
  Vec x0;            // operating point used for amplitude scaling
};

/// Simulated frequency-sweep acquisition of G_0 B: the closed loop is wired
/// with Delta = I, a 1/2 gain inserted in the primary path, excitation
/// injected at the plant input one channel at a time, and the response read
/// at the observer's primary estimate. Equivalent to G_0 B from the
/// injection point to the estimate; dwell-unstable grid points are flagged
/// invalid and excluded.
FrequencyResponse sweep_g0b(const NonlinearPlant& plant, const SclcController& ctrl,
                            const SweepConfig& cfg, ExecPolicy policy = ExecPolicy::Parallel);

/// gamma_max2 = (1-eps3) / (||G0B|| k_l), tau_max2 = (1-eps4) / (||sG0B|| k_l).
struct SweepMargins {
  double gamma = kInf;
  double tau = kInf;
  double g0b_norm = 0.0;
  double sg0b_norm = 0.0;
};
SweepMargins margins_from_sweep(const FrequencyResponse& g0b, double kl, double eps3, double eps4);

// ---------------------------------------------------------------------------
// Primary-system margins
// ---------------------------------------------------------------------------

/// SISO conversion from the classic margins: gamma = gm - 1, tau = pm/w_cp.
std::pair<double, double> primary_margin_siso(const FrequencyResponse& open_loop);

/// MIMO small-gain bounds from the input complementary sensitivity
/// T_i(jw) = H K (jwI - A + B H K)^{-1} B:
///   gamma_max1 = 1 / sup sigma(T_i),  tau_max1 = 1 / sup w sigma(T_i).
std::pair<double, double> primary_margin_mimo(const Mat& A, const Mat& B, const Mat& K,
                                              const StateSpaceModel& H,
                                              const TheoreticalSearchConfig& cfg = {},
                                              ExecPolicy policy = ExecPolicy::Parallel);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct MarginValue {
  double value = kInf;
  std::string method;  // "theoretical" | "swept"
};

struct MarginReport {
  std::string example;
  MarginValue gamma1, tau1;                  // primary-system margins
  MarginValue gamma2_theory, tau2_theory;    // whole-system, small-gain search
  MarginValue gamma2_swept, tau2_swept;      // whole-system, frequency sweep
  MarginValue gamma, tau;                    // combined headline values
  double kl = 0.0;
  double g0b_norm_swept = 0.0, sg0b_norm_swept = 0.0;
  double g0b_norm_direct = 0.0, sg0b_norm_direct = 0.0;
  double eps3 = 0.05, eps4 = 0.05;
  double sweep_wlo = 0.0, sweep_whi = 0.0;
  int sweep_ppd = 0;
  int sweep_invalid_points = 0;
  bool has_theory = false, has_sweep = false;
};

/// Element-wise min with provenance of the binding side.
MarginValue combine_min(const MarginValue& a, const MarginValue& b);

}  // namespace sclc
