#include "sclc/margin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "sclc/bode.hpp"
#include "sclc/sine_dwell.hpp"

namespace sclc {

namespace {

constexpr double pi = std::numbers::pi;

double sigma_max(const CMat& G) { return Eigen::JacobiSVD<CMat>(G).singularValues()[0]; }

CMat resolvent_solve(const Mat& A, const CMat& M_extra, const CMat& rhs, double w) {
  // solve (jwI - A + M_extra) X = rhs
  CMat M = -A.cast<std::complex<double>>() + M_extra;
  M.diagonal().array() += std::complex<double>(0.0, w);
  Eigen::FullPivLU<CMat> lu(M);
  if (!lu.isInvertible()) throw PoleOnGridError(w);
  return lu.solve(rhs);
}

}  // namespace

// ---------------------------------------------------------------------------
// k_l estimation
// ---------------------------------------------------------------------------

std::vector<KlProbe> make_probe_family(int n, const Vec& x0, const std::vector<double>& rates,
                                       const std::vector<double>& freqs,
                                       const std::vector<double>& amp_scales) {
  const double base = std::max(x0.norm(), 1.0);
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    dirs.push_back(e);
  }
  if (x0.norm() > 0.0) dirs.push_back(x0.normalized());

  std::vector<KlProbe> probes;
  int di = 0;
  for (const Vec& d : dirs) {
    ++di;
    for (double scale : amp_scales) {
      const double amp = scale * base;
      for (double lam : rates) {
        probes.push_back({"exp d" + std::to_string(di) + " a" + std::to_string(amp) +
                              " r" + std::to_string(lam),
                          [amp, lam, d](double t) { return Vec(amp * std::exp(-lam * t) * d); }});
      }
      for (double w : freqs) {
        probes.push_back({"sin d" + std::to_string(di) + " a" + std::to_string(amp) +
                              " w" + std::to_string(w),
                          [amp, w, d](double t) { return Vec(amp * std::sin(w * t) * d); }});
      }
    }
  }
  return probes;
}

KlEstimate estimate_kl(const NonlinearPlant& plant, const SclcController& ctrl,
                       const std::vector<KlProbe>& probes, double T, double dt, double safety,
                       ExecPolicy policy) {
  if (probes.empty()) throw ModelError("estimate_kl: probe family is empty");
  const int n = plant.n(), m = plant.m();

  // Secondary subsystem driven open-loop by a given x_p trajectory.
  auto run_secondary = [&](const std::function<Vec(double)>& xp_of_t,
                           double& us_norm, double& xp_norm) -> bool {
    Vec xp(n), total(n), us(m), fx(n);
    Vec k1(n), k2(n), k3(n), k4(n), xtmp(n);
    auto rhs = [&](double t, const Vec& xs, Vec& dxs) {
      xp = xp_of_t(t);
      total = xp;
      total += xs;
      us = ctrl.secondary.fn(xp, xs);
      fx = plant.f(total);
      dxs.noalias() = plant.A * xs;
      dxs += fx;
      dxs.noalias() += plant.B * us;
    };
    const auto steps = static_cast<Eigen::Index>(std::floor(T / dt + 1e-12));
    TimeSeries us_series(dt, 0.0, m, steps + 1);
    TimeSeries xp_series(dt, 0.0, n, steps + 1);
    Vec xs = Vec::Zero(n);
    for (Eigen::Index k = 0;; ++k) {
      const double t = static_cast<double>(k) * dt;
      xp = xp_of_t(t);
      us_series.data.col(k) = ctrl.secondary.fn(xp, xs);
      xp_series.data.col(k) = xp;
      if (k == steps) break;
      rhs(t, xs, k1);
      xtmp = xs + (0.5 * dt) * k1;
      rhs(t + 0.5 * dt, xtmp, k2);
      xtmp = xs + (0.5 * dt) * k2;
      rhs(t + 0.5 * dt, xtmp, k3);
      xtmp = xs + dt * k3;
      rhs(t + dt, xtmp, k4);
      xs += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (state_diverged(xs)) return false;
    }
    us_norm = l2_norm(us_series);
    xp_norm = l2_norm(xp_series);
    return true;
  };

  KlEstimate est;
  est.safety = safety;
  est.probe_count = static_cast<int>(probes.size());
  est.ratios.assign(probes.size(), std::numeric_limits<double>::quiet_NaN());
  est.probe_names.reserve(probes.size());
  for (const auto& p : probes) est.probe_names.push_back(p.name);

  parallel_for(static_cast<std::int64_t>(probes.size()), policy, [&](std::int64_t i) {
    double usn = 0.0, xpn = 0.0;
    if (run_secondary(probes[static_cast<size_t>(i)].xp, usn, xpn) && xpn > 1e-12) {
      est.ratios[static_cast<size_t>(i)] = usn / xpn;
    }
  });

  double zero_us = 0.0, zero_xp = 0.0;
  run_secondary([n](double) { return Vec(Vec::Zero(n)); }, zero_us, zero_xp);
  est.beta = zero_us;

  double best = 0.0;
  for (size_t i = 0; i < est.ratios.size(); ++i) {
    if (std::isnan(est.ratios[i])) {
      est.any_excluded = true;
      continue;
    }
    if (est.ratios[i] > best) {
      best = est.ratios[i];
      est.argmax_probe = static_cast<int>(i);
    }
  }
  est.kl = safety * best;
  return est;
}

// ---------------------------------------------------------------------------
// Loop operators
// ---------------------------------------------------------------------------

FrequencyResponse g_delta_response(const Mat& A, const Mat& B, const Mat& K,
                                   const StateSpaceModel& H, const DeltaEval& delta,
                                   const std::vector<double>& grid, ExecPolicy policy) {
  FrequencyResponse r;
  r.grid = grid;
  r.values.assign(grid.size(), CMat());
  r.provenance = Provenance::DirectEval;
  const auto m = B.cols();
  parallel_for(static_cast<std::int64_t>(grid.size()), policy, [&](std::int64_t i) {
    const double w = grid[static_cast<size_t>(i)];
    const CVec d = delta(w);
    const CMat Hw = freq_eval(H, w);
    const CMat BiD = B.cast<std::complex<double>>() *
                     (CMat::Identity(m, m) + CMat(d.asDiagonal())) * Hw *
                     K.cast<std::complex<double>>();
    const CMat rhs = B.cast<std::complex<double>>() * CMat(d.asDiagonal());
    r.values[static_cast<size_t>(i)] = resolvent_solve(A, BiD, rhs, w);
  });
  return r;
}

FrequencyResponse g0b_response(const Mat& A, const Mat& B, const Mat& K, const StateSpaceModel& H,
                               const std::vector<double>& grid, ExecPolicy policy) {
  FrequencyResponse r;
  r.grid = grid;
  r.values.assign(grid.size(), CMat());
  r.provenance = Provenance::DirectEval;
  parallel_for(static_cast<std::int64_t>(grid.size()), policy, [&](std::int64_t i) {
    const double w = grid[static_cast<size_t>(i)];
    const CMat Hw = freq_eval(H, w);
    const CMat BHK = B.cast<std::complex<double>>() * Hw * K.cast<std::complex<double>>();
    r.values[static_cast<size_t>(i)] = resolvent_solve(A, BHK, B.cast<std::complex<double>>(), w);
  });
  return r;
}

// ---------------------------------------------------------------------------
// Theoretical margins
// ---------------------------------------------------------------------------

namespace {

// Diagonal corner patterns for a uniform bound: +-level on all channels and
// +-level on each channel alone. sigma over the diagonal box attains its
// extrema at such corners for the rank structure here.
std::vector<Vec> gain_corners(double gamma, int m) {
  std::vector<Vec> out{Vec::Constant(m, gamma), Vec::Constant(m, -gamma)};
  if (m > 1) {
    for (int i = 0; i < m; ++i) {
      Vec v = Vec::Zero(m);
      v[i] = gamma;
      out.push_back(v);
      out.push_back(-v);
    }
  }
  return out;
}

std::vector<Vec> delay_variants(double tau, int m) {
  std::vector<Vec> out{Vec::Constant(m, tau)};
  if (m > 1) {
    for (int i = 0; i < m; ++i) {
      Vec v = Vec::Zero(m);
      v[i] = tau;
      out.push_back(v);
    }
  }
  return out;
}

// Closed-loop matrix of the primary loop with a static diagonal gain (1+e)
// applied to the control path, H realized in state space.
Mat primary_loop_matrix(const Mat& A, const Mat& B, const Mat& K, const StateSpaceModel& H,
                        const Vec& e) {
  const Mat gain = (Vec::Ones(e.size()) + e).asDiagonal();
  if (H.order() == 0) {
    return A - B * gain * H.D * K;
  }
  const auto n = A.rows();
  const auto nh = H.A.rows();
  Mat Aug(n + nh, n + nh);
  Aug.topLeftCorner(n, n) = A - B * gain * H.D * K;
  Aug.topRightCorner(n, nh) = -B * gain * H.C;
  Aug.bottomLeftCorner(nh, n) = H.B * K;
  Aug.bottomRightCorner(nh, nh) = H.A;
  return Aug;
}

// Generalized Nyquist for the delayed primary loop: with A Hurwitz, the
// loop is stable iff the eigenloci of L(jw) = diag(e^{-jw tau_i}) H K
// (jwI - A)^{-1} B do not encircle -1, i.e. det(I + L) has zero net winding.
bool delayed_primary_stable(const Mat& A, const Mat& B, const Mat& K, const StateSpaceModel& H,
                            const Vec& taus) {
  const auto m = B.cols();
  const double tau_max = taus.maxCoeff();
  auto loop = [&](double w) {
    const CMat Hw = freq_eval(H, w);
    CVec d(m);
    for (int i = 0; i < m; ++i) d[i] = std::exp(std::complex<double>(0.0, -w * taus[i]));
    const CMat res = resolvent_solve(A, CMat::Zero(A.rows(), A.rows()),
                                     B.cast<std::complex<double>>(), w);
    return CMat(CMat(d.asDiagonal()) * Hw * K.cast<std::complex<double>>() * res);
  };

  double acc = 0.0;
  bool have_prev = false;
  double prev = 0.0;
  auto visit = [&](double w) -> double {  // returns sigma of L
    const CMat L = loop(w);
    const std::complex<double> det = (CMat::Identity(m, m) + L).determinant();
    double ang = std::arg(det);
    if (have_prev) {
      double da = ang - prev;
      while (da > pi) da -= 2.0 * pi;
      while (da < -pi) da += 2.0 * pi;
      acc += da;
    }
    prev = ang;
    have_prev = true;
    return sigma_max(L);
  };

  for (double w : log_grid(1e-4, 0.5, 100)) visit(w);
  const double h = std::min(0.02, tau_max > 0.0 ? pi / (32.0 * tau_max) : 0.02);
  double w = 0.5;
  int quiet = 0;
  while (w < 1e4) {
    w += h;
    const double s = visit(w);
    if (s < 0.2 && w > 20.0) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return std::abs(acc / pi) < 0.5;
}

double bisect_margin(const std::function<bool(double)>& feasible, double initial, double rel_tol) {
  double lo = 0.0, hi = initial;
  while (hi < 1e3 && feasible(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  if (hi >= 1e3) return kInf;
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

bool gain_level_feasible(double kl, double gamma, const Mat& A, const Mat& B, const Mat& K,
                         const StateSpaceModel& H, const TheoreticalSearchConfig& cfg,
                         ExecPolicy policy) {
  const auto m = B.cols();
  for (const Vec& e : gain_corners(gamma, static_cast<int>(m))) {
    if (!is_hurwitz(primary_loop_matrix(A, B, K, H, e))) return false;
    auto eval = [&](double w) {
      const CMat Hw = freq_eval(H, w);
      const CMat gainK = B.cast<std::complex<double>>() *
                         (Mat((Vec::Ones(m) + e).asDiagonal())).cast<std::complex<double>>() * Hw *
                         K.cast<std::complex<double>>();
      const CMat rhs = (B * Mat(e.asDiagonal())).cast<std::complex<double>>();
      return resolvent_solve(A, gainK, rhs, w);
    };
    const auto norm = hinf_norm(eval, cfg.wlo, cfg.whi, cfg.ppd, std::nullopt, policy);
    if (kl * norm.norm >= 1.0) return false;
  }
  return true;
}

bool delay_level_feasible(double kl, double tau, const Mat& A, const Mat& B, const Mat& K,
                          const StateSpaceModel& H, const TheoreticalSearchConfig& cfg,
                          ExecPolicy policy) {
  const auto m = B.cols();
  for (const Vec& taus : delay_variants(tau, static_cast<int>(m))) {
    if (!delayed_primary_stable(A, B, K, H, taus)) return false;
    auto eval = [&](double w) {
      CVec d(m);
      for (int i = 0; i < m; ++i) {
        d[i] = std::exp(std::complex<double>(0.0, -w * taus[i])) - 1.0;
      }
      const CMat Hw = freq_eval(H, w);
      const CMat pert = B.cast<std::complex<double>>() *
                        (CMat::Identity(m, m) + CMat(d.asDiagonal())) * Hw *
                        K.cast<std::complex<double>>();
      const CMat rhs = B.cast<std::complex<double>>() * CMat(d.asDiagonal());
      return resolvent_solve(A, pert, rhs, w);
    };
    const auto norm = hinf_norm(eval, cfg.wlo, cfg.whi, cfg.ppd, std::nullopt, policy);
    if (kl * norm.norm >= 1.0) return false;
  }
  return true;
}

double theoretical_gain_margin(double kl, const Mat& A, const Mat& B, const Mat& K,
                               const StateSpaceModel& H, const TheoreticalSearchConfig& cfg,
                               ExecPolicy policy) {
  if (kl < 0.0) throw ModelError("theoretical_gain_margin: kl must be >= 0");
  if (kl == 0.0) return kInf;
  return bisect_margin(
      [&](double g) { return gain_level_feasible(kl, g, A, B, K, H, cfg, policy); }, 0.25,
      cfg.rel_tol);
}

double theoretical_delay_margin(double kl, const Mat& A, const Mat& B, const Mat& K,
                                const StateSpaceModel& H, const TheoreticalSearchConfig& cfg,
                                ExecPolicy policy) {
  if (kl < 0.0) throw ModelError("theoretical_delay_margin: kl must be >= 0");
  if (kl == 0.0) return kInf;
  if (!is_hurwitz(A))
    throw AnalysisError("theoretical_delay_margin: open-loop A must be Hurwitz");
  return bisect_margin(
      [&](double t) { return delay_level_feasible(kl, t, A, B, K, H, cfg, policy); }, 0.05,
      cfg.rel_tol);
}

// ---------------------------------------------------------------------------
// Frequency-sweep path
// ---------------------------------------------------------------------------

FrequencyResponse sweep_g0b(const NonlinearPlant& plant, const SclcController& ctrl,
                            const SweepConfig& cfg, ExecPolicy policy) {
  const int n = plant.n(), m = plant.m();
  const double amp = cfg.amplitude > 0.0 ? cfg.amplitude : 0.01 * std::max(cfg.x0.norm(), 1.0);

  const Perturbation delta_identity = Perturbation::uniform_gain(1.0, m);

  // The wired loop's own linearization sets the settling window (slowest
  // mode) and the stable integration step (fastest mode).
  double slow = kInf, fast = 0.0;
  {
    SimOptions wiring;
    wiring.up_gain = 0.5;
    const Mat J = closed_loop_jacobian(plant, ctrl, delta_identity, wiring);
    Eigen::EigenSolver<Mat> es(J, false);
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      slow = std::min(slow, -es.eigenvalues()[i].real());
      fast = std::max(fast, -es.eigenvalues()[i].real());
    }
    if (!(slow > 0.0)) throw AnalysisError("sweep_g0b: measurement wiring is not stable");
  }
  const double t_slow = 1.0 / slow;
  const double dt_stable = 0.4 / fast;

  // Pre-run with zero excitation: the wired loop must be stable.
  {
    SimOptions opt;
    opt.up_gain = 0.5;
    opt.record = false;
    const Vec x0_pre = Vec::Constant(n, 0.01 * std::max(cfg.x0.norm(), 1.0) / std::sqrt(double(n)));
    const double t_pre = std::max(10.0 * t_slow, 1.0);
    auto pre = simulate_closed_loop(plant, ctrl, delta_identity, x0_pre, t_pre, cfg.dt, opt);
    if (!pre.converged())
      throw AnalysisError("sweep_g0b: measurement wiring diverged in the pre-run");
  }

  const auto grid = log_grid(cfg.wlo, cfg.whi, cfg.ppd);
  const auto npts = grid.size();

  struct Slot {
    bool stable = true;
    CVec gains;
  };
  std::vector<Slot> slots(npts * static_cast<size_t>(m));

  parallel_for(static_cast<std::int64_t>(npts * static_cast<size_t>(m)), policy,
               [&](std::int64_t idx) {
                 const auto k = static_cast<size_t>(idx) % npts;
                 const int ch = static_cast<int>(static_cast<size_t>(idx) / npts);
                 const double w = grid[k];
                 const double period = 2.0 * pi / w;
                 const int settle = std::max(
                     cfg.min_settle_periods,
                     static_cast<int>(std::ceil(cfg.settle_time_constants * t_slow / period)));
                 // Per-dwell step: >= 256 samples per period keeps the
                 // forced-response error of the fixed-step integration below
                 // 0.1%, and the fastest wired-loop mode caps the step from
                 // above. Low-frequency dwells coarsen accordingly.
                 const double dt_w = std::min(period / 256.0, dt_stable);

                 Process process = [&](const TimeSeries& input) -> std::optional<TimeSeries> {
                   SimOptions opt;
                   opt.up_gain = 0.5;
                   opt.record = false;
                   opt.injection = [&input](double t, Vec& out) {
                     const double pos = t / input.dt;
                     auto k0 = static_cast<Eigen::Index>(std::floor(pos));
                     if (k0 >= input.samples() - 1) {
                       out = input.data.col(input.samples() - 1);
                       return;
                     }
                     const double f = pos - static_cast<double>(k0);
                     out = input.data.col(k0);
                     out *= (1.0 - f);
                     out += f * input.data.col(k0 + 1);
                   };
                   auto sim = simulate_closed_loop(plant, ctrl, delta_identity, Vec::Zero(n),
                                                   input.duration(), input.dt, opt);
                   if (!sim.converged()) return std::nullopt;
                   return std::move(sim.xp_hat);
                 };

                 auto dwell = sine_dwell_gain(process, w, amp, ch, m, settle,
                                              cfg.measure_periods, dt_w);
                 slots[static_cast<size_t>(idx)] = {dwell.stable, dwell.gains};
               });

  FrequencyResponse r;
  r.provenance = Provenance::Swept;
  r.grid = grid;
  r.values.assign(npts, CMat::Zero(n, m));
  r.valid.assign(npts, true);
  for (size_t k = 0; k < npts; ++k) {
    for (int ch = 0; ch < m; ++ch) {
      const auto& s = slots[static_cast<size_t>(ch) * npts + k];
      if (!s.stable) {
        r.valid[k] = false;
        continue;
      }
      r.values[k].col(ch) = s.gains;
    }
  }
  return r;
}

SweepMargins margins_from_sweep(const FrequencyResponse& g0b, double kl, double eps3,
                                double eps4) {
  if (g0b.size() == 0) throw AnalysisError("margins_from_sweep: empty response");
  if (!(eps3 > 0.0 && eps3 < 1.0 && eps4 > 0.0 && eps4 < 1.0))
    throw ModelError("margins_from_sweep: eps3, eps4 must lie in (0,1)");
  SweepMargins out;
  out.g0b_norm = hinf_norm(g0b).norm;
  out.sg0b_norm = hinf_norm_freq_weighted(g0b).norm;
  if (kl > 0.0 && out.g0b_norm > 0.0) out.gamma = (1.0 - eps3) / (out.g0b_norm * kl);
  if (kl > 0.0 && out.sg0b_norm > 0.0) out.tau = (1.0 - eps4) / (out.sg0b_norm * kl);
  return out;
}

// ---------------------------------------------------------------------------
// Primary margins
// ---------------------------------------------------------------------------

std::pair<double, double> primary_margin_siso(const FrequencyResponse& open_loop) {
  const auto mg = classic_siso_margins(open_loop);
  const double gamma = std::isinf(mg.gm_abs) ? kInf : mg.gm_abs - 1.0;
  const double tau = (std::isinf(mg.pm_deg) || mg.w_cp <= 0.0)
                         ? kInf
                         : (mg.pm_deg * pi / 180.0) / mg.w_cp;
  return {gamma, tau};
}

std::pair<double, double> primary_margin_mimo(const Mat& A, const Mat& B, const Mat& K,
                                              const StateSpaceModel& H,
                                              const TheoreticalSearchConfig& cfg,
                                              ExecPolicy policy) {
  if (!is_hurwitz(primary_loop_matrix(A, B, K, H, Vec::Zero(B.cols()))))
    throw AnalysisError("primary_margin_mimo: primary closed loop is unstable");

  auto Ti = [&](double w) {
    const CMat Hw = freq_eval(H, w);
    const CMat HK = Hw * K.cast<std::complex<double>>();
    const CMat res = resolvent_solve(A, B.cast<std::complex<double>>() * HK,
                                     B.cast<std::complex<double>>(), w);
    return CMat(HK * res);
  };

  const auto nTi = hinf_norm([&](double w) { return Ti(w); }, cfg.wlo, cfg.whi, cfg.ppd,
                             std::nullopt, policy);
  const double gamma = nTi.norm > 0.0 ? 1.0 / nTi.norm : kInf;

  const Mat limit = H.D * K * B;  // w -> inf value of w * T_i(jw)
  const auto nsTi = hinf_norm([&](double w) { return CMat(w * Ti(w)); }, cfg.wlo, cfg.whi,
                              cfg.ppd, limit, policy);
  const double tau = nsTi.norm > 0.0 ? 1.0 / nsTi.norm : kInf;
  return {gamma, tau};
}

MarginValue combine_min(const MarginValue& a, const MarginValue& b) {
  return a.value <= b.value ? a : b;
}

}  // namespace sclc
