#include "sclc/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "sclc/bode.hpp"
#include "sclc/riccati.hpp"
#include "sclc/sine_dwell.hpp"

namespace sclc {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

json margin_value_json(const MarginValue& v) {
  json j;
  j["value"] = std::isinf(v.value) ? json("inf") : json(v.value);
  if (!v.method.empty()) j["method"] = v.method;
  return j;
}

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Combined trajectory dump: x, xp_hat, xs_hat, up, us, u, mu side by side.
TimeSeries merged_series(const SimResult& sim) {
  const std::vector<const TimeSeries*> parts = {&sim.x,  &sim.xp_hat, &sim.xs_hat, &sim.up,
                                                &sim.us, &sim.u,      &sim.mu};
  int total = 0;
  for (const auto* p : parts) total += p->channels();
  TimeSeries out(sim.x.dt, sim.x.t0, total, sim.x.samples());
  int row = 0;
  for (const auto* p : parts) {
    for (int c = 0; c < p->channels(); ++c) {
      out.data.row(row) = p->data.row(c);
      out.names.push_back(c < static_cast<int>(p->names.size()) ? p->names[static_cast<size_t>(c)]
                                                                : "ch");
      ++row;
    }
  }
  return out;
}

// Sine-dwell Bode acquisition of a stable SISO linear loop y = K x,
// x' = A x + B u (the JLC "Bode at the origin" data). Falls back to the
// direct evaluation when the loop is open-loop unstable, where a physical
// sweep cannot run.
FrequencyResponse jlc_loop_bode(const Mat& A, const Mat& B, const Mat& K, double dt,
                                ExecPolicy policy) {
  const auto grid = log_grid(5e-2, 2e1, 8);
  FrequencyResponse r;
  r.grid = grid;
  r.values.assign(grid.size(), CMat::Zero(1, 1));
  if (!is_hurwitz(A)) {
    r.provenance = Provenance::DirectEval;
    StateSpaceModel loop(A, B, K, Mat::Zero(K.rows(), B.cols()));
    for (size_t i = 0; i < grid.size(); ++i) r.values[i] = freq_eval(loop, grid[i]);
    return r;
  }
  r.provenance = Provenance::Swept;
  double slow = kInf;
  {
    Eigen::EigenSolver<Mat> es(A, false);
    for (int i = 0; i < es.eigenvalues().size(); ++i) slow = std::min(slow, -es.eigenvalues()[i].real());
  }
  const double t_slow = 1.0 / slow;
  parallel_for(static_cast<std::int64_t>(grid.size()), policy, [&](std::int64_t i) {
    const double w = grid[static_cast<size_t>(i)];
    const int settle = std::max(10, static_cast<int>(std::ceil(8.0 * t_slow * w / (2.0 * pi))));
    Process proc = [&](const TimeSeries& input) -> std::optional<TimeSeries> {
      TimeSeries out(input.dt, input.t0, 1, input.samples());
      Vec x = Vec::Zero(A.rows());
      auto uat = [&](double t) {
        const double pos = t / input.dt;
        auto k0 = static_cast<Eigen::Index>(std::floor(pos));
        if (k0 >= input.samples() - 1) return input.data(0, input.samples() - 1);
        const double f = pos - static_cast<double>(k0);
        return (1.0 - f) * input.data(0, k0) + f * input.data(0, k0 + 1);
      };
      for (Eigen::Index k = 0; k < input.samples(); ++k) {
        out.data(0, k) = (K * x)(0, 0);
        if (k + 1 < input.samples()) {
          auto f = [&](double t, const Vec& z) { return Vec(A * z + B.col(0) * uat(t)); };
          x = rk4_step(f, input.time_at(k), x, input.dt);
          if (state_diverged(x)) return std::nullopt;
        }
      }
      return out;
    };
    auto dwell = sine_dwell_gain(proc, w, 1.0, 0, 1, settle, 5, dt);
    if (dwell.stable) r.values[static_cast<size_t>(i)](0, 0) = dwell.gains[0];
  });
  return r;
}

}  // namespace

MarginReport run_example(const ExampleConfig& cfg, MarginMethod method, const std::string& out_dir,
                         ExecPolicy policy) {
  const bool emit = !out_dir.empty();
  if (emit) std::filesystem::create_directories(out_dir);

  // Step (a): synthesis.
  const NonlinearPlant plant = build_plant(cfg);
  const SclcController ctrl = build_controller(cfg, plant);

  MarginReport rep;
  rep.example = cfg.name;
  rep.eps3 = cfg.eps3;
  rep.eps4 = cfg.eps4;
  rep.sweep_wlo = cfg.sweep.wlo;
  rep.sweep_whi = cfg.sweep.whi;
  rep.sweep_ppd = cfg.sweep.ppd;

  // Nominal closed-loop trajectory artifact.
  if (emit) {
    auto nominal = simulate_closed_loop(plant, ctrl, Perturbation::none(), cfg.x0, cfg.T, cfg.dt);
    write_csv_file(merged_series(nominal), out_dir + "/timeseries.csv");
  }

  // Step (b): primary-system margin.
  const auto dense_grid = log_grid(cfg.theory.wlo, cfg.theory.whi, 100);
  if (plant.m() == 1) {
    StateSpaceModel kpath(plant.A, plant.B, ctrl.K, Mat::Zero(1, 1));
    StateSpaceModel open_loop = ctrl.H.is_identity() ? kpath : series(kpath, ctrl.H);
    FrequencyResponse resp;
    resp.grid = dense_grid;
    resp.values.reserve(dense_grid.size());
    for (double w : dense_grid) resp.values.push_back(freq_eval(open_loop, w));
    auto [g1, t1] = primary_margin_siso(resp);
    rep.gamma1 = {g1, "theoretical"};
    rep.tau1 = {t1, "theoretical"};
    if (emit) write_bode_csv_file(resp, out_dir + "/bode_primary.csv");
  } else {
    auto [g1, t1] = primary_margin_mimo(plant.A, plant.B, ctrl.K, ctrl.H, cfg.theory, policy);
    rep.gamma1 = {g1, "theoretical"};
    rep.tau1 = {t1, "theoretical"};
    if (emit) {
      // per-loop Bode of the primary design, diagonal entries
      for (int i = 0; i < plant.m(); ++i) {
        FrequencyResponse resp;
        resp.grid = dense_grid;
        resp.values.reserve(dense_grid.size());
        StateSpaceModel kpath(plant.A, plant.B, ctrl.K.row(i), Mat::Zero(1, plant.m()));
        for (double w : dense_grid) {
          CMat v(1, 1);
          v(0, 0) = freq_eval(kpath, w)(0, i);
          resp.values.push_back(v);
        }
        write_bode_csv_file(resp, out_dir + "/bode_primary_loop" + std::to_string(i + 1) + ".csv");
      }
    }
  }

  // JLC comparison Bode (loop-at-a-time on the Jacobian linearization).
  if (emit) {
    const NonlinearPlant original = build_original_plant(cfg);
    const Mat A_lin = original.A + jacobian_at_origin(original.f, original.n());
    const LinearLaw jlc = jlc_controller(original, cfg.Q, cfg.R);
    for (int i = 0; i < original.m(); ++i) {
      auto bode = jlc_loop_bode(A_lin, original.B.col(i), jlc.K.row(i), cfg.dt, policy);
      const std::string suffix = original.m() == 1 ? "" : "_loop" + std::to_string(i + 1);
      write_bode_csv_file(bode, out_dir + "/bode_jlc" + suffix + ".csv");
    }
  }

  // Step (c): whole-system margins.
  const auto sweep_grid = log_grid(cfg.sweep.wlo, cfg.sweep.whi, cfg.sweep.ppd);
  const auto g0b_direct = g0b_response(plant.A, plant.B, ctrl.K, ctrl.H, sweep_grid, policy);
  rep.g0b_norm_direct = hinf_norm(g0b_direct).norm;
  rep.sg0b_norm_direct = hinf_norm_freq_weighted(g0b_direct).norm;

  // k_l from the deterministic probe family.
  {
    std::vector<double> rates;
    {
      Eigen::EigenSolver<Mat> es(plant.A - plant.B * ctrl.H.D * ctrl.K, false);
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double r = std::abs(es.eigenvalues()[i].real());
        bool dup = false;
        for (double q : rates) dup = dup || std::abs(q - r) < 1e-9;
        if (!dup) rates.push_back(r);
      }
    }
    std::vector<double> freqs = {hinf_norm(g0b_direct).w_peak,
                                 hinf_norm_freq_weighted(g0b_direct).w_peak};
    const auto probes = make_probe_family(plant.n(), cfg.x0, rates, freqs);
    const auto est = estimate_kl(plant, ctrl, probes, cfg.T, cfg.dt, 1.2, policy);
    rep.kl = est.kl;
  }

  if (method == MarginMethod::Theory || method == MarginMethod::Both) {
    rep.has_theory = true;
    rep.gamma2_theory = {
        theoretical_gain_margin(rep.kl, plant.A, plant.B, ctrl.K, ctrl.H, cfg.theory, policy),
        "theoretical"};
    rep.tau2_theory = {
        theoretical_delay_margin(rep.kl, plant.A, plant.B, ctrl.K, ctrl.H, cfg.theory, policy),
        "theoretical"};
  }
  if (method == MarginMethod::Sweep || method == MarginMethod::Both) {
    rep.has_sweep = true;
    auto swept = sweep_g0b(plant, ctrl, cfg.sweep, policy);
    for (size_t k = 0; k < swept.size(); ++k) {
      if (!swept.is_valid(k)) ++rep.sweep_invalid_points;
    }
    const auto sm = margins_from_sweep(swept, rep.kl, cfg.eps3, cfg.eps4);
    rep.g0b_norm_swept = sm.g0b_norm;
    rep.sg0b_norm_swept = sm.sg0b_norm;
    rep.gamma2_swept = {sm.gamma, "swept"};
    rep.tau2_swept = {sm.tau, "swept"};
    if (emit) write_csv_file(swept, out_dir + "/g0b.csv");
  }

  // Combination: the data-driven values are the headline when available.
  const MarginValue& g2 = rep.has_sweep ? rep.gamma2_swept : rep.gamma2_theory;
  const MarginValue& t2 = rep.has_sweep ? rep.tau2_swept : rep.tau2_theory;
  rep.gamma = combine_min(rep.gamma1, g2);
  rep.tau = combine_min(rep.tau1, t2);

  if (emit) {
    write_report_json(rep, out_dir + "/report.json");
    write_summary_csv(rep, out_dir + "/summary.csv");
  }
  return rep;
}

ValidationVerdict validate_margin(const ExampleConfig& cfg, const Perturbation& pert) {
  const NonlinearPlant plant = build_plant(cfg);
  const SclcController ctrl = build_controller(cfg, plant);
  auto sim = simulate_closed_loop(plant, ctrl, pert, cfg.x0, cfg.T, cfg.dt);

  ValidationVerdict v;
  if (!sim.converged()) {
    v.t_blowup = sim.verdict.t_blowup;
    return v;
  }
  const double x0n = cfg.x0.norm();
  const double xTn = sim.x.data.col(sim.x.samples() - 1).norm();
  v.final_to_initial_ratio = x0n > 0.0 ? xTn / x0n : xTn;

  EnergyAccumulator acc(cfg.dt);
  for (Eigen::Index k = 0; k < sim.x.samples(); ++k) acc.push(sim.x.data.col(k).squaredNorm());
  v.tail_energy_fraction = acc.total() > 0.0 ? acc.tail(0.2 * cfg.T) / acc.total() : 0.0;

  v.bounded = (x0n == 0.0 && xTn == 0.0) ||
              (v.final_to_initial_ratio <= 1e-2 && v.tail_energy_fraction <= 1e-2);
  return v;
}

std::vector<JlcComparisonRow> compare_jlc(const ExampleConfig& cfg, const std::vector<Vec>& x0s) {
  const NonlinearPlant plant = build_plant(cfg);
  const SclcController ctrl = build_controller(cfg, plant);
  const NonlinearPlant original = build_original_plant(cfg);
  const LinearLaw jlc = jlc_controller(original, cfg.Q, cfg.R);

  // Slow escapes (quadratic growth) can take longer than the nominal
  // horizon to hit the divergence threshold.
  const double T = 1.5 * cfg.T;

  auto settle_time = [&](const TimeSeries& x, double x0n) {
    if (x0n == 0.0) return 0.0;
    const double level = 0.05 * x0n;
    double t = kInf;
    for (Eigen::Index k = x.samples() - 1; k >= 0; --k) {
      if (x.data.col(k).norm() > level) {
        t = x.time_at(k) + x.dt;
        break;
      }
      t = x.time_at(k);
    }
    return t;
  };

  std::vector<JlcComparisonRow> rows;
  for (const Vec& x0 : x0s) {
    JlcComparisonRow row;
    row.x0 = x0;
    auto sclc = simulate_closed_loop(plant, ctrl, Perturbation::none(), x0, T, cfg.dt);
    row.sclc_converged = sclc.converged();
    row.sclc_t_blowup = sclc.verdict.t_blowup;
    if (sclc.converged()) row.sclc_settle = settle_time(sclc.x, x0.norm());

    auto base = simulate_linear_law(original, jlc, x0, T, cfg.dt);
    row.jlc_converged = base.converged();
    row.jlc_t_blowup = base.verdict.t_blowup;
    if (base.converged()) row.jlc_settle = settle_time(base.x, x0.norm());
    rows.push_back(row);
  }
  return rows;
}

std::string report_to_json(const MarginReport& r) {
  json j;
  j["example"] = r.example;
  j["primary"] = {{"gamma_max_1", margin_value_json(r.gamma1)},
                  {"tau_max_1", margin_value_json(r.tau1)}};
  json whole;
  if (r.has_theory) {
    whole["theoretical"] = {{"gamma_max_2", margin_value_json(r.gamma2_theory)},
                            {"tau_max_2", margin_value_json(r.tau2_theory)}};
  }
  if (r.has_sweep) {
    whole["swept"] = {{"gamma_max_2", margin_value_json(r.gamma2_swept)},
                      {"tau_max_2", margin_value_json(r.tau2_swept)},
                      {"g0b_norm", r.g0b_norm_swept},
                      {"sg0b_norm", r.sg0b_norm_swept},
                      {"invalid_grid_points", r.sweep_invalid_points}};
  }
  j["whole_system"] = whole;
  j["combined"] = {{"gamma_max", margin_value_json(r.gamma)},
                   {"tau_max", margin_value_json(r.tau)}};
  j["kl"] = r.kl;
  j["g0b_norm_direct"] = r.g0b_norm_direct;
  j["sg0b_norm_direct"] = r.sg0b_norm_direct;
  j["eps3"] = r.eps3;
  j["eps4"] = r.eps4;
  j["sweep_grid"] = {{"wlo", r.sweep_wlo}, {"whi", r.sweep_whi}, {"points_per_decade", r.sweep_ppd}};
  return j.dump(2) + "\n";
}

void write_report_json(const MarginReport& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << report_to_json(r);
}

void write_summary_csv(const MarginReport& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << "example,gamma1,tau1,gamma2,tau2,gamma,tau,kl,method\n";
  auto line = [&](const MarginValue& g2, const MarginValue& t2, const std::string& method) {
    const MarginValue g = combine_min(r.gamma1, g2);
    const MarginValue t = combine_min(r.tau1, t2);
    f << r.example << ',' << fmt(r.gamma1.value) << ',' << fmt(r.tau1.value) << ','
      << fmt(g2.value) << ',' << fmt(t2.value) << ',' << fmt(g.value) << ',' << fmt(t.value) << ','
      << fmt(r.kl) << ',' << method << '\n';
  };
  if (r.has_theory) line(r.gamma2_theory, r.tau2_theory, "theory");
  if (r.has_sweep) line(r.gamma2_swept, r.tau2_swept, "sweep");
}

}  // namespace sclc
