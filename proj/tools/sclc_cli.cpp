// Command-line front end: example reproduction, margin computation,
// validation runs, SCLC-vs-JLC comparison and plain simulation, with CSV
// and JSON artifacts.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "sclc/harness.hpp"

using namespace sclc;

namespace {

ExampleConfig resolve_config(int example_id, const std::string& config_path) {
  if (!config_path.empty()) return load_config_file(config_path);
  if (example_id > 0) return example_config(example_id);
  throw ConfigError("provide an example id or --config FILE");
}

Vec parse_list(const std::string& text) {
  std::vector<double> vals;
  std::string tok;
  std::stringstream ss(text);
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (...) {
      throw ConfigError("cannot parse number '" + tok + "'");
    }
  }
  Vec v(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

std::vector<Vec> parse_x0_list(const std::string& text) {
  std::vector<Vec> out;
  std::string group;
  std::stringstream ss(text);
  while (std::getline(ss, group, ';')) {
    if (!group.empty()) out.push_back(parse_list(group));
  }
  if (out.empty()) throw ConfigError("empty --x0 list");
  return out;
}

MarginMethod parse_method(const std::string& m) {
  if (m == "theory") return MarginMethod::Theory;
  if (m == "sweep") return MarginMethod::Sweep;
  if (m == "both") return MarginMethod::Both;
  throw ConfigError("method must be theory, sweep or both");
}

void print_report(const MarginReport& r) {
  auto show = [](const MarginValue& v) {
    if (std::isinf(v.value)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v.value);
    return std::string(buf);
  };
  std::cout << "example:          " << r.example << "\n";
  std::cout << "k_l:              " << r.kl << "\n";
  std::cout << "primary margins:  gamma1 = " << show(r.gamma1) << ", tau1 = " << show(r.tau1)
            << "\n";
  if (r.has_theory)
    std::cout << "whole (theory):   gamma2 = " << show(r.gamma2_theory)
              << ", tau2 = " << show(r.tau2_theory) << "\n";
  if (r.has_sweep)
    std::cout << "whole (sweep):    gamma2 = " << show(r.gamma2_swept)
              << ", tau2 = " << show(r.tau2_swept) << "   (||G0B|| = " << r.g0b_norm_swept
              << ", ||sG0B|| = " << r.sg0b_norm_swept << ")\n";
  std::cout << "combined:         gamma = " << show(r.gamma) << " [" << r.gamma.method
            << "], tau = " << show(r.tau) << " [" << r.tau.method << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilizing control by additive state decomposition and "
               "L2 gain / time-delay margin measurement"};
  app.require_subcommand(1);

  // --- example ---
  auto* cmd_example = app.add_subcommand("example", "run the full design-and-measure pipeline");
  int ex_id = 0;
  std::string ex_config, ex_out = "out", ex_method = "both";
  bool ex_serial = false;
  cmd_example->add_option("id", ex_id, "shipped example id (1|2|3)");
  cmd_example->add_option("--config", ex_config, "config file (overrides id)");
  cmd_example->add_option("--out", ex_out, "output directory");
  cmd_example->add_option("--method", ex_method, "theory|sweep|both");
  cmd_example->add_flag("--serial", ex_serial, "disable the parallel kernels");

  // --- margin ---
  auto* cmd_margin = app.add_subcommand("margin", "compute stability margins only");
  std::string mg_mode, mg_config, mg_out;
  int mg_id = 0;
  cmd_margin->add_option("mode", mg_mode, "theory|sweep")->required();
  cmd_margin->add_option("--config", mg_config, "config file");
  cmd_margin->add_option("--example", mg_id, "shipped example id");
  cmd_margin->add_option("--out", mg_out, "output directory for report.json/summary.csv");

  // --- validate ---
  auto* cmd_validate = app.add_subcommand("validate", "simulate under a perturbation gauge");
  std::string va_config, va_gain, va_delay;
  int va_id = 0;
  cmd_validate->add_option("--config", va_config, "config file");
  cmd_validate->add_option("--example", va_id, "shipped example id");
  cmd_validate->add_option("--gain", va_gain, "per-channel gains g1,g2,...");
  cmd_validate->add_option("--delay", va_delay, "per-channel delays t1,t2,... (s)");

  // --- compare-jlc ---
  auto* cmd_compare = app.add_subcommand("compare-jlc", "SCLC vs Jacobian-linearization LQR");
  std::string cj_config, cj_x0, cj_out;
  int cj_id = 0;
  cmd_compare->add_option("--config", cj_config, "config file");
  cmd_compare->add_option("--example", cj_id, "shipped example id");
  cmd_compare->add_option("--x0", cj_x0, "initial states \"v1,v2;v1,v2;...\"")->required();
  cmd_compare->add_option("--out", cj_out, "optional output directory");

  // --- simulate ---
  auto* cmd_sim = app.add_subcommand("simulate", "closed-loop run without perturbation");
  std::string si_config, si_out = "out";
  int si_id = 0;
  cmd_sim->add_option("--config", si_config, "config file");
  cmd_sim->add_option("--example", si_id, "shipped example id");
  cmd_sim->add_option("--out", si_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;  // usage problems are configuration errors
  }

  try {
    if (*cmd_example) {
      auto cfg = resolve_config(ex_id, ex_config);
      const auto policy = ex_serial ? ExecPolicy::Serial : ExecPolicy::Parallel;
      auto rep = run_example(cfg, parse_method(ex_method), ex_out, policy);
      print_report(rep);
    } else if (*cmd_margin) {
      auto cfg = resolve_config(mg_id, mg_config);
      auto rep = run_example(cfg, parse_method(mg_mode), "");
      print_report(rep);
      if (!mg_out.empty()) {
        std::filesystem::create_directories(mg_out);
        write_report_json(rep, mg_out + "/report.json");
        write_summary_csv(rep, mg_out + "/summary.csv");
      }
    } else if (*cmd_validate) {
      auto cfg = resolve_config(va_id, va_config);
      if (va_gain.empty() == va_delay.empty())
        throw ConfigError("provide exactly one of --gain or --delay");
      Perturbation pert = va_gain.empty() ? Perturbation::delay(parse_list(va_delay))
                                          : Perturbation::gain(parse_list(va_gain));
      if (pert.values.size() != cfg.B.cols())
        throw ConfigError("perturbation needs one entry per input channel");
      auto v = validate_margin(cfg, pert);
      std::cout << "bounded:              " << (v.bounded ? "yes" : "no") << "\n";
      if (v.t_blowup.has_value()) {
        std::cout << "diverged at t =       " << *v.t_blowup << " s\n";
      } else {
        std::cout << "final/initial norm:   " << v.final_to_initial_ratio << "\n";
        std::cout << "tail energy fraction: " << v.tail_energy_fraction << "\n";
      }
    } else if (*cmd_compare) {
      auto cfg = resolve_config(cj_id, cj_config);
      auto rows = compare_jlc(cfg, parse_x0_list(cj_x0));
      std::cout << "x0 | sclc | jlc | sclc_settle_s | jlc_settle_s\n";
      std::ostringstream csv;
      csv << "x0,sclc_verdict,jlc_verdict,sclc_settle,jlc_settle\n";
      for (const auto& row : rows) {
        std::ostringstream x0s;
        for (Eigen::Index i = 0; i < row.x0.size(); ++i) {
          x0s << (i ? " " : "") << row.x0[i];
        }
        auto verdict = [](bool ok, double tb) {
          return ok ? std::string("converged") : "diverged@" + std::to_string(tb);
        };
        std::cout << "[" << x0s.str() << "] | " << verdict(row.sclc_converged, row.sclc_t_blowup)
                  << " | " << verdict(row.jlc_converged, row.jlc_t_blowup) << " | "
                  << row.sclc_settle << " | " << row.jlc_settle << "\n";
        csv << x0s.str() << ',' << verdict(row.sclc_converged, row.sclc_t_blowup) << ','
            << verdict(row.jlc_converged, row.jlc_t_blowup) << ',' << row.sclc_settle << ','
            << row.jlc_settle << "\n";
      }
      if (!cj_out.empty()) {
        std::filesystem::create_directories(cj_out);
        std::ofstream f(cj_out + "/compare_jlc.csv");
        f << csv.str();
      }
    } else if (*cmd_sim) {
      auto cfg = resolve_config(si_id, si_config);
      auto plant = build_plant(cfg);
      auto ctrl = build_controller(cfg, plant);
      auto sim = simulate_closed_loop(plant, ctrl, Perturbation::none(), cfg.x0, cfg.T, cfg.dt);
      std::filesystem::create_directories(si_out);
      // one file with all signals side by side
      const std::vector<const TimeSeries*> parts = {&sim.x,  &sim.xp_hat, &sim.xs_hat, &sim.up,
                                                    &sim.us, &sim.u,      &sim.mu};
      TimeSeries merged(sim.x.dt, 0.0, 0, 0);
      int rows = 0;
      for (auto* p : parts) rows += p->channels();
      merged = TimeSeries(sim.x.dt, 0.0, rows, sim.x.samples());
      int r = 0;
      for (auto* p : parts) {
        for (int c = 0; c < p->channels(); ++c, ++r) {
          merged.data.row(r) = p->data.row(c);
          merged.names.push_back(p->names[static_cast<size_t>(c)]);
        }
      }
      write_csv_file(merged, si_out + "/timeseries.csv");
      std::cout << (sim.converged() ? "converged" : "diverged") << "; wrote " << si_out
                << "/timeseries.csv\n";
      if (!sim.converged()) return 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
