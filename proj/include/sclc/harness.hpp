#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sclc/config.hpp"
#include "sclc/margin.hpp"

namespace sclc {

enum class MarginMethod { Theory, Sweep, Both };

/// Finite-horizon boundedness proxy: converged AND terminal norm within
/// 1e-2 of the initial norm AND the tail of the energy (last 20% of the
/// horizon) below 1% of the total.
struct ValidationVerdict {
  bool bounded = false;
  double final_to_initial_ratio = 0.0;
  double tail_energy_fraction = 0.0;
  std::optional<double> t_blowup;
};

/// Full three-step pipeline: controller synthesis, primary-system margin
/// (classic SISO path for single-input plants, small-gain MIMO path
/// otherwise), whole-system margins by the requested method(s), then the
/// min combination. Writes timeseries.csv, bode CSVs, g0b.csv, report.json
/// and summary.csv into out_dir (when non-empty).
MarginReport run_example(const ExampleConfig& cfg, MarginMethod method,
                         const std::string& out_dir = "",
                         ExecPolicy policy = ExecPolicy::Parallel);

/// Closed-loop run under a perturbation gauge with the boundedness proxy.
ValidationVerdict validate_margin(const ExampleConfig& cfg, const Perturbation& pert);

struct JlcComparisonRow {
  Vec x0;
  bool sclc_converged = false;
  bool jlc_converged = false;
  double sclc_settle = kInf;  // time to ||x|| <= 0.05 ||x0||
  double jlc_settle = kInf;
  double sclc_t_blowup = 0.0;
  double jlc_t_blowup = 0.0;
};

/// SCLC vs the Jacobian-linearization LQR baseline from each initial state.
/// The baseline is designed on the unprestabilized linearization; runs use
/// an extended horizon (1.5 T) so slow escapes resolve into verdicts.
std::vector<JlcComparisonRow> compare_jlc(const ExampleConfig& cfg, const std::vector<Vec>& x0s);

void write_report_json(const MarginReport& r, const std::string& path);
void write_summary_csv(const MarginReport& r, const std::string& path);
std::string report_to_json(const MarginReport& r);

}  // namespace sclc
