#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sclc/parallel.hpp"
#include "sclc/types.hpp"

namespace sclc {

enum class Provenance { DirectEval, Swept };

/// Sampled matrix frequency response on a strictly increasing w-grid.
/// Invalid points (e.g. dwell instability at that frequency) are kept in
/// the grid but flagged and excluded from norms.
struct FrequencyResponse {
  std::vector<double> grid;     // rad/s, strictly increasing, > 0
  std::vector<CMat> values;     // p x m per grid point
  std::vector<bool> valid;      // empty means all valid
  Provenance provenance = Provenance::DirectEval;

  int rows() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
  int cols() const { return values.empty() ? 0 : static_cast<int>(values.front().cols()); }
  bool is_valid(size_t k) const { return valid.empty() || valid[k]; }
  size_t size() const { return grid.size(); }
};

/// Log-spaced grid with ppd points per decade, inclusive of both ends.
std::vector<double> log_grid(double wlo, double whi, int ppd);

using FreqEvaluator = std::function<CMat(double w)>;

struct HinfResult {
  double norm = 0.0;
  double w_peak = 0.0;
  bool peak_at_boundary = false;  // widen-range warning
};

/// sup over the log grid of the largest singular value, followed by
/// golden-section refinement around the grid maximizer until the w-interval
/// shrinks below 0.1%. `limit_at_infinity`, when given, is the w->inf value
/// (the D-term) folded into the sup; the near-DC sample is the grid's wlo.
HinfResult hinf_norm(const FreqEvaluator& G, double wlo, double whi, int ppd,
                     const std::optional<Mat>& limit_at_infinity = std::nullopt,
                     ExecPolicy policy = ExecPolicy::Parallel);

/// Grid-only variants for swept data (no refinement possible off-grid).
HinfResult hinf_norm(const FrequencyResponse& r);
/// sup over the grid of w * sigma_max(G(jw)).
HinfResult hinf_norm_freq_weighted(const FrequencyResponse& r);

/// CSV: `omega,re_11,im_11,re_12,...` blocks in row-major (i,j) order;
/// invalid points are skipped.
void write_csv(const FrequencyResponse& r, std::ostream& out);
/// SISO Bode export: omega,re,im,mag_db,phase_deg (phase unwrapped).
void write_bode_csv(const FrequencyResponse& r, std::ostream& out);
void write_bode_csv_file(const FrequencyResponse& r, const std::string& path);
void write_csv_file(const FrequencyResponse& r, const std::string& path);

}  // namespace sclc
