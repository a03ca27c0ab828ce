#include "sclc/bode.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace sclc {

std::vector<double> unwrap_phase(const FrequencyResponse& r) {
  std::vector<double> phase(r.size(), 0.0);
  constexpr double pi = std::numbers::pi;
  bool have_prev = false;
  double prev = 0.0;
  for (size_t k = 0; k < r.size(); ++k) {
    if (!r.is_valid(k)) {
      phase[k] = prev;
      continue;
    }
    double p = std::arg(r.values[k](0, 0));
    if (have_prev) {
      while (p - prev > pi) p -= 2.0 * pi;
      while (p - prev < -pi) p += 2.0 * pi;
    }
    phase[k] = p;
    prev = p;
    have_prev = true;
  }
  return phase;
}

SisoMargins classic_siso_margins(const FrequencyResponse& open_loop) {
  if (open_loop.rows() != 1 || open_loop.cols() != 1)
    throw AnalysisError("classic_siso_margins: SISO response required");

  std::vector<double> lw, lmag, ph;
  {
    const auto phase_all = unwrap_phase(open_loop);
    for (size_t k = 0; k < open_loop.size(); ++k) {
      if (!open_loop.is_valid(k)) continue;
      const double m = std::abs(open_loop.values[k](0, 0));
      if (m <= 0.0) continue;
      lw.push_back(std::log10(open_loop.grid[k]));
      lmag.push_back(std::log10(m));
      ph.push_back(phase_all[k]);
    }
  }
  if (lw.size() < 8) throw AnalysisError("classic_siso_margins: grid empty or too sparse");

  constexpr double pi = std::numbers::pi;
  SisoMargins out;

  // Phase crossovers: unwrapped phase through odd multiples of -180 deg.
  double pmin = ph[0], pmax = ph[0];
  for (double p : ph) {
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
  }
  for (long m = static_cast<long>(std::floor((pmin + pi) / (2 * pi))) - 1;
       m <= static_cast<long>(std::ceil((pmax + pi) / (2 * pi))) + 1; ++m) {
    const double target = -pi + 2.0 * pi * static_cast<double>(m);
    if (target > -1e-12) continue;  // positive-phase "crossings" are not encirclement risks
    for (size_t i = 0; i + 1 < ph.size(); ++i) {
      const double a = ph[i] - target, b = ph[i + 1] - target;
      if (a == 0.0 || a * b < 0.0) {
        const double f = a / (a - b);
        const double lmg = lmag[i] + f * (lmag[i + 1] - lmag[i]);
        const double gm = std::pow(10.0, -lmg);
        if (gm < out.gm_abs) {
          out.gm_abs = gm;
          out.w_cg = std::pow(10.0, lw[i] + f * (lw[i + 1] - lw[i]));
        }
      }
    }
  }

  // Gain crossovers: |L| through 1.
  for (size_t i = 0; i + 1 < lmag.size(); ++i) {
    const double a = lmag[i], b = lmag[i + 1];
    if (a == 0.0 || a * b < 0.0) {
      const double f = a / (a - b);
      double phi = ph[i] + f * (ph[i + 1] - ph[i]);
      // principal phase in (-2*pi, 0]
      while (phi > 0.0) phi -= 2.0 * pi;
      while (phi <= -2.0 * pi) phi += 2.0 * pi;
      const double pm = (pi + phi) * 180.0 / pi;
      if (pm < out.pm_deg) {
        out.pm_deg = pm;
        out.w_cp = std::pow(10.0, lw[i] + f * (lw[i + 1] - lw[i]));
      }
    }
  }
  return out;
}

}  // namespace sclc
