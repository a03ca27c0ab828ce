#include "sclc/freq_response.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "sclc/bode.hpp"

namespace sclc {

namespace {

double sigma_max(const CMat& G) {
  return Eigen::JacobiSVD<CMat>(G).singularValues()[0];
}

}  // namespace

std::vector<double> log_grid(double wlo, double whi, int ppd) {
  if (wlo <= 0.0 || whi <= wlo || ppd < 1) throw ModelError("log_grid: invalid range");
  const double decades = std::log10(whi / wlo);
  const auto n = static_cast<int>(std::round(decades * ppd));
  std::vector<double> g(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    g[static_cast<size_t>(i)] = wlo * std::pow(10.0, decades * i / n);
  }
  g.back() = whi;
  return g;
}

HinfResult hinf_norm(const FreqEvaluator& G, double wlo, double whi, int ppd,
                     const std::optional<Mat>& limit_at_infinity, ExecPolicy policy) {
  // a grid point landing exactly on an imaginary-axis pole is perturbed
  auto eval = [&](double w) {
    try {
      return sigma_max(G(w));
    } catch (const PoleOnGridError&) {
      return sigma_max(G(w * (1.0 + 1e-9) + 1e-300));
    }
  };
  const auto grid = log_grid(wlo, whi, ppd);
  std::vector<double> sv(grid.size());
  parallel_for(static_cast<std::int64_t>(grid.size()), policy,
               [&](std::int64_t i) { sv[static_cast<size_t>(i)] = eval(grid[static_cast<size_t>(i)]); });

  size_t imax = 0;
  for (size_t i = 1; i < sv.size(); ++i) {
    if (sv[i] > sv[imax]) imax = i;
  }

  // Golden-section refinement around the grid maximizer.
  double a = grid[imax > 0 ? imax - 1 : imax];
  double b = grid[imax + 1 < grid.size() ? imax + 1 : imax];
  double best = sv[imax], wbest = grid[imax];
  if (b > a) {
    constexpr double gr = 0.6180339887498949;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = eval(c), fd = eval(d);
    while ((b - a) > 1e-3 * a) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = eval(d);
      }
    }
    const double wm = 0.5 * (a + b);
    const double fm = eval(wm);
    if (fm > best) {
      best = fm;
      wbest = wm;
    }
  }

  HinfResult res;
  res.norm = best;
  res.w_peak = wbest;
  res.peak_at_boundary = (imax == 0 || imax + 1 == grid.size());
  if (limit_at_infinity.has_value()) {
    const double dlim = limit_at_infinity->size() > 0
                            ? Eigen::JacobiSVD<Mat>(*limit_at_infinity).singularValues()[0]
                            : 0.0;
    if (dlim > res.norm) {
      res.norm = dlim;
      res.w_peak = kInf;
      res.peak_at_boundary = false;
    }
  }
  return res;
}

HinfResult hinf_norm(const FrequencyResponse& r) {
  HinfResult res;
  for (size_t i = 0; i < r.size(); ++i) {
    if (!r.is_valid(i)) continue;
    const double s = sigma_max(r.values[i]);
    if (s > res.norm) {
      res.norm = s;
      res.w_peak = r.grid[i];
      res.peak_at_boundary = (i == 0 || i + 1 == r.size());
    }
  }
  return res;
}

HinfResult hinf_norm_freq_weighted(const FrequencyResponse& r) {
  HinfResult res;
  for (size_t i = 0; i < r.size(); ++i) {
    if (!r.is_valid(i)) continue;
    const double s = r.grid[i] * sigma_max(r.values[i]);
    if (s > res.norm) {
      res.norm = s;
      res.w_peak = r.grid[i];
      res.peak_at_boundary = (i == 0 || i + 1 == r.size());
    }
  }
  return res;
}

void write_csv(const FrequencyResponse& r, std::ostream& out) {
  out << "omega";
  for (int i = 0; i < r.rows(); ++i) {
    for (int j = 0; j < r.cols(); ++j) {
      out << ",re_" << (i + 1) << (j + 1) << ",im_" << (i + 1) << (j + 1);
    }
  }
  out << '\n';
  char buf[64];
  for (size_t k = 0; k < r.size(); ++k) {
    if (!r.is_valid(k)) continue;
    std::snprintf(buf, sizeof(buf), "%.12g", r.grid[k]);
    out << buf;
    for (int i = 0; i < r.rows(); ++i) {
      for (int j = 0; j < r.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.12g", r.values[k](i, j).real());
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.12g", r.values[k](i, j).imag());
        out << ',' << buf;
      }
    }
    out << '\n';
  }
}

void write_bode_csv(const FrequencyResponse& r, std::ostream& out) {
  if (r.rows() != 1 || r.cols() != 1) throw ModelError("write_bode_csv: SISO response required");
  const auto phase = unwrap_phase(r);
  out << "omega,re,im,mag_db,phase_deg\n";
  char buf[64];
  for (size_t k = 0; k < r.size(); ++k) {
    if (!r.is_valid(k)) continue;
    const auto v = r.values[k](0, 0);
    std::snprintf(buf, sizeof(buf), "%.12g", r.grid[k]);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%.12g", v.real());
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.12g", v.imag());
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.12g", 20.0 * std::log10(std::abs(v)));
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.12g", phase[k] * 180.0 / std::numbers::pi);
    out << ',' << buf;
    out << '\n';
  }
}

void write_csv_file(const FrequencyResponse& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_csv(r, f);
}

void write_bode_csv_file(const FrequencyResponse& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_bode_csv(r, f);
}

}  // namespace sclc
