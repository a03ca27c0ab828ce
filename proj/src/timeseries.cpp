#include "sclc/timeseries.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace sclc {

double l2_norm(const TimeSeries& s) {
  const Eigen::Index n = s.samples();
  if (n < 2) return 0.0;
  double acc = 0.0;
  double prev = s.data.col(0).squaredNorm();
  for (Eigen::Index k = 1; k < n; ++k) {
    const double cur = s.data.col(k).squaredNorm();
    acc += 0.5 * s.dt * (prev + cur);
    prev = cur;
  }
  return std::sqrt(acc);
}

double EnergyAccumulator::tail(double window) const {
  if (samples_.size() < 2 || window <= 0.0) return 0.0;
  const auto n = static_cast<long>(samples_.size());
  long first = n - 1 - static_cast<long>(std::floor(window / dt_));
  if (first < 0) first = 0;
  double acc = 0.0;
  for (long k = first + 1; k < n; ++k) {
    acc += 0.5 * dt_ * (samples_[static_cast<size_t>(k - 1)] + samples_[static_cast<size_t>(k)]);
  }
  return acc;
}

void write_csv(const TimeSeries& s, std::ostream& out) {
  out << "t";
  for (int c = 0; c < s.channels(); ++c) {
    out << ',' << (c < static_cast<int>(s.names.size()) ? s.names[static_cast<size_t>(c)]
                                                        : "ch" + std::to_string(c + 1));
  }
  out << '\n';
  char buf[64];
  for (Eigen::Index k = 0; k < s.samples(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.12g", s.time_at(k));
    out << buf;
    for (int c = 0; c < s.channels(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.12g", s.data(c, k));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_csv_file(const TimeSeries& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_csv(s, f);
}

}  // namespace sclc
