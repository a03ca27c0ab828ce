#include "sclc/sine_dwell.hpp"

#include <cmath>
#include <numbers>

namespace sclc {

DwellResult sine_dwell_gain(const Process& process, double w, double amplitude,
                            int in_channel, int input_dim, int settle_periods,
                            int measure_periods, double dt) {
  if (w <= 0.0) throw std::invalid_argument("sine_dwell_gain: w must be > 0");
  if (settle_periods < 1 || measure_periods < 1)
    throw std::invalid_argument("sine_dwell_gain: need settle_periods >= 1 and measure_periods >= 1");
  const double period = 2.0 * std::numbers::pi / w;
  if (dt > period / 20.0)
    throw std::invalid_argument("sine_dwell_gain: dt too coarse (need >= 20 samples/period)");

  const double total_time = static_cast<double>(settle_periods + measure_periods) * period;
  const auto n = static_cast<Eigen::Index>(std::ceil(total_time / dt)) + 1;

  TimeSeries input(dt, 0.0, input_dim, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    input.data(in_channel, k) = amplitude * std::sin(w * static_cast<double>(k) * dt);
  }

  auto output = process(input);
  DwellResult res;
  if (!output.has_value()) {
    res.stable = false;
    return res;
  }
  const TimeSeries& y = *output;

  auto n_meas = static_cast<Eigen::Index>(std::floor(static_cast<double>(measure_periods) * period / dt));
  if (n_meas > y.samples() - 1) n_meas = y.samples() - 1;
  const Eigen::Index k0 = y.samples() - 1 - n_meas;

  // Least-squares fit y ~ a*sin + b*cos over the window; the 2x2 Gram solve
  // removes the residual leakage of a non-integer sample count.
  double ss = 0, cc = 0, sc = 0;
  Vec ys = Vec::Zero(y.channels()), yc = Vec::Zero(y.channels());
  for (Eigen::Index k = k0; k < y.samples(); ++k) {
    const double t = y.time_at(k);
    const double s = std::sin(w * t), c = std::cos(w * t);
    ss += s * s;
    cc += c * c;
    sc += s * c;
    ys += s * y.data.col(k);
    yc += c * y.data.col(k);
  }
  const double det = ss * cc - sc * sc;
  res.gains = CVec(y.channels());
  for (int ch = 0; ch < y.channels(); ++ch) {
    const double a = (cc * ys[ch] - sc * yc[ch]) / det;
    const double b = (ss * yc[ch] - sc * ys[ch]) / det;
    res.gains[ch] = std::complex<double>(a, b) / amplitude;
  }
  return res;
}

}  // namespace sclc
