#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sclc/types.hpp"

namespace sclc {

/// Uniformly sampled multichannel signal. Samples are stored channel-major:
/// data is (channels x samples), column k is the sample at t0 + k*dt.
struct TimeSeries {
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<std::string> names;  // one per channel; may be empty
  Mat data;                        // channels x samples

  TimeSeries() = default;
  TimeSeries(double dt, double t0, int channels, Eigen::Index samples)
      : dt(dt), t0(t0), data(Mat::Zero(channels, samples)) {}

  int channels() const { return static_cast<int>(data.rows()); }
  Eigen::Index samples() const { return data.cols(); }
  double time_at(Eigen::Index k) const { return t0 + static_cast<double>(k) * dt; }
  double duration() const { return samples() > 0 ? (static_cast<double>(samples() - 1)) * dt : 0.0; }
};

/// sqrt of the trapezoidal integral of ||v(t)||^2 over the series.
double l2_norm(const TimeSeries& s);

/// Streaming trapezoidal accumulator for ||v(t)||^2 with a tail window.
/// total() is monotone nondecreasing and tail(W) <= total().
class EnergyAccumulator {
 public:
  explicit EnergyAccumulator(double dt) : dt_(dt) {}

  void push(double squared_norm) {
    if (!samples_.empty()) {
      total_ += 0.5 * dt_ * (samples_.back() + squared_norm);
    }
    samples_.push_back(squared_norm);
  }

  double total() const { return total_; }

  /// Trapezoidal energy over the last `window` seconds.
  double tail(double window) const;

 private:
  double dt_;
  double total_ = 0.0;
  std::vector<double> samples_;
};

/// CSV with header `t,<name_1>,...,<name_k>`, one row per grid point,
/// 12 significant digits.
void write_csv(const TimeSeries& s, std::ostream& out);
void write_csv_file(const TimeSeries& s, const std::string& path);

}  // namespace sclc
