#pragma once

#include <cmath>
#include <vector>

#include "sclc/types.hpp"

namespace sclc {

/// Per-channel transport delay realized as a ring buffer of past input
/// samples with linear interpolation between grid points. Before the first
/// recorded sample plus the channel delay, the output is the channel's
/// initial value (zero-history convention).
class DelayLine {
 public:
  /// delays: per-channel tau_i >= 0 (seconds). dt: recording grid step.
  DelayLine(const Vec& delays, double dt, const Vec& initial = Vec());

  int channels() const { return static_cast<int>(delays_.size()); }
  const Vec& delays() const { return delays_; }

  /// Record the input sample at grid time t. Times must advance by dt.
  void push(double t, const Vec& u);

  /// Channel i of the delayed signal at query time t, i.e. u_i(t - tau_i),
  /// linearly interpolated. Channels with tau_i == 0 are expected to be
  /// bypassed by the caller (value_at then returns the latest sample).
  Vec value_at(double t) const;

 private:
  double sample_at(int channel, double query_time) const;

  Vec delays_;
  double dt_;
  Vec initial_;
  std::vector<Vec> ring_;        // capacity slots
  std::vector<double> times_;
  int capacity_ = 0;
  int head_ = -1;                // index of latest sample, -1 if empty
  long count_ = 0;               // total samples pushed
};

/// Record `sample` at time t, then return the delayed vector at t.
/// A channel with tau = 0 returns the just-pushed input exactly.
inline Vec apply_delay(DelayLine& line, const Vec& sample, double t) {
  line.push(t, sample);
  Vec out = line.value_at(t);
  for (int i = 0; i < line.channels(); ++i) {
    if (line.delays()[i] == 0.0) out[i] = sample[i];
  }
  return out;
}

}  // namespace sclc
