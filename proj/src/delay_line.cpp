#include "sclc/delay_line.hpp"

#include <algorithm>

namespace sclc {

DelayLine::DelayLine(const Vec& delays, double dt, const Vec& initial)
    : delays_(delays), dt_(dt), initial_(initial) {
  if (dt <= 0.0) throw ModelError("DelayLine: dt must be positive");
  if ((delays.array() < 0.0).any()) throw ModelError("DelayLine: delays must be >= 0");
  if (initial_.size() == 0) initial_ = Vec::Zero(delays.size());
  const double max_tau = delays.size() > 0 ? delays.maxCoeff() : 0.0;
  capacity_ = static_cast<int>(std::ceil(max_tau / dt)) + 4;
  ring_.assign(static_cast<size_t>(capacity_), Vec::Zero(delays.size()));
  times_.assign(static_cast<size_t>(capacity_), 0.0);
}

void DelayLine::push(double t, const Vec& u) {
  head_ = (head_ + 1) % capacity_;
  ring_[static_cast<size_t>(head_)] = u;
  times_[static_cast<size_t>(head_)] = t;
  ++count_;
}

double DelayLine::sample_at(int channel, double q) const {
  if (count_ == 0) return initial_[channel];
  const double t_latest = times_[static_cast<size_t>(head_)];
  const long stored = std::min<long>(count_, capacity_);
  const double t_oldest = t_latest - static_cast<double>(stored - 1) * dt_;
  if (q <= t_oldest) {
    // zero-history region (or exactly the oldest sample)
    if (q < t_oldest) return count_ >= capacity_ ? ring_[static_cast<size_t>((head_ + 1) % capacity_)][channel]
                                                 : initial_[channel];
    const int idx = (head_ - static_cast<int>(stored) + 1 + capacity_ * 2) % capacity_;
    return ring_[static_cast<size_t>(idx)][channel];
  }
  if (q >= t_latest) {
    // Only reachable for 0 < tau < dt mid-step lookahead: extrapolate from
    // the last two samples (consistent with the O(dt^2) interpolation).
    if (stored < 2) return ring_[static_cast<size_t>(head_)][channel];
    const int prev = (head_ - 1 + capacity_) % capacity_;
    const double a = (q - t_latest) / dt_;
    return (1.0 + a) * ring_[static_cast<size_t>(head_)][channel] -
           a * ring_[static_cast<size_t>(prev)][channel];
  }
  const double back = (t_latest - q) / dt_;
  const long steps = static_cast<long>(std::floor(back));
  const double frac = back - static_cast<double>(steps);
  const int i1 = (head_ - static_cast<int>(steps) + capacity_ * 8) % capacity_;       // later sample
  const int i0 = (head_ - static_cast<int>(steps) - 1 + capacity_ * 8) % capacity_;   // earlier sample
  return (1.0 - frac) * ring_[static_cast<size_t>(i1)][channel] +
         frac * ring_[static_cast<size_t>(i0)][channel];
}

Vec DelayLine::value_at(double t) const {
  Vec out(delays_.size());
  for (int i = 0; i < delays_.size(); ++i) {
    out[i] = sample_at(i, t - delays_[i]);
  }
  return out;
}

}  // namespace sclc
