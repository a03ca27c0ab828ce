#pragma once

#include <functional>
#include <optional>

#include "sclc/timeseries.hpp"
#include "sclc/types.hpp"

namespace sclc {

/// A process maps an input series to an output series on the same grid.
/// nullopt signals divergence during the run.
using Process = std::function<std::optional<TimeSeries>(const TimeSeries& input)>;

struct DwellResult {
  bool stable = true;         // false: process diverged at this frequency
  CVec gains;                 // one complex gain per output channel
};

/// Single-frequency response extraction: drive in_channel with
/// amplitude*sin(w t), discard the settling window, then least-squares
/// project each output channel onto {sin, cos} at w over an integer number
/// of periods. Returns output phasor / input phasor per channel.
///
/// Rejects dt > 2*pi/(20*w) (fewer than 20 samples per period) up front.
DwellResult sine_dwell_gain(const Process& process, double w, double amplitude,
                            int in_channel, int input_dim, int settle_periods,
                            int measure_periods, double dt);

}  // namespace sclc
