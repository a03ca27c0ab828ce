#pragma once

#include "sclc/freq_response.hpp"
#include "sclc/types.hpp"

namespace sclc {

/// Classic SISO margins. gm_abs is the absolute gain factor (not dB);
/// infinities encode "no crossover".
struct SisoMargins {
  double gm_abs = kInf;
  double pm_deg = kInf;
  double w_cg = 0.0;  // phase-crossover frequency (valid iff gm finite)
  double w_cp = 0.0;  // gain-crossover frequency (valid iff pm finite)
};

/// Crossover detection on a dense SISO open-loop response with continuous
/// phase unwrapping from the low-frequency end. Multiple crossings report
/// the most restrictive margin (smallest gm, smallest pm).
SisoMargins classic_siso_margins(const FrequencyResponse& open_loop);

/// Unwrapped phase (radians) along the grid.
std::vector<double> unwrap_phase(const FrequencyResponse& r);

}  // namespace sclc
