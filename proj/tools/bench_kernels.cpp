// Serial vs OpenMP timing of the data-parallel kernels: frequency-grid
// evaluation, H-infinity norm, k_l probe batch and the sine-dwell sweep.

#include <chrono>
#include <cstdio>

#include "sclc/config.hpp"
#include "sclc/harness.hpp"
#include "sclc/margin.hpp"

using namespace sclc;

namespace {

template <typename F>
double time_s(const F& fn, int reps = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3f s %10.3f s %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", max_threads());
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial", "parallel", "speedup");

  // MIMO example: grid evaluation and the theoretical search inner loop
  auto cfg3 = example_config(3);
  auto plant3 = build_plant(cfg3);
  auto ctrl3 = build_controller(cfg3, plant3);
  const auto grid = log_grid(1e-3, 1e3, 400);

  row("g0b grid (2400 pts)",
      time_s([&] { g0b_response(plant3.A, plant3.B, ctrl3.K, ctrl3.H, grid, ExecPolicy::Serial); }, 3),
      time_s([&] { g0b_response(plant3.A, plant3.B, ctrl3.K, ctrl3.H, grid, ExecPolicy::Parallel); }, 3));

  auto hinf_run = [&](ExecPolicy p) {
    hinf_norm(
        [&](double w) {
          CMat M = (plant3.B * ctrl3.K - plant3.A).cast<std::complex<double>>();
          M.diagonal().array() += std::complex<double>(0, w);
          return CMat(M.fullPivLu().solve(plant3.B.cast<std::complex<double>>()));
        },
        1e-3, 1e3, 200, std::nullopt, p);
  };
  row("hinf grid+refine",
      time_s([&] { hinf_run(ExecPolicy::Serial); }, 3),
      time_s([&] { hinf_run(ExecPolicy::Parallel); }, 3));

  auto probes = make_probe_family(plant3.n(), cfg3.x0, {1.0, 1.7, 2.2}, {0.01, 1.0, 100.0});
  row("k_l probe batch",
      time_s([&] { estimate_kl(plant3, ctrl3, probes, cfg3.T, cfg3.dt, 1.2, ExecPolicy::Serial); }),
      time_s([&] { estimate_kl(plant3, ctrl3, probes, cfg3.T, cfg3.dt, 1.2, ExecPolicy::Parallel); }));

  // sine-dwell sweep on the SISO example, shipped grid
  auto cfg1 = example_config(1);
  auto plant1 = build_plant(cfg1);
  auto ctrl1 = build_controller(cfg1, plant1);
  row("sine-dwell sweep (101 pts)",
      time_s([&] { sweep_g0b(plant1, ctrl1, cfg1.sweep, ExecPolicy::Serial); }),
      time_s([&] { sweep_g0b(plant1, ctrl1, cfg1.sweep, ExecPolicy::Parallel); }));
  return 0;
}
