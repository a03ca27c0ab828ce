#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sclc/delay_line.hpp"
#include "sclc/integrate.hpp"
#include "sclc/sine_dwell.hpp"
#include "sclc/state_space.hpp"
#include "sclc/timeseries.hpp"

using namespace sclc;
namespace {
constexpr double pi = std::numbers::pi;

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
}  // namespace

TEST_CASE("integrate: zero field stays constant") {
  auto r = integrate([](double, const Vec& x) { return Vec::Zero(x.size()); }, v1(1.0), 0.01, 1.0);
  CHECK(r.series.samples() == 101);
  CHECK(!r.verdict.diverged);
  for (Eigen::Index k = 0; k < r.series.samples(); ++k) CHECK(r.series.data(0, k) == 1.0);
}

TEST_CASE("integrate: exponential decay hits analytic value") {
  auto r = integrate([](double, const Vec& x) { return Vec(-x); }, v1(1.0), 0.001, 1.0);
  CHECK(!r.verdict.diverged);
  CHECK(std::abs(r.series.data(0, r.series.samples() - 1) - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("integrate: RK4 order check") {
  auto err = [](double dt) {
    auto r = integrate([](double, const Vec& x) { return Vec(-x); }, v1(1.0), dt, 1.0);
    return std::abs(r.series.data(0, r.series.samples() - 1) - std::exp(-1.0));
  };
  const double e1 = err(0.02), e2 = err(0.01);
  CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("integrate: finite-escape dynamics produce a divergence verdict") {
  // x' = x^2 from x0=1 escapes at t=1
  auto r = integrate([](double, const Vec& x) { return Vec(x.array().square()); }, v1(1.0), 1e-4, 2.0);
  CHECK(r.verdict.diverged);
  CHECK(r.verdict.t_blowup > 0.9);
  CHECK(r.verdict.t_blowup < 1.1);
}

TEST_CASE("delay line: tau = 0 is the identity") {
  DelayLine line(Vec::Zero(2), 0.01);
  for (int k = 0; k < 50; ++k) {
    Vec u(2);
    u << std::sin(0.3 * k), std::cos(0.11 * k);
    Vec y = apply_delay(line, u, 0.01 * k);
    CHECK(y == u);
  }
}

TEST_CASE("delay line: sinusoid phase lag within 0.5 degrees") {
  const double tau = 0.2, w = 1.0, dt = 1e-3;
  DelayLine line(v1(tau), dt);
  double worst = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double t = k * dt;
    Vec y = apply_delay(line, v1(std::sin(w * t)), t);
    if (t > 2.0 * tau) {
      worst = std::max(worst, std::abs(y[0] - std::sin(w * (t - tau))));
    }
  }
  // amplitude error bound translated from 0.5 degree phase tolerance
  CHECK(worst < std::sin(0.5 * pi / 180.0));
}

TEST_CASE("delay line: step transport within one dt") {
  const double tau = 0.5, dt = 1e-3;
  DelayLine line(v1(tau), dt);
  for (int k = 0; k <= 1000; ++k) {
    const double t = k * dt;
    Vec y = apply_delay(line, v1(1.0), t);  // step at t=0
    if (t < tau - dt) CHECK(y[0] == doctest::Approx(0.0).epsilon(1e-12));
    if (t > tau + dt) CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("delay line: composition of two delays equals their sum") {
  const double dt = 1e-3, tau1 = 0.07, tau2 = 0.13;
  DelayLine a(v1(tau1), dt), b(v1(tau2), dt), c(v1(tau1 + tau2), dt);
  double worst = 0.0;
  for (int k = 0; k <= 3000; ++k) {
    const double t = k * dt;
    const Vec u = v1(std::sin(3.0 * t) + 0.5 * std::sin(7.1 * t));
    const Vec mid = apply_delay(a, u, t);
    const Vec y2 = apply_delay(b, mid, t);
    const Vec y1 = apply_delay(c, u, t);
    if (t > tau1 + tau2 + 2 * dt) worst = std::max(worst, std::abs(y1[0] - y2[0]));
  }
  // "within one interpolation step": the residual is O(dt) of the slope
  CHECK(worst < 8.0 * dt);
}

TEST_CASE("l2_norm: trivial and analytic values") {
  TimeSeries zero(1e-3, 0.0, 2, 1001);
  CHECK(l2_norm(zero) == 0.0);

  const double dt = 1e-3;
  const auto n = static_cast<Eigen::Index>(20.0 / dt) + 1;
  TimeSeries expdec(dt, 0.0, 1, n);
  for (Eigen::Index k = 0; k < n; ++k) expdec.data(0, k) = std::exp(-expdec.time_at(k));
  CHECK(l2_norm(expdec) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));

  const auto m = static_cast<Eigen::Index>(2.0 * pi / dt) + 1;
  TimeSeries sine(dt, 0.0, 1, m);
  for (Eigen::Index k = 0; k < m; ++k) sine.data(0, k) = std::sin(sine.time_at(k));
  CHECK(l2_norm(sine) == doctest::Approx(std::sqrt(pi)).epsilon(1e-3));
}

TEST_CASE("l2_norm: absolute homogeneity") {
  TimeSeries s(0.01, 0.0, 2, 500);
  for (Eigen::Index k = 0; k < 500; ++k) {
    s.data(0, k) = std::sin(0.37 * k);
    s.data(1, k) = std::cos(0.58 * k) * 0.3;
  }
  const double base = l2_norm(s);
  for (double c : {-3.5, 0.0, 0.25, 8.0}) {
    TimeSeries sc = s;
    sc.data *= c;
    CHECK(l2_norm(sc) == doctest::Approx(std::abs(c) * base).epsilon(1e-14));
  }
}

TEST_CASE("energy accumulator: monotone total, tail bounded by total") {
  EnergyAccumulator acc(0.01);
  double prev = 0.0;
  for (int k = 0; k < 1000; ++k) {
    acc.push(std::pow(std::sin(0.05 * k), 2));
    CHECK(acc.total() >= prev);
    prev = acc.total();
  }
  CHECK(acc.tail(2.0) <= acc.total());
  CHECK(acc.tail(1e9) == doctest::Approx(acc.total()));
}

namespace {

// Wrap an LTI model as a dwell process by simulating it with RK4.
Process lti_process(const StateSpaceModel& m) {
  return [m](const TimeSeries& input) -> std::optional<TimeSeries> {
    TimeSeries out(input.dt, input.t0, m.outputs(), input.samples());
    Vec x = Vec::Zero(m.order());
    auto uat = [&](double t) {
      auto k = static_cast<Eigen::Index>(std::round(t / input.dt));
      k = std::min(k, input.samples() - 1);
      return Vec(input.data.col(k));
    };
    for (Eigen::Index k = 0; k < input.samples(); ++k) {
      out.data.col(k) = m.C * x + m.D * input.data.col(k);
      if (k + 1 < input.samples()) {
        auto f = [&](double t, const Vec& z) { return Vec(m.A * z + m.B * uat(t)); };
        x = rk4_step(f, input.time_at(k), x, input.dt);
      }
    }
    return out;
  };
}

}  // namespace

TEST_CASE("sine dwell: identity pass-through has unit gain") {
  Process id = [](const TimeSeries& in) { return std::optional<TimeSeries>(in); };
  for (double w : {0.1, 1.0, 17.0}) {
    auto r = sine_dwell_gain(id, w, 2.0, 0, 1, 2, 3, 1e-3);
    REQUIRE(r.stable);
    CHECK(std::abs(r.gains[0] - std::complex<double>(1.0, 0.0)) < 1e-9);
  }
}

TEST_CASE("sine dwell: pure delay has unit magnitude and phase -w*tau") {
  const double tau = 0.2;
  Process proc = [tau](const TimeSeries& in) -> std::optional<TimeSeries> {
    TimeSeries out = in;
    DelayLine line(v1(tau), in.dt);
    for (Eigen::Index k = 0; k < in.samples(); ++k) {
      out.data.col(k) = apply_delay(line, Vec(in.data.col(k)), in.time_at(k));
    }
    return out;
  };
  for (double w : {0.7, 2.0}) {
    auto r = sine_dwell_gain(proc, w, 1.0, 0, 1, 8, 5, 1e-3);
    REQUIRE(r.stable);
    CHECK(std::abs(r.gains[0]) == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(std::abs(std::arg(r.gains[0]) - (-w * tau)) < 0.5 * pi / 180.0);
  }
}

TEST_CASE("sine dwell: first-order lag matches the direct evaluation") {
  Mat A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -1;
  B << 1;
  C << 1;
  D << 0;
  StateSpaceModel m(A, B, C, D);
  auto r = sine_dwell_gain(lti_process(m), 1.0, 1.0, 0, 1, 10, 5, 1e-3);
  REQUIRE(r.stable);
  CHECK(std::abs(r.gains[0] - std::complex<double>(0.5, -0.5)) < 0.01 * std::abs(std::complex<double>(0.5, -0.5)));
}

TEST_CASE("sine dwell: matches direct frequency response across the band") {
  Mat A(2, 2), B(2, 1), C(1, 2), D(1, 1);
  A << 0, 1, -1, -0.2;  // resonant second-order
  B << 0, 1;
  C << 1, 0;
  D << 0;
  StateSpaceModel m(A, B, C, D);
  auto proc = lti_process(m);
  const double t_slow = 10.0;  // 1 / (zeta * wn)
  for (double w : {0.05, 0.5, 1.0, 3.0, 40.0}) {
    const int settle = std::max(20, static_cast<int>(std::ceil(5.0 * t_slow * w / (2 * pi))));
    auto r = sine_dwell_gain(proc, w, 1.0, 0, 1, settle, 5, 1e-3);
    REQUIRE(r.stable);
    const auto direct = freq_eval(m, w)(0, 0);
    CHECK(std::abs(r.gains[0]) == doctest::Approx(std::abs(direct)).epsilon(0.01));
    CHECK(std::abs(std::arg(r.gains[0] / direct)) < 1.0 * pi / 180.0);
  }
}

TEST_CASE("sine dwell: rejects too-coarse dt, flags divergence") {
  Process id = [](const TimeSeries& in) { return std::optional<TimeSeries>(in); };
  CHECK_THROWS_AS(sine_dwell_gain(id, 1000.0, 1.0, 0, 1, 2, 2, 1e-3), std::invalid_argument);

  Process blows = [](const TimeSeries&) { return std::optional<TimeSeries>(); };
  auto r = sine_dwell_gain(blows, 1.0, 1.0, 0, 1, 2, 2, 1e-3);
  CHECK(!r.stable);
}
