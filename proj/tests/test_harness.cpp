#include <doctest.h>

#include <fstream>
#include <sstream>

#include "sclc/harness.hpp"

using namespace sclc;

TEST_CASE("config: shipped examples are well-formed and round-trip") {
  for (int id : {1, 2, 3}) {
    auto cfg = example_config(id);
    const std::string text = serialize_config(cfg);
    auto back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.example_id == id);
    CHECK(back.A == cfg.A);
    CHECK(back.x0 == cfg.x0);
    CHECK(back.law == cfg.law);
  }
  CHECK_THROWS_AS(example_config(7), ConfigError);
}

TEST_CASE("config: schema violations are rejected") {
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);  // missing plant
  // ragged matrix
  CHECK_THROWS_AS(parse_config(R"({"A": [[1,2],[3]], "B": [[0],[1]]})"), ConfigError);
  // dimension mismatch
  auto cfg = example_config(1);
  std::string text = serialize_config(cfg);
  text.replace(text.find("\"T\": 20.0"), 9, "\"T\": -1.0");
  CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("config: overrides on top of a shipped example") {
  auto cfg = parse_config(R"({"example": 1, "eps3": 0.02, "x0": [5, 5]})");
  CHECK(cfg.eps3 == 0.02);
  CHECK(cfg.x0[0] == 5.0);
  CHECK(cfg.A(1, 0) == -2.0);  // inherited
}

TEST_CASE("validate_margin: nominal run is bounded, zero state trivially bounded") {
  auto cfg = example_config(1);
  auto v = validate_margin(cfg, Perturbation::none());
  CHECK(v.bounded);
  CHECK(v.final_to_initial_ratio <= 1e-2);
  CHECK(v.tail_energy_fraction <= 1e-2);

  cfg.x0 = Vec::Zero(2);
  auto vz = validate_margin(cfg, Perturbation::none());
  CHECK(vz.bounded);
}

TEST_CASE("validate_margin: reference margins of the SISO example hold") {
  auto cfg = example_config(1);
  CHECK(validate_margin(cfg, Perturbation::uniform_gain(0.45, 1)).bounded);
  CHECK(validate_margin(cfg, Perturbation::uniform_delay(0.20, 1)).bounded);
}

TEST_CASE("validate_margin: the pipeline's own computed margins hold") {
  // values the margin searches produce for the shipped studies (the bounds
  // are sufficient conditions, so the loop must stay bounded at them)
  auto c1 = example_config(1);
  CHECK(validate_margin(c1, Perturbation::uniform_gain(0.374, 1)).bounded);
  CHECK(validate_margin(c1, Perturbation::uniform_delay(0.188, 1)).bounded);
  auto c3 = example_config(3);
  CHECK(validate_margin(c3, Perturbation::uniform_gain(0.21, 2)).bounded);
  CHECK(validate_margin(c3, Perturbation::uniform_delay(0.094, 2)).bounded);
}

TEST_CASE("compare_jlc: convergence table of the strongly nonlinear example") {
  auto cfg = example_config(2);
  std::vector<Vec> x0s = {(Vec(2) << 3, 3).finished(), (Vec(2) << 4, 4).finished(),
                          Vec::Zero(2)};
  auto rows = compare_jlc(cfg, x0s);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].sclc_converged);
  CHECK(rows[0].jlc_converged);
  CHECK(rows[0].sclc_settle < rows[0].jlc_settle);  // faster state convergence
  CHECK(rows[1].sclc_converged);
  CHECK(!rows[1].jlc_converged);
  CHECK(rows[2].sclc_converged);
  CHECK(rows[2].jlc_converged);
  CHECK(rows[2].sclc_settle == 0.0);
  CHECK(rows[2].jlc_settle == 0.0);
}

TEST_CASE("timeseries CSV output is deterministic") {
  auto cfg = example_config(1);
  auto plant = build_plant(cfg);
  auto ctrl = build_controller(cfg, plant);
  auto sim = simulate_closed_loop(plant, ctrl, Perturbation::none(), cfg.x0, 1.0, 1e-3);
  std::ostringstream a, b;
  write_csv(sim.x, a);
  write_csv(sim.x, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().substr(0, 8) == "t,x1,x2\n");
}

TEST_CASE("report JSON carries every field deterministically") {
  MarginReport r;
  r.example = "example1";
  r.gamma1 = {kInf, "theoretical"};
  r.tau1 = {kInf, "theoretical"};
  r.gamma2_theory = {0.37, "theoretical"};
  r.tau2_theory = {0.19, "theoretical"};
  r.gamma2_swept = {0.369, "swept"};
  r.tau2_swept = {0.165, "swept"};
  r.gamma = combine_min(r.gamma1, r.gamma2_swept);
  r.tau = combine_min(r.tau1, r.tau2_swept);
  r.kl = 5.76;
  r.has_theory = r.has_sweep = true;
  const std::string j1 = report_to_json(r);
  const std::string j2 = report_to_json(r);
  CHECK(j1 == j2);
  CHECK(j1.find("\"inf\"") != std::string::npos);
  CHECK(j1.find("swept") != std::string::npos);
  CHECK(j1.find("gamma_max_2") != std::string::npos);
}
