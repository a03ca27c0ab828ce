#include "sclc/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sclc/riccati.hpp"

namespace sclc {

using nlohmann::json;

namespace {

Mat mat_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix field '" + field + "' must be a non-empty array");
  const bool nested = j.front().is_array();
  const auto rows = static_cast<Eigen::Index>(nested ? j.size() : 1);
  const auto cols = static_cast<Eigen::Index>(nested ? j.front().size() : j.size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = nested ? j[static_cast<size_t>(i)] : j;
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError("ragged matrix in field '" + field + "'");
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!row[static_cast<size_t>(k)].is_number())
        throw ConfigError("non-numeric entry in field '" + field + "'");
      m(i, k) = row[static_cast<size_t>(k)].get<double>();
    }
  }
  return m;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

Vec vec_from_json(const json& j, const std::string& field) {
  Mat m = mat_from_json(j, field);
  if (m.rows() != 1 && m.cols() != 1) throw ConfigError("field '" + field + "' must be a vector");
  return m.rows() == 1 ? Vec(m.transpose().col(0)) : Vec(m.col(0));
}

std::function<Vec(const Vec&)> make_nonlinearity(const std::string& name, int channel, double a,
                                                 int n) {
  if (channel < 0 || channel >= n) throw ConfigError("nonlinearity channel out of range");
  if (name == "none") {
    return [n](const Vec&) { return Vec(Vec::Zero(n)); };
  }
  if (name == "saturating_square") {
    // state `channel` feeds back on its own derivative row
    return [channel, a, n](const Vec& x) {
      Vec y = Vec::Zero(n);
      const double v = x[channel];
      y[channel] = v * v / (1.0 + a * v * v);
      return y;
    };
  }
  throw ConfigError("unknown nonlinearity '" + name + "'");
}

// Scalar version used inside the secondary laws for exact cancellation.
std::function<double(double)> make_scalar_nonlinearity(const std::string& name, double a) {
  if (name == "none") return [](double) { return 0.0; };
  if (name == "saturating_square") {
    return [a](double v) { return v * v / (1.0 + a * v * v); };
  }
  throw ConfigError("unknown nonlinearity '" + name + "'");
}

}  // namespace

NonlinearPlant build_original_plant(const ExampleConfig& cfg) {
  const int n = static_cast<int>(cfg.A.rows());
  return NonlinearPlant(cfg.A, cfg.B, make_nonlinearity(cfg.nonlinearity, cfg.nl_channel, cfg.nl_a, n),
                        cfg.name);
}

NonlinearPlant build_plant(const ExampleConfig& cfg) {
  NonlinearPlant p = build_original_plant(cfg);
  if (cfg.k0.has_value()) p = prestabilize(p, *cfg.k0);
  if (!is_hurwitz(p.A)) {
    throw ConfigError("plant matrix A is not Hurwitz; provide a prestabilizing k0");
  }
  return p;
}

SclcController build_controller(const ExampleConfig& cfg, const NonlinearPlant& plant) {
  const auto care = solve_care(plant.A, plant.B, cfg.Q, cfg.R);
  const int n = plant.n();
  const auto fnl = make_scalar_nonlinearity(cfg.nonlinearity, cfg.nl_a);
  const int ch = cfg.nl_channel;

  SecondaryLaw law;
  if (cfg.law == "backstepping") {
    if (n != 2 || plant.m() != 1) throw ConfigError("backstepping law expects n = 2, m = 1");
    const double c1 = cfg.c1, c2 = cfg.c2;
    law = SecondaryLaw(
        "backstepping",
        [c1, c2, fnl, ch](const Vec& xp, const Vec& xs) {
          Vec u(1);
          u[0] = (3.0 - c1 - c2) * xs[1] + (1.0 - c1 * c2) * xs[0] - fnl(xp[ch] + xs[ch]);
          return u;
        },
        n);
  } else if (cfg.law == "lyapunov") {
    if (n != 3 || plant.m() != 2) throw ConfigError("lyapunov law expects n = 3, m = 2");
    const double c = cfg.c;
    law = SecondaryLaw(
        "lyapunov",
        [c, fnl, ch](const Vec& xp, const Vec& xs) {
          Vec u(2);
          u[0] = -(xs[0] - xs[1] + fnl(xs[ch] + xp[ch]));
          u[1] = -c * (-xs[0] + xs[1] + xs[2]);
          return u;
        },
        n);
  } else if (cfg.law == "zero") {
    law = SecondaryLaw("zero", [m = plant.m()](const Vec&, const Vec&) { return Vec(Vec::Zero(m)); },
                       n);
  } else {
    throw ConfigError("unknown secondary law '" + cfg.law + "'");
  }
  return SclcController(care.K, StateSpaceModel::identity(plant.m()), law);
}

ExampleConfig example_config(int id) {
  ExampleConfig cfg;
  cfg.example_id = id;
  switch (id) {
    case 1: {
      cfg.name = "example1";
      cfg.A = (Mat(2, 2) << 0, 1, -2, -3).finished();
      cfg.B = (Mat(2, 1) << 0, 1).finished();
      cfg.nonlinearity = "saturating_square";
      cfg.nl_channel = 1;
      cfg.nl_a = 0.01;
      cfg.law = "backstepping";
      cfg.c1 = cfg.c2 = 20.0;
      cfg.Q = Mat::Identity(2, 2);
      cfg.R = Mat::Identity(1, 1);
      cfg.x0 = (Vec(2) << 10, 10).finished();
      cfg.T = 20.0;
      break;
    }
    case 2: {
      cfg.name = "example2";
      cfg.A = (Mat(2, 2) << 1, 1, 0, 1).finished();
      cfg.B = (Mat(2, 1) << 0, 1).finished();
      cfg.nonlinearity = "saturating_square";
      cfg.nl_channel = 1;
      cfg.nl_a = 0.0;  // pure square
      cfg.law = "backstepping";
      cfg.c1 = cfg.c2 = 20.0;
      cfg.Q = 10.0 * Mat::Identity(2, 2);
      cfg.R = Mat::Identity(1, 1);
      cfg.k0 = (Mat(1, 2) << 6, 5).finished();
      cfg.x0 = (Vec(2) << 3, 3).finished();
      cfg.T = 20.0;
      break;
    }
    case 3: {
      cfg.name = "example3";
      cfg.A = (Mat(3, 3) << -1, 0, 1, 0, -1, 1, 0, -2, -3).finished();
      cfg.B = (Mat(3, 2) << 0, -1, 0, 1, 1, 1).finished();
      cfg.nonlinearity = "saturating_square";
      cfg.nl_channel = 2;
      cfg.nl_a = 0.01;
      cfg.law = "lyapunov";
      cfg.c = 5.0;
      cfg.Q = Mat::Identity(3, 3);
      cfg.R = Mat::Identity(2, 2);
      cfg.x0 = (Vec(3) << 10, 10, 10).finished();
      cfg.T = 30.0;
      break;
    }
    default:
      throw ConfigError("example id must be 1, 2 or 3");
  }
  cfg.sweep.x0 = cfg.x0;
  cfg.sweep.dt = cfg.dt;
  return cfg;
}

ExampleConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }

  ExampleConfig cfg;
  if (j.contains("example")) {
    cfg = example_config(j.at("example").get<int>());
  }
  try {
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    if (j.contains("A")) cfg.A = mat_from_json(j.at("A"), "A");
    if (j.contains("B")) cfg.B = mat_from_json(j.at("B"), "B");
    if (j.contains("nonlinearity")) {
      const json& nl = j.at("nonlinearity");
      cfg.nonlinearity = nl.at("name").get<std::string>();
      if (nl.contains("channel")) cfg.nl_channel = nl.at("channel").get<int>();
      if (nl.contains("a")) cfg.nl_a = nl.at("a").get<double>();
    }
    if (j.contains("secondary_law")) {
      const json& law = j.at("secondary_law");
      cfg.law = law.at("name").get<std::string>();
      if (law.contains("c1")) cfg.c1 = law.at("c1").get<double>();
      if (law.contains("c2")) cfg.c2 = law.at("c2").get<double>();
      if (law.contains("c")) cfg.c = law.at("c").get<double>();
    }
    if (j.contains("Q")) cfg.Q = mat_from_json(j.at("Q"), "Q");
    if (j.contains("R")) cfg.R = mat_from_json(j.at("R"), "R");
    if (j.contains("k0")) cfg.k0 = mat_from_json(j.at("k0"), "k0");
    if (j.contains("x0")) cfg.x0 = vec_from_json(j.at("x0"), "x0");
    if (j.contains("T")) cfg.T = j.at("T").get<double>();
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("eps3")) cfg.eps3 = j.at("eps3").get<double>();
    if (j.contains("eps4")) cfg.eps4 = j.at("eps4").get<double>();
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      if (s.contains("wlo")) cfg.sweep.wlo = s.at("wlo").get<double>();
      if (s.contains("whi")) cfg.sweep.whi = s.at("whi").get<double>();
      if (s.contains("points_per_decade")) cfg.sweep.ppd = s.at("points_per_decade").get<int>();
      if (s.contains("amplitude")) cfg.sweep.amplitude = s.at("amplitude").get<double>();
      if (s.contains("measure_periods")) cfg.sweep.measure_periods = s.at("measure_periods").get<int>();
      if (s.contains("min_settle_periods"))
        cfg.sweep.min_settle_periods = s.at("min_settle_periods").get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema violation: ") + e.what());
  }

  // Validation
  if (cfg.A.rows() == 0) throw ConfigError("config missing plant matrix A");
  if (cfg.A.rows() != cfg.A.cols()) throw ConfigError("A must be square");
  if (cfg.B.rows() != cfg.A.rows()) throw ConfigError("B row count must match A");
  if (cfg.Q.rows() != cfg.A.rows() || cfg.Q.cols() != cfg.A.cols())
    throw ConfigError("Q must be n x n");
  if (cfg.R.rows() != cfg.B.cols() || cfg.R.cols() != cfg.B.cols())
    throw ConfigError("R must be m x m");
  if (cfg.k0.has_value() && (cfg.k0->rows() != cfg.B.cols() || cfg.k0->cols() != cfg.A.rows()))
    throw ConfigError("k0 must be m x n");
  if (cfg.x0.size() != cfg.A.rows()) throw ConfigError("x0 must have n entries");
  if (!(cfg.dt > 0.0) || !(cfg.T >= cfg.dt)) throw ConfigError("require dt > 0 and T >= dt");
  if (!(cfg.eps3 > 0.0 && cfg.eps3 < 1.0 && cfg.eps4 > 0.0 && cfg.eps4 < 1.0))
    throw ConfigError("eps3, eps4 must lie in (0,1)");
  if (!(cfg.sweep.wlo > 0.0 && cfg.sweep.whi > cfg.sweep.wlo && cfg.sweep.ppd >= 1))
    throw ConfigError("invalid sweep grid");
  cfg.sweep.x0 = cfg.x0;
  cfg.sweep.dt = cfg.dt;
  return cfg;
}

ExampleConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExampleConfig& cfg) {
  json j;
  if (cfg.example_id > 0) j["example"] = cfg.example_id;
  j["name"] = cfg.name;
  j["A"] = mat_to_json(cfg.A);
  j["B"] = mat_to_json(cfg.B);
  j["nonlinearity"] = {{"name", cfg.nonlinearity}, {"channel", cfg.nl_channel}, {"a", cfg.nl_a}};
  json law = {{"name", cfg.law}};
  if (cfg.law == "backstepping") {
    law["c1"] = cfg.c1;
    law["c2"] = cfg.c2;
  } else if (cfg.law == "lyapunov") {
    law["c"] = cfg.c;
  }
  j["secondary_law"] = law;
  j["Q"] = mat_to_json(cfg.Q);
  j["R"] = mat_to_json(cfg.R);
  if (cfg.k0.has_value()) j["k0"] = mat_to_json(*cfg.k0);
  j["x0"] = mat_to_json(cfg.x0.transpose());
  j["T"] = cfg.T;
  j["dt"] = cfg.dt;
  j["eps3"] = cfg.eps3;
  j["eps4"] = cfg.eps4;
  j["sweep"] = {{"wlo", cfg.sweep.wlo},
                {"whi", cfg.sweep.whi},
                {"points_per_decade", cfg.sweep.ppd},
                {"amplitude", cfg.sweep.amplitude},
                {"measure_periods", cfg.sweep.measure_periods},
                {"min_settle_periods", cfg.sweep.min_settle_periods}};
  return j.dump(2);
}

}  // namespace sclc
