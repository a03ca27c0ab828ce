#include "sclc/simulate.hpp"

#include <cmath>

#include "sclc/delay_line.hpp"
#include "sclc/state_space.hpp"

namespace sclc {

namespace {

std::vector<std::string> channel_names(const std::string& prefix, int n) {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

void truncate_all(SimResult& r, Eigen::Index keep) {
  for (TimeSeries* s : {&r.x, &r.xp_hat, &r.xs_hat, &r.up, &r.us, &r.u, &r.mu}) {
    if (s->samples() > keep) s->data.conservativeResize(Eigen::NoChange, keep);
  }
}

}  // namespace

SimResult simulate_closed_loop(const NonlinearPlant& plant, const SclcController& ctrl,
                               const Perturbation& pert, const Vec& x0, double T, double dt,
                               const SimOptions& options) {
  const int n = plant.n(), m = plant.m();
  if (ctrl.n() != n || ctrl.m() != m) throw ModelError("simulate_closed_loop: dimension mismatch");
  if (x0.size() != n) throw ModelError("simulate_closed_loop: x0 dimension mismatch");
  if (dt <= 0.0 || T < dt) throw ModelError("simulate_closed_loop: require dt > 0, T >= dt");
  if (pert.kind != Perturbation::Kind::None && pert.values.size() != m)
    throw ModelError("simulate_closed_loop: perturbation channel count mismatch");

  const bool h_identity = ctrl.H.is_identity();
  const int nh = h_identity ? 0 : ctrl.H.order();
  const int dim = n + n + nh;
  const bool delayed = pert.kind == Perturbation::Kind::Delay;
  const bool gained = pert.kind == Perturbation::Kind::Gain;

  DelayLine line(delayed ? pert.values : Vec::Zero(m), dt);

  // Workspace for the allocation-free stepping loop. The plant nonlinearity
  // and secondary law still return by value; everything else reuses buffers.
  Vec xp(n), v(m), up(m), us(m), u(m), mu(m), fx(n), inj(m);
  Vec k1(dim), k2(dim), k3(dim), k4(dim), ztmp(dim);

  auto controls = [&](const Vec& z) {
    xp = z.head(n);
    xp -= z.segment(n, n);
    v.noalias() = ctrl.K * xp;
    if (h_identity) {
      up = -v;
    } else {
      up.noalias() = -(ctrl.H.C * z.tail(nh));
      up.noalias() -= ctrl.H.D * v;
    }
    up *= options.up_gain;
    us = ctrl.secondary.fn(xp, z.segment(n, n));
    u = up;
    u += us;
  };

  auto gauge = [&](double t) {
    mu = u;
    if (gained) {
      mu.array() *= (1.0 + pert.values.array());
    } else if (delayed) {
      const Vec hist = line.value_at(t);
      for (int i = 0; i < m; ++i) {
        if (pert.values[i] > 0.0) mu[i] = hist[i];
      }
    }
    if (options.injection) {
      options.injection(t, inj);
      mu += inj;
    }
  };

  auto rhs = [&](double t, const Vec& z, Vec& dz) {
    controls(z);
    gauge(t);
    fx = plant.f(z.head(n));
    dz.head(n).noalias() = plant.A * z.head(n);
    dz.head(n) += fx;
    dz.head(n).noalias() += plant.B * mu;
    dz.segment(n, n).noalias() = plant.A * z.segment(n, n);
    dz.segment(n, n) += fx;
    dz.segment(n, n).noalias() += plant.B * us;
    if (nh > 0) {
      dz.tail(nh).noalias() = ctrl.H.A * z.tail(nh);
      dz.tail(nh).noalias() += ctrl.H.B * v;
    }
  };

  const auto steps = static_cast<Eigen::Index>(std::floor(T / dt + 1e-12));
  SimResult out;
  out.xp_hat = TimeSeries(dt, 0.0, n, steps + 1);
  out.xp_hat.names = channel_names("xp", n);
  if (options.record) {
    out.x = TimeSeries(dt, 0.0, n, steps + 1);
    out.x.names = channel_names("x", n);
    out.xs_hat = TimeSeries(dt, 0.0, n, steps + 1);
    out.xs_hat.names = channel_names("xs", n);
    out.up = TimeSeries(dt, 0.0, m, steps + 1);
    out.up.names = channel_names("up", m);
    out.us = TimeSeries(dt, 0.0, m, steps + 1);
    out.us.names = channel_names("us", m);
    out.u = TimeSeries(dt, 0.0, m, steps + 1);
    out.u.names = channel_names("u", m);
    out.mu = TimeSeries(dt, 0.0, m, steps + 1);
    out.mu.names = channel_names("mu", m);
  }

  Vec z = Vec::Zero(dim);
  z.head(n) = x0;

  for (Eigen::Index k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    controls(z);
    if (delayed) line.push(t, u);
    gauge(t);

    out.xp_hat.data.col(k) = z.head(n);
    out.xp_hat.data.col(k) -= z.segment(n, n);
    if (options.record) {
      out.x.data.col(k) = z.head(n);
      out.xs_hat.data.col(k) = z.segment(n, n);
      out.up.data.col(k) = up;
      out.us.data.col(k) = us;
      out.u.data.col(k) = u;
      out.mu.data.col(k) = mu;
    }

    if (k == steps) break;

    rhs(t, z, k1);
    ztmp = z + (0.5 * dt) * k1;
    rhs(t + 0.5 * dt, ztmp, k2);
    ztmp = z + (0.5 * dt) * k2;
    rhs(t + 0.5 * dt, ztmp, k3);
    ztmp = z + dt * k3;
    rhs(t + dt, ztmp, k4);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (state_diverged(z)) {
      out.verdict.diverged = true;
      out.verdict.t_blowup = static_cast<double>(k + 1) * dt;
      truncate_all(out, k + 1);
      break;
    }
  }

  out.l2["xp_hat"] = l2_norm(out.xp_hat);
  if (options.record) {
    out.l2["x"] = l2_norm(out.x);
    out.l2["xs_hat"] = l2_norm(out.xs_hat);
    out.l2["up"] = l2_norm(out.up);
    out.l2["us"] = l2_norm(out.us);
    out.l2["u"] = l2_norm(out.u);
    out.l2["mu"] = l2_norm(out.mu);
  }
  return out;
}

DecomposedResult simulate_decomposed(const NonlinearPlant& plant, const SclcController& ctrl,
                                     const Vec& x0, double T, double dt) {
  const int n = plant.n(), m = plant.m();
  if (x0.size() != n) throw ModelError("simulate_decomposed: x0 dimension mismatch");
  const bool h_identity = ctrl.H.is_identity();
  const int nh = h_identity ? 0 : ctrl.H.order();

  auto controls = [&](const Vec& z, Vec& up, Vec& us) {
    const auto xp = z.head(n);
    const auto xs = z.segment(n, n);
    const Vec v = ctrl.K * xp;
    up = h_identity ? Vec(-v) : Vec(-(ctrl.H.C * z.tail(nh) + ctrl.H.D * v));
    us = ctrl.secondary.fn(xp, xs);
  };

  auto rhs = [&](double, const Vec& z) {
    const auto xp = z.head(n);
    const auto xs = z.segment(n, n);
    Vec up(m), us(m);
    controls(z, up, us);
    Vec dz(z.size());
    dz.head(n) = plant.A * xp + plant.B * up;
    dz.segment(n, n) = plant.A * xs + plant.f(xp + xs) + plant.B * us;
    if (nh > 0) dz.tail(nh) = ctrl.H.A * z.tail(nh) + ctrl.H.B * (ctrl.K * xp);
    return dz;
  };

  const auto steps = static_cast<Eigen::Index>(std::floor(T / dt + 1e-12));
  DecomposedResult out;
  auto init = [&](SimResult& r, const std::string& state_prefix) {
    r.x = TimeSeries(dt, 0.0, n, steps + 1);
    r.x.names = channel_names(state_prefix, n);
    r.up = TimeSeries(dt, 0.0, m, steps + 1);
    r.up.names = channel_names("up", m);
    r.us = TimeSeries(dt, 0.0, m, steps + 1);
    r.us.names = channel_names("us", m);
  };
  init(out.primary, "xp");
  init(out.secondary, "xs");

  Vec z = Vec::Zero(n + n + nh);
  z.head(n) = x0;
  for (Eigen::Index k = 0;; ++k) {
    Vec up(m), us(m);
    controls(z, up, us);
    out.primary.x.data.col(k) = z.head(n);
    out.primary.up.data.col(k) = up;
    out.primary.us.data.col(k) = us;
    out.secondary.x.data.col(k) = z.segment(n, n);
    out.secondary.up.data.col(k) = up;
    out.secondary.us.data.col(k) = us;
    if (k == steps) break;
    z = rk4_step(rhs, static_cast<double>(k) * dt, z, dt);
    if (state_diverged(z)) {
      out.primary.verdict.diverged = out.secondary.verdict.diverged = true;
      out.primary.verdict.t_blowup = out.secondary.verdict.t_blowup =
          static_cast<double>(k + 1) * dt;
      for (SimResult* r : {&out.primary, &out.secondary}) {
        for (TimeSeries* s : {&r->x, &r->up, &r->us}) s->data.conservativeResize(Eigen::NoChange, k + 1);
      }
      break;
    }
  }
  out.primary.l2["x"] = l2_norm(out.primary.x);
  out.primary.l2["up"] = l2_norm(out.primary.up);
  out.secondary.l2["x"] = l2_norm(out.secondary.x);
  out.secondary.l2["us"] = l2_norm(out.secondary.us);
  return out;
}

Mat closed_loop_jacobian(const NonlinearPlant& plant, const SclcController& ctrl,
                         const Perturbation& pert, const SimOptions& options) {
  const int n = plant.n(), m = plant.m();
  const bool h_identity = ctrl.H.is_identity();
  const int nh = h_identity ? 0 : ctrl.H.order();
  const int dim = n + n + nh;
  if (pert.kind == Perturbation::Kind::Delay)
    throw ModelError("closed_loop_jacobian: delay gauges have no finite-dimensional field");

  auto field = [&](const Vec& z) {
    const Vec x = z.head(n);
    const Vec xs = z.segment(n, n);
    const Vec xp = x - xs;
    const Vec v = ctrl.K * xp;
    Vec up = h_identity ? Vec(-v) : Vec(-(ctrl.H.C * z.tail(nh) + ctrl.H.D * v));
    up *= options.up_gain;
    const Vec us = ctrl.secondary.fn(xp, xs);
    Vec mu = up + us;
    if (pert.kind == Perturbation::Kind::Gain) mu.array() *= (1.0 + pert.values.array());
    const Vec fx = plant.f(x);
    Vec dz(dim);
    dz.head(n) = plant.A * x + fx + plant.B * mu;
    dz.segment(n, n) = plant.A * xs + fx + plant.B * us;
    if (nh > 0) dz.tail(nh) = ctrl.H.A * z.tail(nh) + ctrl.H.B * v;
    return dz;
  };
  return jacobian_at_origin(field, dim);
}

SimResult simulate_linear_law(const NonlinearPlant& plant, const LinearLaw& law, const Vec& x0,
                              double T, double dt) {
  const int n = plant.n(), m = plant.m();
  auto rhs = [&](double, const Vec& x) {
    return Vec(plant.A * x + plant.f(x) + plant.B * (-(law.K * x)));
  };
  auto res = integrate(rhs, x0, dt, T);
  SimResult out;
  out.x = std::move(res.series);
  out.x.names = channel_names("x", n);
  out.verdict = res.verdict;
  out.u = TimeSeries(dt, 0.0, m, out.x.samples());
  out.u.names = channel_names("u", m);
  for (Eigen::Index k = 0; k < out.x.samples(); ++k) {
    out.u.data.col(k) = -(law.K * out.x.data.col(k));
  }
  out.mu = out.u;
  out.l2["x"] = l2_norm(out.x);
  out.l2["u"] = l2_norm(out.u);
  return out;
}

}  // namespace sclc
