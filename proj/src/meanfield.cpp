#include "bdar/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace bdar {

MeanFieldParams MeanFieldParams::make(int C, int d, double lambda) {
  if (C < 1) throw std::invalid_argument("C must be at least 1");
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
  return MeanFieldParams{C, d, lambda};
}

Regime MeanFieldParams::regime() const {
  if (lambda < lambda0_for(d)) return Regime::Low;
  if (lambda >= lambda1_for(C, d)) return Regime::High;
  return Regime::Unsupported;
}

void check_simplex(const Simplex& xi, int C, double tol) {
  if (static_cast<int>(xi.size()) != C + 1) throw std::invalid_argument("simplex point has the wrong length");
  double sum = 0.0;
  for (double v : xi) {
    if (!std::isfinite(v) || v < -tol) throw std::invalid_argument("simplex point has a negative coordinate");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("simplex point does not sum to 1");
}

double cumulative(const Simplex& xi, int j) {
  double s = 0.0;
  for (int k = 0; k <= j && k < static_cast<int>(xi.size()); ++k) s += xi[static_cast<std::size_t>(k)];
  return s;
}

Simplex barycenter(int C) { return Simplex(static_cast<std::size_t>(C + 1), 1.0 / (C + 1)); }

Simplex vertex(int C, int j) {
  Simplex e(static_cast<std::size_t>(C + 1), 0.0);
  e.at(static_cast<std::size_t>(j)) = 1.0;
  return e;
}

Simplex random_simplex(int C, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Simplex xi(static_cast<std::size_t>(C + 1));
  double sum = 0.0;
  for (double& v : xi) {
    v = expo(rng.engine());
    sum += v;
  }
  for (double& v : xi) v /= sum;
  return xi;
}

namespace {

double h_value(double a, double b, int d) {
  const double pa = 1.0 - a * a;
  const double pb = 1.0 - b * b;
  double sum = 0.0;
  double left = 1.0;  // pa^{r-1}
  for (int r = 1; r <= d; ++r) {
    double right = 1.0;
    for (int k = 0; k < d - r; ++k) right *= pb;
    sum += left * right;
    left *= pa;
  }
  return (a - b) * sum;
}

}  // namespace

double H(double a, double b, int d) {
  constexpr double slack = 1e-12;
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  if (b < -slack || a > 1.0 + slack || b > a + slack) throw std::invalid_argument("H needs 0 <= b <= a <= 1");
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, a);
  return h_value(a, b, d);
}

namespace {

std::vector<double> cumulative_sums(const Simplex& xi) {
  std::vector<double> cum(xi.size());
  double s = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    s += xi[k];
    cum[k] = s;
  }
  return cum;
}

// sum_{r=1}^d (1 - a^2)^{r-1} (1 - b^2)^{d-r}
double position_sum(double a, double b, int d) {
  double s = 0.0;
  for (int r = 1; r <= d; ++r) s += std::pow(1.0 - a * a, r - 1) * std::pow(1.0 - b * b, d - r);
  return s;
}

std::vector<double> g_raw(const Simplex& xi, const MeanFieldParams& p) {
  const int C = p.C;
  const auto cum = cumulative_sums(xi);
  auto le = [&](int j) { return j < 0 ? 0.0 : cum[static_cast<std::size_t>(j)]; };
  const double top = xi[static_cast<std::size_t>(C)];
  std::vector<double> h(static_cast<std::size_t>(C));
  for (int i = 0; i < C; ++i) h[static_cast<std::size_t>(i)] = h_value(le(i), le(i - 1), p.d);
  std::vector<double> out(static_cast<std::size_t>(C), 0.0);
  for (int j = 0; j < C; ++j) {
    double tail = 0.0;
    for (int i = j + 1; i < C; ++i) tail += h[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(j)] =
        2.0 * top * le(j) * h[static_cast<std::size_t>(j)] + 2.0 * top * xi[static_cast<std::size_t>(j)] * tail;
  }
  return out;
}

std::vector<double> drift_raw(const Simplex& xi, const MeanFieldParams& p) {
  const int C = p.C;
  const double lam = p.lambda;
  const auto gv = g_raw(xi, p);
  auto x = [&](int k) { return xi[static_cast<std::size_t>(k)]; };
  auto gg = [&](int k) { return gv[static_cast<std::size_t>(k)]; };
  std::vector<double> f(static_cast<std::size_t>(C + 1));
  f[0] = -lam * x(0) - lam * gg(0) + x(1);
  for (int k = 1; k < C; ++k) {
    f[static_cast<std::size_t>(k)] =
        lam * x(k - 1) - lam * x(k) + lam * gg(k - 1) - lam * gg(k) - k * x(k) + (k + 1) * x(k + 1);
  }
  f[static_cast<std::size_t>(C)] = lam * x(C - 1) + lam * gg(C - 1) - C * x(C);
  return f;
}

// Clamps negatives and rescales to unit sum; returns the l1 size of the change.
double project(Simplex& xi) {
  double moved = 0.0;
  double sum = 0.0;
  for (double& v : xi) {
    if (v < 0.0) {
      moved += -v;
      v = 0.0;
    }
    sum += v;
  }
  if (!(sum > 0.0)) throw std::runtime_error("iterate collapsed to zero mass");
  moved += std::abs(sum - 1.0);
  for (double& v : xi) v /= sum;
  return moved;
}

// Clamping variant for the nonlinear maps; ODE paths use project().
std::vector<double> clamp_renormalise(std::vector<double> u) {
  double sum = 0.0;
  for (double& v : u) {
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  for (double& v : u) v /= sum;
  return u;
}

double max_norm_diff(const Simplex& a, const Simplex& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

std::vector<double> g_literal(const Simplex& xi, const MeanFieldParams& p) {
  check_simplex(xi, p.C);
  const int C = p.C;
  const double top = xi[static_cast<std::size_t>(C)];
  std::vector<double> out(static_cast<std::size_t>(C), 0.0);
  for (int j = 0; j < C; ++j) {
    const double xj = xi[static_cast<std::size_t>(j)];
    const double le_j = cumulative(xi, j);
    const double le_jm1 = cumulative(xi, j - 1);
    double value = 2.0 * top * xj * le_j * position_sum(le_j, le_jm1, p.d);
    for (int i = j + 1; i <= C - 1; ++i) {
      value += 2.0 * top * xj * xi[static_cast<std::size_t>(i)] *
               position_sum(cumulative(xi, i), cumulative(xi, i - 1), p.d);
    }
    out[static_cast<std::size_t>(j)] = value;
  }
  return out;
}

std::vector<double> g_hform(const Simplex& xi, const MeanFieldParams& p) {
  check_simplex(xi, p.C);
  return g_raw(xi, p);
}

std::vector<double> F(const Simplex& xi, const MeanFieldParams& p) {
  check_simplex(xi, p.C);
  return drift_raw(xi, p);
}

OdeResult ode_integrate(const Simplex& xi0, const MeanFieldParams& p, double t_end, double step,
                        std::int64_t record_every) {
  if (!(step > 0.0)) throw std::invalid_argument("ODE step must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("ODE end time must be nonnegative");
  if (record_every < 1) throw std::invalid_argument("record interval must be positive");
  check_simplex(xi0, p.C);
  OdeResult out;
  Simplex xi = xi0;
  out.times.push_back(0.0);
  out.points.push_back(xi);
  const auto n_steps = static_cast<std::int64_t>(std::ceil(t_end / step - 1e-9));
  const std::size_t dim = xi.size();
  Simplex tmp(dim);
  for (std::int64_t s = 1; s <= n_steps; ++s) {
    const double h = std::min(step, t_end - (s - 1) * step);
    const auto k1 = drift_raw(xi, p);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = xi[i] + 0.5 * h * k1[i];
    const auto k2 = drift_raw(tmp, p);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = xi[i] + 0.5 * h * k2[i];
    const auto k3 = drift_raw(tmp, p);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = xi[i] + h * k3[i];
    const auto k4 = drift_raw(tmp, p);
    for (std::size_t i = 0; i < dim; ++i) xi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const double moved = project(xi);
    if (moved > 1e-6) throw std::runtime_error("ODE step left the simplex; reduce the step size");
    out.max_projection = std::max(out.max_projection, moved);
    out.steps = s;
    if (s % record_every == 0 || s == n_steps) {
      out.times.push_back(s == n_steps ? t_end : static_cast<double>(s) * step);
      out.points.push_back(xi);
    }
  }
  return out;
}

double fixed_point_residual(const Simplex& eta, const MeanFieldParams& p) {
  check_simplex(eta, p.C, 1e-9);
  const auto gv = g_raw(eta, p);
  double worst = 0.0;
  for (int j = 0; j < p.C; ++j) {
    const double r = -p.lambda * eta[static_cast<std::size_t>(j)] - p.lambda * gv[static_cast<std::size_t>(j)] +
                     (j + 1) * eta[static_cast<std::size_t>(j + 1)];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

namespace {

// One application of the chosen map before clamping. The returned vector may
// have negative entries; the caller decides whether to restart.
std::vector<double> raw_map(const Simplex& eta, const MeanFieldParams& p, bool backward) {
  const int C = p.C;
  const auto gv = g_raw(eta, p);
  std::vector<double> u(static_cast<std::size_t>(C + 1), 0.0);
  if (!backward) {
    double rest = 0.0;
    for (int j = 0; j < C; ++j) {
      u[static_cast<std::size_t>(j + 1)] =
          p.lambda * (eta[static_cast<std::size_t>(j)] + gv[static_cast<std::size_t>(j)]) / (j + 1);
      rest += u[static_cast<std::size_t>(j + 1)];
    }
    u[0] = 1.0 - rest;
  } else {
    double rest = 0.0;
    for (int j = 0; j < C; ++j) {
      u[static_cast<std::size_t>(j)] =
          (j + 1) * eta[static_cast<std::size_t>(j + 1)] / p.lambda - gv[static_cast<std::size_t>(j)];
      rest += u[static_cast<std::size_t>(j)];
    }
    u[static_cast<std::size_t>(C)] = 1.0 - rest;
  }
  return u;
}

FixedPointRun run_from(const Simplex& start, const MeanFieldParams& p, const FixedPointOptions& opt, bool backward) {
  FixedPointRun run;
  run.start = start;
  Simplex eta = start;
  double theta = opt.theta;
  for (std::int64_t it = 1; it <= opt.max_iters; ++it) {
    run.iterations = it;
    auto u = raw_map(eta, p, backward);
    // Only the forward map's mass coordinate can blow up; the backward map
    // is a contraction in both regimes, so clamping it is enough.
    if (!backward && u[0] < -1e-6 && run.restarts < opt.max_restarts) {
      ++run.restarts;
      theta *= 0.5;
      eta = barycenter(p.C);
      continue;
    }
    u = clamp_renormalise(std::move(u));
    Simplex next(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) next[k] = (1.0 - theta) * eta[k] + theta * u[k];
    const double delta = max_norm_diff(next, eta);
    eta = std::move(next);
    if (delta < opt.tolerance) {
      run.converged = true;
      break;
    }
  }
  // Polish: keep iterating briefly and retain the lowest-residual iterate, so
  // the reported point sits at the floating-point fixed point of the map.
  Simplex best = eta;
  double best_res = fixed_point_residual(best, p);
  if (run.converged) {
    for (int extra = 0; extra < 200 && best_res > 0.0; ++extra) {
      auto u = clamp_renormalise(raw_map(eta, p, backward));
      Simplex next(eta.size());
      for (std::size_t k = 0; k < eta.size(); ++k) next[k] = (1.0 - theta) * eta[k] + theta * u[k];
      if (next == eta) break;
      eta = std::move(next);
      const double res = fixed_point_residual(eta, p);
      if (res < best_res) {
        best_res = res;
        best = eta;
      }
    }
  }
  run.eta = best;
  run.residual = best_res;
  return run;
}

}  // namespace

FixedPointResult fixed_point(const MeanFieldParams& p, const FixedPointOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(options.theta > 0.0 && options.theta <= 1.0)) throw std::invalid_argument("damping must be in (0, 1]");
  std::vector<Simplex> starts = options.starts;
  if (starts.empty()) {
    for (int j = 0; j <= p.C; ++j) starts.push_back(vertex(p.C, j));
    starts.push_back(barycenter(p.C));
  }
  for (const auto& s : starts) check_simplex(s, p.C);
  const bool backward = options.map == FixedPointMap::Auto ? p.regime() == Regime::High
                                                           : options.map == FixedPointMap::Backward;

  FixedPointResult res;
  res.map = backward ? "backward" : "forward";
  res.converged = true;
  const Simplex centre = barycenter(p.C);
  std::size_t pick = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    res.runs.push_back(run_from(starts[i], p, options, backward));
    const auto& run = res.runs.back();
    res.converged = res.converged && run.converged;
    res.residual = std::max(res.residual, run.residual);
    res.iterations = std::max(res.iterations, run.iterations);
    if (max_norm_diff(starts[i], centre) < 1e-15) pick = i;
  }
  res.eta = res.runs[pick].eta;
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    for (std::size_t k = i + 1; k < res.runs.size(); ++k) {
      res.diameter = std::max(res.diameter, max_norm_diff(res.runs[i].eta, res.runs[k].eta));
    }
  }
  return res;
}

double g_lipschitz_bound(const Simplex& xi, const Simplex& eta, const MeanFieldParams& p) {
  const int C = p.C;
  return (1.0 + eta[static_cast<std::size_t>(C)] * (12.0 * C + 3.0)) * p.d *
         std::max(cumulative(xi, C - 1), cumulative(eta, C - 1));
}

LipschitzProbe g_lipschitz_probe(const MeanFieldParams& p, std::int64_t samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  LipschitzProbe probe;
  for (std::int64_t s = 0; s < samples; ++s) {
    const Simplex xi = random_simplex(p.C, rng);
    Simplex eta;
    if (s % 2 == 0) {
      eta = random_simplex(p.C, rng);
    } else {
      // Nearby pair: probes the local slope rather than a chord.
      const Simplex dir = random_simplex(p.C, rng);
      const double t = std::pow(10.0, -1.0 - 5.0 * rng.uniform01());
      eta.resize(xi.size());
      for (std::size_t k = 0; k < xi.size(); ++k) eta[k] = (1.0 - t) * xi[k] + t * dir[k];
    }
    double dist = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) dist += std::abs(xi[k] - eta[k]);
    if (dist == 0.0) continue;
    const auto gx = g_raw(xi, p);
    const auto ge = g_raw(eta, p);
    double num = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k) num += std::abs(gx[k] - ge[k]);
    const double ratio = num / dist;
    const double bound = g_lipschitz_bound(xi, eta, p);
    ++probe.samples;
    probe.max_ratio = std::max(probe.max_ratio, ratio);
    if (bound > 0.0) probe.max_ratio_to_bound = std::max(probe.max_ratio_to_bound, ratio / bound);
    if (ratio > bound + 1e-9) ++probe.violations;
  }
  return probe;
}

}  // namespace bdar
