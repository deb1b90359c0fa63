#include "bdar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bdar/coupling.hpp"
#include "bdar/replicas.hpp"

namespace bdar {

std::vector<int> f_counts(const NetworkState& state, int v) {
  if (v < 0 || v >= state.n()) throw std::invalid_argument("node index out of range");
  std::vector<int> f(static_cast<std::size_t>(state.capacity() + 1));
  for (int j = 0; j <= state.capacity(); ++j) f[static_cast<std::size_t>(j)] = state.node_load_count(v, j);
  return f;
}

Phi phi_functionals(const NetworkState& state) {
  const int n = state.n();
  const int C = state.capacity();
  if (n < 4) throw std::invalid_argument("uniformity functionals need n >= 4");
  const int width = C + 1;
  const double m = n - 2;
  Phi out;

  for (int j = 0; j <= C; ++j) {
    int lo = n;
    int hi = -1;
    for (int v = 0; v < n; ++v) {
      lo = std::min(lo, state.node_load_count(v, j));
      hi = std::max(hi, state.node_load_count(v, j));
    }
    out.phi2 = std::max(out.phi2, (hi - lo) / m);
  }

  std::vector<int> joint(static_cast<std::size_t>(width * width));
  std::vector<int> mu(static_cast<std::size_t>(width));
  std::vector<int> mv(static_cast<std::size_t>(width));
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      std::fill(joint.begin(), joint.end(), 0);
      std::fill(mu.begin(), mu.end(), 0);
      std::fill(mv.begin(), mv.end(), 0);
      for (int w = 0; w < n; ++w) {
        if (w == u || w == v) continue;
        const int a = state.load(u, w);
        const int b = state.load(v, w);
        ++joint[static_cast<std::size_t>(a * width + b)];
        ++mu[static_cast<std::size_t>(a)];
        ++mv[static_cast<std::size_t>(b)];
      }
      for (int j = 0; j <= C; ++j) {
        for (int k = 0; k <= C; ++k) {
          const double value = joint[static_cast<std::size_t>(j * width + k)] / m -
                               static_cast<double>(mu[static_cast<std::size_t>(j)]) * mv[static_cast<std::size_t>(k)] /
                                   (m * m);
          out.phi1 = std::max(out.phi1, std::abs(value));
        }
      }
    }
  }
  out.phi_tilde = std::max(out.phi1, out.phi2);
  return out;
}

namespace {

// Calls fn(tuple) for every tuple of length len over the candidate list.
template <class Fn>
void for_each_tuple(const std::vector<int>& candidates, int len, std::vector<int>& tuple, int pos, Fn&& fn) {
  if (pos == len) {
    fn(tuple);
    return;
  }
  for (int w : candidates) {
    tuple[static_cast<std::size_t>(pos)] = w;
    for_each_tuple(candidates, len, tuple, pos + 1, fn);
  }
}

}  // namespace

std::vector<double> empirical_g_literal(const NetworkState& state, int v, int d) {
  const int n = state.n();
  const int C = state.capacity();
  if (v < 0 || v >= n) throw std::invalid_argument("node index out of range");
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  auto L = [&](int a, int b) { return state.load(a, b); };
  auto eq = [&](int a, int b, int j) { return L(a, b) == j ? 1 : 0; };
  auto le = [&](int a, int b, int j) { return L(a, b) <= j ? 1 : 0; };  // le(.,.,-1) == 0

  // Product over positions s != r of the "route s loses" factors, with the
  // two legs of route s given by (p, q) -> (p, w_s), (q, w_s).
  auto others = [&](const std::vector<int>& w, int r, int p, int q, int level) {
    double prod = 1.0;
    for (int s = 0; s < d; ++s) {
      if (s == r) continue;
      const int ws = w[static_cast<std::size_t>(s)];
      const int cut = s < r ? level : level - 1;
      prod *= 1.0 - le(p, ws, cut) * le(q, ws, cut);
    }
    return prod;
  };

  std::vector<double> g(static_cast<std::size_t>(C), 0.0);
  std::vector<int> tuple(static_cast<std::size_t>(d));
  for (int j = 0; j < C; ++j) {
    double total = 0.0;
    for (int u = 0; u < n; ++u) {
      if (u == v) continue;
      // v is an endpoint of the arriving call {u, v}.
      if (eq(u, v, C)) {
        std::vector<int> cands;
        for (int w = 0; w < n; ++w) {
          if (w != u && w != v) cands.push_back(w);
        }
        for_each_tuple(cands, d, tuple, 0, [&](const std::vector<int>& w) {
          for (int r = 0; r < d; ++r) {
            const int wr = w[static_cast<std::size_t>(r)];
            if (!eq(v, wr, j)) continue;
            if (le(u, wr, j)) total += others(w, r, u, v, j);
            for (int i = j + 1; i <= C - 1; ++i) {
              if (eq(u, wr, i)) total += others(w, r, u, v, i);
            }
          }
        });
      }
      // v is the intermediate at position r of an arrival {u, v'}; the leg uv
      // is the one counted here (the leg v'v is counted with u and v' swapped).
      if (!eq(u, v, j)) continue;
      for (int vp = 0; vp < n; ++vp) {
        if (vp == u || vp == v || !eq(u, vp, C)) continue;
        std::vector<int> cands;
        for (int w = 0; w < n; ++w) {
          if (w != u && w != vp) cands.push_back(w);
        }
        for (int r = 0; r < d; ++r) {
          std::vector<int> rest(static_cast<std::size_t>(d - 1));
          for_each_tuple(cands, d - 1, rest, 0, [&](const std::vector<int>& partial) {
            std::vector<int> w(static_cast<std::size_t>(d));
            for (int s = 0, k = 0; s < d; ++s) {
              w[static_cast<std::size_t>(s)] = s == r ? v : partial[static_cast<std::size_t>(k++)];
            }
            if (le(vp, v, j)) total += others(w, r, u, vp, j);
            for (int i = j + 1; i <= C - 1; ++i) {
              if (eq(vp, v, i)) total += others(w, r, u, vp, i);
            }
          });
        }
      }
    }
    g[static_cast<std::size_t>(j)] = total / std::pow(static_cast<double>(n - 2), d);
  }
  return g;
}

std::vector<std::vector<double>> empirical_g_profile(const NetworkState& state, int d) {
  const int n = state.n();
  const int C = state.capacity();
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  const Topology& topo = state.topology();
  const double m = n - 2;
  std::vector<std::vector<double>> g(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(C), 0.0));
  std::vector<int> level(static_cast<std::size_t>(n));
  std::vector<int> count(static_cast<std::size_t>(C + 1));
  std::vector<double> weight(static_cast<std::size_t>(C));
  for (int p = 0; p < state.pair_count(); ++p) {
    if (state.load(p) != C) continue;
    const int a = topo.pair_u[static_cast<std::size_t>(p)];
    const int b = topo.pair_v[static_cast<std::size_t>(p)];
    std::fill(count.begin(), count.end(), 0);
    for (int w = 0; w < n; ++w) {
      if (w == a || w == b) continue;
      const int la = state.load(a, w);
      const int lb = state.load(b, w);
      const int lv = (la < C && lb < C) ? std::max(la, lb) : C;
      level[static_cast<std::size_t>(w)] = lv;
      ++count[static_cast<std::size_t>(lv)];
    }
    // Probability that a given candidate at level k is the one chosen:
    // sum over its position r of P(earlier ones > k) P(later ones >= k) / (n-2).
    int above = 0;
    for (int k = C; k >= 0; --k) {
      const int at_least = above + count[static_cast<std::size_t>(k)];
      if (k < C) {
        const double A = above / m;
        const double B = at_least / m;
        double s = 0.0;
        for (int r = 1; r <= d; ++r) s += std::pow(A, r - 1) * std::pow(B, d - r);
        weight[static_cast<std::size_t>(k)] = s / m;
      }
      above = at_least;
    }
    for (int w = 0; w < n; ++w) {
      if (w == a || w == b) continue;
      const int lv = level[static_cast<std::size_t>(w)];
      if (lv == C) continue;
      const double wt = weight[static_cast<std::size_t>(lv)];
      const auto la = static_cast<std::size_t>(state.load(a, w));
      const auto lb = static_cast<std::size_t>(state.load(b, w));
      g[static_cast<std::size_t>(a)][la] += wt;
      g[static_cast<std::size_t>(b)][lb] += wt;
      g[static_cast<std::size_t>(w)][la] += wt;
      g[static_cast<std::size_t>(w)][lb] += wt;
    }
  }
  return g;
}

std::vector<double> empirical_g(const NetworkState& state, int v, int d) {
  if (v < 0 || v >= state.n()) throw std::invalid_argument("node index out of range");
  if (d == 1) return empirical_g_literal(state, v, d);
  return empirical_g_profile(state, d)[static_cast<std::size_t>(v)];
}

StatSnapshot take_snapshot(const NetworkState& state, const ModelParams& params, std::int64_t step,
                           std::int64_t blocked_so_far, bool with_phi) {
  StatSnapshot snap;
  snap.step = step;
  for (int v = 0; v < state.n(); ++v) snap.f.push_back(f_counts(state, v));
  if (with_phi) snap.phi = phi_functionals(state);
  snap.in_R = in_R(state, params);
  snap.calls = state.total_calls();
  snap.blocked_so_far = blocked_so_far;
  return snap;
}

std::int64_t default_burn_in(const ModelParams& params) {
  return std::max(params.burn_in_steps(), steps_for_time(params, 20.0));
}

EquilibriumEstimate equilibrium_average(const ModelParams& params, std::int64_t total_steps, std::int64_t burn_in,
                                        std::int64_t thinning, Rng rng, RoutingVariant variant,
                                        const SnapshotObserver& observer) {
  if (burn_in < 0 || burn_in >= total_steps) throw std::invalid_argument("burn-in must be below the total steps");
  if (thinning < 1) throw std::invalid_argument("thinning must be positive");
  const int C = params.C;
  const auto L = static_cast<double>(params.pair_count());
  JumpChain chain(params, NetworkState(params.n, C), rng, variant);
  chain.run(burn_in);
  chain.reset_counters();

  std::vector<std::vector<double>> rows;
  for (std::int64_t t = burn_in + 1; t <= total_steps; ++t) {
    chain.step();
    if ((t - burn_in) % thinning != 0) continue;
    const NetworkState& s = chain.state();
    std::vector<double> row(static_cast<std::size_t>(C + 1));
    for (int j = 0; j <= C; ++j) row[static_cast<std::size_t>(j)] = static_cast<double>(s.links_with_load(j)) / L;
    rows.push_back(std::move(row));
    if (observer) observer(t, s);
  }

  EquilibriumEstimate est;
  est.burn_in = burn_in;
  est.thinning = thinning;
  est.samples = static_cast<std::int64_t>(rows.size());
  est.arrivals = chain.arrivals();
  est.blocked = chain.blocked();
  est.zeta.assign(static_cast<std::size_t>(C + 1), 0.0);
  est.standard_error.assign(static_cast<std::size_t>(C + 1), std::nan(""));
  if (rows.empty()) throw std::invalid_argument("no snapshots retained; lower the thinning or add steps");
  for (const auto& row : rows) {
    for (int j = 0; j <= C; ++j) est.zeta[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
  }
  for (double& z : est.zeta) z /= static_cast<double>(rows.size());

  est.batches = static_cast<int>(std::min<std::size_t>(30, rows.size()));
  if (est.batches >= 2) {
    const std::size_t per = rows.size() / static_cast<std::size_t>(est.batches);
    for (int j = 0; j <= C; ++j) {
      std::vector<double> means;
      for (int b = 0; b < est.batches; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < per; ++k) s += rows[static_cast<std::size_t>(b) * per + k][static_cast<std::size_t>(j)];
        means.push_back(s / static_cast<double>(per));
      }
      double mu = 0.0;
      for (double x : means) mu += x;
      mu /= static_cast<double>(means.size());
      double var = 0.0;
      for (double x : means) var += (x - mu) * (x - mu);
      var /= static_cast<double>(means.size() - 1);
      est.standard_error[static_cast<std::size_t>(j)] = std::sqrt(var / static_cast<double>(means.size()));
    }
  }
  return est;
}

std::optional<double> blocking_rate(std::int64_t arrivals, std::int64_t blocked) {
  if (arrivals <= 0) return std::nullopt;
  return static_cast<double>(blocked) / static_cast<double>(arrivals);
}

ConcentrationResult concentration_experiment(const ModelParams& params, int replicas, std::int64_t steps, int node,
                                             int load, std::uint64_t seed, int threads) {
  if (replicas < 100) throw std::invalid_argument("concentration needs at least 100 replicas");
  if (node < 0 || node >= params.n) throw std::invalid_argument("node index out of range");
  if (load < 0 || load > params.C) throw std::invalid_argument("load index out of range");
  ConcentrationResult res;
  res.n = params.n;
  res.node = node;
  res.load = load;
  res.steps = steps;
  res.values.assign(static_cast<std::size_t>(replicas), 0);
  const Rng root(seed);
  for_each_replica(replicas, threads, [&](std::int64_t i) {
    JumpChain chain(params, NetworkState(params.n, params.C), root.split(static_cast<std::uint64_t>(i)));
    chain.run(steps);
    res.values[static_cast<std::size_t>(i)] = chain.state().node_load_count(node, load);
  });
  double sum = 0.0;
  for (int v : res.values) sum += v;
  res.mean = sum / replicas;
  double ss = 0.0;
  for (int v : res.values) ss += (v - res.mean) * (v - res.mean);
  res.variance = ss / (replicas - 1);
  const double rn = std::sqrt(static_cast<double>(params.n));
  for (double mult : {1.0, 2.0, 4.0}) {
    const double a = mult * rn;
    int over = 0;
    for (int v : res.values) over += std::abs(v - res.mean) > a ? 1 : 0;
    res.tails.push_back({a, static_cast<double>(over) / replicas});
  }
  return res;
}

}  // namespace bdar
