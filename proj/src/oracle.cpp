#include "bdar/oracle.hpp"

#include <cmath>
#include <map>

#include "bdar/stats.hpp"

namespace bdar {

namespace {

std::vector<std::vector<int>> candidate_tuples(int n, int u, int v, int d) {
  std::vector<int> cands;
  for (int w = 0; w < n; ++w) {
    if (w != u && w != v) cands.push_back(w);
  }
  std::vector<std::vector<int>> out{{}};
  for (int r = 0; r < d; ++r) {
    std::vector<std::vector<int>> next;
    for (const auto& t : out) {
      for (int w : cands) {
        auto e = t;
        e.push_back(w);
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

StateIndex StateIndex::enumerate(int n, int C, std::int64_t cap) {
  if (n < 3 || C < 1) throw std::invalid_argument("oracle needs n >= 3 and C >= 1");
  const double L = static_cast<double>(binom2(n));
  // Direct-only states alone number (C+1)^L.
  const double direct_only = std::pow(C + 1.0, L);
  if (direct_only > static_cast<double>(cap)) {
    throw StateSpaceTooLarge("state space has at least " + std::to_string(direct_only) +
                                 " feasible states, above the limit of " + std::to_string(cap),
                             direct_only);
  }

  StateIndex idx;
  idx.n_ = n;
  idx.C_ = C;
  const NetworkState empty(n, C);
  const Topology& topo = empty.topology();
  for (int p = 0; p < empty.pair_count(); ++p) idx.routes_.push_back(empty.direct_route_id(p));
  for (int p = 0; p < empty.pair_count(); ++p) {
    for (int w = 0; w < n; ++w) {
      if (w != topo.pair_u[static_cast<std::size_t>(p)] && w != topo.pair_v[static_cast<std::size_t>(p)]) {
        idx.routes_.push_back(empty.indirect_route_id(p, w));
      }
    }
  }
  if (static_cast<double>(idx.routes_.size()) * std::log2(C + 1.0) > 62.0) {
    throw StateSpaceTooLarge("too many routes to index the state space", direct_only);
  }

  // Links used by each route.
  std::vector<std::vector<int>> links;
  for (std::size_t r : idx.routes_) {
    const Route route = empty.route(r);
    if (route.is_direct()) {
      links.push_back({topo.link(route.endpoints.u, route.endpoints.v)});
    } else {
      links.push_back({topo.link(route.endpoints.u, route.via), topo.link(route.via, route.endpoints.v)});
    }
  }

  std::vector<int> loads(static_cast<std::size_t>(empty.pair_count()), 0);
  std::vector<int> counts(idx.routes_.size(), 0);
  auto dfs = [&](auto&& self, std::size_t k) -> void {
    if (k == counts.size()) {
      if (static_cast<std::int64_t>(idx.states_.size()) >= cap) {
        throw StateSpaceTooLarge("state space exceeds the limit of " + std::to_string(cap), static_cast<double>(cap) + 1);
      }
      idx.states_.push_back(counts);
      return;
    }
    for (int c = 0; c <= C; ++c) {
      bool ok = true;
      for (int l : links[k]) ok = ok && loads[static_cast<std::size_t>(l)] + c <= C;
      if (!ok) break;
      for (int l : links[k]) loads[static_cast<std::size_t>(l)] += c;
      counts[k] = c;
      self(self, k + 1);
      for (int l : links[k]) loads[static_cast<std::size_t>(l)] -= c;
    }
    counts[k] = 0;
  };
  dfs(dfs, 0);

  for (std::size_t i = 0; i < idx.states_.size(); ++i) {
    std::uint64_t key = 0;
    for (std::size_t k = idx.routes_.size(); k-- > 0;) key = key * static_cast<std::uint64_t>(C + 1) + idx.states_[i][k];
    idx.lookup_.emplace(key, static_cast<std::int64_t>(i));
  }
  return idx;
}

NetworkState StateIndex::state(std::int64_t i) const {
  NetworkState s(n_, C_);
  const auto& counts = states_.at(static_cast<std::size_t>(i));
  for (std::size_t k = 0; k < routes_.size(); ++k) {
    if (counts[k] != 0) s.add_calls(routes_[k], counts[k]);
  }
  return s;
}

std::uint64_t StateIndex::key(const NetworkState& s) const {
  std::uint64_t key = 0;
  for (std::size_t k = routes_.size(); k-- > 0;) {
    key = key * static_cast<std::uint64_t>(C_ + 1) + static_cast<std::uint64_t>(s.route_calls(routes_[k]));
  }
  return key;
}

std::int64_t StateIndex::find(const NetworkState& s) const {
  if (s.n() != n_ || s.capacity() != C_) return -1;
  for (std::size_t r : routes_) {
    if (s.route_calls(r) < 0 || s.route_calls(r) > C_) return -1;
  }
  const auto it = lookup_.find(key(s));
  return it == lookup_.end() ? -1 : it->second;
}

SparseMatrix build_transition_matrix(const ModelParams& params, const StateIndex& index, RoutingVariant variant) {
  if (params.n != index.n() || params.C != index.capacity()) throw std::invalid_argument("index does not match parameters");
  const std::int64_t M = index.size();
  const double L = static_cast<double>(params.pair_count());
  const double pa = params.lambda / (params.lambda + params.C);
  const double pd = params.C / (params.lambda + params.C);
  const double slots = static_cast<double>(params.slot_count());
  const double tuple_weight = 1.0 / std::pow(static_cast<double>(params.n - 2), params.d);

  const NetworkState empty(params.n, params.C);
  const Topology& topo = empty.topology();
  std::vector<std::vector<std::vector<int>>> tuples;
  for (int p = 0; p < empty.pair_count(); ++p) {
    tuples.push_back(candidate_tuples(params.n, topo.pair_u[static_cast<std::size_t>(p)],
                                      topo.pair_v[static_cast<std::size_t>(p)], params.d));
  }

  std::vector<Eigen::Triplet<double>> trips;
  for (std::int64_t i = 0; i < M; ++i) {
    const NetworkState x = index.state(i);
    std::map<std::int64_t, double> row;
    for (int p = 0; p < x.pair_count(); ++p) {
      ArrivalEvent ev;
      ev.pair = p;
      ev.u = topo.pair_u[static_cast<std::size_t>(p)];
      ev.v = topo.pair_v[static_cast<std::size_t>(p)];
      for (const auto& t : tuples[static_cast<std::size_t>(p)]) {
        ev.via = t;
        NetworkState y = x;
        apply_arrival(y, ev, route(variant, x, ev), true);
        const std::int64_t j = index.find(y);
        if (j < 0) throw std::logic_error("arrival led outside the enumerated state space");
        row[j] += pa / L * tuple_weight;
      }
    }
    for (std::size_t r : index.routes()) {
      const int c = x.route_calls(r);
      if (c == 0) continue;
      NetworkState y = x;
      y.add_calls(r, -1);
      row[index.find(y)] += pd * c / slots;
    }
    row[i] += pd * (1.0 - static_cast<double>(x.total_calls()) / slots);
    for (const auto& [j, v] : row) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SparseMatrix P(static_cast<int>(M), static_cast<int>(M));
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

SparseMatrix build_generator(const ModelParams& params, const StateIndex& index) {
  const std::int64_t M = index.size();
  const int n = params.n;
  const int C = params.C;
  const double per_tuple = params.lambda / std::pow(static_cast<double>(n - 2), params.d);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::int64_t i = 0; i < M; ++i) {
    const NetworkState x = index.state(i);
    std::map<std::int64_t, double> row;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        const int pair = x.topology().link(u, v);
        for (const auto& via : candidate_tuples(n, u, v, params.d)) {
          std::int64_t target_route = -1;
          if (x.load(u, v) < C) {
            target_route = static_cast<std::int64_t>(x.direct_route_id(pair));
          } else {
            int best = -1;
            int best_max = C;
            for (std::size_t r = 0; r < via.size(); ++r) {
              const int a = x.load(u, via[r]);
              const int b = x.load(via[r], v);
              const int worst = a > b ? a : b;
              if (worst < best_max) {
                best_max = worst;
                best = via[r];
              }
            }
            if (best >= 0) target_route = static_cast<std::int64_t>(x.indirect_route_id(pair, best));
          }
          if (target_route < 0) continue;
          NetworkState y = x;
          y.add_calls(static_cast<std::size_t>(target_route), +1);
          row[index.find(y)] += per_tuple;
        }
      }
    }
    for (std::size_t r : index.routes()) {
      const int c = x.route_calls(r);
      if (c == 0) continue;
      NetworkState y = x;
      y.add_calls(r, -1);
      row[index.find(y)] += c;
    }
    double out = 0.0;
    for (const auto& [j, q] : row) {
      if (j < 0) throw std::logic_error("generator transition outside the state space");
      if (j == i) continue;
      out += q;
      trips.emplace_back(static_cast<int>(i), static_cast<int>(j), q);
    }
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), -out);
  }
  SparseMatrix Q(static_cast<int>(M), static_cast<int>(M));
  Q.setFromTriplets(trips.begin(), trips.end());
  return Q;
}

StationaryResult stationary(const SparseMatrix& P, std::int64_t dense_limit, double tolerance, std::int64_t max_iters) {
  const Eigen::Index M = P.rows();
  if (M == 0 || P.cols() != M) throw std::invalid_argument("transition matrix must be square and nonempty");
  StationaryResult res;
  const SparseMatrix Pt = P.transpose();
  if (M <= dense_limit) {
    Eigen::MatrixXd A = Eigen::MatrixXd(Pt) - Eigen::MatrixXd::Identity(M, M);
    A.row(M - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(M);
    b(M - 1) = 1.0;
    res.pi = A.partialPivLu().solve(b);
    res.method = "dense-lu";
  } else {
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(M, 1.0 / static_cast<double>(M));
    res.method = "power";
    for (std::int64_t it = 1; it <= max_iters; ++it) {
      Eigen::VectorXd next = Pt * pi;
      next /= next.sum();
      const double change = (next - pi).lpNorm<1>();
      pi = std::move(next);
      res.iterations = it;
      if (change < tolerance) break;
    }
    res.pi = pi;
  }
  res.residual = (Pt * res.pi - res.pi).lpNorm<1>();
  if (res.method == "power" && res.residual > 1e-10) {
    throw std::runtime_error("power iteration did not converge (residual " + std::to_string(res.residual) + ")");
  }
  return res;
}

ExactExpectations exact_expectations(const Eigen::VectorXd& pi, const StateIndex& index, const ModelParams& params) {
  const int n = params.n;
  const int C = params.C;
  ExactExpectations out;
  out.zeta_by_node.assign(static_cast<std::size_t>(n), Simplex(static_cast<std::size_t>(C + 1), 0.0));
  out.g_by_node.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(C), 0.0));
  double phi = 0.0;
  for (std::int64_t i = 0; i < index.size(); ++i) {
    const double w = pi(static_cast<Eigen::Index>(i));
    const NetworkState x = index.state(i);
    for (int v = 0; v < n; ++v) {
      for (int j = 0; j <= C; ++j) {
        out.zeta_by_node[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)] +=
            w * x.node_load_count(v, j) / (n - 1.0);
      }
      const auto gv = empirical_g_literal(x, v, params.d);
      for (int k = 0; k < C; ++k) out.g_by_node[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)] += w * gv[static_cast<std::size_t>(k)];
    }
    if (n >= 4) phi += w * phi_functionals(x).phi_tilde;
  }
  out.zeta.assign(static_cast<std::size_t>(C + 1), 0.0);
  for (const auto& z : out.zeta_by_node) {
    for (int j = 0; j <= C; ++j) out.zeta[static_cast<std::size_t>(j)] += z[static_cast<std::size_t>(j)] / n;
  }
  if (n >= 4) out.phi_tilde = phi;
  return out;
}

QCheck q_matrix_check(const SparseMatrix& P, const SparseMatrix& Q, const ModelParams& params) {
  if (P.rows() != Q.rows() || P.cols() != Q.cols()) throw std::invalid_argument("P and Q differ in size");
  const double scale = 1.0 / ((params.lambda + params.C) * static_cast<double>(params.pair_count()));
  SparseMatrix I(P.rows(), P.cols());
  I.setIdentity();
  const SparseMatrix D = P - (scale * Q + I);
  QCheck out;
  for (int r = 0; r < D.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(D, r); it; ++it) {
      if (std::abs(it.value()) > out.defect) {
        out.defect = std::abs(it.value());
        out.row = it.row();
        out.col = it.col();
      }
    }
  }
  return out;
}

BalanceDefects balance_defects(const SparseMatrix& P, const Eigen::VectorXd& pi, const StateIndex& index,
                               const ModelParams& params) {
  const int n = params.n;
  const int C = params.C;
  const double lam = params.lambda;
  const double scale = 1.0 / ((lam + C) * static_cast<double>(params.pair_count()));
  const std::int64_t M = index.size();

  // f[i][v][j] and g[i][v][j] for every state.
  std::vector<std::vector<std::vector<int>>> f(static_cast<std::size_t>(M));
  std::vector<std::vector<std::vector<double>>> g(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < M; ++i) {
    const NetworkState x = index.state(i);
    for (int v = 0; v < n; ++v) {
      f[static_cast<std::size_t>(i)].push_back(f_counts(x, v));
      g[static_cast<std::size_t>(i)].push_back(empirical_g_literal(x, v, params.d));
    }
  }

  BalanceDefects out;
  std::vector<std::vector<double>> drift(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(C + 1), 0.0));
  for (std::int64_t i = 0; i < M; ++i) {
    const auto& fi = f[static_cast<std::size_t>(i)];
    const auto& gi = g[static_cast<std::size_t>(i)];
    for (int v = 0; v < n; ++v) {
      const auto& fv = fi[static_cast<std::size_t>(v)];
      const auto& gv = gi[static_cast<std::size_t>(v)];
      auto F = [&](int j) { return static_cast<double>(fv[static_cast<std::size_t>(j)]); };
      auto G = [&](int j) { return gv[static_cast<std::size_t>(j)]; };
      for (int j = 0; j <= C; ++j) {
        double pf = 0.0;
        for (SparseMatrix::InnerIterator it(P, static_cast<Eigen::Index>(i)); it; ++it) {
          pf += it.value() * f[static_cast<std::size_t>(it.col())][static_cast<std::size_t>(v)][static_cast<std::size_t>(j)];
        }
        const double change = pf - F(j);
        double rhs = 0.0;
        if (j == 0) {
          rhs = -lam * F(0) - lam * G(0) + F(1);
        } else if (j < C) {
          rhs = lam * F(j - 1) - lam * F(j) + lam * G(j - 1) - lam * G(j) - j * F(j) + (j + 1) * F(j + 1);
        } else {
          rhs = lam * F(C - 1) + lam * G(C - 1) - C * F(C);
        }
        out.pointwise = std::max(out.pointwise, std::abs(change - scale * rhs));
        drift[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)] += pi(static_cast<Eigen::Index>(i)) * change;
      }
    }
  }
  for (const auto& row : drift) {
    for (double x : row) out.stationarity = std::max(out.stationarity, std::abs(x));
  }

  const ExactExpectations ex = exact_expectations(pi, index, params);
  for (int v = 0; v < n; ++v) {
    const auto& z = ex.zeta_by_node[static_cast<std::size_t>(v)];
    const auto& eg = ex.g_by_node[static_cast<std::size_t>(v)];
    for (int k = 0; k < C; ++k) {
      const double r = -lam * z[static_cast<std::size_t>(k)] - lam / (n - 1.0) * eg[static_cast<std::size_t>(k)] +
                       (k + 1) * z[static_cast<std::size_t>(k + 1)];
      out.fixed_point_identity = std::max(out.fixed_point_identity, std::abs(r));
    }
  }
  return out;
}

std::vector<double> simulated_frequencies(const ModelParams& params, const StateIndex& index, std::int64_t steps,
                                          Rng rng) {
  if (steps < 1) throw std::invalid_argument("steps must be positive");
  JumpChain chain(params, NetworkState(params.n, params.C), rng);
  std::vector<double> freq(static_cast<std::size_t>(index.size()), 0.0);
  for (std::int64_t t = 0; t < steps; ++t) {
    chain.step();
    const std::int64_t i = index.find(chain.state());
    if (i < 0) throw std::logic_error("simulated chain left the enumerated state space");
    freq[static_cast<std::size_t>(i)] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(steps);
  return freq;
}

}  // namespace bdar
