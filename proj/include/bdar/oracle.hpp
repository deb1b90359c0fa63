#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bdar/jump_chain.hpp"
#include "bdar/meanfield.hpp"
#include "bdar/params.hpp"
#include "bdar/rng.hpp"
#include "bdar/state.hpp"

namespace bdar {

/// Thrown when a state space is too large to enumerate.
class StateSpaceTooLarge : public std::runtime_error {
 public:
  StateSpaceTooLarge(const std::string& what, double estimate) : std::runtime_error(what), estimate_(estimate) {}
  /// Lower bound on the number of feasible states.
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

/// Bijection between the feasible load vectors of a tiny (n, C) and 0..M-1.
class StateIndex {
 public:
  static constexpr std::int64_t kDefaultCap = 1000000;

  /// Enumerates in lexicographic order of the count vector over valid
  /// routes (canonical route order). Throws StateSpaceTooLarge above cap.
  static StateIndex enumerate(int n, int C, std::int64_t cap = kDefaultCap);

  int n() const { return n_; }
  int capacity() const { return C_; }
  std::int64_t size() const { return static_cast<std::int64_t>(states_.size()); }
  /// Route ids (NetworkState numbering) that can carry calls.
  const std::vector<std::size_t>& routes() const { return routes_; }

  NetworkState state(std::int64_t i) const;
  /// Index of a state; -1 if absent.
  std::int64_t find(const NetworkState& s) const;

 private:
  std::uint64_t key(const NetworkState& s) const;

  int n_ = 0;
  int C_ = 0;
  std::vector<std::size_t> routes_;
  std::vector<std::vector<int>> states_;
  std::unordered_map<std::uint64_t, std::int64_t> lookup_;
};

inline StateIndex enumerate_states(const ModelParams& params, std::int64_t cap = StateIndex::kDefaultCap) {
  return StateIndex::enumerate(params.n, params.C, cap);
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One-step jump-chain kernel, built by enumerating every endpoint pair,
/// every candidate tuple and every departure slot.
SparseMatrix build_transition_matrix(const ModelParams& params, const StateIndex& index,
                                     RoutingVariant variant = RoutingVariant::Bdar);

/// Continuous-time generator: each pair receives calls at rate lambda, each
/// call departs at rate 1. Routing here is a separate minimum scan, not the
/// simulator's routine.
SparseMatrix build_generator(const ModelParams& params, const StateIndex& index);

struct StationaryResult {
  Eigen::VectorXd pi;
  double residual = 0.0;  // ||pi P - pi||_1
  std::string method;     // "dense-lu" or "power"
  std::int64_t iterations = 0;
};

/// Dense LU (one balance equation replaced by sum pi = 1) up to dense_limit
/// states, power iteration above. Throws std::runtime_error if the power
/// iteration does not reach tolerance.
StationaryResult stationary(const SparseMatrix& P, std::int64_t dense_limit = 10000, double tolerance = 1e-13,
                            std::int64_t max_iters = 10000000);

struct ExactExpectations {
  std::vector<Simplex> zeta_by_node;           // E f_{v,j} / (n-1)
  Simplex zeta;                                // average over nodes
  std::vector<std::vector<double>> g_by_node;  // E g_{v,k}
  std::optional<double> phi_tilde;             // E phi~ (n >= 4 only)
};

ExactExpectations exact_expectations(const Eigen::VectorXd& pi, const StateIndex& index, const ModelParams& params);

struct QCheck {
  double defect = 0.0;
  std::int64_t row = -1;
  std::int64_t col = -1;
};

/// max |P - (Q / ((lambda + C) L) + I)| entrywise.
QCheck q_matrix_check(const SparseMatrix& P, const SparseMatrix& Q, const ModelParams& params);

struct BalanceDefects {
  /// max over x, v, j of |(P f_{v,j})(x) - f_{v,j}(x) - rhs(x)|, with rhs the
  /// load-shift expression in f and g divided by (lambda + C) L.
  double pointwise = 0.0;
  /// max over v, j of |sum_x pi(x) [(P f_{v,j})(x) - f_{v,j}(x)]|.
  double stationarity = 0.0;
  /// max over v, k of |-lambda zeta(k) - lambda/(n-1) E g_{v,k} + (k+1) zeta(k+1)|.
  double fixed_point_identity = 0.0;
};

BalanceDefects balance_defects(const SparseMatrix& P, const Eigen::VectorXd& pi, const StateIndex& index,
                               const ModelParams& params);

/// Visit frequencies of a simulated chain started empty.
std::vector<double> simulated_frequencies(const ModelParams& params, const StateIndex& index, std::int64_t steps,
                                          Rng rng);

}  // namespace bdar
