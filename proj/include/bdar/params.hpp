#pragma once

#include <cstdint>
#include <string>

namespace bdar {

enum class Regime { Low, High, Unsupported };

std::string to_string(Regime regime);

inline std::int64_t binom2(std::int64_t n) { return n * (n - 1) / 2; }

/// Model parameters (n, C, d, lambda) for the complete-graph routing model,
/// plus the constants derived from them.
///
/// Construct through make(), which rejects values outside
/// n >= 3, C >= 1, d >= 1, lambda > 0.
struct ModelParams {
  int n = 0;
  int C = 0;
  int d = 0;
  double lambda = 0.0;

  static ModelParams make(int n, int C, int d, double lambda);

  std::int64_t pair_count() const { return binom2(n); }
  /// Number of departure slots, C * binom(n, 2).
  std::int64_t slot_count() const { return static_cast<std::int64_t>(C) * pair_count(); }

  /// Probability that one jump-chain step is an arrival: lambda / (lambda + C).
  double arrival_probability() const;

  /// Upper edge of the low-arrival regime, 1 / (8d + 4).
  double lambda0() const;
  /// Lower edge of the high-arrival regime, 8000 C^2 d ln(240 C^2 d).
  double lambda1() const;

  Regime regime() const;

  /// Burn-in s = 3 binom(n,2) C (lambda + C) / lambda * ln(240 C^2 d), as a
  /// real number and rounded up to whole jump-chain steps.
  double burn_in_exact() const;
  std::int64_t burn_in_steps() const;
};

double lambda0_for(int d);
double lambda1_for(int C, int d);

}  // namespace bdar
