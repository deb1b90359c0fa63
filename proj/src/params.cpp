#include "bdar/params.hpp"

#include <cmath>
#include <stdexcept>

namespace bdar {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Low:
      return "low";
    case Regime::High:
      return "high";
    case Regime::Unsupported:
      return "unsupported";
  }
  return "unknown";
}

ModelParams ModelParams::make(int n, int C, int d, double lambda) {
  if (n < 3) throw std::invalid_argument("n must be at least 3, got " + std::to_string(n));
  if (C < 1) throw std::invalid_argument("C must be at least 1, got " + std::to_string(C));
  if (d < 1) throw std::invalid_argument("d must be at least 1, got " + std::to_string(d));
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be a positive finite number");
  }
  return ModelParams{n, C, d, lambda};
}

double lambda0_for(int d) { return 1.0 / (8.0 * d + 4.0); }

double lambda1_for(int C, int d) {
  const double c2d = static_cast<double>(C) * C * d;
  return 8000.0 * c2d * std::log(240.0 * c2d);
}

double ModelParams::arrival_probability() const { return lambda / (lambda + C); }

double ModelParams::lambda0() const { return lambda0_for(d); }

double ModelParams::lambda1() const { return lambda1_for(C, d); }

Regime ModelParams::regime() const {
  if (lambda < lambda0()) return Regime::Low;
  if (lambda >= lambda1()) return Regime::High;
  return Regime::Unsupported;
}

double ModelParams::burn_in_exact() const {
  const double c2d = static_cast<double>(C) * C * d;
  return 3.0 * static_cast<double>(pair_count()) * C * (lambda + C) / lambda *
         std::log(240.0 * c2d);
}

std::int64_t ModelParams::burn_in_steps() const {
  return static_cast<std::int64_t>(std::ceil(burn_in_exact()));
}

}  // namespace bdar
