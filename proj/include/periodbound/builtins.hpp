#pragma once

// Built-in systems and the closed-form results attached to them: the
// time-rescaled Lorenz and Henon-Heiles fields, the hand-checkable Lorenz
// certificate, and the classical Lipschitz period bound.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "system.hpp"

namespace periodbound {

/// Lorenz at sigma=10, rho=28, beta=8/3 with time scaled by 6 and space by
/// 25, which clears all denominators. Bounds computed here are multiplied
/// by time_scale = 6 to land in original Lorenz time units.
inline SystemSpec lorenz_rescaled() {
  SystemSpec s;
  s.name = "lorenz_rescaled";
  s.n_vars = 3;
  s.f = {
      parse_polynomial("60*x2 - 60*x1", 3),
      parse_polynomial("168*x1 - 150*x1*x3 - 6*x2", 3),
      parse_polynomial("150*x1*x2 - 16*x3", 3),
  };
  s.symmetry = SignSymmetry({-1, -1, 1});
  s.time_scale = Rat(6);
  s.parameters = {{"sigma", Rat(10)}, {"rho", Rat(28)}, {"beta", Rat(8, 3)}};
  s.validate();
  return s;
}

/// Henon-Heiles on the energy level H = 1/7 with time scaled by 20.
/// The constraint polynomial 6 - 42H vanishes exactly on that level.
inline SystemSpec henon_heiles() {
  SystemSpec s;
  s.name = "henon_heiles";
  s.n_vars = 4;
  s.f = {
      parse_polynomial("20*x3", 4),
      parse_polynomial("20*x4", 4),
      parse_polynomial("-20*x1 - 40*x1*x2", 4),
      parse_polynomial("-20*x2 - 20*x1^2 + 20*x2^2", 4),
  };
  s.symmetry = SignSymmetry({-1, 1, -1, 1});
  s.time_scale = Rat(20);
  // 6 - 42H with H = (x1^2+x2^2+x3^2+x4^2)/2 + x1^2 x2 - x2^3/3
  s.constraint = parse_polynomial(
      "6 - 21*x1^2 - 21*x2^2 - 21*x3^2 - 21*x4^2 - 42*x1^2*x2 + 14*x2^3", 4);
  s.parameters = {{"H_level", Rat(1, 7)}};
  s.validate();
  if (!s.constraint_conserved()) throw std::logic_error("henon_heiles: constraint not conserved");
  return s;
}

/// The Henon-Heiles Hamiltonian itself (unscaled energy).
inline Polynomial henon_heiles_energy() {
  return parse_polynomial("1/2*x1^2 + 1/2*x2^2 + 1/2*x3^2 + 1/2*x4^2 + x1^2*x2 - 1/3*x2^3", 4);
}

struct AnalyticCheckResult {
  bool pass = false;
  Polynomial residual;     // C g^2 - (L_f g)^2 + L_f V, expected beta sigma^2 x3^2
  Rat C;                   // sigma^2 (rho - 1)
  double bound = 0.0;      // 2 pi / sqrt(C)
};

/// Verifies the closed-form Lorenz certificate symbolically on the unscaled
/// field: with g = x1, V = (sigma(rho-2)x1^2 - sigma^2 x2^2 - sigma^2 x3^2)/2
/// and C = sigma^2(rho-1), the combination C g^2 - (L_f g)^2 + L_f V equals
/// beta sigma^2 x3^2 exactly, which is nonnegative, so T >= 2 pi / sqrt(C).
inline AnalyticCheckResult analytic_lorenz_check(const Rat& sigma, const Rat& rho,
                                                 const Rat& beta) {
  if (rho <= 1) throw std::invalid_argument("analytic certificate needs rho > 1 (C > 0)");
  if (sigma <= 0 || beta <= 0) throw std::invalid_argument("sigma and beta must be positive");
  const std::size_t n = 3;
  auto x1 = Polynomial::variable(n, 0);
  auto x2 = Polynomial::variable(n, 1);
  auto x3 = Polynomial::variable(n, 2);
  std::vector<Polynomial> f = {
      sigma * (x2 - x1),
      rho * x1 - x2 - x1 * x3,
      x1 * x2 - beta * x3,
  };
  Polynomial g = x1;
  Polynomial V = Rat(1, 2) * (sigma * (rho - 2) * (x1 * x1) - (sigma * sigma) * (x2 * x2) -
                              (sigma * sigma) * (x3 * x3));
  AnalyticCheckResult r;
  r.C = sigma * sigma * (rho - 1);
  Polynomial lg = lie_derivative(g, f);
  r.residual = r.C * (g * g) - lg * lg + lie_derivative(V, f);
  Polynomial expected = (beta * sigma * sigma) * (x3 * x3);
  r.pass = (r.residual == expected);
  r.bound = 2.0 * std::numbers::pi / std::sqrt(to_double(r.C));
  return r;
}

/// Classical Lipschitz bound: any periodic orbit of an L-Lipschitz field has
/// period at least 2 pi / L.
inline double yorke_bound(double L) {
  if (!(L > 0)) throw std::invalid_argument("Lipschitz constant must be positive");
  return 2.0 * std::numbers::pi / L;
}

}  // namespace periodbound
