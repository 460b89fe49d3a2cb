#pragma once

// Observable libraries: the vector g entering the quadratic identity. Parity
// mode takes sign-changing monomials directly; lie-span mode takes an
// exactly rank-reduced basis of {L_f w} over low-degree monomials w.

#include <stdexcept>
#include <utility>
#include <vector>

#include "system.hpp"

namespace periodbound {

enum class LibraryMode { parity, lie_span };

struct DegreeConfig {
  LibraryMode mode = LibraryMode::parity;
  std::uint32_t d_g = 1;                 // parity mode: monomial degree of g
  std::uint32_t d_w = 1;                 // lie-span mode: monomial degree of w
  std::uint32_t d_a = 1;                 // V basis degree
  std::uint32_t d_b = 1;                 // SOS monomial degree
  std::optional<std::uint32_t> d_rho;    // S-procedure basis degree

  /// Coupled degrees d_b = d_w+1, d_a = 2 d_w+1, d_rho = 2 d_w-1.
  static DegreeConfig lie_span_preset(std::uint32_t d_w) {
    if (d_w < 1) throw std::invalid_argument("d_w must be >= 1");
    DegreeConfig cfg;
    cfg.mode = LibraryMode::lie_span;
    cfg.d_w = d_w;
    cfg.d_b = d_w + 1;
    cfg.d_a = 2 * d_w + 1;
    cfg.d_rho = 2 * d_w - 1;
    return cfg;
  }

  void validate(bool constraint_active) const {
    if (d_a < 1 || d_b < 1) throw std::invalid_argument("d_a and d_b must be >= 1");
    if (mode == LibraryMode::parity && d_g < 1) throw std::invalid_argument("d_g must be >= 1");
    if (mode == LibraryMode::lie_span && d_w < 1) throw std::invalid_argument("d_w must be >= 1");
    if (constraint_active && !d_rho)
      throw std::invalid_argument("system has a constraint: d_rho is required");
    if (!constraint_active && d_rho)
      throw std::invalid_argument("d_rho given but the system has no constraint");
    if (d_rho && *d_rho < 1) throw std::invalid_argument("d_rho must be >= 1");
  }
};

struct ObservableLibrary {
  std::vector<Polynomial> g_even;
  std::vector<Polynomial> g_odd;
  LibraryMode provenance = LibraryMode::parity;

  std::size_t size() const { return g_even.size() + g_odd.size(); }
};

/// Maximal linearly independent sublist, first-come-first-kept, decided by
/// exact rational elimination (no floating-point rank tolerance).
inline std::pair<std::vector<Polynomial>, std::vector<std::size_t>> exact_rank_basis(
    const std::vector<Polynomial>& polys) {
  if (polys.empty()) throw std::invalid_argument("exact_rank_basis needs a non-empty list");
  const std::size_t n_vars = polys.front().n_vars();
  for (const auto& p : polys)
    if (p.n_vars() != n_vars) throw std::invalid_argument("mixed variable counts");
  // Gauss-Jordan over sparse polynomials: each stored row has a pivot
  // monomial that no other stored row contains.
  std::vector<Polynomial> rows;
  std::vector<Monomial> pivots;
  std::vector<Polynomial> kept;
  std::vector<std::size_t> kept_indices;
  for (std::size_t idx = 0; idx < polys.size(); ++idx) {
    Polynomial v = polys[idx];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Rat coef = v.coefficient(pivots[r]);
      if (coef != 0) v -= coef * rows[r];
    }
    if (v.is_zero()) continue;
    Monomial pivot = v.terms().rbegin()->first;
    v = Rat(1) / v.coefficient(pivot) * v;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Rat coef = rows[r].coefficient(pivot);
      if (coef != 0) rows[r] -= coef * v;
    }
    rows.push_back(std::move(v));
    pivots.push_back(pivot);
    kept.push_back(polys[idx]);
    kept_indices.push_back(idx);
  }
  return {kept, kept_indices};
}

/// Builds g for the identity. Parity mode: sign-changing monomials up to
/// d_g. Lie-span mode: rank basis of {L_f w : w nonconstant monomial,
/// deg w <= d_w}, split by parity (even/odd under the system symmetry).
inline ObservableLibrary build_library(const SystemSpec& system, const DegreeConfig& cfg) {
  ObservableLibrary lib;
  lib.provenance = cfg.mode;
  const SignSymmetry& sym = system.symmetry_or_trivial();
  if (cfg.mode == LibraryMode::parity) {
    if (!system.symmetry)
      throw std::invalid_argument("parity library mode requires a sign symmetry");
    for (const auto& m :
         monomials_up_to_degree(system.n_vars, cfg.d_g, sym, Parity::odd, 1))
      lib.g_odd.push_back(Polynomial::from_monomial(m));
  } else {
    std::vector<Polynomial> candidates;
    for (const auto& w :
         monomials_up_to_degree(system.n_vars, cfg.d_w, sym, Parity::any, 1))
      candidates.push_back(lie_derivative(Polynomial::from_monomial(w), system.f));
    auto [kept, kept_idx] = exact_rank_basis(candidates);
    (void)kept_idx;
    for (auto& g : kept) {
      int p = g.parity_under(sym);
      if (p == 1)
        lib.g_even.push_back(std::move(g));
      else if (p == -1)
        lib.g_odd.push_back(std::move(g));
      else
        throw std::logic_error("lie-span element has mixed parity under an equivariant field");
    }
  }
  if (lib.size() == 0) throw std::invalid_argument("observable library is empty");
  for (const auto& g : lib.g_even)
    if (g.degree() == 0) throw std::logic_error("constant observable in library");
  for (const auto& g : lib.g_odd)
    if (g.degree() == 0) throw std::logic_error("constant observable in library");
  return lib;
}

}  // namespace periodbound
