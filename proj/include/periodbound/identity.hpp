#pragma once

// Assembles the polynomial identity behind the period bound
//   C(ge' Qe ge + go' Qo go) - ((Lf ge)' Qe (Lf ge) + (Lf go)' Qo (Lf go))
//     + Lf(v'a) - be' Pe be - bo' Po bo + constraint*(rho'c) = 0
// and flattens it into an exact linear system A y = c_vec by matching
// monomial coefficients, with one extra row fixing tr Q = 1.

#include <set>
#include <string>
#include <vector>

#include "exact_linalg.hpp"
#include "library.hpp"

namespace periodbound {

enum class BlockKind { sym_matrix, free_vector };

struct LayoutBlock {
  std::string name;       // Q_e, Q_o, P_e, P_o, v, rho
  BlockKind kind = BlockKind::free_vector;
  std::size_t size = 0;   // matrix dimension or vector length
  std::size_t offset = 0; // start position in the flat unknown vector y
};

struct UnknownLayout {
  std::vector<LayoutBlock> blocks;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& b : blocks)
      t += b.kind == BlockKind::sym_matrix ? b.size * (b.size + 1) / 2 : b.size;
    return t;
  }

  const LayoutBlock* find(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return &b;
    return nullptr;
  }

  /// Index into y of upper-triangle entry (i, j), i <= j, of a matrix block.
  static std::size_t sym_index(const LayoutBlock& b, std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return b.offset + i * b.size - i * (i - 1) / 2 + (j - i);
  }

  void recompute_offsets() {
    std::size_t at = 0;
    for (auto& b : blocks) {
      b.offset = at;
      at += b.kind == BlockKind::sym_matrix ? b.size * (b.size + 1) / 2 : b.size;
    }
  }
};

struct SosIdentity {
  SystemSpec system;
  ObservableLibrary library;
  Rat C;
  std::vector<Monomial> a;     // V basis, invariant, degrees 1..d_a
  std::vector<Monomial> b_e;   // SOS basis, invariant, degrees 0..d_b
  std::vector<Monomial> b_o;   // SOS basis, sign-changing, degrees 1..d_b
  std::vector<Monomial> c_basis;  // S-procedure basis, invariant, degrees 0..d_rho
  std::optional<Polynomial> constraint;
  UnknownLayout layout;

  /// New identity with subsets of every basis (used by pruning). Indices
  /// must be sorted ascending.
  SosIdentity restricted(const std::vector<std::size_t>& keep_ge,
                         const std::vector<std::size_t>& keep_go,
                         const std::vector<std::size_t>& keep_a,
                         const std::vector<std::size_t>& keep_be,
                         const std::vector<std::size_t>& keep_bo,
                         const std::vector<std::size_t>& keep_c) const;
};

struct LinearCertificateSystem {
  RatMatrix A;
  std::vector<Rat> c_vec;
  UnknownLayout layout;
  std::vector<Monomial> row_monomials;  // rows 0..n-2; the last row is tr Q = 1
};

namespace detail {

inline void append_gram_block(UnknownLayout& layout, const std::string& name, std::size_t n) {
  if (n > 0) layout.blocks.push_back({name, BlockKind::sym_matrix, n, 0});
}

inline void append_vec_block(UnknownLayout& layout, const std::string& name, std::size_t n) {
  if (n > 0) layout.blocks.push_back({name, BlockKind::free_vector, n, 0});
}

}  // namespace detail

inline SosIdentity assemble_identity(const SystemSpec& system, const ObservableLibrary& library,
                                     const DegreeConfig& cfg, const Rat& C) {
  system.validate();
  cfg.validate(system.constraint.has_value());
  if (C <= 0) throw std::invalid_argument("C must be positive");
  if (library.size() == 0) throw std::invalid_argument("observable library is empty");

  std::uint32_t max_deg_g = 0;
  for (const auto& g : library.g_even) max_deg_g = std::max(max_deg_g, g.degree());
  for (const auto& g : library.g_odd) max_deg_g = std::max(max_deg_g, g.degree());
  if (cfg.d_b < max_deg_g)
    throw std::invalid_argument("d_b too small to absorb the Q-term degrees; minimal workable d_b = " +
                                std::to_string(max_deg_g));

  SosIdentity id;
  id.system = system;
  id.library = library;
  id.C = C;
  id.constraint = system.constraint;
  const SignSymmetry& sym = system.symmetry_or_trivial();
  id.a = monomials_up_to_degree(system.n_vars, cfg.d_a, sym, Parity::even, 1);
  id.b_e = monomials_up_to_degree(system.n_vars, cfg.d_b, sym, Parity::even, 0);
  id.b_o = monomials_up_to_degree(system.n_vars, cfg.d_b, sym, Parity::odd, 1);
  if (system.constraint)
    id.c_basis = monomials_up_to_degree(system.n_vars, *cfg.d_rho, sym, Parity::even, 0);

  detail::append_gram_block(id.layout, "Q_e", library.g_even.size());
  detail::append_gram_block(id.layout, "Q_o", library.g_odd.size());
  detail::append_gram_block(id.layout, "P_e", id.b_e.size());
  detail::append_gram_block(id.layout, "P_o", id.b_o.size());
  detail::append_vec_block(id.layout, "v", id.a.size());
  detail::append_vec_block(id.layout, "rho", id.c_basis.size());
  id.layout.recompute_offsets();
  return id;
}

inline SosIdentity SosIdentity::restricted(const std::vector<std::size_t>& keep_ge,
                                           const std::vector<std::size_t>& keep_go,
                                           const std::vector<std::size_t>& keep_a,
                                           const std::vector<std::size_t>& keep_be,
                                           const std::vector<std::size_t>& keep_bo,
                                           const std::vector<std::size_t>& keep_c) const {
  auto take = [](const auto& items, const std::vector<std::size_t>& idx) {
    std::remove_cvref_t<decltype(items)> out;
    for (auto i : idx) out.push_back(items.at(i));
    return out;
  };
  SosIdentity id;
  id.system = system;
  id.C = C;
  id.constraint = constraint;
  id.library.provenance = library.provenance;
  id.library.g_even = take(library.g_even, keep_ge);
  id.library.g_odd = take(library.g_odd, keep_go);
  if (id.library.size() == 0) throw std::invalid_argument("restriction empties the library");
  id.a = take(a, keep_a);
  id.b_e = take(b_e, keep_be);
  id.b_o = take(b_o, keep_bo);
  id.c_basis = take(c_basis, keep_c);
  detail::append_gram_block(id.layout, "Q_e", id.library.g_even.size());
  detail::append_gram_block(id.layout, "Q_o", id.library.g_odd.size());
  detail::append_gram_block(id.layout, "P_e", id.b_e.size());
  detail::append_gram_block(id.layout, "P_o", id.b_o.size());
  detail::append_vec_block(id.layout, "v", id.a.size());
  detail::append_vec_block(id.layout, "rho", id.c_basis.size());
  id.layout.recompute_offsets();
  return id;
}

/// The column polynomial of each unknown: the coefficient of y_k in the
/// residual, as a polynomial in x. Layout order.
inline std::vector<Polynomial> column_polynomials(const SosIdentity& id) {
  const std::size_t n = id.system.n_vars;
  std::vector<Polynomial> cols(id.layout.total(), Polynomial(n));
  auto fill_q = [&](const std::string& name, const std::vector<Polynomial>& g) {
    const LayoutBlock* blk = id.layout.find(name);
    if (!blk) return;
    std::vector<Polynomial> lg;
    lg.reserve(g.size());
    for (const auto& gi : g) lg.push_back(lie_derivative(gi, id.system.f));
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i; j < g.size(); ++j) {
        Polynomial p = id.C * (g[i] * g[j]) - lg[i] * lg[j];
        if (i != j) p = Rat(2) * p;
        cols[UnknownLayout::sym_index(*blk, i, j)] = std::move(p);
      }
  };
  auto fill_p = [&](const std::string& name, const std::vector<Monomial>& b) {
    const LayoutBlock* blk = id.layout.find(name);
    if (!blk) return;
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = i; j < b.size(); ++j) {
        Polynomial p = Polynomial::from_monomial(b[i] * b[j], i == j ? Rat(-1) : Rat(-2));
        cols[UnknownLayout::sym_index(*blk, i, j)] = std::move(p);
      }
  };
  fill_q("Q_e", id.library.g_even);
  fill_q("Q_o", id.library.g_odd);
  fill_p("P_e", id.b_e);
  fill_p("P_o", id.b_o);
  if (const LayoutBlock* blk = id.layout.find("v")) {
    for (std::size_t k = 0; k < id.a.size(); ++k)
      cols[blk->offset + k] = lie_derivative(Polynomial::from_monomial(id.a[k]), id.system.f);
  }
  if (const LayoutBlock* blk = id.layout.find("rho")) {
    for (std::size_t k = 0; k < id.c_basis.size(); ++k)
      cols[blk->offset + k] = *id.constraint * Polynomial::from_monomial(id.c_basis[k]);
  }
  return cols;
}

/// Exact coefficient-matching: rows are every monomial appearing in any
/// column polynomial (graded order), plus the trace row; c_vec is the
/// indicator of the trace row.
inline LinearCertificateSystem flatten(const SosIdentity& id) {
  std::vector<Polynomial> cols = column_polynomials(id);
  std::set<Monomial> mons;
  for (const auto& p : cols)
    for (const auto& [m, coef] : p.terms()) mons.insert(m);
  LinearCertificateSystem lcs;
  lcs.layout = id.layout;
  lcs.row_monomials.assign(mons.begin(), mons.end());
  const std::size_t n_rows = lcs.row_monomials.size() + 1;
  lcs.A = RatMatrix(n_rows, cols.size());
  std::size_t r = 0;
  std::map<Monomial, std::size_t> row_of;
  for (const auto& m : lcs.row_monomials) row_of[m] = r++;
  for (std::size_t cidx = 0; cidx < cols.size(); ++cidx)
    for (const auto& [m, coef] : cols[cidx].terms()) lcs.A(row_of[m], cidx) = coef;
  for (const auto* name : {"Q_e", "Q_o"})
    if (const LayoutBlock* blk = id.layout.find(name))
      for (std::size_t i = 0; i < blk->size; ++i)
        lcs.A(n_rows - 1, UnknownLayout::sym_index(*blk, i, i)) = 1;
  lcs.c_vec.assign(n_rows, Rat(0));
  lcs.c_vec.back() = 1;
  return lcs;
}

/// Reconstructs the residual polynomial at a concrete unknown vector y,
/// independently of flatten (used for exact verification).
inline Polynomial residual_polynomial(const SosIdentity& id, const std::vector<Rat>& y) {
  if (y.size() != id.layout.total()) throw std::invalid_argument("unknown vector length mismatch");
  std::vector<Polynomial> cols = column_polynomials(id);
  Polynomial r(id.system.n_vars);
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (y[k] != 0) r += y[k] * cols[k];
  return r;
}

/// Sum of Q-block diagonal entries of y.
inline Rat trace_of(const SosIdentity& id, const std::vector<Rat>& y) {
  Rat t(0);
  for (const auto* name : {"Q_e", "Q_o"})
    if (const LayoutBlock* blk = id.layout.find(name))
      for (std::size_t i = 0; i < blk->size; ++i)
        t += y[UnknownLayout::sym_index(*blk, i, i)];
  return t;
}

}  // namespace periodbound
