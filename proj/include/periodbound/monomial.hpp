#pragma once

// Monomials over a fixed variable set x1..xn, with the graded ordering used
// everywhere in this library: lower total degree first, then exponent
// vectors compared lexicographically with the larger vector first.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace periodbound {

struct Monomial {
  std::vector<std::uint32_t> exponents;

  explicit Monomial(std::size_t n_vars = 0) : exponents(n_vars, 0) {}
  explicit Monomial(std::vector<std::uint32_t> e) : exponents(std::move(e)) {}

  std::size_t n_vars() const { return exponents.size(); }

  std::uint32_t degree() const {
    return std::accumulate(exponents.begin(), exponents.end(), std::uint32_t{0});
  }

  bool is_constant() const { return degree() == 0; }

  Monomial operator*(const Monomial& o) const {
    if (o.exponents.size() != exponents.size())
      throw std::invalid_argument("monomial variable counts differ");
    Monomial r(*this);
    for (std::size_t i = 0; i < exponents.size(); ++i) r.exponents[i] += o.exponents[i];
    return r;
  }

  bool operator==(const Monomial& o) const { return exponents == o.exponents; }
  bool operator!=(const Monomial& o) const { return !(*this == o); }

  /// Graded order: by degree ascending, ties broken by exponent vector
  /// lexicographically descending (x1-heavy monomials first).
  bool operator<(const Monomial& o) const {
    auto da = degree(), db = o.degree();
    if (da != db) return da < db;
    return exponents > o.exponents;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
      if (exponents[i] == 0) continue;
      if (!s.empty()) s += "*";
      s += "x" + std::to_string(i + 1);
      if (exponents[i] > 1) s += "^" + std::to_string(exponents[i]);
    }
    if (s.empty()) s = "1";
    return s;
  }
};

/// Diagonal sign action x_i -> s_i x_i with s_i in {+1, -1}.
struct SignSymmetry {
  std::vector<int> signs;

  explicit SignSymmetry(std::vector<int> s = {}) : signs(std::move(s)) {
    for (int v : signs)
      if (v != 1 && v != -1) throw std::invalid_argument("symmetry signs must be +1 or -1");
  }

  static SignSymmetry trivial(std::size_t n) { return SignSymmetry(std::vector<int>(n, 1)); }

  /// +1 if the monomial is invariant, -1 if it flips sign.
  int parity(const Monomial& m) const {
    if (m.exponents.size() != signs.size())
      throw std::invalid_argument("monomial/symmetry variable counts differ");
    int p = 1;
    for (std::size_t i = 0; i < signs.size(); ++i)
      if (signs[i] == -1 && (m.exponents[i] & 1u)) p = -p;
    return p;
  }
};

enum class Parity { any, even, odd };

/// All monomials in n_vars variables with degree in [min_degree, max_degree],
/// optionally filtered to one parity class, in graded order.
inline std::vector<Monomial> monomials_up_to_degree(std::size_t n_vars, std::uint32_t max_degree,
                                                    const SignSymmetry& sym, Parity parity,
                                                    std::uint32_t min_degree = 0) {
  std::vector<Monomial> out;
  std::vector<std::uint32_t> expo(n_vars, 0);
  // Enumerate degree by degree so the graded order falls out directly.
  for (std::uint32_t deg = min_degree; deg <= max_degree; ++deg) {
    std::vector<Monomial> level;
    // Recursive fill, x1 exponent chosen first and largest-first, which yields
    // the lexicographically descending order within the degree level.
    auto rec = [&](auto&& self, std::size_t pos, std::uint32_t remaining) -> void {
      if (pos + 1 == n_vars) {
        expo[pos] = remaining;
        level.emplace_back(expo);
        return;
      }
      for (std::uint32_t e = remaining; e + 1 != 0; --e) {
        expo[pos] = e;
        self(self, pos + 1, remaining - e);
      }
      expo[pos] = 0;
    };
    if (n_vars == 0) {
      if (deg == 0) level.emplace_back(expo);
    } else {
      rec(rec, 0, deg);
    }
    for (auto& m : level) {
      if (parity == Parity::even && sym.parity(m) != 1) continue;
      if (parity == Parity::odd && sym.parity(m) != -1) continue;
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace periodbound
