#pragma once

// Sparse multivariate polynomials with exact rational coefficients,
// ordered by the graded monomial order. Provides the derivation
// lie_derivative(p, f) = sum_i f_i * dp/dx_i used throughout.

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "monomial.hpp"
#include "rational.hpp"

namespace periodbound {

class Polynomial {
 public:
  using TermMap = std::map<Monomial, Rat>;

  explicit Polynomial(std::size_t n_vars = 0) : n_vars_(n_vars) {}

  static Polynomial zero(std::size_t n_vars) { return Polynomial(n_vars); }

  static Polynomial constant(std::size_t n_vars, const Rat& c) {
    Polynomial p(n_vars);
    if (c != 0) p.terms_[Monomial(n_vars)] = c;
    return p;
  }

  static Polynomial variable(std::size_t n_vars, std::size_t index) {
    if (index >= n_vars) throw std::out_of_range("variable index out of range");
    Monomial m(n_vars);
    m.exponents[index] = 1;
    Polynomial p(n_vars);
    p.terms_[m] = 1;
    return p;
  }

  static Polynomial from_monomial(const Monomial& m, const Rat& c = Rat(1)) {
    Polynomial p(m.n_vars());
    if (c != 0) p.terms_[m] = c;
    return p;
  }

  std::size_t n_vars() const { return n_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_)
      if (m.degree() > d) d = m.degree();
    return d;
  }

  Rat coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rat(0) : it->second;
  }

  void add_term(const Monomial& m, const Rat& c) {
    if (m.n_vars() != n_vars_) throw std::invalid_argument("term variable count mismatch");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r(*this);
    r += o;
    return r;
  }

  Polynomial operator-(const Polynomial& o) const {
    Polynomial r(*this);
    r -= o;
    return r;
  }

  Polynomial operator-() const {
    Polynomial r(n_vars_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }

  Polynomial operator*(const Polynomial& o) const {
    check_vars(o);
    Polynomial r(n_vars_);
    for (const auto& [ma, ca] : terms_)
      for (const auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }

  Polynomial operator*(const Rat& c) const {
    Polynomial r(n_vars_);
    if (c == 0) return r;
    for (const auto& [m, coef] : terms_) r.terms_[m] = coef * c;
    return r;
  }

  bool operator==(const Polynomial& o) const {
    return n_vars_ == o.n_vars_ && terms_ == o.terms_;
  }
  bool operator!=(const Polynomial& o) const { return !(*this == o); }

  Polynomial derivative(std::size_t var) const {
    if (var >= n_vars_) throw std::out_of_range("variable index out of range");
    Polynomial r(n_vars_);
    for (const auto& [m, c] : terms_) {
      if (m.exponents[var] == 0) continue;
      Monomial d = m;
      Rat coef = c * Rat(static_cast<long>(d.exponents[var]));
      d.exponents[var] -= 1;
      r.add_term(d, coef);
    }
    return r;
  }

  template <typename Scalar>
  Scalar evaluate(const std::vector<Scalar>& point) const {
    if (point.size() != n_vars_) throw std::invalid_argument("evaluation point dimension mismatch");
    Scalar total(0);
    for (const auto& [m, c] : terms_) {
      Scalar term = scalar_from_rat<Scalar>(c);
      for (std::size_t i = 0; i < n_vars_; ++i)
        for (std::uint32_t k = 0; k < m.exponents[i]; ++k) term *= point[i];
      total += term;
    }
    return total;
  }

  /// +1 / -1 if every term has that parity, 0 if mixed or zero.
  int parity_under(const SignSymmetry& sym) const {
    int p = 0;
    for (const auto& [m, c] : terms_) {
      int q = sym.parity(m);
      if (p == 0)
        p = q;
      else if (p != q)
        return 0;
    }
    return p;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      Rat a = c;
      if (first) {
        if (a < 0) {
          os << "-";
          a = -a;
        }
      } else {
        os << (a < 0 ? " - " : " + ");
        if (a < 0) a = -a;
      }
      first = false;
      if (m.is_constant()) {
        os << rat_to_string(a);
      } else {
        if (a != 1) os << rat_to_string(a) << "*";
        os << m.to_string();
      }
    }
    return os.str();
  }

 private:
  template <typename Scalar>
  static Scalar scalar_from_rat(const Rat& c) {
    if constexpr (std::is_same_v<Scalar, Rat>)
      return c;
    else
      return static_cast<Scalar>(c.get_d());
  }

  void check_vars(const Polynomial& o) const {
    if (o.n_vars_ != n_vars_) throw std::invalid_argument("polynomial variable counts differ");
  }

  std::size_t n_vars_;
  TermMap terms_;
};

inline Polynomial operator*(const Rat& c, const Polynomial& p) { return p * c; }

/// L_f p = sum_i f_i * dp/dx_i, the derivative of p along the vector field f.
inline Polynomial lie_derivative(const Polynomial& p, const std::vector<Polynomial>& f) {
  if (f.size() != p.n_vars()) throw std::invalid_argument("vector field dimension mismatch");
  Polynomial r(p.n_vars());
  for (std::size_t i = 0; i < f.size(); ++i) r += f[i] * p.derivative(i);
  return r;
}

/// Parses sums of terms like "3*x1^2*x2 - 1/2*x3 + 1/4" or "-1.5*x2".
/// Variables are x1..xn; '*' between factors is optional.
inline Polynomial parse_polynomial(std::string_view text, std::size_t n_vars) {
  Polynomial result(n_vars);
  std::size_t i = 0, n = text.size();
  auto skip_ws = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("polynomial parse error at offset " + std::to_string(i) + ": " + why);
  };
  skip_ws();
  if (i >= n) fail("empty input");
  bool first_term = true;
  while (i < n) {
    skip_ws();
    int sign = 1;
    if (i < n && (text[i] == '+' || text[i] == '-')) {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
      skip_ws();
    } else if (!first_term) {
      fail("expected '+' or '-'");
    }
    first_term = false;
    Rat coef(1);
    bool saw_coef = false;
    Monomial mono(n_vars);
    bool saw_factor = false;
    while (i < n) {
      skip_ws();
      if (i >= n || text[i] == '+' || text[i] == '-') break;
      if (text[i] == '*') {
        if (!saw_factor && !saw_coef) fail("unexpected '*'");
        ++i;
        skip_ws();
      }
      if (i >= n) fail("dangling '*'");
      if (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.') {
        std::size_t start = i;
        while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) ++i;
        // A '/' directly after digits is part of a rational literal.
        if (i < n && text[i] == '/') {
          ++i;
          if (i >= n || !std::isdigit(static_cast<unsigned char>(text[i]))) fail("bad denominator");
          while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        }
        Rat value = parse_rat(text.substr(start, i - start));
        coef = saw_coef || saw_factor ? coef * value : value;
        saw_coef = true;
      } else if (text[i] == 'x') {
        ++i;
        if (i >= n || !std::isdigit(static_cast<unsigned char>(text[i]))) fail("expected variable index");
        std::size_t idx = 0;
        while (i < n && std::isdigit(static_cast<unsigned char>(text[i])))
          idx = idx * 10 + (text[i++] - '0');
        if (idx == 0 || idx > n_vars) fail("variable index out of range");
        std::uint32_t exp = 1;
        if (i < n && text[i] == '^') {
          ++i;
          if (i >= n || !std::isdigit(static_cast<unsigned char>(text[i]))) fail("expected exponent");
          exp = 0;
          while (i < n && std::isdigit(static_cast<unsigned char>(text[i])))
            exp = exp * 10 + (text[i++] - '0');
        }
        mono.exponents[idx - 1] += exp;
        saw_factor = true;
      } else {
        fail(std::string("unexpected character '") + text[i] + "'");
      }
    }
    if (!saw_coef && !saw_factor) fail("empty term");
    result.add_term(mono, coef * sign);
  }
  return result;
}

}  // namespace periodbound
