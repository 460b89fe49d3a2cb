#pragma once

// Exact rational scalar type and conversions. All certificate-bearing
// arithmetic in this library runs on these; doubles appear only at the
// floating-point solver boundary.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace periodbound {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline double to_double(const Rat& r) { return r.get_d(); }

/// Exact conversion: every finite double is a dyadic rational.
inline Rat rat_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational form");
  Rat r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

/// Best rational approximation with denominator <= max_den
/// (continued-fraction convergents plus the final semiconvergent).
inline Rat limit_denominator(const Rat& x, const Int& max_den) {
  if (max_den < 1) throw std::invalid_argument("max_den must be >= 1");
  if (x.get_den() <= max_den) return x;
  Int p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Int n = x.get_num(), d = x.get_den();
  while (true) {
    Int a, rem;
    mpz_fdiv_qr(a.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    Int q2 = q0 + a * q1;
    if (q2 > max_den) break;
    Int p2 = p0 + a * p1;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    n = d; d = rem;
    if (d == 0) break;
  }
  if (d == 0) {
    Rat r(p1, q1);
    r.canonicalize();
    return r;
  }
  Int k = (max_den - q0) / q1;
  Rat bound1(p0 + k * p1, q0 + k * q1);
  Rat bound2(p1, q1);
  bound1.canonicalize();
  bound2.canonicalize();
  return (abs(bound2 - x) <= abs(bound1 - x)) ? bound2 : bound1;
}

/// Renders "n" or "n/d"; inverse of parse_rat.
inline std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Parses "a", "a/b", or a decimal literal like "585.02", all exactly.
inline Rat parse_rat(std::string_view s) {
  auto bad = [&] { throw std::invalid_argument("malformed rational: '" + std::string(s) + "'"); };
  size_t i = 0, n = s.size();
  while (i < n && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  size_t j = n;
  while (j > i && std::isspace(static_cast<unsigned char>(s[j - 1]))) --j;
  if (i >= j) bad();
  std::string body(s.substr(i, j - i));
  auto slash = body.find('/');
  if (slash != std::string::npos) {
    Int num, den;
    if (num.set_str(body.substr(0, slash), 10) != 0) bad();
    if (den.set_str(body.substr(slash + 1), 10) != 0) bad();
    if (den == 0) bad();
    Rat r(num, den);
    r.canonicalize();
    return r;
  }
  auto dot = body.find('.');
  if (dot != std::string::npos) {
    std::string digits = body.substr(0, dot) + body.substr(dot + 1);
    size_t frac_len = body.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+") bad();
    Int num;
    if (num.set_str(digits, 10) != 0) bad();
    Int den = 1;
    for (size_t k = 0; k < frac_len; ++k) den *= 10;
    Rat r(num, den);
    r.canonicalize();
    return r;
  }
  Int num;
  if (num.set_str(body, 10) != 0) bad();
  return Rat(num);
}

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace periodbound
