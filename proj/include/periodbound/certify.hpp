#pragma once

// Exact certificate layer. A float solution is rationalized, projected
// exactly onto the affine solution set of the flattened identity, and the
// Gram blocks are checked strictly positive definite in rational
// arithmetic. Everything downstream of the float solver is exact; the
// printed period bound is rounded toward zero so it never overstates.

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "engine.hpp"

namespace periodbound {

inline Int pow10(unsigned k) {
  Int r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

/// Nearest small-denominator rational per entry; rejects non-finite input.
inline std::vector<Rat> rationalize(const std::vector<double>& y,
                                    const Int& max_den = pow10(30)) {
  std::vector<Rat> out;
  out.reserve(y.size());
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("rationalize: non-finite entry");
    out.push_back(limit_denominator(rat_from_double(v), max_den));
  }
  return out;
}

/// Minimum-correction solve of A y = c starting from y0: the correction is
/// A_r^T z with A_r an exact row basis and (A_r A_r^T) z = (c - A y0)_r.
/// Throws "no exact solution" when the full system stays inconsistent.
inline std::vector<Rat> exact_project(const LinearCertificateSystem& lcs,
                                      const std::vector<Rat>& y0) {
  const RatMatrix& A = lcs.A;
  if (y0.size() != A.cols()) throw std::invalid_argument("exact_project: size mismatch");
  std::vector<Rat> resid(A.rows());
  bool clean = true;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    Rat s = lcs.c_vec[i];
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0 && y0[j] != 0) s -= A(i, j) * y0[j];
    resid[i] = s;
    if (s != 0) clean = false;
  }
  if (clean) return y0;

  std::vector<std::size_t> rows = independent_rows(A);
  std::size_t k = rows.size();
  RatMatrix G(k, k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      Rat s(0);
      for (std::size_t j = 0; j < A.cols(); ++j) {
        const Rat& x = A(rows[a], j);
        if (x == 0) continue;
        const Rat& y = A(rows[b], j);
        if (y == 0) continue;
        s += x * y;
      }
      G(a, b) = s;
      G(b, a) = s;
    }
  std::vector<Rat> rhs(k);
  for (std::size_t a = 0; a < k; ++a) rhs[a] = resid[rows[a]];
  auto z = solve_square(G, rhs);
  if (!z) throw std::runtime_error("no exact solution: projection normal system is singular");

  std::vector<Rat> y = y0;
  for (std::size_t a = 0; a < k; ++a) {
    if ((*z)[a] == 0) continue;
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (A(rows[a], j) != 0) y[j] += A(rows[a], j) * (*z)[a];
  }
  std::vector<Rat> check = A.multiply(y);
  for (std::size_t i = 0; i < A.rows(); ++i)
    if (check[i] != lcs.c_vec[i])
      throw std::runtime_error("no exact solution: linear system is inconsistent");
  return y;
}

/// Exact membership test A y = c.
inline bool verify_identity(const LinearCertificateSystem& lcs, const std::vector<Rat>& y) {
  if (y.size() != lcs.A.cols()) return false;
  std::vector<Rat> lhs = lcs.A.multiply(y);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    if (lhs[i] != lcs.c_vec[i]) return false;
  return true;
}

inline RatMatrix gram_block(const LayoutBlock& block, const std::vector<Rat>& y) {
  RatMatrix m(block.size, block.size);
  for (std::size_t i = 0; i < block.size; ++i)
    for (std::size_t j = i; j < block.size; ++j) {
      const Rat& v = y[UnknownLayout::sym_index(block, i, j)];
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

/// Every symmetric block strictly positive definite (Sylvester, exact).
inline bool gram_blocks_pd(const UnknownLayout& layout, const std::vector<Rat>& y) {
  for (const auto& b : layout.blocks)
    if (b.kind == BlockKind::sym_matrix && !sylvester_pd(gram_block(b, y))) return false;
  return true;
}

/// Order-sensitive digest of the flattened linear system (A, c).
inline std::uint64_t lcs_digest(const LinearCertificateSystem& lcs) {
  std::ostringstream os;
  os << lcs.A.rows() << "x" << lcs.A.cols() << "\n";
  for (std::size_t i = 0; i < lcs.A.rows(); ++i) {
    for (std::size_t j = 0; j < lcs.A.cols(); ++j) os << rat_to_string(lcs.A(i, j)) << " ";
    os << "\n";
  }
  os << "c:";
  for (const auto& v : lcs.c_vec) os << " " << rat_to_string(v);
  return fnv1a64(os.str());
}

/// Self-contained exact certificate: the (pruned) identity it proves, the
/// production degree config, the rational unknown vector, and a digest
/// binding the flattened system.
struct RationalCertificate {
  DegreeConfig degrees;
  SosIdentity identity;
  std::vector<Rat> y;
  std::uint64_t digest = 0;
};

inline RationalCertificate make_certificate(const DegreeConfig& degrees,
                                            const PruneOutcome& pruned,
                                            std::vector<Rat> y) {
  return RationalCertificate{degrees, pruned.identity, std::move(y), lcs_digest(pruned.lcs)};
}

/// The standard validator plugged into minimize_C: rationalize, project,
/// check the identity and strict block PD, all exactly. Any failure
/// (including projection onto an empty affine set) reports "not validated".
inline std::optional<RationalCertificate> validate_pruned(const DegreeConfig& degrees,
                                                          const PruneOutcome& pruned,
                                                          const Int& max_den = pow10(30)) {
  try {
    std::vector<Rat> y = exact_project(pruned.lcs, rationalize(pruned.solution.y_float, max_den));
    if (!verify_identity(pruned.lcs, y)) return std::nullopt;
    if (!gram_blocks_pd(pruned.identity.layout, y)) return std::nullopt;
    return make_certificate(degrees, pruned, std::move(y));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Bound rendering. The printed decimal must be a true lower bound, so pi is
// rounded down, sqrt(C) is rounded up, and the final decimal truncates.

inline const Rat& pi_lower() {
  static const Rat v =
      parse_rat("3.14159265358979323846264338327950288419716939937510");
  return v;
}

inline const Rat& pi_upper() {
  static const Rat v = pi_lower() + Rat(1, pow10(50));
  return v;
}

/// Rational u with u^2 >= x and relative slack below 1e-40.
inline Rat sqrt_upper(const Rat& x) {
  if (x < 0) throw std::invalid_argument("sqrt_upper: negative argument");
  if (x == 0) return Rat(0);
  Int scale = pow10(40);
  Int m = x.get_num() * x.get_den() * scale * scale;
  Int s;
  mpz_sqrt(s.get_mpz_t(), m.get_mpz_t());
  Rat u(s + 1, x.get_den() * scale);
  u.canonicalize();
  return u;
}

/// Decimal rendering of a nonnegative rational, truncated (never rounded up).
inline std::string decimal_floor(const Rat& x, unsigned digits) {
  if (x < 0) throw std::invalid_argument("decimal_floor: negative value");
  Int scale = pow10(digits);
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), Int(x.get_num() * scale).get_mpz_t(), x.get_den().get_mpz_t());
  Int ip = q / scale, fp = q % scale;
  if (digits == 0) return ip.get_str();
  std::string frac = fp.get_str();
  return ip.get_str() + "." + std::string(digits - frac.size(), '0') + frac;
}

struct ValidatedBound {
  Rat C;
  Rat time_scale;
  Rat bound_lower;            // exact rational lower bound on the period
  std::string bound_decimal;  // truncated decimal rendering of bound_lower
};

/// Period bound time_scale * 2 pi / sqrt(C), every step rounded downward.
inline ValidatedBound finalize_bound(const Rat& C, const Rat& time_scale, unsigned digits = 6) {
  if (C <= 0) throw std::invalid_argument("finalize_bound: C must be positive");
  Rat lower = time_scale * 2 * pi_lower() / sqrt_upper(C);
  return ValidatedBound{C, time_scale, lower, decimal_floor(lower, digits)};
}

// ---------------------------------------------------------------------------
// Certificate files. Sections in order: [system] (declarative system
// config), [degrees], [C], [layout] (each block with its generating
// polynomials or monomials), [y] (one rational per line, layout order),
// [digest] (hex digest of the flattened system).

inline std::string format_degrees(const DegreeConfig& d) {
  std::ostringstream os;
  os << "mode: " << (d.mode == LibraryMode::parity ? "parity" : "lie_span") << "\n";
  if (d.mode == LibraryMode::parity)
    os << "d_g: " << d.d_g << "\n";
  else
    os << "d_w: " << d.d_w << "\n";
  os << "d_a: " << d.d_a << "\n";
  os << "d_b: " << d.d_b << "\n";
  if (d.d_rho) os << "d_rho: " << *d.d_rho << "\n";
  return os.str();
}

inline void write_certificate(const RationalCertificate& cert, std::ostream& os) {
  const SosIdentity& id = cert.identity;
  os << "[system]\n" << format_system_config(id.system);
  os << "[degrees]\n" << format_degrees(cert.degrees);
  os << "[C]\n" << rat_to_string(id.C) << "\n";
  os << "[layout]\n";
  for (const auto& b : id.layout.blocks) {
    os << b.name << " " << (b.kind == BlockKind::sym_matrix ? "sym_matrix" : "free_vector")
       << " " << b.size << "\n";
    if (b.name == "Q_e")
      for (const auto& g : id.library.g_even) os << "g: " << g.to_string() << "\n";
    else if (b.name == "Q_o")
      for (const auto& g : id.library.g_odd) os << "g: " << g.to_string() << "\n";
    else if (b.name == "P_e")
      for (const auto& m : id.b_e) os << "m: " << m.to_string() << "\n";
    else if (b.name == "P_o")
      for (const auto& m : id.b_o) os << "m: " << m.to_string() << "\n";
    else if (b.name == "v")
      for (const auto& m : id.a) os << "m: " << m.to_string() << "\n";
    else if (b.name == "rho")
      for (const auto& m : id.c_basis) os << "m: " << m.to_string() << "\n";
    else
      throw std::logic_error("unknown layout block '" + b.name + "'");
  }
  os << "[y]\n";
  for (const auto& v : cert.y) os << rat_to_string(v) << "\n";
  std::ostringstream hex;
  hex << std::hex << cert.digest;
  os << "[digest]\n" << hex.str() << "\n";
}

inline void write_certificate_file(const RationalCertificate& cert, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open certificate file for writing: " + path);
  write_certificate(cert, os);
}

namespace certdetail {

inline Monomial parse_basis_monomial(const std::string& text, std::size_t n_vars) {
  Polynomial p = parse_polynomial(text, n_vars);
  if (p.terms().size() != 1 || p.terms().begin()->second != 1)
    throw std::invalid_argument("certificate basis entry is not a plain monomial: " + text);
  return p.terms().begin()->first;
}

}  // namespace certdetail

inline RationalCertificate read_certificate(std::istream& is) {
  // carve the stream into sections first
  std::map<std::string, std::vector<std::string>> sections;
  std::vector<std::string>* cur = nullptr;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '[' && line.back() == ']') {
      cur = &sections[line.substr(1, line.size() - 2)];
      continue;
    }
    if (line.empty()) continue;
    if (!cur) throw std::invalid_argument("certificate content before first section header");
    cur->push_back(line);
  }
  for (const char* need : {"system", "degrees", "C", "layout", "y", "digest"})
    if (!sections.count(need))
      throw std::invalid_argument(std::string("certificate missing [") + need + "] section");

  std::ostringstream sys_text;
  for (const auto& l : sections["system"]) sys_text << l << "\n";
  SystemSpec system = parse_system_config(sys_text.str());

  DegreeConfig degrees;
  degrees.d_rho.reset();
  for (const auto& l : sections["degrees"]) {
    auto colon = l.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad degrees line: " + l);
    std::string key = l.substr(0, colon);
    std::string value = l.substr(colon + 1);
    auto vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);
    if (key == "mode") {
      if (value == "parity")
        degrees.mode = LibraryMode::parity;
      else if (value == "lie_span")
        degrees.mode = LibraryMode::lie_span;
      else
        throw std::invalid_argument("unknown library mode: " + value);
    } else if (key == "d_g")
      degrees.d_g = static_cast<std::uint32_t>(std::stoul(value));
    else if (key == "d_w")
      degrees.d_w = static_cast<std::uint32_t>(std::stoul(value));
    else if (key == "d_a")
      degrees.d_a = static_cast<std::uint32_t>(std::stoul(value));
    else if (key == "d_b")
      degrees.d_b = static_cast<std::uint32_t>(std::stoul(value));
    else if (key == "d_rho")
      degrees.d_rho = static_cast<std::uint32_t>(std::stoul(value));
    else
      throw std::invalid_argument("unknown degrees key: " + key);
  }

  if (sections["C"].size() != 1) throw std::invalid_argument("[C] must hold one rational");
  Rat C = parse_rat(sections["C"][0]);

  SosIdentity id;
  id.system = system;
  id.C = C;
  id.constraint = system.constraint;
  id.library.provenance = degrees.mode;
  const auto& lay = sections["layout"];
  std::size_t pos = 0;
  while (pos < lay.size()) {
    std::istringstream head(lay[pos++]);
    std::string name, kind_s;
    std::size_t size = 0;
    if (!(head >> name >> kind_s >> size))
      throw std::invalid_argument("bad layout block header: " + lay[pos - 1]);
    BlockKind kind;
    if (kind_s == "sym_matrix")
      kind = BlockKind::sym_matrix;
    else if (kind_s == "free_vector")
      kind = BlockKind::free_vector;
    else
      throw std::invalid_argument("unknown block kind: " + kind_s);
    if (pos + size > lay.size() + 0u)
      throw std::invalid_argument("layout block '" + name + "' truncated");
    std::vector<std::string> gens;
    for (std::size_t i = 0; i < size; ++i) {
      const std::string& g = lay[pos++];
      auto colon = g.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("bad layout generator line: " + g);
      auto vs = g.find_first_not_of(" \t", colon + 1);
      gens.push_back(vs == std::string::npos ? "" : g.substr(vs));
    }
    if (name == "Q_e")
      for (const auto& g : gens) id.library.g_even.push_back(parse_polynomial(g, system.n_vars));
    else if (name == "Q_o")
      for (const auto& g : gens) id.library.g_odd.push_back(parse_polynomial(g, system.n_vars));
    else if (name == "P_e")
      for (const auto& g : gens)
        id.b_e.push_back(certdetail::parse_basis_monomial(g, system.n_vars));
    else if (name == "P_o")
      for (const auto& g : gens)
        id.b_o.push_back(certdetail::parse_basis_monomial(g, system.n_vars));
    else if (name == "v")
      for (const auto& g : gens)
        id.a.push_back(certdetail::parse_basis_monomial(g, system.n_vars));
    else if (name == "rho")
      for (const auto& g : gens)
        id.c_basis.push_back(certdetail::parse_basis_monomial(g, system.n_vars));
    else
      throw std::invalid_argument("unknown layout block '" + name + "'");
    id.layout.blocks.push_back(LayoutBlock{name, kind, size, 0});
  }
  id.layout.recompute_offsets();

  RationalCertificate cert;
  cert.degrees = degrees;
  cert.identity = std::move(id);
  for (const auto& l : sections["y"]) cert.y.push_back(parse_rat(l));
  if (cert.y.size() != cert.identity.layout.total())
    throw std::invalid_argument("[y] length does not match layout");
  if (sections["digest"].size() != 1) throw std::invalid_argument("[digest] must hold one value");
  cert.digest = std::stoull(sections["digest"][0], nullptr, 16);
  return cert;
}

inline RationalCertificate read_certificate_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open certificate file: " + path);
  return read_certificate(is);
}

// ---------------------------------------------------------------------------
// Offline verification: rebuild the flattened system from the stored
// identity and re-check everything exactly. The verdicts are independent;
// pass() requires all of them.

struct VerifyReport {
  bool structure_ok = false;
  bool digest_ok = false;
  bool identity_ok = false;
  bool psd_ok = false;
  std::string detail;

  bool pass() const { return structure_ok && digest_ok && identity_ok && psd_ok; }
};

inline VerifyReport verify_certificate(const RationalCertificate& cert) {
  VerifyReport rep;
  const SosIdentity& id = cert.identity;
  const SignSymmetry& sym = id.system.symmetry_or_trivial();

  auto structural = [&]() -> std::string {
    if (id.C <= 0) return "C is not positive";
    if (!id.system.is_equivariant()) return "vector field not equivariant";
    if (!id.system.constraint_conserved()) return "constraint polynomial not conserved";
    if (id.library.size() == 0) return "empty observable library";
    for (const auto& g : id.library.g_even)
      if (g.parity_under(sym) != 1) return "even library entry with wrong parity";
    for (const auto& g : id.library.g_odd)
      if (g.parity_under(sym) != -1) return "odd library entry with wrong parity";
    for (const auto& m : id.b_e)
      if (sym.parity(m) != 1) return "b_e entry not even";
    for (const auto& m : id.b_o)
      if (sym.parity(m) != -1) return "b_o entry not odd";
    for (const auto& m : id.a) {
      if (sym.parity(m) != 1) return "a entry not even";
      if (m.is_constant()) return "a entry must be non-constant";
    }
    for (const auto& m : id.c_basis)
      if (sym.parity(m) != 1) return "c entry not even";
    if (!id.c_basis.empty() && !id.constraint) return "rho block without constraint";
    if (id.constraint && id.constraint->parity_under(sym) != 1 && !id.c_basis.empty())
      return "constraint polynomial not symmetry-invariant";
    return "";
  };
  std::string why = structural();
  rep.structure_ok = why.empty();
  if (!rep.structure_ok) {
    rep.detail = why;
    return rep;
  }

  LinearCertificateSystem lcs = flatten(id);
  rep.digest_ok = lcs_digest(lcs) == cert.digest;
  rep.identity_ok = verify_identity(lcs, cert.y);
  rep.psd_ok = gram_blocks_pd(id.layout, cert.y);
  if (!rep.digest_ok)
    rep.detail = "digest mismatch";
  else if (!rep.identity_ok)
    rep.detail = "identity coefficients do not cancel";
  else if (!rep.psd_ok)
    rep.detail = "a Gram block is not strictly positive definite";
  return rep;
}

}  // namespace periodbound
