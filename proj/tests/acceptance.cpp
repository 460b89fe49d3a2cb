// End-to-end acceptance run. Each numbered check prints one PASS/FAIL line
// with its pinned tolerance; the process exits nonzero if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "periodbound/builtins.hpp"
#include "periodbound/certify.hpp"
#include "periodbound/engine.hpp"
#include "periodbound/orbit.hpp"

using namespace periodbound;

namespace {

int g_failures = 0;

void report(int k, bool ok, const std::string& detail) {
  std::cout << "criterion " << k << "  " << (ok ? "PASS" : "FAIL") << "  " << detail << "\n"
            << std::flush;
  if (!ok) ++g_failures;
}

Rat random_rat(std::mt19937_64& rng, long num_range = 9, long den_range = 7) {
  std::uniform_int_distribution<long> num(-num_range, num_range);
  std::uniform_int_distribution<long> den(1, den_range);
  return make_rat(num(rng), den(rng));
}

Polynomial random_poly(std::mt19937_64& rng, std::size_t n_vars, unsigned max_deg) {
  std::uniform_int_distribution<unsigned> deg(0, max_deg);
  std::uniform_int_distribution<int> terms(1, 5);
  Polynomial p(n_vars);
  for (int t = terms(rng); t > 0; --t) {
    Monomial m(n_vars);
    for (auto& e : m.exponents) e = deg(rng);
    p += Polynomial::from_monomial(m, random_rat(rng));
  }
  return p;
}

struct BoundRun {
  Rat C_star;
  RationalCertificate certificate;
  ValidatedBound bound;
  int attempts = 0;
};

BoundRun run_search(const SystemSpec& system, const DegreeConfig& cfg, const Rat& C_hi,
                    const Rat& C_lo) {
  ObservableLibrary lib = build_library(system, cfg);
  SearchConfig search;
  search.C_hi = C_hi;
  search.C_lo = C_lo;
  auto result = minimize_C(system, lib, cfg, search,
                           [&](const PruneOutcome& p) { return validate_pruned(cfg, p); });
  BoundRun out{result.C_star, std::move(result.certificate),
               finalize_bound(result.C_star, system.time_scale), result.attempts};
  return out;
}

std::string describe(const BoundRun& r, double gate_C, double gate_bound) {
  std::ostringstream os;
  os << "C* = " << rat_to_string(r.C_star) << " ~ " << to_double(r.C_star) << " (gate "
     << gate_C << "), bound " << r.bound.bound_decimal << " (gate >= " << gate_bound
     << "), attempts " << r.attempts;
  return os.str();
}

/// The SOS side of the identity, sum over both P blocks of b^T P b. It is
/// pointwise nonnegative whenever every Gram block is PSD.
Polynomial sos_side(const RationalCertificate& cert) {
  const SosIdentity& id = cert.identity;
  Polynomial s(id.system.n_vars);
  for (const auto& blk : id.layout.blocks) {
    if (blk.name != "P_e" && blk.name != "P_o") continue;
    const std::vector<Monomial>& basis = blk.name == "P_e" ? id.b_e : id.b_o;
    RatMatrix P = gram_block(blk, cert.y);
    for (std::size_t i = 0; i < blk.size; ++i)
      for (std::size_t j = i; j < blk.size; ++j)
        s += Polynomial::from_monomial(basis[i] * basis[j], (i == j ? 1 : 2) * P(i, j));
  }
  return s;
}

bool nonneg_at_random_rationals(const Polynomial& p, int points, std::mt19937_64& rng) {
  std::vector<Rat> x(p.n_vars());
  for (int k = 0; k < points; ++k) {
    for (auto& v : x) v = random_rat(rng, 4, 3);
    if (p.evaluate(x) < 0) return false;
  }
  return true;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::fmtflags(0), std::ios::floatfield);
  std::cout.precision(10);

  // 1. closed-form certificate for the classical parameters, exact and fast
  {
    auto t0 = std::chrono::steady_clock::now();
    AnalyticCheckResult r = analytic_lorenz_check(Rat(10), Rat(28), Rat(8, 3));
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double expected = 2 * std::numbers::pi / (10 * std::sqrt(27.0));
    bool ok = r.pass && r.C == Rat(2700) && std::abs(r.bound - expected) < 1e-12 && dt < 1.0;
    std::ostringstream os;
    os << "symbolic identity " << (r.pass ? "exact" : "BROKEN") << ", C = "
       << rat_to_string(r.C) << ", bound " << r.bound << ", " << dt << "s";
    report(1, ok, os.str());
  }

  // 2. rescaled Lorenz, parity library, d_g = 1
  BoundRun lorenz1;
  {
    DegreeConfig cfg;
    cfg.mode = LibraryMode::parity;
    cfg.d_g = 1;
    cfg.d_a = 4;
    cfg.d_b = 2;
    lorenz1 = run_search(lorenz_rescaled(), cfg, Rat(8000), Rat(4000));
    bool ok = lorenz1.C_star <= Rat(5896) * Rat(1001, 1000) &&
              to_double(lorenz1.bound.bound_lower) >= 0.4910 - 1e-3;
    report(2, ok, describe(lorenz1, 5901.896, 0.4900));
  }

  // 3. rescaled Lorenz, parity library, d_g = 2
  BoundRun lorenz2;
  {
    DegreeConfig cfg;
    cfg.mode = LibraryMode::parity;
    cfg.d_g = 2;
    cfg.d_a = 6;
    cfg.d_b = 3;
    lorenz2 = run_search(lorenz_rescaled(), cfg, Rat(4000), Rat(2000));
    bool ok = lorenz2.C_star <= Rat(2818) * Rat(1001, 1000) &&
              to_double(lorenz2.bound.bound_lower) >= 0.7102 - 1e-3;
    report(3, ok, describe(lorenz2, 2820.818, 0.7092));
  }

  // 4. constrained oscillator, lie-span library, d_w = 2
  BoundRun hh;
  {
    DegreeConfig cfg = DegreeConfig::lie_span_preset(2);
    hh = run_search(henon_heiles(), cfg, Rat(600), Rat(400));
    bool ok = hh.C_star <= Rat(485) * Rat(1001, 1000) &&
              to_double(hh.bound.bound_lower) >= 5.7061 - 1e-3;
    report(4, ok, describe(hh, 485.485, 5.7051));
  }

  // 5. frequency quotient recovers the base frequency of a pure sine
  {
    bool ok = true;
    std::ostringstream os;
    for (double T : {1.0, 2 * std::numbers::pi, 6.0521}) {
      std::size_t n = 256;
      std::vector<double> s(n);
      for (std::size_t k = 0; k < n; ++k)
        s[k] = std::sin(2 * std::numbers::pi * double(k) / double(n));
      double w2 = std::pow(2 * std::numbers::pi / T, 2);
      double got = wirtinger_ratio(s, T);
      ok = ok && std::abs(got - w2) <= 1e-6 * w2;
      os << "T = " << T << ": ratio " << got << " vs " << w2 << "  ";
    }
    report(5, ok, os.str());
  }

  // 6. shooting from the published seed reproduces the reference orbit
  {
    SystemSpec sys = henon_heiles();
    Polynomial H = henon_heiles_energy();
    std::ostringstream os;
    bool ok = false;
    try {
      ShootingOptions shoot;
      shoot.surface = sys.constraint;  // pins the energy to the certified level set
      PeriodicOrbitCandidate orbit =
          refine_orbit(sys, {0.0, -0.3979, 0.2922, 0.0}, 6.0521 / 20.0, shoot, H);
      double T_orig = orbit.T * to_double(sys.time_scale);
      std::vector<Rat> x0r(4);
      for (int i = 0; i < 4; ++i) x0r[i] = rat_from_double(orbit.x0[i]);
      double energy = to_double(H.evaluate(x0r));
      double hh_bound = to_double(hh.bound.bound_lower);
      ok = std::abs(T_orig - 6.0521) < 5e-3 && std::abs(energy - 1.0 / 7.0) < 2e-4 &&
           orbit.closure_error < 1e-8 && T_orig >= hh_bound;
      os << "T = " << T_orig << " (target 6.0521 +- 5e-3), H(x0) = " << energy
         << " (target 1/7 +- 2e-4), closure " << orbit.closure_error << ", bound "
         << hh_bound;
    } catch (const std::exception& e) {
      os << "refinement failed: " << e.what();
    }
    report(6, ok, os.str());
  }

  // 7. every certificate: exact pointwise nonnegativity, offline round trip,
  //    tamper detection
  {
    std::mt19937_64 rng(20260816);
    bool ok = true;
    std::ostringstream os;
    int idx = 0;
    for (const BoundRun* run : {&lorenz1, &lorenz2, &hh}) {
      ++idx;
      const RationalCertificate& cert = run->certificate;

      bool nn = nonneg_at_random_rationals(sos_side(cert), 1000, rng);

      std::string path = "acceptance_cert_" + std::to_string(idx) + ".cert";
      write_certificate_file(cert, path);
      RationalCertificate back = read_certificate_file(path);
      bool offline = verify_certificate(back).pass();

      RationalCertificate tampered = back;
      std::uniform_int_distribution<std::size_t> pick(0, tampered.y.size() - 1);
      tampered.y[pick(rng)] += Rat(1, 7919);
      bool caught = !verify_certificate(tampered).pass();

      ok = ok && nn && offline && caught;
      os << "cert " << idx << ": nonneg@1000 " << (nn ? "yes" : "NO") << ", offline verify "
         << (offline ? "pass" : "FAIL") << ", tamper caught " << (caught ? "yes" : "NO")
         << "  ";
      std::remove(path.c_str());
    }
    report(7, ok, os.str());
  }

  // 8. exact-algebra property suite
  {
    std::mt19937_64 rng(881);
    std::ostringstream os;

    bool derivation = true;
    for (int t = 0; t < 100 && derivation; ++t) {
      std::size_t nv = 1 + (rng() % 4);
      std::vector<Polynomial> f(nv);
      for (auto& fi : f) fi = random_poly(rng, nv, 2);
      Polynomial p = random_poly(rng, nv, 3), q = random_poly(rng, nv, 3);
      Polynomial lhs = lie_derivative(p * q, f);
      Polynomial rhs = p * lie_derivative(q, f) + q * lie_derivative(p, f);
      derivation = (lhs - rhs).is_zero();
    }
    os << "derivation law " << (derivation ? "holds" : "FAILS");

    bool parity = true;
    for (const SystemSpec& sys : {lorenz_rescaled(), henon_heiles()}) {
      const SignSymmetry& sym = *sys.symmetry;
      for (int t = 0; t < 50 && parity; ++t) {
        Polynomial p = random_poly(rng, sys.n_vars, 3);
        for (int want : {+1, -1}) {
          Polynomial part(sys.n_vars);
          for (const auto& [m, c] : p.terms())
            if (sym.parity(m) == want) part += Polynomial::from_monomial(m, c);
          Polynomial d = lie_derivative(part, sys.f);
          if (!d.is_zero() && d.parity_under(sym) != want) parity = false;
        }
      }
    }
    os << ", parity preserved " << (parity ? "yes" : "NO");

    bool projection = true;
    for (int t = 0; t < 100 && projection; ++t) {
      std::size_t m = 1 + (rng() % 6), n = 1 + (rng() % 8);
      RatMatrix A(m, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = random_rat(rng);
      std::vector<Rat> truth(n), y0(n);
      for (std::size_t j = 0; j < n; ++j) {
        truth[j] = random_rat(rng);
        y0[j] = truth[j] + random_rat(rng, 3, 50);
      }
      LinearCertificateSystem lcs;
      lcs.A = A;
      lcs.c_vec = A.multiply(truth);
      std::vector<Rat> y = exact_project(lcs, y0);
      projection = verify_identity(lcs, y);
    }
    os << ", projection post-condition " << (projection ? "holds" : "FAILS");

    bool pd_agree = true;
    for (int t = 0; t < 100 && pd_agree; ++t) {
      std::size_t k = 1 + (rng() % 5);
      RatMatrix B(k, k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) B(i, j) = random_rat(rng, 5, 4);
      RatMatrix M(k, k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
          Rat dot(0);
          for (std::size_t l = 0; l < k; ++l) dot += B(l, i) * B(l, j);
          M(i, j) = dot;
        }
      if (t % 2) {
        for (std::size_t i = 0; i < k; ++i) M(i, i) += Rat(1);
      } else {
        Rat dmax(0);
        for (std::size_t i = 0; i < k; ++i)
          if (M(i, i) > dmax) dmax = M(i, i);
        for (std::size_t i = 0; i < k; ++i) M(i, i) -= dmax + Rat(1);
      }
      Eigen::MatrixXd Mf(k, k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) Mf(i, j) = to_double(M(i, j));
      bool oracle = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Mf)
                        .eigenvalues()
                        .minCoeff() > 0;
      pd_agree = sylvester_pd(M) == oracle;
    }
    os << ", PD test agrees with eigenvalue oracle " << (pd_agree ? "yes" : "NO");

    report(8, derivation && parity && projection && pd_agree, os.str());
  }

  std::cout << (g_failures == 0 ? "all criteria passed" : "FAILURES PRESENT") << "\n";
  return g_failures == 0 ? 0 : 1;
}
