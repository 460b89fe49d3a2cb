#pragma once

// Numerical dynamics support: adaptive integration, the Wirtinger ratio
// sanity check, certificate-residual scanning on a Poincare section to
// seed short-orbit candidates, and single-shooting period refinement.
// Everything here is float-side plumbing; nothing feeds back into the
// exact certificate chain.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "certify.hpp"

namespace periodbound {

struct Trajectory {
  std::vector<double> times;                // strictly increasing
  std::vector<std::vector<double>> states;  // finite, one per time
  std::string system;
  double tol = 0.0;
  std::optional<double> conserved_drift;  // max |H(x(t)) - H(x0)| when tracked
};

struct PeriodicOrbitCandidate {
  std::vector<double> x0;
  double T = 0.0;  // in the system's own time units
  double closure_error = 0.0;
  std::optional<double> conserved_drift;
};

namespace orbitdetail {

/// Double-precision view of a polynomial, cheap to evaluate repeatedly.
struct FloatPoly {
  struct Term {
    std::vector<std::uint32_t> e;
    double c;
  };
  std::vector<Term> terms;

  static FloatPoly from(const Polynomial& p) {
    FloatPoly f;
    for (const auto& [m, c] : p.terms()) f.terms.push_back({m.exponents, to_double(c)});
    return f;
  }

  double eval(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& t : terms) {
      double v = t.c;
      for (std::size_t i = 0; i < t.e.size(); ++i)
        for (std::uint32_t k = 0; k < t.e[i]; ++k) v *= x[i];
      s += v;
    }
    return s;
  }

  /// Coefficients (ascending) of the univariate restriction along x[var],
  /// all other coordinates frozen at x.
  std::vector<double> restrict_to(const std::vector<double>& x, std::size_t var) const {
    std::vector<double> coef;
    for (const auto& t : terms) {
      double v = t.c;
      for (std::size_t i = 0; i < t.e.size(); ++i) {
        if (i == var) continue;
        for (std::uint32_t k = 0; k < t.e[i]; ++k) v *= x[i];
      }
      std::size_t d = var < t.e.size() ? t.e[var] : 0;
      if (coef.size() <= d) coef.resize(d + 1, 0.0);
      coef[d] += v;
    }
    return coef;
  }
};

/// Real roots of sum coef[k] z^k via the companion matrix.
inline std::vector<double> real_roots(std::vector<double> coef) {
  double top = 0;
  for (double c : coef) top = std::max(top, std::abs(c));
  if (top == 0) return {};
  while (coef.size() > 1 && std::abs(coef.back()) < 1e-12 * top) coef.pop_back();
  std::size_t d = coef.size() - 1;
  if (d == 0) return {};
  if (d == 1) return {-coef[0] / coef[1]};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < d; ++i) comp(i, d - 1) = -coef[i] / coef[d];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  std::vector<double> roots;
  for (std::size_t i = 0; i < d; ++i) {
    auto z = es.eigenvalues()(static_cast<Eigen::Index>(i));
    if (std::abs(z.imag()) < 1e-8 * std::max(1.0, std::abs(z.real())))
      roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

inline std::vector<FloatPoly> float_field(const SystemSpec& sys) {
  std::vector<FloatPoly> fs;
  for (const auto& p : sys.f) fs.push_back(FloatPoly::from(p));
  return fs;
}

}  // namespace orbitdetail

/// Adaptive Dormand-Prince integration with local error control at tol.
/// Tracks max drift of `conserved` along the way when given. Throws on
/// step-size underflow or a non-finite state.
inline Trajectory integrate(const SystemSpec& sys, std::vector<double> x0, double t_end,
                            double tol = 1e-10,
                            const std::optional<Polynomial>& conserved = std::nullopt) {
  if (!(tol > 0)) throw std::invalid_argument("integrate: tol must be positive");
  if (x0.size() != sys.n_vars) throw std::invalid_argument("integrate: state size mismatch");
  auto fs = orbitdetail::float_field(sys);
  auto rhs = [&fs](const std::vector<double>& x, std::vector<double>& dxdt, double) {
    dxdt.resize(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) dxdt[i] = fs[i].eval(x);
  };

  namespace ode = boost::numeric::odeint;
  auto stepper =
      ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<std::vector<double>>());

  std::optional<orbitdetail::FloatPoly> h;
  double h0 = 0;
  if (conserved) {
    h = orbitdetail::FloatPoly::from(*conserved);
    h0 = h->eval(x0);
  }

  Trajectory traj;
  traj.system = sys.name;
  traj.tol = tol;
  double drift = 0;
  double t = 0, dt = std::min(1e-3, t_end > 0 ? t_end : 1e-3);
  traj.times.push_back(t);
  traj.states.push_back(x0);
  std::vector<double> x = std::move(x0);
  const double dt_floor = 1e-15 * std::max(1.0, std::abs(t_end));
  std::size_t steps = 0;
  while (t < t_end) {
    if (dt < dt_floor || ++steps > 50'000'000)
      throw std::runtime_error("integrate: step-size underflow");
    dt = std::min(dt, t_end - t);
    if (stepper.try_step(rhs, x, t, dt) != ode::success) continue;
    for (double v : x)
      if (!std::isfinite(v)) throw std::runtime_error("integrate: state diverged");
    traj.times.push_back(t);
    traj.states.push_back(x);
    if (h) drift = std::max(drift, std::abs(h->eval(x) - h0));
  }
  if (h) traj.conserved_drift = drift;
  return traj;
}

/// Rayleigh quotient int |f'|^2 / int |f|^2 of the trigonometric
/// interpolant through uniform samples f(kT/N), k = 0..N-1 (endpoint
/// excluded). Requires a mean-zero signal; throws on f identically zero.
inline double wirtinger_ratio(const std::vector<double>& samples, double T) {
  const std::size_t n = samples.size();
  if (n < 4) throw std::invalid_argument("wirtinger_ratio: need at least 4 samples");
  if (!(T > 0)) throw std::invalid_argument("wirtinger_ratio: period must be positive");
  double peak = 0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  if (peak == 0) throw std::invalid_argument("wirtinger_ratio: signal is identically zero");
  double mean = 0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  if (std::abs(mean) > 1e-7 * peak)
    throw std::invalid_argument("wirtinger_ratio: signal is not mean-zero");

  // O(n^2) DFT; sample counts here stay in the low thousands
  double num = 0, den = 0;
  const double w0 = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t m = 1; m < n; ++m) {
    double re = 0, im = 0;
    for (std::size_t k = 0; k < n; ++k) {
      double ang = w0 * static_cast<double>(m * k % n);
      re += samples[k] * std::cos(ang);
      im -= samples[k] * std::sin(ang);
    }
    double power = (re * re + im * im) / static_cast<double>(n * n);
    double freq = static_cast<double>(std::min(m, n - m));  // cycles per period
    double omega = 2.0 * std::numbers::pi * freq / T;
    num += omega * omega * power;
    den += power;
  }
  if (den == 0) throw std::invalid_argument("wirtinger_ratio: signal is identically zero");
  return num / den;
}

/// The pointwise certificate expression C (ge' Qe ge + go' Qo go)
/// - ((L ge)' Qe (L ge) + (L go)' Qo (L go)) + L_f(v'a): nonnegative on the
/// orbit class surface, and near zero along a period-critical orbit.
inline Polynomial scan_residual_polynomial(const RationalCertificate& cert) {
  std::vector<Polynomial> cols = column_polynomials(cert.identity);
  Polynomial r(cert.identity.system.n_vars);
  for (const auto& b : cert.identity.layout.blocks) {
    if (b.name != "Q_e" && b.name != "Q_o" && b.name != "v") continue;
    std::size_t count =
        b.kind == BlockKind::sym_matrix ? b.size * (b.size + 1) / 2 : b.size;
    for (std::size_t k = 0; k < count; ++k) r += cert.y[b.offset + k] * cols[b.offset + k];
  }
  return r;
}

struct ScanSeed {
  std::vector<double> x0;
  double residual = 0.0;
  double suggested_T = 0.0;  // 2 pi / sqrt(C) in system time units
};

struct ScanOptions {
  std::size_t n_starts = 64;
  std::uint64_t rng_seed = 1;
  double box = 1.5;          // sampling range for free coordinates
  int descent_iters = 80;
  double dedup_distance = 1e-3;
};

namespace orbitdetail {

/// Quasi-Newton (BFGS) minimization with numerical gradients and Armijo
/// backtracking; objective may return +inf to reject a region.
template <typename F>
inline Eigen::VectorXd bfgs_minimize(F&& f, Eigen::VectorXd u, int iters) {
  const auto k = u.size();
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(k, k);
  auto grad = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd g(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      double h = 1e-6 * std::max(1.0, std::abs(p[i]));
      Eigen::VectorXd a = p, b = p;
      a[i] += h;
      b[i] -= h;
      g[i] = (f(a) - f(b)) / (2 * h);
    }
    return g;
  };
  double fu = f(u);
  if (!std::isfinite(fu)) return u;
  Eigen::VectorXd g = grad(u);
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd d = -(Hinv * g);
    double slope = g.dot(d);
    if (slope > -1e-18) break;
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::VectorXd u2 = u + step * d;
      double f2 = f(u2);
      if (std::isfinite(f2) && f2 <= fu + 1e-4 * step * slope) {
        Eigen::VectorXd g2 = grad(u2);
        Eigen::VectorXd s = u2 - u, y = g2 - g;
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
          Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
          Eigen::MatrixXd V = I - (s * y.transpose()) / sy;
          Hinv = V * Hinv * V.transpose() + (s * s.transpose()) / sy;
        } else {
          Hinv = Eigen::MatrixXd::Identity(k, k);
        }
        u = u2;
        fu = f2;
        g = g2;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    if (g.norm() < 1e-12) break;
  }
  return u;
}

inline double image_distance(const std::vector<double>& a, const std::vector<double>& b,
                             const std::optional<SignSymmetry>& sym) {
  auto dist = [](const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
    return std::sqrt(s);
  };
  double best = dist(a, b);
  if (sym) {
    std::vector<double> img(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) img[i] = sym->signs[i] * b[i];
    best = std::min(best, dist(a, img));
  }
  return best;
}

}  // namespace orbitdetail

/// Multistart descent of the certificate residual over the Poincare section
/// {x[section_var] = section_value}, restricted to {surface = 0} when a
/// surface polynomial is given (one coordinate is solved for, the rest are
/// free). Seeds come back deduplicated modulo the sign symmetry, sorted by
/// residual then lexicographically.
inline std::vector<ScanSeed> residual_scan(const RationalCertificate& cert,
                                           const SystemSpec& system, std::size_t section_var,
                                           double section_value,
                                           const std::optional<Polynomial>& surface,
                                           const ScanOptions& opt = {}) {
  if (section_var >= system.n_vars)
    throw std::invalid_argument("residual_scan: section variable out of range");
  if (opt.n_starts == 0) return {};
  using orbitdetail::FloatPoly;
  FloatPoly resid = FloatPoly::from(scan_residual_polynomial(cert));
  std::optional<FloatPoly> surf;
  std::size_t solve_var = system.n_vars;  // coordinate eliminated via the surface
  if (surface) {
    surf = FloatPoly::from(*surface);
    for (std::size_t i = system.n_vars; i-- > 0;) {
      if (i == section_var) continue;
      bool appears = false;
      for (const auto& t : surf->terms)
        if (i < t.e.size() && t.e[i] > 0) appears = true;
      if (appears) {
        solve_var = i;
        break;
      }
    }
    if (solve_var == system.n_vars)
      throw std::invalid_argument("residual_scan: surface has no solvable coordinate");
  }

  std::vector<std::size_t> free_vars;
  for (std::size_t i = 0; i < system.n_vars; ++i)
    if (i != section_var && i != solve_var) free_vars.push_back(i);

  std::mt19937_64 rng(opt.rng_seed);
  // fixed bit-to-double mapping keeps scan trajectories replayable across
  // standard library implementations
  auto unif = [&rng, &opt] {
    return opt.box * (2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0);
  };

  // assembles the full state from free coordinates; solves the surface for
  // solve_var, taking the real root nearest the previous value
  auto lift = [&](const Eigen::VectorXd& u, double prev_solved,
                  std::vector<double>& x) -> bool {
    x.assign(system.n_vars, 0.0);
    x[section_var] = section_value;
    for (std::size_t i = 0; i < free_vars.size(); ++i) x[free_vars[i]] = u[static_cast<Eigen::Index>(i)];
    if (!surf) return true;
    x[solve_var] = 0.0;
    auto roots = orbitdetail::real_roots(surf->restrict_to(x, solve_var));
    if (roots.empty()) return false;
    double best = roots[0];
    for (double r : roots)
      if (std::abs(r - prev_solved) < std::abs(best - prev_solved)) best = r;
    x[solve_var] = best;
    return true;
  };

  std::vector<ScanSeed> found;
  std::vector<double> x;
  for (std::size_t s = 0; s < opt.n_starts; ++s) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(free_vars.size()));
    double solved0 = 0;
    bool ok = false;
    for (int tries = 0; tries < 200 && !ok; ++tries) {
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unif();
      solved0 = surf ? unif() : 0.0;
      ok = lift(u, solved0, x);
      if (ok && surf) solved0 = x[solve_var];
    }
    if (!ok) continue;

    double track = solved0;
    auto objective = [&](const Eigen::VectorXd& p) {
      std::vector<double> xi;
      if (!lift(p, track, xi)) return std::numeric_limits<double>::infinity();
      if (surf) track = xi[solve_var];
      return resid.eval(xi);
    };
    Eigen::VectorXd u_min = orbitdetail::bfgs_minimize(objective, u, opt.descent_iters);
    if (!lift(u_min, track, x)) continue;
    found.push_back(ScanSeed{x, resid.eval(x), 0.0});
  }
  if (found.empty())
    throw std::runtime_error("residual_scan: no section point satisfies the surface constraint");

  std::sort(found.begin(), found.end(), [](const ScanSeed& a, const ScanSeed& b) {
    if (a.residual != b.residual) return a.residual < b.residual;
    return a.x0 < b.x0;
  });
  std::vector<ScanSeed> unique;
  for (const auto& s : found) {
    bool dup = false;
    for (const auto& u2 : unique)
      if (orbitdetail::image_distance(s.x0, u2.x0, system.symmetry) < opt.dedup_distance)
        dup = true;
    if (!dup) unique.push_back(s);
  }
  double t_sys = 2.0 * std::numbers::pi / std::sqrt(to_double(cert.identity.C));
  for (auto& s : unique) s.suggested_T = t_sys;
  return unique;
}

struct ShootingOptions {
  int max_iters = 40;
  double closure_tol = 1e-8;
  double integrator_tol = 1e-12;
  std::optional<std::size_t> section_var;  // phase anchor; default: fastest coordinate
  std::optional<Polynomial> surface;       // conserved level set kept at zero
};

/// Single shooting with free period: Newton on [x(T;x0) - x0; phase], the
/// phase condition pinning one coordinate of x0 to its seed value. With a
/// conserved surface the closure component most aligned with the surface
/// gradient is redundant and is swapped for surface(x0) = 0, keeping the
/// iteration on the level set. Throws when the closure error fails to reach
/// tolerance.
inline PeriodicOrbitCandidate refine_orbit(const SystemSpec& system,
                                           const std::vector<double>& seed, double T_guess,
                                           const ShootingOptions& opt = {},
                                           const std::optional<Polynomial>& conserved =
                                               std::nullopt) {
  if (!(T_guess > 0)) throw std::invalid_argument("refine_orbit: T_guess must be positive");
  if (seed.size() != system.n_vars) throw std::invalid_argument("refine_orbit: state size mismatch");
  const std::size_t n = system.n_vars;

  std::size_t anchor = 0;
  if (opt.section_var) {
    anchor = *opt.section_var;
    if (anchor >= n) throw std::invalid_argument("refine_orbit: section variable out of range");
  } else {
    auto fs = orbitdetail::float_field(system);
    double best = -1;
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::abs(fs[i].eval(seed));
      if (v > best) {
        best = v;
        anchor = i;
      }
    }
  }
  const double anchor_value = seed[anchor];

  // with a conserved surface, closure along its gradient is automatic; swap
  // that component for the surface equation so Newton stays on the level set
  std::optional<orbitdetail::FloatPoly> surf;
  std::size_t drop = n;
  if (opt.surface) {
    if (opt.surface->n_vars() != n)
      throw std::invalid_argument("refine_orbit: surface variable count mismatch");
    surf = orbitdetail::FloatPoly::from(*opt.surface);
    double best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double g = std::abs(orbitdetail::FloatPoly::from(opt.surface->derivative(i)).eval(seed));
      if (g > best) {
        best = g;
        drop = i;
      }
    }
    if (drop == n)
      throw std::runtime_error("refine_orbit: surface gradient vanishes at the seed");
  }

  auto flow = [&](const std::vector<double>& x0, double T) {
    Trajectory tr = integrate(system, x0, T, opt.integrator_tol);
    return tr.states.back();
  };
  auto F = [&](const Eigen::VectorXd& u) {
    std::vector<double> x0(n);
    for (std::size_t i = 0; i < n; ++i) x0[i] = u[static_cast<Eigen::Index>(i)];
    std::vector<double> xT = flow(x0, u[static_cast<Eigen::Index>(n)]);
    Eigen::VectorXd r(n + 1);
    for (std::size_t i = 0; i < n; ++i) r[static_cast<Eigen::Index>(i)] = xT[i] - x0[i];
    if (surf) r[static_cast<Eigen::Index>(drop)] = surf->eval(x0);
    r[static_cast<Eigen::Index>(n)] = x0[anchor] - anchor_value;
    return r;
  };

  Eigen::VectorXd u(n + 1);
  for (std::size_t i = 0; i < n; ++i) u[static_cast<Eigen::Index>(i)] = seed[i];
  u[static_cast<Eigen::Index>(n)] = T_guess;

  Eigen::VectorXd r = F(u);
  for (int it = 0; it < opt.max_iters; ++it) {
    double closure = r.head(static_cast<Eigen::Index>(n)).norm();
    if (closure < opt.closure_tol && std::abs(r[static_cast<Eigen::Index>(n)]) < opt.closure_tol) {
      std::vector<double> x0(n);
      for (std::size_t i = 0; i < n; ++i) x0[i] = u[static_cast<Eigen::Index>(i)];
      double T = u[static_cast<Eigen::Index>(n)];
      Trajectory tr = integrate(system, x0, T, opt.integrator_tol, conserved);
      // true closure, including any component swapped for the surface equation
      double full = 0;
      for (std::size_t i = 0; i < n; ++i)
        full = std::hypot(full, tr.states.back()[i] - x0[i]);
      if (full < opt.closure_tol) {
        // an equilibrium closes at every T; only moving solutions are orbits
        double amplitude = 0, scale = 1;
        for (const auto& x : tr.states)
          for (std::size_t i = 0; i < n; ++i) {
            amplitude = std::max(amplitude, std::abs(x[i] - x0[i]));
            scale = std::max(scale, std::abs(x0[i]));
          }
        if (amplitude <= 1e-6 * scale)
          throw std::runtime_error("refine_orbit: converged to an equilibrium");
        return PeriodicOrbitCandidate{x0, T, full, tr.conserved_drift};
      }
    }
    Eigen::MatrixXd J(n + 1, n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      double h = 1e-7 * std::max(1.0, std::abs(u[static_cast<Eigen::Index>(j)]));
      Eigen::VectorXd up = u;
      up[static_cast<Eigen::Index>(j)] += h;
      J.col(static_cast<Eigen::Index>(j)) = (F(up) - r) / h;
    }
    Eigen::VectorXd du = J.colPivHouseholderQr().solve(-r);
    double step = 1.0;
    for (int bt = 0; bt < 8; ++bt) {
      Eigen::VectorXd u2 = u + step * du;
      if (u2[static_cast<Eigen::Index>(n)] > 0) {
        Eigen::VectorXd r2 = F(u2);
        if (r2.norm() < r.norm() || bt == 7) {
          u = u2;
          r = r2;
          break;
        }
      }
      step *= 0.5;
    }
  }
  throw std::runtime_error("refine_orbit: no convergence within iteration limit");
}

}  // namespace periodbound
