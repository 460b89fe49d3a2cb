#pragma once

// Search layer: basis pruning between solves and bisection on C with a
// validated-certificate invariant. Solver verdicts steer the search;
// only exact validation is allowed to mark a C as good.

#include <chrono>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "sdp.hpp"

namespace periodbound {

struct SearchConfig {
  Rat C_hi;
  Rat C_lo;
  double rel_tol = 1e-4;
  int max_iter = 60;
  double prune_threshold = 1e-7;
  int prune_rounds = 5;

  void validate() const {
    if (!(C_lo > 0)) throw std::invalid_argument("C_lo must be positive");
    if (!(C_hi >= C_lo)) throw std::invalid_argument("C_hi must be >= C_lo");
    if (!(rel_tol > 0)) throw std::invalid_argument("rel_tol must be positive");
    if (prune_rounds < 0) throw std::invalid_argument("prune_rounds must be >= 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  }
};

using LogFn = std::function<void(const std::string&)>;

struct PruneOutcome {
  SosIdentity identity;
  FloatSolution solution;
  LinearCertificateSystem lcs;
  int rounds_applied = 0;
};

namespace enginedetail {

/// Indices whose value clears the relative threshold; the largest entry
/// survives even when everything is tiny (a required block keeps >= 1).
inline std::vector<std::size_t> keep_indices(const std::vector<double>& vals, double threshold,
                                             bool use_abs) {
  std::vector<std::size_t> keep;
  if (vals.empty()) return keep;
  double top = -std::numeric_limits<double>::infinity();
  std::size_t top_at = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    double v = use_abs ? std::abs(vals[i]) : vals[i];
    if (v > top) {
      top = v;
      top_at = i;
    }
  }
  for (std::size_t i = 0; i < vals.size(); ++i) {
    double v = use_abs ? std::abs(vals[i]) : vals[i];
    if (v >= threshold * top && top > 0) keep.push_back(i);
  }
  if (keep.empty()) keep.push_back(top_at);
  return keep;
}

inline std::vector<double> gram_diagonal(const UnknownLayout& layout, const char* name,
                                         const std::vector<double>& y) {
  std::vector<double> d;
  if (const LayoutBlock* b = layout.find(name))
    for (std::size_t i = 0; i < b->size; ++i) d.push_back(y[UnknownLayout::sym_index(*b, i, i)]);
  return d;
}

inline std::vector<double> vector_entries(const UnknownLayout& layout, const char* name,
                                          const std::vector<double>& y) {
  std::vector<double> d;
  if (const LayoutBlock* b = layout.find(name))
    for (std::size_t i = 0; i < b->size; ++i) d.push_back(y[b->offset + i]);
  return d;
}

}  // namespace enginedetail

/// Iteratively drops library and basis elements whose certificate weight is
/// negligible, re-solving after each round. Returns the last round whose
/// re-solve stayed feasible (never throws on a failed round).
inline PruneOutcome prune_bases(const SosIdentity& identity, const FloatSolution& solution,
                                double threshold = 1e-7, int rounds = 5,
                                const SdpOptions& opt = {}) {
  if (solution.solver_status != SolverStatus::feasible)
    throw std::logic_error("prune_bases requires a feasible starting solution");
  using enginedetail::gram_diagonal;
  using enginedetail::keep_indices;
  using enginedetail::vector_entries;

  PruneOutcome cur{identity, solution, flatten(identity), 0};
  for (int round = 1; round <= rounds; ++round) {
    const auto& y = cur.solution.y_float;
    const auto& lay = cur.identity.layout;
    auto ge = keep_indices(gram_diagonal(lay, "Q_e", y), threshold, false);
    auto go = keep_indices(gram_diagonal(lay, "Q_o", y), threshold, false);
    auto be = keep_indices(gram_diagonal(lay, "P_e", y), threshold, false);
    auto bo = keep_indices(gram_diagonal(lay, "P_o", y), threshold, false);
    auto av = keep_indices(vector_entries(lay, "v", y), threshold, true);
    auto cb = keep_indices(vector_entries(lay, "rho", y), threshold, true);
    bool unchanged = ge.size() == cur.identity.library.g_even.size() &&
                     go.size() == cur.identity.library.g_odd.size() &&
                     be.size() == cur.identity.b_e.size() &&
                     bo.size() == cur.identity.b_o.size() && av.size() == cur.identity.a.size() &&
                     cb.size() == cur.identity.c_basis.size();
    if (unchanged) break;

    SosIdentity next_id = cur.identity.restricted(ge, go, av, be, bo, cb);
    LinearCertificateSystem next_lcs = flatten(next_id);
    FloatSolution next_sol = solve_feasibility(next_lcs, next_id.layout, opt);
    if (next_sol.solver_status != SolverStatus::feasible) return cur;
    cur = PruneOutcome{std::move(next_id), std::move(next_sol), std::move(next_lcs), round};
  }
  return cur;
}

template <typename Cert>
struct SearchResult {
  Rat C_star;
  Cert certificate;
  int attempts = 0;
};

/// Bisection on C. The invariant: C_good always carries a certificate that
/// passed the exact validator; anything else (solver pessimism, failed
/// pruning, failed validation) marks the C as bad. The validator receives
/// the pruned identity and solution and returns an engaged optional on
/// success.
template <typename Validator>
auto minimize_C(const SystemSpec& system, const ObservableLibrary& library,
                const DegreeConfig& degrees, const SearchConfig& search, Validator&& validate,
                const LogFn& log = {}, const SdpOptions& opt = {}) {
  using OptCert = std::invoke_result_t<Validator&, const PruneOutcome&>;
  using Cert = typename OptCert::value_type;
  search.validate();

  auto t0 = std::chrono::steady_clock::now();
  auto emit = [&](int attempt, const Rat& C, const char* status, const char* verdict) {
    if (!log) return;
    std::ostringstream os;
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    os << "iter " << attempt << "  C " << rat_to_string(C) << "  solver " << status
       << "  validation " << verdict << "  t " << dt << "s";
    log(os.str());
  };

  int attempts = 0;
  auto attempt = [&](const Rat& C) -> OptCert {
    ++attempts;
    SosIdentity id = assemble_identity(system, library, degrees, C);
    FloatSolution sol = solve_feasibility(flatten(id), id.layout, opt);
    if (sol.solver_status != SolverStatus::feasible) {
      emit(attempts, C, to_string(sol.solver_status), "skipped");
      return std::nullopt;
    }
    PruneOutcome pruned = prune_bases(id, sol, search.prune_threshold, search.prune_rounds, opt);
    OptCert cert = validate(pruned);
    emit(attempts, C, "feasible", cert ? "pass" : "fail");
    return cert;
  };

  OptCert hi_cert = attempt(search.C_hi);
  if (!hi_cert) throw std::runtime_error("no validated starting point at C_hi");
  Rat C_good = search.C_hi;
  Cert best = std::move(*hi_cert);
  if (search.C_lo == search.C_hi)
    return SearchResult<Cert>{C_good, std::move(best), attempts};

  if (OptCert lo_cert = attempt(search.C_lo)) {
    // the floor itself validates: nothing below it is reachable
    return SearchResult<Cert>{search.C_lo, std::move(*lo_cert), attempts};
  }
  Rat C_bad = search.C_lo;

  while (attempts < search.max_iter) {
    Rat width = C_good / C_bad - 1;
    if (to_double(width) < search.rel_tol) break;
    Rat mid = limit_denominator((C_bad + C_good) / 2, 1000);
    if (mid <= C_bad || mid >= C_good) mid = (C_bad + C_good) / 2;
    if (OptCert cert = attempt(mid)) {
      C_good = mid;
      best = std::move(*cert);
    } else {
      C_bad = mid;
    }
  }
  return SearchResult<Cert>{C_good, std::move(best), attempts};
}

}  // namespace periodbound
