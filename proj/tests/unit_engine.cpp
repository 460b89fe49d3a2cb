#include <catch2/catch_amalgamated.hpp>

#include "periodbound/builtins.hpp"
#include "periodbound/certify.hpp"

using namespace periodbound;

namespace {

struct LorenzSetup {
  SystemSpec system = lorenz_rescaled();
  DegreeConfig degrees;
  ObservableLibrary library;

  LorenzSetup() {
    degrees.mode = LibraryMode::parity;
    degrees.d_g = 1;
    degrees.d_a = 4;
    degrees.d_b = 2;
    library = build_library(system, degrees);
  }
};

}  // namespace

TEST_CASE("search config invariants") {
  SearchConfig s;
  s.C_hi = Rat(100);
  s.C_lo = Rat(1);
  CHECK_NOTHROW(s.validate());
  SearchConfig bad = s;
  bad.C_lo = Rat(0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.C_hi = Rat(1, 2);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.rel_tol = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.prune_rounds = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.max_iter = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("pruning with zero rounds returns the identity unchanged") {
  LorenzSetup z;
  SosIdentity id = assemble_identity(z.system, z.library, z.degrees, Rat(5896));
  FloatSolution sol = solve_feasibility(flatten(id), id.layout);
  REQUIRE(sol.solver_status == SolverStatus::feasible);

  PruneOutcome pr = prune_bases(id, sol, 1e-7, 0);
  CHECK(pr.rounds_applied == 0);
  CHECK(pr.identity.layout.total() == id.layout.total());
  CHECK(pr.identity.a == id.a);
  CHECK(pr.identity.b_e == id.b_e);
  CHECK(pr.identity.b_o == id.b_o);
  CHECK(pr.solution.y_float == sol.y_float);
}

TEST_CASE("pruning requires a feasible starting solution") {
  LorenzSetup z;
  SosIdentity id = assemble_identity(z.system, z.library, z.degrees, Rat(1));
  FloatSolution sol = solve_feasibility(flatten(id), id.layout);
  REQUIRE(sol.solver_status != SolverStatus::feasible);
  CHECK_THROWS_AS(prune_bases(id, sol), std::logic_error);
}

TEST_CASE("pruning shrinks the feasible rescaled-Lorenz identity and stays feasible") {
  LorenzSetup z;
  SosIdentity id = assemble_identity(z.system, z.library, z.degrees, Rat(5896));
  FloatSolution sol = solve_feasibility(flatten(id), id.layout);
  REQUIRE(sol.solver_status == SolverStatus::feasible);

  PruneOutcome pr = prune_bases(id, sol);
  CHECK(pr.rounds_applied >= 1);
  CHECK(pr.identity.layout.total() < id.layout.total());
  CHECK(pr.solution.solver_status == SolverStatus::feasible);
  // every block that survives keeps at least one element
  for (const auto& b : pr.identity.layout.blocks) CHECK(b.size >= 1);
  // the pruned flattening matches the pruned identity
  CHECK(pr.lcs.A.cols() == pr.identity.layout.total());
  // and the pruned identity still validates exactly
  CHECK(validate_pruned(z.degrees, pr).has_value());
}

TEST_CASE("bisection finds the documented rescaled-Lorenz threshold") {
  LorenzSetup z;
  SearchConfig search;
  search.C_hi = Rat(10000);
  search.C_lo = Rat(1);
  search.rel_tol = 1e-3;

  auto validator = [&](const PruneOutcome& pr) { return validate_pruned(z.degrees, pr); };
  auto res = minimize_C(z.system, z.library, z.degrees, search, validator);
  // documented critical value 5896; allow the bisection tolerance
  CHECK(res.C_star <= Rat(5896) * Rat(1001, 1000));
  CHECK(res.C_star > Rat(5000));
  CHECK(res.attempts <= search.max_iter);
  // the winning certificate re-verifies offline
  CHECK(verify_certificate(res.certificate).pass());
}

TEST_CASE("search demands a validated starting point") {
  LorenzSetup z;
  SearchConfig search;
  search.C_hi = Rat(1);  // far below the feasibility threshold
  search.C_lo = Rat(1);
  auto validator = [&](const PruneOutcome& pr) { return validate_pruned(z.degrees, pr); };
  CHECK_THROWS_WITH(minimize_C(z.system, z.library, z.degrees, search, validator),
                    Catch::Matchers::ContainsSubstring("no validated starting point"));
}

TEST_CASE("degenerate search interval returns the validated endpoint") {
  LorenzSetup z;
  SearchConfig search;
  search.C_hi = Rat(5896);
  search.C_lo = Rat(5896);
  auto validator = [&](const PruneOutcome& pr) { return validate_pruned(z.degrees, pr); };
  auto res = minimize_C(z.system, z.library, z.degrees, search, validator);
  CHECK(res.C_star == Rat(5896));
  CHECK(res.attempts == 1);
}

TEST_CASE("search floor that validates is returned directly") {
  LorenzSetup z;
  SearchConfig search;
  search.C_hi = Rat(20000);
  search.C_lo = Rat(10000);  // both sides of the interval are feasible
  auto validator = [&](const PruneOutcome& pr) { return validate_pruned(z.degrees, pr); };
  auto res = minimize_C(z.system, z.library, z.degrees, search, validator);
  CHECK(res.C_star == Rat(10000));
  CHECK(res.attempts == 2);
}

TEST_CASE("feasibility is monotone in C") {
  LorenzSetup z;
  // validated at C implies solver-feasible at 2C (absorbing the slack)
  for (const Rat& C : {Rat(5896), Rat(8000)}) {
    SosIdentity id = assemble_identity(z.system, z.library, z.degrees, C);
    FloatSolution sol = solve_feasibility(flatten(id), id.layout);
    REQUIRE(sol.solver_status == SolverStatus::feasible);
    SosIdentity id2 = assemble_identity(z.system, z.library, z.degrees, 2 * C);
    FloatSolution sol2 = solve_feasibility(flatten(id2), id2.layout);
    CHECK(sol2.solver_status == SolverStatus::feasible);
  }
}

TEST_CASE("search log lines carry iteration, C, status, verdict, and time") {
  LorenzSetup z;
  SearchConfig search;
  search.C_hi = Rat(8000);
  search.C_lo = Rat(8000);
  std::vector<std::string> lines;
  auto validator = [&](const PruneOutcome& pr) { return validate_pruned(z.degrees, pr); };
  minimize_C(z.system, z.library, z.degrees, search, validator,
             [&](const std::string& s) { lines.push_back(s); });
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].find("iter 1") != std::string::npos);
  CHECK(lines[0].find("C 8000") != std::string::npos);
  CHECK(lines[0].find("solver feasible") != std::string::npos);
  CHECK(lines[0].find("validation pass") != std::string::npos);
  CHECK(lines[0].find(" t ") != std::string::npos);
}
