#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <periodbound/builtins.hpp>
#include <periodbound/identity.hpp>
#include <periodbound/library.hpp>
#include <periodbound/sdp.hpp>

using namespace periodbound;

namespace {

std::size_t block_size(const SosIdentity& id, const char* name) {
  const LayoutBlock* b = id.layout.find(name);
  return b ? b->size : 0;
}

std::vector<Rat> random_y(const UnknownLayout& layout, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-9, 9);
  std::uniform_int_distribution<int> den(1, 7);
  std::vector<Rat> y(layout.total());
  for (auto& v : y) v = make_rat(num(rng), den(rng));
  return y;
}

}  // namespace

TEST_CASE("observable library examples") {
  SystemSpec lor = lorenz_rescaled();
  DegreeConfig c1{LibraryMode::parity, 1, 1, 4, 2, std::nullopt};
  ObservableLibrary l1 = build_library(lor, c1);
  REQUIRE(l1.g_even.empty());
  REQUIRE(l1.g_odd.size() == 2);
  REQUIRE(l1.g_odd[0] == parse_polynomial("x1", 3));
  REQUIRE(l1.g_odd[1] == parse_polynomial("x2", 3));

  DegreeConfig c2{LibraryMode::parity, 2, 1, 6, 3, std::nullopt};
  ObservableLibrary l2 = build_library(lor, c2);
  REQUIRE(l2.g_odd.size() == 4);
  REQUIRE(l2.g_odd[2] == parse_polynomial("x1*x3", 3));
  REQUIRE(l2.g_odd[3] == parse_polynomial("x2*x3", 3));

  // lie-span mode keeps all four first-degree derivatives for HH
  SystemSpec hh = henon_heiles();
  DegreeConfig h1 = DegreeConfig::lie_span_preset(1);
  ObservableLibrary lh = build_library(hh, h1);
  REQUIRE(lh.size() == 4);
}

TEST_CASE("exact_rank_basis drops dependent polynomials first-come-first-kept") {
  Polynomial x1 = parse_polynomial("x1", 2), x2 = parse_polynomial("x2", 2);
  auto [kept1, idx1] = exact_rank_basis({x1, Rat(2) * x1, x2});
  REQUIRE(idx1 == std::vector<std::size_t>{0, 2});
  REQUIRE(kept1[0] == x1);
  auto [kept2, idx2] = exact_rank_basis({x1 + x2, x1 - x2, x2});
  REQUIRE(idx2 == std::vector<std::size_t>{0, 1});
}

TEST_CASE("identity layout sizes: Lorenz parity d_g=1") {
  SystemSpec lor = lorenz_rescaled();
  DegreeConfig cfg{LibraryMode::parity, 1, 1, 4, 2, std::nullopt};
  SosIdentity id = assemble_identity(lor, build_library(lor, cfg), cfg, Rat(5896));
  REQUIRE(id.layout.find("Q_e") == nullptr);
  REQUIRE(block_size(id, "Q_o") == 2);
  REQUIRE(block_size(id, "P_e") == 6);
  REQUIRE(block_size(id, "P_o") == 4);
  REQUIRE(block_size(id, "v") == 18);
  REQUIRE(id.layout.find("rho") == nullptr);
  REQUIRE(id.layout.total() == 3 + 21 + 10 + 18);
  REQUIRE(id.b_e[0].is_constant());
}

TEST_CASE("identity layout sizes: Henon-Heiles lie_span d_w=2 preset") {
  SystemSpec hh = henon_heiles();
  DegreeConfig cfg = DegreeConfig::lie_span_preset(2);
  REQUIRE(cfg.d_b == 3);
  REQUIRE(cfg.d_a == 5);
  REQUIRE(cfg.d_rho.value() == 3);
  ObservableLibrary lib = build_library(hh, cfg);
  REQUIRE(lib.g_even.size() + lib.g_odd.size() == 14);
  SosIdentity id = assemble_identity(hh, lib, cfg, Rat(485));
  REQUIRE(block_size(id, "Q_e") == 8);
  REQUIRE(block_size(id, "Q_o") == 6);
  REQUIRE(block_size(id, "P_e") == 19);
  REQUIRE(block_size(id, "P_o") == 16);
  REQUIRE(block_size(id, "v") == 65);
  REQUIRE(block_size(id, "rho") == 19);
  REQUIRE(id.layout.total() == 36 + 21 + 190 + 136 + 65 + 19);
}

TEST_CASE("assembly rejects undersized d_b and bad C") {
  SystemSpec lor = lorenz_rescaled();
  DegreeConfig cfg{LibraryMode::parity, 2, 1, 6, 1, std::nullopt};
  ObservableLibrary lib = build_library(lor, cfg);
  REQUIRE_THROWS_WITH(assemble_identity(lor, lib, cfg, Rat(100)),
                      Catch::Matchers::ContainsSubstring("minimal workable d_b = 2"));
  DegreeConfig ok{LibraryMode::parity, 2, 1, 6, 3, std::nullopt};
  REQUIRE_THROWS_AS(assemble_identity(lor, build_library(lor, ok), ok, Rat(0)),
                    std::invalid_argument);
}

TEST_CASE("flatten matches the residual polynomial row by row") {
  std::mt19937_64 rng(41);
  SystemSpec lor = lorenz_rescaled();
  DegreeConfig cfg{LibraryMode::parity, 1, 1, 4, 2, std::nullopt};
  SosIdentity id = assemble_identity(lor, build_library(lor, cfg), cfg, Rat(5896));
  LinearCertificateSystem lcs = flatten(id);
  REQUIRE(lcs.A.cols() == id.layout.total());
  REQUIRE(lcs.A.rows() == lcs.row_monomials.size() + 1);
  REQUIRE(lcs.c_vec.back() == 1);

  for (int rep = 0; rep < 5; ++rep) {
    std::vector<Rat> y = random_y(id.layout, rng);
    std::vector<Rat> Ay = lcs.A.multiply(y);
    Polynomial res = residual_polynomial(id, y);
    for (std::size_t k = 0; k < lcs.row_monomials.size(); ++k)
      REQUIRE(Ay[k] == res.coefficient(lcs.row_monomials[k]));
    // no residual monomial escapes the tracked rows
    std::size_t nonzero = 0;
    for (const auto& [m, coef] : res.terms()) {
      (void)coef;
      REQUIRE(std::binary_search(lcs.row_monomials.begin(), lcs.row_monomials.end(), m));
      ++nonzero;
    }
    REQUIRE(nonzero > 0);
    REQUIRE(Ay.back() == trace_of(id, y));
  }
}

TEST_CASE("restricted identity keeps the selected basis elements") {
  SystemSpec hh = henon_heiles();
  DegreeConfig cfg = DegreeConfig::lie_span_preset(2);
  ObservableLibrary lib = build_library(hh, cfg);
  SosIdentity id = assemble_identity(hh, lib, cfg, Rat(485));
  std::vector<std::size_t> ge = {0, 2, 4}, go = {1, 3}, a, be = {0, 1, 2}, bo = {0}, cb = {0, 5};
  for (std::size_t k = 0; k < 10; ++k) a.push_back(k * 2);
  SosIdentity small = id.restricted(ge, go, a, be, bo, cb);
  REQUIRE(small.library.g_even.size() == 3);
  REQUIRE(small.library.g_odd.size() == 2);
  REQUIRE(small.a.size() == 10);
  REQUIRE(small.b_e.size() == 3);
  REQUIRE(small.b_o.size() == 1);
  REQUIRE(small.c_basis.size() == 2);
  REQUIRE(small.layout.total() == 6 + 3 + 6 + 1 + 10 + 2);
  REQUIRE(small.library.g_even[1] == id.library.g_even[2]);
  REQUIRE(small.a[3] == id.a[6]);
}

TEST_CASE("feasibility verdicts across C for Lorenz d_g=1") {
  SystemSpec lor = lorenz_rescaled();
  DegreeConfig cfg{LibraryMode::parity, 1, 1, 4, 2, std::nullopt};
  ObservableLibrary lib = build_library(lor, cfg);

  auto solve_at = [&](const Rat& C) {
    SosIdentity id = assemble_identity(lor, lib, cfg, C);
    return solve_feasibility(flatten(id), id.layout);
  };

  FloatSolution ok = solve_at(Rat(5896));
  REQUIRE(ok.solver_status == SolverStatus::feasible);
  REQUIRE(std::isfinite(ok.min_block_eigenvalue_estimate));
  REQUIRE(ok.max_residual < 1e-6);
  REQUIRE(ok.y_float.size() == 52);

  // monotonicity: feasible at C stays feasible at larger C
  REQUIRE(solve_at(Rat(2 * 5896)).solver_status == SolverStatus::feasible);
  REQUIRE(solve_at(Rat(1000000000)).solver_status == SolverStatus::feasible);

  FloatSolution bad = solve_at(Rat(1));
  REQUIRE(bad.solver_status != SolverStatus::feasible);
}
