// Command line front end: search for a validated period bound, verify a
// certificate file offline, hunt for short orbits with a certificate's
// residual, or print the closed-form Lorenz certificate check.
//
// Exit codes: 0 validated/pass, 2 search exhausted without validation,
// 3 verification failure, 4 configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "periodbound/builtins.hpp"
#include "periodbound/orbit.hpp"

using namespace periodbound;

namespace {

constexpr int kExitValidated = 0;
constexpr int kExitSearchExhausted = 2;
constexpr int kExitVerifyFailure = 3;
constexpr int kExitConfigError = 4;

SystemSpec system_by_name(const std::string& name) {
  if (name == "lorenz_rescaled") return lorenz_rescaled();
  if (name == "henon_heiles") return henon_heiles();
  throw std::invalid_argument("unknown built-in system '" + name +
                              "' (available: lorenz_rescaled, henon_heiles)");
}

/// Plain declarative run config. System choice is either `system: <builtin>`
/// or an inline system block (variables/equation/... keys) in the same file.
struct RunConfig {
  std::optional<SystemSpec> system;
  std::optional<std::string> mode;
  std::map<std::string, std::string> values;  // remaining scalar keys
};

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  static const std::map<std::string, int> kSystemKeys = {
      {"name", 0},       {"variables", 0}, {"equation", 0},
      {"symmetry", 0},   {"time_scale", 0}, {"constraint", 0},
      {"parameter", 0}};
  static const std::map<std::string, int> kScalarKeys = {
      {"mode", 0},        {"d_g", 0},   {"d_w", 0},          {"d_a", 0},
      {"d_b", 0},         {"d_rho", 0}, {"c_hi", 0},         {"c_lo", 0},
      {"rel_tol", 0},     {"max_iter", 0}, {"prune_threshold", 0}, {"prune_rounds", 0},
      {"seed", 0},        {"out", 0},   {"section_var", 0},  {"section_value", 0},
      {"starts", 0},      {"box", 0},   {"system", 0}};

  RunConfig cfg;
  std::string line, system_block;
  std::optional<std::string> builtin;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    auto first = body.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto colon = body.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key: value'");
    std::string key = body.substr(first, colon - first);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = body.substr(colon + 1);
    auto vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r'))
      value.pop_back();
    if (key == "system") {
      builtin = value;
    } else if (kSystemKeys.count(key)) {
      system_block += key + ": " + value + "\n";
    } else if (kScalarKeys.count(key)) {
      cfg.values[key] = value;
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
    }
  }
  if (builtin && !system_block.empty())
    throw std::invalid_argument("config mixes 'system: <builtin>' with an inline system block");
  if (builtin)
    cfg.system = system_by_name(*builtin);
  else if (!system_block.empty())
    cfg.system = parse_system_config(system_block);
  if (cfg.values.count("mode")) cfg.mode = cfg.values["mode"];
  return cfg;
}

struct BoundArgs {
  std::string config_path, system_name, mode = "parity", out_path;
  unsigned dg = 0, dw = 0, da = 0, db = 0, drho = 0;
  std::string c_hi, c_lo;
  double rel_tol = 1e-4;
  int max_iter = 60;
  double prune_threshold = 1e-7;
  int prune_rounds = 5;
};

int run_bound(const BoundArgs& args, const CLI::App* cmd) {
  RunConfig file;
  if (!args.config_path.empty()) file = load_run_config(args.config_path);
  auto from_file = [&](const char* key) -> std::optional<std::string> {
    auto it = file.values.find(key);
    if (it == file.values.end()) return std::nullopt;
    return it->second;
  };
  auto pick = [&](const char* flag, const char* key, auto flag_val, auto parse,
                  auto fallback) {
    if (cmd->count(flag)) return flag_val;
    if (auto v = from_file(key)) return parse(*v);
    return fallback;
  };

  SystemSpec system = [&] {
    if (cmd->count("--system")) return system_by_name(args.system_name);
    if (file.system) return *file.system;
    throw std::invalid_argument("no system given (use --system or a config file)");
  }();

  std::string mode = cmd->count("--mode") ? args.mode : file.mode.value_or("parity");
  DegreeConfig degrees;
  auto as_u32 = [](const std::string& s) { return static_cast<std::uint32_t>(std::stoul(s)); };
  if (mode == "parity") {
    if (cmd->count("--dw") || from_file("d_w"))
      throw std::invalid_argument("parity mode takes --dg, not --dw");
    degrees.mode = LibraryMode::parity;
    degrees.d_g = pick("--dg", "d_g", args.dg, as_u32, 1u);
    degrees.d_a = pick("--da", "d_a", args.da, as_u32, 2u * degrees.d_g + 2);
    degrees.d_b = pick("--db", "d_b", args.db, as_u32, degrees.d_g + 1);
  } else if (mode == "lie_span") {
    if (cmd->count("--dg") || from_file("d_g"))
      throw std::invalid_argument("lie_span mode takes --dw, not --dg");
    degrees = DegreeConfig::lie_span_preset(pick("--dw", "d_w", args.dw, as_u32, 2u));
    if (cmd->count("--da") || from_file("d_a")) degrees.d_a = pick("--da", "d_a", args.da, as_u32, degrees.d_a);
    if (cmd->count("--db") || from_file("d_b")) degrees.d_b = pick("--db", "d_b", args.db, as_u32, degrees.d_b);
  } else {
    throw std::invalid_argument("mode must be 'parity' or 'lie_span'");
  }
  if (cmd->count("--drho") || from_file("d_rho"))
    degrees.d_rho = pick("--drho", "d_rho", args.drho, as_u32, 0u);
  if (degrees.d_rho && !system.constraint)
    throw std::invalid_argument("d_rho given but the system has no constraint polynomial");

  SearchConfig search;
  auto as_rat = [](const std::string& s) { return parse_rat(s); };
  auto as_dbl = [](const std::string& s) { return std::stod(s); };
  auto as_int = [](const std::string& s) { return std::stoi(s); };
  if (cmd->count("--c-hi"))
    search.C_hi = parse_rat(args.c_hi);
  else if (auto v = from_file("c_hi"))
    search.C_hi = parse_rat(*v);
  else
    throw std::invalid_argument("no --c-hi given");
  search.C_lo = pick("--c-lo", "c_lo", cmd->count("--c-lo") ? parse_rat(args.c_lo) : Rat(1),
                     as_rat, Rat(1));
  search.rel_tol = pick("--rel-tol", "rel_tol", args.rel_tol, as_dbl, 1e-4);
  search.max_iter = pick("--max-iter", "max_iter", args.max_iter, as_int, 60);
  search.prune_threshold =
      pick("--prune-threshold", "prune_threshold", args.prune_threshold, as_dbl, 1e-7);
  search.prune_rounds = pick("--prune-rounds", "prune_rounds", args.prune_rounds, as_int, 5);
  search.validate();

  std::string out =
      cmd->count("--out") ? args.out_path : from_file("out").value_or(system.name + ".cert");

  ObservableLibrary library = build_library(system, degrees);
  std::cout << "system " << system.name << "  mode " << mode << "  library " << library.size()
            << " observables (" << library.g_even.size() << " even, " << library.g_odd.size()
            << " odd)\n";
  auto validator = [&](const PruneOutcome& pr) { return validate_pruned(degrees, pr); };
  auto log = [](const std::string& s) { std::cout << "  " << s << "\n" << std::flush; };

  SearchResult<RationalCertificate> result;
  try {
    result = minimize_C(system, library, degrees, search, validator, log);
  } catch (const std::runtime_error& e) {
    std::cerr << "search: " << e.what() << "\n";
    return kExitSearchExhausted;
  }

  write_certificate_file(result.certificate, out);
  ValidatedBound bound = finalize_bound(result.C_star, system.time_scale);
  std::cout << "\nvalidated  system=" << system.name << "  mode=" << mode;
  if (degrees.mode == LibraryMode::parity)
    std::cout << "  d_g=" << degrees.d_g;
  else
    std::cout << "  d_w=" << degrees.d_w;
  std::cout << "  d_a=" << degrees.d_a << "  d_b=" << degrees.d_b;
  if (degrees.d_rho) std::cout << "  d_rho=" << *degrees.d_rho;
  std::cout << "\nC = " << rat_to_string(result.C_star) << " ~ " << to_double(result.C_star)
            << "\nperiod bound >= " << bound.bound_decimal << "  (time units of the original system)"
            << "\ncertificate written to " << out << "\n";
  return kExitValidated;
}

int run_verify(const std::string& path) {
  RationalCertificate cert;
  try {
    cert = read_certificate_file(path);
  } catch (const std::exception& e) {
    std::cerr << "verify: malformed certificate: " << e.what() << "\n";
    return kExitVerifyFailure;
  }
  VerifyReport rep = verify_certificate(cert);
  auto yn = [](bool b) { return b ? "pass" : "FAIL"; };
  std::cout << "structure  " << yn(rep.structure_ok) << "\n"
            << "digest     " << yn(rep.digest_ok) << "\n"
            << "identity   " << yn(rep.identity_ok) << "\n"
            << "psd blocks " << yn(rep.psd_ok) << "\n";
  if (!rep.pass()) {
    std::cout << "verification FAILED: " << rep.detail << "\n";
    return kExitVerifyFailure;
  }
  ValidatedBound bound = finalize_bound(cert.identity.C, cert.identity.system.time_scale);
  std::cout << "verification passed\nsystem " << cert.identity.system.name << "  C = "
            << rat_to_string(cert.identity.C) << "\nperiod bound >= " << bound.bound_decimal
            << "\n";
  return kExitValidated;
}

int run_hunt(const std::string& cert_path, long section_var_flag, double section_value,
             std::size_t starts, std::uint64_t seed, double box, std::size_t top) {
  RationalCertificate cert = read_certificate_file(cert_path);
  VerifyReport rep = verify_certificate(cert);
  if (!rep.pass()) {
    std::cerr << "hunt: certificate does not verify: " << rep.detail << "\n";
    return kExitVerifyFailure;
  }
  const SystemSpec& system = cert.identity.system;
  std::size_t section_var =
      section_var_flag >= 0 ? static_cast<std::size_t>(section_var_flag) : system.n_vars - 1;

  ScanOptions opt;
  opt.n_starts = starts;
  opt.rng_seed = seed;
  opt.box = box;
  std::vector<ScanSeed> seeds =
      residual_scan(cert, system, section_var, section_value, system.constraint, opt);
  std::cout << "scan: " << seeds.size() << " distinct seeds (section x" << section_var + 1
            << " = " << section_value << ")\n";

  ValidatedBound bound = finalize_bound(cert.identity.C, system.time_scale);
  double bound_f = to_double(bound.bound_lower);
  std::vector<PeriodicOrbitCandidate> orbits;
  ShootingOptions shoot;
  shoot.surface = system.constraint;
  for (std::size_t i = 0; i < seeds.size() && orbits.size() < top; ++i) {
    try {
      orbits.push_back(
          refine_orbit(system, seeds[i].x0, seeds[i].suggested_T, shoot, system.constraint));
    } catch (const std::runtime_error&) {
      // seed did not converge to a closed orbit; report the ones that did
    }
  }
  std::sort(orbits.begin(), orbits.end(),
            [](const auto& a, const auto& b) { return a.T < b.T; });
  if (orbits.empty()) {
    std::cout << "no seed refined to a closed orbit\n";
    return kExitSearchExhausted;
  }
  double scale = to_double(system.time_scale);
  std::cout << "validated bound: T >= " << bound.bound_decimal << " (original time units)\n";
  for (const auto& o : orbits) {
    std::cout << "orbit  T = " << o.T * scale << "  closure " << o.closure_error;
    if (o.conserved_drift) std::cout << "  constraint drift " << *o.conserved_drift;
    std::cout << "  x0 = (";
    for (std::size_t i = 0; i < o.x0.size(); ++i)
      std::cout << (i ? ", " : "") << o.x0[i];
    std::cout << ")  ";
    // the bound covers orbits on the constraint surface only
    bool on_surface = true;
    if (system.constraint) {
      double c0 = orbitdetail::FloatPoly::from(*system.constraint).eval(o.x0);
      on_surface = std::abs(c0) <= 1e-6;
      if (!on_surface) std::cout << "off constraint surface (bound not applicable)";
    }
    if (on_surface)
      std::cout << (o.T * scale >= bound_f ? "respects bound" : "VIOLATES BOUND");
    std::cout << "\n";
  }
  return kExitValidated;
}

int run_analytic(const std::string& sigma, const std::string& rho, const std::string& beta) {
  AnalyticCheckResult r = analytic_lorenz_check(parse_rat(sigma), parse_rat(rho), parse_rat(beta));
  std::cout << "C = " << rat_to_string(r.C) << "\n"
            << "residual = " << r.residual.to_string() << "\n"
            << "symbolic identity " << (r.pass ? "holds exactly" : "FAILS") << "\n"
            << "period bound >= " << r.bound << "\n";
  return r.pass ? kExitValidated : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"validated lower bounds on periods of polynomial ODE systems"};
  app.require_subcommand(1);

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "search for the smallest validated C");
  bound->add_option("--config", bound_args.config_path, "run config file");
  bound->add_option("--system", bound_args.system_name, "built-in system name");
  bound->add_option("--mode", bound_args.mode, "library mode: parity | lie_span");
  bound->add_option("--dg", bound_args.dg, "library degree (parity mode)");
  bound->add_option("--dw", bound_args.dw, "seed degree (lie_span mode)");
  bound->add_option("--da", bound_args.da, "auxiliary function basis degree");
  bound->add_option("--db", bound_args.db, "SOS basis degree");
  bound->add_option("--drho", bound_args.drho, "constraint multiplier degree");
  bound->add_option("--c-hi", bound_args.c_hi, "search start (must validate)");
  bound->add_option("--c-lo", bound_args.c_lo, "search floor");
  bound->add_option("--rel-tol", bound_args.rel_tol, "bisection relative tolerance");
  bound->add_option("--max-iter", bound_args.max_iter, "bisection attempt cap");
  bound->add_option("--prune-threshold", bound_args.prune_threshold, "basis pruning threshold");
  bound->add_option("--prune-rounds", bound_args.prune_rounds, "basis pruning rounds");
  bound->add_option("--out", bound_args.out_path, "certificate output path");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "verify a certificate file offline");
  verify->add_option("file", verify_path, "certificate file")->required();

  std::string hunt_cert;
  long hunt_section_var = -1;
  double hunt_section_value = 0.0, hunt_box = 1.5;
  std::size_t hunt_starts = 64, hunt_top = 4;
  std::uint64_t hunt_seed = 1;
  auto* hunt = app.add_subcommand("hunt", "scan a certificate's residual for short orbits");
  hunt->add_option("--cert", hunt_cert, "validated certificate file")->required();
  hunt->add_option("--section-var", hunt_section_var, "1-based section coordinate (default: last)");
  hunt->add_option("--section-value", hunt_section_value, "section level");
  hunt->add_option("--starts", hunt_starts, "multistart count");
  hunt->add_option("--seed", hunt_seed, "RNG seed");
  hunt->add_option("--box", hunt_box, "sampling box half-width");
  hunt->add_option("--top", hunt_top, "seeds to refine");

  std::string an_sigma = "10", an_rho = "28", an_beta = "8/3";
  auto* analytic = app.add_subcommand("analytic", "closed-form Lorenz certificate check");
  analytic->add_option("--sigma", an_sigma, "sigma");
  analytic->add_option("--rho", an_rho, "rho");
  analytic->add_option("--beta", an_beta, "beta");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) return run_bound(bound_args, bound);
    if (verify->parsed()) return run_verify(verify_path);
    if (hunt->parsed())
      return run_hunt(hunt_cert, hunt_section_var > 0 ? hunt_section_var - 1 : -1,
                      hunt_section_value, hunt_starts, hunt_seed, hunt_box, hunt_top);
    if (analytic->parsed()) return run_analytic(an_sigma, an_rho, an_beta);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailure;
  }
  return kExitConfigError;
}
