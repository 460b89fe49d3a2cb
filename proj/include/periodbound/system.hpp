#pragma once

// A polynomial vector field plus the metadata the bounding pipeline needs:
// sign symmetry, time scale relative to the original system, and an optional
// conserved constraint polynomial ("= 0 on the invariant set").

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polynomial.hpp"

namespace periodbound {

struct SystemSpec {
  std::string name;
  std::size_t n_vars = 0;
  std::vector<Polynomial> f;
  std::optional<SignSymmetry> symmetry;
  Rat time_scale = Rat(1);
  std::optional<Polynomial> constraint;
  std::map<std::string, Rat> parameters;

  const SignSymmetry& symmetry_or_trivial() const {
    static thread_local SignSymmetry trivial_cache;
    if (symmetry) return *symmetry;
    trivial_cache = SignSymmetry::trivial(n_vars);
    return trivial_cache;
  }

  /// f is equivariant iff every component has the parity of its variable.
  bool is_equivariant() const {
    if (!symmetry) return true;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i].is_zero()) continue;
      int p = f[i].parity_under(*symmetry);
      if (p != symmetry->signs[i]) return false;
    }
    return true;
  }

  /// The constraint polynomial is conserved iff L_f(constraint) = 0 exactly.
  bool constraint_conserved() const {
    if (!constraint) return true;
    return lie_derivative(*constraint, f).is_zero();
  }

  void validate() const {
    if (n_vars == 0) throw std::invalid_argument("system has no variables");
    if (f.size() != n_vars) throw std::invalid_argument("system needs one equation per variable");
    for (const auto& p : f)
      if (p.n_vars() != n_vars) throw std::invalid_argument("equation variable count mismatch");
    if (symmetry && symmetry->signs.size() != n_vars)
      throw std::invalid_argument("symmetry sign count mismatch");
    if (time_scale <= 0) throw std::invalid_argument("time_scale must be positive");
    if (constraint && constraint->is_zero())
      throw std::invalid_argument("constraint polynomial must not be identically zero");
    if (!is_equivariant())
      throw std::invalid_argument("vector field is not equivariant under the declared symmetry");
  }
};

/// Parses the declarative system block:
///   variables: x1 x2 x3
///   equation: 60*x2 - 60*x1            (one per variable, in order)
///   symmetry: - - +                    (optional)
///   time_scale: 6                      (optional, default 1)
///   constraint: 6 - 21*x1^2 ...        (optional)
///   parameter: sigma = 10              (repeatable)
/// '#' starts a comment; unknown keys are errors.
inline SystemSpec parse_system_config(const std::string& text) {
  SystemSpec spec;
  spec.name = "user";
  std::vector<std::string> equations;
  std::optional<std::string> symmetry_line, constraint_line;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) fail("expected 'key: value'");
    std::string key = line.substr(first, colon - first);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = line.substr(colon + 1);
    auto vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r'))
      value.pop_back();
    if (key == "name") {
      spec.name = value;
    } else if (key == "variables") {
      std::istringstream vars(value);
      std::string v;
      std::size_t count = 0;
      while (vars >> v) {
        ++count;
        if (v != "x" + std::to_string(count)) fail("variables must be named x1, x2, ... in order");
      }
      if (count == 0) fail("no variables listed");
      spec.n_vars = count;
    } else if (key == "equation") {
      equations.push_back(value);
    } else if (key == "symmetry") {
      symmetry_line = value;
    } else if (key == "time_scale") {
      spec.time_scale = parse_rat(value);
    } else if (key == "constraint") {
      constraint_line = value;
    } else if (key == "parameter") {
      auto eq = value.find('=');
      if (eq == std::string::npos) fail("parameter needs 'name = value'");
      std::string pname = value.substr(0, eq);
      while (!pname.empty() && (pname.back() == ' ' || pname.back() == '\t')) pname.pop_back();
      spec.parameters[pname] = parse_rat(value.substr(eq + 1));
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (spec.n_vars == 0) throw std::invalid_argument("config missing 'variables'");
  if (equations.size() != spec.n_vars)
    throw std::invalid_argument("config needs exactly one 'equation' per variable");
  for (const auto& e : equations) spec.f.push_back(parse_polynomial(e, spec.n_vars));
  if (symmetry_line) {
    std::istringstream ss(*symmetry_line);
    std::string tok;
    std::vector<int> signs;
    while (ss >> tok) {
      if (tok == "+" || tok == "+1")
        signs.push_back(1);
      else if (tok == "-" || tok == "-1")
        signs.push_back(-1);
      else
        throw std::invalid_argument("symmetry signs must be + or -");
    }
    spec.symmetry = SignSymmetry(std::move(signs));
  }
  if (constraint_line) spec.constraint = parse_polynomial(*constraint_line, spec.n_vars);
  spec.validate();
  return spec;
}

/// Inverse of parse_system_config: parse(format(s)) reproduces s exactly.
inline std::string format_system_config(const SystemSpec& spec) {
  std::ostringstream os;
  os << "name: " << spec.name << "\n";
  os << "variables:";
  for (std::size_t i = 1; i <= spec.n_vars; ++i) os << " x" << i;
  os << "\n";
  for (const auto& p : spec.f) os << "equation: " << p.to_string() << "\n";
  if (spec.symmetry) {
    os << "symmetry:";
    for (int s : spec.symmetry->signs) os << " " << (s > 0 ? "+" : "-");
    os << "\n";
  }
  if (spec.time_scale != 1) os << "time_scale: " << rat_to_string(spec.time_scale) << "\n";
  if (spec.constraint) os << "constraint: " << spec.constraint->to_string() << "\n";
  for (const auto& [k, v] : spec.parameters) os << "parameter: " << k << " = " << rat_to_string(v) << "\n";
  return os.str();
}

}  // namespace periodbound
