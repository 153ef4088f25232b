#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "volopt/apps.hpp"
#include "volopt/feasible.hpp"
#include "volopt/poly.hpp"

namespace volopt {

// Diagnostic for malformed problem files, carrying the 1-based position.
struct VpParseError : std::runtime_error {
  VpParseError(int line, int column, const std::string& message)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line(line),
        column(column) {}
  int line;
  int column;
};

// Abstract content of a .vp problem file:
//   vars x[n] in [lo,hi]^n;  params a[m] in [-1,1]^m;
//   measure (lebesgue|uniform) on x;
//   set S1 { poly >= 0; ... }  [set S2 { ... }]
//   options { d=..; r=..; eps_a=..; eps_k=..; }
// or, instead of the set blocks, one application block
// (roa/invariant/probctrl/gsos) holding dynamics and templates.  `#` starts
// a comment; whitespace is free-form.
struct ProblemFile {
  enum class Application { None, Roa, Invariant, ProbCtrl, Gsos };

  Application app = Application::None;
  VariableBlocks blocks;  // declared x- and a-names
  std::vector<double> x_lower, x_upper;
  bool lebesgue = true;  // measure kind on the x block

  std::vector<Polynomial> s1, s2;  // None and Gsos files

  // roa / invariant payload.
  PolynomialDynamics dynamics;
  TemplateFunction tmpl;
  double level_c = 1.0;
  double eps_r = 0.001;

  // probctrl payload (mu_x0/mu_delta already populated from the boxes).
  ProbCtrlSpec probctrl;
  std::vector<std::string> delta_names;

  // gsos payload.
  Polynomial gsos_target;

  // options block.
  int d = 7;
  int r = 6;
  double eps_a = 0.05;
  double eps_k = 0.1;
  int stage1_budget = 0;

  // Assembles the volume problem via the matching application builder (or
  // directly for plain files) and stamps the hierarchy options onto it.
  VolumeProblem to_problem(int degree_cap = kDefaultDegreeCap) const;
};

// Parses problem text / a file on disk.  Throws VpParseError with
// line:column positions; unknown identifiers inside expressions are reported
// at their exact location.
ProblemFile parse_vp_text(const std::string& text);
ProblemFile parse_vp_file(const std::string& path);

// Canonical pretty-printer; parse(format_vp(parse(text))) describes the
// identical abstract problem.
std::string format_vp(const ProblemFile& file);

// Renders p over the given variable names in the shared expression syntax.
std::string format_polynomial(const Polynomial& p, const std::vector<std::string>& names);

}  // namespace volopt
