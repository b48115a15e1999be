#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "symnum/expr.hpp"

namespace symnum::candidates {

struct UndecomposableFactor : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoUsableFactor : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TermBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotExactClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StepLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One factor u^n of the integrand, with u = g(v).  g_template is written in
// the factorization's slot symbol; substituting v for the slot recovers u.
struct Factor {
  Expr u = Expr::integer(1);
  Expr g_template = Expr::integer(1);
  Expr v = Expr::integer(1);
  long long n = 1;
  bool usable = false;
  // Antiderivative core of g in the slot variable, from the rule table.
  std::optional<Expr> basic_integral;
};

// f == constant * prod u_i^{n_i}.
struct Factorization {
  std::vector<Factor> factors;
  Complex constant{1.0, 0.0};
  std::string variable = "x";
  std::string slot = "w";
};

// Splits f into template factors.  Throws UndecomposableFactor when a factor
// has variable structure in both base and exponent (x^x and friends); the
// caller is expected to fall back to fallback_generator.
Factorization decompose(const Expr& f);

struct Generator {
  int index = 0;
  Expr expression = Expr::integer(1);
  std::string variable = "x";
};

// Constant-stripped candidate cores in deterministic order.
using CandidateSet = std::vector<Expr>;

// G0 = sum over usable factors of (1 + core of the basic integral of g at v)
// * (1 + core of (v')^-1 * df/du), expanded.  df/du is obtained by
// substituting a fresh symbol for u in the reconstructed product,
// differentiating, and substituting back.  Both pieces keep cores only:
// stray constant multiples would otherwise let a summand collapse to zero
// (exp(-x) has (v')^-1 df/du == -1 exactly).
Generator generator0(const Expr& f, const Factorization& fac);

// G_{i+1} built termwise from (1 + x)(1 + d/dx) applied to G_i's candidate
// cores, each product re-stripped before the terms are re-summed with unit
// coefficients.  Working core-by-core keeps T_i included in T_{i+1}: summing
// raw derivatives instead can cancel terms outright (G = exp(-x) makes
// G + G' == 1).  Throws TermBudgetExceeded past max_terms.
Generator next_generator(const Generator& g, std::size_t max_terms = 200);

// Last-resort generator when decompose/generator0 fail: G0 = 1 + f, whose
// next_generator chain enumerates repeated derivatives of f enriched by x.
Generator fallback_generator(const Expr& f);

// Top-level sum split, constants stripped and dropped, structural dedup,
// then a numeric collision pass (equal values at 4 fixed probe points merge).
CandidateSet terms_of(const Generator& g);

// Membership in the closed-under-differentiation class: products of
// nonnegative integer powers of exp, sin, cos, sinh, cosh, all with a bare
// symbol argument (constant multiples allowed).
bool is_exact_class(const Expr& f);

// Differentiation closure of f's core: repeatedly differentiate, split sums,
// strip constants, insert new cores, until stable.  Throws NotExactClass on
// membership failure; StepLimit is defensive and unreachable for class
// members (the per-family degrees are differentiation invariants, so the
// closure is finite).
CandidateSet closure_exact(const Expr& f, int max_steps = 10000);

}  // namespace symnum::candidates
