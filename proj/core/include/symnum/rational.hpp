#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symnum/candidates.hpp"
#include "symnum/expr.hpp"

namespace symnum::rational {

struct DegreeZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotPolynomialDenominator : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PolyRoots {
  std::vector<std::pair<Complex, int>> roots;  // location, multiplicity
  int degree = 0;
};

// Roots of sum coefficients[k] x^k via companion-matrix eigenvalues with a
// Newton polish; near-equal roots (within 1e-6 relative) merge into one
// entry with multiplicity.  Throws DegreeZero when degree < 1.
PolyRoots poly_roots(const std::vector<Complex>& coefficients);

// Coefficients (low to high) of e as a polynomial in var, after expansion;
// nullopt when e is not polynomial in var.
std::optional<std::vector<Complex>> poly_coefficients(const Expr& e,
                                                      const std::string& var);

// f as numerator/denominator polynomial pair (denominator 1 for plain
// polynomials); nullopt when f is not a ratio of polynomials.
std::optional<std::pair<Expr, Expr>> split_rational(const Expr& f);

// Partial-fraction-shaped candidates: log(x - r) per root, (x - r)^-k for
// k < multiplicity, plus x..x^(deg num - deg den + 1) when the numerator
// degree reaches the denominator's.  Coefficients are the regression's job.
candidates::CandidateSet rational_candidates(const Expr& num, const Expr& den);

// Rewrites conjugate pairs c log(x-r) + conj(c) log(x-conj(r)) into
// Re(c) log(quadratic) - 2 Im(c) atan((x - Re r)/Im r); both forms share one
// derivative, so verification is unaffected.  Terms without a partner pass
// through unchanged.
Expr recombine_real(const Expr& y);

}  // namespace symnum::rational
