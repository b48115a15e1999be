#pragma once

// Shared test utilities: complex comparisons, equivalence-mod-constant
// checks, finite-difference oracles, and a seeded random expression
// generator for the property suites.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "symnum/expr.hpp"
#include "symnum/numeric.hpp"

namespace testutil {

using symnum::Complex;
using symnum::Expr;

inline bool near(Complex a, Complex b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

// Probe points kept off the negative real axis and away from 0, matching the
// sampler's own guard rules.
inline std::vector<Complex> probe_points(std::uint64_t seed, std::size_t n,
                                         double radius = 1.5) {
  std::mt19937_64 rng(seed);
  std::vector<Complex> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(symnum::numeric::disk_point(rng, radius));
  return pts;
}

// f ~ g iff f/g is one nonzero constant; checked at 5 points, skipping any
// where either side is non-finite or tiny.
inline bool equivalent_mod_constant(const Expr& f, const Expr& g, std::uint64_t seed = 99,
                                    double tol = 1e-8) {
  std::mt19937_64 rng(seed);
  Complex ratio{0.0, 0.0};
  int checked = 0;
  for (int tries = 0; tries < 200 && checked < 5; ++tries) {
    Complex z = symnum::numeric::disk_point(rng, 1.2);
    Complex fv = symnum::evaluate(f, z);
    Complex gv = symnum::evaluate(g, z);
    if (!symnum::is_finite(fv) || !symnum::is_finite(gv)) continue;
    if (std::abs(gv) < 1e-8 || std::abs(fv) < 1e-8) continue;
    Complex r = fv / gv;
    if (checked == 0)
      ratio = r;
    else if (std::abs(r - ratio) > tol * (1.0 + std::abs(ratio)))
      return false;
    ++checked;
  }
  return checked == 5 && std::abs(ratio) > 1e-10;
}

template <typename Set>
inline bool contains_term(const Set& set, const Expr& e) {
  for (const auto& t : set)
    if (t == e) return true;
  return false;
}

// Membership up to a constant factor, the dedup convention candidate sets
// live under.
template <typename Set>
inline bool contains_equivalent(const Set& set, const Expr& e) {
  for (const auto& t : set)
    if (equivalent_mod_constant(t, e)) return true;
  return false;
}

// Central finite difference of e at z with real step h.
inline Complex central_difference(const Expr& e, Complex z, double h = 1e-6) {
  return (symnum::evaluate(e, z + Complex(h, 0.0)) - symnum::evaluate(e, z - Complex(h, 0.0))) /
         Complex(2.0 * h, 0.0);
}

// Random expression trees over the supported function kinds, depth-bounded.
// Leaves are the variable or small integers; division and power bases skip
// exact zeros so canonicalization cannot produce non-finite constants.
class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  Expr expression(int depth = 4) { return gen(depth); }

  std::mt19937_64& rng() { return rng_; }

  // A point where e and its derivative are finite, moderate, and locally
  // smooth (a branch jump across the FD step shows up as a value jump far
  // above the h-scale). Returns false when e is hostile everywhere.
  bool admissible_point(const Expr& e, Complex& out, double h = 1e-6) {
    Expr de = symnum::differentiate(e, "x");
    for (int tries = 0; tries < 200; ++tries) {
      Complex z = symnum::numeric::disk_point(rng_, 1.5);
      Complex fz = symnum::evaluate(e, z);
      Complex fp = symnum::evaluate(e, z + Complex(h, 0.0));
      Complex fm = symnum::evaluate(e, z - Complex(h, 0.0));
      Complex dz = symnum::evaluate(de, z);
      if (!symnum::is_finite(fz) || !symnum::is_finite(fp) || !symnum::is_finite(fm) ||
          !symnum::is_finite(dz))
        continue;
      if (std::abs(fz) > 1e3 || std::abs(dz) > 1e3) continue;
      if (std::abs(fp - fm) > 0.1 * (1.0 + std::abs(fz))) continue;  // cut crossing
      out = z;
      return true;
    }
    return false;
  }

 private:
  std::mt19937_64 rng_;

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

  Expr leaf() {
    switch (pick(5)) {
      case 0:
      case 1:
      case 2:
        return Expr::symbol("x");
      case 3:
        return Expr::integer(1 + pick(3));
      default:
        return Expr::integer(-3 + pick(7));
    }
  }

  Expr nonzero(int depth) {
    for (int tries = 0; tries < 8; ++tries) {
      Expr e = gen(depth);
      if (!e.is_zero()) return e;
    }
    return Expr::symbol("x");
  }

  Expr gen(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(10)) {
      case 0:
        return leaf();
      case 1:
        return gen(depth - 1) + gen(depth - 1);
      case 2:
        return gen(depth - 1) - gen(depth - 1);
      case 3:
      case 4:
        return gen(depth - 1) * gen(depth - 1);
      case 5:
        return gen(depth - 1) / nonzero(depth - 1);
      case 6:
        return Expr::power(nonzero(depth - 1), Expr::integer(pick(5) - 2));
      default: {
        static const symnum::FunctionKind kinds[] = {
            symnum::FunctionKind::Exp,  symnum::FunctionKind::Log,  symnum::FunctionKind::Sin,
            symnum::FunctionKind::Cos,  symnum::FunctionKind::Tan,  symnum::FunctionKind::Cot,
            symnum::FunctionKind::Sinh, symnum::FunctionKind::Cosh, symnum::FunctionKind::Tanh,
            symnum::FunctionKind::Atan, symnum::FunctionKind::Sqrt,
        };
        return Expr::apply(kinds[pick(11)], gen(depth - 1));
      }
    }
  }
};

}  // namespace testutil
