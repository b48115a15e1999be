#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "symnum/numeric.hpp"
#include "symnum/parse.hpp"

using namespace symnum;
using namespace symnum::numeric;
using testutil::near;

namespace {

SamplerConfig sampler(std::size_t n, double radius, std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.n_points = n;
  cfg.disk_radius = radius;
  cfg.rng_seed = seed;
  return cfg;
}

LinearSystem system_for(const Expr& f, const candidates::CandidateSet& terms,
                        std::uint64_t seed, double radius = 5.0) {
  SamplerConfig cfg = sampler(terms.size(), radius, seed);
  return build_system(f, terms, sample_points(cfg), cfg);
}

}  // namespace

TEST_CASE("sample_points respects the disk and the guard bands") {
  auto pts = sample_points(sampler(5, 2.0, 7));
  REQUIRE(pts.size() == 5);
  for (Complex z : pts) {
    CHECK(std::abs(z) < 2.0);
    CHECK(std::abs(z) > 0.2);                              // origin guard
    CHECK((z.real() >= 0.0 || std::fabs(z.imag()) >= 0.1));  // negative-axis band
  }

  // a tiny disk still produces a point, scaled guards and all
  auto tiny = sample_points(sampler(1, 1e-9, 3));
  REQUIRE(tiny.size() == 1);
  CHECK(std::abs(tiny[0]) < 1e-9);
  CHECK(std::abs(tiny[0]) > 1e-10);

  // determinism: the seed fixes the draw exactly
  auto a = sample_points(sampler(16, 5.0, 42));
  auto b = sample_points(sampler(16, 5.0, 42));
  CHECK(a == b);
  auto c = sample_points(sampler(16, 5.0, 43));
  CHECK(a != c);
}

TEST_CASE("move_toward_poles walks into a simple pole") {
  SamplerConfig cfg = sampler(1, 5.0, 0);
  std::vector<Complex> start{Complex(1.0, 0.5)};
  auto moved = move_toward_poles(parse("1/x"), start, cfg);
  REQUIRE(moved.size() == 1);
  // the flipped Newton step for 1/x is exactly -x: one capped step plus one
  // full step land on the pole at 0
  CHECK(std::abs(moved[0]) < 1e-8);
  CHECK(std::abs(moved[0]) < std::abs(start[0]));
}

TEST_CASE("move_toward_poles keeps or reverts per the |f| contract") {
  Expr f = parse("sin(x)");
  SamplerConfig cfg = sampler(20, 5.0, 11);
  cfg.pole_iterations = 3;
  auto pts = sample_points(cfg);
  auto moved = move_toward_poles(f, pts, cfg);
  REQUIRE(moved.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Complex before = evaluate(f, pts[i]);
    Complex after = evaluate(f, moved[i]);
    CHECK(is_finite(after));
    // an entire function cannot blow up under capped steps
    CHECK(std::abs(after) < 1e6);
    // a kept move must not have shrunk |f|; shrinks revert
    if (moved[i] != pts[i]) CHECK(std::abs(after) >= std::abs(before));
  }
}

TEST_CASE("move_toward_poles with zero iterations is the identity") {
  SamplerConfig cfg = sampler(8, 5.0, 5);
  cfg.pole_iterations = 0;
  auto pts = sample_points(cfg);
  CHECK(move_toward_poles(parse("1/x"), pts, cfg) == pts);
}

TEST_CASE("pole iteration contracts toward a simple pole") {
  Complex a(0.7, -0.3);
  Expr f = parse("1/(x - (0.7 - 0.3*i))");
  SamplerConfig cfg = sampler(8, 5.0, 3);
  auto pts = sample_points(cfg);

  double last_total = 0.0;
  for (Complex z : pts) last_total += std::abs(z - a);
  for (int iters = 1; iters <= 3; ++iters) {
    cfg.pole_iterations = iters;
    auto moved = move_toward_poles(f, pts, cfg);
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(std::abs(moved[i] - a) <= std::abs(pts[i] - a));  // never further
      total += std::abs(moved[i] - a);
    }
    CHECK(total < last_total);  // more iterations, strictly closer overall
    last_total = total;
  }
}

TEST_CASE("build_system evaluates candidate derivatives at the points") {
  SUBCASE("one term") {
    SamplerConfig cfg = sampler(1, 5.0, 9);
    auto sys = build_system(parse("1"), {parse("x")}, sample_points(cfg), cfg);
    REQUIRE(sys.A.rows() == 1);
    REQUIRE(sys.A.cols() == 1);
    CHECK(near(sys.A(0, 0), Complex(1, 0)));
    CHECK(near(sys.b(0), Complex(1, 0)));
  }
  SUBCASE("cosine integrates to sine") {
    auto sys = system_for(parse("cos(x)"), {parse("sin(x)"), parse("cos(x)")}, 21);
    auto sol = stlsq(sys, 1e-3, 1e-2, 20);
    REQUIRE(sol.kept_indices.size() == 1);
    CHECK(sol.kept_indices[0] == 0);
    CHECK(near(sol.q(0), Complex(1, 0), 1e-8));
  }
  SUBCASE("non-finite rows are resampled") {
    SamplerConfig cfg = sampler(2, 2.0, 13);
    std::vector<Complex> pts{Complex(0, 0), Complex(0.5, 0.5)};  // 0 is a pole of f
    auto sys = build_system(parse("1/x"), {parse("log(x)"), parse("x")}, pts, cfg);
    CHECK(sys.points[0] != Complex(0, 0));
    for (Eigen::Index i = 0; i < sys.A.rows(); ++i) {
      CHECK(is_finite(sys.b(i)));
      for (Eigen::Index j = 0; j < sys.A.cols(); ++j) CHECK(is_finite(sys.A(i, j)));
    }
  }
}

TEST_CASE("the worked product system solves to the two-term answer") {
  candidates::CandidateSet T{parse("x"), parse("sin(x)"), parse("cos(x)"), parse("x*sin(x)"),
                             parse("x*cos(x)")};
  auto sys = system_for(parse("x*sin(x)"), T, 42);
  auto sol = stlsq(sys, 1e-3, 1e-2, 20);
  REQUIRE(sol.kept_indices == std::vector<std::size_t>{1, 4});
  CHECK(near(sol.q(0), Complex(1, 0), 1e-8));
  CHECK(near(sol.q(1), Complex(-1, 0), 1e-8));
  CHECK(sol.residual < 1e-8);
  CHECK(assemble(sol, sys.terms) == parse("sin(x) - x*cos(x)"));
  // the full-rank system passes pruning untouched
  auto pruned = prune_dependent(sys, 1e-6);
  CHECK(pruned.terms.size() == T.size());
}

TEST_CASE("prune_dependent removes spanned columns") {
  SUBCASE("pythagorean collision") {
    // d/dx{sin^2, cos^2, x} = {2 s c, -2 s c, 1}: one trig column is the
    // other's negative
    candidates::CandidateSet T{parse("sin(x)^2"), parse("cos(x)^2"), parse("x")};
    auto sys = system_for(parse("sin(x)^2"), T, 5, 2.0);
    auto pruned = prune_dependent(sys, 1e-6);
    CHECK(pruned.terms.size() == 2);
    CHECK(testutil::contains_term(pruned.terms, parse("x")));
    CHECK(pruned.A.rows() == 2);
    CHECK(pruned.A.cols() == 2);
    // pruning is a fixpoint
    CHECK(prune_dependent(pruned, 1e-6).terms.size() == 2);
  }
  SUBCASE("equal mod constant, structurally distinct") {
    // log(x^2) and log(x) differ by the factor 2 after differentiation
    candidates::CandidateSet T{parse("log(x^2)"), parse("log(x)"), parse("x")};
    auto sys = system_for(parse("1/x"), T, 6, 2.0);
    auto pruned = prune_dependent(sys, 1e-6);
    CHECK(pruned.terms.size() == 2);
    bool kept_a_log = testutil::contains_term(pruned.terms, parse("log(x^2)")) ||
                      testutil::contains_term(pruned.terms, parse("log(x)"));
    CHECK(kept_a_log);
    // the kept columns still solve the original right hand side
    Eigen::VectorXcd q = pruned.A.colPivHouseholderQr().solve(pruned.b);
    CHECK((pruned.A * q - pruned.b).norm() / pruned.b.norm() < 1e-8);
  }
}

TEST_CASE("stlsq sparsifies, thresholds, and polishes") {
  SUBCASE("trivial exact solve") {
    LinearSystem sys;
    sys.A = Eigen::MatrixXcd(1, 1);
    sys.A(0, 0) = Complex(2, 0);
    sys.b = Eigen::VectorXcd(1);
    sys.b(0) = Complex(1, 0);
    sys.points = {Complex(0.5, 0.2)};
    sys.terms = {parse("x")};
    auto sol = stlsq(sys, 1e-3, 0.1, 20);
    REQUIRE(sol.kept_indices.size() == 1);
    CHECK(near(sol.q(0), Complex(0.5, 0), 1e-10));
    CHECK(sol.residual < 1e-12);
  }
  SUBCASE("zero right hand side") {
    LinearSystem sys;
    sys.A = Eigen::MatrixXcd::Identity(3, 3);
    sys.b = Eigen::VectorXcd::Zero(3);
    sys.points = {Complex(1, 0), Complex(0, 1), Complex(1, 1)};
    sys.terms = {parse("x"), parse("sin(x)"), parse("cos(x)")};
    auto sol = stlsq(sys, 1e-3, 1e-2, 20);
    CHECK(sol.kept_indices.empty());
    CHECK(sol.residual == 0.0);
  }
  SUBCASE("thresholding everything with a nonzero b is an error") {
    LinearSystem sys;
    sys.A = Eigen::MatrixXcd(1, 1);
    sys.A(0, 0) = Complex(1, 0);
    sys.b = Eigen::VectorXcd(1);
    sys.b(0) = Complex(5, 0);
    sys.points = {Complex(0.5, 0.2)};
    sys.terms = {parse("x")};
    CHECK_THROWS_AS(stlsq(sys, 1e-3, 10.0, 20), NoSparseSolution);
  }
  SUBCASE("every surviving coefficient clears the threshold") {
    auto sys = system_for(parse("x*sin(x)"),
                          {parse("x"), parse("sin(x)"), parse("cos(x)"), parse("x*sin(x)"),
                           parse("x*cos(x)")},
                          99);
    auto sol = stlsq(sys, 1e-3, 1e-2, 20);
    for (Eigen::Index i = 0; i < sol.q.size(); ++i) CHECK(std::abs(sol.q(i)) >= 1e-2);
    CHECK(sol.threshold == 1e-2);
  }
  SUBCASE("support restriction is a fixpoint") {
    candidates::CandidateSet T{parse("x"), parse("sin(x)"), parse("cos(x)"), parse("x*sin(x)"),
                               parse("x*cos(x)")};
    auto sys = system_for(parse("x*sin(x)"), T, 42);
    auto sol = stlsq(sys, 1e-3, 1e-2, 20);
    LinearSystem sub;
    sub.A = Eigen::MatrixXcd(sys.A.rows(), sol.kept_indices.size());
    for (std::size_t j = 0; j < sol.kept_indices.size(); ++j)
      sub.A.col(j) = sys.A.col(static_cast<Eigen::Index>(sol.kept_indices[j]));
    sub.b = sys.b;
    sub.points = sys.points;
    for (std::size_t k : sol.kept_indices) sub.terms.push_back(sys.terms[k]);
    auto again = stlsq(sub, 1e-3, 1e-2, 20);
    REQUIRE(again.kept_indices.size() == sol.kept_indices.size());
    for (Eigen::Index i = 0; i < again.q.size(); ++i) CHECK(near(again.q(i), sol.q(i), 1e-8));
  }
}

TEST_CASE("stlsq survives wide dynamic range via equilibration") {
  // at radius 5 the exp(x^2) column spans ~50 orders of magnitude across the
  // disk; the scaled solve must still pick out q = 1/2 exactly
  candidates::CandidateSet T{parse("exp(x^2)"), parse("x"), parse("sin(x)")};
  auto sys = system_for(parse("x*exp(x^2)"), T, 12);
  auto sol = stlsq(sys, 1e-3, 1e-2, 20);
  REQUIRE(sol.kept_indices == std::vector<std::size_t>{0});
  CHECK(near(sol.q(0), Complex(0.5, 0), 1e-8));
  CHECK(sol.residual < 1e-8);
}

TEST_CASE("assemble sums, snaps, and handles the empty solution") {
  SUBCASE("two-term answer") {
    SparseSolution sol;
    sol.q = Eigen::VectorXcd(2);
    sol.q(0) = Complex(1, 0);
    sol.q(1) = Complex(-1, 0);
    sol.kept_indices = {0, 1};
    CHECK(assemble(sol, {parse("sin(x)"), parse("x*cos(x)")}) == parse("sin(x) - x*cos(x)"));
  }
  SUBCASE("rational snap") {
    SparseSolution sol;
    sol.q = Eigen::VectorXcd(1);
    sol.q(0) = Complex(0.333333333333, 0.0);  // within 1e-8 of 1/3
    sol.kept_indices = {0};
    CHECK(assemble(sol, {parse("cot(x)^3")}) == parse("cot(x)^3/3"));
  }
  SUBCASE("tiny imaginary parts snap away independently") {
    SparseSolution sol;
    sol.q = Eigen::VectorXcd(1);
    sol.q(0) = Complex(0.25, 1e-12);
    sol.kept_indices = {0};
    CHECK(assemble(sol, {parse("x")}) == parse("x/4"));
  }
  SUBCASE("empty solution") {
    SparseSolution sol;
    sol.q = Eigen::VectorXcd(0);
    CHECK(assemble(sol, {}) == Expr::integer(0));
  }
}
