#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "symnum/expr.hpp"
#include "symnum/numeric.hpp"

namespace symnum::integrator {

struct IntegratorConfig {
  int L = 2;                        // generator attempts G_0..G_{L-1}
  numeric::SamplerConfig sampler{}; // n_points is filled in per attempt
  double eps = 1e-6;                // QR prune tolerance
  double lambda = 1e-3;             // ridge weight
  double threshold = 1e-2;          // STLSQ hard threshold
  double relaxed_threshold = 1e-1;  // retry threshold after a failed verify
  int max_sweeps = 20;
  int verify_points = 7;
  double verify_tol = 1e-6;
  std::size_t max_terms = 200;
  bool oversample = false;          // rows = 2n instead of square
  bool real_form = false;           // recombine conjugate log pairs
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct AttemptRecord {
  std::string phase;      // constant | closure | rational | generator (term-prefixed)
  int generator_index = -1;
  std::size_t n_candidates = 0;
  bool relaxed = false;
  std::string outcome;    // solved | verify-failed | empty | error: ...
  double residual = 0.0;
};

struct IntegrationResult {
  bool solved = false;
  std::optional<Expr> antiderivative;
  int generator_index = -1;  // -1: solved without the generator loop
  double residual = 0.0;
  std::size_t n_terms = 0;   // top-level terms in the antiderivative
  std::string failure_reason;
  std::vector<AttemptRecord> attempts;
};

// Algorithm: top-level sums integrate termwise; per term, try the constant
// shortcut, the differentiation-closure fast path, the rational-root path,
// then generators G_0..G_{L-1}.  Every phase gets one retry with resampled
// points and the relaxed threshold.  A candidate solution is accepted only
// when verify() passes at fresh points.  Failures come back as unsolved
// results, never exceptions.
IntegrationResult integrate(const Expr& f, const IntegratorConfig& cfg);

// Max over fresh pole-avoiding points of |y'(z) - f(z)| / (1 + |f(z)|),
// compared against cfg.verify_tol.
bool verify(const Expr& y, const Expr& f, const IntegratorConfig& cfg);

}  // namespace symnum::integrator
