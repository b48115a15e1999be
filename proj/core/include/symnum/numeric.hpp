#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "symnum/candidates.hpp"
#include "symnum/expr.hpp"

namespace symnum::numeric {

struct SamplingExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoSparseSolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplerConfig {
  std::size_t n_points = 0;
  double disk_radius = 5.0;
  int pole_iterations = 3;
  double pole_step_cap = 1.0;
  std::uint64_t rng_seed = 0;
};

// Uniform in [0,1) from the raw engine; std::uniform_real_distribution is
// implementation-defined, which would break cross-platform determinism.
double uniform01(std::mt19937_64& rng);

// Uniform on the open disk of the given radius, rejecting a small guard
// region: |z| <= radius/10, and a band along the negative real axis where
// log/sqrt branch cuts live.
Complex disk_point(std::mt19937_64& rng, double radius);

std::vector<Complex> sample_points(const SamplerConfig& cfg);

// Sign-flipped Newton steps z += f/f' pull each point toward a nearby pole
// of f.  Steps are capped at pole_step_cap, iteration stops at the last
// finite iterate, and a point whose |f| ended up smaller than it started
// reverts (it was drifting away from the poles, not toward them).
std::vector<Complex> move_toward_poles(const Expr& f, std::vector<Complex> points,
                                       const SamplerConfig& cfg);

struct LinearSystem {
  Eigen::MatrixXcd A;  // A(i,j) = theta_j'(points[i])
  Eigen::VectorXcd b;  // b(i) = f(points[i])
  std::vector<Complex> points;
  candidates::CandidateSet terms;
};

// Rows with non-finite entries are rebuilt at fresh sample points (10 tries
// per row) before the system is returned.  points.size() >= terms.size();
// extra points make an overdetermined system (oversampling).
LinearSystem build_system(const Expr& f, const candidates::CandidateSet& terms,
                          std::vector<Complex> points, const SamplerConfig& cfg);

// Drops candidate columns whose pivoted-QR R-diagonal falls below
// eps * |R_00|, along with the same-index rows to keep the system square.
LinearSystem prune_dependent(const LinearSystem& sys, double eps);

struct SparseSolution {
  Eigen::VectorXcd q;
  std::vector<std::size_t> kept_indices;  // into the system's term list
  double residual = 0.0;
  double threshold = 0.0;
};

// Sequential thresholded least squares: ridge solves alternating with hard
// thresholding of |q_j| < threshold, then a plain least-squares polish on
// the surviving support (the ridge bias would otherwise shift even exact
// solutions).  residual is ||Aq - b|| / ||b||.
SparseSolution stlsq(const LinearSystem& sys, double lambda, double threshold,
                     int max_sweeps);

// y = sum q_j theta_j with coefficients within 1e-8 of p/q (q <= 64) snapped
// to the exact rational, real and imaginary parts independently.
Expr assemble(const SparseSolution& sol, const candidates::CandidateSet& terms);

}  // namespace symnum::numeric
