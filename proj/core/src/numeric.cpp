#include "symnum/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace symnum::numeric {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string variable_of(const Expr& e) {
  auto vars = free_symbols(e);
  return vars.empty() ? "x" : vars[0];
}

// Rational snap for one real channel; returns the value the printer/parser
// round-trip will reproduce (p * (1/q)), or the input unchanged.
double snap_real(double v) {
  if (!std::isfinite(v)) return v;
  for (long long den = 1; den <= 64; ++den) {
    double p = std::nearbyint(v * (double)den);
    if (std::fabs(p) > 1e6) continue;
    double cand = p * (1.0 / (double)den);
    if (std::fabs(v - cand) <= 1e-8 * std::max(1.0, std::fabs(cand))) return cand;
  }
  return v;
}

// Row/column equilibration applied before the rank tests and the regression.
// Candidates that grow like exp(|z|^2) across the sampling disk give raw
// systems spanning ~50 orders of magnitude, far beyond what the normal
// equations survive in double precision.  Rows are scaled to unit right-hand
// side (a relative-error weighting) and columns to unit norm; solutions map
// back to the raw scale, and exact solutions are unaffected.
struct Equilibrated {
  Eigen::MatrixXcd A;        // R * A_raw * C
  Eigen::VectorXcd b;        // R * b_raw
  Eigen::VectorXd col_scale; // q_raw = col_scale .* q_scaled
};

Equilibrated equilibrate(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b) {
  Equilibrated eq;
  eq.A = A;
  eq.b = b;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double r = 1.0 / std::max(1.0, std::abs(b(i)));
    eq.A.row(i) *= r;
    eq.b(i) *= r;
  }
  eq.col_scale.resize(A.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    double nrm = eq.A.col(j).norm();
    if (nrm > 1e-300) {
      eq.A.col(j) /= nrm;
      eq.col_scale(j) = 1.0 / nrm;
    } else {
      eq.col_scale(j) = 1.0;  // dead column; the rank test removes it
    }
  }
  return eq;
}

}  // namespace

double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

Complex disk_point(std::mt19937_64& rng, double radius) {
  for (;;) {
    double re = (2.0 * uniform01(rng) - 1.0) * radius;
    double im = (2.0 * uniform01(rng) - 1.0) * radius;
    Complex z{re, im};
    if (std::abs(z) >= radius) continue;
    if (std::abs(z) <= 0.1 * radius) continue;
    if (re < 0.0 && std::fabs(im) < 0.05 * radius) continue;  // branch-cut band
    return z;
  }
}

std::vector<Complex> sample_points(const SamplerConfig& cfg) {
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<Complex> points;
  points.reserve(cfg.n_points);
  for (std::size_t i = 0; i < cfg.n_points; ++i)
    points.push_back(disk_point(rng, cfg.disk_radius));
  return points;
}

std::vector<Complex> move_toward_poles(const Expr& f, std::vector<Complex> points,
                                       const SamplerConfig& cfg) {
  if (cfg.pole_iterations <= 0) return points;
  Expr df = differentiate(f, variable_of(f));
  for (Complex& point : points) {
    Complex f0 = evaluate(f, point);
    if (!finite(f0)) continue;  // already effectively at a pole
    Complex cur = point;
    for (int iter = 0; iter < cfg.pole_iterations; ++iter) {
      Complex fv = evaluate(f, cur);
      Complex dv = evaluate(df, cur);
      if (!finite(fv) || !finite(dv) || dv == Complex{0.0, 0.0}) break;
      Complex step = fv / dv;
      if (!finite(step)) break;
      double len = std::abs(step);
      if (len > cfg.pole_step_cap) step *= cfg.pole_step_cap / len;
      Complex next = cur + step;
      if (!finite(evaluate(f, next))) break;  // keep the last finite iterate
      cur = next;
    }
    if (std::abs(evaluate(f, cur)) >= std::abs(f0)) point = cur;
  }
  return points;
}

LinearSystem build_system(const Expr& f, const candidates::CandidateSet& terms,
                          std::vector<Complex> points, const SamplerConfig& cfg) {
  const std::size_t n = terms.size();
  const std::size_t rows = points.size();
  std::vector<Expr> dthetas;
  dthetas.reserve(n);
  std::string var = variable_of(f);
  for (const Expr& theta : terms) dthetas.push_back(differentiate(theta, var));

  LinearSystem sys;
  sys.A.resize(rows, n);
  sys.b.resize(rows);
  std::mt19937_64 retry_rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ull);

  for (std::size_t i = 0; i < rows; ++i) {
    Complex z = points[i];
    for (int attempt = 0;; ++attempt) {
      Complex fz = evaluate(f, z);
      bool ok = finite(fz);
      std::vector<Complex> row(n);
      for (std::size_t j = 0; ok && j < n; ++j) {
        row[j] = evaluate(dthetas[j], z);
        ok = finite(row[j]);
      }
      if (ok) {
        for (std::size_t j = 0; j < n; ++j) sys.A((Eigen::Index)i, (Eigen::Index)j) = row[j];
        sys.b((Eigen::Index)i) = fz;
        points[i] = z;
        break;
      }
      if (attempt >= 10)
        throw SamplingExhausted("no finite row after 10 resamples near " +
                                format_real(z.real()) + "+" + format_real(z.imag()) + "i");
      z = disk_point(retry_rng, cfg.disk_radius);
    }
  }
  sys.points = std::move(points);
  sys.terms = terms;
  return sys;
}

LinearSystem prune_dependent(const LinearSystem& sys, double eps) {
  LinearSystem cur = sys;
  for (int pass = 0; pass < 5; ++pass) {
    if (cur.terms.empty()) throw EmptySystem("all candidate columns pruned");
    Equilibrated eq = equilibrate(cur.A, cur.b);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(eq.A);
    Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
    double top = diag.size() ? diag(0) : 0.0;
    if (top == 0.0) throw EmptySystem("system is numerically zero");
    std::vector<std::size_t> drop;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = 0; k < diag.size(); ++k)
      if (diag(k) < eps * top) drop.push_back((std::size_t)perm(k));
    if (drop.empty()) return cur;
    std::sort(drop.begin(), drop.end(), std::greater<>());
    for (std::size_t col : drop) {
      std::size_t ncols = (std::size_t)cur.A.cols();
      std::size_t nrows = (std::size_t)cur.A.rows();
      Eigen::MatrixXcd next((Eigen::Index)(nrows - 1), (Eigen::Index)(ncols - 1));
      Eigen::VectorXcd nb((Eigen::Index)(nrows - 1));
      for (std::size_t i = 0, ti = 0; i < nrows; ++i) {
        if (i == col) continue;
        for (std::size_t j = 0, tj = 0; j < ncols; ++j) {
          if (j == col) continue;
          next((Eigen::Index)ti, (Eigen::Index)tj) = cur.A((Eigen::Index)i, (Eigen::Index)j);
          ++tj;
        }
        nb((Eigen::Index)ti) = cur.b((Eigen::Index)i);
        ++ti;
      }
      cur.A = std::move(next);
      cur.b = std::move(nb);
      cur.terms.erase(cur.terms.begin() + (std::ptrdiff_t)col);
      cur.points.erase(cur.points.begin() + (std::ptrdiff_t)col);
    }
  }
  return cur;
}

SparseSolution stlsq(const LinearSystem& sys, double lambda, double threshold,
                     int max_sweeps) {
  const Eigen::Index n = sys.A.cols();
  Equilibrated eq = equilibrate(sys.A, sys.b);
  std::vector<std::size_t> active(n);
  for (Eigen::Index j = 0; j < n; ++j) active[(std::size_t)j] = (std::size_t)j;

  auto submatrix = [&](const std::vector<std::size_t>& cols) {
    Eigen::MatrixXcd sub(eq.A.rows(), (Eigen::Index)cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k)
      sub.col((Eigen::Index)k) = eq.A.col((Eigen::Index)cols[k]);
    return sub;
  };
  // thresholds act on raw-scale coefficients
  auto unscale = [&](const Eigen::VectorXcd& q, const std::vector<std::size_t>& cols) {
    Eigen::VectorXcd raw = q;
    for (std::size_t k = 0; k < cols.size(); ++k)
      raw((Eigen::Index)k) *= eq.col_scale((Eigen::Index)cols[k]);
    return raw;
  };
  auto fail_empty = [&]() -> SparseSolution {
    double bnorm = sys.b.norm();
    if (bnorm > 1e-12)
      throw NoSparseSolution("every coefficient fell below the threshold");
    SparseSolution zero;
    zero.threshold = threshold;
    return zero;  // b == 0: the empty combination is exact
  };

  // ridge + hard threshold until the support stops shrinking
  for (int sweep = 0; sweep < max_sweeps && !active.empty(); ++sweep) {
    Eigen::MatrixXcd sub = submatrix(active);
    Eigen::MatrixXcd gram = sub.adjoint() * sub;
    gram.diagonal().array() += lambda;
    Eigen::VectorXcd q = unscale(gram.ldlt().solve(sub.adjoint() * eq.b), active);
    std::vector<std::size_t> survivors;
    for (std::size_t k = 0; k < active.size(); ++k)
      if (std::abs(q((Eigen::Index)k)) >= threshold) survivors.push_back(active[k]);
    if (survivors.size() == active.size()) break;
    active = std::move(survivors);
  }
  if (active.empty()) return fail_empty();

  // plain least squares on the support; re-drop anything the polish exposes
  Eigen::VectorXcd q;
  for (;;) {
    Eigen::MatrixXcd sub = submatrix(active);
    q = unscale(sub.colPivHouseholderQr().solve(eq.b), active);
    std::vector<std::size_t> survivors;
    for (std::size_t k = 0; k < active.size(); ++k)
      if (std::abs(q((Eigen::Index)k)) >= threshold) survivors.push_back(active[k]);
    if (survivors.size() == active.size()) break;
    if (survivors.empty()) return fail_empty();
    active = std::move(survivors);
  }

  SparseSolution sol;
  sol.q = q;
  sol.kept_indices = active;
  sol.threshold = threshold;
  Eigen::VectorXcd raw_fit = Eigen::VectorXcd::Zero(sys.b.size());
  for (std::size_t k = 0; k < active.size(); ++k)
    raw_fit += q((Eigen::Index)k) * sys.A.col((Eigen::Index)active[k]);
  double bnorm = sys.b.norm();
  sol.residual = bnorm > 0.0 ? (raw_fit - sys.b).norm() / bnorm : 0.0;
  return sol;
}

Expr assemble(const SparseSolution& sol, const candidates::CandidateSet& terms) {
  std::vector<Expr> parts;
  for (std::size_t k = 0; k < sol.kept_indices.size(); ++k) {
    Complex coeff = sol.q((Eigen::Index)k);
    Complex snapped{snap_real(coeff.real()), snap_real(coeff.imag())};
    parts.push_back(Expr::constant(snapped) * terms.at(sol.kept_indices[k]));
  }
  return Expr::sum(std::move(parts));
}

}  // namespace symnum::numeric
