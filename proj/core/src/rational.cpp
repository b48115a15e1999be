#include "symnum/rational.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace symnum::rational {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Complex horner(const std::vector<Complex>& coeffs, Complex z) {
  Complex acc{0.0, 0.0};
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
  return acc;
}

std::vector<Complex> derivative_coeffs(const std::vector<Complex>& coeffs) {
  std::vector<Complex> d;
  for (std::size_t k = 1; k < coeffs.size(); ++k) d.push_back((double)k * coeffs[k]);
  return d;
}

std::vector<Expr> product_parts(const Expr& e) {
  if (e.kind() == NodeKind::Product) {
    auto ops = e.operands();
    return std::vector<Expr>(ops.begin(), ops.end());
  }
  return {e};
}

}  // namespace

PolyRoots poly_roots(const std::vector<Complex>& coefficients) {
  std::vector<Complex> coeffs = coefficients;
  while (!coeffs.empty() && coeffs.back() == Complex{0.0, 0.0}) coeffs.pop_back();
  if (coeffs.size() < 2) throw DegreeZero("polynomial has no roots to find");
  const std::size_t degree = coeffs.size() - 1;

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero((Eigen::Index)degree,
                                                      (Eigen::Index)degree);
  for (std::size_t i = 1; i < degree; ++i)
    companion((Eigen::Index)i, (Eigen::Index)(i - 1)) = 1.0;
  for (std::size_t i = 0; i < degree; ++i)
    companion((Eigen::Index)i, (Eigen::Index)(degree - 1)) =
        -coeffs[i] / coeffs[degree];

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion);
  std::vector<Complex> raw;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    raw.push_back(solver.eigenvalues()(i));

  // polish: a couple of guarded Newton steps per root
  std::vector<Complex> dcoeffs = derivative_coeffs(coeffs);
  for (Complex& r : raw) {
    for (int iter = 0; iter < 3; ++iter) {
      Complex p = horner(coeffs, r);
      Complex dp = horner(dcoeffs, r);
      if (dp == Complex{0.0, 0.0}) break;
      Complex next = r - p / dp;
      if (!finite(next) || std::abs(horner(coeffs, next)) >= std::abs(p)) break;
      r = next;
    }
  }

  std::sort(raw.begin(), raw.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  PolyRoots out;
  out.degree = (int)degree;
  for (Complex r : raw) {
    if (!out.roots.empty()) {
      Complex prev = out.roots.back().first;
      double scale = std::max({1.0, std::abs(prev), std::abs(r)});
      if (std::abs(prev - r) <= 1e-6 * scale) {
        // running centroid of the cluster
        auto& [loc, mult] = out.roots.back();
        loc = (loc * (double)mult + r) / (double)(mult + 1);
        ++mult;
        continue;
      }
    }
    out.roots.emplace_back(r, 1);
  }
  return out;
}

std::optional<std::vector<Complex>> poly_coefficients(const Expr& e,
                                                      const std::string& var) {
  Expr expanded = Expr::integer(0);
  try {
    expanded = expand(e);
  } catch (const std::length_error&) {
    return std::nullopt;
  }
  std::vector<Expr> terms;
  if (expanded.kind() == NodeKind::Sum) {
    auto ops = expanded.operands();
    terms.assign(ops.begin(), ops.end());
  } else {
    terms.push_back(expanded);
  }

  std::vector<Complex> coeffs;
  auto bump = [&coeffs](std::size_t deg, Complex c) {
    if (coeffs.size() <= deg) coeffs.resize(deg + 1, Complex{0.0, 0.0});
    coeffs[deg] += c;
  };
  for (const Expr& term : terms) {
    Complex c{1.0, 0.0};
    long long deg = 0;
    for (const Expr& factor : product_parts(term)) {
      long long k = 0;
      if (factor.is_constant()) {
        c *= factor.constant_value();
      } else if (factor.is_symbol(var)) {
        deg += 1;
      } else if (factor.kind() == NodeKind::Power && factor.base().is_symbol(var) &&
                 factor.exponent().is_integer(&k) && k >= 1) {
        deg += k;
      } else {
        return std::nullopt;
      }
      if (deg > 64) return std::nullopt;  // past any sane corpus polynomial
    }
    bump((std::size_t)deg, c);
  }
  while (coeffs.size() > 1 && coeffs.back() == Complex{0.0, 0.0}) coeffs.pop_back();
  if (coeffs.empty()) coeffs.push_back(Complex{0.0, 0.0});
  return coeffs;
}

std::optional<std::pair<Expr, Expr>> split_rational(const Expr& f) {
  auto vars = free_symbols(f);
  std::string var = vars.empty() ? "x" : vars[0];
  std::vector<Expr> num_parts, den_parts;
  for (const Expr& part : product_parts(f)) {
    long long k = 0;
    if (part.kind() == NodeKind::Power && part.exponent().is_integer(&k) && k <= -1)
      den_parts.push_back(Expr::power(part.base(), Expr::integer(-k)));
    else
      num_parts.push_back(part);
  }
  Expr num = Expr::product(std::move(num_parts));
  Expr den = Expr::product(std::move(den_parts));
  if (!poly_coefficients(num, var) || !poly_coefficients(den, var)) return std::nullopt;
  return std::make_pair(num, den);
}

candidates::CandidateSet rational_candidates(const Expr& num, const Expr& den) {
  auto vars = free_symbols(num * den);
  std::string var = vars.empty() ? "x" : vars[0];
  Expr x = Expr::symbol(var);

  auto den_coeffs = poly_coefficients(den, var);
  if (!den_coeffs)
    throw NotPolynomialDenominator(den.str() + " is not polynomial in " + var);
  auto num_coeffs = poly_coefficients(num, var);

  candidates::CandidateSet set;
  long long den_degree = (long long)den_coeffs->size() - 1;
  if (den_degree >= 1) {
    PolyRoots roots = poly_roots(*den_coeffs);
    for (const auto& [root, multiplicity] : roots.roots) {
      Expr shifted = x + Expr::constant(-root);
      set.push_back(Expr::apply(FunctionKind::Log, shifted));
      for (int k = 1; k < multiplicity; ++k)
        set.push_back(Expr::power(shifted, Expr::integer(-k)));
    }
  }
  if (num_coeffs) {
    long long num_degree = (long long)num_coeffs->size() - 1;
    if (num_degree >= den_degree)
      for (long long k = 1; k <= num_degree - den_degree + 1; ++k)
        set.push_back(Expr::power(x, Expr::integer(k)));
  }
  return set;
}

Expr recombine_real(const Expr& y) {
  struct LogTerm {
    Complex coeff;
    Complex root;
    bool used = false;
  };
  std::vector<LogTerm> logs;
  std::vector<Expr> passthrough;

  auto classify = [&](const Expr& term) {
    Complex coeff{1.0, 0.0};
    Expr body = term;
    if (term.kind() == NodeKind::Product) {
      auto ops = term.operands();
      if (ops.size() == 2 && ops[0].is_constant()) {
        coeff = ops[0].constant_value();
        body = ops[1];
      }
    }
    if (body.kind() == NodeKind::Apply && body.function() == FunctionKind::Log) {
      Expr arg = body.argument();
      if (arg.kind() == NodeKind::Sum) {
        auto ops = arg.operands();
        if (ops.size() == 2 && ops[0].is_constant() && ops[1].is_symbol()) {
          logs.push_back({coeff, -ops[0].constant_value(), false});
          return;
        }
      }
    }
    passthrough.push_back(term);
  };

  if (y.kind() == NodeKind::Sum)
    for (const Expr& term : y.operands()) classify(term);
  else
    classify(y);
  if (logs.empty()) return y;

  auto vars = free_symbols(y);
  Expr x = Expr::symbol(vars.empty() ? "x" : vars[0]);
  constexpr double kPairTol = 1e-8;
  std::vector<Expr> rebuilt = passthrough;

  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (logs[i].used) continue;
    if (std::fabs(logs[i].root.imag()) > kPairTol) {
      for (std::size_t j = i + 1; j < logs.size(); ++j) {
        if (logs[j].used) continue;
        if (std::abs(logs[j].root - std::conj(logs[i].root)) < kPairTol &&
            std::abs(logs[j].coeff - std::conj(logs[i].coeff)) < kPairTol) {
          logs[i].used = logs[j].used = true;
          Complex r = logs[i].root.imag() > 0 ? logs[i].root : logs[j].root;
          Complex c = logs[i].root.imag() > 0 ? logs[i].coeff : logs[j].coeff;
          double a = r.real(), b = r.imag();
          Expr quadratic = Expr::power(x, Expr::integer(2)) +
                           Expr::constant(-2.0 * a) * x +
                           Expr::constant(a * a + b * b);
          Expr angle = Expr::apply(
              FunctionKind::Atan,
              Expr::constant(1.0 / b) * (x + Expr::constant(-a)));
          rebuilt.push_back(Expr::constant(c.real()) *
                            Expr::apply(FunctionKind::Log, quadratic));
          rebuilt.push_back(Expr::constant(-2.0 * c.imag()) * angle);
          break;
        }
      }
    }
    if (!logs[i].used) {
      logs[i].used = true;
      rebuilt.push_back(Expr::constant(logs[i].coeff) *
                        Expr::apply(FunctionKind::Log, x + Expr::constant(-logs[i].root)));
    }
  }
  return Expr::sum(std::move(rebuilt));
}

}  // namespace symnum::rational
