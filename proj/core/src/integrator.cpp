#include "symnum/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "symnum/rational.hpp"

namespace symnum::integrator {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

std::string variable_of(const Expr& e) {
  auto vars = free_symbols(e);
  return vars.empty() ? "x" : vars[0];
}

struct TermIntegrator {
  const IntegratorConfig& cfg;
  std::vector<AttemptRecord>& attempts;
  std::string label;

  bool timed_out() const {
    return cfg.deadline && std::chrono::steady_clock::now() > *cfg.deadline;
  }

  // One build/prune/solve/verify pass over a candidate set.
  std::optional<Expr> attempt(const Expr& f, const candidates::CandidateSet& terms,
                              std::uint64_t attempt_index, double threshold,
                              const char* phase, int generator_index, bool relaxed) {
    AttemptRecord rec;
    rec.phase = label + phase;
    rec.generator_index = generator_index;
    rec.n_candidates = terms.size();
    rec.relaxed = relaxed;
    if (terms.empty()) {
      rec.outcome = "empty";
      attempts.push_back(rec);
      return std::nullopt;
    }
    numeric::SamplerConfig scfg = cfg.sampler;
    scfg.n_points = cfg.oversample ? 2 * terms.size() : terms.size();
    scfg.rng_seed = mix_seed(cfg.sampler.rng_seed, attempt_index);
    try {
      auto points = numeric::sample_points(scfg);
      points = numeric::move_toward_poles(f, std::move(points), scfg);
      auto system = numeric::build_system(f, terms, std::move(points), scfg);
      auto pruned = numeric::prune_dependent(system, cfg.eps);
      auto solution = numeric::stlsq(pruned, cfg.lambda, threshold, cfg.max_sweeps);
      Expr y = numeric::assemble(solution, pruned.terms);
      if (verify(y, f, cfg)) {
        rec.outcome = "solved";
        rec.residual = solution.residual;
        attempts.push_back(rec);
        return y;
      }
      rec.outcome = "verify-failed";
      rec.residual = solution.residual;
    } catch (const std::exception& e) {
      rec.outcome = std::string("error: ") + e.what();
    }
    attempts.push_back(rec);
    return std::nullopt;
  }

  // Primary try plus the relaxed-threshold retry, on stable attempt indices
  // so that raising L never perturbs earlier phases.
  std::optional<Expr> attempt_pair(const Expr& f, const candidates::CandidateSet& terms,
                                   std::uint64_t base_index, const char* phase,
                                   int generator_index, double* residual) {
    for (int retry = 0; retry < 2; ++retry) {
      if (timed_out()) return std::nullopt;
      double threshold = retry ? cfg.relaxed_threshold : cfg.threshold;
      auto y = attempt(f, terms, base_index + (std::uint64_t)retry, threshold, phase,
                       generator_index, retry == 1);
      if (y) {
        if (residual) *residual = attempts.back().residual;
        return y;
      }
    }
    return std::nullopt;
  }
};

IntegrationResult integrate_term(const Expr& f, const IntegratorConfig& cfg,
                                 const std::string& label) {
  IntegrationResult result;
  TermIntegrator driver{cfg, result.attempts, label};
  std::string var = variable_of(f);
  Expr x = Expr::symbol(var);

  // constants integrate by inspection
  if (f.is_constant()) {
    result.solved = true;
    result.antiderivative = f.is_zero() ? Expr::integer(0) : f * x;
    result.n_terms = 1;
    result.attempts.push_back({label + "constant", -1, 0, false, "solved", 0.0});
    return result;
  }

  // differentiation-closure fast path; x joins the set because the closure
  // itself never contains the DC term an antiderivative may need
  if (candidates::is_exact_class(f)) {
    try {
      candidates::CandidateSet terms = candidates::closure_exact(f);
      terms.push_back(x);
      if (auto y = driver.attempt_pair(f, terms, 1, "closure", -1, &result.residual)) {
        result.solved = true;
        result.antiderivative = *y;
        return result;
      }
    } catch (const std::exception& e) {
      result.attempts.push_back({label + "closure", -1, 0, false,
                                 std::string("error: ") + e.what(), 0.0});
    }
  }

  // rational-root path
  if (auto parts = rational::split_rational(f)) {
    try {
      candidates::CandidateSet terms =
          rational::rational_candidates(parts->first, parts->second);
      if (auto y = driver.attempt_pair(f, terms, 3, "rational", -1, &result.residual)) {
        result.solved = true;
        result.antiderivative = cfg.real_form ? rational::recombine_real(*y) : *y;
        return result;
      }
    } catch (const std::exception& e) {
      result.attempts.push_back({label + "rational", -1, 0, false,
                                 std::string("error: ") + e.what(), 0.0});
    }
  }

  // generator loop
  std::optional<candidates::Generator> generator;
  try {
    generator = candidates::generator0(f, candidates::decompose(f));
  } catch (const std::exception&) {
    try {
      generator = candidates::fallback_generator(f);
    } catch (const std::exception& e) {
      result.failure_reason = std::string("no candidate generator: ") + e.what();
      return result;
    }
  }
  for (int k = 0; k < cfg.L; ++k) {
    if (driver.timed_out()) {
      result.failure_reason = "timeout";
      return result;
    }
    if (k > 0) {
      try {
        generator = candidates::next_generator(*generator, cfg.max_terms);
      } catch (const candidates::TermBudgetExceeded& e) {
        result.failure_reason = e.what();
        return result;
      }
    }
    candidates::CandidateSet terms = candidates::terms_of(*generator);
    auto y = driver.attempt_pair(f, terms, 5 + 2 * (std::uint64_t)k, "generator", k,
                                 &result.residual);
    if (y) {
      result.solved = true;
      result.antiderivative = *y;
      result.generator_index = k;
      return result;
    }
  }
  if (result.failure_reason.empty())
    result.failure_reason = driver.timed_out()
                                ? "timeout"
                                : "no candidate set produced a verified antiderivative";
  return result;
}

}  // namespace

bool verify(const Expr& y, const Expr& f, const IntegratorConfig& cfg) {
  std::string var = variable_of(f);
  Expr dy = differentiate(y, var);
  std::mt19937_64 rng(mix_seed(cfg.sampler.rng_seed, 0x76657269667965ull));
  int checked = 0;
  double radius = cfg.sampler.disk_radius;
  for (int draws = 0; draws < 60 * cfg.verify_points && checked < cfg.verify_points;
       ++draws) {
    Complex z = numeric::disk_point(rng, radius);
    Complex fz = evaluate(f, z);
    if (finite(fz) && std::abs(fz) > 1e4) {
      // too close to a pole; one reversed pole-Newton step pushes away
      Complex dfz = evaluate(differentiate(f, var), z);
      if (finite(dfz) && dfz != Complex{0.0, 0.0}) {
        Complex away = z - fz / dfz;
        if (std::abs(away) < radius) z = away;
        fz = evaluate(f, z);
      }
    }
    if (!finite(fz) || std::abs(fz) > 1e6) continue;
    Complex dyz = evaluate(dy, z);
    if (!finite(dyz)) continue;
    ++checked;
    if (std::abs(dyz - fz) / (1.0 + std::abs(fz)) >= cfg.verify_tol) return false;
  }
  return checked == cfg.verify_points;
}

IntegrationResult integrate(const Expr& f, const IntegratorConfig& cfg) {
  if (f.kind() != NodeKind::Sum) {
    IntegrationResult result = integrate_term(f, cfg, "");
    if (result.solved)
      result.n_terms = result.antiderivative->kind() == NodeKind::Sum
                           ? result.antiderivative->operands().size()
                           : 1;
    return result;
  }

  // linearity: integrate each top-level term, then re-verify the sum
  IntegrationResult total;
  std::vector<Expr> pieces;
  auto ops = f.operands();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    std::string label = "term" + std::to_string(i) + ":";
    IntegrationResult part = integrate_term(ops[i], cfg, label);
    total.attempts.insert(total.attempts.end(), part.attempts.begin(),
                          part.attempts.end());
    if (!part.solved) {
      total.failure_reason = ops[i].str() + " unsolved: " + part.failure_reason;
      return total;
    }
    pieces.push_back(*part.antiderivative);
    total.generator_index = std::max(total.generator_index, part.generator_index);
    total.residual = std::max(total.residual, part.residual);
  }
  Expr y = Expr::sum(std::move(pieces));
  if (!verify(y, f, cfg)) {
    total.failure_reason = "termwise antiderivatives failed combined verification";
    return total;
  }
  total.solved = true;
  total.antiderivative = y;
  total.n_terms = y.kind() == NodeKind::Sum ? y.operands().size() : 1;
  return total;
}

}  // namespace symnum::integrator
