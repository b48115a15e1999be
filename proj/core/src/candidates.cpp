#include "symnum/candidates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "symnum/rules.hpp"

namespace symnum::candidates {

namespace {

std::vector<Expr> split_terms(const Expr& e) {
  if (e.kind() == NodeKind::Sum) {
    auto ops = e.operands();
    return std::vector<Expr>(ops.begin(), ops.end());
  }
  return {e};
}

// Core of e, or nullopt for zero / pure constants.
std::optional<Expr> core_of(const Expr& e) {
  try {
    Expr core = strip_constant(e).core;
    if (core.is_constant()) return std::nullopt;
    return core;
  } catch (const ZeroExpression&) {
    return std::nullopt;
  }
}

std::string pick_name(std::initializer_list<const char*> wanted,
                      const std::vector<std::string>& taken) {
  for (const char* name : wanted)
    if (std::find(taken.begin(), taken.end(), name) == taken.end()) return name;
  std::string name = *wanted.begin();
  while (std::find(taken.begin(), taken.end(), name) != taken.end()) name += "_";
  return name;
}

std::optional<FunctionKind> flip_partner(FunctionKind k) {
  switch (k) {
    case FunctionKind::Sin: return FunctionKind::Csc;
    case FunctionKind::Csc: return FunctionKind::Sin;
    case FunctionKind::Cos: return FunctionKind::Sec;
    case FunctionKind::Sec: return FunctionKind::Cos;
    case FunctionKind::Tan: return FunctionKind::Cot;
    case FunctionKind::Cot: return FunctionKind::Tan;
    case FunctionKind::Tanh: return FunctionKind::Coth;
    case FunctionKind::Coth: return FunctionKind::Tanh;
    default: return std::nullopt;
  }
}

Factor make_factor(const Expr& part, const Expr& slot) {
  Factor out;
  out.u = part;
  out.v = part;
  out.g_template = slot;
  switch (part.kind()) {
    case NodeKind::Symbol:
    case NodeKind::Sum:
      break;  // identity template
    case NodeKind::Apply:
      out.g_template = Expr::apply(part.function(), slot);
      out.v = part.argument();
      break;
    case NodeKind::Power: {
      Expr base = part.base();
      Expr exponent = part.exponent();
      if (!exponent.is_constant()) {
        if (!base.is_constant())
          throw UndecomposableFactor("factor " + part.str() +
                                     " varies in both base and exponent");
        out.g_template = Expr::power(base, slot);  // constant-base exponential
        out.v = exponent;
        break;
      }
      long long k = 0;
      if (base.kind() == NodeKind::Apply && exponent.is_integer(&k)) {
        Expr whole = Expr::power(Expr::apply(base.function(), slot), exponent);
        if (rules::integrate_basic(whole)) {
          out.g_template = whole;
          out.v = base.argument();
          break;
        }
        if (k >= 2) {
          out.u = base;
          out.g_template = Expr::apply(base.function(), slot);
          out.v = base.argument();
          out.n = k;
          break;
        }
        if (auto partner = flip_partner(base.function())) {
          out.u = Expr::apply(*partner, base.argument());
          out.g_template = Expr::apply(*partner, slot);
          out.v = base.argument();
          out.n = -k;
          break;
        }
      }
      out.g_template = Expr::power(slot, exponent);
      out.v = base;
      break;
    }
    default:
      throw UndecomposableFactor("factor " + part.str() + " is not templateable");
  }
  if (auto integral = rules::integrate_basic(out.g_template)) {
    out.basic_integral = core_of(*integral);
    out.usable = out.basic_integral.has_value();
  }
  return out;
}

constexpr std::array<Complex, 4> kProbes = {Complex{0.73, 0.41}, Complex{-0.52, 0.87},
                                            Complex{1.31, -0.29}, Complex{-0.95, -0.63}};
constexpr double kCollisionTol = 1e-10;

bool probes_collide(const std::array<Complex, 4>& a, const std::array<Complex, 4>& b) {
  for (std::size_t i = 0; i < kProbes.size(); ++i) {
    if (!(std::isfinite(a[i].real()) && std::isfinite(a[i].imag()) &&
          std::isfinite(b[i].real()) && std::isfinite(b[i].imag())))
      return false;  // cannot tell; keep both, QR pruning decides later
    double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    if (std::abs(a[i] - b[i]) > kCollisionTol * scale) return false;
  }
  return true;
}

}  // namespace

Factorization decompose(const Expr& f) {
  Factorization out;
  auto vars = free_symbols(f);
  out.variable = vars.empty() ? "x" : vars[0];
  out.slot = pick_name({"w", "t", "y", "w0"}, vars);
  Expr slot = Expr::symbol(out.slot);

  std::vector<Expr> parts;
  if (f.kind() == NodeKind::Product) {
    auto ops = f.operands();
    parts.assign(ops.begin(), ops.end());
  } else {
    parts.push_back(f);
  }
  for (const Expr& part : parts) {
    if (free_symbols(part).empty()) {
      out.constant *= evaluate(part, Complex{0.0, 0.0});
      continue;
    }
    out.factors.push_back(make_factor(part, slot));
  }
  return out;
}

Generator generator0(const Expr& f, const Factorization& fac) {
  Expr slot = Expr::symbol(fac.slot);
  std::vector<std::string> taken = free_symbols(f);
  taken.push_back(fac.slot);
  std::string fresh = pick_name({"s", "r", "p", "s0"}, taken);
  Expr fresh_sym = Expr::symbol(fresh);

  // Reconstructed product: flip rewrites can make u differ from the factor
  // as written in f, and df/du needs the subtree u to actually occur.
  std::vector<Expr> rebuilt;
  for (const Factor& factor : fac.factors)
    rebuilt.push_back(Expr::power(factor.u, Expr::integer(factor.n)));
  Expr fhat = Expr::product(rebuilt);

  Expr one = Expr::integer(1);
  std::vector<Expr> summands;
  for (const Factor& factor : fac.factors) {
    if (!factor.usable) continue;
    Expr integral = substitute(*factor.basic_integral, slot, factor.v);
    Expr piece_a = one;
    if (auto c = core_of(integral)) piece_a = one + *c;
    Expr dfdu = substitute(differentiate(substitute(fhat, factor.u, fresh_sym), fresh),
                           fresh_sym, factor.u);
    Expr ratio =
        Expr::power(differentiate(factor.v, fac.variable), Expr::integer(-1)) * dfdu;
    Expr piece_b = one;
    if (auto c = core_of(ratio)) piece_b = one + *c;
    summands.push_back(piece_a * piece_b);
  }
  if (summands.empty())
    throw NoUsableFactor("no factor of " + f.str() + " has a table integral");
  try {
    return Generator{0, expand(Expr::sum(std::move(summands))), fac.variable};
  } catch (const std::length_error&) {
    throw TermBudgetExceeded("generator expansion overflows the term budget");
  }
}

CandidateSet terms_of(const Generator& g) {
  CandidateSet cores;
  for (const Expr& term : split_terms(g.expression)) {
    auto core = core_of(term);
    if (!core) continue;
    if (std::find(cores.begin(), cores.end(), *core) == cores.end())
      cores.push_back(*core);
  }

  std::vector<std::array<Complex, 4>> values(cores.size());
  for (std::size_t i = 0; i < cores.size(); ++i)
    for (std::size_t p = 0; p < kProbes.size(); ++p)
      values[i][p] = evaluate(cores[i], kProbes[p]);

  CandidateSet kept;
  std::vector<std::array<Complex, 4>> kept_values;
  for (std::size_t i = 0; i < cores.size(); ++i) {
    bool duplicate = false;
    for (std::size_t j = 0; j < kept.size() && !duplicate; ++j)
      duplicate = probes_collide(values[i], kept_values[j]);
    if (duplicate) continue;
    kept.push_back(cores[i]);
    kept_values.push_back(values[i]);
  }
  return kept;
}

Generator next_generator(const Generator& g, std::size_t max_terms) {
  Expr x = Expr::symbol(g.variable);
  CandidateSet base = terms_of(g);

  std::vector<Expr> grown = base;
  auto add = [&grown](const Expr& e) {
    if (auto core = core_of(e))
      if (std::find(grown.begin(), grown.end(), *core) == grown.end())
        grown.push_back(*core);
  };

  std::vector<Expr> derivative_cores;
  for (const Expr& t : base)
    for (const Expr& dt : split_terms(differentiate(t, g.variable)))
      if (auto core = core_of(dt)) {
        add(*core);
        derivative_cores.push_back(*core);
      }
  // a constant term in G picks up the (1+x) enrichment: c*(1+x) -> {c, c*x}
  bool has_const = false;
  for (const Expr& t : split_terms(g.expression))
    if (free_symbols(t).empty()) {
      has_const = true;
      break;
    }
  if (has_const) add(x);
  for (const Expr& t : base) add(x * t);
  for (const Expr& dt : derivative_cores) add(x * dt);

  if (grown.size() > max_terms)
    throw TermBudgetExceeded("candidate set would hold " + std::to_string(grown.size()) +
                             " terms (budget " + std::to_string(max_terms) + ")");
  Expr expression = Expr::sum(std::move(grown));
  if (has_const) expression = Expr::integer(1) + expression;
  return Generator{g.index + 1, expression, g.variable};
}

Generator fallback_generator(const Expr& f) {
  auto vars = free_symbols(f);
  std::string var = vars.empty() ? "x" : vars[0];
  try {
    return Generator{0, expand(Expr::integer(1) + f), var};
  } catch (const std::length_error&) {
    throw TermBudgetExceeded("fallback generator overflows the term budget");
  }
}

bool is_exact_class(const Expr& f) {
  auto generator_apply = [](const Expr& e) {
    if (e.kind() != NodeKind::Apply || !e.argument().is_symbol()) return false;
    switch (e.function()) {
      case FunctionKind::Exp:
      case FunctionKind::Sin:
      case FunctionKind::Cos:
      case FunctionKind::Sinh:
      case FunctionKind::Cosh:
        return true;
      default:
        return false;
    }
  };
  std::vector<Expr> parts;
  if (f.kind() == NodeKind::Product) {
    auto ops = f.operands();
    parts.assign(ops.begin(), ops.end());
  } else {
    parts.push_back(f);
  }
  for (const Expr& part : parts) {
    if (part.is_constant()) continue;
    if (generator_apply(part)) continue;
    long long k = 0;
    if (part.kind() == NodeKind::Power && generator_apply(part.base()) &&
        part.exponent().is_integer(&k) && k >= 1)
      continue;
    return false;
  }
  return true;
}

CandidateSet closure_exact(const Expr& f, int max_steps) {
  if (!is_exact_class(f))
    throw NotExactClass(f.str() + " is not a product of exp/sin/cos/sinh/cosh powers");
  auto vars = free_symbols(f);
  std::string var = vars.empty() ? "x" : vars[0];

  CandidateSet closure;
  std::deque<Expr> queue;
  auto add = [&](const Expr& e) {
    auto core = core_of(e);
    if (!core) return;
    if (std::find(closure.begin(), closure.end(), *core) != closure.end()) return;
    closure.push_back(*core);
    queue.push_back(*core);
  };
  add(f);
  int steps = 0;
  while (!queue.empty()) {
    Expr t = queue.front();
    queue.pop_front();
    if (++steps > max_steps)
      throw StepLimit("differentiation closure exceeded " + std::to_string(max_steps) +
                      " steps");
    for (const Expr& dt : split_terms(differentiate(t, var))) add(dt);
  }
  return closure;
}

}  // namespace symnum::candidates
