#include "symnum/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace symnum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct FunctionInfo {
  FunctionKind kind;
  const char* name;
};

constexpr FunctionInfo kFunctions[] = {
    {FunctionKind::Exp, "exp"},     {FunctionKind::Log, "log"},
    {FunctionKind::Sin, "sin"},     {FunctionKind::Cos, "cos"},
    {FunctionKind::Tan, "tan"},     {FunctionKind::Cot, "cot"},
    {FunctionKind::Sec, "sec"},     {FunctionKind::Csc, "csc"},
    {FunctionKind::Sinh, "sinh"},   {FunctionKind::Cosh, "cosh"},
    {FunctionKind::Tanh, "tanh"},   {FunctionKind::Coth, "coth"},
    {FunctionKind::Asin, "asin"},   {FunctionKind::Acos, "acos"},
    {FunctionKind::Atan, "atan"},   {FunctionKind::Asinh, "asinh"},
    {FunctionKind::Acosh, "acosh"}, {FunctionKind::Atanh, "atanh"},
    {FunctionKind::Sqrt, "sqrt"},
};

Complex pow_int(Complex base, long long n) {
  if (n == 0) return Complex(1.0, 0.0);
  if (base == Complex(0.0, 0.0)) {
    if (n > 0) return Complex(0.0, 0.0);
    return Complex(kInf, 0.0);
  }
  bool neg = n < 0;
  unsigned long long k = neg ? -(unsigned long long)n : (unsigned long long)n;
  Complex acc(1.0, 0.0), sq = base;
  while (k) {
    if (k & 1ull) acc *= sq;
    if (k >>= 1) sq *= sq;
  }
  return neg ? Complex(1.0, 0.0) / acc : acc;
}

bool value_is_integer(Complex v, long long* out) {
  if (v.imag() != 0.0) return false;
  double r = v.real();
  if (!std::isfinite(r) || std::fabs(r) > 9.0e15) return false;
  if (r != std::nearbyint(r)) return false;
  if (out) *out = (long long)r;
  return true;
}

std::size_t hash_mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::size_t hash_double(double d) {
  if (d == 0.0) d = 0.0;  // collapse -0.0
  std::size_t bits;
  static_assert(sizeof(bits) == sizeof(d));
  std::memcpy(&bits, &d, sizeof(d));
  return bits;
}

}  // namespace

const char* function_name(FunctionKind k) {
  for (const auto& f : kFunctions)
    if (f.kind == k) return f.name;
  return "?";
}

std::optional<FunctionKind> function_from_name(std::string_view name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return f.kind;
  return std::nullopt;
}

struct Expr::Node {
  NodeKind kind = NodeKind::Constant;
  Complex value{0.0, 0.0};
  std::string name;
  std::vector<Expr> ops;           // Sum/Product operands, Power {base, exponent}
  FunctionKind fn = FunctionKind::Exp;
  std::size_t hash = 0;
  std::size_t nodes = 1;
};

Expr make_node(Expr::Node&& n) {
  n.nodes = 1;
  for (const auto& op : n.ops) n.nodes += op.node_count();
  std::size_t h = (std::size_t)n.kind * 0x100000001b3ull + 1469598103934665603ull;
  switch (n.kind) {
    case NodeKind::Constant:
      h = hash_mix(h, hash_double(n.value.real()));
      h = hash_mix(h, hash_double(n.value.imag()));
      break;
    case NodeKind::Symbol:
      h = hash_mix(h, std::hash<std::string>{}(n.name));
      break;
    case NodeKind::Apply:
      h = hash_mix(h, (std::size_t)n.fn);
      [[fallthrough]];
    default:
      for (const auto& op : n.ops) h = hash_mix(h, op.hash());
      break;
  }
  n.hash = h;
  return Expr(std::make_shared<const Expr::Node>(std::move(n)));
}

Expr::Expr() { *this = constant(0.0); }

NodeKind Expr::kind() const { return n().kind; }
Complex Expr::constant_value() const { assert(kind() == NodeKind::Constant); return n().value; }
const std::string& Expr::symbol_name() const { assert(kind() == NodeKind::Symbol); return n().name; }
std::span<const Expr> Expr::operands() const { return {n().ops.data(), n().ops.size()}; }
const Expr& Expr::base() const { assert(kind() == NodeKind::Power); return n().ops[0]; }
const Expr& Expr::exponent() const { assert(kind() == NodeKind::Power); return n().ops[1]; }
FunctionKind Expr::function() const { assert(kind() == NodeKind::Apply); return n().fn; }
const Expr& Expr::argument() const { assert(kind() == NodeKind::Apply); return n().ops[0]; }

bool Expr::is_constant() const { return kind() == NodeKind::Constant; }
bool Expr::is_constant(double re_value) const {
  return is_constant() && n().value == Complex(re_value, 0.0);
}
bool Expr::is_zero() const { return is_constant(0.0); }
bool Expr::is_one() const { return is_constant(1.0); }
bool Expr::is_integer(long long* out) const {
  return is_constant() && value_is_integer(n().value, out);
}
bool Expr::is_symbol() const { return kind() == NodeKind::Symbol; }
bool Expr::is_symbol(std::string_view name) const {
  return is_symbol() && n().name == name;
}

std::size_t Expr::hash() const { return n().hash; }
std::size_t Expr::node_count() const { return n().nodes; }

int Expr::compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  auto rank = [](NodeKind k) {
    switch (k) {
      case NodeKind::Constant: return 0;
      case NodeKind::Symbol: return 1;
      case NodeKind::Power: return 2;
      case NodeKind::Apply: return 3;
      case NodeKind::Sum: return 4;
      case NodeKind::Product: return 5;
    }
    return 6;
  };
  int ra = rank(a.kind()), rb = rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case NodeKind::Constant: {
      Complex va = a.constant_value(), vb = b.constant_value();
      if (va.real() != vb.real()) return va.real() < vb.real() ? -1 : 1;
      if (va.imag() != vb.imag()) return va.imag() < vb.imag() ? -1 : 1;
      return 0;
    }
    case NodeKind::Symbol:
      return a.symbol_name().compare(b.symbol_name()) < 0   ? -1
             : a.symbol_name().compare(b.symbol_name()) > 0 ? 1
                                                            : 0;
    case NodeKind::Apply:
      if (a.function() != b.function())
        return (int)a.function() < (int)b.function() ? -1 : 1;
      return compare(a.argument(), b.argument());
    default: {
      auto oa = a.operands(), ob = b.operands();
      std::size_t k = std::min(oa.size(), ob.size());
      for (std::size_t i = 0; i < k; ++i)
        if (int c = compare(oa[i], ob[i])) return c;
      if (oa.size() != ob.size()) return oa.size() < ob.size() ? -1 : 1;
      return 0;
    }
  }
}

Expr Expr::constant(Complex v) {
  Node n;
  n.kind = NodeKind::Constant;
  if (v.real() == 0.0) v = Complex(0.0, v.imag());  // collapse -0.0
  if (v.imag() == 0.0) v = Complex(v.real(), 0.0);
  n.value = v;
  return make_node(std::move(n));
}

Expr Expr::constant(double v) { return constant(Complex(v, 0.0)); }
Expr Expr::integer(long long v) { return constant((double)v); }
Expr Expr::imaginary_unit() { return constant(Complex(0.0, 1.0)); }

Expr Expr::symbol(std::string name) {
  Node n;
  n.kind = NodeKind::Symbol;
  n.name = std::move(name);
  return make_node(std::move(n));
}

namespace {

// coefficient/core split used while collecting like terms in sums.
std::pair<Complex, Expr> term_split(const Expr& e) {
  if (e.is_constant()) return {e.constant_value(), Expr::integer(1)};
  if (e.kind() == NodeKind::Product && e.operands()[0].is_constant()) {
    auto ops = e.operands();
    std::vector<Expr> rest(ops.begin() + 1, ops.end());
    return {ops[0].constant_value(), Expr::product(std::move(rest))};
  }
  return {Complex(1.0, 0.0), e};
}

}  // namespace

Expr Expr::sum(std::vector<Expr> ops) {
  std::vector<Expr> flat;
  flat.reserve(ops.size());
  for (auto& op : ops) {
    if (op.kind() == NodeKind::Sum) {
      auto inner = op.operands();
      flat.insert(flat.end(), inner.begin(), inner.end());
    } else {
      flat.push_back(std::move(op));
    }
  }
  Complex const_total(0.0, 0.0);
  std::vector<std::pair<Expr, Complex>> groups;  // core -> coefficient
  for (auto& op : flat) {
    if (op.is_constant()) {
      const_total += op.constant_value();
      continue;
    }
    auto [c, core] = term_split(op);
    bool found = false;
    for (auto& g : groups)
      if (g.first == core) {
        g.second += c;
        found = true;
        break;
      }
    if (!found) groups.emplace_back(std::move(core), c);
  }
  std::vector<Expr> out;
  out.reserve(groups.size() + 1);
  if (const_total != Complex(0.0, 0.0)) out.push_back(constant(const_total));
  for (auto& [core, c] : groups) {
    if (c == Complex(0.0, 0.0)) continue;
    if (c == Complex(1.0, 0.0))
      out.push_back(core);
    else
      out.push_back(product({constant(c), core}));
  }
  if (out.empty()) return constant(0.0);
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(),
            [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  Node n;
  n.kind = NodeKind::Sum;
  n.ops = std::move(out);
  return make_node(std::move(n));
}

Expr Expr::product(std::vector<Expr> ops) {
  std::vector<Expr> flat;
  flat.reserve(ops.size());
  for (auto& op : ops) {
    if (op.kind() == NodeKind::Product) {
      auto inner = op.operands();
      flat.insert(flat.end(), inner.begin(), inner.end());
    } else {
      flat.push_back(std::move(op));
    }
  }
  Complex const_total(1.0, 0.0);
  // base -> accumulated exponent operands; same-base powers merge exactly
  // under principal-branch semantics because b^e == exp(e*log b).
  std::vector<std::pair<Expr, std::vector<Expr>>> groups;
  for (auto& op : flat) {
    if (op.is_constant()) {
      const_total *= op.constant_value();
      continue;
    }
    Expr base = op, exp = integer(1);
    if (op.kind() == NodeKind::Power) {
      base = op.base();
      exp = op.exponent();
    }
    bool found = false;
    for (auto& g : groups)
      if (g.first == base) {
        g.second.push_back(exp);
        found = true;
        break;
      }
    if (!found) groups.push_back({base, {exp}});
  }
  if (const_total == Complex(0.0, 0.0)) return constant(0.0);
  std::vector<Expr> out;
  bool needs_repass = false;
  for (auto& [base, exps] : groups) {
    Expr e = exps.size() == 1 ? exps[0] : sum(std::move(exps));
    Expr factor = power(base, e);
    if (factor.is_one()) continue;
    if (factor.is_constant() || factor.kind() == NodeKind::Product) needs_repass = true;
    out.push_back(std::move(factor));
  }
  if (needs_repass) {
    out.push_back(constant(const_total));
    return product(std::move(out));
  }
  if (out.empty()) return constant(const_total);
  std::sort(out.begin(), out.end(),
            [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  if (const_total != Complex(1.0, 0.0)) out.insert(out.begin(), constant(const_total));
  if (out.size() == 1) return out[0];
  Node n;
  n.kind = NodeKind::Product;
  n.ops = std::move(out);
  return make_node(std::move(n));
}

Expr Expr::power(Expr base, Expr exponent) {
  if (exponent.is_zero()) return integer(1);
  if (exponent.is_one()) return base;
  if (base.is_one()) return integer(1);
  long long n = 0;
  bool int_exp = exponent.is_integer(&n);
  if (base.is_zero()) {
    if (exponent.is_constant() && exponent.constant_value().imag() == 0.0 &&
        exponent.constant_value().real() > 0.0)
      return integer(0);
    // 0^negative and friends stay symbolic; evaluation reports non-finite.
  } else if (base.is_constant() && int_exp && std::llabs(n) <= 64) {
    return constant(pow_int(base.constant_value(), n));
  }
  if (int_exp && base.kind() == NodeKind::Power)
    return power(base.base(), product({base.exponent(), integer(n)}));
  if (int_exp && base.kind() == NodeKind::Product) {
    std::vector<Expr> parts;
    for (const auto& op : base.operands()) parts.push_back(power(op, exponent));
    return product(std::move(parts));
  }
  Node node;
  node.kind = NodeKind::Power;
  node.ops = {std::move(base), std::move(exponent)};
  return make_node(std::move(node));
}

Expr Expr::apply(FunctionKind f, Expr argument) {
  if (f == FunctionKind::Sqrt) return power(std::move(argument), constant(0.5));
  if (f == FunctionKind::Exp && argument.is_zero()) return integer(1);
  if (f == FunctionKind::Log && argument.is_one()) return integer(0);
  Node n;
  n.kind = NodeKind::Apply;
  n.fn = f;
  n.ops = {std::move(argument)};
  return make_node(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) {
  return Expr::sum({a, Expr::product({Expr::integer(-1), b})});
}
Expr operator-(const Expr& a) { return Expr::product({Expr::integer(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
  return Expr::product({a, Expr::power(b, Expr::integer(-1))});
}

// ---------------------------------------------------------------------------
// printing

namespace {

bool real_as_fraction(double v, long long* num, long long* den) {
  if (!std::isfinite(v) || v == std::nearbyint(v)) return false;
  for (long long q = 2; q <= 64; ++q) {
    double p = v * (double)q;
    double pr = std::nearbyint(p);
    if (pr == 0.0) continue;
    if (std::fabs(p - pr) > 1e-12 * std::max(1.0, std::fabs(p))) continue;
    if (std::fabs(pr) > 9.0e15) continue;
    // accept only if the printed fraction reads back to the same double
    Complex check = Complex(pr, 0.0) * pow_int(Complex((double)q, 0.0), -1);
    if (check.real() == v) {
      *num = (long long)pr;
      *den = q;
      return true;
    }
  }
  return false;
}

}  // namespace

std::string format_real(double v) {
  if (v == 0.0) return "0";
  if (std::isfinite(v) && std::fabs(v) <= 9.0e15 && v == std::nearbyint(v)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", (long long)v);
    return buf;
  }
  long long p, q;
  if (real_as_fraction(v, &p, &q)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld/%lld", p, q);
    return buf;
  }
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::string print_expr(const Expr& e);

bool negative_leading(const Expr& e) {
  if (e.is_constant())
    return e.constant_value().imag() == 0.0 && e.constant_value().real() < 0.0;
  if (e.kind() == NodeKind::Product && e.operands()[0].is_constant())
    return negative_leading(e.operands()[0]);
  return false;
}

std::string print_constant(Complex v) {
  if (v.imag() == 0.0) return format_real(v.real());
  if (v.real() == 0.0) {
    if (v.imag() == 1.0) return "i";
    if (v.imag() == -1.0) return "-i";
    return format_real(v.imag()) + "*i";
  }
  std::string im = v.imag() == 1.0    ? "i"
                   : v.imag() == -1.0 ? "i"
                                      : format_real(std::fabs(v.imag())) + "*i";
  return "(" + format_real(v.real()) + (v.imag() < 0.0 ? " - " : " + ") + im + ")";
}

std::string print_power(const Expr& e) {
  const Expr& b = e.base();
  const Expr& x = e.exponent();
  if (x.is_constant(0.5)) {
    return "sqrt(" + print_expr(b) + ")";
  }
  std::string bs;
  bool paren_base = true;
  if (b.is_symbol() || b.kind() == NodeKind::Apply) paren_base = false;
  if (b.is_constant() && b.constant_value().imag() == 0.0 &&
      b.constant_value().real() > 0.0 &&
      b.constant_value().real() == std::nearbyint(b.constant_value().real()))
    paren_base = false;
  bs = paren_base ? "(" + print_expr(b) + ")" : print_expr(b);
  long long n;
  if (e.exponent().is_integer(&n)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", n);
    return bs + "^" + buf;
  }
  if (x.is_symbol()) return bs + "^" + print_expr(x);
  return bs + "^(" + print_expr(x) + ")";
}

std::string print_factor(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Sum:
      return "(" + print_expr(e) + ")";
    case NodeKind::Constant:
      return print_constant(e.constant_value());
    case NodeKind::Power:
      return print_power(e);
    default:
      return print_expr(e);
  }
}

std::string print_product(const Expr& e) {
  auto ops = e.operands();
  std::string out;
  std::size_t i = 0;
  if (ops[0].is_constant()) {
    Complex c = ops[0].constant_value();
    ++i;
    if (c == Complex(-1.0, 0.0)) {
      out = "-";
    } else if (c.imag() == 0.0) {
      out = format_real(c.real()) + "*";
    } else {
      out = print_constant(c) + "*";
    }
  }
  bool first = true;
  for (; i < ops.size(); ++i) {
    if (!first) out += "*";
    out += print_factor(ops[i]);
    first = false;
  }
  return out;
}

std::string print_sum(const Expr& e) {
  auto ops = e.operands();
  std::string out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Expr& op = ops[i];
    if (i == 0) {
      out += print_expr(op);
      continue;
    }
    if (negative_leading(op)) {
      out += " - " + print_expr(-op);
    } else {
      out += " + " + print_expr(op);
    }
  }
  return out;
}

std::string print_expr(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant:
      return print_constant(e.constant_value());
    case NodeKind::Symbol:
      return e.symbol_name();
    case NodeKind::Sum:
      return print_sum(e);
    case NodeKind::Product:
      return print_product(e);
    case NodeKind::Power:
      return print_power(e);
    case NodeKind::Apply:
      return std::string(function_name(e.function())) + "(" +
             print_expr(e.argument()) + ")";
  }
  return "?";
}

}  // namespace

std::string Expr::str() const { return print_expr(*this); }

// ---------------------------------------------------------------------------
// evaluation

bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

namespace {

Complex eval_function(FunctionKind f, Complex z) {
  switch (f) {
    case FunctionKind::Exp: return std::exp(z);
    case FunctionKind::Log: return std::log(z);
    case FunctionKind::Sin: return std::sin(z);
    case FunctionKind::Cos: return std::cos(z);
    case FunctionKind::Tan: return std::tan(z);
    case FunctionKind::Cot: return std::cos(z) / std::sin(z);
    case FunctionKind::Sec: return Complex(1.0, 0.0) / std::cos(z);
    case FunctionKind::Csc: return Complex(1.0, 0.0) / std::sin(z);
    case FunctionKind::Sinh: return std::sinh(z);
    case FunctionKind::Cosh: return std::cosh(z);
    case FunctionKind::Tanh: return std::tanh(z);
    case FunctionKind::Coth: return std::cosh(z) / std::sinh(z);
    case FunctionKind::Asin: return std::asin(z);
    case FunctionKind::Acos: return std::acos(z);
    case FunctionKind::Atan: return std::atan(z);
    case FunctionKind::Asinh: return std::asinh(z);
    case FunctionKind::Acosh: return std::acosh(z);
    case FunctionKind::Atanh: return std::atanh(z);
    case FunctionKind::Sqrt: return std::sqrt(z);
  }
  return Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
}

}  // namespace

Complex evaluate(const Expr& e, Complex point) {
  switch (e.kind()) {
    case NodeKind::Constant:
      return e.constant_value();
    case NodeKind::Symbol:
      return point;
    case NodeKind::Sum: {
      Complex acc(0.0, 0.0);
      for (const auto& op : e.operands()) acc += evaluate(op, point);
      return acc;
    }
    case NodeKind::Product: {
      Complex acc(1.0, 0.0);
      for (const auto& op : e.operands()) acc *= evaluate(op, point);
      return acc;
    }
    case NodeKind::Power: {
      Complex b = evaluate(e.base(), point);
      long long n;
      if (e.exponent().is_integer(&n)) return pow_int(b, n);
      Complex x = evaluate(e.exponent(), point);
      if (b == Complex(0.0, 0.0)) {
        if (x.real() > 0.0) return Complex(0.0, 0.0);
        return Complex(kInf, 0.0);
      }
      return std::exp(x * std::log(b));
    }
    case NodeKind::Apply:
      return eval_function(e.function(), evaluate(e.argument(), point));
  }
  return Complex(0.0, 0.0);
}

// ---------------------------------------------------------------------------
// differentiation

Expr differentiate(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case NodeKind::Constant:
      return Expr::integer(0);
    case NodeKind::Symbol:
      return e.symbol_name() == var ? Expr::integer(1) : Expr::integer(0);
    case NodeKind::Sum: {
      std::vector<Expr> parts;
      for (const auto& op : e.operands()) parts.push_back(differentiate(op, var));
      return Expr::sum(std::move(parts));
    }
    case NodeKind::Product: {
      auto ops = e.operands();
      std::vector<Expr> parts;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        std::vector<Expr> factors;
        factors.push_back(differentiate(ops[i], var));
        for (std::size_t j = 0; j < ops.size(); ++j)
          if (j != i) factors.push_back(ops[j]);
        parts.push_back(Expr::product(std::move(factors)));
      }
      return Expr::sum(std::move(parts));
    }
    case NodeKind::Power: {
      const Expr& b = e.base();
      const Expr& x = e.exponent();
      Expr db = differentiate(b, var);
      if (x.is_constant()) {
        // d/dz b^k = k b^(k-1) b' holds off the branch cut for principal powers
        Complex k = x.constant_value();
        return Expr::product({Expr::constant(k),
                              Expr::power(b, Expr::constant(k - Complex(1.0, 0.0))),
                              db});
      }
      Expr dx = differentiate(x, var);
      Expr inner = dx * Expr::apply(FunctionKind::Log, b) +
                   x * db * Expr::power(b, Expr::integer(-1));
      return e * inner;
    }
    case NodeKind::Apply: {
      const Expr& u = e.argument();
      Expr du = differentiate(u, var);
      auto P = [](const Expr& b, double k) { return Expr::power(b, Expr::constant(k)); };
      Expr one = Expr::integer(1);
      Expr u2 = Expr::power(u, Expr::integer(2));
      Expr d;
      switch (e.function()) {
        case FunctionKind::Exp: d = e; break;
        case FunctionKind::Log: d = Expr::power(u, Expr::integer(-1)); break;
        case FunctionKind::Sin: d = Expr::apply(FunctionKind::Cos, u); break;
        case FunctionKind::Cos: d = -Expr::apply(FunctionKind::Sin, u); break;
        case FunctionKind::Tan:
          d = Expr::power(Expr::apply(FunctionKind::Sec, u), Expr::integer(2));
          break;
        case FunctionKind::Cot:
          d = -Expr::power(Expr::apply(FunctionKind::Csc, u), Expr::integer(2));
          break;
        case FunctionKind::Sec:
          d = Expr::apply(FunctionKind::Sec, u) * Expr::apply(FunctionKind::Tan, u);
          break;
        case FunctionKind::Csc:
          d = -(Expr::apply(FunctionKind::Csc, u) * Expr::apply(FunctionKind::Cot, u));
          break;
        case FunctionKind::Sinh: d = Expr::apply(FunctionKind::Cosh, u); break;
        case FunctionKind::Cosh: d = Expr::apply(FunctionKind::Sinh, u); break;
        case FunctionKind::Tanh:
          d = one - Expr::power(Expr::apply(FunctionKind::Tanh, u), Expr::integer(2));
          break;
        case FunctionKind::Coth:
          d = one - Expr::power(Expr::apply(FunctionKind::Coth, u), Expr::integer(2));
          break;
        case FunctionKind::Asin: d = P(one - u2, -0.5); break;
        case FunctionKind::Acos: d = -P(one - u2, -0.5); break;
        case FunctionKind::Atan: d = Expr::power(one + u2, Expr::integer(-1)); break;
        case FunctionKind::Asinh: d = P(one + u2, -0.5); break;
        case FunctionKind::Acosh:
          // principal branch: 1/(sqrt(u-1)*sqrt(u+1)), not (u^2-1)^(-1/2)
          d = P(u - one, -0.5) * P(u + one, -0.5);
          break;
        case FunctionKind::Atanh: d = Expr::power(one - u2, Expr::integer(-1)); break;
        case FunctionKind::Sqrt: d = Expr::constant(0.5) * P(u, -0.5); break;
      }
      return du * d;
    }
  }
  return Expr::integer(0);
}

// ---------------------------------------------------------------------------
// substitution and structure helpers

Expr substitute(const Expr& e, const Expr& target, const Expr& replacement) {
  if (e == target) return replacement;
  switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Symbol:
      return e;
    case NodeKind::Sum:
    case NodeKind::Product: {
      std::vector<Expr> parts;
      for (const auto& op : e.operands())
        parts.push_back(substitute(op, target, replacement));
      return e.kind() == NodeKind::Sum ? Expr::sum(std::move(parts))
                                       : Expr::product(std::move(parts));
    }
    case NodeKind::Power:
      return Expr::power(substitute(e.base(), target, replacement),
                         substitute(e.exponent(), target, replacement));
    case NodeKind::Apply:
      return Expr::apply(e.function(),
                         substitute(e.argument(), target, replacement));
  }
  return e;
}

StrippedExpr strip_constant(const Expr& e) {
  if (e.is_zero()) throw ZeroExpression();
  switch (e.kind()) {
    case NodeKind::Constant:
      return {e.constant_value(), Expr::integer(1)};
    case NodeKind::Product: {
      auto ops = e.operands();
      if (ops[0].is_constant()) {
        std::vector<Expr> rest(ops.begin() + 1, ops.end());
        return {ops[0].constant_value(), Expr::product(std::move(rest))};
      }
      return {Complex(1.0, 0.0), e};
    }
    case NodeKind::Sum: {
      // Normalize by the coefficient of the operand with the least core, a
      // scale-invariant choice, so every member of {c*e} shares one core.
      auto ops = e.operands();
      std::size_t pick = 0;
      Expr pick_core = term_split(ops[0]).second;
      for (std::size_t i = 1; i < ops.size(); ++i) {
        Expr core = term_split(ops[i]).second;
        if (Expr::compare(core, pick_core) < 0) {
          pick = i;
          pick_core = core;
        }
      }
      Complex c = term_split(ops[pick]).first;
      if (c == Complex(1.0, 0.0)) return {c, e};
      Expr inv = Expr::constant(Complex(1.0, 0.0) / c);
      std::vector<Expr> parts;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i == pick)
          parts.push_back(pick_core);  // exactly coefficient 1
        else
          parts.push_back(inv * ops[i]);
      }
      return {c, Expr::sum(std::move(parts))};
    }
    default:
      return {Complex(1.0, 0.0), e};
  }
}

std::vector<std::string> free_symbols(const Expr& e) {
  std::set<std::string> names;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x.is_symbol()) {
      names.insert(x.symbol_name());
      return;
    }
    for (const auto& op : x.operands()) walk(op);
  };
  walk(e);
  return {names.begin(), names.end()};
}

// ---------------------------------------------------------------------------
// expansion

namespace {

constexpr std::size_t kExpandLimit = 8192;

std::vector<Expr> as_terms(const Expr& e) {
  if (e.kind() == NodeKind::Sum) {
    auto ops = e.operands();
    return {ops.begin(), ops.end()};
  }
  return {e};
}

Expr expand_impl(const Expr& e);

Expr distribute(const std::vector<Expr>& factors) {
  std::vector<Expr> terms{Expr::integer(1)};
  for (const auto& f : factors) {
    auto parts = as_terms(f);
    std::vector<Expr> next;
    next.reserve(terms.size() * parts.size());
    if (terms.size() * parts.size() > kExpandLimit)
      throw std::length_error("expansion exceeds term limit");
    for (const auto& t : terms)
      for (const auto& p : parts) next.push_back(t * p);
    terms = std::move(next);
  }
  return Expr::sum(std::move(terms));
}

Expr expand_impl(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Symbol:
      return e;
    case NodeKind::Sum: {
      std::vector<Expr> parts;
      for (const auto& op : e.operands()) parts.push_back(expand_impl(op));
      return Expr::sum(std::move(parts));
    }
    case NodeKind::Product: {
      std::vector<Expr> parts;
      bool any_sum = false;
      for (const auto& op : e.operands()) {
        Expr x = expand_impl(op);
        any_sum = any_sum || x.kind() == NodeKind::Sum;
        parts.push_back(std::move(x));
      }
      if (!any_sum) return Expr::product(std::move(parts));
      return distribute(parts);
    }
    case NodeKind::Power: {
      Expr b = expand_impl(e.base());
      long long n;
      if (e.exponent().is_integer(&n) && n >= 2 && n <= 16 &&
          b.kind() == NodeKind::Sum) {
        std::vector<Expr> factors((std::size_t)n, b);
        return distribute(factors);
      }
      return Expr::power(std::move(b), e.exponent());
    }
    case NodeKind::Apply:
      return Expr::apply(e.function(), expand_impl(e.argument()));
  }
  return e;
}

}  // namespace

Expr expand(const Expr& e) { return expand_impl(e); }

}  // namespace symnum
