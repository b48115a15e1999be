#include "symnum/rules.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>

#include "symnum/parse.hpp"
#include "symnum/rules_data.hpp"

namespace symnum::rules {

namespace {

constexpr std::array<std::string_view, 4> kKnownGuards = {"is_const", "is_int",
                                                          "is_neg", "is_sym"};

bool is_hole(const Expr& e) {
  return e.kind() == NodeKind::Symbol && e.symbol_name().rfind('~', 0) == 0;
}

bool match_impl(const Pattern& p, const Expr& pat, const Expr& e, Bindings& b) {
  if (is_hole(pat)) {
    const std::string& name = pat.symbol_name();
    if (auto it = b.find(name); it != b.end()) return it->second == e;
    if (auto git = p.guards.find(name); git != p.guards.end())
      for (const auto& g : git->second)
        if (!check_guard(g, e)) return false;
    b.emplace(name, e);
    return true;
  }
  if (pat.kind() != e.kind()) return false;
  switch (pat.kind()) {
    case NodeKind::Constant:
      return pat.constant_value() == e.constant_value();
    case NodeKind::Symbol:
      return pat.symbol_name() == e.symbol_name();
    case NodeKind::Power:
      return match_impl(p, pat.base(), e.base(), b) &&
             match_impl(p, pat.exponent(), e.exponent(), b);
    case NodeKind::Apply:
      return pat.function() == e.function() &&
             match_impl(p, pat.argument(), e.argument(), b);
    case NodeKind::Sum:
    case NodeKind::Product: {
      auto po = pat.operands();
      auto eo = e.operands();
      if (po.size() != eo.size()) return false;
      for (std::size_t i = 0; i < po.size(); ++i)
        if (!match_impl(p, po[i], eo[i], b)) return false;
      return true;
    }
  }
  return false;
}

std::string trim(std::string_view s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  std::size_t z = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, z - a + 1));
}

// "integrate(<inner>)" -> "<inner>", anything else -> nullopt
std::optional<std::string> unwrap_integrate(const std::string& s) {
  constexpr std::string_view kPrefix = "integrate(";
  if (s.rfind(kPrefix, 0) != 0 || s.empty() || s.back() != ')') return std::nullopt;
  return s.substr(kPrefix.size(), s.size() - kPrefix.size() - 1);
}

}  // namespace

bool check_guard(std::string_view guard, const Expr& bound) {
  if (guard == "is_const") return bound.kind() == NodeKind::Constant;
  if (guard == "is_sym") return bound.kind() == NodeKind::Symbol && !is_hole(bound);
  if (guard == "is_int") {
    long long n;
    return bound.is_integer(&n);
  }
  if (guard == "is_neg") {
    if (bound.kind() != NodeKind::Constant) return false;
    Complex v = bound.constant_value();
    return v.imag() == 0.0 && v.real() < 0.0;
  }
  throw std::runtime_error("unknown guard '" + std::string(guard) + "'");
}

Pattern Pattern::from_text(std::string_view text) {
  ParsedPattern parsed = parse_pattern(text);
  return Pattern{parsed.expression, std::move(parsed.guards)};
}

std::optional<Bindings> match(const Pattern& pattern, const Expr& e) {
  Bindings b;
  if (!match_impl(pattern, pattern.templ, e, b)) return std::nullopt;
  return b;
}

Expr instantiate(const Expr& templ, const Bindings& bindings) {
  switch (templ.kind()) {
    case NodeKind::Constant:
      return templ;
    case NodeKind::Symbol:
      if (is_hole(templ)) return bindings.at(templ.symbol_name());
      return templ;
    case NodeKind::Power:
      return Expr::power(instantiate(templ.base(), bindings),
                         instantiate(templ.exponent(), bindings));
    case NodeKind::Apply:
      return Expr::apply(templ.function(), instantiate(templ.argument(), bindings));
    case NodeKind::Sum:
    case NodeKind::Product: {
      std::vector<Expr> ops;
      ops.reserve(templ.operands().size());
      for (const Expr& op : templ.operands()) ops.push_back(instantiate(op, bindings));
      return templ.kind() == NodeKind::Sum ? Expr::sum(std::move(ops))
                                           : Expr::product(std::move(ops));
    }
  }
  throw std::logic_error("instantiate: unhandled node kind");
}

RuleTable RuleTable::from_text(std::string_view text) {
  RuleTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fail = [&](const std::string& why) -> void {
      throw std::runtime_error("rule table line " + std::to_string(lineno) + ": " + why);
    };
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto arrow = body.find("=>");
    if (arrow == std::string::npos) fail("missing '=>'");
    std::string lhs = trim(body.substr(0, arrow));
    std::string rhs = trim(body.substr(arrow + 2));
    auto inner = unwrap_integrate(lhs);
    if (!inner) fail("left hand side must be integrate(...)");
    if (rhs.empty()) fail("empty right hand side");
    Rule rule;
    rule.source = body;
    try {
      rule.lhs = Pattern::from_text(*inner);
      if (auto recursive = unwrap_integrate(rhs)) {
        rule.recurse = true;
        rule.rhs = parse_pattern(*recursive).expression;
      } else {
        rule.rhs = parse_pattern(rhs).expression;
      }
    } catch (const ParseError& e) {
      fail(e.what());
    }
    for (const auto& [hole, guards] : rule.lhs.guards)
      for (const auto& g : guards)
        if (std::find(kKnownGuards.begin(), kKnownGuards.end(), g) == kKnownGuards.end())
          fail("unknown guard '" + g + "' on " + hole);
    table.rules_.push_back(std::move(rule));
  }
  return table;
}

const RuleTable& RuleTable::builtin() {
  static const RuleTable table = RuleTable::from_text(detail::builtin_rules_text);
  return table;
}

std::optional<Expr> RuleTable::lookup(const Expr& integrand, int depth) const {
  if (depth <= 0) return std::nullopt;
  for (const Rule& rule : rules_) {
    auto bindings = match(rule.lhs, integrand);
    if (!bindings) continue;
    Expr result = instantiate(rule.rhs, *bindings);
    if (rule.recurse) return lookup(result, depth - 1);
    return result;
  }
  return std::nullopt;
}

std::optional<Expr> integrate_basic(const Expr& g) {
  return RuleTable::builtin().lookup(g);
}

}  // namespace symnum::rules
