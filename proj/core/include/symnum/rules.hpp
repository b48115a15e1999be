#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symnum/expr.hpp"

namespace symnum::rules {

// Hole bindings produced by a successful match, keyed by hole name ("~x").
using Bindings = std::map<std::string, Expr>;

// A pattern is an expression template whose symbols starting with '~' are
// holes.  Guards restrict what a hole may bind: is_const, is_int, is_neg
// (negative real constant), is_sym (a plain symbol).
struct Pattern {
  Expr templ = Expr::integer(0);
  std::map<std::string, std::vector<std::string>> guards;

  static Pattern from_text(std::string_view text);
};

bool check_guard(std::string_view guard, const Expr& bound);

// Structural match of `e` against the pattern.  A hole matches any subtree
// satisfying its guards; a repeated hole must bind identical subtrees.
std::optional<Bindings> match(const Pattern& pattern, const Expr& e);

// Replace every hole in `templ` with its binding, rebuilding through the
// canonicalizing factories.  Throws std::out_of_range on an unbound hole.
Expr instantiate(const Expr& templ, const Bindings& bindings);

struct Rule {
  Pattern lhs;          // integrand pattern (the integrate(...) wrapper stripped)
  Expr rhs = Expr::integer(0);
  bool recurse = false; // rhs is a new integrand to feed back through the table
  std::string source;   // original line, kept for diagnostics
};

class RuleTable {
 public:
  // Parses the rule DSL: one `integrate(lhs) => rhs` per line, '#' comments.
  // Throws std::runtime_error naming the offending line on malformed input.
  static RuleTable from_text(std::string_view text);

  // Table compiled into the library at build time.
  static const RuleTable& builtin();

  std::size_t size() const { return rules_.size(); }
  const Rule& rule(std::size_t i) const { return rules_.at(i); }

  // First matching rule wins.  Recursive right hand sides re-enter the table
  // with a fresh integrand; `depth` bounds that chain.
  std::optional<Expr> lookup(const Expr& integrand, int depth = 4) const;

 private:
  std::vector<Rule> rules_;
};

// Antiderivative of g in the lone variable it mentions, up to a constant
// factor, using the builtin table only.  nullopt when no rule applies.
std::optional<Expr> integrate_basic(const Expr& g);

}  // namespace symnum::rules
