#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace symnum {

using Complex = std::complex<double>;

// Elementary functions with a total differentiation rule and complex
// evaluation on the principal branch.  sqrt is accepted by the parser but
// normalizes to a half-integer power at construction.
enum class FunctionKind {
  Exp, Log,
  Sin, Cos, Tan, Cot, Sec, Csc,
  Sinh, Cosh, Tanh, Coth,
  Asin, Acos, Atan, Asinh, Acosh, Atanh,
  Sqrt,
};

const char* function_name(FunctionKind k);
std::optional<FunctionKind> function_from_name(std::string_view name);

enum class NodeKind { Constant, Symbol, Sum, Product, Power, Apply };

// Immutable expression tree.  Construction canonicalizes: sums/products are
// flattened and sorted under a fixed total order, constants are folded and
// like factors/terms combined, so structurally equal values compare equal.
class Expr {
public:
  Expr();  // the constant 0

  static Expr constant(Complex v);
  static Expr constant(double v);
  static Expr integer(long long v);
  static Expr imaginary_unit();
  static Expr symbol(std::string name);
  static Expr sum(std::vector<Expr> ops);
  static Expr product(std::vector<Expr> ops);
  static Expr power(Expr base, Expr exponent);
  static Expr apply(FunctionKind f, Expr argument);

  NodeKind kind() const;

  // Accessors; each asserts the matching kind.
  Complex constant_value() const;
  const std::string& symbol_name() const;
  std::span<const Expr> operands() const;  // Sum, Product
  const Expr& base() const;                // Power
  const Expr& exponent() const;            // Power
  FunctionKind function() const;           // Apply
  const Expr& argument() const;            // Apply

  bool is_constant() const;
  bool is_constant(double re_value) const;
  bool is_zero() const;
  bool is_one() const;
  // True when the node is a constant whose value is a real integer.
  bool is_integer(long long* out = nullptr) const;
  bool is_symbol() const;
  bool is_symbol(std::string_view name) const;

  std::size_t hash() const;
  // Total order: Constant < Symbol < Power < Apply < Sum < Product, ties
  // broken by content.  Returns <0, 0, >0.
  static int compare(const Expr& a, const Expr& b);
  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }

  // Canonical infix form; parse(str()) reproduces the expression.
  std::string str() const;

  std::size_t node_count() const;

private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  const Node& n() const { return *node_; }
  std::shared_ptr<const Node> node_;

  friend Expr make_node(Node&&);
};

// Convenience arithmetic (canonicalizing).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);

// d/d(var).  Total on all expression kinds.
Expr differentiate(const Expr& e, const std::string& var);

// Numeric evaluation at a complex point; every free symbol is bound to
// `point` (expressions are univariate by contract).  Singularities and
// branch-point blowups surface as non-finite components, never as throws.
Complex evaluate(const Expr& e, Complex point);
bool is_finite(Complex z);

// Replaces every structural occurrence of `target` (which may be any
// sub-expression, not just a symbol) and re-canonicalizes bottom-up.
Expr substitute(const Expr& e, const Expr& target, const Expr& replacement);

// Splits e into coefficient * core where the core is canonical for the whole
// equivalence class {c*e : c != 0}.  strip_constant(core).coefficient == 1.
struct StrippedExpr {
  Complex coefficient;
  Expr core;
};
StrippedExpr strip_constant(const Expr& e);  // throws ZeroExpression on e == 0

struct ZeroExpression : std::runtime_error {
  ZeroExpression() : std::runtime_error("cannot strip the constant of the zero expression") {}
};

std::vector<std::string> free_symbols(const Expr& e);

// Distributes products over sums and expands positive integer powers of
// sums, recursively.  Leaves non-integer and negative powers opaque.
Expr expand(const Expr& e);

// Shortest round-trip decimal / small-rational rendering used by str().
std::string format_real(double v);

}  // namespace symnum
