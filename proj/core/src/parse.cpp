#include "symnum/parse.hpp"

#include <cctype>
#include <cstdlib>

namespace symnum {

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  bool pattern_mode = false;
  std::map<std::string, std::vector<std::string>>* guards = nullptr;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos); }

  void skip_ws() {
    while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  std::string identifier() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum((unsigned char)text[pos]) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected identifier");
    return std::string(text.substr(start, pos - start));
  }

  Expr number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit((unsigned char)text[pos])) ++pos;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && std::isdigit((unsigned char)text[pos])) ++pos;
    }
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && std::isdigit((unsigned char)text[pos])) {
        while (pos < text.size() && std::isdigit((unsigned char)text[pos])) ++pos;
      } else {
        pos = mark;  // 'e' starts an identifier, not an exponent
      }
    }
    std::string lit(text.substr(start, pos - start));
    return Expr::constant(std::strtod(lit.c_str(), nullptr));
  }

  Expr atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      Expr e = expression();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit((unsigned char)c) || c == '.') return number();
    if (c == '^' && pattern_mode) {
      // rule tables write powers in prefix form: ^(base, exponent)
      ++pos;
      if (!eat('(')) fail("expected '(' after '^'");
      Expr base = expression();
      if (!eat(',')) fail("expected ',' between power arguments");
      Expr exponent = expression();
      if (!eat(')')) fail("expected ')' after power arguments");
      return Expr::power(base, exponent);
    }
    if (c == '~') {
      if (!pattern_mode) fail("'~' is only valid in rule patterns");
      ++pos;
      std::string name = "~" + identifier();
      if (pos + 1 < text.size() && text[pos] == ':' && text[pos + 1] == ':') {
        pos += 2;
        std::string guard = identifier();
        (*guards)[name].push_back(guard);
      }
      return Expr::symbol(name);
    }
    if (std::isalpha((unsigned char)c) || c == '_') {
      std::string name = identifier();
      if (name == "i") return Expr::imaginary_unit();
      skip_ws();
      if (pos < text.size() && text[pos] == '(') {
        auto fn = function_from_name(name);
        if (!fn) fail("unknown function '" + name + "'");
        ++pos;
        Expr arg = expression();
        if (!eat(')')) fail("expected ')' after function argument");
        return Expr::apply(*fn, arg);
      }
      if (function_from_name(name)) fail("function '" + name + "' requires arguments");
      return Expr::symbol(name);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  // power binds tighter than unary minus on the left: -x^2 == -(x^2),
  // and the exponent itself may carry a unary minus: x^-2.
  Expr factor() {
    Expr base = atom();
    skip_ws();
    if (pos < text.size() && text[pos] == '^') {
      ++pos;
      Expr e = unary();
      return Expr::power(base, e);
    }
    return base;
  }

  Expr unary() {
    skip_ws();
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return factor();
  }

  Expr term() {
    Expr acc = unary();
    for (;;) {
      skip_ws();
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        acc = acc * unary();
      } else if (pos < text.size() && text[pos] == '/') {
        ++pos;
        acc = acc / unary();
      } else {
        return acc;
      }
    }
  }

  Expr expression() {
    Expr acc = term();
    for (;;) {
      skip_ws();
      if (pos < text.size() && text[pos] == '+') {
        ++pos;
        acc = acc + term();
      } else if (pos < text.size() && text[pos] == '-') {
        ++pos;
        acc = acc - term();
      } else {
        return acc;
      }
    }
  }

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos != text.size()) fail("unexpected trailing input");
    return e;
  }
};

}  // namespace

Expr parse(std::string_view text) {
  Parser p;
  p.text = text;
  Expr e = p.run();
  auto vars = free_symbols(e);
  if (vars.size() > 1) {
    std::string msg = "expression has more than one free variable:";
    for (const auto& v : vars) msg += " " + v;
    throw ParseError(msg, 0);
  }
  return e;
}

ParsedPattern parse_pattern(std::string_view text) {
  ParsedPattern out;
  Parser p;
  p.text = text;
  p.pattern_mode = true;
  p.guards = &out.guards;
  out.expression = p.run();
  return out;
}

}  // namespace symnum
