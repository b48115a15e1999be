#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "symnum/expr.hpp"

namespace symnum {

struct ParseError : std::runtime_error {
  ParseError(std::string msg, std::size_t pos)
      : std::runtime_error(std::move(msg)), position(pos) {}
  std::size_t position;  // byte offset into the input
};

// Parses the canonical infix grammar: + - * / ^ (right associative), unary
// minus, numeric literals (integer, decimal, scientific), the imaginary unit
// i, function calls from FunctionKind, and parenthesized expressions.  The
// result is canonicalized.  Throws ParseError on malformed input, unknown
// function names, and inputs with more than one free variable.
Expr parse(std::string_view text);

// Pattern variant used by the rule table: `~name` introduces a hole (encoded
// as a symbol named "~name"), optionally guarded as `~name::guard`.  Guards
// are collected per hole name.  Multi-variable inputs are allowed.
struct ParsedPattern {
  Expr expression;
  std::map<std::string, std::vector<std::string>> guards;
};
ParsedPattern parse_pattern(std::string_view text);

}  // namespace symnum
