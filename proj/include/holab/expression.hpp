#pragma once

// Closed-whitelist expression grammar for scenario files and loop
// definitions: numbers, named variables, + - * / ^, unary minus, sin, cos,
// exp, sqrt, and the constant pi. Evaluation order is deterministic and no
// general code execution is possible. Supports symbolic differentiation with
// respect to a named variable (exponents must be numeric literals).

#include "holab/core.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace holab {

struct ExprError : Error {
  using Error::Error;
};

// Small flat environment; lookup is linear, expression arity is tiny.
struct Env {
  std::vector<std::pair<std::string, double>> values;

  void set(const std::string& name, double v) {
    for (auto& kv : values)
      if (kv.first == name) {
        kv.second = v;
        return;
      }
    values.emplace_back(name, v);
  }

  double get(const std::string& name) const {
    for (const auto& kv : values)
      if (kv.first == name) return kv.second;
    throw ExprError("unbound variable '" + name + "'");
  }
};

class Expr {
 public:
  struct Node;  // opaque AST node, defined in expression.cpp

  Expr() = default;

  static Expr parse(const std::string& source);
  static Expr constant(double v);

  bool empty() const { return root_ == nullptr; }
  double eval(const Env& env) const;
  Expr derivative(const std::string& var) const;
  std::vector<std::string> variables() const;
  std::string str() const;

 private:
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

}  // namespace holab
