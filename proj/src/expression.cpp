#include "holab/expression.hpp"

#include <cctype>
#include <cmath>
#include <set>

namespace holab {

namespace {
enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };
}

struct Expr::Node {
  Op op;
  double value = 0.0;      // Const
  std::string name;        // Var
  std::shared_ptr<const Node> lhs, rhs;

  Node(Op o, std::shared_ptr<const Node> l, std::shared_ptr<const Node> r)
      : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
  explicit Node(double v) : op(Op::Const), value(v) {}
  explicit Node(std::string n) : op(Op::Var), name(std::move(n)) {}
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr constant_node(double v) { return std::make_shared<Expr::Node>(v); }

NodePtr make(Op op, NodePtr l, NodePtr r = nullptr) {
  return std::make_shared<Expr::Node>(op, std::move(l), std::move(r));
}

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip_ws();
    if (pos_ != src_.size())
      throw ExprError("unexpected character '" + std::string(1, src_[pos_]) +
                      "' at offset " + std::to_string(pos_));
    return e;
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr e = product();
    for (;;) {
      if (consume('+'))
        e = make(Op::Add, e, product());
      else if (consume('-'))
        e = make(Op::Sub, e, product());
      else
        return e;
    }
  }

  NodePtr product() {
    NodePtr e = unary();
    for (;;) {
      if (consume('*'))
        e = make(Op::Mul, e, unary());
      else if (consume('/'))
        e = make(Op::Div, e, unary());
      else
        return e;
    }
  }

  NodePtr unary() {
    if (consume('-')) return make(Op::Neg, unary());
    if (consume('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (consume('^')) {
      // right-associative; exponent parsed as unary to allow x^-2
      NodePtr exponent = consume('-') ? make(Op::Neg, power()) : power();
      return make(Op::Pow, base, exponent);
    }
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ExprError("unexpected end of expression");
    const char c = src_[pos_];
    if (consume('(')) {
      NodePtr e = sum();
      if (!consume(')')) throw ExprError("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ExprError("unexpected character '" + std::string(1, c) + "' at offset " +
                    std::to_string(pos_));
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
            src_[pos_] == 'e' || src_[pos_] == 'E' ||
            ((src_[pos_] == '+' || src_[pos_] == '-') && pos_ > start &&
             (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))))
      ++pos_;
    try {
      return constant_node(std::stod(src_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      throw ExprError("bad numeric literal at offset " + std::to_string(start));
    }
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (name == "pi") return constant_node(kPi);
    Op fn;
    if (name == "sin")
      fn = Op::Sin;
    else if (name == "cos")
      fn = Op::Cos;
    else if (name == "exp")
      fn = Op::Exp;
    else if (name == "sqrt")
      fn = Op::Sqrt;
    else
      return std::make_shared<Expr::Node>(std::move(name));
    if (!consume('(')) throw ExprError(name + ": expected '('");
    NodePtr arg = sum();
    if (!consume(')')) throw ExprError(name + ": missing ')'");
    return make(fn, arg);
  }
};

double eval_node(const Expr::Node& n, const Env& env) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return env.get(n.name);
    case Op::Add: return eval_node(*n.lhs, env) + eval_node(*n.rhs, env);
    case Op::Sub: return eval_node(*n.lhs, env) - eval_node(*n.rhs, env);
    case Op::Mul: return eval_node(*n.lhs, env) * eval_node(*n.rhs, env);
    case Op::Div: return eval_node(*n.lhs, env) / eval_node(*n.rhs, env);
    case Op::Pow: return std::pow(eval_node(*n.lhs, env), eval_node(*n.rhs, env));
    case Op::Neg: return -eval_node(*n.lhs, env);
    case Op::Sin: return std::sin(eval_node(*n.lhs, env));
    case Op::Cos: return std::cos(eval_node(*n.lhs, env));
    case Op::Exp: return std::exp(eval_node(*n.lhs, env));
    case Op::Sqrt: return std::sqrt(eval_node(*n.lhs, env));
  }
  throw ExprError("corrupt expression node");
}

bool is_const(const NodePtr& n, double v) {
  return n->op == Op::Const && n->value == v;
}

// Light simplification keeps derivative trees small.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return constant_node(a->value + b->value);
  return make(Op::Add, std::move(a), std::move(b));
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return constant_node(a->value - b->value);
  return make(Op::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return constant_node(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return constant_node(a->value * b->value);
  return make(Op::Mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return constant_node(0.0);
  if (is_const(b, 1.0)) return a;
  return make(Op::Div, std::move(a), std::move(b));
}

NodePtr diff_node(const NodePtr& n, const std::string& var) {
  switch (n->op) {
    case Op::Const: return constant_node(0.0);
    case Op::Var: return constant_node(n->name == var ? 1.0 : 0.0);
    case Op::Add: return add(diff_node(n->lhs, var), diff_node(n->rhs, var));
    case Op::Sub: return sub(diff_node(n->lhs, var), diff_node(n->rhs, var));
    case Op::Mul:
      return add(mul(diff_node(n->lhs, var), n->rhs), mul(n->lhs, diff_node(n->rhs, var)));
    case Op::Div:
      return div(sub(mul(diff_node(n->lhs, var), n->rhs), mul(n->lhs, diff_node(n->rhs, var))),
                 make(Op::Pow, n->rhs, constant_node(2.0)));
    case Op::Pow: {
      NodePtr exponent = n->rhs;
      if (exponent->op == Op::Neg && exponent->lhs->op == Op::Const)
        exponent = constant_node(-exponent->lhs->value);
      if (exponent->op != Op::Const)
        throw ExprError("derivative of '^' requires a numeric exponent");
      const double p = exponent->value;
      if (p == 0.0) return constant_node(0.0);
      return mul(mul(constant_node(p), make(Op::Pow, n->lhs, constant_node(p - 1.0))),
                 diff_node(n->lhs, var));
    }
    case Op::Neg: return make(Op::Neg, diff_node(n->lhs, var));
    case Op::Sin: return mul(make(Op::Cos, n->lhs), diff_node(n->lhs, var));
    case Op::Cos: return make(Op::Neg, mul(make(Op::Sin, n->lhs), diff_node(n->lhs, var)));
    case Op::Exp: return mul(make(Op::Exp, n->lhs), diff_node(n->lhs, var));
    case Op::Sqrt:
      return div(diff_node(n->lhs, var),
                 mul(constant_node(2.0), make(Op::Sqrt, n->lhs)));
  }
  throw ExprError("corrupt expression node");
}

void collect_vars(const NodePtr& n, std::set<std::string>& out) {
  if (!n) return;
  if (n->op == Op::Var) out.insert(n->name);
  collect_vars(n->lhs, out);
  collect_vars(n->rhs, out);
}

void print_node(const NodePtr& n, std::string& out) {
  switch (n->op) {
    case Op::Const: out += format_double(n->value); return;
    case Op::Var: out += n->name; return;
    case Op::Neg:
      out += "(-";
      print_node(n->lhs, out);
      out += ")";
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt: {
      out += (n->op == Op::Sin ? "sin(" : n->op == Op::Cos ? "cos(" : n->op == Op::Exp ? "exp(" : "sqrt(");
      print_node(n->lhs, out);
      out += ")";
      return;
    }
    default: {
      const char* sym = n->op == Op::Add   ? " + "
                        : n->op == Op::Sub ? " - "
                        : n->op == Op::Mul ? "*"
                        : n->op == Op::Div ? "/"
                                           : "^";
      out += "(";
      print_node(n->lhs, out);
      out += sym;
      print_node(n->rhs, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

Expr Expr::parse(const std::string& source) {
  if (source.empty()) throw ExprError("empty expression");
  return Expr(Parser(source).parse());
}

Expr Expr::constant(double v) { return Expr(constant_node(v)); }

double Expr::eval(const Env& env) const {
  if (!root_) throw ExprError("evaluating empty expression");
  return eval_node(*root_, env);
}

Expr Expr::derivative(const std::string& var) const {
  if (!root_) throw ExprError("differentiating empty expression");
  return Expr(diff_node(root_, var));
}

std::vector<std::string> Expr::variables() const {
  std::set<std::string> vars;
  collect_vars(root_, vars);
  return {vars.begin(), vars.end()};
}

std::string Expr::str() const {
  if (!root_) return "";
  std::string out;
  print_node(root_, out);
  return out;
}

}  // namespace holab
