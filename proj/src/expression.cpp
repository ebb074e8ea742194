#include "specband/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>

#include "specband/common.hpp"

namespace specband {

struct Expression::Node {
  enum class Kind { Number, Variable, Unary, Binary, Call } kind;
  double value = 0;
  size_t slot = 0;
  char op = 0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const std::vector<double>& v) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Variable: return v[slot];
      case Kind::Unary: return -args[0]->eval(v);
      case Kind::Binary: {
        const double a = args[0]->eval(v), b = args[1]->eval(v);
        switch (op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/': return a / b;
          default: return std::pow(a, b);
        }
      }
      case Kind::Call: return call(v);
    }
    return 0;
  }

  double call(const std::vector<double>& v) const {
    std::vector<double> a;
    a.reserve(args.size());
    for (const auto& n : args) a.push_back(n->eval(v));
    if (fn == "sin") return std::sin(a[0]);
    if (fn == "cos") return std::cos(a[0]);
    if (fn == "tan") return std::tan(a[0]);
    if (fn == "exp") return std::exp(a[0]);
    if (fn == "log") return std::log(a[0]);
    if (fn == "sqrt") return std::sqrt(a[0]);
    if (fn == "abs") return std::abs(a[0]);
    if (fn == "tanh") return std::tanh(a[0]);
    if (fn == "sinh") return std::sinh(a[0]);
    if (fn == "cosh") return std::cosh(a[0]);
    if (fn == "min") return std::min(a[0], a[1]);
    if (fn == "max") return std::max(a[0], a[1]);
    if (fn == "pow") return std::pow(a[0], a[1]);
    // bump
    if (a[0] <= a[1] || a[0] >= a[2]) return 0.0;
    const double s = std::sin(kPi * (a[0] - a[1]) / (a[2] - a[1]));
    return s * s * s * s;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

int arity_of(const std::string& fn) {
  static const std::map<std::string, int> table = {
      {"sin", 1}, {"cos", 1},  {"tan", 1},  {"exp", 1},  {"log", 1}, {"sqrt", 1}, {"abs", 1},
      {"tanh", 1}, {"sinh", 1}, {"cosh", 1}, {"min", 2}, {"max", 2}, {"pow", 2},  {"bump", 3}};
  auto it = table.find(fn);
  return it == table.end() ? -1 : it->second;
}

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars, const std::map<std::string, double>& consts)
      : s_(s), vars_(vars), consts_(consts) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw DomainError("expression '" + s_ + "': " + why + " at position " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static NodePtr make(Kind k) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    return n;
  }
  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (eat('+')) lhs = binary('+', lhs, term());
      else if (eat('-')) lhs = binary('-', lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (eat('*')) lhs = binary('*', lhs, unary());
      else if (eat('/')) lhs = binary('/', lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (eat('-')) {
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Unary;
      n->args = {unary()};
      return n;
    }
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto base = primary();
    if (eat('^')) return binary('^', base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (eat('(')) {
        const int ar = arity_of(name);
        if (ar < 0) fail("unknown function '" + name + "'");
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::Call;
        n->fn = name;
        if (!eat(')')) {
          do n->args.push_back(expr());
          while (eat(','));
          if (!eat(')')) fail("missing ')' after arguments of " + name);
        }
        if (static_cast<int>(n->args.size()) != ar) fail(name + " expects " + std::to_string(ar) + " arguments");
        return n;
      }
      for (size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) {
          auto n = std::make_shared<Expression::Node>();
          n->kind = Kind::Variable;
          n->slot = i;
          return n;
        }
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      if (name == "pi") n->value = kPi;
      else if (auto it = consts_.find(name); it != consts_.end()) n->value = it->second;
      else fail("unknown name '" + name + "'");
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& consts_;
  size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& source, const std::vector<std::string>& variables,
                       const std::map<std::string, double>& constants)
    : source_(source), arity_(variables.size()), root_(Parser(source, variables, constants).parse()) {}

double Expression::operator()(const std::vector<double>& values) const {
  if (values.size() != arity_) throw DomainError("expression '" + source_ + "': wrong number of variables");
  return root_->eval(values);
}

std::vector<std::string> cell_variables(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  v.push_back("xt");
  return v;
}

std::vector<std::string> kernel_variables(int n) {
  auto v = cell_variables(n);
  for (int i = 1; i <= n; ++i) v.push_back("y" + std::to_string(i));
  v.push_back("yt");
  return v;
}

}  // namespace specband
