#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace specband {

/// Compiled arithmetic expression over named variables.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numeric
/// literals, constants `pi` and any names bound at compile time (e.g. `d`),
/// and the functions sin cos tan exp log sqrt abs tanh sinh cosh min max pow
/// and bump(x, a, b) = sin^4(pi (x-a)/(b-a)) on (a, b), 0 elsewhere.
class Expression {
 public:
  /// `variables` lists the names supplied at evaluation time, in order;
  /// `constants` are folded in at compile time.
  Expression(const std::string& source, const std::vector<std::string>& variables,
             const std::map<std::string, double>& constants = {});

  double operator()(const std::vector<double>& values) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  size_t arity_;
  std::shared_ptr<const Node> root_;
};

/// Variables a cell-field expression sees: x1..xn, xt.
std::vector<std::string> cell_variables(int n);
/// Variables a kernel expression sees: x1..xn, xt, y1..yn, yt.
std::vector<std::string> kernel_variables(int n);

}  // namespace specband
