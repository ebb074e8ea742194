#include <doctest.h>

#include <cmath>

#include "specband/common.hpp"
#include "specband/expression.hpp"

using namespace specband;

namespace {

double eval(const std::string& s, std::vector<double> v = {}, std::map<std::string, double> c = {}) {
  std::vector<std::string> names;
  for (size_t i = 0; i < v.size(); ++i) names.push_back("x" + std::to_string(i + 1));
  return Expression(s, names, c)(v);
}

}  // namespace

TEST_CASE("arithmetic and precedence") {
  CHECK(eval("1 + 2 * 3") == 7);
  CHECK(eval("(1 + 2) * 3") == 9);
  CHECK(eval("2 ^ 3 ^ 2") == 512);
  CHECK(eval("-2 ^ 2") == -4);
  CHECK(eval("8 / 4 / 2") == 1);
  CHECK(eval("1e-3 * 2.5E2") == doctest::Approx(0.25));
  CHECK(eval("x1 * x2 - x1", {3, 4}) == 9);
}

TEST_CASE("functions and constants") {
  CHECK(eval("cos(pi)") == doctest::Approx(-1).epsilon(1e-15));
  CHECK(eval("pow(2, 10) + max(1, 3) - min(1, 3)") == 1026);
  CHECK(eval("sqrt(abs(-16)) + exp(log(2))") == doctest::Approx(6));
  CHECK(eval("tanh(0) + sinh(0) + cosh(0) + tan(0) + sin(0)") == 1);
  CHECK(eval("a * d", {}, {{"a", 2}, {"d", 1.5}}) == 3);
}

TEST_CASE("bump") {
  CHECK(eval("bump(x1, 0.1, 0.9)", {0.5}) == doctest::Approx(1.0));
  CHECK(eval("bump(x1, 0.1, 0.9)", {0.1}) == 0.0);
  CHECK(eval("bump(x1, 0.1, 0.9)", {0.95}) == 0.0);
  CHECK(eval("bump(x1, 0.1, 0.9)", {0.3}) == doctest::Approx(std::pow(std::sin(kPi / 4), 4)));
}

TEST_CASE("variable lists") {
  CHECK(cell_variables(2) == std::vector<std::string>{"x1", "x2", "xt"});
  CHECK(kernel_variables(1) == std::vector<std::string>{"x1", "xt", "y1", "yt"});
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(eval("1 +"), DomainError);
  CHECK_THROWS_AS(eval("(1"), DomainError);
  CHECK_THROWS_AS(eval("foo(1)"), DomainError);
  CHECK_THROWS_AS(eval("y + 1"), DomainError);
  CHECK_THROWS_AS(eval("1 2"), DomainError);
  CHECK_THROWS_AS(eval("max(1)"), DomainError);
  const Expression e("x1", {"x1"});
  CHECK_THROWS_AS(e({1.0, 2.0}), DomainError);
}
