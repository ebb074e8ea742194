#include <doctest.h>

#include "specband/assumptions.hpp"
#include "specband/perturbations.hpp"
#include "specband/spectral.hpp"
#include "support.hpp"

using namespace specband;
using namespace specband::testing;

namespace {

Field zero_field() {
  return [](std::span<const double>) { return 0.0; };
}

// Separable oracle for A = (bump(x1; 0.1, 0.9) cos(xt), 0) on a Dirichlet
// strip of width pi: L1 psi0 = i bump'(x1) cos(t) psi0(t) only excites the
// sin(2t) transverse mode, which gives
//   c0 = 3/2 sum_k b_k^2 / (k^2 pi^2 + 3),  b_k = int bump(x) sin(k pi x) dx.
double magnetic_c0_oracle() {
  const int q = 100000;
  std::vector<double> bx(q), x(q);
  for (int i = 0; i < q; ++i) {
    x[i] = (i + 0.5) / q;
    bx[i] = bump(x[i], 0.1, 0.9);
  }
  double s = 0;
  for (int k = 1; k <= 1500; ++k) {
    double b = 0;
    for (int i = 0; i < q; ++i) b += bx[i] * std::sin(k * kPi * x[i]);
    b /= q;
    s += b * b / (k * k * kPi * kPi + 3);
  }
  return 1.5 * s;
}

double magnetic_c0(int p, int m) {
  const Grid c = strip(1, p, m);
  std::vector<Field> a{[](std::span<const double> x) { return bump(x[0], 0.1, 0.9) * std::cos(x[1]); }, zero_field()};
  return analyze_cell(magnetic_family(c, a), c, {}).c0;
}

}  // namespace

TEST_CASE("potential family") {
  const Grid c = strip(1, 4, 5);
  const auto cs = cell_spectrum(c, {});
  SUBCASE("V1 = 0, V2 = 1") {
    const auto f = potential_family(c, RVec(RVec::Zero(c.dim())), RVec(RVec::Ones(c.dim())));
    CHECK(max_abs(f.l1) == 0.0);
    CHECK(max_abs(f.l2 - stencil_identity(c.dim())) == 0.0);
    const auto a = analyze_cell(f, c, {});
    CHECK(a.c0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("balanced V1 passes A1") {
    // remove the psi0^2-weighted mean by hand
    RVec raw(c.dim());
    for (int i = 0; i < c.dim(); ++i) {
      const auto x = c.local_point(i);
      raw[i] = std::exp(x[0]) * (1 + x[1]);
    }
    const RVec p2 = cs.psi0.real().cwiseAbs2();
    const RVec v1 = (raw.array() - raw.dot(p2) / p2.sum()).matrix();
    const auto f = potential_family(c, v1, RVec(RVec::Zero(c.dim())));
    CHECK(std::abs(check_a1(f, cs)) < 1e-12);
  }
  SUBCASE("complex samples rejected") {
    Vec v = Vec::Zero(c.dim());
    v[3] = cplx(0, 1);
    CHECK_THROWS_AS(potential_family(c, v, Vec(Vec::Zero(c.dim()))), DomainError);
  }
}

TEST_CASE("magnetic family") {
  const Grid c = strip(1, 16, 8);
  const auto cs = cell_spectrum(c, {});
  SUBCASE("A = 0") {
    const auto f = magnetic_family(c, {zero_field(), zero_field()});
    CHECK(max_abs(f.l1) == 0.0);
    CHECK(max_abs(f.l2) == 0.0);
  }
  SUBCASE("A1 holds structurally for admissible fields") {
    const std::vector<std::vector<Field>> fields{
        {[](std::span<const double> x) { return bump(x[0], 0.1, 0.9) * std::cos(x[1]); }, zero_field()},
        {[](std::span<const double> x) { return bump(x[0], 0.2, 0.7) * x[1]; },
         [](std::span<const double> x) { return bump(x[0], 0.15, 0.95) * std::sin(2 * x[1]); }},
        {zero_field(), [](std::span<const double> x) { return bump(x[0], 0.1, 0.6) * (1 + x[1] * x[1]); }}};
    for (const auto& a : fields) {
      const auto f = magnetic_family(c, a);
      CHECK(SparseOperator(f.l1).is_exactly_hermitian());
      CHECK(SparseOperator(f.l2).is_exactly_hermitian());
      CHECK(!f.is_real());
      CHECK(std::abs(check_a1(f, cs)) < 1e-10 * std::max(1.0, wnorm(f.l1 * cs.psi0, cs.weight)));
    }
  }
  SUBCASE("lateral trace rejected") {
    std::vector<Field> a{[](std::span<const double> x) { return 1.0 + 0 * x[0]; }, zero_field()};
    CHECK_THROWS_AS(magnetic_family(c, a), DomainError);
  }
}

TEST_CASE("magnetic c0 converges to the separable oracle") {
  const double ref = magnetic_c0_oracle();
  CHECK(ref == doctest::Approx(0.0097055).epsilon(1e-4));
  double prev = std::numeric_limits<double>::infinity();
  for (int p : {32, 64, 128}) {
    const double gap = std::abs(magnetic_c0(p, p / 2) - ref) / ref;
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(std::abs(magnetic_c0(256, 128) - ref) / ref < 1e-3);
}

TEST_CASE("metric family") {
  const Grid c = strip(1, 32, 64);
  const auto cs = cell_spectrum(c, {});
  const int n = 1;
  auto cf = [](auto f) -> CField { return [f](std::span<const double> x) { return cplx(f(x)); }; };
  SUBCASE("only b_tt: L1 = 0 and c0 = int b_tt (psi0')^2") {
    CoefficientMatrix a(n + 1, std::vector<CField>(n + 1)), b = a;
    b[1][1] = cf([](std::span<const double> x) { return bump(x[0], 0.1, 0.9); });
    const auto f = metric_family(c, a, b);
    CHECK(max_abs(f.l1) == 0.0);
    const auto an = analyze_cell(f, c, {});
    CHECK(an.a1_residual == 0.0);
    // int bump = 3/8 * 0.8, int (2/pi) cos^2 t dt = 1
    const double exact = 0.375 * 0.8;
    CHECK(std::abs(an.c0 - exact) / exact < 5e-3);
    CHECK(an.a2_ok);
  }
  SUBCASE("a_tt = 0 leaves A1 intact") {
    CoefficientMatrix a(n + 1, std::vector<CField>(n + 1)), b = a;
    a[0][0] = cf([](std::span<const double> x) { return bump(x[0], 0.1, 0.9) * (1 + x[1]); });
    a[0][1] = cf([](std::span<const double> x) { return bump(x[0], 0.2, 0.8) * std::sin(x[1]); });
    a[1][0] = a[0][1];
    const auto f = metric_family(c, a, b);
    CHECK(SparseOperator(f.l1).is_exactly_hermitian());
    CHECK(std::abs(check_a1(f, cs)) < 1e-10 * std::max(1.0, wnorm(f.l1 * cs.psi0, cs.weight)));
  }
  SUBCASE("all zero") {
    CoefficientMatrix a(n + 1, std::vector<CField>(n + 1));
    const auto f = metric_family(c, a, a);
    CHECK(max_abs(f.l1) == 0.0);
    CHECK(max_abs(f.l2) == 0.0);
  }
  SUBCASE("asymmetric coefficients rejected") {
    CoefficientMatrix a(n + 1, std::vector<CField>(n + 1));
    a[0][1] = cf([](std::span<const double> x) { return bump(x[0], 0.2, 0.8); });
    CHECK_THROWS_AS(metric_family(c, a, a), DomainError);
  }
}

TEST_CASE("integral family") {
  const Grid c = strip(1, 8, 6);
  const auto cs = cell_spectrum(c, {});
  const double w = c.weight();
  auto kfun = [](std::span<const double> x) { return std::cos(2 * kPi * x[0]) * (1 + 0.3 * x[1]); };
  const auto k1 = sample_kernel(c, [&](std::span<const double> x, std::span<const double> y) { return cplx(kfun(x) * kfun(y)); });
  const auto k2 = sample_kernel(c, [](std::span<const double> x, std::span<const double> y) {
    return cplx(bump(x[0], 0.1, 0.9) * bump(y[0], 0.1, 0.9) * (2 + std::cos(x[1] - y[1])));
  });
  const auto f = integral_family(c, k1, k2);
  CHECK(SparseOperator(f.l1).is_exactly_hermitian());
  CHECK(wnorm(f.l1 * cs.psi0, cs.weight) < 1e-14);
  const auto a = analyze_cell(f, c, {});
  CHECK(a.corrector.u.cwiseAbs().maxCoeff() < 1e-12);
  // c0 = int int K2 psi0 psi0 as a plain double sum
  double q = 0;
  for (int i = 0; i < c.dim(); ++i)
    for (int j = 0; j < c.dim(); ++j) q += w * w * k2(i, j).real() * cs.psi0[i].real() * cs.psi0[j].real();
  CHECK(a.c0 == doctest::Approx(q).epsilon(1e-12));
  CHECK(a.c0 > 0);

  const Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(c.dim(), c.dim());
  const auto f0 = integral_family(c, z, z);
  CHECK(max_abs(f0.l1) == 0.0);
  Eigen::MatrixXcd bad = k2;
  bad(0, 1) += 0.5;
  CHECK_THROWS_AS(integral_family(c, bad, k2), DomainError);
}

TEST_CASE("boundary deformation family") {
  const Grid c = strip(1, 32, 16);
  const auto cs = cell_spectrum(c, {});
  SUBCASE("g = 0") {
    const auto f = boundary_deformation_family(c, zero_field());
    CHECK(max_abs(f.l1) == 0.0);
    CHECK(max_abs(f.l2) == 0.0);
  }
  SUBCASE("A1 holds structurally") {
    for (double amp : {0.1, 0.3, 1.0}) {
      const auto f = boundary_deformation_family(
          c, [amp](std::span<const double> x) { return amp * bump(x[0], 0.15, 0.85) * (1 + 0.5 * x[0]); });
      CHECK(SparseOperator(f.l1).is_exactly_hermitian());
      CHECK(std::abs(check_a1(f, cs)) < 1e-10 * std::max(1.0, wnorm(f.l1 * cs.psi0, cs.weight)));
    }
  }
  SUBCASE("support and boundary preconditions") {
    CHECK_THROWS_AS(boundary_deformation_family(c, [](std::span<const double> x) { return x[0]; }), DomainError);
    const Grid nm = strip(1, 8, 8, kPi, Face::Neumann, Face::Dirichlet);
    CHECK_THROWS_AS(boundary_deformation_family(nm, zero_field()), DomainError);
  }
}

TEST_CASE("linear positive family") {
  const Grid c = strip(1, 8, 8);
  const auto cs = cell_spectrum(c, {});
  RVec l2(c.dim());
  for (int i = 0; i < c.dim(); ++i) l2[i] = 1 + 0.5 * std::cos(2 * kPi * c.local_point(i)[0]);
  const auto f = linear_positive_family(c, stencil_identity(c.dim()), cs);
  CHECK(max_abs(f.l1) == 0.0);
  CHECK_THROWS_AS(linear_positive_family(c, SpMat(c.dim(), c.dim()), cs), DomainError);

  SpMat d(c.dim(), c.dim());
  for (int i = 0; i < c.dim(); ++i) d.insert(i, i) = l2[i];
  const auto g = linear_positive_family(c, d, cs);
  const double c0 = analyze_cell(g, c, {}).c0;
  // slope of lambda(delta) - L0 against delta through the origin
  const auto op = cell_operator(c, {});
  double sxy = 0, sxx = 0;
  for (double delta : {1e-4, 2e-4, 4e-4, 8e-4}) {
    const double gap = single_cell_eigenvalue(op, g, std::sqrt(delta), EigenMode::Dense) - cs.lambda0;
    sxy += delta * gap;
    sxx += delta * delta;
  }
  CHECK(std::abs(sxy / sxx - c0) / c0 < 0.05);
}

TEST_CASE("family invariants under validation") {
  const Grid c = strip(1, 8, 6);
  auto f = reference_family(c);
  CHECK_NOTHROW(f.validate());
  f.l3 = [dim = c.dim()](double t) {
    SpMat m(dim, dim);
    m.insert(0, 1) = cplx(t, 0);
    return m;
  };
  f.l3_bound = 10;
  CHECK_THROWS_AS(f.validate(), DomainError);
}
