#include <doctest.h>

#include <random>

#include "specband/assumptions.hpp"
#include "specband/perturbations.hpp"
#include "specband/spectral.hpp"
#include "support.hpp"

using namespace specband;
using namespace specband::testing;

namespace {

RVec zeros(const Grid& c) { return RVec::Zero(c.dim()); }
RVec ones(const Grid& c) { return RVec::Ones(c.dim()); }

// random potential family with V1 balanced by hand
PerturbationFamily random_family(const Grid& c, const CellSpectrum& cs, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-0.5, 1.5);
  const double s1 = std::abs(nd(rng)) * 5, s2 = ud(rng);
  RVec v1(c.dim()), v2(c.dim());
  for (int i = 0; i < c.dim(); ++i) {
    v1[i] = s1 * nd(rng);
    v2[i] = s2 + 0.3 * nd(rng);
  }
  const RVec p2 = cs.psi0.real().cwiseAbs2();
  v1.array() -= v1.dot(p2) / p2.sum();
  return potential_family(c, v1, v2);
}

void check_corrector_invariants(const CellAnalysis& a, const CellSpectrum& cs) {
  CHECK(a.corrector.orthogonality < 1e-12);
  CHECK(a.corrector.residual <= 1e-10);
  CHECK(std::abs(inner(a.corrector.u, cs.psi0, cs.weight)) < 1e-12);
}

}  // namespace

TEST_CASE("check_a1") {
  const Grid c = strip(1, 4, 8);
  const auto cs = cell_spectrum(c, {});
  CHECK(check_a1(potential_family(c, zeros(c), ones(c)), cs) == 0.0);
  // psi0 is normalized, so V1 = 1 gives the full mass
  const auto f = potential_family(c, ones(c), zeros(c));
  CHECK(check_a1(f, cs) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(!analyze_cell(f, c, {}).a1_ok);
  CHECK(analyze_cell(reference_family(c), c, {}).a1_ok);
}

TEST_CASE("exactify_a1") {
  const Grid c = strip(1, 6, 8);
  const auto cs = cell_spectrum(c, {});
  SUBCASE("V1 = 1 becomes 0") {
    const auto e = exactify_a1(potential_family(c, ones(c), zeros(c)), cs);
    CHECK(e.v1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_abs(e.l1) == 0.0);
  }
  SUBCASE("balanced V1 is left alone") {
    const auto f = reference_family(c);
    const auto e = exactify_a1(f, cs);
    CHECK((e.v1 - f.v1).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((e.v2 - f.v2).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("sign-changing input stays sign-changing") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(-1, 3);
    for (int r = 0; r < 20; ++r) {
      RVec v1(c.dim());
      for (auto& v : v1) v = ud(rng);
      if (v1.minCoeff() >= 0) continue;
      const auto e = exactify_a1(potential_family(c, v1, zeros(c)), cs);
      CHECK(std::abs(check_a1(e, cs)) < 1e-14 * std::max(1.0, v1.cwiseAbs().maxCoeff()));
      CHECK(e.v1.minCoeff() < 0);
      CHECK(e.v1.maxCoeff() > 0);
    }
  }
  SUBCASE("non-diagonal L1 rejected") {
    std::vector<Field> a{[](std::span<const double> x) { return bump(x[0], 0.2, 0.8) * x[1]; },
                         [](std::span<const double>) { return 0.0; }};
    CHECK_THROWS_AS(exactify_a1(magnetic_family(c, a), cs), DomainError);
  }
}

TEST_CASE("solve_corrector") {
  const Grid c = strip(1, 6, 7);
  const auto cs = cell_spectrum(c, {});
  const auto h = cell_operator(c, {});
  SUBCASE("zero rhs") {
    const auto r = solve_corrector(h, cs, Vec::Zero(c.dim()));
    CHECK(r.u.norm() == 0.0);
    CHECK(!r.rhs_projected);
  }
  SUBCASE("second eigenvector is reproduced") {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(h.matrix())};
    const auto ev = es.eigenvalues();
    REQUIRE(ev[1] - ev[0] > 1e-6);
    REQUIRE(ev[2] - ev[1] > 1e-6);
    CHECK(ev[0] == doctest::Approx(cs.lambda0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(cs.lambda1).epsilon(1e-12));
    const Vec phi1 = es.eigenvectors().col(1);
    const auto r = solve_corrector(h, cs, (ev[1] - ev[0]) * phi1);
    CHECK((r.u - phi1).norm() < 1e-9);
    CHECK(!r.rhs_projected);
  }
  SUBCASE("psi0 component is removed and flagged") {
    const auto r = solve_corrector(h, cs, cs.psi0);
    CHECK(r.rhs_projected);
    CHECK(r.u.norm() < 1e-12);
  }
}

TEST_CASE("compute_c0 and sufficient condition, trivial cases") {
  const Grid c = strip(1, 4, 8);
  const auto cs = cell_spectrum(c, {});
  const auto a = analyze_cell(potential_family(c, zeros(c), ones(c)), c, {});
  CHECK(a.c0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(a.sufficient_ok);

  // L2 = 0, L1 != 0
  auto f = reference_family(c);
  f.l2 = SpMat(c.dim(), c.dim());
  const auto b = analyze_cell(f, c, {});
  CHECK(b.corrector.u.norm() > 0);
  CHECK(b.c0 == doctest::Approx(-b.u_l1_pairing));
  CHECK(b.c0 <= 0);
  CHECK(!b.a2_ok);
  CHECK(!b.sufficient_ok);
  CHECK(compute_c0(f, cs, b.corrector.u) == doctest::Approx(b.c0).epsilon(1e-14));
}

TEST_CASE("random families: sufficient condition implies c0 > 0, Remark bound") {
  const Grid c = strip(1, 4, 6);
  const auto cs = cell_spectrum(c, {});
  std::mt19937_64 rng(2024);
  int implied = 0;
  for (int r = 0; r < 100; ++r) {
    const auto f = random_family(c, cs, rng);
    const auto a = analyze_cell(f, c, {});
    REQUIRE(a.a1_ok);
    check_corrector_invariants(a, cs);
    CHECK(a.u_l1_pairing >= 0);
    CHECK(a.u_l1_pairing <= a.l1psi_norm2 / (a.lambda1 - a.lambda0));
    if (a.sufficient_ok) {
      ++implied;
      CHECK(a.c0 > 0);
    }
  }
  // the draw covers both outcomes
  CHECK(implied > 5);
  CHECK(implied < 95);
}

TEST_CASE("three-term asymptotics by Richardson extrapolation") {
  const Grid c = strip(1, 4, 8);
  const auto f = reference_family(c);
  const auto a = analyze_cell(f, c, {});
  const auto h = cell_operator(c, {});
  auto q = [&](double t) {
    return (single_cell_eigenvalue(h, f, t, EigenMode::Dense) - a.lambda0 - t * a.a1_residual) / (t * t);
  };
  // q(t) = c0 + a t + b t^2 + ...; three points t, t/2, t/4 cancel a and b
  const double q1 = q(0.1), q2 = q(0.05), q4 = q(0.025);
  const double r1 = 2 * q2 - q1, r2 = 2 * q4 - q2;
  const double extrap = (4 * r2 - r1) / 3;
  CHECK(std::abs(extrap - a.c0) / a.c0 < 0.05);
}

TEST_CASE("two-grid error bar") {
  BoxSpec s;
  s.d = kPi;
  s.p_long = 16;
  s.m_trans = 16;
  const BoundaryCondition bc{Face::Dirichlet, Face::Dirichlet};
  const auto flat = two_grid_c0([](const Grid& g) { return potential_family(g, zeros(g), ones(g)); }, s, bc, {});
  CHECK(flat.c0_fine == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.error < 1e-12);
  const auto ref = two_grid_c0([](const Grid& g) { return reference_family(g); }, s, bc, {});
  CHECK(ref.error > 0);
  CHECK(ref.error < 0.05 * ref.c0_fine);
}

TEST_CASE("deformation series") {
  auto g = [](std::span<const double> x) { return 0.3 * bump(x[0], 0.15, 0.85); };
  CHECK(deformation_c0_series([](std::span<const double>) { return 0.0; }, 1, kPi, 8) == 0.0);
  CHECK_THROWS_AS(deformation_c0_series(g, 1, kPi, 1), DomainError);
  const auto s = deformation_c0_partial_sums(g, 1, kPi, 32);
  REQUIRE(s.size() == 31);
  // odd m have a_m = 0, so S_3 = S_2
  CHECK(s[1] == s[0]);
  CHECK(s[0] > 0);
  for (size_t i = 1; i < s.size(); ++i) CHECK(s[i] >= s[i - 1]);

  // discrete c0 approaches the long series from above under refinement
  const double far = deformation_c0_series(g, 1, kPi, 4096);
  double prev = std::numeric_limits<double>::infinity();
  for (int p : {32, 64, 128}) {
    const Grid c = strip(1, p, p);
    const double gap = std::abs(analyze_cell(boundary_deformation_family(c, g), c, {}).c0 - far) / far;
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("whole-space analysis") {
  const Grid c = strip(1, 32, 1, 1.0, Face::Neumann, Face::Neumann);
  REQUIRE(c.spec().whole_space());
  const auto cs = cell_spectrum(c, {});
  CHECK(cs.lambda0 == 0.0);
  SUBCASE("L1 = 0, mean L2 = 1") {
    const auto a = whole_space_analysis(potential_family(c, zeros(c), ones(c)), c);
    CHECK(a.c0 == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("zero-mean L1") {
    const auto v1 = sample_cell(c, [](std::span<const double> x) { return std::cos(2 * kPi * x[0]); });
    const auto f = potential_family(c, v1, ones(c));
    const auto a = whole_space_analysis(f, c);
    CHECK(std::abs(a.a1_residual) < 1e-12);
    CHECK(std::abs(a.corrector.u.sum()) < 1e-10);
    // same path as the layered pipeline
    CHECK(std::abs(a.c0 - analyze_cell(f, c, {}).c0) <= 1e-10);
    // continuum: U = cos(2 pi x)/(4 pi^2), c0 = 1 - 1/(8 pi^2)
    CHECK(a.c0 == doctest::Approx(1 - 1 / (8 * kPi * kPi)).epsilon(2e-3));
  }
  CHECK_THROWS_AS(whole_space_analysis(reference_family(strip(1, 4, 6)), strip(1, 4, 6)), DomainError);
}
