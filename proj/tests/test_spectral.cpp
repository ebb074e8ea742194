#include <doctest.h>

#include <random>

#include "specband/assumptions.hpp"
#include "specband/spectral.hpp"
#include "support.hpp"

using namespace specband;
using namespace specband::testing;

namespace {

SparseOperator diag_op(const std::vector<double>& d) {
  SpMat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  return SparseOperator(m);
}

void check_residual(const SparseOperator& h, const EigenResult& r) {
  const double res = (h.apply(r.vector) - r.lambda_min * r.vector).norm();
  CHECK(res <= 1e-10 * h.norm_estimate() * r.vector.norm());
}

std::vector<double> draw(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> w(n);
  for (auto& x : w) x = u(rng);
  return w;
}

}  // namespace

TEST_CASE("lowest_eigenpair on known spectra") {
  SUBCASE("Neumann Laplacian") {
    const Grid g = strip(3, 4, 5, 1.0, Face::Neumann, Face::Neumann);
    const auto h = assemble_unperturbed(g, {});
    for (auto mode : {EigenMode::Dense, EigenMode::Iterative}) {
      const auto r = lowest_eigenpair(h, mode);
      CHECK(std::abs(r.lambda_min) < 1e-10);
      const Vec v = r.vector / r.vector[0];
      CHECK((v - Vec::Ones(v.size())).norm() < 1e-6);
    }
  }
  SUBCASE("diagonal") {
    const auto h = diag_op({3, 1, 2});
    CHECK(lowest_eigenpair(h, EigenMode::Dense).lambda_min == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lowest_eigenpair(h, EigenMode::Iterative).lambda_min == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::string(lowest_eigenpair(h).method) == "dense");
  }
  SUBCASE("random sparse hermitian, dim 200") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> pick(0, 199);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < 200; ++i) t.emplace_back(i, i, 4 * nd(rng));
    for (int e = 0; e < 800; ++e) {
      const int i = pick(rng), j = pick(rng);
      if (i == j) continue;
      const cplx z(nd(rng), nd(rng));
      t.emplace_back(i, j, z);
      t.emplace_back(j, i, std::conj(z));
    }
    SpMat m(200, 200);
    m.setFromTriplets(t.begin(), t.end());
    const SparseOperator h(m);
    REQUIRE(h.is_exactly_hermitian());
    const double ref = dense_eigs(m)[0];
    const auto r = lowest_eigenpair(h, EigenMode::Iterative);
    CHECK(r.method == "iterative");
    CHECK(std::abs(r.lambda_min - ref) < 1e-8);
    check_residual(h, r);
  }
}

TEST_CASE("iterative and dense agree on randomized boxes") {
  const Grid g = strip(4, 4, 6);
  const Grid c = g.cell_grid();
  const auto f = reference_family(c);
  const auto h0 = assemble_unperturbed(g, {});
  std::mt19937_64 rng(5);
  for (int r = 0; r < 10; ++r) {
    const auto w = draw(rng, g.cell_count());
    const auto h = assemble_randomized(g, h0, f, 0.02, w);
    const auto a = lowest_eigenpair(h, EigenMode::Dense);
    const auto b = lowest_eigenpair(h, EigenMode::Iterative);
    CHECK(std::abs(a.lambda_min - b.lambda_min) < 1e-8);
    check_residual(h, a);
    check_residual(h, b);
  }
}

TEST_CASE("single-cell eigenvalue") {
  const Grid c = strip(1, 4, 8);
  const auto cs = cell_spectrum(c, {});
  const auto h = cell_operator(c, {});
  const auto f = reference_family(c);
  CHECK(single_cell_eigenvalue(h, f, 0.0) == doctest::Approx(cs.lambda0).epsilon(1e-12));
  const double c0 = analyze_cell(f, c, {}).c0;
  for (double t : {1e-3, 2e-3, 4e-3}) {
    const double gap = single_cell_eigenvalue(h, f, t) - cs.lambda0;
    CHECK(gap >= -1e-12);
    CHECK(gap / (t * t) == doctest::Approx(c0).epsilon(0.01));
  }
}

TEST_CASE("bracketing") {
  const Grid g = strip(4, 4, 6);
  const Grid c = g.cell_grid();
  const auto cs = cell_spectrum(c, {});
  const auto hc = cell_operator(c, {});
  const auto f = reference_family(c);
  const auto h0 = assemble_unperturbed(g, {});

  const std::vector<double> zero(4, 0.0);
  CHECK(bracketing_bound(hc, f, 0.01, zero) == doctest::Approx(cs.lambda0).epsilon(1e-12));
  const std::vector<double> one{0, 0, -0.7, 0};
  const double expect = std::min(cs.lambda0, single_cell_eigenvalue(hc, f, 0.3 * -0.7));
  CHECK(bracketing_bound(hc, f, 0.3, one) == doctest::Approx(expect).epsilon(1e-12));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> eps(0.001, 0.5);
  int fails = 0;
  for (int r = 0; r < 200; ++r) {
    const auto w = draw(rng, g.cell_count());
    const double e = eps(rng);
    const double lam = lowest_eigenpair(assemble_randomized(g, h0, f, e, w)).lambda_min;
    if (lam < bracketing_bound(hc, f, e, w) - 1e-9) ++fails;
  }
  CHECK(fails == 0);
}

TEST_CASE("minimum at zero and argmin over {-1,0,1}^N") {
  for (int N : {1, 2}) {
    const Grid g = strip(N, 4, 6);
    const Grid c = g.cell_grid();
    const auto cs = cell_spectrum(c, {});
    const auto f = reference_family(c);
    const auto h0 = assemble_unperturbed(g, {});
    const double eps = std::min(0.5 * epsilon_regime(N, 8).hi, 0.25);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg;
    const int total = N == 1 ? 3 : 9;
    for (int code = 0; code < total; ++code) {
      std::vector<double> w(N);
      for (int k = 0, x = code; k < N; ++k, x /= 3) w[k] = x % 3 - 1.0;
      const double lam = lowest_eigenpair(assemble_randomized(g, h0, f, eps, w), EigenMode::Dense).lambda_min;
      CHECK(lam >= cs.lambda0 - 1e-9);
      if (lam < best) {
        best = lam;
        arg = w;
      }
    }
    CHECK(arg == std::vector<double>(N, 0.0));
  }
}

TEST_CASE("deterministic bound report") {
  const std::vector<double> z(8, 0.0);
  const auto b = check_deterministic_bound(1.0, 1.0, 0.1, 8, 1, z, 3.0);
  CHECK(b.lambda_gap == 0.0);
  CHECK(b.rhs_value == 0.0);
  CHECK(b.pass);

  const std::vector<double> w{1, -1, 0.5, 0};
  const auto r = check_deterministic_bound(1.0 + 1e-2, 1.0, 0.1, 4, 1, w, 0.5);
  CHECK(r.rhs_value == doctest::Approx(0.5 * 0.01 / 4 * 2.25));
  CHECK(r.pass);
  CHECK(!check_deterministic_bound(1.0, 1.0 + 1e-6, 0.1, 4, 1, w, 0.5).pass);

  // N = 1 reduces to the quadratic lifting
  const Grid c = strip(1, 4, 8);
  const auto f = reference_family(c);
  const auto a = analyze_cell(f, c, {});
  const auto h = cell_operator(c, {});
  const std::vector<double> om{0.6};
  const double e = 2e-3;
  const double lam = single_cell_eigenvalue(h, f, e * om[0]);
  const double c2 = fit_c2({lam - a.lambda0}, {e}, {om}, 1, 1);
  CHECK(c2 == doctest::Approx(a.c0).epsilon(0.01));
}

TEST_CASE("fit_c2 and loglog_slope") {
  const std::vector<std::vector<double>> om{{1, 0}, {0, 2}, {0, 0}};
  // samples with omega = 0 carry no information
  CHECK(fit_c2({0.5, 1.0, 0.0}, {1, 1, 1}, om, 2, 1) == doctest::Approx(0.5));
  CHECK(fit_c2({0.1, 4.0, 0.0}, {1, 1, 1}, om, 2, 1) == doctest::Approx(0.2));
  CHECK_THROWS_AS(fit_c2({1}, {1, 2}, om, 2, 1), DomainError);
  CHECK_THROWS_AS(fit_c2({0.0, 0.0}, {0.0, 0.0}, {{1, 1}, {1, 0}}, 2, 1), DomainError);

  std::vector<double> x, y;
  for (double t = 1e-3; t < 1e-1; t *= 1.7) {
    x.push_back(t);
    y.push_back(3 * std::pow(t, 2.5));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("quadratic scaling of the gap") {
  const Grid g = strip(4, 4, 6);
  const auto f = reference_family(g.cell_grid());
  const auto cs = cell_spectrum(g.cell_grid(), {});
  const auto h0 = assemble_unperturbed(g, {});
  const std::vector<double> w{0.3, -0.8, 1.0, -0.1};
  std::vector<double> eps, gap;
  for (double e = 1e-3; e <= 1e-2 * 1.0001; e *= std::sqrt(10.0)) {
    eps.push_back(e);
    gap.push_back(lowest_eigenpair(assemble_randomized(g, h0, f, e, w)).lambda_min - cs.lambda0);
  }
  CHECK(std::abs(loglog_slope(eps, gap) - 2) < 0.1);
}

TEST_CASE("periodic lifting") {
  const Grid c = strip(1, 4, 8);
  const auto cs = cell_spectrum(c, {});
  const auto f = reference_family(c);
  const double c0 = analyze_cell(f, c, {}).c0;
  const std::vector<double> eps{0.02, 0.04, 0.06, 0.08};

  const auto fit = lifting_periodic(c, {}, f, eps, cs.lambda0);
  CHECK(std::abs(fit.c0_hat - c0) / c0 < 0.05);
  const std::vector<double> ones{1.0};
  const auto at_zero = assemble_randomized(c, cell_operator(c, {}), f, 0.0, ones);
  CHECK(std::abs(lowest_eigenpair(at_zero).lambda_min - cs.lambda0) < 1e-12);

  // the family is symmetric about x1 = 1/2, so the periodic configuration
  // has a cell-periodic ground state and the same energy for every N
  for (int N : {2, 4}) {
    const Grid g = strip(N, 4, 8);
    const auto other = lifting_periodic(g, {}, reference_family(g.cell_grid()), eps, cs.lambda0);
    for (size_t i = 0; i < eps.size(); ++i) CHECK(std::abs(other.gaps[i] - fit.gaps[i]) < 1e-8);
  }

  CHECK_THROWS_AS(fit_lifting({0.01, 0.02, 0.03}, {1, 2, 3}), DomainError);
  CHECK_THROWS_AS(fit_lifting({0.02, 0.021, 0.022, 0.023}, {1, 2, 3, 4}), DomainError);
}

TEST_CASE("epsilon regime") {
  CHECK(epsilon_regime(1, 1).hi == 1.0);
  CHECK(epsilon_regime(2, 1).hi == 1.0 / 16);
  CHECK(epsilon_regime(10, 0.5).hi == doctest::Approx(5e-5).epsilon(1e-14));
  CHECK(epsilon_regime(3, 1).lo == 0.0);
  CHECK_THROWS_AS(epsilon_regime(0, 1), DomainError);
  CHECK_THROWS_AS(epsilon_regime(2, 0), DomainError);
}
