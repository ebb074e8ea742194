#include <doctest.h>

#include <numeric>
#include <random>

#include "specband/green.hpp"
#include "specband/spectral.hpp"
#include "support.hpp"

using namespace specband;
using namespace specband::testing;

namespace {

std::vector<int> all_points(int dim) {
  std::vector<int> v(dim);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST_CASE("full-box block norm is 1/delta") {
  const Grid g = strip(4, 4, 6);
  const auto f = reference_family(g.cell_grid());
  const std::vector<double> w{0.4, -1, 0.2, 0.9};
  const auto h = assemble_randomized(g, assemble_unperturbed(g, {}), f, 0.05, w);
  const auto ev = dense_eigs(h.matrix());
  const auto idx = all_points(g.dim());
  SUBCASE("below the spectrum") {
    const double lam = ev[0] - 0.3;
    const double n = resolvent_block_norm(h, lam, ev[0], idx, idx);
    CHECK(n == doctest::Approx(1 / 0.3).epsilon(1e-7));
    CHECK(n <= 1 / 0.3 + 1e-9);
  }
  SUBCASE("between eigenvalues") {
    const double lam = 0.5 * (ev[3] + ev[4]);
    const double delta = std::min(lam - ev[3], ev[4] - lam);
    CHECK(resolvent_block_norm_dense(h, lam, idx, idx) == doctest::Approx(1 / delta).epsilon(1e-9));
    CHECK(resolvent_block_norm(h, lam, ev[0], idx, idx) == doctest::Approx(1 / delta).epsilon(1e-7));
  }
}

TEST_CASE("diagonal operator has no off-diagonal blocks") {
  SpMat m(6, 6);
  for (int i = 0; i < 6; ++i) m.insert(i, i) = 1.0 + i;
  const SparseOperator h(m);
  CHECK(resolvent_block_norm(h, 0.0, 1.0, {0, 1, 2}, {3, 4, 5}) == 0.0);
  CHECK(resolvent_block_norm(h, 0.0, 1.0, {0, 1, 2}, {0, 1, 2}) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("oracle equivalence on random blocks") {
  const Grid g = strip(6, 4, 5);
  const auto f = reference_family(g.cell_grid());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> w(6);
  for (auto& x : w) x = u(rng);
  const auto h = assemble_randomized(g, assemble_unperturbed(g, {}), f, 0.03, w);
  REQUIRE(g.dim() <= 400);
  const double lmin = lowest_eigenpair(h, EigenMode::Dense).lambda_min;
  for (double off : {-0.5, -1.0, -2.0}) {
    for (int s : {1, 3, 5}) {
      const auto b1 = g.box_points({{0}, 1});
      const auto b2 = g.box_points({{s}, 1});
      const double it = resolvent_block_norm(h, lmin + off, lmin, b1, b2);
      const double de = resolvent_block_norm_dense(h, lmin + off, b1, b2);
      CHECK(std::abs(it - de) / de < 1e-7);
    }
  }
}

TEST_CASE("free Neumann line: decay rate sqrt(-lambda)") {
  const Grid g = strip(16, 32, 1, 1.0, Face::Neumann, Face::Neumann);
  const auto h = assemble_unperturbed(g, {});
  const auto prof = decay_profile(g, h, -1.0, 0.0, {{3}, 1}, {2, 3, 4, 5, 6, 7});
  CHECK(prof.delta == doctest::Approx(1.0));
  CHECK(std::abs(prof.fit.rate - 1.0) < 0.15);
  // the same points from the dense inverse
  const auto b1 = g.box_points({{3}, 1});
  for (size_t i = 0; i < prof.points.size(); i += 2) {
    const int s = 2 + static_cast<int>(i);
    const double de = resolvent_block_norm_dense(h, -1.0, b1, g.box_points({{3 + s}, 1}));
    CHECK(prof.points[i].norm == doctest::Approx(de).epsilon(1e-7));
  }
}

TEST_CASE("decay profiles") {
  const Grid g = strip(8, 4, 6);
  const auto h = assemble_unperturbed(g, {});
  const double l0 = cell_spectrum(g.cell_grid(), {}).lambda0;
  SUBCASE("overlapping boxes give a constant profile") {
    const SubBox b{{2}, 3};
    const auto p = decay_profile(g, h, l0 - 1, l0, b, {0, 0, 0, 0});
    const double full = resolvent_block_norm_dense(h, l0 - 1, g.box_points(b), g.box_points(b));
    for (const auto& pt : p.points) {
      CHECK(pt.distance == 0.0);
      CHECK(pt.norm == doctest::Approx(full).epsilon(1e-7));
    }
    CHECK(p.fit.degenerate);
  }
  SUBCASE("strictly decreasing below the spectrum, rate grows with delta") {
    double prev_rate = 0;
    for (double off : {0.5, 1.0, 2.0}) {
      const auto p = decay_profile(g, h, l0 - off, l0, {{0}, 1}, {1, 2, 3, 4, 5, 6});
      CHECK(p.delta == doctest::Approx(off));
      for (size_t i = 1; i < p.points.size(); ++i) {
        CHECK(p.points[i].distance > p.points[i - 1].distance);
        CHECK(p.points[i].norm < p.points[i - 1].norm);
      }
      CHECK(!p.fit.negative_rate);
      CHECK(p.fit.rate > prev_rate);
      prev_rate = p.fit.rate;
    }
  }
  SUBCASE("probe in the spectrum rejected") {
    const double lam = lowest_eigenpair(h, EigenMode::Dense).lambda_min;
    const auto idx = all_points(g.dim());
    CHECK_THROWS_AS(ct_verdict(DecayProfile{}, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(decay_profile(g, h, lam, lam, {{0}, 1}, {1, 2}), DomainError);
  }
}

TEST_CASE("fit_decay") {
  SUBCASE("exact exponential") {
    std::vector<DecayPoint> pts;
    for (double d : {0.0, 1.0, 2.5, 4.0, 7.0}) pts.push_back({d, 3.0 * std::exp(-0.7 * d)});
    const auto f = fit_decay(pts);
    CHECK(std::abs(f.log_prefactor - std::log(3.0)) < 1e-12);
    CHECK(std::abs(f.rate - 0.7) < 1e-12);
    CHECK(!f.degenerate);
  }
  SUBCASE("noisy exponential") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    std::vector<DecayPoint> pts;
    for (int d = 0; d < 10; ++d) pts.push_back({double(d), 2.0 * std::exp(-1.3 * d) * (1 + u(rng))});
    CHECK(std::abs(fit_decay(pts).rate - 1.3) / 1.3 < 0.05);
  }
  SUBCASE("flat and growing profiles") {
    std::vector<DecayPoint> flat{{0, 1}, {1, 1}, {2, 1}, {3, 1}};
    CHECK(fit_decay(flat).degenerate);
    std::vector<DecayPoint> up{{0, 1}, {1, 2}, {2, 4}, {3, 8}};
    CHECK(fit_decay(up).negative_rate);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(fit_decay({{0, 1}, {1, 0.5}, {2, 0.25}}), DomainError);
    CHECK_THROWS_AS(fit_decay({{0, 1}, {1, 0.5}, {2, 0.0}, {3, 0.1}}), DomainError);
  }
}

TEST_CASE("ct_verdict") {
  DecayProfile p;
  p.points = {{0, 3.0}, {1, 1.0}, {2, 0.4}, {3, 0.1}};
  const double N = 16, delta = 1 / (2 * std::sqrt(N));
  // at dist 0 the bound is 2 / delta = 4 sqrt(N) = 16
  auto v = ct_verdict(p, delta, 0.5);
  CHECK(v.pass);
  CHECK(v.margin == doctest::Approx(std::min({std::log(16 / 3.0), std::log(16 * std::exp(-0.5) / 1.0),
                                              std::log(16 * std::exp(-1.0) / 0.4),
                                              std::log(16 * std::exp(-1.5) / 0.1)})));
  p.points[0].norm = 17;
  CHECK(!ct_verdict(p, delta, 0.5).pass);
}
