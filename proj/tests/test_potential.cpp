#include "oracles.hpp"

#include <doctest.h>
#include <triwell/potential.hpp>

#include <random>

using namespace triwell;

TEST_CASE("hessians at the wells") {
  const auto pot = builtin_degenerate_triple(2, 1);
  const auto d2 = pot.derivatives(Vec2(0, 0));
  CHECK(d2.W == 0);
  CHECK(d2.grad.norm() == 0);
  CHECK(d2.hess(0, 0) == doctest::Approx(2));
  CHECK(d2.hess(1, 1) == doctest::Approx(4));
  CHECK(d2.hess(0, 1) == doctest::Approx(0));
  for (double x : {-1.0, 1.0}) {
    const auto d = pot.derivatives(Vec2(x, 0));
    CHECK(d.W == doctest::Approx(0));
    CHECK(d.grad.norm() < 1e-12);
    CHECK(d.hess(0, 0) == doctest::Approx(8));
    CHECK(d.hess(1, 1) == doctest::Approx(6));
  }
}

TEST_CASE("derivatives match hand-written formulas and finite differences") {
  const oracle::Triple w{2.5, 0.7};
  const auto pot = builtin_degenerate_triple(2.5, 0.7);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int k = 0; k < 200; ++k) {
    const double x = U(rng), y = U(rng);
    const auto d = pot.derivatives(Vec2(x, y));
    CHECK(d.W == doctest::Approx(w.W(x, y)).epsilon(1e-12));
    CHECK((d.grad - w.grad(x, y)).norm() < 1e-10 * (1 + d.grad.norm()));
    CHECK((d.hess - w.hess(x, y)).norm() < 1e-10 * (1 + d.hess.norm()));
    const auto g = oracle::fd_grad([&](double a, double b) { return pot.W(Vec2(a, b)); }, x, y);
    CHECK((g - d.grad).norm() < 1e-6 * (1 + g.norm()));
  }
}

TEST_CASE("wells carry sorted eigenvalues and orthonormal eigenvectors") {
  const auto pot = builtin_degenerate_triple(2, 1);
  REQUIRE(pot.well_count() == 3);
  for (const auto &w : pot.wells()) {
    CHECK(w.lambda1() < w.lambda2());
    CHECK((w.eigenvectors.transpose() * w.eigenvectors - Mat2::Identity()).norm() < 1e-12);
    const auto d = w_derivatives(pot, w.position);
    CHECK(d.W < 1e-14);
    CHECK(d.grad.norm() < 1e-10);
  }
  // slow direction at p2 is the axis
  CHECK(std::abs(pot.well(2).slow_direction()(0)) == doctest::Approx(1));
}

TEST_CASE("parameter checks") {
  CHECK_THROWS_AS(builtin_degenerate_triple(1.0, 1), ConfigurationError);
  CHECK_THROWS_AS(builtin_degenerate_triple(0.5, 1), ConfigurationError);
  CHECK_THROWS_AS(builtin_degenerate_triple(2, -0.1), ConfigurationError);
  CHECK_THROWS_AS(builtin_degenerate_triple(2, 2), ConfigurationError); // repeated eigenvalue at p1
  CHECK_THROWS_AS(make_builtin("nope", {}), ConfigurationError);
  CHECK_NOTHROW(make_builtin("degenerate_triple", {{"lambda", 3}, {"mu", 0}}));
}

TEST_CASE("non-finite input") {
  const auto pot = builtin_degenerate_triple(2, 1);
  CHECK_THROWS_AS(w_derivatives(pot, Vec2(std::nan(""), 0)), DomainError);
  CHECK_THROWS_AS(w_derivatives(pot, Vec2(0, INFINITY)), DomainError);
}

TEST_CASE("quad evaluation agrees with double") {
  const auto pot = builtin_degenerate_triple(2, 1);
  REQUIRE(pot.has_quad());
  const Vec2 u(0.3, -0.2);
  const auto dq = pot.derivatives(Vec2T<quad>(quad(0.3), quad(-0.2)));
  CHECK(double(dq.W) == doctest::Approx(pot.W(u)).epsilon(1e-14));
}

TEST_CASE("double well") {
  const auto pot = builtin_double_well();
  REQUIRE(pot.well_count() == 2);
  CHECK(pot.W(Vec2(0, 0)) == doctest::Approx(0.5));
  CHECK(pot.W(Vec2(1, 0)) == 0);
}

TEST_CASE("validation of the builtin") {
  const auto rep = validate_potential(builtin_degenerate_triple(2, 1));
  CHECK(rep.all_pass());
  CHECK(std::abs(rep.defect) < 1e-3);
  CHECK(rep.d12 == doctest::Approx(std::sqrt(2) / 4).epsilon(1e-3));
  CHECK(rep.geodesic_through_p2);
  // deterministic
  const auto again = validate_potential(builtin_degenerate_triple(2, 1));
  CHECK(again.d13 == rep.d13);
  CHECK(again.defect == rep.defect);
}

TEST_CASE("triangle fixture fails the hypotheses") {
  const auto rep = validate_potential(triangle_potential());
  CHECK_FALSE(rep.posdef); // isotropic wells
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.defect > 0.1);
  CHECK_FALSE(rep.all_pass());
}
