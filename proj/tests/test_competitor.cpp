#include <doctest.h>
#include <triwell/disk2d.hpp>

#include <cmath>

using namespace triwell;
using namespace triwell::disk;

namespace {

struct Setup {
  Potential pot = builtin_degenerate_triple(2, 1);
  double eta = metric::default_eta(pot);
  metric::DistanceOracle oracle{pot, eta};
  hetero::HeteroclinicProfile z12 = hetero::solve_heteroclinic(pot, 1, 2, 20, 801);
  hetero::HeteroclinicProfile z23 = hetero::solve_heteroclinic(pot, 2, 3, 20, 801);
};

const Setup &setup() {
  static const Setup s;
  return s;
}

constexpr double deg = M_PI / 180;

BoundaryTrace planted(double R, double h, double a21, double a32, double b12, double b23) {
  const auto &s = setup();
  return synthetic_trace(s.z12, s.z23, R, a21, a32, b12, b23, 5, std::size_t(std::lround(2 * M_PI * R / h)));
}

} // namespace

TEST_CASE("planted walls are recovered") {
  const auto &s = setup();
  const double R = 20, h = 0.05;
  const auto tr = planted(R, h, 100 * deg, 80 * deg, -100 * deg, -80 * deg);
  const auto rep = boundary_angles(s.pot, tr, s.oracle, 0.1, s.z12, s.z23, h);
  const auto &A = rep.angles;
  CHECK(std::abs(A.a21 - 100 * deg) <= h / R);
  CHECK(std::abs(A.a32 - 80 * deg) <= h / R);
  CHECK(std::abs(A.b12 + 100 * deg) <= h / R);
  CHECK(std::abs(A.b23 + 80 * deg) <= h / R);
  CHECK(std::abs(A.abar - 90 * deg) <= h / R);
  CHECK(std::abs(A.bbar + 90 * deg) <= h / R);
  CHECK(A.ordered());
  // four walls on the boundary
  CHECK(rep.boundary_energy == doctest::Approx(2 * (s.z12.connection_energy + s.z23.connection_energy)).epsilon(0.02));
  CHECK(rep.max_dist_p1 < s.eta);
  CHECK(rep.max_dist_p3 < s.eta);
  // chords between planted endpoints
  CHECK(A.L1() == doctest::Approx(2 * R * std::cos(10 * deg)).epsilon(1e-3));
  CHECK(A.L3() == doctest::Approx(2 * R * std::cos(10 * deg)).epsilon(1e-3));
  CHECK(A.ell() == doctest::Approx(0.5 * R * 10 * deg).epsilon(0.02));
  CHECK(A.eps() == doctest::Approx(10 * deg).epsilon(0.02));
}

TEST_CASE("asymmetric plants") {
  const auto &s = setup();
  const double R = 40, h = 0.05;
  const auto tr = planted(R, h, 98 * deg, 83 * deg, -97 * deg, -82 * deg);
  const auto A = boundary_angles(s.pot, tr, s.oracle, 0.1, s.z12, s.z23, h).angles;
  CHECK(std::abs(A.a21 - 98 * deg) <= h / R);
  CHECK(std::abs(A.a32 - 83 * deg) <= h / R);
  CHECK(std::abs(A.b12 + 97 * deg) <= h / R);
  CHECK(std::abs(A.b23 + 82 * deg) <= h / R);
}

TEST_CASE("a trace without a p3 arc is refused") {
  const auto &s = setup();
  const Vec2 p1 = s.pot.well(1).position;
  const auto tr = BoundaryTrace::from_function(10, 1256, [&](double) { return p1; });
  CHECK_THROWS_AS(boundary_angles(s.pot, tr, s.oracle, 0.1, s.z12, s.z23, tr.spacing()), PreconditionError);
}

TEST_CASE("competitor") {
  const auto &s = setup();
  const double R = 20, h = 0.05, e = 0.15;
  const auto tr = planted(R, h, M_PI / 2 + e, M_PI / 2 - e, -M_PI / 2 - e, -M_PI / 2 + e);
  const auto A = boundary_angles(s.pot, tr, s.oracle, 0.1, s.z12, s.z23, h).angles;
  CompetitorParams par;
  par.ell = 2.5;
  par.sigma = std::sqrt(R);
  const Field2D f = build_competitor(s.pot, tr, A, s.z12, s.z23, h, par);
  f.validate();

  SUBCASE("boundary values follow the trace") {
    double worst = 0;
    for (int j = 0; j < f.N; ++j)
      for (int i = 0; i < f.N; ++i)
        if (f.pinned[f.index(i, j)])
          worst = std::max(worst, (f.values[f.index(i, j)] - tr.at(std::atan2(f.y(j), f.x(i)))).norm());
    CHECK(worst < 1e-12);
  }
  SUBCASE("no jumps") {
    double jump = 0;
    for (int j = 0; j + 1 < f.N; ++j)
      for (int i = 0; i + 1 < f.N; ++i) {
        const auto k = f.index(i, j);
        if (!f.mask[k]) continue;
        if (f.mask[k + 1]) jump = std::max(jump, (f.values[k + 1] - f.values[k]).norm());
        if (f.mask[k + f.N]) jump = std::max(jump, (f.values[k + f.N] - f.values[k]).norm());
      }
    CHECK(jump < 0.1);
  }
  SUBCASE("energy") {
    const double d12 = s.z12.connection_energy, d23 = s.z23.connection_energy;
    const double base = d12 * A.L1() + d23 * A.L3();
    const double E = energy_2d(s.pot, f).total;
    CHECK(E > base - 0.05);
    CHECK(E < base + 0.5);
    const double ann =
        energy_2d(s.pot, f, [&](double x, double y) { return x * x + y * y > (R - 1) * (R - 1); }).total;
    CHECK(ann <= 2 * (d12 + d23) + 0.2);
    // p2 along the separating line, away from both walls
    const Vec2 p2 = s.pot.well(2).position;
    CHECK((f.sample(Vec2(0, 0)) - p2).norm() < 1e-6);
    CHECK((f.sample(Vec2(0, R / 2)) - p2).norm() < 1e-6);
  }
}

TEST_CASE("competitor preconditions") {
  const auto &s = setup();
  const double R = 20, h = 0.1, e = 0.15;
  const auto tr = planted(R, h, M_PI / 2 + e, M_PI / 2 - e, -M_PI / 2 - e, -M_PI / 2 + e);
  const auto A = boundary_angles(s.pot, tr, s.oracle, 0.1, s.z12, s.z23, h).angles;
  CompetitorParams par;
  par.sigma = std::sqrt(R);
  par.ell = 40;
  CHECK_THROWS_AS(build_competitor(s.pot, tr, A, s.z12, s.z23, h, par), ConfigurationError);
  par.ell = 2;
  par.C = 2 * par.sigma; // C > σ
  CHECK_THROWS_AS(build_competitor(s.pot, tr, A, s.z12, s.z23, h, par), ConfigurationError);
  par.C = 1;
  par.eps_max = 0.1;
  CHECK_THROWS_AS(build_competitor(s.pot, tr, A, s.z12, s.z23, h, par), ConfigurationError);
  AngleSet bad = A;
  std::swap(bad.a21, bad.a32);
  CHECK_THROWS_AS(build_competitor(s.pot, tr, bad, s.z12, s.z23, h, CompetitorParams{}), StructureError);
}

TEST_CASE("upper bound formula") {
  AngleSet A;
  A.R = 30;
  A.a21 = M_PI / 2 + 0.1, A.abar = M_PI / 2, A.a32 = M_PI / 2 - 0.1;
  A.b12 = -M_PI / 2 - 0.1, A.bbar = -M_PI / 2, A.b23 = -M_PI / 2 + 0.1;
  const double d12 = 0.35, d23 = 0.36, base = d12 * A.L1() + d23 * A.L3();
  const BoundConstants k{0.7, 1.3};
  auto tail = [&](double ell, double rho, double sigma, double eta, double gamma) {
    const double e = std::exp(-k.c * ell);
    return rho * rho / sigma + sigma / rho * e + A.R * std::exp(-k.c * (ell + rho)) + eta * ell * e + e + gamma +
           eta * eta;
  };
  for (double ell : {2.0, 4.0})
    for (double rho : {0.5, 1.0, 3.0})
      for (double sigma : {1.0, 5.0}) {
        const double U = upper_bound_formula(A, ell, rho, sigma, 0.004, 0.01, k, d12, d23);
        CHECK(U == doctest::Approx(base + k.C * tail(ell, rho, sigma, 0.004, 0.01)).epsilon(1e-13));
      }
  // σ → 2σ halves ρ²/σ and doubles σ/ρ·e^{-cℓ}
  const double ell = 3, rho = 2, sg = 4;
  const double d = upper_bound_formula(A, ell, rho, 2 * sg, 0, 0, k, d12, d23) -
                   upper_bound_formula(A, ell, rho, sg, 0, 0, k, d12, d23);
  CHECK(d == doctest::Approx(k.C * (-rho * rho / (2 * sg) + sg / rho * std::exp(-k.c * ell))).epsilon(1e-10));
  // the perimeter term alone survives ℓ → ∞, ρ²/σ → 0, γ = η = 0
  CHECK(upper_bound_formula(A, 60, 1e-3, 1, 0, 0, k, d12, d23) == doctest::Approx(base).epsilon(1e-7));
  CHECK_THROWS_AS(upper_bound_formula(A, 3, 0, 1, 0, 0, k, d12, d23), DomainError);
}
