#include "oracles.hpp"

#include <doctest.h>
#include <triwell/disk2d.hpp>
#include <triwell/io.hpp>

#include <filesystem>
#include <fstream>
#include <random>

using namespace triwell;
using namespace triwell::disk;

namespace {

const hetero::HeteroclinicProfile &z12() {
  static const auto z = hetero::solve_heteroclinic(builtin_degenerate_triple(2, 1), 1, 2, 20, 801);
  return z;
}

Field2D slab(const hetero::HeteroclinicProfile &z, double R, double h) {
  const auto tr = BoundaryTrace::from_function(R, std::size_t(std::lround(2 * M_PI * R / h)),
                                               [&](double th) { return z.eval(R * std::cos(th)); });
  Field2D f = Field2D::make(R, h, tr);
  f.fill([&](double x, double) { return z.eval(x); });
  return f;
}

Field2D constant(double R, double h, const Vec2 &v) {
  Field2D f = Field2D::make(R, h, BoundaryTrace::from_function(R, 64, [&](double) { return v; }));
  f.fill([&](double, double) { return v; });
  return f;
}

double angle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360 - d);
}

} // namespace

TEST_CASE("disk/rectangle areas") {
  CHECK(disk_rect_area(3, -5, 5, -5, 5) == doctest::Approx(M_PI * 9).epsilon(1e-13));
  CHECK(disk_rect_area(3, 0, 5, 0, 5) == doctest::Approx(M_PI * 9 / 4).epsilon(1e-13));
  CHECK(disk_rect_area(1, 2, 3, 0, 1) == 0);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-2.5, 2.5);
  for (int k = 0; k < 30; ++k) {
    double x0 = U(rng), x1 = U(rng), y0 = U(rng), y1 = U(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const double ref = oracle::area_by_sampling(2, x0, x1, y0, y1, 1500);
    CHECK(disk_rect_area(2, x0, x1, y0, y1) == doctest::Approx(ref).epsilon(3e-3).scale(1e-2));
  }
}

TEST_CASE("grid layout and pinning") {
  const Field2D f = constant(2, 0.1, Vec2(1, 0));
  CHECK(f.N == 41);
  CHECK(f.x(0) == doctest::Approx(-2));
  CHECK(f.x(40) == doctest::Approx(2));
  CHECK(f.boundary_ring.front() == f.boundary_ring.back());
  // every node next to an outside node is pinned
  for (int j = 1; j + 1 < f.N; ++j)
    for (int i = 1; i + 1 < f.N; ++i)
      if (f.mask[f.index(i, j)] && !f.mask[f.index(i + 1, j)]) CHECK(f.pinned[f.index(i, j)]);
  CHECK_FALSE(f.pinned[f.index(20, 20)]);
  CHECK_THROWS_AS(Field2D::make(1, 2, f.trace), DomainError);
}

TEST_CASE("trace interpolation is periodic") {
  const auto tr = BoundaryTrace::from_function(1, 360, [](double th) { return Vec2(std::cos(th), std::sin(th)); });
  CHECK((tr.at(M_PI) - tr.at(-M_PI)).norm() < 1e-12);
  CHECK((tr.at(0.3) - Vec2(std::cos(0.3), std::sin(0.3))).norm() < 1e-4);
  CHECK((tr.at(0.3 + 2 * M_PI) - tr.at(0.3)).norm() < 1e-12);
}

TEST_CASE("constant well field has zero energy") {
  const auto pot = builtin_degenerate_triple(2, 1);
  const auto e = energy_2d(pot, constant(5, 0.1, pot.well(1).position));
  CHECK(e.total == 0);
  CHECK(rescaled_energy(pot, constant(5, 0.1, pot.well(1).position), 5, {}) == 0);
}

TEST_CASE("slab energy against quadrature") {
  const auto pot = builtin_degenerate_triple(2, 1);
  const auto &z = z12();
  const double R = 20;
  const double ref = oracle::slab_energy(
      [&](double x) {
        const double e = 1e-4;
        const Vec2 d = (z.eval(x + e) - z.eval(x - e)) / (2 * e);
        return 0.5 * d.squaredNorm() + pot.W(z.eval(x));
      },
      R);
  const auto E = energy_2d(pot, slab(z, R, 0.05));
  CHECK(E.total == doctest::Approx(2 * R * std::sqrt(2) / 4).epsilon(0.3 / 14.14));
  CHECK(E.total == doctest::Approx(ref).epsilon(2e-3));
  CHECK(E.total == doctest::Approx(E.gradient_part + E.potential_part));
  CHECK(E.gradient_part > 0);
  CHECK(E.potential_part > 0);
}

TEST_CASE("double-well slab") {
  const auto pot = builtin_double_well();
  const auto z = hetero::solve_heteroclinic(pot, 1, 2, 20, 4001);
  const double R = 15;
  const double ref = oracle::slab_energy([](double x) { return std::pow(1 / std::cosh(x), 4); }, R);
  const auto E = energy_2d(pot, slab(z, R, 0.05));
  CHECK(E.total == doctest::Approx(40).epsilon(0.02));
  CHECK(E.total == doctest::Approx(ref).epsilon(2e-3));
}

TEST_CASE("second-order refinement") {
  const auto pot = builtin_degenerate_triple(2, 1);
  auto u = [](double x, double y) { return Vec2(0.5 * std::sin(x / 3), 0.3 * std::cos(y / 4)); };
  std::vector<double> E;
  for (double h : {0.2, 0.1, 0.05}) {
    const double R = 5;
    auto tr = BoundaryTrace::from_function(R, 4096, [&](double th) { return u(R * std::cos(th), R * std::sin(th)); });
    Field2D f = Field2D::make(R, h, tr);
    f.fill(u);
    for (int j = 0; j < f.N; ++j)
      for (int i = 0; i < f.N; ++i) f.at(i, j) = u(f.x(i), f.y(j));
    E.push_back(energy_2d(pot, f).total);
  }
  CHECK(std::abs(E[2] - E[1]) < 4 * std::abs(E[1] - E[0]));
}

TEST_CASE("row-parallel evaluation is bitwise stable") {
  const auto pot = builtin_degenerate_triple(2, 1);
  const Field2D f = slab(z12(), 10, 0.05);
  const auto a = energy_2d(pot, f, {}, 1), b = energy_2d(pot, f, {}, 3);
  CHECK(a.total == b.total);
}

TEST_CASE("rescaled energy") {
  const auto pot = builtin_degenerate_triple(2, 1);
  const double d12 = z12().connection_energy;
  std::vector<double> err;
  for (double R : {10.0, 20.0, 40.0}) {
    const Field2D f = slab(z12(), R, 0.05);
    const double ER = rescaled_energy(pot, f, R, {});
    CHECK(ER == doctest::Approx(d12).epsilon(1e-3));
    const double E = energy_on_rect(pot, f, {-R / 2, R / 2, -R / 2, R / 2});
    CHECK(std::abs(E - R * ER) <= 1e-8 * E);
  }
  CHECK_THROWS_AS(rescaled_energy(pot, slab(z12(), 10, 0.1), 10, {-1, 1, -1, 1.5}), DomainError);
}

TEST_CASE("sharp-interface energy") {
  const double d12 = 0.3, d23 = 0.4, d13 = 0.7;
  const Region disk{Region::Disk, {}, 1.0};
  CHECK(sharp_energy({{1, 2, Vec2(0, -1), Vec2(0, 1)}}, disk, d12, d23, d13) == doctest::Approx(2 * d12));
  CHECK(sharp_energy({}, disk, d12, d23, d13) == 0);
  const Region sq{Region::Rectangle, {-0.5, 0.5, -0.5, 0.5}, 0};
  CHECK(sharp_energy({{1, 2, Vec2(-0.2, -0.5), Vec2(-0.2, 0.5)}, {3, 2, Vec2(0.2, -0.5), Vec2(0.2, 0.5)}}, sq, d12,
                     d23, d13) == doctest::Approx(d12 + d23));
  // clipped to the square
  CHECK(sharp_energy({{1, 3, Vec2(0, -3), Vec2(0, 3)}}, sq, d12, d23, d13) == doctest::Approx(d13));
  CHECK_THROWS_AS(sharp_energy({{1, 4, Vec2(0, 0), Vec2(1, 0)}}, sq, d12, d23, d13), DomainError);
}

TEST_CASE("blow-down templates") {
  const auto pot = builtin_degenerate_triple(2, 1);
  const Vec2 p1 = pot.well(1).position, p2 = pot.well(2).position, p3 = pot.well(3).position;
  const double R = 20, h = 0.1;
  auto raster = [&](auto fn) {
    Field2D f = constant(R, h, p1);
    for (int j = 0; j < f.N; ++j)
      for (int i = 0; i < f.N; ++i) f.at(i, j) = fn(f.x(i), f.y(j));
    return f;
  };
  SUBCASE("H13") {
    const auto b = blowdown_distance(pot, raster([&](double x, double) { return x < 0 ? p1 : p3; }), R);
    CHECK(b.best_template == Template::H13);
    CHECK(angle_gap(b.best_rotation_deg, 0) < 1.0);
    CHECK(b.l1_distance < h);
  }
  SUBCASE("rotated H12") {
    const double c = std::cos(M_PI / 6), s = std::sin(M_PI / 6);
    const auto b = blowdown_distance(pot, raster([&](double x, double y) { return c * x + s * y < 0 ? p1 : p2; }), R);
    CHECK(b.best_template == Template::H12);
    CHECK(angle_gap(b.best_rotation_deg, 30) < 1.0);
    CHECK(b.l1_distance < 2 * h);
  }
  SUBCASE("profile slab") {
    const auto b = blowdown_distance(pot, slab(z12(), R, 0.05), R);
    CHECK(b.best_template == Template::H12);
    CHECK(angle_gap(b.best_rotation_deg, 0) < 1.0);
    CHECK(b.l1_distance < 2 / R);
  }
  CHECK_THROWS_AS(blowdown_distance(pot, constant(5, 0.1, p1), 6), DomainError);
}

TEST_CASE("binary and CSV grids") {
  const Field2D f = slab(z12(), 3, 0.25);
  const auto dir = std::filesystem::temp_directory_path() / "triwell_io_test";
  std::filesystem::create_directories(dir);
  io::write_grid_binary((dir / "g.bin").string(), f);
  const auto g = io::read_grid_binary((dir / "g.bin").string());
  CHECK(g.R == f.R);
  CHECK(g.h == f.h);
  CHECK(g.n == f.N);
  REQUIRE(g.values.size() == f.values.size());
  for (std::size_t k = 0; k < g.values.size(); ++k) CHECK(g.values[k] == f.values[k]);
  CHECK(std::filesystem::file_size(dir / "g.bin") == 24 + 16 * f.values.size());
  io::write_grid_csv((dir / "g.csv").string(), f);
  std::ifstream in(dir / "g.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,u1,u2");
  io::write_path_csv((dir / "p.csv").string(), z12().path);
  std::ifstream pin(dir / "p.csv");
  std::getline(pin, header);
  CHECK(header == "t,u1,u2");
  std::filesystem::remove_all(dir);
}
