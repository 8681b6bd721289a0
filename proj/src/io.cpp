#include "triwell/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

namespace triwell::io {

namespace {

template <class T> void put_le(std::ostream &os, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(b.data(), b.size());
}

template <class T> T get_le(std::istream &is) {
  std::array<char, sizeof(T)> b;
  if (!is.read(b.data(), b.size())) throw Error("truncated grid file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

std::ofstream open_out(const std::string &path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error("cannot write " + path);
  return os;
}

} // namespace

std::string num(double v) {
  std::array<char, 32> b;
  auto [p, ec] = std::to_chars(b.data(), b.data() + b.size(), v);
  return ec == std::errc() ? std::string(b.data(), p) : std::string("nan");
}

Json vec(const Vec2 &v) { return Json::array({v(0), v(1)}); }

void write_text(const std::string &path, const std::string &text) { open_out(path) << text; }

void write_json(const std::string &path, const Json &j) { open_out(path) << j.dump(2) << "\n"; }

void write_path_csv(const std::string &path, const Path1D &p) {
  auto os = open_out(path);
  os << "t,u1,u2\n";
  for (std::size_t k = 0; k < p.size(); ++k)
    os << num(p.t(k)) << ',' << num(p[k](0)) << ',' << num(p[k](1)) << '\n';
}

void write_grid_csv(const std::string &path, const disk::Field2D &f) {
  auto os = open_out(path);
  os << "x,y,u1,u2\n";
  for (int j = 0; j < f.N; ++j)
    for (int i = 0; i < f.N; ++i) {
      if (!f.mask[f.index(i, j)]) continue;
      const Vec2 &u = f.at(i, j);
      os << num(f.x(i)) << ',' << num(f.y(j)) << ',' << num(u(0)) << ',' << num(u(1)) << '\n';
    }
}

void write_grid_binary(const std::string &path, const disk::Field2D &f) {
  auto os = open_out(path, true);
  put_le<double>(os, f.R);
  put_le<double>(os, f.h);
  put_le<std::int64_t>(os, f.N);
  for (const auto &v : f.values) {
    put_le<double>(os, v(0));
    put_le<double>(os, v(1));
  }
}

Grid read_grid_binary(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  Grid g;
  g.R = get_le<double>(is);
  g.h = get_le<double>(is);
  g.n = get_le<std::int64_t>(is);
  if (g.n <= 0 || g.n > 100000) throw Error("bad grid size in " + path);
  g.values.resize(std::size_t(g.n * g.n));
  for (auto &v : g.values) {
    v(0) = get_le<double>(is);
    v(1) = get_le<double>(is);
  }
  return g;
}

} // namespace triwell::io
