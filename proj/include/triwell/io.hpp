#pragma once

#include "triwell/disk2d.hpp"

#include <json.hpp>

#include <string>

namespace triwell::io {

using Json = nlohmann::ordered_json;

Json vec(const Vec2 &v);
/// Shortest round-trip decimal form.
std::string num(double v);

void write_text(const std::string &path, const std::string &text);
/// Pretty-printed, trailing newline; byte-stable for equal inputs.
void write_json(const std::string &path, const Json &j);
/// Columns t,u1,u2.
void write_path_csv(const std::string &path, const Path1D &p);
/// Columns x,y,u1,u2 over the disk nodes.
void write_grid_csv(const std::string &path, const disk::Field2D &f);

/// Little-endian: float64 R, float64 h, int64 n (nodes per side), then n·n
/// (u1, u2) float64 pairs, row-major with x fastest.
void write_grid_binary(const std::string &path, const disk::Field2D &f);

struct Grid {
  double R = 0, h = 0;
  std::int64_t n = 0;
  std::vector<Vec2> values;
};
Grid read_grid_binary(const std::string &path);

} // namespace triwell::io
