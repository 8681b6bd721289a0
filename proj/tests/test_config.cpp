#include <doctest.h>
#include <triwell/config.hpp>

#include <sstream>

using namespace triwell::cli;

namespace {

RunConfig parse(const std::string &text) {
  std::istringstream in(text);
  return RunConfig::from(ConfigFile::parse(in, "t.ini"));
}

int error_line(const std::string &text) {
  try {
    parse(text);
  } catch (const ConfigError &e) {
    return e.line();
  }
  return -1;
}

} // namespace

TEST_CASE("values, lists, comments") {
  const auto c = parse("# header\n"
                       "[disk]\n"
                       "R = 25   # radius\n"
                       "ells = 2, 3.5 ,4\n"
                       "; other comment style\n"
                       "[output]\n"
                       "csv = false\n"
                       "[minimize]\n"
                       "levels=2\n");
  CHECK(c.disk.R == 25);
  CHECK(c.disk.ells == std::vector<double>{2, 3.5, 4});
  CHECK_FALSE(c.output.csv);
  CHECK(c.minimize.levels == 2);
  // untouched keys keep their defaults
  CHECK(c.disk.h == RunConfig{}.disk.h);
  CHECK(c.potential.family == "degenerate_triple");
}

TEST_CASE("malformed lines carry their line number") {
  CHECK(error_line("[disk]\nR = 1\n[oops\n") == 3);
  CHECK(error_line("[disk]\nR 1\n") == 2);
  CHECK(error_line("[disk]\n = 1\n") == 2);
  CHECK(error_line("[disk]\nR =\n") == 2);
  CHECK(error_line("R = 1\n[disk]\n") == 1);
  CHECK(error_line("[disk]\nR = 1\n\nR = 2\n") == 4);
  CHECK(error_line("[]\n") == 1);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK(error_line("[disk]\nR = 1\nradius = 3\n") == 3);
  CHECK(error_line("[disk]\nR = 1\n\n[bogus]\nx = 1\n") == 4);
  CHECK(error_line("[disk]\nR = abc\n") == 2);
  CHECK(error_line("[minimize]\nlevels = 2.5\n") == 2);
  CHECK(error_line("[output]\ncsv = maybe\n") == 2);
  CHECK(error_line("[disk]\nells = 1,,2\n") == 2);
  try {
    parse("[disk]\nradius = 3\n");
    FAIL("no error");
  } catch (const ConfigError &e) {
    const std::string what = e.what();
    CHECK(what.find("t.ini:2") != std::string::npos);
    CHECK(what.find("radius") != std::string::npos);
  }
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/triwell.ini"), ConfigError);
}

TEST_CASE("snapshot") {
  const auto c = parse("[disk]\nR = 12.5\nells = 2, 3\n[minimize]\ntol_opt = 1e-7\n");
  const std::string s = c.snapshot();
  CHECK(s.find("disk.R = 12.5\n") != std::string::npos);
  CHECK(s.find("disk.ells = 2, 3\n") != std::string::npos);
  CHECK(s.find("minimize.tol_opt = 1e-07\n") != std::string::npos);
  // sorted, one key per line, and a fixed point of parse ∘ snapshot
  std::istringstream lines(s);
  std::string line, prev, text, section;
  while (std::getline(lines, line)) {
    CHECK(prev < line);
    prev = line;
    const auto dot = line.find('.');
    const std::string sec = line.substr(0, dot);
    if (sec != section) text += "[" + (section = sec) + "]\n";
    text += line.substr(dot + 1) + "\n";
  }
  CHECK(parse(text).snapshot() == s);
}
