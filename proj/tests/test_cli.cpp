#include <doctest.h>
#include <triwell/io.hpp>


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string bin = TRIWELL_BIN;
const std::string quick = std::string(TRIWELL_CONFIGS) + "/quick.ini";

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("triwell_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string &args, const std::string &env = "") {
  const std::string cmd = env + " " + bin + " " + args + " > " + (scratch() / "stdout").string() + " 2> " +
                          (scratch() / "stderr").string();
  const int s = std::system(cmd.c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// quick.ini with one line swapped
fs::path variant(const std::string &name, const std::string &from, const std::string &to) {
  std::string text = slurp(quick);
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  text.replace(at, from.size(), to);
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

} // namespace

TEST_CASE("usage errors") {
  CHECK(run("") == 64);
  CHECK(run("validate") == 64);
  CHECK(run("bogus --config " + quick) == 64);
  CHECK(slurp(scratch() / "stderr").find("unknown experiment") != std::string::npos);
  CHECK(run("validate --config " + quick + " --workers 0") == 64);
}

TEST_CASE("malformed configuration") {
  const auto p = variant("bad.ini", "n_slices = 100", "n_slices 100");
  CHECK(run("validate --config " + p.string()) == 65);
  const std::string err = slurp(scratch() / "stderr");
  CHECK(err.find("bad.ini:") != std::string::npos);
  const auto q = variant("unknown.ini", "n_slices = 100", "slices = 100");
  CHECK(run("validate --config " + q.string()) == 65);
  CHECK(slurp(scratch() / "stderr").find("unknown key 'slices'") != std::string::npos);
  CHECK(run("validate --config " + (scratch() / "missing.ini").string()) == 65);
}

TEST_CASE("validate run and outputs") {
  const auto out = scratch() / "out";
  REQUIRE(run("validate --config " + quick + " --out " + out.string()) == 0);
  const auto report = triwell::io::Json::parse(slurp(out / "validate" / "report.json"));
  CHECK(report["status"] == 0);
  CHECK(report.dump().find("timing") == std::string::npos);
  const auto manifest = triwell::io::Json::parse(slurp(out / "validate" / "manifest.json"));
  CHECK(manifest["experiment"] == "validate");
  CHECK(manifest["workers"] == 1);
  CHECK(manifest.contains("timings"));
  CHECK(manifest.contains("versions"));
  bool has_radius = false;
  for (const auto &l : manifest["config"]) has_radius = has_radius || l == "disk.R = 16";
  CHECK(has_radius);
}

TEST_CASE("output root from the environment") {
  const auto out = scratch() / "env_out";
  REQUIRE(run("distances --config " + quick, "TRIWELL_OUT=" + out.string()) == 0);
  CHECK(fs::exists(out / "distances" / "report.json"));
}

TEST_CASE("field artefacts") {
  const auto out = scratch() / "grids";
  REQUIRE(run("disk-upper --config " + quick + " --out " + out.string()) == 0);
  bool csv = false, bin_found = false;
  for (const auto &e : fs::directory_iterator(out / "disk-upper")) {
    const auto ext = e.path().extension();
    if (ext == ".csv" && slurp(e.path()).rfind("x,y,u1,u2\n", 0) == 0) csv = true;
    if (ext == ".bin") {
      const auto g = triwell::io::read_grid_binary(e.path().string());
      CHECK(g.R == 16);
      CHECK(g.h == doctest::Approx(0.1));
      CHECK(g.values.size() == std::size_t(g.n) * std::size_t(g.n));
      bin_found = true;
    }
  }
  CHECK(csv);
  CHECK(bin_found);
}

TEST_CASE("failure exits") {
  // walls planted closer than their truncation: boundary energy precondition
  const auto pre = variant("pre.ini", "[disk]\nR = 16", "[disk]\nR = 8");
  CHECK(run("disk-upper --config " + pre.string() + " --out " + (scratch() / "pre").string()) == 2);
  const auto report = triwell::io::Json::parse(slurp(scratch() / "pre" / "disk-upper" / "report.json"));
  CHECK(report["status"] == 2);
  CHECK(report.contains("error"));
  const auto slow = variant("slow.ini", "max_iters = 5000", "max_iters = 3");
  CHECK(run("disk-minimize --config " + slow.string() + " --out " + (scratch() / "slow").string()) == 3);
}

TEST_CASE("worker count does not change reports") {
  struct Cleanup {
    ~Cleanup() { fs::remove_all(scratch()); }
  } cleanup;
  const auto a = scratch() / "w1", b = scratch() / "w2";
  REQUIRE(run("disk-minimize --config " + quick + " --out " + a.string()) == 0);
  REQUIRE(run("disk-minimize --config " + quick + " --out " + b.string() + " --workers 2") == 0);
  CHECK(slurp(a / "disk-minimize" / "report.json") == slurp(b / "disk-minimize" / "report.json"));
}
