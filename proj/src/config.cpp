#include "triwell/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace triwell::cli {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char b[32];
  auto [p, ec] = std::to_chars(b, b + sizeof b, v);
  return ec == std::errc() ? std::string(b, p) : "nan";
}

std::string fmt(const std::vector<double> &v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
  return s;
}

// One binding per accepted key: parse from text, print back for snapshots.
struct Binding {
  std::function<void(const std::string &)> set;
  std::function<std::string()> get;
};

double parse_double(const std::string &s) {
  double v = 0;
  const char *b = s.data(), *e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

Binding bind(double &x) {
  return {[&x](const std::string &s) { x = parse_double(s); }, [&x] { return fmt(x); }};
}

Binding bind(int &x) {
  return {[&x](const std::string &s) {
            int v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
              throw std::invalid_argument("expected an integer, got '" + s + "'");
            x = v;
          },
          [&x] { return std::to_string(x); }};
}

Binding bind(bool &x) {
  return {[&x](const std::string &s) {
            if (s == "true" || s == "1" || s == "yes") x = true;
            else if (s == "false" || s == "0" || s == "no") x = false;
            else throw std::invalid_argument("expected true/false, got '" + s + "'");
          },
          [&x] { return std::string(x ? "true" : "false"); }};
}

Binding bind(std::string &x) {
  return {[&x](const std::string &s) { x = s; }, [&x] { return x; }};
}

Binding bind(std::vector<double> &x) {
  return {[&x](const std::string &s) {
            std::vector<double> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
            if (out.empty()) throw std::invalid_argument("expected a comma-separated list");
            x = std::move(out);
          },
          [&x] { return fmt(x); }};
}

using Schema = std::map<std::string, std::map<std::string, Binding>>;

Schema schema(RunConfig &c) {
  Schema s;
  auto &p = s["potential"];
  p["family"] = bind(c.potential.family);
  p["lambda"] = bind(c.potential.lambda);
  p["mu"] = bind(c.potential.mu);
  p["c"] = bind(c.potential.c);
  p["l1"] = bind(c.potential.l1);
  p["l2"] = bind(c.potential.l2);
  p["angle"] = bind(c.potential.angle);
  auto &m = s["metric"];
  m["n"] = bind(c.metric.n);
  m["n_coarse"] = bind(c.metric.n_coarse);
  m["multistart"] = bind(c.metric.multistart);
  m["max_iters"] = bind(c.metric.max_iters);
  m["tol_grad"] = bind(c.metric.tol_grad);
  m["eta"] = bind(c.metric.eta);
  auto &h = s["heteroclinic"];
  h["L"] = bind(c.heteroclinic.L);
  h["n"] = bind(c.heteroclinic.n);
  h["tol"] = bind(c.heteroclinic.tol);
  h["max_iters"] = bind(c.heteroclinic.max_iters);
  h["spectrum_k"] = bind(c.heteroclinic.spectrum_k);
  h["spectrum_tol"] = bind(c.heteroclinic.spectrum_tol);
  auto &t = s["structure1d"];
  t["R"] = bind(c.structure1d.R);
  t["h"] = bind(c.structure1d.h);
  t["shift"] = bind(c.structure1d.shift);
  t["ell"] = bind(c.structure1d.ell);
  t["endwell_R"] = bind(c.structure1d.endwell_R);
  t["endwell_h"] = bind(c.structure1d.endwell_h);
  t["endwell_ref"] = bind(c.structure1d.endwell_ref);
  t["endwell_x"] = bind(c.structure1d.endwell_x);
  t["endwell_y"] = bind(c.structure1d.endwell_y);
  t["penalty_R"] = bind(c.structure1d.penalty_R);
  t["penalty_h"] = bind(c.structure1d.penalty_h);
  t["deltas"] = bind(c.structure1d.deltas);
  t["calib_R"] = bind(c.structure1d.calib_R);
  t["check_R"] = bind(c.structure1d.check_R);
  auto &d = s["disk"];
  d["R"] = bind(c.disk.R);
  d["h"] = bind(c.disk.h);
  d["trace_h"] = bind(c.disk.trace_h);
  d["eps"] = bind(c.disk.eps);
  d["trace_ell"] = bind(c.disk.trace_ell);
  d["ell"] = bind(c.disk.ell);
  d["ells"] = bind(c.disk.ells);
  d["rho"] = bind(c.disk.rho);
  d["sigma"] = bind(c.disk.sigma);
  d["C_pre"] = bind(c.disk.C_pre);
  d["eps_max"] = bind(c.disk.eps_max);
  d["gamma"] = bind(c.disk.gamma);
  d["calib_R"] = bind(c.disk.calib_R);
  auto &n = s["minimize"];
  n["h"] = bind(c.minimize.h);
  n["tol_opt"] = bind(c.minimize.tol_opt);
  n["max_iters"] = bind(c.minimize.max_iters);
  n["levels"] = bind(c.minimize.levels);
  n["memory"] = bind(c.minimize.memory);
  n["init_kappa"] = bind(c.minimize.init_kappa);
  n["band"] = bind(c.minimize.band);
  auto &sl = s["slicing"];
  sl["n_slices"] = bind(c.slicing.n_slices);
  sl["R0"] = bind(c.slicing.R0);
  sl["lipschitz_pairs"] = bind(c.slicing.lipschitz_pairs);
  auto &b = s["blowdown"];
  b["R_scale"] = bind(c.blowdown.R_scale);
  b["samples"] = bind(c.blowdown.samples);
  b["slab_R"] = bind(c.blowdown.slab_R);
  b["slab_h"] = bind(c.blowdown.slab_h);
  auto &k = s["calibration"];
  k["upper_C"] = bind(c.calibration.upper_C);
  k["upper_c"] = bind(c.calibration.upper_c);
  k["slice_c"] = bind(c.calibration.slice_c);
  k["final_c"] = bind(c.calibration.final_c);
  k["final_C"] = bind(c.calibration.final_C);
  k["tail_C"] = bind(c.calibration.tail_C);
  k["tail_c"] = bind(c.calibration.tail_c);
  k["split_C"] = bind(c.calibration.split_C);
  k["split_c"] = bind(c.calibration.split_c);
  auto &o = s["output"];
  o["csv"] = bind(c.output.csv);
  o["binary"] = bind(c.output.binary);
  return s;
}

} // namespace

ConfigFile ConfigFile::parse(std::istream &in, const std::string &name) {
  ConfigFile f;
  f.name = name;
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ConfigError(name, line, "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(name, line, "empty section name");
      f.sections[section];
      f.section_lines.emplace(section, line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(name, line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(name, line, "missing key before '='");
    if (value.empty()) throw ConfigError(name, line, "missing value for '" + key + "'");
    if (section.empty()) throw ConfigError(name, line, "key '" + key + "' outside any [section]");
    auto &sec = f.sections[section];
    if (sec.count(key))
      throw ConfigError(name, line, "duplicate key '" + key + "' (first on line " +
                                        std::to_string(sec[key].line) + ")");
    sec[key] = {value, line};
  }
  return f;
}

ConfigFile ConfigFile::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open configuration file");
  return parse(in, path);
}

RunConfig RunConfig::from(const ConfigFile &file) {
  RunConfig c;
  Schema s = schema(c);
  for (const auto &[sec, entries] : file.sections) {
    auto it = s.find(sec);
    if (it == s.end()) {
      const auto hl = file.section_lines.find(sec);
      const int line = hl != file.section_lines.end() ? hl->second : 0;
      throw ConfigError(file.name, line, "unknown section [" + sec + "]");
    }
    for (const auto &[key, e] : entries) {
      auto b = it->second.find(key);
      if (b == it->second.end()) throw ConfigError(file.name, e.line, "unknown key '" + key + "' in [" + sec + "]");
      try {
        b->second.set(e.value);
      } catch (const std::exception &ex) {
        throw ConfigError(file.name, e.line, sec + "." + key + ": " + ex.what());
      }
    }
  }
  return c;
}

std::string RunConfig::snapshot() const {
  RunConfig copy = *this;
  std::string out;
  for (const auto &[sec, keys] : schema(copy))
    for (const auto &[key, b] : keys) out += sec + "." + key + " = " + b.get() + "\n";
  return out;
}

} // namespace triwell::cli
