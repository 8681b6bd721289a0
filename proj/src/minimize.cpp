#include "triwell/disk2d.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <thread>

namespace triwell::disk {

namespace {

class Assembler {
public:
  Assembler(const Potential &pot, Field2D &f, int workers) : pot_(pot), f_(f), workers_(workers) {
    const int N = f.N;
    const double h = f.h, R = f.R;
    cw_.assign(std::size_t(N - 1) * std::size_t(N - 1), 0.0);
    for (int j = 0; j + 1 < N; ++j)
      for (int i = 0; i + 1 < N; ++i) {
        const double x0 = f.x(i), y0 = f.y(j);
        const double fx = std::max(std::abs(x0), std::abs(x0 + h)), fy = std::max(std::abs(y0), std::abs(y0 + h));
        cw_[cell(i, j)] = fx * fx + fy * fy <= R * R ? 1.0 : disk_rect_area(R, x0, x0 + h, y0, y0 + h) / (h * h);
      }
    for (std::size_t k = 0; k < f.values.size(); ++k)
      if (!f.pinned[k]) free_.push_back(k);
    W_.resize(f.values.size());
    dW_.resize(f.values.size());
    grad_.resize(f.values.size());
    row_e_.resize(std::size_t(N));
  }

  std::size_t size() const { return 2 * free_.size(); }

  void get(std::vector<double> &x) const {
    x.resize(size());
    for (std::size_t q = 0; q < free_.size(); ++q) {
      x[2 * q] = f_.values[free_[q]](0);
      x[2 * q + 1] = f_.values[free_[q]](1);
    }
  }

  void set(const std::vector<double> &x) {
    for (std::size_t q = 0; q < free_.size(); ++q) f_.values[free_[q]] = Vec2(x[2 * q], x[2 * q + 1]);
  }

  // energy at the current field; fills g over free nodes when asked
  double eval(std::vector<double> *g) {
    const int N = f_.N;
    run(N, [&](int j0, int j1) {
      for (int j = j0; j < j1; ++j)
        for (int i = 0; i < N; ++i) {
          const std::size_t k = f_.index(i, j);
          const auto d = pot_.derivatives(f_.values[k]);
          W_[k] = d.W;
          dW_[k] = d.grad;
        }
    });
    const double h2 = f_.h * f_.h;
    run(N, [&](int j0, int j1) {
      for (int j = j0; j < j1; ++j) {
        double e = 0;
        if (j + 1 < N)
          for (int i = 0; i + 1 < N; ++i) {
            const double w = cw_[cell(i, j)];
            if (w <= 0) continue;
            const Vec2 &a = f_.at(i, j), &b = f_.at(i + 1, j), &c = f_.at(i, j + 1), &d = f_.at(i + 1, j + 1);
            e += w * (0.25 * ((b - a).squaredNorm() + (d - c).squaredNorm() + (c - a).squaredNorm() +
                              (d - b).squaredNorm()) +
                      0.25 * h2 * (W_[f_.index(i, j)] + W_[f_.index(i + 1, j)] + W_[f_.index(i, j + 1)] +
                                   W_[f_.index(i + 1, j + 1)]));
          }
        row_e_[std::size_t(j)] = e;
        if (!g) continue;
        for (int i = 0; i < N; ++i) {
          const std::size_t k = f_.index(i, j);
          if (f_.pinned[k]) continue;
          const Vec2 &u = f_.values[k];
          Vec2 acc = Vec2::Zero();
          // the four cells around (i, j); interior free nodes never touch the grid edge
          for (int di = -1; di <= 0; ++di)
            for (int dj = -1; dj <= 0; ++dj) {
              const double w = cw_[cell(i + di, j + dj)];
              if (w <= 0) continue;
              const int xi = di == 0 ? i + 1 : i - 1, yj = dj == 0 ? j + 1 : j - 1;
              acc += w * (0.5 * ((u - f_.at(xi, j)) + (u - f_.at(i, yj))) + 0.25 * h2 * dW_[k]);
            }
          grad_[k] = acc;
        }
      }
    });
    double E = 0;
    for (double e : row_e_) E += e;
    if (g) {
      g->resize(size());
      for (std::size_t q = 0; q < free_.size(); ++q) {
        (*g)[2 * q] = grad_[free_[q]](0);
        (*g)[2 * q + 1] = grad_[free_[q]](1);
      }
    }
    return E;
  }

private:
  std::size_t cell(int i, int j) const { return std::size_t(j) * std::size_t(f_.N - 1) + std::size_t(i); }

  template <class Fn> void run(int count, Fn &&fn) {
    const int nw = std::max(1, std::min(workers_, count));
    if (nw == 1) return fn(0, count);
    std::vector<std::thread> th;
    for (int w = 0; w < nw; ++w) th.emplace_back(fn, count * w / nw, count * (w + 1) / nw);
    for (auto &t : th) t.join();
  }

  const Potential &pot_;
  Field2D &f_;
  int workers_;
  std::vector<double> cw_, W_, row_e_;
  std::vector<Vec2> dW_, grad_;
  std::vector<std::size_t> free_;
};

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double sup_node(const std::vector<double> &g) {
  double m = 0;
  for (std::size_t k = 0; k + 1 < g.size(); k += 2) m = std::max(m, std::hypot(g[k], g[k + 1]));
  return m;
}

struct LevelResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0;
  std::vector<double> history;
};

LevelResult lbfgs(Assembler &as, double h, const MinimizeOptions &opt) {
  LevelResult lr;
  std::vector<double> x, g, xn, gn, p;
  as.get(x);
  if (x.empty()) {
    lr.converged = true;
    lr.history.push_back(as.eval(nullptr));
    return lr;
  }
  double E = as.eval(&g);
  lr.history.push_back(E);
  std::deque<std::pair<std::vector<double>, std::vector<double>>> mem;
  std::deque<double> rho;
  bool fresh = true;
  for (int it = 0;; ++it) {
    lr.residual = sup_node(g) / (h * h);
    if (lr.residual <= opt.tol_opt) {
      lr.converged = true;
      break;
    }
    if (it >= opt.max_iters) break;
    // two-loop recursion
    p = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t m = mem.size(); m-- > 0;) {
      alpha[m] = rho[m] * dot(mem[m].first, p);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= alpha[m] * mem[m].second[k];
    }
    const double gamma = mem.empty() ? 0.1 : dot(mem.back().first, mem.back().second) /
                                                 dot(mem.back().second, mem.back().second);
    for (double &v : p) v *= gamma;
    for (std::size_t m = 0; m < mem.size(); ++m) {
      const double b = rho[m] * dot(mem[m].second, p);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] += (alpha[m] - b) * mem[m].first[k];
    }
    for (double &v : p) v = -v;
    double slope = dot(g, p);
    if (!(slope < 0)) {
      mem.clear();
      rho.clear();
      p = g;
      for (double &v : p) v *= -0.1;
      slope = dot(g, p);
      fresh = true;
    }
    double step = 1.0, En = E;
    bool ok = false;
    xn.resize(x.size());
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t k = 0; k < x.size(); ++k) xn[k] = x[k] + step * p[k];
      as.set(xn);
      En = as.eval(&gn);
      if (En <= E + 1e-4 * step * slope) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) {
      as.set(x);
      if (fresh) break; // steepest descent cannot decrease the energy any further
      mem.clear();
      rho.clear();
      fresh = true;
      as.eval(&g);
      continue;
    }
    std::vector<double> s(x.size()), y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      s[k] = xn[k] - x[k];
      y[k] = gn[k] - g[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-300) {
      mem.emplace_back(std::move(s), std::move(y));
      rho.push_back(1.0 / sy);
      if (int(mem.size()) > opt.memory) {
        mem.pop_front();
        rho.pop_front();
      }
    }
    fresh = false;
    x.swap(xn);
    g.swap(gn);
    E = En;
    lr.history.push_back(E);
    lr.iterations = it + 1;
  }
  as.set(x);
  return lr;
}

} // namespace

MinimizeResult minimize_field(const Potential &pot, const BoundaryTrace &trace, double R, double h,
                              const std::function<Vec2(double, double)> &init,
                              const MinimizeOptions &opt,
                              const std::function<bool(double, double)> &extra_pin) {
  if (std::abs(trace.R - R) > 1e-9 * R) throw DomainError("trace radius differs from R");
  if (opt.levels < 1 || opt.max_iters < 0 || !(opt.tol_opt > 0) || opt.memory < 1)
    throw ConfigurationError("invalid minimizer options");
  MinimizeResult res;
  std::optional<Field2D> prev;
  int first = opt.levels - 1;
  while (first > 0 && R / (h * std::ldexp(1.0, first)) < 8) --first;
  res.converged = true;
  for (int lev = first; lev >= 0; --lev) {
    Field2D f = Field2D::make(R, h * std::ldexp(1.0, lev), trace);
    if (prev) {
      const Field2D &c = *prev;
      f.fill([&](double x, double y) { return c.sample(Vec2(x, y)); });
    } else {
      f.fill(init);
    }
    if (extra_pin)
      for (int j = 0; j < f.N; ++j)
        for (int i = 0; i < f.N; ++i) {
          const std::size_t k = f.index(i, j);
          if (f.pinned[k] || !extra_pin(f.x(i), f.y(j))) continue;
          f.pinned[k] = 1;
          f.values[k] = init(f.x(i), f.y(j));
        }
    Assembler as(pot, f, opt.workers);
    LevelResult lr = lbfgs(as, f.h, opt);
    res.iterations += lr.iterations;
    res.history.push_back(std::move(lr.history));
    if (lev == 0) {
      res.converged = lr.converged;
      res.residual = lr.residual;
    }
    prev = std::move(f);
  }
  res.field = std::move(*prev);
  res.energy = energy_2d(pot, res.field, {}, opt.workers);
  return res;
}

} // namespace triwell::disk
