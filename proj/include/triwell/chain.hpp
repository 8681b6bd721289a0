#pragma once

// Newton solver for the discrete 1D Allen–Cahn energy
//   E = Σ_k ½|x_{k+1} - x_k|²/h + h(W_k + W_{k+1})/2
// with an arbitrary set of pinned nodes. Templated on the scalar so the same
// code runs in double and in quad precision.

#include "triwell/potential.hpp"

#include <cmath>
#include <vector>

namespace triwell {

struct ChainOptions {
  int max_iters = 400;
  double tol = 1e-9; // max over free nodes of |∂E/∂x_k| / (h·c_k)
};

struct ChainResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double energy = 0.0;
};

namespace detail {

template <typename S> bool spd_inverse(const Mat2T<S> &A, Mat2T<S> &inv) {
  const S det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  if (!(A(0, 0) > S(0)) || !(det > S(0))) return false;
  inv << A(1, 1) / det, -A(0, 1) / det, -A(1, 0) / det, A(0, 0) / det;
  return true;
}

} // namespace detail

template <typename S, typename Eval>
S chain_energy(Eval &&eval, S h, const std::vector<Vec2T<S>> &x) {
  S e = 0;
  const std::size_t n = x.size();
  std::vector<S> W(n);
  for (std::size_t k = 0; k < n; ++k) W[k] = eval(x[k]).W;
  for (std::size_t k = 0; k + 1 < n; ++k)
    e += S(0.5) * (x[k + 1] - x[k]).squaredNorm() / h + h * (W[k] + W[k + 1]) / 2;
  return e;
}

template <typename S, typename Eval>
ChainResult minimize_chain(Eval &&eval, S h, std::vector<Vec2T<S>> &x,
                           const std::vector<char> &pinned, const ChainOptions &opt = {}) {
  using std::abs;
  using V = Vec2T<S>;
  using M = Mat2T<S>;
  const std::size_t n = x.size();
  std::vector<V> g(n), step(n), y(n);
  std::vector<M> D(n), Dinv(n);
  std::vector<S> c(n, S(1));
  c.front() = c.back() = S(0.5);
  ChainResult res;

  auto gradient = [&](const std::vector<V> &z, bool with_hess) {
    S r = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto d = eval(z[k]);
      V gk = h * c[k] * d.grad;
      M Dk = h * c[k] * d.hess;
      if (k > 0) {
        gk += (z[k] - z[k - 1]) / h;
        Dk += M::Identity() / h;
      }
      if (k + 1 < n) {
        gk += (z[k] - z[k + 1]) / h;
        Dk += M::Identity() / h;
      }
      if (pinned[k]) {
        gk.setZero();
        Dk.setIdentity();
      }
      g[k] = gk;
      if (with_hess) D[k] = Dk;
      const S a = gk.template lpNorm<Eigen::Infinity>() / (h * c[k]);
      if (a > r) r = a;
    }
    return r;
  };

  // block LDLᵀ of (H + νI); off-diagonal blocks are -I/h unless a pin breaks them
  auto solve = [&](S nu) {
    const S off = S(-1) / h;
    std::vector<M> piv(n);
    std::vector<V> z(n);
    for (std::size_t k = 0; k < n; ++k) {
      M P = D[k];
      if (!pinned[k]) P += nu * M::Identity();
      V rhs = -g[k];
      const bool link = k > 0 && !pinned[k] && !pinned[k - 1];
      if (link) {
        P -= off * off * Dinv[k - 1];
        rhs -= off * (Dinv[k - 1] * z[k - 1]);
      }
      if (!detail::spd_inverse<S>(P, Dinv[k])) return false;
      piv[k] = P;
      z[k] = rhs;
    }
    for (std::size_t k = n; k-- > 0;) {
      V r = z[k];
      const bool link = k + 1 < n && !pinned[k] && !pinned[k + 1];
      if (link) r -= off * step[k + 1];
      step[k] = Dinv[k] * r;
      if (pinned[k]) step[k].setZero();
    }
    return true;
  };

  S E = chain_energy<S>(eval, h, x);
  S nu = 0;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    const S r = gradient(x, true);
    res.residual = double(r);
    if (r < S(opt.tol)) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      if (!solve(nu)) {
        nu = nu > 0 ? 4 * nu : S(1e-3) / h;
        continue;
      }
      S slope = 0;
      for (std::size_t k = 0; k < n; ++k) slope += g[k].dot(step[k]);
      S alpha = 1;
      for (int ls = 0; ls < 30; ++ls) {
        for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + alpha * step[k];
        const S Ey = chain_energy<S>(eval, h, y);
        if (Ey <= E + S(1e-4) * alpha * slope) {
          x.swap(y);
          E = Ey;
          accepted = true;
          break;
        }
        alpha /= 2;
      }
      if (!accepted) {
        // energy at round-off: accept a full Newton step that shrinks the residual
        for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + step[k];
        std::vector<V> gsave = g;
        if (gradient(y, false) < r) {
          x.swap(y);
          E = chain_energy<S>(eval, h, x);
          accepted = true;
        }
        g = gsave;
        if (!accepted) nu = nu > 0 ? 4 * nu : S(1e-3) / h;
      } else if (nu > 0) {
        nu /= 4;
        if (nu < S(1e-12) / h) nu = 0;
      }
    }
    if (!accepted) break;
  }
  res.iterations = it;
  res.energy = double(E);
  if (!res.converged) {
    const S r = gradient(x, false);
    res.residual = double(r);
    res.converged = r < S(opt.tol);
  }
  return res;
}

/// Convenience overload in double precision on a Path1D.
inline ChainResult minimize_chain(const Potential &pot, Path1D &path,
                                  const std::vector<char> &pinned, const ChainOptions &opt = {}) {
  auto eval = [&](const Vec2 &u) { return pot.derivatives(u); };
  return minimize_chain<double>(eval, path.h(), path.samples, pinned, opt);
}

/// E over the whole path, same discretization as the solver.
inline double energy_1d(const Potential &pot, const Path1D &path) {
  path.validate();
  auto eval = [&](const Vec2 &u) { return pot.derivatives(u); };
  return chain_energy<double>(eval, path.h(), path.samples);
}

} // namespace triwell
