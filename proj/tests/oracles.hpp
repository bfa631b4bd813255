#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library beyond reading plain data off Space and field objects.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pqm/calculus.hpp"

namespace oracle {

/// Thomas algorithm for a tridiagonal system: sub a, diag b, super c.
inline std::vector<double> thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                  std::vector<double> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

/// One implicit-Euler heat step on a path graph listed in vertex order:
/// mu_i (w_i - prev_i)/dt + sum_e m_e/l_e^2 (w_i - w_j) = 0 inside,
/// w = boundary on the two ends.
inline std::vector<double> implicit_heat_step(const pqm::mesh::Space& s, const std::vector<double>& prev,
                                              double left, double right, double dt) {
  const std::size_t n = s.vertex_count();
  const std::size_t m = n - 2;
  std::vector<double> a(m, 0.0), b(m, 0.0), c(m, 0.0), d(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = r + 1;
    b[r] = s.measure(i) / dt;
    d[r] = s.measure(i) * prev[i] / dt;
  }
  for (const auto& e : s.edges()) {
    const std::size_t lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
    const double k = e.measure / (e.length * e.length);
    const double bl = lo == 0 ? left : 0.0;
    const double br = hi == n - 1 ? right : 0.0;
    if (lo >= 1 && lo <= m) b[lo - 1] += k;
    if (hi >= 1 && hi <= m) b[hi - 1] += k;
    if (lo >= 1 && hi <= m) {
      c[lo - 1] -= k;
      a[hi - 1] -= k;
    }
    if (lo == 0 && hi <= m) d[hi - 1] += k * bl;
    if (hi == n - 1 && lo >= 1) d[lo - 1] += k * br;
  }
  auto x = thomas(a, b, c, d);
  std::vector<double> w(n);
  w[0] = left;
  w[n - 1] = right;
  for (std::size_t r = 0; r < m; ++r) w[r + 1] = x[r];
  return w;
}

struct Terms {
  double A = 0.0, B = 0.0, C = 0.0;
};

/// Energy sums over a node set written from the definitions directly:
/// central differences for phi_t (one-sided at the ends), region edges are
/// those with both endpoints inside.
inline Terms energy(const pqm::calculus::SpaceTimeField& u, const pqm::calculus::SpaceTimeField& phi,
                    const pqm::calculus::NodeSet& set, double p) {
  const auto& s = u.space();
  const std::size_t N = u.grid().steps();
  const double dt = u.grid().horizon() / static_cast<double>(N);
  Terms t;
  for (std::size_t k = 0; k <= N; ++k) {
    for (std::size_t i = 0; i < s.vertex_count(); ++i) {
      if (!set.contains(k, i)) continue;
      double pt;
      if (k == 0) pt = (phi(1, i) - phi(0, i)) / dt;
      else if (k == N) pt = (phi(N, i) - phi(N - 1, i)) / dt;
      else pt = (phi(k + 1, i) - phi(k - 1, i)) / (2 * dt);
      t.A += u(k, i) * pt * s.measure(i) * dt;
    }
    for (const auto& e : s.edges()) {
      if (!set.contains(k, e.u) || !set.contains(k, e.v)) continue;
      const double gu = std::fabs(u(k, e.u) - u(k, e.v)) / e.length;
      const double gw = std::fabs(u(k, e.u) + phi(k, e.u) - u(k, e.v) - phi(k, e.v)) / e.length;
      t.B += std::pow(gu, p) * e.measure * dt;
      t.C += std::pow(gw, p) * e.measure * dt;
    }
  }
  return t;
}

/// Floyd-Warshall all-pairs distances from the edge list.
inline std::vector<std::vector<double>> distances(const pqm::mesh::Space& s) {
  const std::size_t n = s.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : s.edges()) {
    d[e.u][e.v] = std::min(d[e.u][e.v], e.length);
    d[e.v][e.u] = std::min(d[e.v][e.u], e.length);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline double ball_measure(const pqm::mesh::Space& s, const std::vector<std::vector<double>>& d, std::size_t x,
                           double r) {
  double m = 0.0;
  for (std::size_t y = 0; y < s.vertex_count(); ++y)
    if (d[x][y] < r * (1.0 - 1e-12)) m += s.measure(y);
  return m;
}

inline double doubling(const pqm::mesh::Space& s, const std::vector<double>& radii) {
  const auto d = distances(s);
  double best = 1.0;
  for (std::size_t x = 0; x < s.vertex_count(); ++x)
    for (double r : radii) best = std::max(best, ball_measure(s, d, x, 2 * r) / ball_measure(s, d, x, r));
  return best;
}

inline double heat_mode(double a, double x, double t) {
  return std::exp(-a * std::numbers::pi * std::numbers::pi * t) * std::sin(std::numbers::pi * x);
}

}  // namespace oracle
