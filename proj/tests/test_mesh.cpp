#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pqm/errors.hpp"
#include "pqm/mesh.hpp"

using namespace pqm;
using namespace pqm::mesh;

namespace {

std::vector<double> xs(const Space& s, double (*f)(double)) {
  std::vector<double> v;
  for (const auto& vx : s.vertices()) v.push_back(f(vx.coords[0]));
  return v;
}

Space exponential_path(std::size_t n) {
  std::vector<Vertex> vs;
  std::vector<Edge> es;
  for (std::size_t i = 0; i < n; ++i) {
    vs.push_back({std::to_string(i), std::ldexp(1.0, static_cast<int>(i)), {static_cast<double>(i)}});
    if (i) es.push_back({i - 1, i, 1.0, 1.0});
  }
  return Space(vs, es, {0, n - 1});
}

std::vector<double> members_at(const Space& s, const Ball& b) {
  std::vector<double> x;
  for (auto m : b.members) x.push_back(s.vertex(m).coords[0]);
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

TEST_CASE("interval mesh construction") {
  const auto two = build_interval_mesh(2, 1.0);
  CHECK(two.edge_count() == 1);
  CHECK(two.edge(0).length == 1.0);
  CHECK(two.measure(0) == 0.5);
  CHECK(two.measure(1) == 0.5);

  const auto five = build_interval_mesh(5, 1.0);
  CHECK(five.total_measure() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(five.edge(0).length == 0.25);

  const auto big = build_interval_mesh(101, 1.0);
  double em = 0.0;
  for (const auto& e : big.edges()) em += e.measure;
  CHECK(em == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(big.distance(0, 100) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(big.boundary().size() == 2);
  CHECK(big.is_boundary(0));
  CHECK(big.is_boundary(100));
  CHECK_FALSE(big.is_boundary(50));

  CHECK_THROWS_AS(build_interval_mesh(1, 1.0), ParameterError);
  CHECK_THROWS_AS(build_interval_mesh(5, 0.0), ParameterError);
  CHECK_THROWS_AS(build_interval_mesh(5, -1.0), ParameterError);
}

TEST_CASE("open balls") {
  const auto s = build_interval_mesh(5, 1.0);
  CHECK(members_at(s, ball(s, 2, 0.3)) == std::vector<double>{0.25, 0.5, 0.75});
  CHECK(ball(s, 2, 10.0).members.size() == 5);
  CHECK(members_at(s, ball(s, 0, 0.26)) == std::vector<double>{0.0, 0.25});
  // strict inequality: the sphere is excluded
  CHECK(members_at(s, ball(s, 0, 0.25)) == std::vector<double>{0.0});
  const auto b = ball(s, 2, 0.3);
  CHECK(b.measure == doctest::Approx(0.75));
  CHECK_THROWS_AS(ball(s, 7, 0.3), ParameterError);
  CHECK_THROWS_AS(ball(s, 2, 0.0), ParameterError);
}

TEST_CASE("space validation lists every issue") {
  std::vector<Vertex> vs{{"a", 1.0, {}}, {"b", -1.0, {}}, {"c", 1.0, {}}};
  std::vector<Edge> es{{0, 0, 1.0, 1.0}, {0, 1, 0.0, 1.0}};
  try {
    Space s(vs, es, {5});
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(e.issues().size() >= 4);  // measure, self loop, length, boundary, disconnected
  }
}

TEST_CASE("space json round trip and loader errors") {
  const auto s = build_interval_mesh(4, 1.0);
  std::stringstream ss;
  save_space_json(ss, s);
  const auto t = load_space_json(ss);
  CHECK(t.vertex_count() == 4);
  CHECK(t.edge_count() == 3);
  CHECK(t.distance(0, 3) == doctest::Approx(1.0));
  CHECK(t.boundary().size() == 2);

  std::stringstream bad(R"({"vertices":[{"id":"a","measure":1},{"id":"b"}],"edges":[{"u":"a","v":"z","length":1,"measure":1}],"boundary":["q"]})");
  try {
    load_space_json(bad);
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(e.issues().size() >= 3);
  }
  std::stringstream junk("{not json");
  CHECK_THROWS_AS(load_space_json(junk), LoadError);
}

TEST_CASE("time grid") {
  const TimeGrid g(1.0, 256);
  CHECK(g.slices() == 257);
  CHECK(g.dt() == 1.0 / 256);
  CHECK(g.time(256) == 1.0);
  CHECK(g.weight(0) == g.dt() / 2);
  CHECK(g.weight(5) == g.dt());
  CHECK_THROWS_AS(TimeGrid(1.0, 1), ParameterError);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), ParameterError);
}

TEST_CASE("doubling estimator") {
  const Space single({{"x", 3.0, {}}}, {}, {});
  const std::vector<double> r{0.1, 1.0};
  CHECK(estimate_doubling(single, r).constant == 1.0);

  const auto s = build_interval_mesh(101, 1.0);
  const std::vector<double> radii{0.05, 0.1, 0.2};
  const double c = estimate_doubling(s, radii).constant;
  CHECK(c >= 2.0);
  CHECK(c <= 2.3);
  CHECK(c == doctest::Approx(oracle::doubling(s, radii)).epsilon(1e-14));

  const auto e = exponential_path(11);
  const std::vector<double> er{0.5, 1.0, 1.5, 2.0, 3.0};
  const double ce = estimate_doubling(e, er).constant;
  CHECK(ce > 2.5);
  CHECK(ce == doctest::Approx(oracle::doubling(e, er)).epsilon(1e-14));
}

TEST_CASE("poincare estimator") {
  const auto s = build_interval_mesh(101, 1.0);
  const std::vector<std::vector<double>> constant{std::vector<double>(101, 3.0)};
  const std::vector<double> r{0.1, 0.5};
  CHECK(estimate_poincare(s, 2.0, 1.0, constant, r).constant == 0.0);

  // u = x on B(0.5, 0.5): mean deviation 0.25, gradient mean 1, r = 0.5.
  const std::vector<std::vector<double>> lin{xs(s, [](double x) { return x; })};
  const std::vector<double> half{0.5 + 1e-9};
  const double P = estimate_poincare(s, 1.0, 1.0, lin, half).constant;
  CHECK(P == doctest::Approx(0.5).epsilon(0.03));

  const std::vector<std::vector<double>> sq{xs(s, [](double x) { return x * x; })};
  const double Q = estimate_poincare(s, 2.0, 1.0, sq, critical_radii(s, 1.0)).constant;
  CHECK(std::isfinite(Q));
  CHECK(Q > 0.0);
}

TEST_CASE("critical radii are nudged breakpoints") {
  const auto s = build_interval_mesh(5, 1.0);
  const auto r = critical_radii(s, 1.0);
  CHECK(std::is_sorted(r.begin(), r.end()));
  CHECK(r.front() > 0.25);
  CHECK(r.front() < 0.25 * (1 + 1e-8));
}

TEST_CASE("metric, balls and measures on sampled graphs") {
  std::vector<Vertex> vs;
  std::vector<Edge> es;
  for (std::size_t i = 0; i < 12; ++i) {
    vs.push_back({std::to_string(i), 0.5 + 0.1 * static_cast<double>(i % 4), {}});
    if (i) es.push_back({i - 1, i, 0.3 + 0.05 * static_cast<double>(i % 3), 1.0});
  }
  es.push_back({0, 7, 0.4, 1.0});
  es.push_back({3, 11, 0.25, 1.0});
  const Space s(vs, es, {0});
  double total = 0.0;
  for (std::size_t x = 0; x < 12; ++x) {
    total += s.measure(x);
    for (std::size_t y = 0; y < 12; ++y) {
      CHECK(s.distance(x, y) == s.distance(y, x));
      for (std::size_t z = 0; z < 12; ++z) CHECK(s.distance(x, z) <= s.distance(x, y) + s.distance(y, z) + 1e-12);
    }
    double prev_r = 0.0;
    std::vector<std::size_t> prev;
    for (double r : {0.2, 0.3, 0.45, 0.7, 1.1, 2.0, 5.0}) {
      const auto b = ball(s, x, r);
      CHECK(std::find(b.members.begin(), b.members.end(), x) != b.members.end());
      double m = 0.0;
      for (auto y : b.members) m += s.measure(y);
      CHECK(b.measure == doctest::Approx(m).epsilon(1e-14));
      for (auto y : prev) CHECK(std::find(b.members.begin(), b.members.end(), y) != b.members.end());
      CHECK(r > prev_r);
      prev = b.members;
      prev_r = r;
    }
  }
  CHECK(s.total_measure() == doctest::Approx(total).epsilon(1e-14));
  CHECK(ball(s, 0, 100.0).measure == doctest::Approx(total).epsilon(1e-14));

  std::vector<double> radii;
  double last = 1.0;
  for (double r : {0.9, 0.2, 0.55, 1.3, 0.35}) {
    radii.push_back(r);
    const double c = estimate_doubling(s, radii).constant;
    CHECK(c >= last);
    last = c;
  }
}

TEST_CASE("interval doubling stays below 2 + 10 h") {
  for (std::size_t n : {21, 41, 81, 161}) {
    const auto s = build_interval_mesh(n, 1.0);
    const double h = 1.0 / static_cast<double>(n - 1);
    // a ball of k cells doubles with ratio about 2 + 1/(2k), so the h-sized
    // slack only covers radii of order 0.1 and up
    std::vector<double> radii;
    for (double r = 0.1; r < 0.5; r += 0.7 * h) radii.push_back(r);
    CAPTURE(n);
    CHECK(estimate_doubling(s, radii).constant <= 2.0 + 10.0 * h);
  }
}
