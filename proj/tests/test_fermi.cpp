#include <doctest.h>

#include <numbers>

#include "bilayer/error.hpp"
#include "bilayer/fermi.hpp"
#include "oracles.hpp"

using namespace bilayer;
using std::numbers::pi;

namespace {

const double kLambdaStar = 233.0 / 4 - 22 * std::sqrt(7.0);
const Vec2d kXiStar((3 - std::sqrt(7.0)) / 2, 0);

// The level set at lambda > 1/16 is a polar graph r(theta): r^2 (r^2 + 2 r cos 3t + 1) is
// increasing in r there, so bisection gives r and finite differences give the curvature.
double polar_radius(double lambda, double theta) {
  const double c = std::cos(3 * theta);
  double lo = 0, hi = 3;
  for (int i = 0; i < 200; ++i) {
    const double r = 0.5 * (lo + hi);
    (r * r * (r * r + 2 * r * c + 1) < lambda ? lo : hi) = r;
  }
  return 0.5 * (lo + hi);
}

double polar_curvature(double lambda, double theta) {
  const double h = 1e-4;
  const double r = polar_radius(lambda, theta);
  const double rp = polar_radius(lambda, theta + h), rm = polar_radius(lambda, theta - h);
  const double d1 = (rp - rm) / (2 * h), d2 = (rp - 2 * r + rm) / (h * h);
  return (r * r + 2 * d1 * d1 - r * d2) / std::pow(r * r + d1 * d1, 1.5);
}

std::pair<std::size_t, std::size_t> nearest_vertex(const LevelCurve& c, const Vec2d& p) {
  std::pair<std::size_t, std::size_t> best{0, 0};
  double d = INFINITY;
  for (std::size_t i = 0; i < c.components.size(); ++i)
    for (std::size_t j = 0; j < c.components[i].points.size(); ++j)
      if ((c.components[i].points[j] - p).norm() < d) {
        d = (c.components[i].points[j] - p).norm();
        best = {i, j};
      }
  return best;
}

}  // namespace

TEST_CASE("critical points of P") {
  const auto pts = find_critical_points(1e-12);
  REQUIRE(pts.size() == 7);
  std::vector<Vec2d> minima = {{0, 0}, {std::cos(pi / 3), std::sin(pi / 3)}, {-1, 0}, {std::cos(5 * pi / 3), std::sin(5 * pi / 3)}};
  std::vector<Vec2d> saddles;
  for (int j : {1, 3, 5}) saddles.emplace_back(0.5 * std::cos(j * pi / 3), 0.5 * std::sin(j * pi / 3));
  auto has = [&](const Vec2d& where, CriticalClass cls, double value) {
    for (const auto& p : pts)
      if ((p.location - where).norm() < 1e-10 && p.kind == cls && std::abs(p.value - value) < 1e-12) return true;
    return false;
  };
  for (const auto& m : minima) CHECK(has(m, CriticalClass::minimum, 0.0));
  for (const auto& s : saddles) CHECK(has(s, CriticalClass::saddle, 1.0 / 16));
  for (const auto& p : pts) {
    CHECK(eval_P_derivatives(p.location).gradient.norm() <= 1e-10);
    CHECK(std::abs(p.hessian_eigs.x()) > 1e-8);
    CHECK(std::abs(p.hessian_eigs.y()) > 1e-8);
    CHECK(p.hessian_eigs.x() <= p.hessian_eigs.y());
    if (p.location.norm() < 1e-12) {
      CHECK(p.hessian_eigs.x() == doctest::Approx(2.0));
      CHECK(p.hessian_eigs.y() == doctest::Approx(2.0));
    }
  }
  CHECK_THROWS_AS(find_critical_points(1e-3), Error);
}

TEST_CASE("Quartic matches the closed-form symbol") {
  const auto f = Quartic::trig_symbol();
  for (int i = 0; i < 50; ++i) {
    const Vec2d xi(oracle::uniform(-2, 2), oracle::uniform(-2, 2));
    REQUIRE(f(xi) == doctest::Approx(eval_P(xi)).epsilon(1e-13));
    REQUIRE((f.gradient(xi) - eval_P_derivatives(xi).gradient).norm() < 1e-11);
    REQUIRE((f.hessian(xi) - eval_P_derivatives(xi).hessian).norm() < 1e-11);
  }
}

TEST_CASE("unit circle has unit curvature") {
  const auto c = trace_level_set(Quartic::radial_square(), 1.0);
  REQUIRE(c.components.size() == 1);
  for (double k : c.components[0].curvature) REQUIRE(k == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.components[0].length == doctest::Approx(2 * pi).epsilon(1e-4));
}

TEST_CASE("level sets: components, residuals, closure") {
  struct Case {
    double lambda;
    std::size_t count;
  };
  for (Case cs : {Case{1.0 / 32, 4}, Case{1.0 / 8, 1}, Case{4.0, 1}, Case{1.0 / 16 - 1e-3, 4}, Case{1.0 / 16 + 1e-3, 1},
                  Case{0.0434713, 4}}) {
    CAPTURE(cs.lambda);
    const auto c = trace_level_set(cs.lambda);
    CHECK(c.components.size() == cs.count);
    CHECK(component_count(cs.lambda) == static_cast<int>(cs.count));
    for (const auto& comp : c.components) {
      for (const auto& p : comp.points) REQUIRE(std::abs(eval_P(p) - cs.lambda) <= 1e-8 * (1 + cs.lambda));
      CHECK((comp.points.front() - comp.points.back()).norm() <= 2 * c.step);
    }
  }
  const auto big = trace_level_set(4.0);
  const auto [ic, iv] = nearest_vertex(big, Vec2d(1, 0));
  CHECK((big.components[ic].points[iv] - Vec2d(1, 0)).norm() <= big.step);
  CHECK_THROWS_AS(trace_level_set(0.0), Error);
  CHECK_THROWS_AS(trace_level_set(1.0 / 16), Error);
}

TEST_CASE("curvature at lambda = 1/8 agrees with the polar-graph oracle") {
  const auto c = trace_level_set(1.0 / 8);
  const auto& comp = c.components.at(0);
  for (double theta : {0.0, 0.4, pi / 3, 1.9, pi, 4.0}) {
    const double r = polar_radius(1.0 / 8, theta);
    const auto [ic, iv] = nearest_vertex(c, Vec2d(r * std::cos(theta), r * std::sin(theta)));
    CAPTURE(theta);
    CHECK(comp.curvature[iv] == doctest::Approx(polar_curvature(1.0 / 8, theta)).epsilon(1e-3));
  }
}

TEST_CASE("curvature at lambda = 1/8 changes sign") {
  // The lobes toward the minima leave concave necks at theta = 0, 2pi/3, 4pi/3,
  // so the curve has inflection points and is not of type 2 everywhere.
  CHECK(polar_curvature(1.0 / 8, 0.0) < -0.5);
  CHECK(polar_curvature(1.0 / 8, pi) > 1.0);
  const auto c = trace_level_set(1.0 / 8);
  const auto& k = c.components.at(0).curvature;
  CHECK(*std::min_element(k.begin(), k.end()) < 0.0);
  CHECK(*std::max_element(k.begin(), k.end()) > 0.0);
}

TEST_CASE("finite type order") {
  const auto c = trace_level_set(1.0 / 8);
  const auto& comp = c.components.at(0);
  // curvature maximum: nonvanishing curvature, type 2
  const auto imax = std::max_element(comp.curvature.begin(), comp.curvature.end()) - comp.curvature.begin();
  CHECK(finite_type_order(c, comp.points[imax], 1e-3) == 2);
  // a simple inflection (zero of kappa with kappa' != 0) has type 3
  bool found = false;
  for (std::size_t i = 0; i + 1 < comp.curvature.size() && !found; ++i) {
    if (!(comp.curvature[i] < 0 && comp.curvature[i + 1] >= 0)) continue;
    found = true;
    Vec2d a = comp.points[i], b = comp.points[i + 1], mid;
    for (int it = 0; it < 60; ++it) {
      mid = project_to_level(c.field, c.lambda, 0.5 * (a + b));
      (implicit_curvature(c.field, mid) < 0 ? a : b) = mid;
    }
    CHECK(std::abs(implicit_curvature(c.field, mid)) < 1e-8);
    CHECK(finite_type_order(c, mid, 1e-3) == 3);
  }
  CHECK(found);
  const auto deg = trace_level_set(kLambdaStar);
  CHECK(finite_type_order(deg, kXiStar, 1e-3) == 4);
  const auto jet = curvature_jet(deg, kXiStar);
  CHECK(std::abs(jet.derivatives[0]) <= 1e-6);
  CHECK(std::abs(jet.derivatives[1]) <= 1e-6);
  CHECK(std::abs(jet.derivatives[2]) > 1.0);

  // generic level below 1/16: never above 4
  const auto low = trace_level_set(0.03);
  for (const auto& cc : low.components)
    for (std::size_t i = 0; i < cc.points.size(); i += 37) REQUIRE(finite_type_order(low, cc.points[i], 1e-3) <= 4);
}

TEST_CASE("degenerate level search") {
  const auto d = find_degenerate_lambda();
  CHECK(std::abs(d.lambda - kLambdaStar) <= 1e-7);
  CHECK((d.xi - kXiStar).norm() <= 1e-6);
  CHECK(std::abs(eval_P(d.xi) - d.lambda) <= 1e-10);
  CHECK(d.lambda == doctest::Approx(0.0434713).epsilon(1e-6));
  REQUIRE_FALSE(d.candidates.empty());
}

TEST_CASE("curvature stability probe") {
  CHECK(curvature_stability_probe(0.0));
  CHECK(curvature_stability_probe(1e-6));
  CHECK(curvature_stability_probe(1e-4));
}
