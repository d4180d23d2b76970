#pragma once

// Geometry of the Fermi surfaces M_lambda = {P(xi) = lambda}.

#include <array>
#include <optional>
#include <vector>

#include "bilayer/symbol.hpp"

namespace bilayer {

/// Real bivariate polynomial of total degree at most four,
/// f(x, y) = sum c(i, j) x^i y^j.  Level-set routines take one of these so the
/// same machinery traces P, its perturbations, and reference circles.
class Quartic {
 public:
  static constexpr int kMaxDegree = 4;

  Quartic() = default;

  double coeff(int i, int j) const { return c_[i][j]; }
  double& coeff(int i, int j) { return c_[i][j]; }

  double operator()(const Vec2d& xi) const { return derivative(0, 0, xi); }
  /// d^{a+b} f / dx^a dy^b at xi.
  double derivative(int a, int b, const Vec2d& xi) const;
  Vec2d gradient(const Vec2d& xi) const;
  Mat2d hessian(const Vec2d& xi) const;

  Quartic operator+(const Quartic& other) const;
  Quartic operator*(double s) const;

  /// P(xi) = |xi|^4 + 2 Re(xi^3) + |xi|^2.
  static Quartic trig_symbol();
  /// Re(xi^3) = x^3 - 3 x y^2.
  static Quartic cubic_harmonic();
  /// |xi|^2.
  static Quartic radial_square();

 private:
  std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> c_{};
};

/// Signed curvature of the level curve of f through xi, counterclockwise
/// around {f < level}: (f_yy f_x^2 - 2 f_xy f_x f_y + f_xx f_y^2) / |grad f|^3.
double implicit_curvature(const Quartic& f, const Vec2d& xi);

/// d kappa / ds along the counterclockwise unit tangent (-f_y, f_x)/|grad f|.
double implicit_curvature_derivative(const Quartic& f, const Vec2d& xi);

/// Newton projection onto {f = level} along the gradient.
Vec2d project_to_level(const Quartic& f, double level, Vec2d xi, double tol = 1e-12,
                       int max_iter = 25);

enum class CriticalClass { minimum, saddle, maximum };

struct CriticalPoint {
  Vec2d location;
  double value;
  CriticalClass kind;
  Vec2d hessian_eigs;  // ascending
};

/// Newton search for the critical points of P seeded on the polar lattice
/// r in {0.25, ..., 1.5}, theta in {j pi / 6}.
std::vector<CriticalPoint> find_critical_points(double tol = 1e-12);

struct CurveComponent {
  std::vector<Vec2d> points;      // closed polyline, last vertex not repeated
  std::vector<double> arclength;  // cumulative chord length, arclength[0] = 0
  std::vector<double> curvature;  // implicit-formula curvature per vertex
  double length{0};               // including the closing segment

  Vec2d position_at(double s) const;  // periodic cubic interpolation in s
  double diameter() const;
};

struct LevelCurve {
  Quartic field;
  double lambda{0};
  double step{0};
  std::vector<CurveComponent> components;
};

struct TraceOptions {
  double step = 0.005;
  double newton_tol = 1e-12;
  int max_newton = 25;
  int scan_cells = 400;
  std::optional<double> box_half_width;  // default: 2, or (2 lambda)^{1/4} + 1 above 4
};

/// Predictor-corrector continuation of every component of {f = lambda},
/// seeded from sign changes of f - lambda on a scan of the box.
LevelCurve trace_level_set(const Quartic& f, double lambda, const TraceOptions& opts = {});

/// M_lambda for the trig symbol P.  lambda must avoid the critical values
/// {0, 1/16} by 1e-9.
LevelCurve trace_level_set(double lambda, double step = 0.005);

int component_count(double lambda);

/// Recomputes per-vertex curvature from the implicit formula.
std::vector<std::vector<double>> curvature_profile(const LevelCurve& curve);

/// Smallest k in {2, 3, 4} with |d^{k-2} kappa / ds^{k-2}| > tol at the curve
/// point nearest to `point`, using 5-point stencils on a uniform resampling.
int finite_type_order(const LevelCurve& curve, const Vec2d& point, double tol,
                      std::optional<double> stencil_step = std::nullopt);

struct CurvatureJet {
  double s0;
  Vec2d point;
  std::array<double, 3> derivatives;  // kappa, kappa', kappa''
};

CurvatureJet curvature_jet(const LevelCurve& curve, const Vec2d& point,
                           std::optional<double> stencil_step = std::nullopt);

struct DegenerateCandidate {
  double lambda;
  Vec2d xi;
  double residual;  // |kappa| + |kappa_s| at xi
};

struct DegenerateSearch {
  double lambda;
  Vec2d xi;
  std::vector<DegenerateCandidate> candidates;
};

/// Scan of lambda over (0, 1/16) and (1/16, 1] for points on the xi_2 = 0
/// section where kappa and kappa_s vanish together.
DegenerateSearch find_degenerate_lambda(int scan_points = 4000);

/// Perturbs P by epsilon (xi_1^3 - 3 xi_1 xi_2^2) and checks that the
/// curvature-maximum point of M_{1/8} keeps finite type 2.
bool curvature_stability_probe(double epsilon, double tol = 1e-6);

}  // namespace bilayer
