#include "bilayer/fermi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace bilayer {

namespace {

constexpr double kSaddleValue = 1.0 / 16.0;

double falling(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= n - i;
  return r;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Cubic Lagrange interpolation through four (t, value) pairs.
template <typename T>
T lagrange4(const std::array<double, 4>& t, const std::array<T, 4>& v, double x) {
  T out = v[0] * 0.0;
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) w *= (x - t[j]) / (t[i] - t[j]);
    out += v[i] * w;
  }
  return out;
}

}  // namespace

double Quartic::derivative(int a, int b, const Vec2d& xi) const {
  double sum = 0.0;
  for (int i = a; i <= kMaxDegree; ++i) {
    for (int j = b; i + j <= kMaxDegree; ++j) {
      const double c = c_[i][j];
      if (c == 0.0) continue;
      sum += c * falling(i, a) * falling(j, b) * ipow(xi.x(), i - a) * ipow(xi.y(), j - b);
    }
  }
  return sum;
}

Vec2d Quartic::gradient(const Vec2d& xi) const {
  return {derivative(1, 0, xi), derivative(0, 1, xi)};
}

Mat2d Quartic::hessian(const Vec2d& xi) const {
  Mat2d h;
  h(0, 0) = derivative(2, 0, xi);
  h(0, 1) = h(1, 0) = derivative(1, 1, xi);
  h(1, 1) = derivative(0, 2, xi);
  return h;
}

Quartic Quartic::operator+(const Quartic& other) const {
  Quartic out = *this;
  for (int i = 0; i <= kMaxDegree; ++i)
    for (int j = 0; j <= kMaxDegree; ++j) out.c_[i][j] += other.c_[i][j];
  return out;
}

Quartic Quartic::operator*(double s) const {
  Quartic out = *this;
  for (auto& row : out.c_)
    for (auto& c : row) c *= s;
  return out;
}

Quartic Quartic::trig_symbol() {
  Quartic p;
  p.coeff(4, 0) = 1.0;
  p.coeff(2, 2) = 2.0;
  p.coeff(0, 4) = 1.0;
  p.coeff(3, 0) = 2.0;
  p.coeff(1, 2) = -6.0;
  p.coeff(2, 0) = 1.0;
  p.coeff(0, 2) = 1.0;
  return p;
}

Quartic Quartic::cubic_harmonic() {
  Quartic p;
  p.coeff(3, 0) = 1.0;
  p.coeff(1, 2) = -3.0;
  return p;
}

Quartic Quartic::radial_square() {
  Quartic p;
  p.coeff(2, 0) = 1.0;
  p.coeff(0, 2) = 1.0;
  return p;
}

double implicit_curvature(const Quartic& f, const Vec2d& xi) {
  const double fx = f.derivative(1, 0, xi), fy = f.derivative(0, 1, xi);
  const double fxx = f.derivative(2, 0, xi), fxy = f.derivative(1, 1, xi),
               fyy = f.derivative(0, 2, xi);
  const double g2 = fx * fx + fy * fy;
  const double g = std::sqrt(g2);
  if (g < 1e-8) throw Error(Errc::degenerate, "curvature: |grad f| < 1e-8");
  return (fyy * fx * fx - 2.0 * fxy * fx * fy + fxx * fy * fy) / (g2 * g);
}

double implicit_curvature_derivative(const Quartic& f, const Vec2d& xi) {
  const double fx = f.derivative(1, 0, xi), fy = f.derivative(0, 1, xi);
  const double fxx = f.derivative(2, 0, xi), fxy = f.derivative(1, 1, xi),
               fyy = f.derivative(0, 2, xi);
  const double fxxx = f.derivative(3, 0, xi), fxxy = f.derivative(2, 1, xi),
               fxyy = f.derivative(1, 2, xi), fyyy = f.derivative(0, 3, xi);
  const double g2 = fx * fx + fy * fy;
  const double g = std::sqrt(g2);
  if (g < 1e-8) throw Error(Errc::degenerate, "curvature: |grad f| < 1e-8");

  const double num = fyy * fx * fx - 2.0 * fxy * fx * fy + fxx * fy * fy;
  const double num_x = fxyy * fx * fx + 2.0 * fyy * fx * fxx -
                       2.0 * (fxxy * fx * fy + fxy * fxx * fy + fxy * fx * fxy) +
                       fxxx * fy * fy + 2.0 * fxx * fy * fxy;
  const double num_y = fyyy * fx * fx + 2.0 * fyy * fx * fxy -
                       2.0 * (fxyy * fx * fy + fxy * fxy * fy + fxy * fx * fyy) +
                       fxxy * fy * fy + 2.0 * fxx * fy * fyy;
  const double g2_x = 2.0 * (fx * fxx + fy * fxy);
  const double g2_y = 2.0 * (fx * fxy + fy * fyy);
  const double g3 = g2 * g;
  const double k_x = num_x / g3 - 1.5 * num * g2_x / (g3 * g2);
  const double k_y = num_y / g3 - 1.5 * num * g2_y / (g3 * g2);
  return (-fy * k_x + fx * k_y) / g;
}

Vec2d project_to_level(const Quartic& f, double level, Vec2d xi, double tol, int max_iter) {
  const double target = tol * (1.0 + std::abs(level));
  for (int it = 0; it < max_iter; ++it) {
    const double r = f(xi) - level;
    if (std::abs(r) <= target) return xi;
    const Vec2d g = f.gradient(xi);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-16) throw Error(Errc::degenerate, "projection: |grad f| < 1e-8");
    xi -= (r / g2) * g;
  }
  if (std::abs(f(xi) - level) <= target) return xi;
  throw Error(Errc::not_converged, "projection onto level set did not converge");
}

std::vector<CriticalPoint> find_critical_points(double tol) {
  if (!(tol > 0.0 && tol <= 1e-6))
    throw Error(Errc::out_of_range, "find_critical_points: tol must lie in (0, 1e-6]");

  std::vector<Vec2d> roots;
  for (int ir = 1; ir <= 6; ++ir) {
    const double r = 0.25 * ir;
    for (int j = 0; j < 12; ++j) {
      const double theta = j * std::numbers::pi / 6.0;
      Vec2d xi(r * std::cos(theta), r * std::sin(theta));
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const auto d = eval_P_derivatives(xi);
        if (d.gradient.norm() <= 1e-14) {
          ok = true;
          break;
        }
        const Vec2d dx = d.hessian.fullPivLu().solve(d.gradient);
        if (!dx.allFinite()) break;
        xi -= dx;
        if (xi.norm() > 10.0) break;
        if (dx.norm() <= 1e-15 * (1.0 + xi.norm())) {
          ok = true;
          break;
        }
      }
      if (!ok || eval_P_derivatives(xi).gradient.norm() > 1e-6) continue;
      const bool seen = std::any_of(roots.begin(), roots.end(),
                                    [&](const Vec2d& r0) { return (r0 - xi).norm() < 1e-6; });
      if (!seen) roots.push_back(xi);
    }
  }

  std::vector<CriticalPoint> out;
  for (Vec2d xi : roots) {
    for (int it = 0; it < 3; ++it) {
      const auto d = eval_P_derivatives(xi);
      if (d.gradient.norm() == 0.0) break;
      xi -= d.hessian.fullPivLu().solve(d.gradient);
    }
    const auto d = eval_P_derivatives(xi);
    if (d.gradient.norm() > tol)
      throw Error(Errc::not_converged,
                  "critical point residual " + std::to_string(d.gradient.norm()) + " exceeds tol");
    Eigen::SelfAdjointEigenSolver<Mat2d> es(d.hessian);
    const Vec2d eigs = es.eigenvalues();
    CriticalClass kind = CriticalClass::saddle;
    if (eigs(0) > 0.0) kind = CriticalClass::minimum;
    if (eigs(1) < 0.0) kind = CriticalClass::maximum;
    out.push_back({xi, eval_P(xi), kind, eigs});
  }
  std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    return std::atan2(a.location.y(), a.location.x()) < std::atan2(b.location.y(), b.location.x());
  });
  return out;
}

Vec2d CurveComponent::position_at(double s) const {
  const auto n = static_cast<long>(points.size());
  s = std::fmod(s, length);
  if (s < 0) s += length;
  // segment [i, i+1) containing s
  const auto it = std::upper_bound(arclength.begin(), arclength.end(), s);
  const long i = static_cast<long>(it - arclength.begin()) - 1;
  std::array<double, 4> t;
  std::array<Vec2d, 4> v;
  for (int k = 0; k < 4; ++k) {
    long idx = i - 1 + k;
    double shift = 0.0;
    while (idx < 0) {
      idx += n;
      shift -= length;
    }
    while (idx >= n) {
      idx -= n;
      shift += length;
    }
    t[k] = arclength[idx] + shift;
    v[k] = points[idx];
  }
  return lagrange4(t, v, s);
}

double CurveComponent::diameter() const {
  Vec2d lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

namespace {

class CellIndex {
 public:
  CellIndex(double half_width, int cells)
      : half_width_(half_width), cells_(cells), h_(2.0 * half_width / cells),
        buckets_(static_cast<std::size_t>(cells) * cells) {}

  double cell_size() const { return h_; }

  std::pair<int, int> cell_of(const Vec2d& p) const {
    const int i = std::clamp(static_cast<int>(std::floor((p.x() + half_width_) / h_)), 0, cells_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() + half_width_) / h_)), 0, cells_ - 1);
    return {i, j};
  }

  void insert(const Vec2d& p) {
    auto [i, j] = cell_of(p);
    buckets_[static_cast<std::size_t>(j) * cells_ + i].push_back(p);
  }

  bool occupied(int i, int j) const {
    if (i < 0 || j < 0 || i >= cells_ || j >= cells_) return false;
    return !buckets_[static_cast<std::size_t>(j) * cells_ + i].empty();
  }

  bool near(const Vec2d& p, double radius) const {
    auto [ci, cj] = cell_of(p);
    const int reach = 1 + static_cast<int>(radius / h_);
    for (int j = cj - reach; j <= cj + reach; ++j)
      for (int i = ci - reach; i <= ci + reach; ++i) {
        if (i < 0 || j < 0 || i >= cells_ || j >= cells_) continue;
        for (const auto& q : buckets_[static_cast<std::size_t>(j) * cells_ + i])
          if ((q - p).norm() <= radius) return true;
      }
    return false;
  }

 private:
  double half_width_;
  int cells_;
  double h_;
  std::vector<std::vector<Vec2d>> buckets_;
};

CurveComponent trace_component(const Quartic& f, double lambda, Vec2d start,
                               const TraceOptions& opts) {
  CurveComponent comp;
  comp.points.push_back(start);
  Vec2d p = start;
  double travelled = 0.0;
  const double h0 = opts.step;
  const std::size_t max_vertices = static_cast<std::size_t>(5e6);

  while (true) {
    // Closed once the current vertex is within one step of the start.
    if (travelled > 3.0 * h0 && (p - start).norm() <= h0) break;

    const Vec2d g = f.gradient(p);
    const double gn = g.norm();
    if (gn < 1e-8) throw Error(Errc::degenerate, "level set: |grad P| < 1e-8 on traced curve");
    const Vec2d tangent(-g.y() / gn, g.x() / gn);

    double h = h0;
    Vec2d next;
    while (true) {
      const Vec2d predicted = p + h * tangent;
      try {
        next = project_to_level(f, lambda, predicted, opts.newton_tol, opts.max_newton);
        const double moved = (next - predicted).norm();
        const double chord = (next - p).norm();
        if (moved <= 0.5 * h && chord >= 0.5 * h) break;
      } catch (const Error& e) {
        if (e.code() == Errc::degenerate) throw;
      }
      h *= 0.5;
      if (h < 1e-7 * h0) throw Error(Errc::not_converged, "continuation step collapsed");
    }

    travelled += (next - p).norm();
    comp.points.push_back(next);
    p = next;
    if (comp.points.size() > max_vertices)
      throw Error(Errc::not_converged, "continuation did not close");
  }

  const std::size_t n = comp.points.size();
  comp.arclength.resize(n);
  comp.arclength[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    comp.arclength[i] = comp.arclength[i - 1] + (comp.points[i] - comp.points[i - 1]).norm();
  comp.length = comp.arclength[n - 1] + (comp.points[0] - comp.points[n - 1]).norm();
  comp.curvature.resize(n);
  for (std::size_t i = 0; i < n; ++i) comp.curvature[i] = implicit_curvature(f, comp.points[i]);
  return comp;
}

}  // namespace

LevelCurve trace_level_set(const Quartic& f, double lambda, const TraceOptions& opts) {
  if (!(opts.step > 0.0 && opts.step <= 0.05))
    throw Error(Errc::out_of_range, "trace_level_set: step must lie in (0, 0.05]");
  const double box = opts.box_half_width.value_or(
      lambda <= 4.0 ? 2.0 : std::pow(2.0 * lambda, 0.25) + 1.0);
  const int n = opts.scan_cells;

  LevelCurve curve;
  curve.field = f;
  curve.lambda = lambda;
  curve.step = opts.step;

  std::vector<double> values(static_cast<std::size_t>(n + 1) * (n + 1));
  const double h = 2.0 * box / n;
  auto node = [&](int i, int j) { return Vec2d(-box + i * h, -box + j * h); };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      values[static_cast<std::size_t>(j) * (n + 1) + i] = f(node(i, j)) - lambda;
  auto value = [&](int i, int j) { return values[static_cast<std::size_t>(j) * (n + 1) + i]; };

  CellIndex index(box, n);
  auto try_seed = [&](const Vec2d& a, double va, const Vec2d& b, double vb, int ci0, int cj0,
                      int ci1, int cj1) {
    if ((va < 0.0) == (vb < 0.0)) return;
    if (index.occupied(ci0, cj0) || index.occupied(ci1, cj1)) return;
    const Vec2d seed = a + (va / (va - vb)) * (b - a);
    Vec2d start;
    try {
      start = project_to_level(f, lambda, seed, opts.newton_tol, 50);
    } catch (const Error& e) {
      if (e.code() == Errc::degenerate) throw;
      return;
    }
    if (index.near(start, 2.0 * opts.step)) return;
    CurveComponent comp = trace_component(f, lambda, start, opts);
    for (const auto& p : comp.points) index.insert(p);
    curve.components.push_back(std::move(comp));
  };

  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (i < n) try_seed(node(i, j), value(i, j), node(i + 1, j), value(i + 1, j), i, j - 1, i, j);
      if (j < n) try_seed(node(i, j), value(i, j), node(i, j + 1), value(i, j + 1), i - 1, j, i, j);
    }
  }
  return curve;
}

LevelCurve trace_level_set(double lambda, double step) {
  if (!(lambda > 1e-9) || std::abs(lambda - kSaddleValue) <= 1e-9)
    throw Error(Errc::out_of_range,
                "trace_level_set: lambda must lie in (0, inf) away from the critical values {0, 1/16}");
  TraceOptions opts;
  opts.step = step;
  return trace_level_set(Quartic::trig_symbol(), lambda, opts);
}

int component_count(double lambda) {
  return static_cast<int>(trace_level_set(lambda).components.size());
}

std::vector<std::vector<double>> curvature_profile(const LevelCurve& curve) {
  std::vector<std::vector<double>> out;
  out.reserve(curve.components.size());
  for (const auto& comp : curve.components) {
    std::vector<double> k(comp.points.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = implicit_curvature(curve.field, comp.points[i]);
    out.push_back(std::move(k));
  }
  return out;
}

CurvatureJet curvature_jet(const LevelCurve& curve, const Vec2d& point,
                           std::optional<double> stencil_step) {
  if (curve.components.empty()) throw Error(Errc::empty, "curvature_jet: curve has no components");
  const CurveComponent* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (const auto& comp : curve.components) {
    const std::size_t n = comp.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2d& a = comp.points[i];
      const Vec2d& b = comp.points[(i + 1) % n];
      const Vec2d ab = b - a;
      const double t = std::clamp((point - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      const double d = (a + t * ab - point).norm();
      if (d < best_dist) {
        best_dist = d;
        best = &comp;
        best_s = comp.arclength[i] + t * ab.norm();
      }
    }
  }
  if (best_dist > 2.0 * curve.step)
    throw Error(Errc::out_of_range, "curvature_jet: point is not on the curve");

  const double h = stencil_step.value_or(2.0 * curve.step);
  std::array<double, 5> k{};
  std::array<Vec2d, 5> pts;
  for (int j = -2; j <= 2; ++j) {
    Vec2d p = best->position_at(best_s + j * h);
    p = project_to_level(curve.field, curve.lambda, p);
    pts[j + 2] = p;
    k[j + 2] = implicit_curvature(curve.field, p);
  }
  CurvatureJet jet;
  jet.s0 = best_s;
  jet.point = pts[2];
  jet.derivatives[0] = k[2];
  jet.derivatives[1] = (k[0] - 8.0 * k[1] + 8.0 * k[3] - k[4]) / (12.0 * h);
  jet.derivatives[2] = (-k[0] + 16.0 * k[1] - 30.0 * k[2] + 16.0 * k[3] - k[4]) / (12.0 * h * h);
  return jet;
}

int finite_type_order(const LevelCurve& curve, const Vec2d& point, double tol,
                      std::optional<double> stencil_step) {
  const CurvatureJet jet = curvature_jet(curve, point, stencil_step);
  for (int j = 0; j < 3; ++j)
    if (std::abs(jet.derivatives[j]) > tol) return j + 2;
  throw Error(Errc::inconclusive, "finite_type_order: curvature and its first two derivatives vanish");
}

namespace {

// Points of M_lambda on the xi_2 = 0 section: x^2 (1 + x)^2 = lambda.
std::vector<double> section_points(double lambda) {
  std::vector<double> xs;
  const double r = std::sqrt(lambda);
  const double outer = std::sqrt(1.0 + 4.0 * r);
  xs.push_back(0.5 * (-1.0 + outer));
  xs.push_back(0.5 * (-1.0 - outer));
  if (1.0 - 4.0 * r > 0.0) {
    const double inner = std::sqrt(1.0 - 4.0 * r);
    xs.push_back(0.5 * (-1.0 + inner));
    xs.push_back(0.5 * (-1.0 - inner));
  } else {
    xs.push_back(std::numeric_limits<double>::quiet_NaN());
    xs.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  return xs;
}

}  // namespace

DegenerateSearch find_degenerate_lambda(int scan_points) {
  const Quartic p = Quartic::trig_symbol();
  auto kappa_on = [&](double lambda, int branch) {
    const double x = section_points(lambda)[branch];
    return implicit_curvature(p, Vec2d(x, 0.0));
  };

  DegenerateSearch out;
  const std::array<std::pair<double, double>, 2> ranges{
      std::pair{1e-6, kSaddleValue - 1e-6}, std::pair{kSaddleValue + 1e-6, 1.0}};
  for (const auto& [lo, hi] : ranges) {
    for (int branch = 0; branch < 4; ++branch) {
      if (branch >= 2 && lo > kSaddleValue) continue;
      double prev_l = lo;
      double prev_k = kappa_on(lo, branch);
      for (int i = 1; i <= scan_points; ++i) {
        const double l = lo + (hi - lo) * i / scan_points;
        const double k = kappa_on(l, branch);
        if ((prev_k < 0.0) != (k < 0.0)) {
          double a = prev_l, b = l, ka = prev_k;
          for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
            const double mid = 0.5 * (a + b);
            const double km = kappa_on(mid, branch);
            if ((km < 0.0) == (ka < 0.0)) {
              a = mid;
              ka = km;
            } else {
              b = mid;
            }
          }
          const double lam = 0.5 * (a + b);
          const Vec2d xi(section_points(lam)[branch], 0.0);
          const double residual =
              std::abs(implicit_curvature(p, xi)) + std::abs(implicit_curvature_derivative(p, xi));
          out.candidates.push_back({lam, xi, residual});
        }
        prev_l = l;
        prev_k = k;
      }
    }
  }
  if (out.candidates.empty())
    throw Error(Errc::not_found, "find_degenerate_lambda: no sign change of curvature found");
  const auto best = std::min_element(out.candidates.begin(), out.candidates.end(),
                                     [](const auto& a, const auto& b) { return a.residual < b.residual; });
  if (best->residual > 1e-6)
    throw Error(Errc::not_found, "find_degenerate_lambda: joint residual floor exceeds 1e-6");
  out.lambda = best->lambda;
  out.xi = best->xi;
  return out;
}

bool curvature_stability_probe(double epsilon, double tol) {
  if (!(epsilon >= 0.0 && epsilon <= 1e-3))
    throw Error(Errc::out_of_range, "curvature_stability_probe: epsilon must lie in [0, 1e-3]");
  constexpr double lambda = 0.125;
  const LevelCurve base = trace_level_set(lambda);
  Vec2d anchor = base.components.front().points.front();
  double kmax = -1.0;
  for (const auto& comp : base.components)
    for (std::size_t i = 0; i < comp.points.size(); ++i)
      if (std::abs(comp.curvature[i]) > kmax) {
        kmax = std::abs(comp.curvature[i]);
        anchor = comp.points[i];
      }

  const Quartic perturbed = Quartic::trig_symbol() + Quartic::cubic_harmonic() * epsilon;
  const LevelCurve curve = trace_level_set(perturbed, lambda);
  Vec2d nearest = curve.components.front().points.front();
  for (const auto& comp : curve.components)
    for (const auto& q : comp.points)
      if ((q - anchor).norm() < (nearest - anchor).norm()) nearest = q;
  return finite_type_order(curve, nearest, tol) == 2;
}

}  // namespace bilayer
