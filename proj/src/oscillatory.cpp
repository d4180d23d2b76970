#include "bilayer/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bilayer/parallel.hpp"

namespace bilayer {

namespace {

double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= half / i;
  double sum = term;
  const double q = -half * half;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum))) break;
  }
  return sum;
}

// Hankel expansion, truncated at the smallest term.
double bessel_asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double a = 1.0, best = std::numeric_limits<double>::infinity();
  double p = 1.0, q = 0.0;
  for (int k = 1; k < 200; ++k) {
    a *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
    if (std::abs(a) > best && k > 2) break;
    best = std::abs(a);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0)
      p += sign * a;
    else
      q += sign * a;
    if (best < 1e-18) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j(int n, double x) {
  if (n < 0 || n > 4) throw Error(Errc::out_of_range, "bessel_j: order must lie in [0, 4]");
  if (!(x >= 0.0)) throw Error(Errc::out_of_range, "bessel_j: argument must be nonnegative");
  if (x <= 12.0) return bessel_series(n, x);
  double jm = bessel_asymptotic(0, x);
  if (n == 0) return jm;
  double j = bessel_asymptotic(1, x);
  for (int k = 1; k < n; ++k) {
    const double next = (2.0 * k / x) * j - jm;
    jm = j;
    j = next;
  }
  return j;
}

std::size_t nyquist_points(double x_norm, double diameter) {
  return std::max<std::size_t>(2000, static_cast<std::size_t>(std::ceil(40.0 * x_norm * diameter)));
}

double support_diameter(const LevelCurve& curve, const Weight& cutoff) {
  Vec2d lo = Vec2d::Constant(std::numeric_limits<double>::infinity());
  Vec2d hi = -lo;
  bool any = false;
  for (const auto& comp : curve.components)
    for (const auto& p : comp.points)
      if (!cutoff || cutoff(p) != 0.0) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
        any = true;
      }
  return any ? (hi - lo).norm() : 0.0;
}

namespace {

// Derivative of the cubic interpolant used by CurveComponent::position_at,
// by central difference on the interpolant (exact for cubics up to rounding).
Vec2d tangent_at(const CurveComponent& comp, double s, double h) {
  return (comp.position_at(s + h) - comp.position_at(s - h)) / (2.0 * h);
}

}  // namespace

ArcQuadrature arclength_quadrature(const LevelCurve& curve, const Weight& cutoff,
                                   std::size_t total_points) {
  ArcQuadrature q;
  double total_length = 0.0;
  for (const auto& comp : curve.components) total_length += comp.length;
  if (total_length <= 0.0) return q;
  for (const auto& comp : curve.components) {
    const auto n = std::max<std::size_t>(
        64, static_cast<std::size_t>(std::ceil(total_points * comp.length / total_length)));
    const double ds = comp.length / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = ds * static_cast<double>(i);
      const Vec2d p = comp.position_at(s);
      const double chi = cutoff ? cutoff(p) : 1.0;
      if (chi == 0.0) continue;
      const double speed = tangent_at(comp, s, 1e-3 * ds).norm();
      q.nodes.push_back(p);
      q.weights.push_back(chi * speed * ds);
    }
  }
  q.support_diameter = support_diameter(curve, cutoff);
  return q;
}

namespace {

std::complex<double> ft_sum(const ArcQuadrature& q, const Vec2d& x) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double phase = x.dot(q.nodes[i]);
    re += q.weights[i] * std::cos(phase);
    im += q.weights[i] * std::sin(phase);
  }
  return {re, im};
}

}  // namespace

std::complex<double> ft_arclength(const LevelCurve& curve, const Weight& cutoff, const Vec2d& x,
                                  std::size_t points) {
  const double diam = support_diameter(curve, cutoff);
  const std::size_t required = nyquist_points(x.norm(), diam);
  if (points == 0) points = required;
  if (points < required)
    throw Error(Errc::under_resolved, "ft_arclength: resolution below the Nyquist guard");
  return ft_sum(arclength_quadrature(curve, cutoff, points), x);
}

std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(x[static_cast<std::size_t>(i)]);
    b(i) = std::log(y[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(n));
  return {coef(1), rms};
}

DecayFit decay_exponent(const LevelCurve& curve, const Weight& cutoff,
                        const std::vector<double>& radii, const DecayOptions& opts) {
  if (radii.size() < 2) throw Error(Errc::out_of_range, "decay_exponent: need at least two radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1]))
      throw Error(Errc::out_of_range, "decay_exponent: radii must be strictly increasing");
  if (radii.back() / radii.front() < 100.0 * (1.0 - 1e-12))
    throw Error(Errc::out_of_range, "decay_exponent: radii must span at least two decades");
  if (opts.n_directions < 64) throw Error(Errc::out_of_range, "decay_exponent: need >= 64 directions");

  const double diam = support_diameter(curve, cutoff);
  const double window = 2.0 * std::numbers::pi / std::max(diam, 1e-12);

  DecayFit fit;
  fit.radii = radii;
  fit.sup_values = parallel_map(radii.size(), [&](std::size_t ir) {
    const double r_top = radii[ir] + window;
    const ArcQuadrature q = arclength_quadrature(curve, cutoff, nyquist_points(r_top, diam));
    const double dr = window / opts.radial_offsets;
    std::vector<std::complex<double>> acc(static_cast<std::size_t>(opts.radial_offsets));
    double best = 0.0;
    for (int d = 0; d < opts.n_directions; ++d) {
      const double th = 2.0 * std::numbers::pi * d / opts.n_directions;
      const Vec2d u(std::cos(th), std::sin(th));
      std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
      for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double t = u.dot(q.nodes[i]);
        std::complex<double> e = q.weights[i] * std::polar(1.0, radii[ir] * t);
        const std::complex<double> step = std::polar(1.0, dr * t);
        for (auto& a : acc) {
          a += e;
          e *= step;
        }
      }
      for (const auto& a : acc) best = std::max(best, std::abs(a));
    }
    return best;
  });
  for (double v : fit.sup_values)
    if (!(v > 0.0)) throw Error(Errc::degenerate, "decay_exponent: vanishing transform");
  const auto [slope, rms] = loglog_slope(fit.radii, fit.sup_values);
  fit.exponent = -slope;
  fit.residual = rms;
  return fit;
}

namespace {

// 15-point Gauss-Kronrod nodes and weights on [-1, 1].
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
std::pair<double, double> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {kron * h, std::abs((kron - gauss) * h)};
}

template <typename F>
std::pair<double, double> adaptive(const F& f, double a, double b, double tol, int depth) {
  const auto [v, e] = gk15(f, a, b);
  if (e <= tol || depth >= 30) return {v, e};
  const double m = 0.5 * (a + b);
  const auto l = adaptive(f, a, m, 0.5 * tol, depth + 1);
  const auto r = adaptive(f, m, b, 0.5 * tol, depth + 1);
  return {l.first + r.first, l.second + r.second};
}

}  // namespace

KernelValue cancellation_kernel_detail(double rho) {
  if (!(rho >= 1e-3 * (1.0 - 1e-12) && rho <= 1e3 * (1.0 + 1e-12)))
    throw Error(Errc::out_of_range, "cancellation_kernel: rho must lie in [1e-3, 1e3]");
  const double cut = 50.0 / rho + 50.0;
  auto g = [](double r) { return r * r * r / (r * r * r * r + 1.0); };
  auto integrand = [&](double r) { return bessel_j(2, rho * r) * g(r); };

  std::vector<double> breaks{0.0};
  for (double b = 1.0 / 64.0; b < cut; b *= 2.0) breaks.push_back(b);
  const double half_period = std::numbers::pi / rho;
  for (double b = half_period; b < cut; b += half_period) breaks.push_back(b);
  breaks.push_back(cut);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14 * (1.0 + b); }),
               breaks.end());

  const double piece_tol = 1e-9 / static_cast<double>(breaks.size());
  double sum = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const auto [v, e] = adaptive(integrand, breaks[i], breaks[i + 1], piece_tol, 0);
    sum += v;
    err += e;
  }
  // Tail beyond the cut by one integration by parts with
  // J_2(u) = -u d/du [u^{-1} J_1(u)]; the remainder is bounded by (4/5) cut^{-5} / rho.
  sum += g(cut) * bessel_j(1, rho * cut) / rho;
  err += 0.8 * std::pow(cut, -5.0) / rho;

  const double factor = -2.0 * std::numbers::pi;
  KernelValue out{factor * sum, std::abs(factor) * err};
  if (out.error > 1e-6)
    throw Error(Errc::tolerance_not_met, "cancellation_kernel: error estimate exceeds 1e-6");
  return out;
}

double cancellation_kernel(double rho) { return cancellation_kernel_detail(rho).value; }

CancellationSup cancellation_sup(const std::vector<double>& rho_grid) {
  if (rho_grid.empty()) throw Error(Errc::empty, "cancellation_sup: empty grid");
  CancellationSup out;
  out.rho = rho_grid;
  out.values = parallel_map(rho_grid.size(), [&](std::size_t i) { return cancellation_kernel(rho_grid[i]); });
  out.sup = -1.0;
  for (std::size_t i = 0; i < rho_grid.size(); ++i)
    if (std::abs(out.values[i]) > out.sup) {
      out.sup = std::abs(out.values[i]);
      out.argmax = rho_grid[i];
    }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace bilayer
