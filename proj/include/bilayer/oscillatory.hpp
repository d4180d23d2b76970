#pragma once

// Fourier transforms of arclength measures on level curves, decay-exponent
// fits, and the cancellation kernel of the bilayer Green's function.

#include <complex>
#include <functional>
#include <vector>

#include "bilayer/fermi.hpp"

namespace bilayer {

/// J_n(x) for 0 <= n <= 4, x >= 0.  Power series up to x = 12; above that the
/// Hankel expansion for J_0, J_1 and forward recurrence (stable for n < x).
double bessel_j(int n, double x);

using Weight = std::function<double(const Vec2d&)>;

/// Nodes and weights of a trapezoid rule for (chi dsigma) on a traced curve.
struct ArcQuadrature {
  std::vector<Vec2d> nodes;
  std::vector<double> weights;
  double support_diameter{0};
};

/// Resamples every component at uniform chord-arclength spacing with cubic
/// interpolation; `total_points` are shared in proportion to length.
ArcQuadrature arclength_quadrature(const LevelCurve& curve, const Weight& cutoff,
                                   std::size_t total_points);

/// Points required by the Nyquist guard at frequency |x|.
std::size_t nyquist_points(double x_norm, double diameter);

/// Diameter of the part of the curve where the cutoff is nonzero.
double support_diameter(const LevelCurve& curve, const Weight& cutoff);

/// \int e^{i x . xi} chi(xi) dsigma(xi) over the curve.  `points` defaults to
/// the Nyquist guard; fewer points raise Errc::under_resolved.
std::complex<double> ft_arclength(const LevelCurve& curve, const Weight& cutoff, const Vec2d& x,
                                  std::size_t points = 0);

struct DecayFit {
  std::vector<double> radii;
  std::vector<double> sup_values;
  double exponent{0};  // fitted r in |x|^{-r}
  double residual{0};  // rms of the log-log least-squares fit
};

struct DecayOptions {
  int n_directions = 128;
  // Sup is also taken over radial offsets within one interference period
  // 2 pi / diameter, so nodal radii of the oscillation do not enter the fit.
  int radial_offsets = 8;
};

DecayFit decay_exponent(const LevelCurve& curve, const Weight& cutoff,
                        const std::vector<double>& radii, const DecayOptions& opts = {});

/// Least-squares slope of log(y) against log(x), and the rms residual of the fit.
std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct KernelValue {
  double value;
  double error;  // adaptive estimate plus tail remainder bound
};

/// -2 pi \int_0^inf J_2(r rho) r^3 / (r^4 + 1) dr, the x-space kernel of
/// (xi_1 +- i xi_2)^2 / (|xi|^4 + 1) at |x| = rho.
KernelValue cancellation_kernel_detail(double rho);
double cancellation_kernel(double rho);

struct CancellationSup {
  double sup;
  double argmax;
  std::vector<double> rho;
  std::vector<double> values;
};

CancellationSup cancellation_sup(const std::vector<double>& rho_grid);

/// Log-spaced grid over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace bilayer
