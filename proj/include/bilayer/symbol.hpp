#pragma once

// Scalar and matrix symbols of the bilayer operators D_m and D_trig and the
// spectral-parameter functions k(z), zeta(z).

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "bilayer/error.hpp"

namespace bilayer {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
using CMat2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

using Vec2d = Vec2<double>;
using Mat2d = Mat2<double>;
using Mat2cd = CMat2<double>;

enum class SymbolKind { bilayer_mass, trig_warp, scalar_cutoff, custom };

/// Branch of the fourth root of z^2 - m^2 with argument in [0, pi/2).
///
/// The principal fourth root has argument in (-pi/4, pi/4]; roots with
/// negative argument are rotated by i into the quarter plane.  z = +-m gives 0.
template <typename Scalar>
std::complex<Scalar> eval_k(std::complex<Scalar> z, Scalar m) {
  const std::complex<Scalar> w = z * z - std::complex<Scalar>(m * m, 0);
  if (w == std::complex<Scalar>(0, 0)) return {0, 0};
  const Scalar mod = std::sqrt(std::sqrt(std::abs(w)));
  const Scalar phase = std::arg(w) / Scalar(4);
  std::complex<Scalar> k = std::polar(mod, phase);
  if (phase < Scalar(0)) k *= std::complex<Scalar>(0, 1);
  return k;
}

template <typename Scalar>
std::complex<Scalar> eval_zeta(std::complex<Scalar> z, Scalar m) {
  const std::complex<Scalar> k = eval_k(z, m);
  if (k == std::complex<Scalar>(0, 0))
    throw Error(Errc::pole, "zeta(z) is singular at z = +-m");
  return (z + m) / (k * k);
}

/// Spectral parameter together with its derived k(z) and zeta(z).
template <typename Scalar>
struct SpectralPoint {
  std::complex<Scalar> z;
  Scalar m{0};
  std::complex<Scalar> k;
  std::complex<Scalar> zeta;
  bool has_zeta{false};

  SpectralPoint(std::complex<Scalar> z_, Scalar m_) : z(z_), m(m_), k(eval_k(z_, m_)) {
    if (k != std::complex<Scalar>(0, 0)) {
      zeta = (z + m) / (k * k);
      has_zeta = true;
    }
  }
};

/// P(xi) = |xi|^4 + 2 Re(xi^3) + |xi|^2, the square of the trig-warp dispersion.
template <typename Scalar>
Scalar eval_P(const Vec2<Scalar>& xi) {
  const Scalar x = xi.x(), y = xi.y();
  const Scalar r2 = x * x + y * y;
  return r2 * r2 + Scalar(2) * (x * x * x - Scalar(3) * x * y * y) + r2;
}

template <typename Scalar>
struct PDerivatives {
  Vec2<Scalar> gradient;
  Mat2<Scalar> hessian;
};

template <typename Scalar>
PDerivatives<Scalar> eval_P_derivatives(const Vec2<Scalar>& xi) {
  const Scalar x = xi.x(), y = xi.y();
  const Scalar r2 = x * x + y * y;
  PDerivatives<Scalar> d;
  d.gradient << Scalar(4) * x * r2 + Scalar(6) * (x * x - y * y) + Scalar(2) * x,
      Scalar(4) * y * r2 - Scalar(12) * x * y + Scalar(2) * y;
  const Scalar pxx = Scalar(12) * x * x + Scalar(4) * y * y + Scalar(12) * x + Scalar(2);
  const Scalar pxy = Scalar(8) * x * y - Scalar(12) * y;
  const Scalar pyy = Scalar(4) * x * x + Scalar(12) * y * y - Scalar(12) * x + Scalar(2);
  d.hessian << pxx, pxy, pxy, pyy;
  return d;
}

// w = xi_1 + i xi_2.  Hermitian normal forms:
//   bilayer-mass  [[m, conj(w^2)], [w^2, -m]],          square (m^2 + |xi|^4) Id
//   trig-warp     [[0, conj(q)], [q, 0]], q = w^2 + conj(w), square P(xi) Id
template <typename Scalar>
CMat2<Scalar> symbol_matrix(SymbolKind kind, const Vec2<Scalar>& xi, Scalar m) {
  using C = std::complex<Scalar>;
  const C w(xi.x(), xi.y());
  CMat2<Scalar> s;
  switch (kind) {
    case SymbolKind::bilayer_mass: {
      const C w2 = w * w;
      s << C(m, 0), std::conj(w2), w2, C(-m, 0);
      return s;
    }
    case SymbolKind::trig_warp: {
      const C q = w * w + std::conj(w);
      s << C(0, 0), std::conj(q), q, C(0, 0);
      return s;
    }
    default:
      throw Error(Errc::out_of_range, "symbol_matrix: kind must be bilayer-mass or trig-warp");
  }
}

/// s(xi) with M(xi)^2 = s(xi) Id.
template <typename Scalar>
Scalar symbol_square(SymbolKind kind, const Vec2<Scalar>& xi, Scalar m) {
  switch (kind) {
    case SymbolKind::bilayer_mass: {
      const Scalar r2 = xi.squaredNorm();
      return m * m + r2 * r2;
    }
    case SymbolKind::trig_warp:
      return eval_P(xi);
    default:
      throw Error(Errc::out_of_range, "symbol_square: kind must be bilayer-mass or trig-warp");
  }
}

template <typename Scalar>
struct Dispersion {
  Scalar lower;
  Scalar upper;
};

// Ordered eigenvalues of symbol_matrix; |q| and hypot(m, |xi|^2) avoid the
// cancellation of sqrt(s) near zeros of s.
template <typename Scalar>
Dispersion<Scalar> dispersion(SymbolKind kind, const Vec2<Scalar>& xi, Scalar m) {
  using std::abs;
  using std::hypot;
  Scalar root;
  switch (kind) {
    case SymbolKind::bilayer_mass:
      root = hypot(m, xi.squaredNorm());
      break;
    case SymbolKind::trig_warp: {
      const std::complex<Scalar> w(xi.x(), xi.y());
      root = abs(w * w + std::conj(w));
      break;
    }
    default:
      throw Error(Errc::out_of_range, "dispersion: kind must be bilayer-mass or trig-warp");
  }
  return {-root, root};
}

/// A 2x2 matrix-valued Fourier multiplier symbol.
struct MultiplierSymbol {
  SymbolKind kind{SymbolKind::custom};
  double m{0};
  std::function<double(const Vec2d&)> scalar;  // scalar-cutoff: value times Id
  std::function<Mat2cd(const Vec2d&)> matrix;  // custom

  Mat2cd operator()(const Vec2d& xi) const {
    switch (kind) {
      case SymbolKind::bilayer_mass:
      case SymbolKind::trig_warp:
        return symbol_matrix(kind, xi, m);
      case SymbolKind::scalar_cutoff:
        return Mat2cd::Identity() * scalar(xi);
      case SymbolKind::custom:
        return matrix(xi);
    }
    return Mat2cd::Zero();
  }

  static MultiplierSymbol bilayer(double m) { return {SymbolKind::bilayer_mass, m, {}, {}}; }
  static MultiplierSymbol trig() { return {SymbolKind::trig_warp, 0.0, {}, {}}; }
  static MultiplierSymbol scalar_cutoff(std::function<double(const Vec2d&)> f) {
    return {SymbolKind::scalar_cutoff, 0.0, std::move(f), {}};
  }
  static MultiplierSymbol custom(std::function<Mat2cd(const Vec2d&)> f) {
    return {SymbolKind::custom, 0.0, {}, std::move(f)};
  }
  static MultiplierSymbol identity() {
    return scalar_cutoff([](const Vec2d&) { return 1.0; });
  }
};

}  // namespace bilayer
