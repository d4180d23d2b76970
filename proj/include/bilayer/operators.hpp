#pragma once

// Periodic spectral discretization of D_m + V and D_trig + V on [-L, L]^2.

#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bilayer/symbol.hpp"

namespace bilayer {

using cd = std::complex<double>;

/// N x N periodic grid on [-L, L)^2.  Flat index p = iy * N + ix.
struct Grid {
  int n{0};
  double half_width{0};

  double dx() const { return 2.0 * half_width / n; }
  double dxi() const { return std::numbers::pi / half_width; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(n) * n; }

  double x(int i) const { return -half_width + i * dx(); }
  /// Signed frequency number of DFT index k: k for k < N/2, k - N otherwise.
  int signed_index(int k) const { return k < n / 2 ? k : k - n; }
  double xi(int k) const { return dxi() * signed_index(k); }

  Vec2d point(Eigen::Index p) const {
    return {x(static_cast<int>(p % n)), x(static_cast<int>(p / n))};
  }
  Vec2d frequency(Eigen::Index p) const {
    return {xi(static_cast<int>(p % n)), xi(static_cast<int>(p / n))};
  }
  /// Ascending per-axis frequency list (pi / L) k, k = -N/2, ..., N/2 - 1.
  std::vector<double> frequencies() const;
};

Grid build_grid(int n, double half_width);

using SpinorValues = Eigen::Matrix<cd, Eigen::Dynamic, 2>;

struct SpinorField {
  Grid grid;
  SpinorValues values;  // row p, column = spinor component

  explicit SpinorField(const Grid& g) : grid(g), values(SpinorValues::Zero(g.size(), 2)) {}
  SpinorField(const Grid& g, SpinorValues v) : grid(g), values(std::move(v)) {}

  /// Discrete L^2 norm, sqrt(sum |u|^2 dx^2).
  double norm() const { return values.norm() * grid.dx(); }
};

/// Pointwise 2x2 potential with its polar factors A = |V|^{1/2}, B = U |V|^{1/2}.
struct PotentialField {
  Grid grid;
  std::string family;
  std::vector<Mat2cd> values;
  std::vector<Mat2cd> a;
  std::vector<Mat2cd> b;

  double max_norm() const;
};

/// Largest singular value of a 2x2 matrix.
double operator_norm(const Mat2cd& m);

/// Pointwise SVD polar decomposition; singular values below 1e-14 are dropped
/// from the partial isometry.
PotentialField polar_factors(const Grid& grid, std::vector<Mat2cd> values, std::string family = {});

/// 2-D DFT on the grid (unnormalized forward, 1/N^2 inverse).
class Fft2 {
 public:
  explicit Fft2(int n);
  ~Fft2();
  Fft2(Fft2&&) noexcept;
  Fft2& operator=(Fft2&&) noexcept;

  void forward(Eigen::Ref<Eigen::VectorXcd> data);
  void inverse(Eigen::Ref<Eigen::VectorXcd> data);

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

/// Symbol values on the grid frequencies, indexed like the field.
using SymbolTable = std::vector<Mat2cd>;

SymbolTable tabulate(const MultiplierSymbol& symbol, const Grid& grid);

SpinorField apply_multiplier(const SymbolTable& table, const SpinorField& u);
SpinorField apply_multiplier(const MultiplierSymbol& symbol, const SpinorField& u);

/// (M(xi) - z)^{-1} = (M(xi) + z) / (s(xi) - z^2) on the grid; throws
/// Errc::near_singular when z is within 1e-8 of +-sqrt(s) at a grid frequency.
/// `weight` multiplies the symbol by a scalar frequency cutoff.
SymbolTable resolvent_table(SymbolKind kind, cd z, double m, const Grid& grid,
                            const std::function<double(const Vec2d&)>& weight = {});

SpinorField free_resolvent_apply(SymbolKind kind, cd z, double m, const SpinorField& u);

/// (M(D) - z) u, the free operator shifted by z.
SpinorField free_operator_shift_apply(SymbolKind kind, cd z, double m, const SpinorField& u);

struct BirmanSchwinger {
  Eigen::MatrixXcd k;                  // 2|S| x 2|S|, row/col 2 * j + component
  std::vector<Eigen::Index> support;   // grid indices of S
};

struct BsOptions {
  double support_threshold = 1e-10;    // relative to max ||V(x)||
  std::function<double(const Vec2d&)> frequency_weight;  // optional cutoff chi(D)
};

/// K(z) = A (M(D) - z)^{-1} B restricted to the numerical support of V.
BirmanSchwinger bs_matrix(SymbolKind kind, cd z, double m, const PotentialField& v,
                          const BsOptions& opts = {});

struct PowerResult {
  double value{0};
  int iterations{0};
  bool converged{false};
};

/// Largest singular value by power iteration on K^* K.  Runs from the all-ones
/// vector and from a fixed Weyl-phase vector and keeps the larger estimate.
PowerResult power_norm(const Eigen::MatrixXcd& k, double rel_tol = 1e-8, int max_iter = 500);

PowerResult bs_norm(SymbolKind kind, cd z, double m, const PotentialField& v,
                    const BsOptions& opts = {});

/// The same norm, matrix-free: power iteration with A R_0(z) B applied by FFT
/// on the full grid, from the same start vectors.
PowerResult bs_norm_operator(SymbolKind kind, cd z, double m, const PotentialField& v,
                             double rel_tol = 1e-8, int max_iter = 500);

/// (sum sigma_i^alpha)^{1/alpha}.
double schatten_norm(const Eigen::MatrixXcd& k, double alpha);

/// Smooth partition of unity chi_1 + chi_2 + chi_3 = 1 in frequency space:
/// chi_1 = 1 on B_delta(C), supported in B_{2 delta}(C); chi_2 = 0 for
/// |xi| <= 1/(2 delta), 1 for |xi| >= 1/delta; chi_3 the remainder.
struct FrequencyPartition {
  double delta{0.1};
  std::vector<Vec2d> centers;

  double chi1(const Vec2d& xi) const;
  double chi2(const Vec2d& xi) const;
  double chi3(const Vec2d& xi) const { return 1.0 - chi1(xi) - chi2(xi); }
};

/// Partition for D_trig with centers at the critical points of P.
FrequencyPartition frequency_cutoffs(double delta);
/// Partition with explicit centers (e.g. the saddles only).
FrequencyPartition frequency_cutoffs(double delta, std::vector<Vec2d> centers);

/// Smooth step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);

/// Dense matrix of M(D) + V on the grid (2 N^2 <= 4608).  Flattening of a
/// spinor field is component-major: index c * N^2 + p.
Eigen::MatrixXcd assemble_full_operator(SymbolKind kind, double m, const PotentialField& v);

struct Eigenvalue {
  cd z;
  double residual;  // dense: ||(D - z) v|| / ||v||; bs-scan: |mu(z) + 1|
  // dense only: share of |v|^2 on the core {||V(x)|| >= 1e-2 max ||V||}
  double localization{std::numeric_limits<double>::quiet_NaN()};
};

struct ScanWindow {
  double re_min{0}, re_max{0}, im_min{0}, im_max{0};
  int n_re{41}, n_im{21};
};

enum class EigenMethod { dense, bs_scan };

std::vector<Eigenvalue> eigenvalues_dense(SymbolKind kind, double m, const PotentialField& v);

std::vector<Eigenvalue> eigenvalues_bs_scan(SymbolKind kind, double m, const PotentialField& v,
                                            const ScanWindow& window, const BsOptions& opts = {});

std::vector<Eigenvalue> eigenvalues(SymbolKind kind, double m, const PotentialField& v,
                                    EigenMethod method, const ScanWindow& window = {});

/// Eigenvalue of K(z) nearest to -1.
cd nearest_bs_eigenvalue(SymbolKind kind, cd z, double m, const PotentialField& v,
                         const BsOptions& opts = {});

}  // namespace bilayer
