#include "bilayer/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <unsupported/Eigen/FFT>

#include <lapacke.h>

#include "bilayer/error.hpp"
#include "bilayer/fermi.hpp"
#include "bilayer/parallel.hpp"

namespace bilayer {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

std::vector<double> Grid::frequencies() const {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = dxi() * (k - n / 2);
  return out;
}

Grid build_grid(int n, double half_width) {
  if (!is_power_of_two(n) || n < 16 || n > 256)
    throw Error(Errc::out_of_range, "build_grid: N must be a power of two in [16, 256]");
  if (!(half_width >= 4.0 && half_width <= 64.0))
    throw Error(Errc::out_of_range, "build_grid: L must lie in [4, 64]");
  return Grid{n, half_width};
}

double operator_norm(const Mat2cd& m) {
  const double f2 = m.squaredNorm();
  const double d = std::abs(m.determinant());
  const double disc = std::max(0.0, f2 * f2 - 4.0 * d * d);
  return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

double PotentialField::max_norm() const {
  double best = 0.0;
  for (const auto& v : values) best = std::max(best, operator_norm(v));
  return best;
}

PotentialField polar_factors(const Grid& grid, std::vector<Mat2cd> values, std::string family) {
  if (static_cast<Eigen::Index>(values.size()) != grid.size())
    throw Error(Errc::out_of_range, "polar_factors: field size does not match grid");
  PotentialField out{grid, std::move(family), std::move(values), {}, {}};
  out.a.resize(out.values.size());
  out.b.resize(out.values.size());
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    const Mat2cd& v = out.values[p];
    Mat2cd a = Mat2cd::Zero(), b = Mat2cd::Zero();
    if (v.cwiseAbs().maxCoeff() > 0.0) {
      Eigen::JacobiSVD<Mat2cd> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      for (int i = 0; i < 2; ++i) {
        if (s(i) < 1e-14) continue;
        const double r = std::sqrt(s(i));
        const auto x = svd.matrixV().col(i);
        a += r * x * x.adjoint();
        b += r * svd.matrixU().col(i) * x.adjoint();
      }
    }
    out.a[p] = a;
    out.b[p] = b;
  }
  return out;
}

struct Fft2::Impl {
  Eigen::FFT<double> fft;
  std::vector<cd> in, out;
};

Fft2::Fft2(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  impl_->in.resize(n);
  impl_->out.resize(n);
}
Fft2::~Fft2() = default;
Fft2::Fft2(Fft2&&) noexcept = default;
Fft2& Fft2::operator=(Fft2&&) noexcept = default;

namespace {

template <typename Op>
void fft_axes(int n, Eigen::Ref<Eigen::VectorXcd> data, std::vector<cd>& in, std::vector<cd>& out,
              Op op) {
  for (int j = 0; j < n; ++j) {
    cd* row = data.data() + static_cast<Eigen::Index>(j) * n;
    std::copy(row, row + n, in.begin());
    op(out.data(), in.data());
    std::copy(out.begin(), out.end(), row);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) in[j] = data(static_cast<Eigen::Index>(j) * n + i);
    op(out.data(), in.data());
    for (int j = 0; j < n; ++j) data(static_cast<Eigen::Index>(j) * n + i) = out[j];
  }
}

}  // namespace

void Fft2::forward(Eigen::Ref<Eigen::VectorXcd> data) {
  auto& fft = impl_->fft;
  const int n = n_;
  fft_axes(n_, data, impl_->in, impl_->out, [&](cd* dst, const cd* src) { fft.fwd(dst, src, n); });
}

void Fft2::inverse(Eigen::Ref<Eigen::VectorXcd> data) {
  auto& fft = impl_->fft;
  const int n = n_;
  fft_axes(n_, data, impl_->in, impl_->out, [&](cd* dst, const cd* src) { fft.inv(dst, src, n); });
}

SymbolTable tabulate(const MultiplierSymbol& symbol, const Grid& grid) {
  SymbolTable t(grid.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p) t[p] = symbol(grid.frequency(p));
  return t;
}

namespace {

SpinorValues apply_table(const SymbolTable& table, const Grid& grid, const SpinorValues& u,
                         Fft2& fft) {
  Eigen::VectorXcd c0 = u.col(0), c1 = u.col(1);
  fft.forward(c0);
  fft.forward(c1);
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Mat2cd& s = table[p];
    const cd a = c0(p), b = c1(p);
    c0(p) = s(0, 0) * a + s(0, 1) * b;
    c1(p) = s(1, 0) * a + s(1, 1) * b;
  }
  fft.inverse(c0);
  fft.inverse(c1);
  SpinorValues out(grid.size(), 2);
  out.col(0) = c0;
  out.col(1) = c1;
  return out;
}

SymbolTable adjoint(const SymbolTable& t) {
  SymbolTable out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].adjoint();
  return out;
}

// Periodic convolution kernel G of a multiplier: (T u)(p) = sum_q G(p - q) u(q).
std::vector<Mat2cd> convolution_kernel(const SymbolTable& table, const Grid& grid) {
  Fft2 fft(grid.n);
  std::vector<Mat2cd> g(grid.size());
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXcd col(grid.size());
      for (Eigen::Index p = 0; p < grid.size(); ++p) col(p) = table[p](r, c);
      fft.inverse(col);
      for (Eigen::Index p = 0; p < grid.size(); ++p) g[p](r, c) = col(p);
    }
  return g;
}

Eigen::Index difference_index(const Grid& grid, Eigen::Index p, Eigen::Index q) {
  const int n = grid.n;
  const int dx = wrap(static_cast<int>(p % n) - static_cast<int>(q % n), n);
  const int dy = wrap(static_cast<int>(p / n) - static_cast<int>(q / n), n);
  return static_cast<Eigen::Index>(dy) * n + dx;
}

}  // namespace

SpinorField apply_multiplier(const SymbolTable& table, const SpinorField& u) {
  Fft2 fft(u.grid.n);
  return SpinorField(u.grid, apply_table(table, u.grid, u.values, fft));
}

SpinorField apply_multiplier(const MultiplierSymbol& symbol, const SpinorField& u) {
  return apply_multiplier(tabulate(symbol, u.grid), u);
}

SymbolTable resolvent_table(SymbolKind kind, cd z, double m, const Grid& grid,
                            const std::function<double(const Vec2d&)>& weight) {
  if (kind != SymbolKind::bilayer_mass && kind != SymbolKind::trig_warp)
    throw Error(Errc::out_of_range, "resolvent_table: kind must be bilayer-mass or trig-warp");
  SymbolTable t(grid.size());
  const cd z2 = z * z;
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Vec2d xi = grid.frequency(p);
    const auto d = dispersion(kind, xi, m);
    if (std::abs(z - d.lower) <= 1e-8 || std::abs(z - d.upper) <= 1e-8)
      throw Error(Errc::near_singular, "resolvent: z lies on the discrete free spectrum");
    const double s = symbol_square(kind, xi, m);
    Mat2cd r = symbol_matrix(kind, xi, m).cast<cd>();
    r += z * Mat2cd::Identity();
    r /= (s - z2);
    if (weight) r *= weight(xi);
    t[p] = r;
  }
  return t;
}

SpinorField free_resolvent_apply(SymbolKind kind, cd z, double m, const SpinorField& u) {
  return apply_multiplier(resolvent_table(kind, z, m, u.grid), u);
}

SpinorField free_operator_shift_apply(SymbolKind kind, cd z, double m, const SpinorField& u) {
  SymbolTable t(u.grid.size());
  for (Eigen::Index p = 0; p < u.grid.size(); ++p)
    t[p] = symbol_matrix(kind, u.grid.frequency(p), m) - z * Mat2cd::Identity();
  return apply_multiplier(t, u);
}

BirmanSchwinger bs_matrix(SymbolKind kind, cd z, double m, const PotentialField& v,
                          const BsOptions& opts) {
  const Grid& grid = v.grid;
  BirmanSchwinger out;
  const double vmax = v.max_norm();
  if (vmax == 0.0) {
    out.k.resize(0, 0);
    return out;
  }
  for (Eigen::Index p = 0; p < grid.size(); ++p)
    if (operator_norm(v.values[p]) > opts.support_threshold * vmax) out.support.push_back(p);
  const auto s = static_cast<Eigen::Index>(out.support.size());
  if (2 * s > 4096) throw Error(Errc::too_large, "bs_matrix: support exceeds 2048 grid points");

  const auto g = convolution_kernel(resolvent_table(kind, z, m, grid, opts.frequency_weight), grid);
  out.k.resize(2 * s, 2 * s);
  parallel_map(static_cast<std::size_t>(s), [&](std::size_t i) {
    const Eigen::Index p = out.support[i];
    const Mat2cd& a = v.a[p];
    for (Eigen::Index j = 0; j < s; ++j) {
      const Eigen::Index q = out.support[j];
      out.k.block<2, 2>(2 * static_cast<Eigen::Index>(i), 2 * j) =
          a * g[difference_index(grid, p, q)] * v.b[q];
    }
    return 0;
  });
  return out;
}

namespace {

// Deterministic second start: Weyl-sequence phases.  The all-ones vector can be
// orthogonal to the top singular subspace when V is symmetric.
cd weyl_phase(Eigen::Index i) {
  const double t = std::fmod(0.6180339887498949 * static_cast<double>(i + 1), 1.0);
  return std::polar(1.0, 2.0 * std::numbers::pi * t);
}

template <typename Vec, typename Apply, typename ApplyAdj>
PowerResult power_iterate(Vec v, Apply apply, ApplyAdj apply_adj, double rel_tol, int max_iter) {
  PowerResult r;
  v /= v.norm();
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vec w = apply(v);
    const double sigma = w.norm();
    r.value = sigma;
    r.iterations = it;
    if (sigma == 0.0) {
      r.converged = true;
      return r;
    }
    const Vec u = apply_adj(w);
    v = u / u.norm();
    if (prev >= 0.0 && std::abs(sigma - prev) <= rel_tol * sigma) {
      r.converged = true;
      return r;
    }
    prev = sigma;
  }
  return r;
}

PowerResult better(const PowerResult& a, const PowerResult& b) {
  PowerResult r = a.value >= b.value ? a : b;
  r.iterations = a.iterations + b.iterations;
  return r;
}

}  // namespace

PowerResult power_norm(const Eigen::MatrixXcd& k, double rel_tol, int max_iter) {
  if (k.size() == 0) return {0.0, 0, true};
  auto apply = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return k * x; };
  auto apply_adj = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return k.adjoint() * x; };
  Eigen::VectorXcd weyl(k.cols());
  for (Eigen::Index i = 0; i < k.cols(); ++i) weyl(i) = weyl_phase(i);
  return better(power_iterate(Eigen::VectorXcd(Eigen::VectorXcd::Ones(k.cols())), apply, apply_adj,
                              rel_tol, max_iter),
                power_iterate(weyl, apply, apply_adj, rel_tol, max_iter));
}

PowerResult bs_norm(SymbolKind kind, cd z, double m, const PotentialField& v,
                    const BsOptions& opts) {
  return power_norm(bs_matrix(kind, z, m, v, opts).k);
}

PowerResult bs_norm_operator(SymbolKind kind, cd z, double m, const PotentialField& v,
                             double rel_tol, int max_iter) {
  const Grid& grid = v.grid;
  const double vmax = v.max_norm();
  if (vmax == 0.0) return {0.0, 0, true};
  const auto r0 = resolvent_table(kind, z, m, grid);
  const auto r0_adj = adjoint(r0);
  Fft2 fft(grid.n);
  auto pointwise = [&](const std::vector<Mat2cd>& f, const SpinorValues& u, bool adj) {
    SpinorValues out(u.rows(), 2);
    for (Eigen::Index p = 0; p < u.rows(); ++p) {
      const Eigen::Vector2cd x = u.row(p).transpose();
      out.row(p) = (adj ? Eigen::Vector2cd(f[p].adjoint() * x) : Eigen::Vector2cd(f[p] * x))
                       .transpose();
    }
    return out;
  };
  auto apply = [&](const SpinorValues& u) -> SpinorValues {
    return pointwise(v.a, apply_table(r0, grid, pointwise(v.b, u, false), fft), false);
  };
  auto apply_adj = [&](const SpinorValues& u) -> SpinorValues {
    return pointwise(v.b, apply_table(r0_adj, grid, pointwise(v.a, u, true), fft), true);
  };
  // the same two starts as the restricted matrix, placed on the numerical support
  SpinorValues ones = SpinorValues::Zero(grid.size(), 2);
  SpinorValues weyl = SpinorValues::Zero(grid.size(), 2);
  Eigen::Index j = 0;
  for (Eigen::Index p = 0; p < grid.size(); ++p)
    if (operator_norm(v.values[p]) > 1e-10 * vmax) {
      ones.row(p).setOnes();
      weyl(p, 0) = weyl_phase(2 * j);
      weyl(p, 1) = weyl_phase(2 * j + 1);
      ++j;
    }
  return better(power_iterate(ones, apply, apply_adj, rel_tol, max_iter),
                power_iterate(weyl, apply, apply_adj, rel_tol, max_iter));
}

double schatten_norm(const Eigen::MatrixXcd& k, double alpha) {
  if (!(alpha >= 1.0)) throw Error(Errc::out_of_range, "schatten_norm: alpha must be >= 1");
  if (k.size() == 0) return 0.0;
  const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXcd>(k).singularValues();
  const double top = s.maxCoeff();
  if (top == 0.0) return 0.0;
  double sum = 0.0;
  for (double x : s) sum += std::pow(x / top, alpha);
  return top * std::pow(sum, 1.0 / alpha);
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double FrequencyPartition::chi1(const Vec2d& xi) const {
  double s = 0.0;
  for (const auto& c : centers) s += 1.0 - smooth_step(((xi - c).norm() - delta) / delta);
  return s;
}

double FrequencyPartition::chi2(const Vec2d& xi) const {
  const double r0 = 0.5 / delta;
  return smooth_step((xi.norm() - r0) / r0);
}

FrequencyPartition frequency_cutoffs(double delta, std::vector<Vec2d> centers) {
  if (!(delta > 0.0 && delta <= 0.2))
    throw Error(Errc::out_of_range, "frequency_cutoffs: delta must lie in (0, 0.2]");
  double reach = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    reach = std::max(reach, centers[i].norm() + 2.0 * delta);
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if ((centers[i] - centers[j]).norm() <= 4.0 * delta)
        throw Error(Errc::overlap, "frequency_cutoffs: critical-point balls overlap");
  }
  if (reach >= 0.5 / delta)
    throw Error(Errc::overlap, "frequency_cutoffs: low and high frequency supports overlap");
  return FrequencyPartition{delta, std::move(centers)};
}

FrequencyPartition frequency_cutoffs(double delta) {
  std::vector<Vec2d> centers;
  for (const auto& c : find_critical_points()) centers.push_back(c.location);
  return frequency_cutoffs(delta, std::move(centers));
}

Eigen::MatrixXcd assemble_full_operator(SymbolKind kind, double m, const PotentialField& v) {
  const Grid& grid = v.grid;
  const Eigen::Index n2 = grid.size();
  if (2 * n2 > 4608) throw Error(Errc::too_large, "assemble_full_operator: 2 N^2 exceeds 4608");
  SymbolTable table(n2);
  for (Eigen::Index p = 0; p < n2; ++p) table[p] = symbol_matrix(kind, grid.frequency(p), m);
  const auto g = convolution_kernel(table, grid);
  Eigen::MatrixXcd d(2 * n2, 2 * n2);
  parallel_map(static_cast<std::size_t>(n2), [&](std::size_t pi) {
    const auto p = static_cast<Eigen::Index>(pi);
    for (Eigen::Index q = 0; q < n2; ++q) {
      const Mat2cd& k = g[difference_index(grid, p, q)];
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) d(r * n2 + p, c * n2 + q) = k(r, c);
    }
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) d(r * n2 + p, c * n2 + p) += v.values[p](r, c);
    return 0;
  });
  return d;
}

std::vector<Eigenvalue> eigenvalues_dense(SymbolKind kind, double m, const PotentialField& v) {
  const Eigen::MatrixXcd d = assemble_full_operator(kind, m, v);
  const auto n = static_cast<lapack_int>(d.rows());
  Eigen::MatrixXcd work = d;
  Eigen::VectorXcd w(n);
  Eigen::MatrixXcd vr(n, n);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'V', n, reinterpret_cast<lapack_complex_double*>(work.data()), n,
      reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1,
      reinterpret_cast<lapack_complex_double*>(vr.data()), n);
  if (info != 0) throw Error(Errc::not_converged, "eigenvalues_dense: zgeev failed");
  const Eigen::MatrixXcd dv = d * vr;
  const Eigen::Index n2 = v.grid.size();
  const double vmax = v.max_norm();
  Eigen::VectorXd core = Eigen::VectorXd::Zero(n);
  for (Eigen::Index p = 0; p < n2; ++p)
    if (vmax > 0.0 && operator_norm(v.values[p]) >= 1e-2 * vmax) core(p) = core(n2 + p) = 1.0;
  std::vector<Eigenvalue> out(n);
  for (lapack_int i = 0; i < n; ++i) {
    const double norm2 = vr.col(i).squaredNorm();
    const double res = (dv.col(i) - w(i) * vr.col(i)).norm() / std::sqrt(norm2);
    const double local = (core.array() * vr.col(i).array().abs2()).sum() / norm2;
    out[i] = {w(i), res, local};
  }
  std::sort(out.begin(), out.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
  });
  return out;
}

cd nearest_bs_eigenvalue(SymbolKind kind, cd z, double m, const PotentialField& v,
                         const BsOptions& opts) {
  const auto k = bs_matrix(kind, z, m, v, opts).k;
  if (k.size() == 0) return cd(0.0, 0.0);
  const Eigen::VectorXcd mu = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(k, false).eigenvalues();
  Eigen::Index best = 0;
  (mu.array() + 1.0).abs().minCoeff(&best);
  return mu(best);
}

std::vector<Eigenvalue> eigenvalues_bs_scan(SymbolKind kind, double m, const PotentialField& v,
                                            const ScanWindow& win, const BsOptions& opts) {
  if (win.n_re < 2 || win.n_im < 1 || win.re_max <= win.re_min || win.im_max < win.im_min)
    throw Error(Errc::out_of_range, "eigenvalues_bs_scan: malformed window");
  const double hre = (win.re_max - win.re_min) / (win.n_re - 1);
  const double him = win.n_im > 1 ? (win.im_max - win.im_min) / (win.n_im - 1) : hre;
  auto node = [&](int i, int j) {
    return cd(win.re_min + i * hre, win.n_im > 1 ? win.im_min + j * him : win.im_min);
  };
  auto defect = [&](cd z) -> cd {
    try {
      return nearest_bs_eigenvalue(kind, z, m, v, opts) + 1.0;
    } catch (const Error& e) {
      if (e.code() == Errc::near_singular) return cd(std::numeric_limits<double>::infinity(), 0);
      throw;
    }
  };

  const auto total = static_cast<std::size_t>(win.n_re) * win.n_im;
  const auto f = parallel_map(total, [&](std::size_t idx) {
    return std::abs(defect(node(static_cast<int>(idx % win.n_re), static_cast<int>(idx / win.n_re))));
  });
  auto at = [&](int i, int j) { return f[static_cast<std::size_t>(j) * win.n_re + i]; };

  std::vector<cd> seeds;
  for (int j = 0; j < win.n_im; ++j)
    for (int i = 0; i < win.n_re; ++i) {
      const double c = at(i, j);
      if (!std::isfinite(c) || c > 0.5) continue;
      bool minimum = true;
      for (int dj = -1; dj <= 1 && minimum; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int ii = i + di, jj = j + dj;
          if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii >= win.n_re || jj >= win.n_im)
            continue;
          if (at(ii, jj) < c) {
            minimum = false;
            break;
          }
        }
      if (minimum) seeds.push_back(node(i, j));
    }

  const double h = 0.25 * std::min(hre, him);
  const double margin = 1e-9 * (1.0 + std::abs(win.re_max) + std::abs(win.re_min));
  auto refined = parallel_map(seeds.size(), [&](std::size_t s) -> std::optional<Eigenvalue> {
    try {
      cd z0 = seeds[s] + h, z1 = seeds[s];
      cd g0 = defect(z0), g1 = defect(z1);
      for (int it = 0; it < 80; ++it) {
        if (!std::isfinite(std::abs(g1)) || !std::isfinite(std::abs(g0))) return std::nullopt;
        if (std::abs(g1) < 1e-13 || g1 == g0) break;
        const cd z2 = z1 - g1 * (z1 - z0) / (g1 - g0);
        z0 = z1;
        g0 = g1;
        z1 = z2;
        g1 = defect(z1);
        if (std::abs(z1 - z0) < 1e-14 * (1.0 + std::abs(z1))) break;
      }
      if (std::abs(g1) >= 1e-6) return std::nullopt;
      if (z1.real() < win.re_min - margin || z1.real() > win.re_max + margin ||
          z1.imag() < win.im_min - margin || z1.imag() > win.im_max + margin)
        return std::nullopt;
      return Eigenvalue{z1, std::abs(g1), std::numeric_limits<double>::quiet_NaN()};
    } catch (const Error& e) {
      if (e.code() == Errc::near_singular) return std::nullopt;
      throw;
    }
  });

  std::vector<Eigenvalue> out;
  for (const auto& r : refined) {
    if (!r) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Eigenvalue& e) {
      return std::abs(e.z - r->z) < 1e-7;
    });
    if (!dup) out.push_back(*r);
  }
  std::sort(out.begin(), out.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
  });
  return out;
}

std::vector<Eigenvalue> eigenvalues(SymbolKind kind, double m, const PotentialField& v,
                                    EigenMethod method, const ScanWindow& window) {
  if (method == EigenMethod::dense) return eigenvalues_dense(kind, m, v);
  return eigenvalues_bs_scan(kind, m, v, window);
}

}  // namespace bilayer
