#include "bilayer/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bilayer/error.hpp"
#include "bilayer/symbol.hpp"

namespace bilayer {

double lq_norm(const PotentialField& v, double q) {
  if (!(q >= 1.0 && q <= 2.0)) throw Error(Errc::out_of_range, "lq_norm: q must lie in [1, 2]");
  double sum = 0.0;
  for (const auto& m : v.values) sum += std::pow(operator_norm(m), q);
  const double dx = v.grid.dx();
  return sum * dx * dx;
}

double thm1_lhs(cd z, double m, double q) {
  if (!(q > 1.0 && q <= 1.5)) throw Error(Errc::out_of_range, "thm1_lhs: q must lie in (1, 3/2]");
  const cd zeta = eval_zeta(z, m);
  const double k = std::abs(eval_k(z, m));
  const double a = std::abs(zeta);
  return std::pow(k, 2.0 * q - 2.0) / std::pow(1.0 + a + 1.0 / a, q);
}

double lfs_lhs(cd z, double m, double q) {
  if (!(q > 1.0 && q < 4.0 / 3.0)) throw Error(Errc::out_of_range, "lfs_lhs: q must lie in (1, 4/3)");
  const cd zm = z - m, zp = z + m;
  if (std::abs(zm) == 0.0 || std::abs(zp) == 0.0) throw Error(Errc::pole, "lfs_lhs: z = +-m");
  const double r = std::abs(zm / zp);
  return std::pow(std::abs(zm * zp), 0.5 * (1.0 - q)) *
         std::pow(std::sqrt(r) + 1.0 / std::sqrt(r) + 1.0, q);
}

bool thm1_region_ii(cd z, double m, double v1, double c1) {
  if (!(m > 0.0)) throw Error(Errc::out_of_range, "thm1_region_ii: requires m > 0");
  // closed region; a few ulps of slack so a boundary point built in floating point counts
  const double radius = c1 * m * v1 * v1;
  return std::min(std::abs(z - m), std::abs(z + m)) <= radius * (1.0 + 8.0 * std::numeric_limits<double>::epsilon()) + 8.0 * std::numeric_limits<double>::epsilon() * m;
}

double alpha_qrd(double q, double r, double d, double epsilon) {
  if (!(d >= 2.0) || !(r > 0.0) || !(epsilon > 0.0))
    throw Error(Errc::out_of_range, "alpha_qrd: need d >= 2, r > 0, epsilon > 0");
  if (!(q >= 1.0 && q <= 1.0 + r)) throw Error(Errc::out_of_range, "alpha_qrd: q must lie in [1, 1 + r]");
  if (d / (d - r) <= q) return 2.0 * (d - 1.0 - r) * q / (d - q);
  return (2.0 * r * q + epsilon) / (2.0 * r * q - d * (q - 1.0));
}

double n_q(cd z, double q) {
  if (!(q >= 1.0 && q <= 1.5)) throw Error(Errc::out_of_range, "n_q: q must lie in [1, 3/2]");
  constexpr double patch = 1.0 / 64.0;
  constexpr double crit = 1.0 / 16.0;
  const double d0 = std::abs(z), d1 = std::abs(z - crit);
  if (d0 == 0.0 || d1 == 0.0) throw Error(Errc::pole, "n_q: z in {0, 1/16}");
  const double e = 1.0 / q - 1.0;
  auto upsilon = [&](double d) { return q > 1.0 ? 1.0 : -std::log(d); };
  if (d0 <= patch) return std::pow(d0, e);
  if (d1 <= patch) return upsilon(d1) * std::pow(d1, e);
  const double c0 = std::pow(patch, e);
  const double c1 = upsilon(patch) * std::pow(patch, e);
  const double tau = (d1 - patch) / ((d1 - patch) + (d0 - patch));
  return std::max(c0, c1 - (c1 - c0) * tau);
}

Thm2Membership thm2_regions(cd z, double q, double vq, double v1, double c) {
  if (!(q >= 1.0 && q <= 1.5)) throw Error(Errc::out_of_range, "thm2_regions: q must lie in [1, 3/2]");
  Thm2Membership out;
  out.q0 = std::min(q, 1.25);
  const double a = std::abs(z), b = std::abs(z - 1.0 / 16.0);
  out.i = std::pow(a, q - 1.0) <= c * (1.0 + vq);
  if (q > 1.0) out.ii = std::pow(a, q - 1.0) <= c * vq || std::pow(b, q - 1.0) <= c * vq;
  if (q == 1.0) out.iii = v1 > 0.0 && b <= std::exp(-c / v1);
  return out;
}

std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::thm1_i: return "thm1-i";
    case Theorem::thm1_ii: return "thm1-ii";
    case Theorem::thm2_i: return "thm2-i";
    case Theorem::thm2_ii: return "thm2-ii";
    case Theorem::thm2_iii: return "thm2-iii";
    case Theorem::lfs: return "lfs";
  }
  return "unknown";
}

BoundReport thm1_report(cd z, double m, double q, double vnorm_q, double c) {
  BoundReport r;
  r.theorem = Theorem::thm1_i;
  r.z = z;
  r.m = m;
  r.q = q;
  r.lhs = thm1_lhs(z, m, q);
  r.vnorm_q = vnorm_q;
  r.ratio = vnorm_q > 0.0 ? r.lhs / vnorm_q : std::numeric_limits<double>::infinity();
  r.member = r.lhs <= c * vnorm_q;
  return r;
}

double empirical_constant(const std::vector<BoundReport>& reports) {
  if (reports.empty()) throw Error(Errc::empty, "empirical_constant: no reports");
  double best = 0.0;
  for (const auto& r : reports) {
    if (!(r.vnorm_q > 0.0)) throw Error(Errc::out_of_range, "empirical_constant: vnorm_q must be positive");
    best = std::max(best, r.ratio);
  }
  return best;
}

}  // namespace bilayer
