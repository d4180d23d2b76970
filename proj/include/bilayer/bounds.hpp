#pragma once

// Inclusion-region formulas for D_m + V and D_trig + V, and the empirical
// constant extracted from computed eigenvalues.

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "bilayer/operators.hpp"

namespace bilayer {

/// ||V||_q^q as a Riemann sum of the pointwise operator norm.
double lq_norm(const PotentialField& v, double q);

/// |k|^{2q-2} / (1 + |zeta| + 1/|zeta|)^q.
double thm1_lhs(cd z, double m, double q);

/// |z^2 - m^2|^{(1-q)/2} (sqrt|(z-m)/(z+m)| + sqrt|(z+m)/(z-m)| + 1)^q.
double lfs_lhs(cd z, double m, double q);

/// min(|z - m|, |z + m|) <= C1 m v1^2.
bool thm1_region_ii(cd z, double m, double v1, double c1);

/// Schatten exponent for decay rate r in dimension d; "2rq+" is 2rq + epsilon.
double alpha_qrd(double q, double r, double d, double epsilon = 0.01);

/// Local blow-up profile of the localized trig resolvent bound.  Between the
/// radius-1/64 patches around 0 and 1/16 it interpolates the patch boundary
/// values continuously.
double n_q(cd z, double q);

struct Thm2Membership {
  std::optional<bool> i;    // q in [1, 3/2]
  std::optional<bool> ii;   // q in (1, 3/2]
  std::optional<bool> iii;  // q = 1
  double q0{1.0};           // min(q, 5/4), the auxiliary norm exponent of clause (ii)
};

Thm2Membership thm2_regions(cd z, double q, double vq, double v1, double c);

enum class Theorem { thm1_i, thm1_ii, thm2_i, thm2_ii, thm2_iii, lfs };

std::string_view to_string(Theorem t);

struct BoundReport {
  Theorem theorem{Theorem::thm1_i};
  cd z;
  double m{0};
  double q{1.5};
  double lhs{0};
  double vnorm_q{0};  // ||V||_q^q
  double ratio{0};    // lhs / vnorm_q
  bool member{false};
};

/// thm1-i report at an eigenvalue z; membership w.r.t. constant c.
BoundReport thm1_report(cd z, double m, double q, double vnorm_q, double c);

/// Max ratio over the reports.
double empirical_constant(const std::vector<BoundReport>& reports);

}  // namespace bilayer
