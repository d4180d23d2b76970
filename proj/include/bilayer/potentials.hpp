#pragma once

#include <complex>
#include <string>
#include <string_view>

#include "bilayer/operators.hpp"

namespace bilayer {

enum class PotentialFamily { gaussian_scalar, gaussian_jordan, two_bump };

std::string_view to_string(PotentialFamily f);
PotentialFamily parse_potential_family(std::string_view s);

/// g(x) = exp(-|x|^2 / width^2).
///   gaussian-scalar  a g(x) Id
///   gaussian-jordan  a g(x) [[1, 1], [0, 1]]
///   two-bump         a (g(x - c) + g(x + c)) Id, c = (1.5 width, 0)
struct PotentialSpec {
  PotentialFamily family{PotentialFamily::gaussian_scalar};
  std::complex<double> amplitude{1.0, 0.0};
  double width{1.0};
};

/// lambda^2 V(lambda x): amplitude times lambda^2, width over lambda.
PotentialSpec dilated(const PotentialSpec& spec, double lambda);

std::string describe(const PotentialSpec& spec);

PotentialField make_potential(const Grid& grid, const PotentialSpec& spec);

}  // namespace bilayer
