#include "bilayer/potentials.hpp"

#include <cmath>
#include <cstdio>

#include "bilayer/error.hpp"

namespace bilayer {

std::string_view to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::gaussian_scalar: return "gaussian-scalar";
    case PotentialFamily::gaussian_jordan: return "gaussian-jordan";
    case PotentialFamily::two_bump: return "two-bump";
  }
  return "unknown";
}

PotentialFamily parse_potential_family(std::string_view s) {
  if (s == "gaussian-scalar") return PotentialFamily::gaussian_scalar;
  if (s == "gaussian-jordan") return PotentialFamily::gaussian_jordan;
  if (s == "two-bump") return PotentialFamily::two_bump;
  throw Error(Errc::config, "unknown potential family '" + std::string(s) + "'");
}

PotentialSpec dilated(const PotentialSpec& spec, double lambda) {
  return {spec.family, spec.amplitude * (lambda * lambda), spec.width / lambda};
}

std::string describe(const PotentialSpec& spec) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s a=(%.6g%+.6gi) w=%.6g", std::string(to_string(spec.family)).c_str(),
                spec.amplitude.real(), spec.amplitude.imag(), spec.width);
  return buf;
}

PotentialField make_potential(const Grid& grid, const PotentialSpec& spec) {
  if (!(spec.width > 0.0)) throw Error(Errc::config, "potential.width must be positive");
  const double w2 = spec.width * spec.width;
  Mat2cd shape = Mat2cd::Identity();
  if (spec.family == PotentialFamily::gaussian_jordan) shape(0, 1) = 1.0;
  const Vec2d c(1.5 * spec.width, 0.0);
  std::vector<Mat2cd> values(grid.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Vec2d x = grid.point(p);
    double g = 0.0;
    if (spec.family == PotentialFamily::two_bump)
      g = std::exp(-(x - c).squaredNorm() / w2) + std::exp(-(x + c).squaredNorm() / w2);
    else
      g = std::exp(-x.squaredNorm() / w2);
    values[p] = spec.amplitude * g * shape;
  }
  return polar_factors(grid, std::move(values), describe(spec));
}

}  // namespace bilayer
