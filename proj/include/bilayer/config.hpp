#pragma once

// Experiment configuration: INI-style "key = value" text with [sections],
// addressed by dotted keys (grid.n, potential.width, ...).

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bilayer/operators.hpp"
#include "bilayer/potentials.hpp"

namespace bilayer {

inline constexpr int kConfigSchema = 1;

enum class Model { bilayer, trig };

std::string_view to_string(Model m);
SymbolKind symbol_kind(Model m);

struct ExperimentConfig {
  int schema{kConfigSchema};
  Model model{Model::bilayer};
  double m{0.0};
  int grid_n{32};
  double grid_l{16.0};
  PotentialSpec potential{};
  double q{1.5};
  ScanWindow window{-1.0, 1.0, -0.5, 0.5, 41, 21};
  std::uint64_t seed{0};

  double critical_tol{1e-12};

  double fermi_lambda{0.125};
  double fermi_step{0.005};

  std::string decay_curve{"circle"};   // circle | level
  double decay_lambda{0.125};
  std::string decay_center{"none"};    // none | degenerate
  double decay_cutoff_width{0.1};
  double decay_r_min{10.0};
  double decay_r_max{1000.0};
  int decay_n_radii{9};
  int decay_directions{128};

  double rho_min{1e-3};
  double rho_max{1e3};
  int rho_n{200};

  std::string eig_method{"dense"};     // dense | bs-scan
  double localization_min{0.5};
  double im_floor{0.0};

  std::string bs_localize{"none"};     // none | saddles | critical
  double bs_delta{0.1};

  std::vector<double> lambdas{0.5, 1.0, 2.0};
  double t_min{1e-4};
  double t_max{1e-1};
  int n_t{7};
  double alpha{0.0};                   // 0: alpha_{q,1/2,2}
  double epsilon{0.01};

  double constant{1.0};
  double v1_constant{1.0};

  /// Canonical "key=value" lines, sorted, as given in the file.
  std::map<std::string, std::string> raw;
  std::string hash;
};

/// Parses and validates; field-level messages in Errc::config errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

}  // namespace bilayer
