#pragma once

#include <stdexcept>
#include <string>

namespace bilayer {

enum class Errc {
  pole,             // spectral parameter at z = +-m or a patch singularity
  out_of_range,     // parameter outside its admissible range
  degenerate,       // vanishing gradient on a level set
  inconclusive,     // finite-type test found no nonzero derivative
  not_found,        // search did not reach its residual target
  not_converged,    // Newton iteration did not reach tolerance
  near_singular,    // z too close to the free dispersion on the grid
  too_large,        // dense problem exceeds the size cap
  under_resolved,   // quadrature Nyquist guard failed
  tolerance_not_met,
  overlap,          // cutoff supports collide
  config,           // configuration validation
  io,
  empty,
  non_finite,       // NaN or Inf in an emitted record
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bilayer
