#include "bilayer/error.hpp"

namespace bilayer {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::pole: return "pole";
    case Errc::out_of_range: return "out-of-range";
    case Errc::degenerate: return "degenerate";
    case Errc::inconclusive: return "inconclusive";
    case Errc::not_found: return "not-found";
    case Errc::not_converged: return "not-converged";
    case Errc::near_singular: return "near-singular";
    case Errc::too_large: return "too-large";
    case Errc::under_resolved: return "under-resolved";
    case Errc::tolerance_not_met: return "tolerance-not-met";
    case Errc::overlap: return "overlap";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::empty: return "empty";
    case Errc::non_finite: return "non-finite";
  }
  return "unknown";
}

}  // namespace bilayer
