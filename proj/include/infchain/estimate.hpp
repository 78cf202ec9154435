#pragma once

#include <string_view>

namespace infchain {

/// Whether a reported value came from a closed-form expression or from
/// Monte Carlo estimation. Every report labels its values with this.
enum class Provenance { ClosedForm, Empirical };

inline std::string_view to_string(Provenance p) {
  return p == Provenance::ClosedForm ? "closed-form" : "empirical";
}

struct Estimate {
  double value = 0.0;
  Provenance provenance = Provenance::ClosedForm;
  double ci_halfwidth = 0.0;  // 95% normal CI half-width; 0 for closed forms
};

}  // namespace infchain
