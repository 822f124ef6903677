#pragma once

#include <string>
#include <vector>

namespace coagss {

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;  // on |value - expected| / max(|expected|, 1)
  bool pass = false;
};

// Constant-kernel oracle battery: every closed-form example the library is
// built against, evaluated at the given grid resolution. Quadrature
// tolerances scale as (32/ppd)^4 (the documented refinement order), never
// tighter than their ppd=32 baselines.
std::vector<VerifyCheck> run_verify_battery(int points_per_decade);

}  // namespace coagss
