#pragma once

#include "spinso4/report.hpp"

namespace spinso4::suites {

// Executes the suites selected by config ("spectrum", "algebra", "radial",
// "ks", "limits", or "all"). Deterministic given the seed; solver failures are
// recorded as failed checks rather than thrown.
report::Report run(const report::RunConfig& cfg);

// Convergence study: operator-algebra residuals across the grid ladder, with a
// per-check refinement verdict (monotone decrease and at least 4x end-to-end
// reduction, or residual at the 1e-12 floor throughout).
report::Report run_ladder(const report::RunConfig& cfg);

}  // namespace spinso4::suites
