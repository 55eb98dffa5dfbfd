#pragma once

#include <string>

#include "flexarm/controllers.hpp"
#include "flexarm/scenario.hpp"
#include "flexarm/sim.hpp"

namespace flexarm {

/// Every applicable certificate for the scenario's controller: gain
/// conditions, sym(F) <= 0, equilibrium Hessian, Hurwitz abscissa, and the
/// saturation budget. With `matrices` the assembled matrices are appended.
std::string analysis_report(const Scenario& s, bool matrices = false);

/// Human-readable summary followed by a `key=value` block, one metric per line.
std::string run_summary(const Scenario& s, const GainCertificate& cert, const Trajectory& traj, const Metrics& m);

}  // namespace flexarm
