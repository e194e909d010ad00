#pragma once

// Command pipelines behind the CLI: each command orchestrates the geometry
// modules over one scenario and produces a RunReport.

#include "holab/report.hpp"
#include "holab/scenario.hpp"

namespace holab {

// command: transport | holonomy | axioms | curvature | plaques | asverify | reduce
RunReport run_command(const std::string& command, const Scenario& scenario,
                      const RunParams& params);

const std::vector<std::string>& command_names();

// Helpers shared with the acceptance suite -----------------------------------

// Signed (shoelace) area enclosed by a loop in a 2-d chart, from dense
// polygonal sampling. Quadrature-only; independent of the transport ODE.
double loop_signed_area(const SmoothPath& loop, int samples = 4096);

// Rotation angle of a 2x2 or 3x3 rotation matrix, in [0, pi].
double rotation_angle(const Matrix& r);

// |a - b| after reducing both angles modulo 2*pi into [0, pi].
double angle_distance(double a, double b);

// Axiom-suite case generation from the scenario's random-loop policy.
std::vector<AxiomCase> make_axiom_cases(const Scenario& scenario, int count, std::uint64_t seed,
                                        int fiber_starts = 5);

// Observed convergence orders of horizontal_lift end fibers between
// consecutive step counts, against a reference at 8x the largest count.
std::vector<double> lift_convergence_orders(const ConnectionData& conn, const SmoothPath& path,
                                            const std::vector<int>& step_counts);

}  // namespace holab
