#pragma once

// Finite-difference smoothness probes. Heuristic semi-decisions: a "true"
// answer means no kink was visible at the probed resolution, never a proof of
// smoothness; a "false" answer exhibits a divergent difference quotient.

#include "holab/core.hpp"

namespace holab {

struct ProbeOptions {
  int order = 2;        // highest difference-quotient order checked
  double tol = 1e-6;    // relative signal floor
  int samples = 257;    // per probed line
};

// Order-j difference quotients (j = 1..order) are formed at grid strides
// 1, 2, 4 within the given uniform samples. The probe fails when some order's
// max-norm grows by more than a fixed factor at every refinement, i.e. the
// quotient diverges under refinement instead of settling (Richardson
// consistency). Needs at least 2*order + 2 samples.
bool smoothness_probe(const std::vector<double>& samples, int order, double tol);

inline bool smoothness_probe(const std::vector<double>& samples, const ProbeOptions& opt) {
  return smoothness_probe(samples, opt.order, opt.tol);
}

// Sample a scalar map on [a,b] and probe it.
bool probe_scalar_map(const std::function<double(double)>& f, double a, double b,
                      const ProbeOptions& opt = {});

// Probe every output coordinate of a curve R -> R^d.
bool probe_curve(const std::function<Vector(double)>& c, double a, double b,
                 const ProbeOptions& opt = {});

}  // namespace holab
