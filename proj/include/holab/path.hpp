#pragma once

// Smooth paths [0,1] -> R^d with endpoint-stationary reparametrization.
// Concatenation re-times both factors through a fixed C-infinity step whose
// derivatives all vanish at 0 and 1, so splices stay probe-smooth.

#include "holab/core.hpp"
#include "holab/expression.hpp"

#include <optional>

namespace holab {

// sigma(t)/(sigma(t)+sigma(1-t)) with sigma(t) = exp(-1/t) for t > 0.
// Monotone [0,1] -> [0,1], flat at both ends.
double flat_step(double t);
double flat_step_deriv(double t);

struct SmoothPath {
  int dim = 0;
  std::function<Vector(double)> eval;
  std::function<Vector(double)> deriv;  // empty: finite differences at use sites
  bool stationary_ends = false;
  std::vector<Vector> samples;  // uniform grid cache, samples[i] = eval(i/(n-1))

  Vector operator()(double t) const { return eval(t); }

  bool has_deriv() const { return static_cast<bool>(deriv); }

  // Analytic derivative when present; otherwise a 4th-order five-point
  // stencil with the given step, shifted one-sided near the endpoints.
  Vector velocity(double t, double fd_step) const;

  void resample(int n);

  Vector start() const { return eval(0.0); }
  Vector end() const { return eval(1.0); }
};

SmoothPath make_path(int dim, std::function<Vector(double)> eval,
                     std::function<Vector(double)> deriv = {}, int samples = 257);

// Path built from one expression per coordinate in the variable "t";
// derivatives are symbolic. Extra bindings (e.g. a homotopy parameter) may be
// fixed via env.
SmoothPath path_from_expressions(const std::vector<Expr>& components, const Env& fixed = {});

SmoothPath constant_path(const Vector& point);
SmoothPath line_path(const Vector& from, const Vector& to);

// Re-time through flat_step: same trace, all derivatives vanish at endpoints.
SmoothPath reparametrize_flat(const SmoothPath& p);

// gamma^{-1}(t) = gamma(1-t). Involution.
SmoothPath reverse(const SmoothPath& p);

// gamma2 v gamma1: run gamma1 first, then gamma2. Both factors are re-timed
// through flat_step and spliced at t = 1/2. Endpoint mismatch beyond 1e-10
// raises JoinError.
SmoothPath concat(const SmoothPath& second, const SmoothPath& first);

// Affine restriction to [0, t_end], re-timed to [0,1]. Exact, no resampling.
SmoothPath restrict_to(const SmoothPath& p, double t_end);

// Seeded random loop: truncated Fourier series composed with flat_step,
// closed at `center`, rescaled to stay within `bounds` shrunk by `margin`
// and within `radius` of the center. Smooth and stationary by construction.
SmoothPath fourier_loop(const Vector& center, int harmonics, Rng& rng, const Box& bounds,
                        double radius, double margin = 0.05);

// Same construction plus a linear drift: an open path from `center`.
SmoothPath fourier_path(const Vector& center, int harmonics, Rng& rng, const Box& bounds,
                        double radius, double margin = 0.05);

}  // namespace holab
