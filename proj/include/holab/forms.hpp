#pragma once

// Per-plot differential forms: a degree-n form assigns to every plot an
// n-form on the plot domain, subject to the compatibility law
// alpha_p = g^* alpha_{p'} whenever p' o g = p. Compatibility is checked only
// on supplied (p, p', g) triples and sample points.

#include "holab/diffeology.hpp"

namespace holab {

struct PlotForm {
  int degree = 0;
  int value_dim = 1;
  // tangents: (plot domain dim) x degree matrix, one tangent vector per column
  std::function<Vector(const Plot&, const Vector&, const Matrix&)> eval;
};

// Central finite-difference Jacobian of a map at u.
Matrix fd_jacobian(const MapFn& f, const Vector& u, double step);

// Degree-0 form from a scalar function of the model point.
PlotForm function_form(const ScalarMap& f);

// Pullback of an ambient-space form omega(x; w_1..w_n): per plot, tangents are
// pushed forward through the plot's FD Jacobian. Tautologically compatible.
PlotForm ambient_pullback_form(int degree, int value_dim,
                               std::function<Vector(const Vector&, const Matrix&)> ambient,
                               double fd_step = 1e-5);

// Max-abs deviation from multilinearity/alternation on random tangent frames.
double alternation_residual(const PlotForm& form, const Plot& plot, int trials,
                            std::uint64_t seed = 42);

// Max over sample points and random frames of
// |alpha_p(Y...) - (g^* alpha_{p2})(Y...)|, with p2 o g = p required to hold
// within `composition_tol` on the sample points (PreconditionError otherwise).
double form_compatibility_residual(const PlotForm& form, const Plot& p, const Plot& p2,
                                   const MapFn& g, const std::vector<Vector>& sample_points,
                                   int frames = 4, double composition_tol = 1e-8,
                                   std::uint64_t seed = 42, double fd_step = 1e-5);

}  // namespace holab
