#include "holab/forms.hpp"

namespace holab {

Matrix fd_jacobian(const MapFn& f, const Vector& u, double step) {
  const Vector y0 = f(u);
  Matrix jac(y0.size(), u.size());
  for (int i = 0; i < u.size(); ++i) {
    Vector up = u, um = u, up2 = u, um2 = u;
    up[i] += step;
    um[i] -= step;
    up2[i] += 2.0 * step;
    um2[i] -= 2.0 * step;
    jac.col(i) = (8.0 * (f(up) - f(um)) - (f(up2) - f(um2))) / (12.0 * step);
  }
  return jac;
}

PlotForm function_form(const ScalarMap& f) {
  PlotForm form;
  form.degree = 0;
  form.value_dim = 1;
  form.eval = [f](const Plot& plot, const Vector& u, const Matrix&) {
    Vector v(1);
    v[0] = f(plot.eval(u));
    return v;
  };
  return form;
}

PlotForm ambient_pullback_form(int degree, int value_dim,
                               std::function<Vector(const Vector&, const Matrix&)> ambient,
                               double fd_step) {
  PlotForm form;
  form.degree = degree;
  form.value_dim = value_dim;
  form.eval = [ambient, fd_step](const Plot& plot, const Vector& u, const Matrix& tangents) {
    const Matrix jac = fd_jacobian(plot.eval, u, fd_step);
    return ambient(plot.eval(u), jac * tangents);
  };
  return form;
}

double alternation_residual(const PlotForm& form, const Plot& plot, int trials,
                            std::uint64_t seed) {
  if (form.degree < 1) return 0.0;
  Rng rng(seed);
  const int p = plot.dim();
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Vector f(p);
    for (int i = 0; i < p; ++i) f[i] = 0.1 + 0.8 * rng.uniform();
    const Vector u = plot.domain.at_fraction(f);
    Matrix tangents = rng.normal_matrix(p, form.degree);

    // multilinearity in a random slot
    if (true) {
      const int slot = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(form.degree));
      const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
      Matrix ta = tangents, tb = tangents, tc = tangents;
      tb.col(slot) = rng.normal_vector(p);
      tc.col(slot) = a * ta.col(slot) + b * tb.col(slot);
      const Vector lhs = form.eval(plot, u, tc);
      const Vector rhs = a * form.eval(plot, u, ta) + b * form.eval(plot, u, tb);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    if (form.degree >= 2) {
      const int i = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(form.degree));
      int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(form.degree));
      if (i == j) j = (j + 1) % form.degree;
      Matrix swapped = tangents;
      swapped.col(i).swap(swapped.col(j));
      const Vector lhs = form.eval(plot, u, tangents);
      const Vector rhs = form.eval(plot, u, swapped);
      worst = std::max(worst, (lhs + rhs).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double form_compatibility_residual(const PlotForm& form, const Plot& p, const Plot& p2,
                                   const MapFn& g, const std::vector<Vector>& sample_points,
                                   int frames, double composition_tol, std::uint64_t seed,
                                   double fd_step) {
  if (sample_points.empty()) throw InputError("form_compatibility_residual: no sample points");

  for (const Vector& u : sample_points) {
    const double mismatch = (p2.eval(g(u)) - p.eval(u)).cwiseAbs().maxCoeff();
    if (mismatch > composition_tol)
      throw PreconditionError("form_compatibility_residual: p2 o g differs from p by " +
                              format_double(mismatch) + " at a sample point");
  }

  Rng rng(seed);
  const int pd = p.dim();
  double worst = 0.0;
  for (const Vector& u : sample_points) {
    const Matrix jac = fd_jacobian(g, u, fd_step);
    for (int f = 0; f < frames; ++f) {
      Matrix tangents = form.degree > 0 ? rng.normal_matrix(pd, form.degree) : Matrix(pd, 0);
      const Vector lhs = form.eval(p, u, tangents);
      const Vector rhs = form.eval(p2, g(u), (jac * tangents).eval());
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace holab
