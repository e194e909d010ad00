#pragma once

// Matrix Lie group/algebra kernel: bracket, matrix exponential and principal
// logarithm, and the product-integral solver for the right-logarithmic-
// derivative ODE  g'(t) g(t)^{-1} = v(t), g(0) = e  (the regular-group Exp).
//
// Free functions over dense Eigen types, templated on scalar where the
// algorithm is scalar-agnostic; everything is a pure value computation.

#include "holab/core.hpp"

#include <cmath>
#include <vector>

namespace holab {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// [X,Y] = XY - YX
template <typename Scalar>
MatrixX<Scalar> bracket(const MatrixX<Scalar>& x, const MatrixX<Scalar>& y) {
  if (x.rows() != x.cols() || y.rows() != y.cols())
    throw ShapeError("bracket: arguments must be square");
  if (x.rows() != y.rows()) throw ShapeError("bracket: size mismatch");
  return x * y - y * x;
}

// Matrix exponential by scaling-and-squaring with a Taylor core.
// The argument is scaled so its 1-norm is below 1/2, the series is summed to
// machine precision, and the result squared back up.
template <typename Scalar>
MatrixX<Scalar> matrix_exp(const MatrixX<Scalar>& a) {
  if (a.rows() != a.cols()) throw ShapeError("matrix_exp: argument must be square");
  if (!a.allFinite()) throw NumericError("matrix_exp: non-finite entries");
  const int n = static_cast<int>(a.rows());
  const Scalar norm = a.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
  int squarings = 0;
  MatrixX<Scalar> m = a;
  if (norm > Scalar(0.5)) {
    squarings = static_cast<int>(std::ceil(std::log2(static_cast<double>(norm) / 0.5)));
    m /= std::pow(Scalar(2), squarings);
  }
  MatrixX<Scalar> term = MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = (m * term) / Scalar(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < Scalar(1e-18) * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

// Ad_g(X) = g X g^{-1}; throws NumericError when g is numerically singular.
inline Matrix adjoint(const Matrix& g, const Matrix& x) {
  if (g.rows() != g.cols() || x.rows() != x.cols() || g.rows() != x.rows())
    throw ShapeError("adjoint: size mismatch");
  Eigen::PartialPivLU<Matrix> lu(g);
  const double det = lu.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12)
    throw NumericError("adjoint: singular group element (|det| < 1e-12)");
  return g * x * lu.inverse();
}

struct LogResult {
  Matrix value;        // principal logarithm when principal == true
  bool principal;      // false: eigenvalue on the closed negative real axis,
                       // or the square-root iteration failed to converge
  double exp_residual; // ||exp(value) - g||_F when principal
};

// Principal matrix logarithm by inverse scaling-and-squaring: Denman-Beavers
// square roots until ||A - I|| is small, then the Mercator series.
LogResult matrix_log_principal(const Matrix& g);

// Orientation of the logarithmic-derivative ODE solved by magnus_flow.
//   Right:  g'(t) g(t)^{-1} = v(t)   (steps multiply on the left)
//   Left:   g(t)^{-1} g'(t) = v(t)   (steps multiply on the right)
enum class DerivSide { Right, Left };

// Fourth-order Magnus integrator (two-point Gauss nodes with one commutator
// correction), exact on the group manifold since each step is an exponential.
// Returns the solution at the steps+1 uniform nodes of [t0,t1], starting at
// the identity.
template <typename Fn>
std::vector<Matrix> magnus_flow(Fn&& v, int steps, DerivSide side, double t0 = 0.0,
                                double t1 = 1.0) {
  if (steps < 1) throw InputError("magnus_flow: steps must be >= 1");
  const double h = (t1 - t0) / steps;
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double cc = std::sqrt(3.0) / 12.0;

  Matrix first = v(t0 + c1 * h);
  const int n = static_cast<int>(first.rows());
  if (first.rows() != first.cols()) throw ShapeError("magnus_flow: v(t) must be square");

  std::vector<Matrix> g;
  g.reserve(static_cast<std::size_t>(steps) + 1);
  g.push_back(Matrix::Identity(n, n));
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    Matrix a1 = (k == 0) ? first : v(t + c1 * h);
    Matrix a2 = v(t + c2 * h);
    if (!a1.allFinite() || !a2.allFinite())
      throw NumericError("magnus_flow: non-finite v(t) sample");
    Matrix omega = (0.5 * h) * (a1 + a2);
    Matrix comm = (cc * h * h) * bracket<double>(a1, a2);
    if (side == DerivSide::Right)
      g.push_back(matrix_exp<double>((omega - comm).eval()) * g.back());
    else
      g.push_back(g.back() * matrix_exp<double>((omega + comm).eval()));
  }
  return g;
}

// Product integral Exp: solves g' g^{-1} = v(t), g(0) = e on [0,1].
std::vector<Matrix> product_integral(const std::function<Matrix(double)>& v, int steps);

// Same, from values of v at >= steps+1 uniform nodes of [0,1]; off-node values
// come from 4-point Lagrange interpolation on the sample grid.
std::vector<Matrix> product_integral(const std::vector<Matrix>& samples, int steps);

}  // namespace holab
