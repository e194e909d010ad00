#include "holab/bundle.hpp"

#include <algorithm>
#include <cmath>

namespace holab {

Vector BaseChart::reduce_gap(const Vector& gap) const {
  Vector r = gap;
  if (periods.empty()) return r;
  for (int i = 0; i < dim && i < static_cast<int>(periods.size()); ++i) {
    const double p = periods[static_cast<std::size_t>(i)];
    if (p > 0.0) r[i] -= p * std::round(r[i] / p);
  }
  return r;
}

bool BaseChart::contains(const Vector& x, double margin) const {
  if (x.size() != dim) throw ShapeError("BaseChart::contains: dimension mismatch");
  for (int i = 0; i < dim; ++i) {
    const double p =
        (i < static_cast<int>(periods.size())) ? periods[static_cast<std::size_t>(i)] : 0.0;
    if (p > 0.0) continue;  // periodic axis: the chart wraps
    if (x[i] < domain.lo[i] + margin || x[i] > domain.hi[i] - margin) return false;
  }
  return true;
}

Matrix ConnectionData::local_form(const Vector& x, const Vector& v) const {
  if (x.size() != chart.dim || v.size() != chart.dim)
    throw ShapeError("ConnectionData::local_form: tangent dimension mismatch");
  if (!chart.contains(x)) throw DomainError("connection: point outside chart domain");
  Matrix a = Matrix::Zero(group.size, group.size);
  for (int i = 0; i < chart.dim; ++i)
    if (v[i] != 0.0) a += v[i] * comp[static_cast<std::size_t>(i)](x);
  return a;
}

double ConnectionData::linearity_residual(int trials, std::uint64_t seed) const {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Vector f(chart.dim);
    for (int i = 0; i < chart.dim; ++i) f[i] = 0.05 + 0.9 * rng.uniform();
    const Vector x = chart.domain.at_fraction(f);
    const Vector v = rng.normal_vector(chart.dim);
    const Vector w = rng.normal_vector(chart.dim);
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    const Matrix lhs = local_form(x, (a * v + b * w).eval());
    const Matrix rhs = a * local_form(x, v) + b * local_form(x, w);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

Matrix theta_eval(const ConnectionData& conn, const Vector& x, const Matrix& g,
                  const Vector& v, const Matrix& fiber_velocity) {
  if (!conn.chart.contains(x)) throw DomainError("theta_eval: point outside chart domain");
  const Matrix a = conn.local_form(x, v);
  return adjoint(g.inverse().eval(), (a + fiber_velocity).eval());
}

std::vector<InvarianceProbe> make_invariance_probes(const ConnectionData& conn, int count,
                                                    std::uint64_t seed) {
  Rng rng(seed);
  const int n = conn.group.size;
  std::vector<InvarianceProbe> probes;
  auto random_algebra = [&]() {
    Matrix m = rng.normal_matrix(n, n);
    if (conn.group.family == MatrixFamily::SpecialOrthogonal) m = 0.5 * (m - m.transpose());
    return m;
  };
  for (int i = 0; i < count; ++i) {
    InvarianceProbe p;
    Vector f(conn.chart.dim);
    for (int k = 0; k < conn.chart.dim; ++k) f[k] = 0.05 + 0.9 * rng.uniform();
    p.x = conn.chart.domain.at_fraction(f);
    p.g = matrix_exp<double>(random_algebra().eval());
    p.h = matrix_exp<double>(random_algebra().eval());
    p.v = rng.normal_vector(conn.chart.dim);
    p.fiber_velocity = random_algebra();
    probes.push_back(std::move(p));
  }
  return probes;
}

double right_invariance_residual(const ConnectionData& conn,
                                 const std::vector<InvarianceProbe>& probes) {
  double worst = 0.0;
  for (const InvarianceProbe& p : probes) {
    // (R_h)_* leaves the right-translated fiber velocity unchanged
    const Matrix lhs = theta_eval(conn, p.x, (p.g * p.h).eval(), p.v, p.fiber_velocity);
    const Matrix rhs = adjoint(p.h.inverse().eval(),
                               theta_eval(conn, p.x, p.g, p.v, p.fiber_velocity));
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

LiftedPath horizontal_lift(const ConnectionData& conn, const SmoothPath& gamma,
                           const Matrix& start, int steps) {
  if (steps < 8) throw InputError("horizontal_lift: steps must be >= 8");
  if (gamma.dim != conn.chart.dim)
    throw ShapeError("horizontal_lift: path dimension does not match chart");
  if (start.rows() != conn.group.size || start.cols() != conn.group.size)
    throw ShapeError("horizontal_lift: start fiber has the wrong size");

  // domain check on the sample grid
  for (const Vector& x : gamma.samples)
    if (!conn.chart.contains(x))
      throw DomainError("horizontal_lift: path exits the chart domain");

  const double fd_step = 1.0 / (8.0 * steps);
  auto v = [&](double t) {
    const Vector x = gamma.eval(t);
    if (!conn.chart.contains(x))
      throw DomainError("horizontal_lift: path exits the chart domain");
    return (-conn.local_form(x, gamma.velocity(t, fd_step))).eval();
  };

  std::vector<Matrix> w = magnus_flow(v, steps, DerivSide::Right);

  LiftedPath lift;
  lift.base = gamma;
  lift.start = start;
  lift.steps = steps;
  lift.fiber.reserve(w.size());
  double residual = 0.0;
  for (const Matrix& wi : w) {
    Matrix f = wi * start;
    if (!f.allFinite()) throw NumericError("horizontal_lift: integrator blowup");
    const double r = conn.group.group_residual(f);
    if (std::isfinite(r)) residual = std::max(residual, r);
    lift.fiber.push_back(std::move(f));
  }
  lift.max_group_residual = residual;
  return lift;
}

Matrix parallel_transport(const ConnectionData& conn, const SmoothPath& gamma, double t,
                          const Matrix& start, int steps) {
  if (t < 0.0 || t > 1.0) throw InputError("parallel_transport: t must be in [0,1]");
  if (t == 0.0) return start;
  if (t == 1.0) return horizontal_lift(conn, gamma, start, steps).end_fiber();
  return horizontal_lift(conn, restrict_to(gamma, t), start, steps).end_fiber();
}

ConnectionData connection_from_terms(BaseChart chart, MatrixGroup group,
                                     const AlgebraBasis& algebra,
                                     const std::vector<ConnectionTerm>& terms) {
  if (algebra.matrix_size != group.size)
    throw ShapeError("connection_from_terms: algebra size does not match group");
  const int d = chart.dim;
  for (const ConnectionTerm& term : terms) {
    if (term.dx < 0 || term.dx >= d)
      throw InputError("connection_from_terms: dx index out of range");
    if (term.basis < 0 || term.basis >= algebra.rank())
      throw InputError("connection_from_terms: basis index out of range");
  }

  static const char* kAxisNames[3] = {"x", "y", "z"};
  auto bind_point = [d](Env& env, const Vector& x) {
    for (int i = 0; i < d; ++i) {
      if (i < 3) env.set(kAxisNames[i], x[i]);
      env.set("x" + std::to_string(i + 1), x[i]);
    }
  };

  ConnectionData conn;
  conn.chart = std::move(chart);
  conn.group = std::move(group);

  // componentwise coefficients and their symbolic gradients
  struct CompiledTerm {
    Expr coeff;
    std::vector<Expr> grad;  // d/dx_l
    int dx;
    Matrix basis;
  };
  auto compiled = std::make_shared<std::vector<CompiledTerm>>();
  for (const ConnectionTerm& term : terms) {
    CompiledTerm ct;
    ct.coeff = term.coeff;
    for (int l = 0; l < d; ++l) {
      // both alias spellings may appear in one expression
      Expr dl = term.coeff.derivative("x" + std::to_string(l + 1));
      if (l < 3) {
        Env probe;  // cheap structural check: combine alias derivatives
        (void)probe;
        Expr alias = term.coeff.derivative(kAxisNames[l]);
        // sum of the two spellings' contributions
        dl = Expr::parse("(" + dl.str() + ") + (" + alias.str() + ")");
      }
      ct.grad.push_back(dl);
    }
    ct.dx = term.dx;
    ct.basis = algebra.elements[static_cast<std::size_t>(term.basis)];
    compiled->push_back(std::move(ct));
  }

  const int n = conn.group.size;
  for (int i = 0; i < d; ++i) {
    conn.comp.push_back([compiled, bind_point, i, n](const Vector& x) {
      Env env;
      bind_point(env, x);
      Matrix a = Matrix::Zero(n, n);
      for (const CompiledTerm& ct : *compiled)
        if (ct.dx == i) a += ct.coeff.eval(env) * ct.basis;
      return a;
    });
  }

  // dA(x)(v,w) = sum_terms sum_l d_l c (v_l w_i - w_l v_i) basis
  conn.exact_dA = [compiled, bind_point, n, d](const Vector& x, const Vector& v,
                                               const Vector& w) {
    Env env;
    bind_point(env, x);
    Matrix out = Matrix::Zero(n, n);
    for (const CompiledTerm& ct : *compiled) {
      double acc = 0.0;
      for (int l = 0; l < d; ++l)
        acc += ct.grad[static_cast<std::size_t>(l)].eval(env) * (v[l] * w[ct.dx] - w[l] * v[ct.dx]);
      out += acc * ct.basis;
    }
    return out;
  };

  return conn;
}

}  // namespace holab
