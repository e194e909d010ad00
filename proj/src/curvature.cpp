#include "holab/curvature.hpp"

#include "holab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace holab {

namespace {

// directional derivative of f: R^d -> matrices along v, 4th-order central
Matrix directional(const std::function<Matrix(const Vector&)>& f, const Vector& x,
                   const Vector& v, double h) {
  return (8.0 * (f((x + h * v).eval()) - f((x - h * v).eval())) -
          (f((x + 2.0 * h * v).eval()) - f((x - 2.0 * h * v).eval()))) /
         (12.0 * h);
}

double default_fd_step(const ConnectionData& conn) {
  return 1e-4 * conn.chart.domain.min_width();
}

void require_interior(const ConnectionData& conn, const Vector& x, double margin) {
  if (!conn.chart.contains(x, margin))
    throw DomainError("curvature: point within " + format_double(margin) +
                      " of the chart boundary");
}

}  // namespace

Matrix curvature_at(const ConnectionData& conn, const Vector& x, const Vector& v,
                    const Vector& w, double fd_step, CurvatureSign sign) {
  if (fd_step <= 0.0) fd_step = default_fd_step(conn);
  const double reach = 2.0 * fd_step * std::max(v.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff());
  require_interior(conn, x, reach);

  Matrix da;
  if (conn.has_exact_dA()) {
    da = conn.exact_dA(x, v, w);
  } else {
    auto aw = [&](const Vector& p) { return conn.local_form(p, w); };
    auto av = [&](const Vector& p) { return conn.local_form(p, v); };
    da = directional(aw, x, v, fd_step) - directional(av, x, w, fd_step);
  }
  const Matrix commutator = bracket<double>(conn.local_form(x, v), conn.local_form(x, w));
  return sign == CurvatureSign::Oracle ? (da + commutator).eval() : (da - commutator).eval();
}

Matrix small_loop_oracle(const ConnectionData& conn, const Vector& x, const Vector& v,
                         const Vector& w, double eps, int steps) {
  if (eps <= 0.0) throw InputError("small_loop_oracle: eps must be positive");
  const Vector a = x;
  const Vector b = (x + eps * w).eval();
  const Vector c = (x + eps * v + eps * w).eval();
  const Vector d = (x + eps * v).eval();
  for (const Vector& corner : {a, b, c, d})
    if (!conn.chart.contains(corner))
      throw DomainError("small_loop_oracle: parallelogram leaves the chart");

  // w-leg first; this orientation converges to +F(v,w)
  const SmoothPath loop_path =
      concat(line_path(d, a), concat(line_path(c, d), concat(line_path(b, c), line_path(a, b))));
  const Loop loop = make_loop(loop_path, conn.chart, "parallelogram");
  const HolonomyRecord rec = holonomy_element(conn, loop, conn.group.identity(), steps);
  if (!rec.log_ok)
    throw NumericError("small_loop_oracle: holonomy left the principal log domain");
  return rec.log / (eps * eps);
}

Matrix small_loop_oracle_richardson(const ConnectionData& conn, const Vector& x,
                                    const Vector& v, const Vector& w, double eps, int steps) {
  const Matrix l1 = small_loop_oracle(conn, x, v, w, eps, steps);
  const Matrix l2 = small_loop_oracle(conn, x, v, w, eps / 2.0, steps);
  const Matrix l4 = small_loop_oracle(conn, x, v, w, eps / 4.0, steps);
  const Matrix r1 = 2.0 * l2 - l1;
  const Matrix r2 = 2.0 * l4 - l2;
  return (4.0 * r2 - r1) / 3.0;
}

namespace {

// Transport along the center ray to u: W nodes of the right-derivative flow.
std::vector<Matrix> ray_transport(const ConnectionData& conn, const Vector& u, int steps) {
  const Vector c0 = conn.chart.domain.center();
  const Vector dir = (u - c0).eval();
  auto v = [&](double t) {
    return (-conn.local_form((c0 + t * dir).eval(), dir)).eval();
  };
  return magnus_flow(v, steps, DerivSide::Right);
}

Matrix ad_inverse(const Matrix& g, const Matrix& x) { return adjoint(g.inverse().eval(), x); }

}  // namespace

double plaques_identity_residual(const ConnectionData& conn, const SmoothPath& c, int steps,
                                 int s_samples, CurvatureSign sign) {
  if (steps % 2 != 0) ++steps;  // Simpson quadrature wants an even interval count
  if (s_samples < 1) throw InputError("plaques_identity_residual: need sampled s values");
  const Vector c0 = conn.chart.domain.center();
  // s-step tied to the time resolution, so the s-differentiation truncation
  // decreases at second order under step refinement; small enough that paths
  // re-timed through flat_step (large high-order derivatives) stay accurate
  const double hs = std::min(0.05 / std::sqrt(static_cast<double>(steps)), 0.045);
  const double fd = 1.0 / (8.0 * steps);

  double worst = 0.0;
  for (int j = 0; j < s_samples; ++j) {
    const double s = 0.1 + 0.8 * (s_samples == 1 ? 0.5 : j / (s_samples - 1.0));

    // endpoint transports for the s-derivative (4th-order central)
    const Matrix w_p2 = ray_transport(conn, c.eval(s + 2 * hs), steps).back();
    const Matrix w_p1 = ray_transport(conn, c.eval(s + hs), steps).back();
    const Matrix w_m1 = ray_transport(conn, c.eval(s - hs), steps).back();
    const Matrix w_m2 = ray_transport(conn, c.eval(s - 2 * hs), steps).back();
    const std::vector<Matrix> w_nodes = ray_transport(conn, c.eval(s), steps);
    const Matrix& w1 = w_nodes.back();

    const Matrix dW = (8.0 * (w_p1 - w_m1) - (w_p2 - w_m2)) / (12.0 * hs);
    const Vector cs = c.eval(s);
    const Vector cdot = c.velocity(s, fd);
    const Matrix lhs =
        ad_inverse(w1, (conn.local_form(cs, cdot) + dW * w1.inverse()).eval());

    // Simpson quadrature of Ad_{W(t)^{-1}} F_{h(t)}(dh/dt, dh/ds)
    const Vector dir = (cs - c0).eval();
    Matrix rhs = Matrix::Zero(conn.group.size, conn.group.size);
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const Vector ht = (c0 + t * dir).eval();
      const Matrix f = curvature_at(conn, ht, dir, (t * cdot).eval(), -1.0, sign);
      const double weight = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      rhs += weight * ad_inverse(w_nodes[static_cast<std::size_t>(i)], f);
    }
    rhs *= 1.0 / (3.0 * steps);

    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

double curvature_sample_antisymmetry(const ConnectionData& conn, const CurvatureSample& s,
                                     CurvatureSign sign) {
  const Matrix forward = curvature_at(conn, s.x, s.v, s.w, -1.0, sign);
  const Matrix swapped = curvature_at(conn, s.x, s.w, s.v, -1.0, sign);
  return (forward + swapped).cwiseAbs().maxCoeff();
}

std::vector<CurvatureSample> sample_curvature_along_horizontal(
    const ConnectionData& conn, const std::function<SmoothPath(double)>& family,
    const std::vector<double>& family_params, int time_samples, const VectorField& X,
    const VectorField& Y, int steps, CurvatureSign sign) {
  if (family_params.empty()) throw InputError("sample_curvature_along_horizontal: empty family");
  if (time_samples < 2) throw InputError("sample_curvature_along_horizontal: need >= 2 times");

  std::vector<std::vector<CurvatureSample>> rows(family_params.size());
  parallel_for(static_cast<int>(family_params.size()), [&](int fi) {
    const double fp = family_params[static_cast<std::size_t>(fi)];
    const SmoothPath path = family(fp);
    const LiftedPath lift = horizontal_lift(conn, path, conn.group.identity(), steps);
    std::vector<CurvatureSample>& row = rows[static_cast<std::size_t>(fi)];
    for (int i = 0; i < time_samples; ++i) {
      const int node = static_cast<int>(std::lround(static_cast<double>(i) * steps /
                                                    (time_samples - 1)));
      const double t = static_cast<double>(node) / steps;
      CurvatureSample s;
      s.x = path.eval(t);
      s.v = X(s.x);
      s.w = Y(s.x);
      s.family_param = fp;
      s.time = t;
      const Matrix f = curvature_at(conn, s.x, s.v, s.w, -1.0, sign);
      s.value = ad_inverse(lift.fiber_at_node(node), f);
      row.push_back(std::move(s));
    }
  });

  std::vector<CurvatureSample> samples;
  for (auto& row : rows)
    for (auto& s : row) samples.push_back(std::move(s));
  return samples;
}

SubalgebraSpan reduced_algebra(const std::vector<CurvatureSample>& samples,
                               double rank_tolerance) {
  if (samples.empty()) throw InputError("reduced_algebra: empty sample list");
  std::vector<Matrix> values;
  values.reserve(samples.size());
  for (const CurvatureSample& s : samples) values.push_back(s.value);
  return bracket_closure(values, rank_tolerance);
}

ReductionReport ambrose_singer_verify(const ConnectionData& conn, const std::vector<Loop>& loops,
                                      const std::vector<CurvatureSample>& samples, double tol,
                                      int steps, double flag_fraction_limit) {
  ReductionReport report;
  report.tol = tol;
  report.span = reduced_algebra(samples);

  for (const CurvatureSample& s : samples)
    report.max_curvature_residual =
        std::max(report.max_curvature_residual, report.span.distance(s.value));

  std::vector<LoopResidual> residuals(loops.size());
  parallel_for(static_cast<int>(loops.size()), [&](int li) {
    const HolonomyRecord rec =
        holonomy_element(conn, loops[static_cast<std::size_t>(li)], conn.group.identity(), steps);
    LoopResidual lr;
    lr.loop_id = rec.loop_id;
    lr.log_ok = rec.log_ok;
    lr.log_distance = rec.log_ok ? report.span.distance(rec.log) : 0.0;
    residuals[static_cast<std::size_t>(li)] = std::move(lr);
  });
  report.loop_residuals = std::move(residuals);

  for (const LoopResidual& lr : report.loop_residuals) {
    if (!lr.log_ok) {
      ++report.flagged_loops;
      continue;
    }
    report.max_loop_residual = std::max(report.max_loop_residual, lr.log_distance);
  }

  report.ad_residual = ad_stability_check(report.span, ad_probes(report.span)).max_residual;

  const double flagged_fraction =
      loops.empty() ? 0.0
                    : static_cast<double>(report.flagged_loops) / static_cast<double>(loops.size());
  report.verdict = report.max_loop_residual <= tol && report.ad_residual <= tol &&
                   flagged_fraction < flag_fraction_limit;
  report.embedding = "span generated by curvature samples (rank " +
                     std::to_string(report.span.rank()) + ")";
  return report;
}

ReductionReport reduction_check(const ConnectionData& conn, const SubalgebraSpan& span,
                                const EmbeddingSpec& rho, const std::vector<Loop>& loops,
                                double tol, int steps, CurvatureSign sign) {
  ReductionReport report;
  report.tol = tol;
  report.span = span;
  report.embedding = rho.description;

  // precondition: the span is Ad-stable under its own exponentials
  report.ad_residual = ad_stability_check(span, ad_probes(span)).max_residual;
  if (report.ad_residual > tol)
    throw PreconditionError("reduction_check: span is not Ad-stable under exp(span) (residual " +
                            format_double(report.ad_residual) + ")");

  // the declared embedding must carry the span
  if (!rho.algebra_basis.empty()) {
    const SubalgebraSpan rho_span = bracket_closure(rho.algebra_basis, span.rank_tolerance);
    for (const Matrix& b : span.basis)
      report.embedding_residual = std::max(report.embedding_residual, rho_span.distance(b));
  }

  // (a) holonomy elements lie in exp(span): project the principal logs
  std::vector<LoopResidual> residuals(loops.size());
  parallel_for(static_cast<int>(loops.size()), [&](int li) {
    const HolonomyRecord rec =
        holonomy_element(conn, loops[static_cast<std::size_t>(li)], conn.group.identity(), steps);
    LoopResidual lr;
    lr.loop_id = rec.loop_id;
    lr.log_ok = rec.log_ok;
    lr.log_distance = rec.log_ok ? span.distance(rec.log) : 0.0;
    residuals[static_cast<std::size_t>(li)] = std::move(lr);
  });
  report.loop_residuals = std::move(residuals);
  for (const LoopResidual& lr : report.loop_residuals) {
    if (!lr.log_ok) {
      ++report.flagged_loops;
      continue;
    }
    report.max_loop_residual = std::max(report.max_loop_residual, lr.log_distance);
  }

  // (b) theta takes span values: connection components on a chart grid, and
  // theta along the star-shaped lifted frames (the quadrature form of the
  // ray-transport identity)
  const Vector c0 = conn.chart.domain.center();
  const int grid = conn.chart.dim <= 2 ? 5 : 3;
  std::vector<Vector> points;
  {
    std::vector<int> idx(static_cast<std::size_t>(conn.chart.dim), 0);
    for (;;) {
      Vector f(conn.chart.dim);
      for (int i = 0; i < conn.chart.dim; ++i)
        f[i] = 0.15 + 0.7 * idx[static_cast<std::size_t>(i)] / (grid - 1.0);
      points.push_back(conn.chart.domain.at_fraction(f));
      int axis = 0;
      while (axis < conn.chart.dim && ++idx[static_cast<std::size_t>(axis)] == grid) {
        idx[static_cast<std::size_t>(axis)] = 0;
        ++axis;
      }
      if (axis == conn.chart.dim) break;
    }
  }

  double curvature_residual = 0.0;
  int frame_steps = std::max(64, steps / 8);
  if (frame_steps % 2 != 0) ++frame_steps;
  for (const Vector& u : points) {
    for (int i = 0; i < conn.chart.dim; ++i) {
      Vector ei = Vector::Zero(conn.chart.dim);
      ei[i] = 1.0;
      curvature_residual = std::max(curvature_residual,
                                    span.distance(conn.local_form(u, ei)));
    }
    // theta(d psi(e_i)) = int_0^1 Ad_{W(t)^{-1}} F(u - c0, t e_i) dt
    const std::vector<Matrix> w_nodes = ray_transport(conn, u, frame_steps);
    const Vector dir = (u - c0).eval();
    for (int i = 0; i < conn.chart.dim; ++i) {
      Vector ei = Vector::Zero(conn.chart.dim);
      ei[i] = 1.0;
      Matrix theta_frame = Matrix::Zero(conn.group.size, conn.group.size);
      for (int k = 0; k <= frame_steps; ++k) {
        const double t = static_cast<double>(k) / frame_steps;
        const Matrix f = curvature_at(conn, (c0 + t * dir).eval(), dir, (t * ei).eval(), -1.0,
                                      sign);
        const double weight = (k == 0 || k == frame_steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        theta_frame += weight * ad_inverse(w_nodes[static_cast<std::size_t>(k)], f);
      }
      theta_frame *= 1.0 / (3.0 * frame_steps);
      curvature_residual = std::max(curvature_residual, span.distance(theta_frame));
    }
  }
  report.max_curvature_residual = curvature_residual;

  const double flagged_fraction =
      loops.empty() ? 0.0
                    : static_cast<double>(report.flagged_loops) / static_cast<double>(loops.size());
  report.verdict = report.max_loop_residual <= tol && report.max_curvature_residual <= tol &&
                   report.embedding_residual <= tol && flagged_fraction < 0.1;
  return report;
}

}  // namespace holab
