#include "holab/holonomy.hpp"

#include <algorithm>
#include <cmath>

namespace holab {

Loop make_loop(SmoothPath path, const BaseChart& chart, std::string id) {
  if (path.dim != chart.dim) throw ShapeError("make_loop: path dimension mismatch");
  SmoothPath p = path.stationary_ends ? std::move(path) : reparametrize_flat(path);
  const Vector gap = chart.reduce_gap((p.end() - p.start()).eval());
  if (gap.norm() > 1e-12)
    throw InputError("make_loop: closure gap " + format_double(gap.norm()) +
                     " exceeds 1e-12 (modulo chart periods)");
  Loop loop;
  loop.basepoint = p.start();
  loop.path = std::move(p);
  loop.id = std::move(id);
  return loop;
}

Loop reverse(const Loop& loop) {
  Loop r;
  r.path = reverse(loop.path);
  r.basepoint = r.path.start();
  r.id = loop.id + "^-1";
  return r;
}

HolonomyRecord holonomy_element(const ConnectionData& conn, const Loop& loop,
                                const Matrix& start, int steps) {
  const LiftedPath lift = horizontal_lift(conn, loop.path, start, steps);
  HolonomyRecord rec;
  rec.loop_id = loop.id;
  rec.steps = steps;
  rec.group_residual = lift.max_group_residual;
  // fiber(1) = W(1) start = start * (start^{-1} W(1) start)
  Eigen::PartialPivLU<Matrix> lu(start);
  if (std::abs(lu.determinant()) < 1e-12)
    throw NumericError("holonomy_element: singular start fiber");
  rec.element = lu.solve(lift.end_fiber());
  LogResult lr = matrix_log_principal(rec.element);
  rec.log_ok = lr.principal;
  rec.log = lr.value;
  rec.exp_log_residual = lr.exp_residual;
  return rec;
}

bool loops_equivalent(const ConnectionData& conn, const Loop& gamma, const Loop& gamma2,
                      double tol, int steps) {
  const Vector gap = conn.chart.reduce_gap((gamma.basepoint - gamma2.basepoint).eval());
  if (gap.norm() > 1e-9)
    throw InputError("loops_equivalent: loops have different basepoints");

  const Matrix e = conn.group.identity();
  // On quotient charts the covering representatives may end a period-lattice
  // vector apart; translate the second representative so the splice is
  // continuous upstairs. The offset is a lattice vector by the basepoint
  // check, and the connection descends to the quotient, so holonomy is
  // unchanged.
  const SmoothPath rev2 = reverse(gamma2).path;
  const Vector offset = (gamma.path.end() - rev2.start()).eval();
  SmoothPath shifted = rev2;
  {
    auto ev = rev2.eval;
    shifted.eval = [ev, offset](double t) { return (ev(t) + offset).eval(); };
    shifted.resample(static_cast<int>(rev2.samples.size()));
  }
  Loop composite;
  composite.path = concat(shifted, gamma.path);
  composite.basepoint = gamma.basepoint;
  composite.id = "(" + gamma2.id + ")^-1 v " + gamma.id;
  const HolonomyRecord rec = holonomy_element(conn, composite, e, steps);
  const bool by_composite = (rec.element - e).norm() <= tol;

  // cross-check: same endpoint fibers for the same start
  const Matrix end1 = horizontal_lift(conn, gamma.path, e, steps).end_fiber();
  const Matrix end2 = horizontal_lift(conn, gamma2.path, e, steps).end_fiber();
  const bool by_endpoints = (end1 - end2).norm() <= tol;

  // both routes measure the same quantity up to integrator error
  return by_composite && by_endpoints;
}

namespace {

double fiber_distance(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

}  // namespace

AxiomSuiteReport axiom_suite(const ConnectionData& conn, const std::vector<AxiomCase>& cases,
                             double tol, int steps) {
  AxiomSuiteReport report;
  if (steps % 2 != 0) ++steps;  // the concatenation seam must be a node
  const Matrix e = conn.group.identity();

  for (const AxiomCase& axiom_case : cases) {
    AxiomCaseReport cr;
    const SmoothPath& gamma = axiom_case.gamma;
    const Matrix& start = axiom_case.start;

    const LiftedPath lift = horizontal_lift(conn, gamma, start, steps);

    // (i) projection: the base of the lift is gamma itself; compare samples
    double ri = 0.0;
    for (std::size_t k = 0; k < gamma.samples.size(); ++k)
      ri = std::max(ri, (lift.base.samples[k] - gamma.samples[k]).norm());
    cr.residual[0] = ri;

    // (v) initial condition
    cr.residual[4] = fiber_distance(lift.fiber.front(), start);

    // (ii) concatenation splitting at the seam and the end
    {
      const SmoothPath& cont = axiom_case.continuation;
      const SmoothPath joined = concat(cont, gamma);
      const LiftedPath lift_joined = horizontal_lift(conn, joined, start, steps);
      const Matrix mid = lift_joined.fiber_at_node(steps / 2);
      const Matrix expected_mid = lift.end_fiber();
      const LiftedPath lift_cont = horizontal_lift(conn, cont, expected_mid, steps);
      double rii = fiber_distance(mid, expected_mid);
      rii = std::max(rii, fiber_distance(lift_joined.end_fiber(), lift_cont.end_fiber()));
      cr.residual[1] = rii;
    }

    // (iii) monotone reparametrization equivariance, exact re-timed runs.
    // For a non-onto g the lift of gamma o g starts over gamma(g(0)), so its
    // start fiber is L_start(gamma)(g(0)).
    {
      double riii = 0.0;
      struct Rep {
        double a, b;  // g(t) = a + (b-a) flat_step(t)
      };
      for (const Rep rep : {Rep{0.0, 1.0}, Rep{0.15, 0.8}}) {
        auto g = [rep](double t) { return rep.a + (rep.b - rep.a) * flat_step(t); };
        auto gd = [rep](double t) { return (rep.b - rep.a) * flat_step_deriv(t); };
        SmoothPath reparam;
        reparam.dim = gamma.dim;
        auto ev = gamma.eval;
        reparam.eval = [ev, g](double t) { return ev(g(t)); };
        if (gamma.deriv) {
          auto dv = gamma.deriv;
          reparam.deriv = [dv, g, gd](double t) { return (gd(t) * dv(g(t))).eval(); };
        }
        reparam.stationary_ends = true;
        reparam.resample(static_cast<int>(gamma.samples.size()));

        const Matrix start_over_g0 =
            rep.a <= 1e-12 ? start : parallel_transport(conn, gamma, rep.a, start, steps);
        for (double t : {0.25, 0.5, 0.75, 1.0}) {
          const Matrix lhs = parallel_transport(conn, reparam, t, start_over_g0, steps);
          const Matrix rhs = g(t) <= 1e-12
                                 ? start
                                 : parallel_transport(conn, gamma, g(t), start, steps);
          riii = std::max(riii, fiber_distance(lhs, rhs));
        }
      }
      cr.residual[2] = riii;
    }

    // (iv) backtracking cancellation
    {
      const SmoothPath back = concat(reverse(gamma), gamma);
      const LiftedPath lift_back = horizontal_lift(conn, back, start, steps);
      cr.residual[3] = fiber_distance(lift_back.end_fiber(), start);
    }

    // (vi) start-independence of loop triviality over the fiber sample,
    // with the conjugation identity h_s = s^{-1} h_e s as the oracle
    {
      const HolonomyRecord base_rec = holonomy_element(conn, axiom_case.loop, e, steps);
      const bool base_trivial = (base_rec.element - e).norm() <= tol;
      double rvi = 0.0;
      bool consistent = true;
      for (const Matrix& s : axiom_case.fiber_starts) {
        const HolonomyRecord rec = holonomy_element(conn, axiom_case.loop, s, steps);
        const Matrix conjugated = s.inverse() * base_rec.element * s;
        rvi = std::max(rvi, fiber_distance(rec.element, conjugated));
        const bool trivial = (rec.element - e).norm() <= tol;
        consistent = consistent && (trivial == base_trivial);
      }
      cr.residual[5] = rvi;
      cr.triviality_consistent = consistent;
    }

    for (int a = 0; a < 6; ++a)
      report.max_residual[static_cast<std::size_t>(a)] =
          std::max(report.max_residual[static_cast<std::size_t>(a)],
                   cr.residual[static_cast<std::size_t>(a)]);
    report.triviality_consistent = report.triviality_consistent && cr.triviality_consistent;
    report.cases.push_back(cr);
  }
  return report;
}

FlatnessReport flatness_check(const ConnectionData& conn,
                              const std::vector<LoopHomotopy>& families, double tol, int steps,
                              int s_samples) {
  if (s_samples < 2) throw InputError("flatness_check: need at least two family samples");
  FlatnessReport report;
  report.tol = tol;
  const Matrix e = conn.group.identity();

  bool flat = true;
  bool totally = true;
  for (const LoopHomotopy& family : families) {
    FlatnessFamilyResult fr;
    fr.name = family.name;
    Matrix base;
    for (int i = 0; i < s_samples; ++i) {
      const double s = i / (s_samples - 1.0);
      const HolonomyRecord rec = holonomy_element(conn, family.at(s), e, steps);
      if (i == 0) base = rec.element;
      fr.holonomy_variation = std::max(fr.holonomy_variation, (rec.element - base).norm());
      fr.max_identity_distance = std::max(fr.max_identity_distance, (rec.element - e).norm());
    }
    flat = flat && fr.holonomy_variation <= tol;
    totally = totally && fr.max_identity_distance <= tol;
    report.families.push_back(std::move(fr));
  }
  report.verdict = !flat ? Flatness::NotFlat
                         : (totally ? Flatness::TotallyFlat : Flatness::Flat);
  return report;
}

const char* flatness_name(Flatness f) {
  switch (f) {
    case Flatness::NotFlat: return "not flat";
    case Flatness::Flat: return "flat, not totally flat";
    case Flatness::TotallyFlat: return "totally flat";
  }
  return "?";
}

}  // namespace holab
