#include "holab/runner.hpp"

#include "holab/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace holab {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"transport", "holonomy", "axioms", "curvature",
                                                 "plaques",   "asverify", "reduce"};
  return names;
}

double loop_signed_area(const SmoothPath& loop, int samples) {
  if (loop.dim != 2) throw ShapeError("loop_signed_area: needs a 2-d chart");
  double area = 0.0;
  Vector prev = loop.eval(0.0);
  for (int i = 1; i <= samples; ++i) {
    const Vector cur = loop.eval(static_cast<double>(i) / samples);
    area += prev[0] * cur[1] - cur[0] * prev[1];
    prev = cur;
  }
  return 0.5 * area;
}

double rotation_angle(const Matrix& r) {
  if (r.rows() == 2) return std::abs(std::atan2(r(1, 0), r(0, 0)));
  if (r.rows() == 3) {
    const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
  }
  throw ShapeError("rotation_angle: only 2x2 and 3x3 rotations supported");
}

double angle_distance(double a, double b) {
  auto wrap = [](double x) {
    x = std::fmod(std::abs(x), 2.0 * kPi);
    return x > kPi ? 2.0 * kPi - x : x;
  };
  return std::abs(wrap(a) - wrap(b));
}

std::vector<AxiomCase> make_axiom_cases(const Scenario& scenario, int count, std::uint64_t seed,
                                        int fiber_starts) {
  Rng rng(seed);
  const MatrixGroup& group = scenario.group;
  std::vector<AxiomCase> cases;
  for (int k = 0; k < count; ++k) {
    AxiomCase c;
    c.gamma = scenario.random_path(rng);
    // continuation from the endpoint, kept near it so the pair stays in-chart
    RandomLoopPolicy cont_policy = scenario.random_policy;
    cont_policy.center = c.gamma.end();
    cont_policy.radius = 0.5 * scenario.random_policy.radius;
    c.continuation = fourier_path(cont_policy.center, cont_policy.harmonics, rng,
                                  scenario.connection.chart.domain, cont_policy.radius);
    c.loop = scenario.random_loop(rng, "case" + std::to_string(k));
    auto random_group = [&]() {
      Matrix m = 0.7 * rng.normal_matrix(group.size, group.size);
      if (group.family == MatrixFamily::SpecialOrthogonal) m = 0.5 * (m - m.transpose());
      return matrix_exp<double>(m);
    };
    c.start = random_group();
    c.fiber_starts.push_back(group.identity());
    for (int f = 1; f < fiber_starts; ++f) c.fiber_starts.push_back(random_group());
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<double> lift_convergence_orders(const ConnectionData& conn, const SmoothPath& path,
                                            const std::vector<int>& step_counts) {
  if (step_counts.size() < 2) throw InputError("lift_convergence_orders: need >= 2 step counts");
  const Matrix e = conn.group.identity();
  const int ref_steps = 8 * *std::max_element(step_counts.begin(), step_counts.end());
  const Matrix ref = horizontal_lift(conn, path, e, ref_steps).end_fiber();
  std::vector<double> errors;
  for (int n : step_counts)
    errors.push_back((horizontal_lift(conn, path, e, n).end_fiber() - ref).norm());
  std::vector<double> orders;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio_steps =
        static_cast<double>(step_counts[i]) / static_cast<double>(step_counts[i - 1]);
    orders.push_back(std::log(errors[i - 1] / std::max(errors[i], 1e-300)) /
                     std::log(ratio_steps));
  }
  return orders;
}

namespace {

struct Check {
  std::vector<std::string>* summary;
  bool pass = true;

  void record(bool ok, const std::string& text) {
    summary->push_back(std::string(ok ? "PASS " : "FAIL ") + text);
    pass = pass && ok;
  }
};

double default_tol(const std::string& command) {
  if (command == "plaques") return 1e-4;
  if (command == "curvature") return 0.02;
  return 1e-6;
}

std::vector<Loop> gather_loops(const Scenario& scenario, int random_count, std::uint64_t seed) {
  std::vector<Loop> loops = scenario.loops;
  Rng rng(seed);
  for (int i = 0; i < random_count; ++i)
    loops.push_back(scenario.random_loop(rng, "random-" + std::to_string(i)));
  return loops;
}

// family of loops for curvature sampling: the scenario's first homotopy when
// present, otherwise a scaling family of a seeded random loop
std::function<SmoothPath(double)> sampling_family(const Scenario& scenario, std::uint64_t seed) {
  if (!scenario.homotopies.empty()) {
    const LoopHomotopy h = scenario.homotopies.front();
    return [h](double s) { return h.at(s).path; };
  }
  Rng rng(seed + 17);
  const Loop base = scenario.random_loop(rng, "family-base");
  const Vector center = base.basepoint;
  const SmoothPath path = base.path;
  return [path, center](double s) {
    const double scale = 0.3 + 0.7 * s;
    auto ev = path.eval;
    SmoothPath scaled;
    scaled.dim = path.dim;
    scaled.eval = [ev, center, scale](double t) {
      return (center + scale * (ev(t) - center)).eval();
    };
    if (path.deriv) {
      auto dv = path.deriv;
      scaled.deriv = [dv, scale](double t) { return (scale * dv(t)).eval(); };
    }
    scaled.stationary_ends = path.stationary_ends;
    scaled.resample(static_cast<int>(path.samples.size()));
    return scaled;
  };
}

std::vector<CurvatureSample> gather_samples(const Scenario& scenario, const RunParams& params) {
  VectorField X = [](const Vector& x) {
    Vector v = Vector::Zero(x.size());
    v[0] = 1.0;
    return v;
  };
  VectorField Y = [](const Vector& x) {
    Vector v = Vector::Zero(x.size());
    if (x.size() > 1) v[1] = 1.0;
    return v;
  };
  std::vector<double> family_params;
  for (int i = 0; i < 6; ++i) family_params.push_back(i / 5.0);
  return sample_curvature_along_horizontal(scenario.connection, sampling_family(scenario, params.seed),
                                           family_params, 7, X, Y, params.steps, params.sign);
}

// ---------------------------------------------------------------------------

void run_transport(const Scenario& scenario, const RunParams& params, RunReport& report,
                   Check& check) {
  const ConnectionData& conn = scenario.connection;
  const Matrix e = scenario.group.identity();

  Table lifts;
  lifts.name = "lifts";
  lifts.columns = {"group_residual", "projection_residual", "equivariance_residual"};
  Rng rng(params.seed);
  std::vector<Loop> loops = gather_loops(scenario, std::min(params.loops, 8), params.seed);
  double worst_group = 0.0, worst_equiv = 0.0;
  for (const Loop& loop : loops) {
    const LiftedPath lift = horizontal_lift(conn, loop.path, e, params.steps);
    double proj = 0.0;
    for (std::size_t i = 0; i < loop.path.samples.size(); ++i)
      proj = std::max(proj, (lift.base.samples[i] - loop.path.samples[i]).norm());
    // lifting with start h equals right-translating the lift with start e
    Matrix h = rng.normal_matrix(scenario.group.size, scenario.group.size);
    if (scenario.group.family == MatrixFamily::SpecialOrthogonal) h = 0.5 * (h - h.transpose());
    h = matrix_exp<double>(h);
    const LiftedPath lift_h = horizontal_lift(conn, loop.path, h, params.steps);
    double equiv = 0.0;
    for (int i = 0; i <= params.steps; i += std::max(1, params.steps / 16))
      equiv = std::max(equiv, (lift_h.fiber_at_node(i) - lift.fiber_at_node(i) * h).norm());
    lifts.row_labels.push_back(loop.id);
    lifts.rows.push_back({lift.max_group_residual, proj, equiv});
    worst_group = std::max(worst_group, lift.max_group_residual);
    worst_equiv = std::max(worst_equiv, equiv);
  }
  report.tables.push_back(lifts);
  check.record(worst_group <= 1e-8,
               "group preservation: max relation residual " + format_double(worst_group));
  check.record(worst_equiv <= 10.0 * report.tol_used,
               "equivariance: max residual " + format_double(worst_equiv));

  // convergence study on a smooth scenario loop
  const SmoothPath& study = loops.front().path;
  const std::vector<int> counts = {params.steps / 4, params.steps / 2, params.steps};
  const Matrix ref = horizontal_lift(conn, study, e, 8 * params.steps).end_fiber();
  Table conv;
  conv.name = "convergence";
  conv.kind = Table::Kind::Convergence;
  conv.columns = {"steps", "error"};
  std::vector<double> errors;
  for (int n : counts) {
    const double err = (horizontal_lift(conn, study, e, n).end_fiber() - ref).norm();
    errors.push_back(err);
    conv.rows.push_back({static_cast<double>(n), err});
  }
  report.tables.push_back(conv);
  if (errors.front() < 1e-13) {
    check.record(true, "convergence: integrator exact on this scenario (errors below 1e-13)");
  } else {
    bool ok = true;
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double order = std::log2(errors[i - 1] / std::max(errors[i], 1e-300));
      ok = ok && order > 3.5 && order < 4.5;
      check.record(order > 3.5 && order < 4.5,
                   "convergence order " + format_double(order) + " between " +
                       std::to_string(counts[i - 1]) + " and " + std::to_string(counts[i]) +
                       " steps");
    }
    (void)ok;
  }
}

void run_holonomy(const Scenario& scenario, const RunParams& params, RunReport& report,
                  Check& check) {
  const ConnectionData& conn = scenario.connection;
  const Matrix e = scenario.group.identity();
  const std::vector<Loop> loops = gather_loops(scenario, params.loops, params.seed);

  std::vector<HolonomyRecord> records(loops.size());
  parallel_for(static_cast<int>(loops.size()), [&](int i) {
    records[static_cast<std::size_t>(i)] =
        holonomy_element(conn, loops[static_cast<std::size_t>(i)], e, params.steps);
  });

  Table t;
  t.name = "holonomy";
  t.columns = {"angle", "log_norm", "log_ok", "group_residual"};
  for (const HolonomyRecord& rec : records) {
    t.row_labels.push_back(rec.loop_id);
    t.rows.push_back({rotation_angle(rec.element), rec.log_ok ? rec.log.norm() : -1.0,
                      rec.log_ok ? 1.0 : 0.0, rec.group_residual});
  }
  report.tables.push_back(t);

  if (scenario.name == "flat-plane") {
    double worst = 0.0;
    for (const HolonomyRecord& rec : records) worst = std::max(worst, (rec.element - e).norm());
    check.record(worst <= report.tol_used,
                 "all holonomies are the identity: max distance " + format_double(worst));
  } else if (scenario.name == "flat-torus") {
    const HolonomyRecord* h10 = nullptr;
    const HolonomyRecord* h01 = nullptr;
    const HolonomyRecord* h11 = nullptr;
    for (const HolonomyRecord& rec : records) {
      if (rec.loop_id == "winding-1-0") h10 = &rec;
      if (rec.loop_id == "winding-0-1") h01 = &rec;
      if (rec.loop_id == "winding-1-1") h11 = &rec;
    }
    if (h10 && h01 && h11) {
      const double distinct = std::min({(h10->element - h01->element).norm(),
                                        (h10->element - h11->element).norm(),
                                        (h01->element - h11->element).norm()});
      check.record(distinct > 0.1, "winding elements distinct: min pairwise distance " +
                                       format_double(distinct));
      const double comm = (h10->element * h01->element - h01->element * h10->element).norm();
      check.record(comm <= report.tol_used, "winding elements commute: " + format_double(comm));
      const double prod = (h11->element - h10->element * h01->element).norm();
      check.record(prod <= report.tol_used,
                   "winding (1,1) equals the product of (1,0) and (0,1): " + format_double(prod));
    }
  } else if (scenario.name == "sphere-lc") {
    for (std::size_t i = 0; i < scenario.loops.size(); ++i) {
      const double phi0 = scenario.loops[i].path.eval(0.0)[0];
      const double expected = 2.0 * kPi * (1.0 - std::cos(phi0));
      const double got = rotation_angle(records[i].element);
      check.record(angle_distance(got, expected) <= report.tol_used,
                   "latitude " + format_double(phi0) + ": angle " + format_double(got) +
                       " vs closed form " + format_double(expected));
    }
  } else if (scenario.name == "magnetic-u1") {
    // abelian Stokes: holonomy = exp(-signed_area * F), F constant
    const Matrix f = curvature_at(conn, Vector::Zero(2), Vector::Unit(2, 0), Vector::Unit(2, 1),
                                  -1.0, params.sign);
    double worst = 0.0;
    for (std::size_t i = 0; i < loops.size(); ++i) {
      const double area = loop_signed_area(loops[i].path);
      const Matrix expected = matrix_exp<double>((-area * f).eval());
      worst = std::max(worst, (records[i].element - expected).norm() / expected.norm());
    }
    check.record(worst <= 1e-4, "abelian Stokes: max relative error " + format_double(worst) +
                                    " against the shoelace flux oracle");
  } else {
    double worst = 0.0;
    for (const HolonomyRecord& rec : records) worst = std::max(worst, rec.group_residual);
    check.record(worst <= 1e-8, "group preservation: " + format_double(worst));
    if (!scenario.properties.reducible_basis.empty()) {
      const SubalgebraSpan span = bracket_closure(scenario.properties.reducible_basis);
      double dist = 0.0;
      for (const HolonomyRecord& rec : records)
        if (rec.log_ok) dist = std::max(dist, span.distance(rec.log));
      check.record(dist <= report.tol_used,
                   "holonomy logs inside the declared reduced algebra: " + format_double(dist));
    }
  }
}

void run_axioms(const Scenario& scenario, const RunParams& params, RunReport& report,
                Check& check) {
  const int cases = std::min(params.loops, 20);
  const AxiomSuiteReport suite =
      axiom_suite(scenario.connection, make_axiom_cases(scenario, cases, params.seed),
                  report.tol_used, params.steps);
  Table t;
  t.name = "axiom_residuals";
  t.columns = {"max_residual"};
  static const char* kAxioms[6] = {"projection", "concatenation", "reparametrization",
                                   "backtracking", "initial_condition", "triviality"};
  for (int a = 0; a < 6; ++a) {
    t.row_labels.push_back(kAxioms[a]);
    t.rows.push_back({suite.max_residual[static_cast<std::size_t>(a)]});
    check.record(suite.max_residual[static_cast<std::size_t>(a)] <= report.tol_used,
                 std::string("axiom ") + kAxioms[a] + " residual " +
                     format_double(suite.max_residual[static_cast<std::size_t>(a)]));
  }
  check.record(suite.triviality_consistent,
               "loop-triviality verdict identical across fiber starts");
  report.tables.push_back(t);
}

void run_curvature(const Scenario& scenario, const RunParams& params, RunReport& report,
                   Check& check) {
  const ConnectionData& conn = scenario.connection;
  const Box& box = conn.chart.domain;
  const double eps = 0.05 * box.min_width();
  const int steps = std::max(200, params.steps / 2);

  Table t;
  t.name = "sign_oracle";
  t.columns = {"x0", "x1", "curvature_norm", "oracle_rel_error", "antisymmetry"};
  double worst_rel = 0.0;
  for (int gx = 0; gx < 3; ++gx)
    for (int gy = 0; gy < 3; ++gy) {
      Vector f(2);
      f << 0.3 + 0.2 * gx, 0.3 + 0.2 * gy;
      const Vector x = box.at_fraction(f);
      const Vector v = Vector::Unit(2, 0), w = Vector::Unit(2, 1);
      const Matrix fc = curvature_at(conn, x, v, w, -1.0, params.sign);
      const Matrix oracle = small_loop_oracle_richardson(conn, x, v, w, eps, steps);
      CurvatureSample s;
      s.x = x;
      s.v = v;
      s.w = w;
      const double anti = curvature_sample_antisymmetry(conn, s, params.sign);
      double rel;
      if (fc.norm() < 1e-9) {
        rel = oracle.norm() <= 1e-6 ? 0.0 : oracle.norm();
      } else {
        rel = (oracle - fc).norm() / fc.norm();
      }
      worst_rel = std::max(worst_rel, rel);
      t.rows.push_back({x[0], x[1], fc.norm(), rel, anti});
    }
  report.tables.push_back(t);
  check.record(worst_rel <= report.tol_used,
               "small-loop oracle matches curvature_at: max relative error " +
                   format_double(worst_rel) + " (sign convention: " +
                   (params.sign == CurvatureSign::Oracle ? "oracle" : "paper") + ")");
}

void run_plaques(const Scenario& scenario, const RunParams& params, RunReport& report,
                 Check& check) {
  Rng rng(params.seed);
  const SmoothPath c = scenario.random_path(rng);
  Table t;
  t.name = "plaques_residual";
  t.kind = Table::Kind::Convergence;
  t.columns = {"steps", "residual"};
  std::vector<int> counts = {params.steps / 8, params.steps / 4, params.steps / 2, params.steps};
  std::vector<double> residuals;
  for (int n : counts) {
    const double r = plaques_identity_residual(scenario.connection, c, n, 9, params.sign);
    residuals.push_back(r);
    t.rows.push_back({static_cast<double>(n), r});
  }
  report.tables.push_back(t);
  check.record(residuals.back() <= report.tol_used,
               "identity residual " + format_double(residuals.back()) + " at " +
                   std::to_string(counts.back()) + " steps");
  if (residuals.front() > 1e-12) {
    const double order = std::log2(residuals[0] / std::max(residuals[1], 1e-300));
    check.record(order >= 1.8, "observed refinement order " + format_double(order) +
                                   " between " + std::to_string(counts[0]) + " and " +
                                   std::to_string(counts[1]) + " steps");
  } else {
    check.record(true, "residual at the round-off floor; refinement order not measurable");
  }
}

void run_asverify(const Scenario& scenario, const RunParams& params, RunReport& report,
                  Check& check) {
  const std::vector<CurvatureSample> samples = gather_samples(scenario, params);
  const std::vector<Loop> loops = gather_loops(scenario, params.loops, params.seed);
  const ReductionReport rr = ambrose_singer_verify(scenario.connection, loops, samples,
                                                   report.tol_used, params.steps);

  Table t;
  t.name = "loop_log_residuals";
  t.columns = {"log_distance", "log_ok"};
  for (const LoopResidual& lr : rr.loop_residuals) {
    t.row_labels.push_back(lr.loop_id);
    t.rows.push_back({lr.log_distance, lr.log_ok ? 1.0 : 0.0});
  }
  report.tables.push_back(t);

  Table spant;
  spant.name = "span";
  spant.columns = {"rank", "max_loop_residual", "curvature_residual", "ad_residual",
                   "flagged_loops"};
  spant.rows.push_back({static_cast<double>(rr.span.rank()), rr.max_loop_residual,
                        rr.max_curvature_residual, rr.ad_residual,
                        static_cast<double>(rr.flagged_loops)});
  report.tables.push_back(spant);

  check.record(rr.verdict, "Ambrose-Singer verification: span rank " +
                               std::to_string(rr.span.rank()) + ", max loop residual " +
                               format_double(rr.max_loop_residual) + ", Ad residual " +
                               format_double(rr.ad_residual));
}

void run_reduce(const Scenario& scenario, const RunParams& params, RunReport& report,
                Check& check) {
  SubalgebraSpan span;
  EmbeddingSpec rho;
  if (!scenario.properties.reducible_basis.empty()) {
    span = bracket_closure(scenario.properties.reducible_basis);
    rho.description = scenario.properties.reducible_to;
    rho.algebra_basis = scenario.properties.reducible_basis;
  } else {
    span = reduced_algebra(gather_samples(scenario, params));
    rho.description = "span generated by curvature samples";
    rho.algebra_basis = span.basis;
  }
  const std::vector<Loop> loops = gather_loops(scenario, std::min(params.loops, 30), params.seed);
  const ReductionReport rr = reduction_check(scenario.connection, span, rho, loops,
                                             report.tol_used, params.steps, params.sign);

  Table t;
  t.name = "reduction";
  t.columns = {"rank", "max_loop_residual", "theta_residual", "ad_residual",
               "embedding_residual", "flagged_loops"};
  t.rows.push_back({static_cast<double>(rr.span.rank()), rr.max_loop_residual,
                    rr.max_curvature_residual, rr.ad_residual, rr.embedding_residual,
                    static_cast<double>(rr.flagged_loops)});
  report.tables.push_back(t);

  check.record(rr.verdict, "structure group reduces to " + rho.description +
                               ": max loop residual " + format_double(rr.max_loop_residual) +
                               ", theta residual " + format_double(rr.max_curvature_residual));
}

}  // namespace

RunReport run_command(const std::string& command, const Scenario& scenario,
                      const RunParams& params) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw InputError("unknown command '" + command + "'");
  if (params.steps < 8) throw InputError("steps must be >= 8");
  if (params.loops < 0) throw InputError("loops must be >= 0");

  RunReport report;
  report.scenario = scenario.name;
  report.command = command;
  report.params = params;
  report.tol_used = params.tol > 0.0 ? params.tol : default_tol(command);

  Check check{&report.summary};
  const auto t0 = std::chrono::steady_clock::now();
  if (command == "transport")
    run_transport(scenario, params, report, check);
  else if (command == "holonomy")
    run_holonomy(scenario, params, report, check);
  else if (command == "axioms")
    run_axioms(scenario, params, report, check);
  else if (command == "curvature")
    run_curvature(scenario, params, report, check);
  else if (command == "plaques")
    run_plaques(scenario, params, report, check);
  else if (command == "asverify")
    run_asverify(scenario, params, report, check);
  else
    run_reduce(scenario, params, report, check);
  const auto t1 = std::chrono::steady_clock::now();
  report.timing_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  report.pass = check.pass;
  return report;
}

}  // namespace holab
