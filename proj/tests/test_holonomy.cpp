#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "holab/runner.hpp"
#include "holab/scenario.hpp"

#include <cmath>

using namespace holab;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("reverse: involution, constant path, inverse holonomy") {
  const Scenario u1 = builtin_scenario("magnetic-u1");
  Rng rng(5);
  const Loop loop = u1.random_loop(rng, "loop");

  const Loop rev = reverse(loop);
  const Loop revrev = reverse(rev);
  for (double t : {0.0, 0.2, 0.55, 1.0})
    CHECK((revrev.path.eval(t) - loop.path.eval(t)).norm() < 1e-15);

  const Loop still = make_loop(constant_path(vec2(0.1, 0.2)), u1.connection.chart, "still");
  const Loop still_rev = reverse(still);
  for (double t : {0.0, 0.5, 1.0})
    CHECK((still_rev.path.eval(t) - still.path.eval(t)).norm() == 0.0);

  const Matrix e = u1.group.identity();
  const HolonomyRecord fwd = holonomy_element(u1.connection, loop, e, 600);
  const HolonomyRecord bwd = holonomy_element(u1.connection, rev, e, 600);
  CHECK((bwd.element - fwd.element.inverse()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("concat: endpoint checks, seam smoothness, reparametrization invariance") {
  const Scenario u1 = builtin_scenario("magnetic-u1");
  Rng rng(7);
  const SmoothPath a = u1.random_path(rng);
  SmoothPath from_end = fourier_path(a.end(), 3, rng, u1.connection.chart.domain, 0.3);

  const SmoothPath joined = concat(from_end, a);
  CHECK((joined.eval(0.0) - a.start()).norm() < 1e-12);
  CHECK((joined.eval(1.0) - from_end.end()).norm() < 1e-12);

  // the seam is probe-smooth at order 4
  ProbeOptions opt;
  opt.order = 4;
  CHECK(probe_curve([&](double t) { return joined.eval(t); }, 0.25, 0.75, opt));

  // mismatched endpoints refuse to join
  CHECK_THROWS_AS(concat(a, from_end), JoinError);

  // gamma v (constant at basepoint) has the holonomy of gamma
  const Loop loop = u1.random_loop(rng, "orig");
  const SmoothPath padded = concat(loop.path, constant_path(loop.basepoint));
  const Loop padded_loop = make_loop(padded, u1.connection.chart, "padded");
  const Matrix e = u1.group.identity();
  const HolonomyRecord h0 = holonomy_element(u1.connection, loop, e, 800);
  const HolonomyRecord h1 = holonomy_element(u1.connection, padded_loop, e, 800);
  CHECK((h0.element - h1.element).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("holonomy composition convention: hol(g2 v g1) = hol(g2) hol(g1)") {
  const Scenario so3 = builtin_scenario("so3-generic");
  Rng rng(11);
  const Matrix e = so3.group.identity();
  for (int trial = 0; trial < 5; ++trial) {
    const Loop g1 = so3.random_loop(rng, "g1");
    // second loop at the same basepoint
    Rng rng2(100 + trial);
    SmoothPath p2 = fourier_loop(g1.basepoint, 3, rng2, so3.connection.chart.domain, 0.5);
    const Loop g2 = make_loop(p2, so3.connection.chart, "g2");

    Loop joined;
    joined.path = concat(g2.path, g1.path);
    joined.basepoint = g1.basepoint;
    joined.id = "g2 v g1";

    const Matrix lhs = holonomy_element(so3.connection, joined, e, 1200).element;
    const Matrix rhs = holonomy_element(so3.connection, g2, e, 600).element *
                       holonomy_element(so3.connection, g1, e, 600).element;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("holonomy: flat identity, torus windings, log flagging near pi") {
  const Scenario flat = builtin_scenario("flat-plane");
  Rng rng(13);
  const Matrix e2 = flat.group.identity();
  for (int i = 0; i < 3; ++i) {
    const HolonomyRecord rec =
        holonomy_element(flat.connection, flat.random_loop(rng, "c"), e2, 400);
    CHECK((rec.element - e2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rec.log_ok);
    CHECK(rec.log.norm() < 1e-12);
  }

  // torus: holonomy depends only on the winding numbers
  const Scenario torus = builtin_scenario("flat-torus");
  const HolonomyRecord h10 =
      holonomy_element(torus.connection, *torus.find_loop("winding-1-0"), e2, 500);
  const double angle10 = std::atan2(h10.element(1, 0), h10.element(0, 0));
  CHECK(angle_distance(angle10, 2.0 * kPi * 0.3) < 1e-10);

  // a magnetic loop enclosing area pi has rotation angle pi: log flagged
  const Scenario u1 = builtin_scenario("magnetic-u1");
  const double r = 1.0;  // area pi
  Env env;
  env.set("r", r);
  const Loop pi_loop = make_loop(
      path_from_expressions(
          {Expr::parse("r*cos(2*pi*t)-r"), Expr::parse("r*sin(2*pi*t)")}, env),
      u1.connection.chart, "area-pi");
  const HolonomyRecord rec = holonomy_element(u1.connection, pi_loop, e2, 1000);
  CHECK_FALSE(rec.log_ok);
  CHECK(rotation_angle(rec.element) == doctest::Approx(kPi).epsilon(1e-7));
}

TEST_CASE("basepoint change conjugates holonomy exactly") {
  const Scenario so3 = builtin_scenario("so3-generic");
  Rng rng(17);
  const Loop loop = so3.random_loop(rng, "loop");
  const Matrix e = so3.group.identity();
  const Matrix base = holonomy_element(so3.connection, loop, e, 500).element;
  for (int trial = 0; trial < 4; ++trial) {
    Matrix s = rng.normal_matrix(3, 3);
    s = matrix_exp<double>((0.5 * (s - s.transpose())).eval());
    const Matrix conj = holonomy_element(so3.connection, loop, s, 500).element;
    CHECK((conj - s.inverse() * base * s).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("loops_equivalent: reflexivity, reparametrization, winding separation") {
  const Scenario torus = builtin_scenario("flat-torus");
  const Loop& w10 = *torus.find_loop("winding-1-0");
  const Loop& w01 = *torus.find_loop("winding-0-1");

  CHECK(loops_equivalent(torus.connection, w10, w10, 1e-6, 600));

  // reparametrized loop is equivalent to the original
  SmoothPath re = w10.path;
  auto ev = w10.path.eval;
  re.eval = [ev](double t) { return ev(flat_step(t)); };
  re.deriv = {};
  re.resample(257);
  const Loop w10_re = make_loop(re, torus.connection.chart, "reparam");
  CHECK(loops_equivalent(torus.connection, w10, w10_re, 1e-6, 600));

  // different winding classes are not equivalent
  CHECK_FALSE(loops_equivalent(torus.connection, w10, w01, 1e-6, 600));

  // basepoint mismatch is a usage error
  Rng rng(23);
  const Loop off = make_loop(
      fourier_loop(vec2(0.3, 0.2), 2, rng, torus.connection.chart.domain, 0.3),
      torus.connection.chart, "off");
  CHECK_THROWS_AS(loops_equivalent(torus.connection, w10, off, 1e-6, 200), InputError);
}

TEST_CASE("axiom suite passes on flat and generic scenarios") {
  for (const char* name : {"flat-plane", "so3-generic"}) {
    const Scenario scenario = builtin_scenario(name);
    const auto cases = make_axiom_cases(scenario, 6, 42);
    const AxiomSuiteReport report = axiom_suite(scenario.connection, cases, 1e-6, 700);
    for (int a = 0; a < 6; ++a) {
      INFO(name << " axiom " << a);
      CHECK(report.max_residual[static_cast<std::size_t>(a)] <= 1e-6);
    }
    CHECK(report.triviality_consistent);
    CHECK(report.pass(1e-6));
  }
}

TEST_CASE("holonomy group laws within tolerance on random pairs") {
  const Scenario so3 = builtin_scenario("so3-generic");
  const Matrix e = so3.group.identity();
  Rng rng(29);
  for (int trial = 0; trial < 4; ++trial) {
    const Loop a = so3.random_loop(rng, "a");
    Rng rng2(500 + trial);
    const Loop b = make_loop(
        fourier_loop(a.basepoint, 3, rng2, so3.connection.chart.domain, 0.5),
        so3.connection.chart, "b");

    const Matrix ha = holonomy_element(so3.connection, a, e, 600).element;
    const Matrix hb = holonomy_element(so3.connection, b, e, 600).element;

    Loop ab;
    ab.path = concat(b.path, a.path);
    ab.basepoint = a.basepoint;
    const Matrix hab = holonomy_element(so3.connection, ab, e, 1200).element;
    CHECK((hab - hb * ha).norm() < 1e-5);

    const Matrix hinv = holonomy_element(so3.connection, reverse(a), e, 600).element;
    CHECK((hinv - ha.inverse()).norm() < 1e-6);

    // associativity up to reparametrization
    Loop c;
    Rng rng3(900 + trial);
    c = make_loop(fourier_loop(a.basepoint, 2, rng3, so3.connection.chart.domain, 0.4),
                  so3.connection.chart, "c");
    Loop left, right;
    left.path = concat(concat(c.path, b.path), a.path);
    left.basepoint = a.basepoint;
    right.path = concat(c.path, concat(b.path, a.path));
    right.basepoint = a.basepoint;
    const Matrix hl = holonomy_element(so3.connection, left, e, 1600).element;
    const Matrix hr = holonomy_element(so3.connection, right, e, 1600).element;
    CHECK((hl - hr).norm() < 1e-5);
  }
}

TEST_CASE("flatness_check: torus flat-not-totally, plane totally flat, sphere not flat") {
  const Scenario torus = builtin_scenario("flat-torus");
  const FlatnessReport torus_report =
      flatness_check(torus.connection, torus.homotopies, 1e-7, 600);
  CHECK(torus_report.verdict == Flatness::Flat);
  CHECK(std::string(flatness_name(torus_report.verdict)) == "flat, not totally flat");

  const Scenario plane = builtin_scenario("flat-plane");
  const FlatnessReport plane_report =
      flatness_check(plane.connection, plane.homotopies, 1e-7, 400);
  CHECK(plane_report.verdict == Flatness::TotallyFlat);

  const Scenario sphere = builtin_scenario("sphere-lc");
  const FlatnessReport sphere_report =
      flatness_check(sphere.connection, sphere.homotopies, 1e-7, 400);
  CHECK(sphere_report.verdict == Flatness::NotFlat);
}

TEST_CASE("make_loop rejects open paths and normalizes stationary ends") {
  const Scenario u1 = builtin_scenario("magnetic-u1");
  CHECK_THROWS_AS(make_loop(line_path(vec2(0, 0), vec2(0.5, 0)), u1.connection.chart, "open"),
                  InputError);

  const Loop circle = make_loop(
      path_from_expressions({Expr::parse("0.4*cos(2*pi*t)-0.4"), Expr::parse("0.4*sin(2*pi*t)")}),
      u1.connection.chart, "circle");
  CHECK(circle.path.stationary_ends);
  CHECK(circle.path.velocity(0.0, 1e-5).norm() < 1e-8);
  CHECK(circle.path.velocity(1.0, 1e-5).norm() < 1e-8);
}
