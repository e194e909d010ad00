#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "holab/diffeology.hpp"
#include "holab/forms.hpp"

#include <cmath>

using namespace holab;

namespace {

std::vector<double> sample_fn(const std::function<double(double)>& f, double a, double b,
                              int n) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = f(a + (b - a) * i / (n - 1.0));
  return s;
}

Plot curve_plot(int target_dim, std::function<Vector(double)> f, const Box& domain,
                std::string label) {
  Plot p;
  p.domain = domain;
  p.target_dim = target_dim;
  p.eval = [f](const Vector& u) { return f(u[0]); };
  p.label = std::move(label);
  return p;
}

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("smoothness_probe: reference behaviors") {
  // sin is smooth through order 4
  CHECK(smoothness_probe(sample_fn([](double t) { return std::sin(t); }, -1, 1, 257), 4, 1e-6));
  // |t| has a divergent second difference quotient
  CHECK_FALSE(
      smoothness_probe(sample_fn([](double t) { return std::abs(t); }, -1, 1, 257), 2, 1e-6));
  // max(t,0)^3 is C^2 but not C^4
  auto cube = [](double t) { return t > 0 ? t * t * t : 0.0; };
  CHECK(smoothness_probe(sample_fn(cube, -1, 1, 257), 2, 1e-6));
  CHECK_FALSE(smoothness_probe(sample_fn(cube, -1, 1, 257), 4, 1e-6));
  // grid not aligned with the kink
  CHECK_FALSE(smoothness_probe(
      sample_fn([](double t) { return std::abs(t - 0.1234); }, -1, 1, 257), 2, 1e-6));

  CHECK_THROWS_AS(smoothness_probe({1.0, 2.0, 3.0}, 2, 1e-6), InputError);
  std::vector<double> bad = sample_fn([](double t) { return t; }, 0, 1, 64);
  bad[10] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(smoothness_probe(bad, 1, 1e-6));
}

TEST_CASE("is_plot: constants, factorizations, kink rejection") {
  const Diffeology line = Diffeology::standard(Box::cube(1, -2.0, 2.0));

  // constant plot (axiom 1)
  Vector value(1);
  value << 0.4;
  auto constant = is_plot(constant_plot(1, value), line, 1);
  CHECK(constant.accepted);
  CHECK(constant.kind == WitnessKind::Constant);

  // constant with value outside the model subset
  value << 5.0;
  CHECK_FALSE(is_plot(constant_plot(1, value), line, 1).accepted);

  // generator o (smooth polynomial reparametrization) (axiom 3)
  auto poly = curve_plot(
      1, [](double t) { return Vector::Constant(1, 0.3 * t * t * t - 0.5 * t).eval(); },
      Box::cube(1, -1.0, 1.0), "cubic");
  auto factored = is_plot(poly, line, 2);
  CHECK(factored.accepted);
  CHECK(factored.kind == WitnessKind::Factored);
  CHECK(factored.generator == 0);

  // |t| rejected by the order-2 probe
  auto kink = curve_plot(1, [](double t) { return Vector::Constant(1, std::abs(t)).eval(); },
                         Box::cube(1, -1.0, 1.0), "abs");
  auto rejected = is_plot(kink, line, 2);
  CHECK_FALSE(rejected.accepted);
  CHECK(rejected.kind == WitnessKind::Rejected);
  CHECK(rejected.detail.find("probe") != std::string::npos);

  // dimension mismatch and budget preconditions
  const Diffeology plane = Diffeology::standard(Box::cube(2, -1.0, 1.0));
  CHECK_THROWS_AS(is_plot(poly, plane, 1), ShapeError);
  CHECK_THROWS_AS(is_plot(poly, line, 0), InputError);
}

TEST_CASE("is_plot: gluing over an explicit finite cover") {
  const Diffeology line = Diffeology::standard(Box::cube(1, -2.0, 2.0));
  auto smooth =
      curve_plot(1, [](double t) { return Vector::Constant(1, std::sin(2.0 * t)).eval(); },
                 Box::cube(1, -1.0, 1.0), "sin");
  smooth.cover = {Box::cube(1, -1.0, 0.1), Box::cube(1, -0.1, 1.0)};
  auto glued = line.is_plot(smooth);
  CHECK(glued.accepted);
}

TEST_CASE("pushforward: circle quotient, identity, constant map") {
  const Diffeology line = Diffeology::standard(Box::cube(1, -4.0, 4.0));

  // quotient R -> R/Z realized on the unit circle
  auto wrap = [](const Vector& t) {
    Vector y(2);
    y << std::cos(2.0 * kPi * t[0]), std::sin(2.0 * kPi * t[0]);
    return y;
  };
  const Diffeology circle = line.pushforward(wrap, 2, "wrap");

  auto winding = curve_plot(
      2,
      [](double t) {
        Vector y(2);
        y << std::cos(2.0 * kPi * t), std::sin(2.0 * kPi * t);
        return y;
      },
      Box::cube(1, -1.5, 1.5), "winding");
  auto accepted = is_plot(winding, circle, 2);
  CHECK(accepted.accepted);
  CHECK(accepted.kind == WitnessKind::Factored);

  // a path leaving the circle cannot factor
  auto off = curve_plot(2, [](double t) { return vec2(1.0 + 0.2 * t * t, 0.3 * t); },
                        Box::cube(1, -1.0, 1.0), "off-circle");
  CHECK_FALSE(is_plot(off, circle, 2).accepted);

  // identity push-forward: same acceptance on a sample family
  const Diffeology same = line.pushforward([](const Vector& x) { return x; }, 1, "id");
  for (double k : {1.0, 2.0, 3.0}) {
    auto cand =
        curve_plot(1, [k](double t) { return Vector::Constant(1, std::sin(k * t)).eval(); },
                   Box::cube(1, -1.0, 1.0), "sin");
    CHECK(is_plot(cand, line, 2).accepted == is_plot(cand, same, 2).accepted);
  }
  auto kink = curve_plot(1, [](double t) { return Vector::Constant(1, std::abs(t)).eval(); },
                         Box::cube(1, -1.0, 1.0), "abs");
  CHECK(is_plot(kink, line, 2).accepted == is_plot(kink, same, 2).accepted);

  // constant push-forward: only constant-valued candidates are accepted
  Vector c0 = vec2(0.7, -0.2);
  const Diffeology collapsed = line.pushforward([c0](const Vector&) { return c0; }, 2, "const");
  auto const_cand = curve_plot(2, [c0](double) { return c0; }, Box::cube(1, -1.0, 1.0), "const");
  CHECK(is_plot(const_cand, collapsed, 1).accepted);
  auto moving =
      curve_plot(2, [c0](double t) { return (c0 + Vector::Constant(2, 0.3 * t)).eval(); },
                 Box::cube(1, -1.0, 1.0), "moving");
  CHECK_FALSE(is_plot(moving, collapsed, 1).accepted);
}

TEST_CASE("product diffeology: conjunction of projections") {
  const Diffeology line = Diffeology::standard(Box::cube(1, -2.0, 2.0));
  const Diffeology plane = Diffeology::product(line, line);
  CHECK(plane.space_dim() == 2);

  auto smooth2 = curve_plot(2, [](double t) { return vec2(std::sin(t), t * t); },
                            Box::cube(1, -1.0, 1.0), "smooth2");
  CHECK(is_plot(smooth2, plane, 2).accepted);

  // diagonal t -> (t, t)
  auto diag = curve_plot(2, [](double t) { return vec2(t, t); }, Box::cube(1, -1.0, 1.0), "diag");
  CHECK(is_plot(diag, plane, 2).accepted);

  // one kinked projection rejects the pair
  auto half_kink = curve_plot(2, [](double t) { return vec2(std::sin(t), std::abs(t)); },
                              Box::cube(1, -1.0, 1.0), "half-kink");
  auto r = is_plot(half_kink, plane, 2);
  CHECK_FALSE(r.accepted);
  CHECK(r.detail.find("projection") != std::string::npos);
}

TEST_CASE("trace diffeology: subset predicate on the image") {
  const Diffeology plane = Diffeology::standard(Box::cube(2, -2.0, 2.0));

  // whole space: acceptance unchanged
  const Diffeology whole = plane.trace([](const Vector&) { return true; }, "all");
  auto diag = curve_plot(2, [](double t) { return vec2(t, t); }, Box::cube(1, -1.0, 1.0), "diag");
  CHECK(is_plot(diag, plane, 2).accepted == is_plot(diag, whole, 2).accepted);

  const Diffeology circle = plane.trace(
      [](const Vector& x) { return std::abs(x.squaredNorm() - 1.0) < 1e-9; }, "unit-circle");
  auto on_circle = curve_plot(2, [](double t) { return vec2(std::cos(t), std::sin(t)); },
                              Box::cube(1, -1.0, 1.0), "arc");
  CHECK(is_plot(on_circle, circle, 2).accepted);
  auto chord =
      curve_plot(2, [](double t) { return vec2(t, 0.0); }, Box::cube(1, -1.0, 1.0), "chord");
  CHECK_FALSE(is_plot(chord, circle, 2).accepted);
}

TEST_CASE("projective limit: intersection semantics and connecting maps") {
  const Box region = Box::cube(2, -1.5, 1.5);
  const Diffeology plane = Diffeology::standard(Box::cube(2, -2.0, 2.0));
  const Diffeology circle = plane.trace(
      [](const Vector& x) { return std::abs(x.squaredNorm() - 1.0) < 1e-9; }, "circle");

  auto identity = [](const Vector& x) { return x; };

  // single factor: that factor's acceptance
  const Diffeology single = Diffeology::projective_limit({plane}, {identity}, {}, region);
  auto diag = curve_plot(2, [](double t) { return vec2(t, t); }, Box::cube(1, -1.0, 1.0), "diag");
  CHECK(is_plot(diag, single, 2).accepted == is_plot(diag, plane, 2).accepted);

  // nested: circle inside plane with inclusion; acceptance = the smaller
  Diffeology::ConnectingMap inc;
  inc.from = 1;
  inc.to = 0;
  inc.map = identity;
  const Diffeology nested =
      Diffeology::projective_limit({plane, circle}, {identity, identity}, {inc}, region);
  auto arc = curve_plot(2, [](double t) { return vec2(std::cos(t), std::sin(t)); },
                        Box::cube(1, -1.0, 1.0), "arc");
  CHECK(is_plot(arc, nested, 2).accepted == is_plot(arc, circle, 2).accepted);
  CHECK(is_plot(diag, nested, 2).accepted == is_plot(diag, circle, 2).accepted);
  CHECK_FALSE(is_plot(diag, nested, 2).accepted);  // fails the circle factor

  // inconsistent connecting map
  Diffeology::ConnectingMap bad;
  bad.from = 1;
  bad.to = 0;
  bad.map = [](const Vector& x) { return (2.0 * x).eval(); };
  CHECK_THROWS_AS(
      Diffeology::projective_limit({plane, circle}, {identity, identity}, {bad}, region),
      PreconditionError);
}

TEST_CASE("membership monotonicity: adding generators never rejects") {
  Diffeology narrow = Diffeology::generated(
      1, {curve_plot(1, [](double t) { return Vector::Constant(1, t * t * t).eval(); },
                     Box::cube(1, -1.0, 1.0), "cubic-chart")});
  std::vector<Plot> family;
  for (double k = 1.0; k <= 5.0; k += 1.0)
    family.push_back(
        curve_plot(1, [k](double t) { return Vector::Constant(1, std::sin(k * t)).eval(); },
                   Box::cube(1, -1.0, 1.0), "sin"));
  family.push_back(curve_plot(1,
                              [](double t) { return Vector::Constant(1, std::abs(t)).eval(); },
                              Box::cube(1, -1.0, 1.0), "abs"));

  std::vector<bool> before;
  for (const Plot& p : family) before.push_back(narrow.is_plot(p).accepted);
  narrow.add_generator(identity_plot(Box::cube(1, -2.0, 2.0), "chart"));
  for (std::size_t i = 0; i < family.size(); ++i) {
    const bool after = narrow.is_plot(family[i]).accepted;
    if (before[i]) CHECK(after);
  }
}

TEST_CASE("pushforward composition law on the sampled acceptance relation") {
  const Diffeology line = Diffeology::standard(Box::cube(1, -2.0, 2.0));
  auto f = [](const Vector& x) { return Vector::Constant(1, x[0] * x[0]).eval(); };
  auto g = [](const Vector& x) { return Vector::Constant(1, x[0] + 1.0).eval(); };
  auto gf = [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] + 1.0).eval(); };

  const Diffeology two_step = line.pushforward(f, 1, "f").pushforward(g, 1, "g");
  const Diffeology one_step = line.pushforward(gf, 1, "gf");

  std::vector<Plot> family;
  family.push_back(curve_plot(1,
                              [](double t) { return Vector::Constant(1, 1.0 + t * t).eval(); },
                              Box::cube(1, -1.0, 1.0), "parabola"));
  family.push_back(
      curve_plot(1, [](double t) { return Vector::Constant(1, std::abs(t) + 1.0).eval(); },
                 Box::cube(1, -1.0, 1.0), "shifted-abs"));
  family.push_back(constant_plot(1, Vector::Constant(1, 2.0), "const2"));
  for (const Plot& p : family)
    CHECK(is_plot(p, two_step, 2).accepted == is_plot(p, one_step, 2).accepted);
}

TEST_CASE("froelicher_generate: contours, function test, F_g subset property") {
  const Box region = Box::cube(2, -2.0, 2.0);

  // coordinate functions on R^2: straight lines are contours
  std::vector<ScalarMap> coords = {[](const Vector& x) { return x[0]; },
                                   [](const Vector& x) { return x[1]; }};
  FroelicherStructure fs = froelicher_generate(coords, 2, region);
  CHECK_FALSE(fs.witness_contours.empty());
  CHECK(fs.contour_test([](double t) { return vec2(0.3 * t + 0.1, -0.7 * t); }));
  // kinked curve rejected
  CHECK_FALSE(fs.contour_test([](double t) { return vec2(std::abs(t), 0.0); }));
  // F_g subset of generated functions
  for (const ScalarMap& f : fs.generating_functions) CHECK(fs.function_test(f));

  // radius-squared structure: the circle is a contour (composite constant)
  std::vector<ScalarMap> radius = {[](const Vector& x) { return x.squaredNorm(); }};
  FroelicherStructure fr = froelicher_generate(radius, 2, region);
  CHECK(fr.contour_test([](double t) { return vec2(std::cos(t), std::sin(t)); }));
  CHECK(fr.add_witness([](double t) { return vec2(std::cos(t), std::sin(t)); }));
  for (const ScalarMap& f : fr.generating_functions) CHECK(fr.function_test(f));
  // |x_0| kinks along generic witness lines of the coordinate structure
  CHECK_FALSE(fs.function_test([](const Vector& x) { return std::abs(x[0]); }));
}

TEST_CASE("plot forms: alternation, compatibility, constructed violation") {
  const Box dom = Box::cube(2, -1.0, 1.0);
  const Plot chart = identity_plot(Box::cube(2, -3.0, 3.0), "chart");

  // pull back an ambient weighted area 2-form
  auto area = [](const Vector& x, const Matrix& w) {
    Vector v(1);
    v[0] = (1.0 + x[0] * x[0]) * (w(0, 0) * w(1, 1) - w(1, 0) * w(0, 1));
    return v;
  };
  PlotForm form = ambient_pullback_form(2, 1, area);

  Plot p;
  p.domain = dom;
  p.target_dim = 2;
  p.eval = [](const Vector& u) { return vec2(u[0] + 0.2 * u[1] * u[1], u[1] - 0.1 * u[0]); };
  p.label = "curvilinear";

  CHECK(alternation_residual(form, p, 50) < 1e-10);

  // p = chart o g with g = p (chart is the identity): tautological compatibility
  std::vector<Vector> samples;
  for (double a : {-0.5, 0.0, 0.4})
    for (double b : {-0.3, 0.2}) samples.push_back(vec2(a, b));
  auto g = p.eval;
  const double residual = form_compatibility_residual(form, p, chart, g, samples);
  CHECK(residual < 1e-8);

  // degree-0 forms are compatible under any reparametrization
  PlotForm f0 = function_form([](const Vector& x) { return std::sin(x[0]) + x[1]; });
  CHECK(form_compatibility_residual(f0, p, chart, g, samples) < 1e-12);

  // deliberately inconsistent per-plot assignment: evaluates tangents in the
  // plot domain without pushing them forward
  PlotForm broken;
  broken.degree = 2;
  broken.value_dim = 1;
  broken.eval = [](const Plot&, const Vector&, const Matrix& w) {
    Vector v(1);
    v[0] = w(0, 0) * w(1, 1) - w(1, 0) * w(0, 1);
    return v;
  };
  CHECK(form_compatibility_residual(broken, p, chart, g, samples) > 0.01);

  // composition mismatch violates the precondition
  auto wrong_g = [](const Vector& u) { return (u * 1.5).eval(); };
  CHECK_THROWS_AS(form_compatibility_residual(form, p, chart, wrong_g, samples),
                  PreconditionError);
}

TEST_CASE("diffeology JSON registry") {
  const std::string text = R"({
    "space_dim": 2,
    "generators": [
      {"label": "chart", "domain": [[-2, 2], [-2, 2]], "builtin": "identity"},
      {"label": "circle", "domain": [[-1.5, 1.5]], "builtin": "circle"},
      {"label": "parabola", "domain": [[-1, 1]], "components": ["t", "t^2"]}
    ]
  })";
  const Diffeology d = diffeology_from_json_text(text);
  CHECK(d.space_dim() == 2);
  CHECK(d.generators().size() == 3);
  auto diag = curve_plot(2, [](double t) { return vec2(t, t); }, Box::cube(1, -1.0, 1.0), "diag");
  CHECK(is_plot(diag, d, 2).accepted);

  CHECK_THROWS_AS(diffeology_from_json_text("{\"space_dim\": 2}"), ValidationError);
  CHECK_THROWS_AS(diffeology_from_json_text(R"({"space_dim": 2, "generators":
    [{"domain": [[-1, 1]], "builtin": "nope"}]})"),
                  ValidationError);
  try {
    diffeology_from_json_text(R"({"space_dim": 1, "generators":
      [{"domain": [[-1, 1]], "components": ["sin(("]}]})");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(e.path.find("components[0]") != std::string::npos);
  }
}
