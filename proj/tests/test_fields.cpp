#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msde/fields/fields.hpp"
#include "oracles.hpp"

using namespace msde;
using namespace msde::geometry;
using namespace msde::fields;

namespace {

ModelPtr make(ModelKind kind, int d) {
  ModelSpec spec;
  spec.kind = kind;
  spec.dim = d;
  return make_model(spec);
}

ChartPoint sample_point(const ManifoldModel& m, SplitMix& rng, double max_norm = 1.0) {
  for (;;) {
    const Vec w = m.sample_world(rng);
    const auto c = m.first_chart_containing_shrunk(w);
    if (!c) continue;
    const Vec x = *m.chart_coords(*c, w);
    if (norm2(x) < max_norm) return {*c, x};
  }
}

}  // namespace

TEST_CASE("covariant derivative of the identity tensor vanishes identically") {
  SplitMix rng(3);
  for (auto kind : {ModelKind::Sphere, ModelKind::Hyperbolic, ModelKind::FlatTorus}) {
    auto m = make(kind, 2);
    auto id = identity_tensor(2);
    Ten3 na;
    for (int t = 0; t < 10; ++t) {
      const ChartPoint p = sample_point(*m, rng);
      covariant_derivative_11(*id, *m, 0.0, p, na);
      for (double v : na.a) CHECK(std::fabs(v) < 1e-14);
    }
  }
}

TEST_CASE("covariant derivative: flat constant coefficients give zero") {
  auto m = make(ModelKind::Euclidean, 2);
  Mat c(2, 2);
  c(0, 0) = 1.5;
  c(0, 1) = -0.5;
  c(1, 0) = 2.0;
  c(1, 1) = 0.25;
  auto field = constant_tensor(c);
  Ten3 na;
  covariant_derivative_11(*field, *m, 0.0, {ChartId{0}, {0.2, 0.1}}, na);
  for (double v : na.a) CHECK(v == 0.0);
}

TEST_CASE("covariant derivative of a scaled identity matches the product rule") {
  // nabla(f Id) = df tensor Id since nabla Id = 0
  auto m = make(ModelKind::Sphere, 2);
  Vec coeffs = {0.3, -0.2, 0.5};
  auto field = scaled_identity_tensor(m, 1.0, coeffs);
  SplitMix rng(5);
  for (int t = 0; t < 10; ++t) {
    const ChartPoint p = sample_point(*m, rng);
    Ten3 na;
    covariant_derivative_11(*field, *m, 0.0, p, na);
    Ten3 da;
    field->d1(0.0, p.chart, p.x, da);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
          CHECK(na(i, k, j) == doctest::Approx(da(j, i, k)).epsilon(1e-10));
  }
}

TEST_CASE("tensoriality of built-in fields across chart overlaps") {
  SplitMix rng(9);
  for (auto kind : {ModelKind::Sphere, ModelKind::Hyperbolic}) {
    auto m = make(kind, 2);
    auto scaled = scaled_identity_tensor(m, 1.0, Vec(m->world_dim(), 0.3));
    auto rot = rotation_field(m, 0.7);
    int done = 0;
    for (int tries = 0; tries < 500 && done < 8; ++tries) {
      const Vec w = m->sample_world(rng);
      const auto charts = m->charts_containing(w, false);
      if (charts.size() < 2) continue;
      const auto xa = m->chart_coords(charts[0], w);
      const auto xb = m->chart_coords(charts[1], w);
      if (!xa || !xb || norm2(*xa) > 0.8) continue;
      // tensor: J a J^-1 equals the native evaluation in the target chart
      Mat abar;
      transform_field(*scaled, *m, charts[0], charts[1], 0.0, *xa, abar);
      Mat native;
      scaled->value(0.0, charts[1], *xb, native);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::fabs(abar(i, j) - native(i, j)) < 1e-8);
      // vector: J b
      Vec bbar;
      transform_field(*rot, *m, charts[0], charts[1], 0.0, *xa, bbar);
      Vec bn;
      rot->value(0.0, charts[1], *xb, bn);
      for (int i = 0; i < 2; ++i) CHECK(std::fabs(bbar[i] - bn[i]) < 1e-8);
      ++done;
    }
    CHECK(done > 0);
  }
}

TEST_CASE("transform_field: identity invariance and inverse round trip") {
  auto m = make(ModelKind::Sphere, 2);
  auto id = identity_tensor(2);
  const Vec x = {0.5, 0.3};
  Mat abar;
  transform_field(*id, *m, ChartId{0}, ChartId{1}, 0.0, x, abar);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(abar(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));

  auto rot = rotation_field(m, 1.0);
  Vec xb;
  Mat jac;
  m->transition(ChartId{0}, ChartId{1}, x, xb, jac);
  Vec once, back;
  transform_field(*rot, *m, ChartId{0}, ChartId{1}, 0.0, x, once);
  const Mat jinv = inverse(jac);
  matvec(jinv, once, back);
  Vec native;
  rot->value(0.0, ChartId{0}, x, native);
  for (int i = 0; i < 2; ++i) CHECK(back[i] == doctest::Approx(native[i]).epsilon(1e-10));
}

TEST_CASE("transform_field rejects points outside the overlap") {
  auto m = make(ModelKind::Sphere, 2);
  auto id = identity_tensor(2);
  Mat abar;
  CHECK_THROWS_AS(transform_field(*id, *m, ChartId{0}, ChartId{1}, 0.0, Vec{0.0, 0.0}, abar),
                  NotInOverlap);
}

TEST_CASE("tensor sup norms") {
  SUBCASE("identity on euclidean: |I|_g = sqrt(d)") {
    for (int d : {2, 3}) {
      auto m = make(ModelKind::Euclidean, d);
      auto id = identity_tensor(d);
      CHECK(tensor_sup_norm(*id, *m, 0, 200, 1) == doctest::Approx(std::sqrt(d)).epsilon(1e-10));
      CHECK(tensor_sup_norm(*id, *m, 2, 50, 1) == doctest::Approx(std::sqrt(d)).epsilon(1e-9));
    }
  }
  SUBCASE("identity norm is sqrt(d) on curved models too (g-invariance)") {
    auto m = make(ModelKind::Sphere, 2);
    auto id = identity_tensor(2);
    CHECK(tensor_sup_norm(*id, *m, 0, 200, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  }
  SUBCASE("zero field") {
    auto m = make(ModelKind::Sphere, 2);
    auto z = zero_tensor(2);
    CHECK(tensor_sup_norm(*z, *m, 2, 50, 1) == 0.0);
  }
  SUBCASE("constant vector on the torus has g-norm rho |v|") {
    auto m = make(ModelKind::FlatTorus, 2);
    const double rho = 0.484375;
    auto b = constant_vector({3.0 / rho, 4.0 / rho});
    CHECK(tensor_sup_norm(*b, *m, 0, 100, 1) == doctest::Approx(5.0).epsilon(1e-10));
  }
  SUBCASE("sup norm is chart-independent within sampling error") {
    auto m = make(ModelKind::Sphere, 2);
    auto scaled = scaled_identity_tensor(m, 1.0, Vec{0.0, 0.0, 0.5});
    const double n1 = tensor_sup_norm(*scaled, *m, 0, 400, 7);
    const double n2 = tensor_sup_norm(*scaled, *m, 0, 400, 8);
    CHECK(std::fabs(n1 - n2) / n1 < 0.01);
  }
}

TEST_CASE("generator data") {
  SUBCASE("flat identity: sigma = I, correction = 0") {
    auto m = make(ModelKind::Euclidean, 2);
    auto a = identity_tensor(2);
    auto b = zero_vector(2);
    GeneratorData gd;
    generator_data(*a, *b, *m, 0.0, {ChartId{0}, {0.1, 0.2}}, gd);
    for (int i = 0; i < 2; ++i) {
      CHECK(gd.correction[i] == 0.0);
      CHECK(gd.full_drift[i] == 0.0);
      for (int j = 0; j < 2; ++j)
        CHECK(gd.sigma(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
    }
  }
  SUBCASE("scaling: A = 2 Id gives sigma = 4 I") {
    auto m = make(ModelKind::Euclidean, 2);
    Mat two = Mat::identity(2);
    two(0, 0) = two(1, 1) = 2.0;
    auto a = constant_tensor(two);
    auto b = zero_vector(2);
    GeneratorData gd;
    generator_data(*a, *b, *m, 0.0, {ChartId{0}, {0.0, 0.0}}, gd);
    CHECK(gd.sigma(0, 0) == doctest::Approx(4.0));
    CHECK(gd.sigma(1, 1) == doctest::Approx(4.0));
  }
  SUBCASE("sphere identity-A generator is the Laplace-Beltrami operator") {
    auto m = make(ModelKind::Sphere, 2);
    auto a = identity_tensor(2);
    auto b = zero_vector(2);
    SplitMix rng(21);
    for (int t = 0; t < 10; ++t) {
      const ChartPoint p = sample_point(*m, rng);
      GeneratorData gd;
      generator_data(*a, *b, *m, 0.0, p, gd);
      MetricEval me;
      m->metric(p.chart, p.x, me);
      Ten3 gamma;
      geometry::christoffel_from_metric(me, gamma);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j)
          CHECK(gd.sigma(i, j) == doctest::Approx(me.g_inv(i, j)).epsilon(1e-12));
        double lb_drift = 0.0;  // -1/2 g^{kj} Gamma^i_{kj}
        for (int k = 0; k < 2; ++k)
          for (int j = 0; j < 2; ++j) lb_drift -= 0.5 * me.g_inv(k, j) * gamma(i, k, j);
        CHECK(gd.correction[i] == doctest::Approx(lb_drift).epsilon(1e-10));
      }
    }
  }
  SUBCASE("sigma is symmetric positive semidefinite for generic fields") {
    auto m = make(ModelKind::Hyperbolic, 2);
    auto a = scaled_identity_tensor(m, 1.0, Vec{0.4, -0.3});
    auto b = zero_vector(2);
    SplitMix rng(23);
    for (int t = 0; t < 20; ++t) {
      const ChartPoint p = sample_point(*m, rng);
      GeneratorData gd;
      generator_data(*a, *b, *m, 0.0, p, gd);
      CHECK(std::fabs(gd.sigma(0, 1) - gd.sigma(1, 0)) < 1e-12);
      const Vec ev = symmetric_eigenvalues(gd.sigma);
      CHECK(ev.front() >= -1e-10);
    }
  }
}

TEST_CASE("rotation field is rejected where undefined") {
  auto t = make(ModelKind::FlatTorus, 2);
  CHECK_THROWS_AS(rotation_field(t, 1.0), std::invalid_argument);
  auto s3 = make(ModelKind::Sphere, 3);
  CHECK_THROWS_AS(rotation_field(s3, 1.0), std::invalid_argument);
}

TEST_CASE("scaled identity field derivatives match FD oracles") {
  auto m = make(ModelKind::Sphere, 2);
  auto field = scaled_identity_tensor(m, 1.0, Vec{0.2, -0.1, 0.4});
  SplitMix rng(31);
  for (int t = 0; t < 8; ++t) {
    const ChartPoint p = sample_point(*m, rng, 0.8);
    Ten3 da;
    field->d1(0.0, p.chart, p.x, da);
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k) {
      Vec xp = p.x, xm = p.x;
      xp[k] += h;
      xm[k] -= h;
      Mat ap, am;
      field->value(0.0, p.chart, xp, ap);
      field->value(0.0, p.chart, xm, am);
      for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l)
          CHECK(std::fabs(da(k, i, l) - (ap(i, l) - am(i, l)) / (2 * h)) < 1e-7);
    }
  }
}
