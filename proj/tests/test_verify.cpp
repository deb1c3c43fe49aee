#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msde/verify/checks.hpp"
#include "oracles.hpp"

using namespace msde;
using namespace msde::geometry;
using namespace msde::verify;
using msde::integrator::NoiseSource;
using msde::integrator::SimParams;
using msde::integrator::StepScheme;
using msde::integrator::SwitchPolicy;

namespace {

ModelPtr make(ModelKind kind, int d) {
  ModelSpec spec;
  spec.kind = kind;
  spec.dim = d;
  return make_model(spec);
}

}  // namespace

TEST_CASE("frame invariant check: exactly zero on flat identity runs") {
  auto m = make(ModelKind::Euclidean, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  const auto init = chart_sde::orthonormal_frame_at(*m, canonical_origin(*m));
  SimParams sp;
  sp.T = 0.5;
  sp.h = 1e-3;
  const auto rec = integrator::simulate(*m, *a, *b, init, sp, NoiseSource(3, 0));
  const auto entry = check_frame_invariant(rec, *m, 1e-15);
  CHECK(entry.pass);
  CHECK(entry.value == 0.0);  // zeta is never touched, bitwise
}

TEST_CASE("frame invariant check: sphere drift small and within tolerance(h)") {
  auto m = make(ModelKind::Sphere, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  const auto init = chart_sde::orthonormal_frame_at(*m, canonical_origin(*m));
  SimParams sp;
  sp.T = 1.0;
  sp.h = 1e-3;
  const auto rec = integrator::simulate(*m, *a, *b, init, sp, NoiseSource(5, 0));
  const auto entry = check_frame_invariant(rec, *m, frame_invariant_tolerance(sp.h));
  CHECK(entry.pass);
  CHECK(entry.value > 0.0);
  CHECK(entry.value <= 0.05);
}

TEST_CASE("generator residual: euclidean |x|^2 has generator value d") {
  auto m = make(ModelKind::Euclidean, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  GeneratorResidualParams prm;
  prm.T = 0.01;
  prm.h = 1e-4;
  prm.n_paths = 4000;
  prm.seed = 11;
  prm.bias_slack_per_t = 0.1;  // exact moments: E|W_t|^2 = d t
  const auto entry = generator_residual(*m, *a, *b, canonical_origin(*m), quadratic_norm(2), prm);
  CHECK(entry.target == doctest::Approx(2.0));
  CHECK(entry.pass);
}

TEST_CASE("generator residual: constants are martingales") {
  auto m = make(ModelKind::Sphere, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  GeneratorResidualParams prm;
  prm.n_paths = 500;
  const auto entry = generator_residual(*m, *a, *b, canonical_origin(*m), constant_fn(2, 3.0), prm);
  CHECK(entry.value == 0.0);
  CHECK(entry.target == 0.0);
  CHECK(entry.pass);
}

TEST_CASE("generator residual: sphere cos-distance eigenfunction gives -1") {
  auto m = make(ModelKind::Sphere, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  const ChartPoint x0 = canonical_origin(*m);
  const auto phi = sphere_cos_distance(*m, x0);
  // phi(x0) = 1 and L phi(x0) = (1/2) Delta_g cos d = -cos d = -1
  CHECK(phi.value(x0.x) == doctest::Approx(1.0).epsilon(1e-12));
  GeneratorResidualParams prm;
  prm.T = 0.01;
  prm.h = 1e-4;
  prm.n_paths = 4000;
  prm.seed = 13;
  const auto entry = generator_residual(*m, *a, *b, x0, phi, prm);
  CHECK(entry.target == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(entry.pass);
}

TEST_CASE("sphere cos-distance gradient and hessian match FD") {
  auto m = make(ModelKind::Sphere, 2);
  const ChartPoint x0{ChartId{0}, {0.2, -0.1}};
  const auto phi = sphere_cos_distance(*m, x0);
  const Vec x = {0.15, 0.25};
  Vec grad;
  phi.grad(x, grad);
  Mat hess;
  phi.hess(x, hess);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    CHECK(grad[i] == doctest::Approx((phi.value(xp) - phi.value(xm)) / (2 * h)).epsilon(1e-7));
    Vec gp, gm;
    phi.grad(xp, gp);
    phi.grad(xm, gm);
    for (int j = 0; j < 2; ++j)
      CHECK(hess(j, i) == doctest::Approx((gp[j] - gm[j]) / (2 * h)).epsilon(1e-6));
  }
  // phi really is cos of the geodesic distance
  const Vec w0 = m->world_of(x0.chart, x0.x);
  const Vec w = m->world_of(ChartId{0}, x);
  CHECK(phi.value(x) == doctest::Approx(std::cos(m->distance_world(w0, w))).epsilon(1e-12));
}

TEST_CASE("flow moments: euclidean p = 2 slope within the calibration band") {
  auto m = make(ModelKind::Euclidean, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  FlowStudyParams prm;
  prm.n_paths = 10000;
  prm.seed = 17;
  const auto study = flow_moment_study(*m, *a, *b, canonical_origin(*m), prm);
  const auto e2 = flow_slope_entry(study, 2.0, 0.97, 1.03);
  CHECK(e2.pass);
  // E[d^2] = 2 dt exactly: check the level too, not just the slope
  for (size_t j = 0; j < study.dt_grid.size(); ++j) {
    const double expect = 2.0 * study.dt_grid[j];
    CHECK(std::fabs(study.estimates(1, j) - expect) <
          3.0 * study.stderrs(1, j) + 2e-3 * expect);
  }
  const auto e1 = flow_slope_entry(study, 1.0, 0.35, 0.65);
  CHECK(e1.pass);
}

TEST_CASE("flow moments: pure drift is ballistic (slope ~ p)") {
  auto m = make(ModelKind::Euclidean, 2);
  auto a = fields::zero_tensor(2);
  auto b = fields::constant_vector({2.0, 0.0});
  FlowStudyParams prm;
  prm.n_paths = 64;  // deterministic motion
  prm.seed = 19;
  const auto study = flow_moment_study(*m, *a, *b, canonical_origin(*m), prm);
  CHECK(study.slopes[1] == doctest::Approx(2.0).epsilon(1e-3));  // p = 2
  CHECK(study.slopes[0] == doctest::Approx(1.0).epsilon(1e-3));  // p = 1
}

TEST_CASE("exit probability study: slope floor on euclidean, monotone decay") {
  auto m = make(ModelKind::Euclidean, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  ExitStudyParams prm;
  prm.n_paths = 4000;
  prm.seed = 23;
  const auto study = exit_probability_study(*m, *a, *b, canonical_origin(*m), prm);
  const auto entry = exit_slope_entry(study, 1.6);
  CHECK(entry.pass);
  for (size_t j = 1; j < study.prob.size(); ++j)
    CHECK(study.prob[j] >= study.prob[j - 1] - 3.0 * (study.se[j] + study.se[j - 1]));
}

TEST_CASE("exit probability: pure drift crosses rho at dt = rho/|B|") {
  auto m = make(ModelKind::Euclidean, 2);
  auto a = fields::zero_tensor(2);
  auto b = fields::constant_vector({1.0, 0.0});
  ExitStudyParams prm;
  prm.n_paths = 16;
  prm.rho = 0.03;  // crossing at dt = 0.03 inside the grid [0.0125, 0.05]
  prm.seed = 29;
  const auto study = exit_probability_study(*m, *a, *b, canonical_origin(*m), prm);
  for (size_t j = 0; j < study.dt_grid.size(); ++j) {
    const double expect = study.dt_grid[j] > prm.rho ? 1.0 : 0.0;
    CHECK(study.prob[j] == expect);
  }
}

TEST_CASE("exit study rejects a start too close to the shell") {
  auto m = make(ModelKind::Euclidean, 2);
  auto a = fields::identity_tensor(2);
  auto b = fields::zero_vector(2);
  ExitStudyParams prm;
  prm.rho = 0.4;
  const ChartPoint near_edge{ChartId{0}, {0.8, 0.0}};
  CHECK_THROWS_AS(exit_probability_study(*m, *a, *b, near_edge, prm), std::invalid_argument);
}

TEST_CASE("laplacian comparison: equality cases on the three curved models") {
  SUBCASE("euclidean: (d-1)/r to 1e-6") {
    auto m = make(ModelKind::Euclidean, 2);
    Vec grid;
    for (int i = 0; i < 8; ++i) grid.push_back(0.1 + 1.4 * i / 7.0);
    const auto study = laplacian_comparison_check(*m, canonical_origin(*m), grid);
    for (const auto& e : study.entries) CHECK(e.pass);
    for (size_t j = 0; j < grid.size(); ++j)
      CHECK(std::fabs(study.laplacian[j] - 1.0 / grid[j]) < 1e-6);
  }
  SUBCASE("sphere: cot(r) within 1e-3") {
    auto m = make(ModelKind::Sphere, 2);
    Vec grid;
    for (int i = 0; i < 8; ++i) grid.push_back(0.1 + 1.4 * i / 7.0);
    const auto study = laplacian_comparison_check(*m, canonical_origin(*m), grid);
    for (const auto& e : study.entries) CHECK(e.pass);
    for (size_t j = 0; j < grid.size(); ++j)
      CHECK(std::fabs(study.laplacian[j] - 1.0 / std::tan(grid[j])) < 1e-3);
  }
  SUBCASE("hyperbolic: coth(r) within 1e-3") {
    auto m = make(ModelKind::Hyperbolic, 2);
    Vec grid;
    for (int i = 0; i < 8; ++i) grid.push_back(0.1 + 1.1 * i / 7.0);
    const auto study = laplacian_comparison_check(*m, canonical_origin(*m), grid);
    for (const auto& e : study.entries) CHECK(e.pass);
    for (size_t j = 0; j < grid.size(); ++j)
      CHECK(std::fabs(study.laplacian[j] - 1.0 / std::tanh(grid[j])) < 1e-3);
  }
}

TEST_CASE("transition consistency: sphere ratio band, flat torus exactness") {
  auto a2 = fields::identity_tensor(2);
  auto b2 = fields::zero_vector(2);
  SUBCASE("sphere: gap halves with h (median ratio in [1.5, 3])") {
    auto m = make(ModelKind::Sphere, 2);
    TransitionStudyParams prm;
    prm.n_seeds = 20;
    const auto entries =
        transition_consistency_check(*m, *a2, *b2, ChartId{0}, ChartId{1}, {0.55, 0.1}, prm);
    bool found = false;
    for (const auto& e : entries)
      if (e.name == "transition.gap_halving_ratio") {
        found = true;
        CHECK(e.value >= 1.5);
        CHECK(e.value <= 3.0);
        CHECK(e.pass);
      }
    CHECK(found);
  }
  SUBCASE("zero noise and zero drift: gap exactly zero") {
    auto m = make(ModelKind::Sphere, 2);
    auto a0 = fields::zero_tensor(2);
    const auto native = chart_sde::orthonormal_frame_at(*m, {ChartId{0}, {0.55, 0.1}});
    const auto switched = integrator::switch_chart(*m, native, ChartId{1});
    SimParams sp;
    sp.T = 0.02;
    sp.h = 1e-3;
    sp.policy = SwitchPolicy::none();
    const auto r1 = integrator::simulate(*m, *a0, *b2, native, sp, NoiseSource(1, 0));
    const auto r2 = integrator::simulate(*m, *a0, *b2, switched, sp, NoiseSource(1, 0));
    const auto w1 = m->world_of_extended(ChartId{r1.charts.back()}, r1.xis.back());
    const auto w2 = m->world_of_extended(ChartId{r2.charts.back()}, r2.xis.back());
    // compare embeddings directly: arccos would floor the gap at sqrt(eps)
    for (int i = 0; i < 3; ++i) CHECK(std::fabs((*w1)[i] - (*w2)[i]) < 1e-12);
  }
  SUBCASE("flat torus: affine transitions commute with the scheme to 1e-12") {
    auto m = make(ModelKind::FlatTorus, 2);
    // one explicit step with identical noise in two charts
    SplitMix rng(31);
    int done = 0;
    for (int tries = 0; tries < 1000 && done < 5; ++tries) {
      const Vec w = m->sample_world(rng);
      const auto charts = m->charts_containing(w, false);
      if (charts.size() < 2) continue;
      const auto x = m->chart_coords(charts[0], w);
      const auto xb = m->chart_coords(charts[1], w);
      // both representations must sit where the bump is 1, else the localized
      // coefficients legitimately differ between the two charts
      if (!x || !xb || norm2(*x) > 0.9 || norm2(*xb) > 0.9) continue;
      const auto native = chart_sde::orthonormal_frame_at(*m, {charts[0], *x});
      const auto switched = integrator::switch_chart(*m, native, charts[1]);
      const Vec dw = {0.01 * rng.gaussian(), 0.01 * rng.gaussian()};
      const auto s1 =
          integrator::step(StepScheme::StratHeun, *m, *a2, *b2, native, 0.0, 1e-3, dw);
      const auto s2 =
          integrator::step(StepScheme::StratHeun, *m, *a2, *b2, switched, 0.0, 1e-3, dw);
      const auto w1 = m->world_of_extended(s1.chart, s1.xi);
      const auto w2 = m->world_of_extended(s2.chart, s2.xi);
      CHECK(m->distance_world(*w1, *w2) < 1e-12);
      ++done;
    }
    CHECK(done > 0);
  }
}

TEST_CASE("christoffel coordinate-change identity to 1e-6 on sampled overlaps") {
  SplitMix rng(37);
  for (auto kind : {ModelKind::Sphere, ModelKind::Hyperbolic, ModelKind::Euclidean}) {
    auto m = make(kind, 2);
    int done = 0;
    for (int tries = 0; tries < 600 && done < 10; ++tries) {
      const Vec w = m->sample_world(rng);
      const auto charts = m->charts_containing(w, false);
      if (charts.size() < 2) continue;
      const auto x = m->chart_coords(charts[0], w);
      if (!x || norm2(*x) > 0.9) continue;
      double res;
      try {
        res = christoffel_transform_residual(*m, charts[0], charts[1], *x);
      } catch (const NotInOverlap&) {
        continue;
      }
      CHECK(res < 1e-6);
      ++done;
    }
    CHECK(done > 0);
  }
}

TEST_CASE("monte carlo report entries carry standard errors and 3-se passes") {
  ReportEntry e = ReportEntry::monte_carlo("x", 1.05, 1.0, 0.01, 0.02);
  CHECK(e.se.has_value());
  CHECK(e.pass);  // |1.05 - 1| = 0.05 <= 3*0.02 + 0.01
  ReportEntry f = ReportEntry::monte_carlo("y", 1.2, 1.0, 0.01, 0.02);
  CHECK(!f.pass);
}
