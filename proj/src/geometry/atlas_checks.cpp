#include "msde/geometry/atlas_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msde/geometry/tensors.hpp"

namespace msde::geometry {

VerificationReport verify_uniform_atlas(const ManifoldModel& model, int n_samples, uint64_t seed) {
  VerificationReport report;
  report.meta["model"] = model.describe();
  report.meta["check"] = "uniform_atlas";
  SplitMix rng(seed);
  const int d = model.dim();
  const double K = model.metric_equivalence();

  int uncovered = 0;
  int max_mult = 0;
  double worst_eig_violation = 0.0;
  double sup_jac = 0.0;
  double worst_roundtrip = 0.0;

  MetricEval me;
  for (int s = 0; s < n_samples; ++s) {
    const Vec w = model.sample_world(rng);
    if (!model.first_chart_containing_shrunk(w)) {
      ++uncovered;
      continue;
    }
    const auto containing = model.charts_containing(w, false);
    max_mult = std::max(max_mult, static_cast<int>(containing.size()));

    // metric eigenvalue bounds, checked in the first containing chart
    const ChartId c0 = containing.front();
    const Vec x0 = *model.chart_coords(c0, w);
    model.metric(c0, x0, me);
    const Vec eig = symmetric_eigenvalues(me.g);
    worst_eig_violation = std::max({worst_eig_violation, eig.back() - K, 1.0 / K - eig.front()});

    // transition norms + round trips on the first overlapping pair
    if (containing.size() >= 2) {
      const ChartId c1 = containing[1];
      Vec xbar, back;
      Mat jac, jac_back;
      model.transition(c0, c1, x0, xbar, jac);
      model.transition(c1, c0, xbar, back, jac_back);
      sup_jac = std::max(sup_jac, norm_inf(jac));
      Vec diff(d);
      for (int i = 0; i < d; ++i) diff[i] = back[i] - x0[i];
      worst_roundtrip = std::max(worst_roundtrip, norm_inf(diff));
    }
  }

  report.add(ReportEntry::deterministic(
      "cover.fraction", 1.0 - static_cast<double>(uncovered) / n_samples, 1.0, 0.0,
      "every sampled point lies in some r-shrunk chart"));
  {
    ReportEntry e;
    e.name = "multiplicity.max_observed";
    e.value = max_mult;
    e.target = model.declared_multiplicity();
    e.pass = max_mult <= model.declared_multiplicity();
    e.note = "observed overlap count <= declared bound";
    report.add(e);
  }
  report.add(ReportEntry::deterministic("metric.K_equivalence_violation", worst_eig_violation,
                                        0.0, 1e-9,
                                        "max of (lambda_max - K, 1/K - lambda_min) over samples"));
  {
    ReportEntry e;
    e.name = "transition.sup_jacobian";
    e.value = sup_jac;
    e.target = 0.0;
    e.pass = std::isfinite(sup_jac);
    e.note = "sampled sup |J|_inf on overlaps; finiteness only (c(1) is not pinned)";
    report.add(e);
  }
  report.add(ReportEntry::deterministic("transition.roundtrip_residual", worst_roundtrip, 0.0,
                                        1e-10, "phi_a(psi_b(phi_b(psi_a(x)))) = x on overlaps"));
  return report;
}

VerificationReport bounded_geometry_report(const ManifoldModel& model, int n_samples,
                                           uint64_t seed, int k_max) {
  VerificationReport report;
  report.meta["model"] = model.describe();
  report.meta["check"] = "bounded_geometry";
  SplitMix rng(seed);

  double sup_r = 0.0, inf_r = std::numeric_limits<double>::infinity();
  double sup_nr = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Vec w = model.sample_world(rng);
    const auto c = model.first_chart_containing_shrunk(w);
    if (!c) continue;
    const ChartPoint p{*c, *model.chart_coords(*c, w)};
    const double rn = riemann_norm(model, p);
    sup_r = std::max(sup_r, rn);
    inf_r = std::min(inf_r, rn);
    if (k_max >= 1) sup_nr = std::max(sup_nr, nabla_riemann_norm(model, p));
  }

  {
    ReportEntry e;
    e.name = "curvature.sup_riemann_norm";
    e.value = sup_r;
    e.pass = std::isfinite(sup_r);
    e.note = "sampled sup |R|_g";
    report.add(e);
  }
  report.add(ReportEntry::deterministic("curvature.riemann_norm_variation", sup_r - inf_r, 0.0,
                                        1e-6,
                                        "gallery models are homogeneous: |R|_g constant"));
  if (k_max >= 1) {
    ReportEntry e;
    e.name = "curvature.sup_nabla_riemann_norm";
    e.value = sup_nr;
    e.pass = std::isfinite(sup_nr);
    e.note = "sampled sup |nabla R|_g (FD in d_n R)";
    report.add(e);
  }
  {
    ReportEntry e;
    e.name = "injectivity_radius";
    e.value = model.injectivity_radius();
    e.pass = model.injectivity_radius() > 0.0;
    e.note = "closed form per model";
    report.add(e);
  }
  return report;
}

}  // namespace msde::geometry
