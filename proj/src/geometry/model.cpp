#include "msde/geometry/model.hpp"

#include <cmath>
#include <limits>

namespace msde::geometry {

void ManifoldModel::check_inside(ChartId c, const Vec& x) const {
  if (c.index < 0 || c.index >= num_charts())
    throw PointOutsideChart("chart index " + std::to_string(c.index) + " out of range");
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("coordinate dimension mismatch");
  if (norm2(x) >= 1.0)
    throw PointOutsideChart("point at ||x|| = " + std::to_string(norm2(x)) +
                            " outside the unit chart ball");
}

void ManifoldModel::metric(ChartId c, const Vec& x, MetricEval& out) const {
  check_inside(c, x);
  do_metric(c, x, out);
}

void ManifoldModel::do_metric(ChartId c, const Vec& x, MetricEval& out) const {
  eval_g(c, x, out.g);
  out.g_inv = inverse(out.g);
  eval_dg(c, x, out.dg);
}

void ManifoldModel::metric_d2(ChartId c, const Vec& x, Ten4& out) const {
  check_inside(c, x);
  eval_d2g(c, x, out);
}

void ManifoldModel::eval_dg(ChartId c, const Vec& x, Ten3& dg) const {
  const double h = 1e-6;
  dg.resize(dim_, dim_, dim_);
  Mat gp, gm;
  Vec xp = x, xm = x;
  for (int k = 0; k < dim_; ++k) {
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    eval_g(c, xp, gp);
    eval_g(c, xm, gm);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) dg(k, i, j) = (gp(i, j) - gm(i, j)) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
}

void ManifoldModel::eval_d2g(ChartId c, const Vec& x, Ten4& d2g) const {
  const double h = 1e-4;
  d2g.resize(dim_, dim_, dim_, dim_);
  Ten3 dp, dm;
  Vec xp = x, xm = x;
  for (int l = 0; l < dim_; ++l) {
    xp[l] = x[l] + h;
    xm[l] = x[l] - h;
    eval_dg(c, xp, dp);
    eval_dg(c, xm, dm);
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          d2g(l, k, i, j) = (dp(k, i, j) - dm(k, i, j)) / (2.0 * h);
    xp[l] = x[l];
    xm[l] = x[l];
  }
}

void ManifoldModel::transition(ChartId from, ChartId to, const Vec& x, Vec& xbar, Mat& jac) const {
  check_inside(from, x);
  if (to.index < 0 || to.index >= num_charts())
    throw NotInOverlap("target chart index out of range");
  if (from == to) {
    xbar = x;
    jac = Mat::identity(dim_);
    return;
  }
  eval_transition(from, to, x, xbar, jac);
  if (norm2(xbar) >= 1.0)
    throw NotInOverlap("transition image outside the target chart ball");
}

void ManifoldModel::transition_extended(ChartId from, ChartId to, const Vec& x, Vec& xbar,
                                        Mat& jac) const {
  if (from == to) {
    xbar = x;
    jac = Mat::identity(dim_);
    return;
  }
  eval_transition(from, to, x, xbar, jac);
  if (norm2(xbar) >= 1.0)
    throw NotInOverlap("transition image outside the target chart ball");
}

Vec ManifoldModel::world_of(ChartId c, const Vec& x) const {
  check_inside(c, x);
  auto w = world_of_extended(c, x);
  if (!w) throw PointOutsideChart("chart map undefined at point");
  return *w;
}

std::optional<ChartId> ManifoldModel::deepest_chart_containing_shrunk(const Vec& w) const {
  std::optional<ChartId> best;
  double best_norm = std::numeric_limits<double>::infinity();
  for (const ChartId c : charts_containing(w, true)) {
    const auto x = chart_coords(c, w);
    if (!x) continue;
    const double n = norm2(*x);
    if (n < best_norm) {
      best_norm = n;
      best = c;
    }
  }
  return best;
}

void ManifoldModel::world_jacobian(ChartId c, const Vec& x, Mat& jac) const {
  const double h = 1e-6;
  jac.resize(world_dim(), dim_);
  Vec xp = x, xm = x;
  for (int j = 0; j < dim_; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    auto wp = world_of_extended(c, xp);
    auto wm = world_of_extended(c, xm);
    if (!wp || !wm) throw PointOutsideChart("world_jacobian: chart map undefined near point");
    for (int i = 0; i < world_dim(); ++i) jac(i, j) = ((*wp)[i] - (*wm)[i]) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
}

double exact_distance(const ManifoldModel& model, const ChartPoint& p, const ChartPoint& q) {
  return model.distance_world(model.world_of(p.chart, p.x), model.world_of(q.chart, q.x));
}

ChartPoint canonical_origin(const ManifoldModel& model) {
  Vec w(model.world_dim(), 0.0);
  if (model.kind() == ModelKind::Sphere) w[model.dim()] = -1.0;
  const auto c = model.first_chart_containing_shrunk(w);
  if (!c) throw std::runtime_error("canonical_origin: atlas does not cover the origin");
  return ChartPoint{*c, *model.chart_coords(*c, w)};
}

}  // namespace msde::geometry
