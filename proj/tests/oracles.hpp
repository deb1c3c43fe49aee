#pragma once

// Test-only oracles: independent finite-difference and embedding-based
// computations the unit and acceptance suites check the library against.
// Nothing here is reachable from the simulation path.

#include <cmath>
#include <functional>

#include "msde/geometry/model.hpp"
#include "msde/geometry/tensors.hpp"

namespace oracles {

using msde::Mat;
using msde::Ten3;
using msde::Vec;
namespace geo = msde::geometry;

// central-difference partial of a vector-valued map
inline Vec fd_partial(const std::function<Vec(const Vec&)>& f, const Vec& x, int j,
                      double h = 1e-6) {
  Vec xp = x, xm = x;
  xp[j] += h;
  xm[j] -= h;
  const Vec fp = f(xp), fm = f(xm);
  Vec out(fp.size());
  for (size_t i = 0; i < fp.size(); ++i) out[i] = (fp[i] - fm[i]) / (2.0 * h);
  return out;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  const int d = static_cast<int>(x.size());
  const Vec f0 = f(x);
  Mat jac(static_cast<int>(f0.size()), d);
  for (int j = 0; j < d; ++j) {
    const Vec col = fd_partial(f, x, j, h);
    for (size_t i = 0; i < col.size(); ++i) jac(static_cast<int>(i), j) = col[i];
  }
  return jac;
}

// pullback metric of a chart through its world map: g_ij = <d_i psi, d_j psi>
// (valid when the world representation is an isometric embedding, i.e. the
// sphere in R^{d+1} and Euclidean space in R^d)
inline Mat embedding_metric(const geo::ManifoldModel& model, geo::ChartId c, const Vec& x,
                            double h = 1e-6) {
  auto psi = [&](const Vec& y) { return *model.world_of_extended(c, y); };
  const Mat jac = fd_jacobian(psi, x, h);
  Mat g(model.dim(), model.dim());
  for (int i = 0; i < model.dim(); ++i)
    for (int j = 0; j < model.dim(); ++j) {
      double s = 0.0;
      for (int a = 0; a < jac.rows; ++a) s += jac(a, i) * jac(a, j);
      g(i, j) = s;
    }
  return g;
}

// Christoffel symbols from finite differences of the metric alone
inline Ten3 fd_christoffel(const geo::ManifoldModel& model, geo::ChartId c, const Vec& x,
                           double h = 1e-6) {
  const int d = model.dim();
  geo::MetricEval me;
  model.metric(c, x, me);
  Ten3 dg(d, d, d);
  Mat gp, gm;
  {
    msde::geometry::MetricEval ep, em;
    Vec xp = x, xm = x;
    for (int k = 0; k < d; ++k) {
      xp[k] = x[k] + h;
      xm[k] = x[k] - h;
      model.metric(c, xp, ep);
      model.metric(c, xm, em);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dg(k, i, j) = (ep.g(i, j) - em.g(i, j)) / (2.0 * h);
      xp[k] = x[k];
      xm[k] = x[k];
    }
  }
  Ten3 gamma(d, d, d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l)
          s += me.g_inv(k, l) * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
        gamma(k, i, j) = 0.5 * s;
      }
  return gamma;
}

// 1-d test model with metric e^{2x} on a single chart (Gamma = 1 everywhere);
// exercises the generic metric -> Christoffel pipeline including FD d2g.
class Exp1DModel final : public geo::ManifoldModel {
 public:
  Exp1DModel() : ManifoldModel(1, geo::ModelKind::Euclidean, 0.9, 10.0) {
    injectivity_radius_ = std::numeric_limits<double>::infinity();
  }
  int num_charts() const override { return 1; }
  std::string describe() const override { return "exp-1d test model"; }
  std::optional<Vec> world_of_extended(geo::ChartId, const Vec& x) const override { return x; }
  std::optional<Vec> chart_coords(geo::ChartId, const Vec& w) const override {
    return msde::norm2(w) < 1.0 ? std::optional<Vec>(w) : std::nullopt;
  }
  std::optional<geo::ChartId> first_chart_containing_shrunk(const Vec& w) const override {
    return msde::norm2(w) < 0.9 ? std::optional<geo::ChartId>(geo::ChartId{0}) : std::nullopt;
  }
  std::vector<geo::ChartId> charts_containing(const Vec& w, bool shrunk) const override {
    if (msde::norm2(w) < (shrunk ? 0.9 : 1.0)) return {geo::ChartId{0}};
    return {};
  }
  double distance_world(const Vec& a, const Vec& b) const override {
    return std::fabs(std::exp(a[0]) - std::exp(b[0]));
  }
  Vec sample_world(msde::SplitMix& rng) const override {
    return {1.6 * rng.uniform() - 0.8};
  }

 protected:
  void eval_g(geo::ChartId, const Vec& x, Mat& g) const override {
    g.resize(1, 1);
    g(0, 0) = std::exp(2.0 * x[0]);
  }
  void eval_dg(geo::ChartId, const Vec& x, Ten3& dg) const override {
    dg.resize(1, 1, 1);
    dg(0, 0, 0) = 2.0 * std::exp(2.0 * x[0]);
  }
  void eval_transition(geo::ChartId, geo::ChartId, const Vec&, Vec&, Mat&) const override {
    throw msde::NotInOverlap("single chart");
  }
};

}  // namespace oracles
