#include "msde/geometry/tensors.hpp"

#include <cmath>

namespace msde::geometry {

void christoffel_from_metric(const MetricEval& me, Ten3& gamma) {
  const int d = me.g.rows;
  gamma.resize(d, d, d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l)
          s += me.g_inv(k, l) * (me.dg(i, j, l) + me.dg(j, i, l) - me.dg(l, i, j));
        gamma(k, i, j) = 0.5 * s;
        gamma(k, j, i) = 0.5 * s;
      }
}

void christoffel(const ManifoldModel& model, const ChartPoint& p, Ten3& gamma) {
  MetricEval me;
  model.metric(p.chart, p.x, me);
  christoffel_from_metric(me, gamma);
}

void dchristoffel(const ManifoldModel& model, const ChartPoint& p, Ten4& dgamma) {
  const int d = model.dim();
  MetricEval me;
  Ten4 d2g;
  model.metric(p.chart, p.x, me);
  model.metric_d2(p.chart, p.x, d2g);

  // d_n g^kl = -g^ka (d_n g_ab) g^bl
  Ten3 dginv(d, d, d);
  for (int n = 0; n < d; ++n)
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        double s = 0.0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) s += me.g_inv(k, a) * me.dg(n, a, b) * me.g_inv(b, l);
        dginv(n, k, l) = -s;
      }

  dgamma.resize(d, d, d, d);
  for (int n = 0; n < d; ++n)
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = 0.0;
          for (int l = 0; l < d; ++l) {
            const double sym = me.dg(i, j, l) + me.dg(j, i, l) - me.dg(l, i, j);
            const double dsym = d2g(n, i, j, l) + d2g(n, j, i, l) - d2g(n, l, i, j);
            s += dginv(n, k, l) * sym + me.g_inv(k, l) * dsym;
          }
          dgamma(n, k, i, j) = 0.5 * s;
        }
}

void riemann(const ManifoldModel& model, const ChartPoint& p, Ten4& riem) {
  const int d = model.dim();
  Ten3 gamma;
  Ten4 dgamma;
  christoffel(model, p, gamma);
  dchristoffel(model, p, dgamma);
  riem.resize(d, d, d, d);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double s = dgamma(j, l, i, k) - dgamma(k, l, i, j);
          for (int m = 0; m < d; ++m)
            s += gamma(l, j, m) * gamma(m, i, k) - gamma(l, k, m) * gamma(m, i, j);
          riem(l, i, j, k) = s;
        }
}

void ricci(const ManifoldModel& model, const ChartPoint& p, Mat& ric) {
  const int d = model.dim();
  Ten4 riem;
  riemann(model, p, riem);
  ric.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += riem(k, i, k, j);
      ric(i, j) = s;
    }
}

double sectional(const ManifoldModel& model, const ChartPoint& p, const Vec& u, const Vec& v) {
  const int d = model.dim();
  MetricEval me;
  model.metric(p.chart, p.x, me);
  auto ip = [&](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += a[i] * me.g(i, j) * b[j];
    return s;
  };
  const double guu = ip(u, u), gvv = ip(v, v), guv = ip(u, v);
  const double gram = guu * gvv - guv * guv;
  if (gram < 1e-12) throw DegeneratePlane("sectional: u, v are linearly dependent");
  Ten4 riem;
  riemann(model, p, riem);
  // (R(u,v)v)^l = R^l_ijk v^i u^j v^k ; numerator = g(R(u,v)v, u)
  double num = 0.0;
  for (int l = 0; l < d; ++l) {
    double rl = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) rl += riem(l, i, j, k) * v[i] * u[j] * v[k];
    for (int m = 0; m < d; ++m) num += me.g(l, m) * rl * u[m];
  }
  return num / gram;
}

namespace {

double riemann_norm_from(const MetricEval& me, const Ten4& riem) {
  const int d = me.g.rows;
  double s = 0.0;
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l2 = 0; l2 < d; ++l2)
            for (int i2 = 0; i2 < d; ++i2)
              for (int j2 = 0; j2 < d; ++j2)
                for (int k2 = 0; k2 < d; ++k2)
                  s += riem(l, i, j, k) * riem(l2, i2, j2, k2) * me.g(l, l2) * me.g_inv(i, i2) *
                       me.g_inv(j, j2) * me.g_inv(k, k2);
  return std::sqrt(std::max(0.0, s));
}

}  // namespace

double riemann_norm(const ManifoldModel& model, const ChartPoint& p) {
  MetricEval me;
  model.metric(p.chart, p.x, me);
  Ten4 riem;
  riemann(model, p, riem);
  return riemann_norm_from(me, riem);
}

double nabla_riemann_norm(const ManifoldModel& model, const ChartPoint& p) {
  const int d = model.dim();
  MetricEval me;
  model.metric(p.chart, p.x, me);
  Ten3 gamma;
  christoffel(model, p, gamma);
  Ten4 riem;
  riemann(model, p, riem);

  const double h = 1e-5;
  std::vector<Ten4> driem(d);  // d_n R
  for (int n = 0; n < d; ++n) {
    ChartPoint pp = p, pm = p;
    pp.x[n] += h;
    pm.x[n] -= h;
    Ten4 rp, rm;
    riemann(model, pp, rp);
    riemann(model, pm, rm);
    driem[n].resize(d, d, d, d);
    for (size_t q = 0; q < rp.a.size(); ++q) driem[n].a[q] = (rp.a[q] - rm.a[q]) / (2.0 * h);
  }

  // (nabla R)^l_{ijk;n} = d_n R^l_ijk + Gamma^l_np R^p_ijk - Gamma^p_ni R^l_pjk
  //                       - Gamma^p_nj R^l_ipk - Gamma^p_nk R^l_ijp
  auto covn = [&](int n, int l, int i, int j, int k) {
    double s = driem[n](l, i, j, k);
    for (int q = 0; q < d; ++q) {
      s += gamma(l, n, q) * riem(q, i, j, k);
      s -= gamma(q, n, i) * riem(l, q, j, k);
      s -= gamma(q, n, j) * riem(l, i, q, k);
      s -= gamma(q, n, k) * riem(l, i, j, q);
    }
    return s;
  };

  double s = 0.0;
  for (int n = 0; n < d; ++n)
    for (int n2 = 0; n2 < d; ++n2)
      for (int l = 0; l < d; ++l)
        for (int l2 = 0; l2 < d; ++l2)
          for (int i = 0; i < d; ++i)
            for (int i2 = 0; i2 < d; ++i2)
              for (int j = 0; j < d; ++j)
                for (int j2 = 0; j2 < d; ++j2)
                  for (int k = 0; k < d; ++k)
                    for (int k2 = 0; k2 < d; ++k2)
                      s += covn(n, l, i, j, k) * covn(n2, l2, i2, j2, k2) * me.g_inv(n, n2) *
                           me.g(l, l2) * me.g_inv(i, i2) * me.g_inv(j, j2) * me.g_inv(k, k2);
  return std::sqrt(std::max(0.0, s));
}

double metric_compatibility_residual(const ManifoldModel& model, const ChartPoint& p) {
  const int d = model.dim();
  MetricEval me;
  model.metric(p.chart, p.x, me);
  Ten3 gamma;
  christoffel_from_metric(me, gamma);
  double worst = 0.0;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double r = me.dg(k, i, j);
        for (int l = 0; l < d; ++l) r -= me.g(i, l) * gamma(l, j, k) + me.g(l, j) * gamma(l, i, k);
        worst = std::max(worst, std::fabs(r));
      }
  return worst;
}

double bianchi_residual(const ManifoldModel& model, const ChartPoint& p) {
  const int d = model.dim();
  Ten4 riem;
  riemann(model, p, riem);
  double worst = 0.0;
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          worst = std::max(worst,
                           std::fabs(riem(l, i, j, k) + riem(l, j, k, i) + riem(l, k, i, j)));
  return worst;
}

}  // namespace msde::geometry
