#include "msde/chart_sde/chart_sde.hpp"

#include <cmath>

namespace msde::chart_sde {

double bump(const Vec& x, const BumpParams& p) {
  const double nx = norm2(x);
  if (nx < p.inner) return 1.0;
  if (nx > p.outer) return 0.0;
  const double s = (3.0 * nx - 2.0 * p.r - 1.0) / (1.0 - p.r);
  const double s2 = s * s;
  return ((-6.0 * s + 15.0) * s - 10.0) * s * s2 + 1.0;
}

void bump_grad(const Vec& x, const BumpParams& p, Vec& grad) {
  const int d = static_cast<int>(x.size());
  grad.assign(d, 0.0);
  const double nx = norm2(x);
  if (nx <= p.inner || nx >= p.outer || nx < 1e-300) return;
  const double s = (3.0 * nx - 2.0 * p.r - 1.0) / (1.0 - p.r);
  const double dlam_ds = ((-30.0 * s + 60.0) * s - 30.0) * s * s;
  const double f = dlam_ds * 3.0 / ((1.0 - p.r) * nx);
  for (int i = 0; i < d; ++i) grad[i] = f * x[i];
}

void horizontal_lift_vector(const Vec& b, const Ten3& gamma, const Mat& zeta, Vec& out) {
  const int d = static_cast<int>(b.size());
  out.assign(d + d * d, 0.0);
  for (int i = 0; i < d; ++i) out[i] = b[i];
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) {
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += gamma(k, i, j) * b[i] * zeta(j, m);
      out[d + k * d + m] = -s;
    }
}

namespace {

// Shared assembly; fills the Stratonovich blocks and the intermediates the
// Ito correction reuses. Returns lam (0 short-circuits everything).
double assemble_strat(const TensorField11& A, const VectorField& B, const ManifoldModel& model,
                      double t, const FrameState& state, const BumpParams& params,
                      ChartSdeCoeffs& out, CoeffWorkspace& ws) {
  const int d = model.dim();
  out.xi_diff.resize(d, d);
  out.zeta_diff.resize(d, d, d);
  out.xi_drift.assign(d, 0.0);
  out.zeta_drift.resize(d, d);

  const double lam = bump(state.xi, params);
  if (lam == 0.0) return 0.0;  // coefficients vanish outside the shell

  model.metric(state.chart, state.xi, ws.me);
  geometry::christoffel_from_metric(ws.me, ws.gamma);
  A.value(t, state.chart, state.xi, ws.a);
  B.value(t, state.chart, state.xi, ws.b);

  // atil = lam * a, h = atil * zeta
  ws.atil.resize(d, d);
  ws.h.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) ws.atil(i, j) = lam * ws.a(i, j);
  for (int i = 0; i < d; ++i)
    for (int m = 0; m < d; ++m) {
      double s = 0.0;
      for (int l = 0; l < d; ++l) s += ws.atil(i, l) * state.zeta(l, m);
      ws.h(i, m) = s;
    }

  // d xi^i <- h(i,m) dW^m ; drift lam b
  out.xi_diff = ws.h;
  for (int i = 0; i < d; ++i) out.xi_drift[i] = lam * ws.b[i];

  // d zeta^k_m <- -Gamma^k_ij zeta^i_m h(j,n) dW^n ; drift -lam Gamma b zeta
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s += ws.gamma(k, i, j) * state.zeta(i, m) * ws.h(j, n);
        out.zeta_diff(k, m, n) = -s;
      }
      double sd = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) sd += ws.gamma(k, i, j) * ws.b[i] * state.zeta(j, m);
      out.zeta_drift(k, m) = -lam * sd;
    }
  return lam;
}

}  // namespace

void strat_coefficients(const TensorField11& A, const VectorField& B, const ManifoldModel& model,
                        double t, const FrameState& state, const BumpParams& params,
                        ChartSdeCoeffs& out, CoeffWorkspace& ws) {
  assemble_strat(A, B, model, t, state, params, out, ws);
}

void ito_coefficients(const TensorField11& A, const VectorField& B, const ManifoldModel& model,
                      double t, const FrameState& state, const BumpParams& params,
                      ChartSdeCoeffs& out, CoeffWorkspace& ws) {
  const int d = model.dim();
  const double lam = assemble_strat(A, B, model, t, state, params, out, ws);
  out.xi_drift_ito = out.xi_drift;
  out.zeta_drift_ito = out.zeta_drift;
  if (lam == 0.0) return;

  A.d1(t, state.chart, state.xi, ws.da);
  geometry::dchristoffel(model, ChartPoint{state.chart, state.xi}, ws.dgamma);
  bump_grad(state.xi, params, ws.lgrad);

  // datil(n,i,l) = d_n (lam a^i_l) = (d_n lam) a^i_l + lam d_n a^i_l
  // kept implicit below through lgrad and ws.da.
  const Mat& zeta = state.zeta;

  // z2 = zeta zeta^T (the proof's sum over frame columns)
  ws.z2.resize(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      double s = 0.0;
      for (int m = 0; m < d; ++m) s += zeta(k, m) * zeta(l, m);
      ws.z2(k, l) = s;
    }

  auto datil = [&](int n, int i, int l) {
    return ws.lgrad[n] * ws.a(i, l) + lam * ws.da(n, i, l);
  };

  // xi correction:
  // 1/2 ( d_j atil^i_l atil^j_k z2^kl - atil^i_l z2^nj atil^k_n Gamma^l_kj )
  for (int i = 0; i < d; ++i) {
    double s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s1 += datil(j, i, l) * ws.atil(j, k) * ws.z2(k, l);
    for (int l = 0; l < d; ++l)
      for (int n = 0; n < d; ++n)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k)
            s2 += ws.atil(i, l) * ws.z2(n, j) * ws.atil(k, n) * ws.gamma(l, k, j);
    out.xi_drift_ito[i] += 0.5 * (s1 - s2);
  }

  // zeta correction: -1/2 (T1 + T2 - T3 - T4) with
  //   T1 = Gamma^k_ij zeta^i_m d_n atil^j_l zeta^l_q atil^n_p zeta^p_q
  //   T2 = d_n Gamma^k_ij zeta^i_m atil^j_l zeta^l_q atil^n_p zeta^p_q
  //   T3 = Gamma^k_ij Gamma^i_np zeta^n_m atil^p_l' zeta^l'_q atil^j_l zeta^l_q
  //   T4 = Gamma^k_ij zeta^i_m atil^j_l Gamma^l_np zeta^n_q zeta^l'_q atil^p_l'
  // (T2's zeta^l_q as produced by the chain rule.)

  // hh(j, n) = sum_q h(j, q) h(n, q)
  Mat hh(d, d);
  for (int j = 0; j < d; ++j)
    for (int n = 0; n < d; ++n) {
      double s = 0.0;
      for (int q = 0; q < d; ++q) s += ws.h(j, q) * ws.h(n, q);
      hh(j, n) = s;
    }
  // zh(n, p) = sum_q zeta(n, q) h(p, q)
  Mat zh(d, d);
  for (int n = 0; n < d; ++n)
    for (int p = 0; p < d; ++p) {
      double s = 0.0;
      for (int q = 0; q < d; ++q) s += zeta(n, q) * ws.h(p, q);
      zh(n, p) = s;
    }
  // u(j) = sum_{n,l,q} datil(n,j,l) zeta(l,q) h(n,q)
  Vec u(d, 0.0);
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int n = 0; n < d; ++n)
      for (int l = 0; l < d; ++l)
        for (int q = 0; q < d; ++q) s += datil(n, j, l) * zeta(l, q) * ws.h(n, q);
    u[j] = s;
  }
  // w(j) = sum_l atil(j,l) sum_{n,p} Gamma(l,n,p) zh(n,p)
  Vec v(d, 0.0), w(d, 0.0);
  for (int l = 0; l < d; ++l) {
    double s = 0.0;
    for (int n = 0; n < d; ++n)
      for (int p = 0; p < d; ++p) s += ws.gamma(l, n, p) * zh(n, p);
    v[l] = s;
  }
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int l = 0; l < d; ++l) s += ws.atil(j, l) * v[l];
    w[j] = s;
  }

  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) {
      double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          t1 += ws.gamma(k, i, j) * zeta(i, m) * u[j];
          t4 += ws.gamma(k, i, j) * zeta(i, m) * w[j];
          for (int n = 0; n < d; ++n) t2 += ws.dgamma(n, k, i, j) * zeta(i, m) * hh(j, n);
          for (int n = 0; n < d; ++n)
            for (int p = 0; p < d; ++p)
              t3 += ws.gamma(k, i, j) * ws.gamma(i, n, p) * zeta(n, m) * hh(p, j);
        }
      out.zeta_drift_ito(k, m) += -0.5 * (t1 + t2 - t3 - t4);
    }
}

void frame_gram(const FrameState& state, const ManifoldModel& model, Mat& gram) {
  const int d = model.dim();
  MetricEval me;
  model.metric(state.chart, state.xi, me);
  gram.resize(d, d);
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) {
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += state.zeta(i, k) * me.g(i, j) * state.zeta(j, m);
      gram(k, m) = s;
    }
}

Mat frame_gram(const FrameState& state, const ManifoldModel& model) {
  Mat gram;
  frame_gram(state, model, gram);
  return gram;
}

FrameState orthonormal_frame_at(const ManifoldModel& model, const ChartPoint& p) {
  const int d = model.dim();
  MetricEval me;
  model.metric(p.chart, p.x, me);
  auto ip = [&](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += a[i] * me.g(i, j) * b[j];
    return s;
  };
  FrameState st;
  st.chart = p.chart;
  st.xi = p.x;
  st.zeta.resize(d, d);
  std::vector<Vec> cols(d, Vec(d, 0.0));
  for (int m = 0; m < d; ++m) {
    Vec v(d, 0.0);
    v[m] = 1.0;
    for (int q = 0; q < m; ++q) {
      const double c = ip(v, cols[q]);
      for (int i = 0; i < d; ++i) v[i] -= c * cols[q][i];
    }
    const double nrm = std::sqrt(ip(v, v));
    for (int i = 0; i < d; ++i) v[i] /= nrm;
    cols[m] = v;
    for (int i = 0; i < d; ++i) st.zeta(i, m) = v[i];
  }
  return st;
}

}  // namespace msde::chart_sde
