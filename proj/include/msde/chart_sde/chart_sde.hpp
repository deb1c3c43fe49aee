#pragma once

#include "msde/fields/fields.hpp"
#include "msde/geometry/model.hpp"
#include "msde/geometry/tensors.hpp"

// The localized frame-bundle SDE in a chart. State is (xi, zeta): base
// coordinates xi in R^d and the frame matrix zeta whose column m holds the
// coordinates of the m-th frame vector. The Stratonovich system is
//   d xi^i    = (lam a^i_l zeta^l_m) o dW^m + lam b^i dt
//   d zeta^k_m= (-lam Gamma^k_ij zeta^i_m a^j_l zeta^l_n) o dW^n
//               + (-lam Gamma^k_ij b^i zeta^j_m) dt
// with lam a C^2 bump equal to 1 inside radius (1+2r)/3 and 0 outside
// (2+r)/3, so the coefficients extend smoothly by zero beyond the shell.

namespace msde::chart_sde {

using fields::TensorField11;
using fields::VectorField;
using geometry::ChartId;
using geometry::ChartPoint;
using geometry::ManifoldModel;
using geometry::MetricEval;

struct FrameState {
  ChartId chart;
  Vec xi;
  Mat zeta;  // zeta(i, m) = i-th coordinate of frame vector m
};

struct BumpParams {
  double r = 0.9;
  double inner = 0.0;  // (1+2r)/3
  double outer = 0.0;  // (2+r)/3

  static BumpParams from_r(double r) {
    BumpParams p;
    p.r = r;
    p.inner = (1.0 + 2.0 * r) / 3.0;
    p.outer = (2.0 + r) / 3.0;
    return p;
  }
};

// Quintic cutoff: 1 inside, -6 s^5 + 15 s^4 - 10 s^3 + 1 on the shell with
// s = (3||x|| - 2r - 1)/(1 - r), 0 outside. C^2 across both junctions.
double bump(const Vec& x, const BumpParams& params);
void bump_grad(const Vec& x, const BumpParams& params, Vec& grad);

// Horizontal lift of a tangent vector b at a frame zeta:
// xi-block b^i, zeta-block -Gamma^k_ij b^i zeta^j_m, packed as (d + d^2).
void horizontal_lift_vector(const Vec& b, const Ten3& gamma, const Mat& zeta, Vec& out);

// Coefficients of the localized system at one (t, state).
//   xi_diff(i, m)       : dW^m coefficient on xi^i
//   zeta_diff(k, m, n)  : dW^n coefficient on zeta^k_m
//   xi_drift, zeta_drift: Stratonovich drift
//   xi_drift_ito, zeta_drift_ito: drift plus the explicit Ito correction
//     (filled only by ito_coefficients)
struct ChartSdeCoeffs {
  Mat xi_diff;
  Ten3 zeta_diff;
  Vec xi_drift;
  Mat zeta_drift;
  Vec xi_drift_ito;
  Mat zeta_drift_ito;
};

// Scratch space reused across steps; all buffers are sized on first use.
struct CoeffWorkspace {
  MetricEval me;
  Ten3 gamma;
  Ten4 dgamma;
  Mat a;
  Ten3 da;
  Vec b;
  Mat atil;   // lam * a
  Mat h;      // atil * zeta
  Mat z2;     // zeta zeta^T
  Vec lgrad;  // d lam
};

void strat_coefficients(const TensorField11& A, const VectorField& B, const ManifoldModel& model,
                        double t, const FrameState& state, const BumpParams& params,
                        ChartSdeCoeffs& out, CoeffWorkspace& ws);

// Stratonovich coefficients plus the Ito-corrected drift (xi correction and
// the four-term zeta correction, with the product rule applied to lam * a).
void ito_coefficients(const TensorField11& A, const VectorField& B, const ManifoldModel& model,
                      double t, const FrameState& state, const BumpParams& params,
                      ChartSdeCoeffs& out, CoeffWorkspace& ws);

// zeta^T g(xi) zeta; identity for a g-orthonormal frame.
void frame_gram(const FrameState& state, const ManifoldModel& model, Mat& gram);
Mat frame_gram(const FrameState& state, const ManifoldModel& model);

// Gram-Schmidt of the coordinate basis under g(xi).
FrameState orthonormal_frame_at(const ManifoldModel& model, const ChartPoint& p);

}  // namespace msde::chart_sde
