#pragma once

#include "msde/geometry/model.hpp"

// Levi-Civita connection and curvature in chart coordinates.
// Index conventions:
//   gamma(k,i,j)     = Gamma^k_ij = (1/2) g^kl (d_i g_jl + d_j g_il - d_l g_ij)
//   dgamma(n,k,i,j)  = d_n Gamma^k_ij
//   riem(l,i,j,k)    = R^l_ijk = d_j Gamma^l_ik - d_k Gamma^l_ij
//                              + Gamma^l_jm Gamma^m_ik - Gamma^l_km Gamma^m_ij

namespace msde::geometry {

void christoffel_from_metric(const MetricEval& me, Ten3& gamma);

void christoffel(const ManifoldModel& model, const ChartPoint& p, Ten3& gamma);

// Closed-form first partials of Gamma, assembled from analytic dg and d2g.
void dchristoffel(const ManifoldModel& model, const ChartPoint& p, Ten4& dgamma);

void riemann(const ManifoldModel& model, const ChartPoint& p, Ten4& riem);

// Ric_ij = R^k_ikj
void ricci(const ManifoldModel& model, const ChartPoint& p, Mat& ric);

// g(R(u,v)v, u) / (g(u,u) g(v,v) - g(u,v)^2); throws DegeneratePlane when the
// Gram determinant of (u,v) falls below 1e-12.
double sectional(const ManifoldModel& model, const ChartPoint& p, const Vec& u, const Vec& v);

// Pointwise g-norms |R|_g and |nabla R|_g (the covariant derivative uses a
// central-difference d_n R, step 1e-5; these feed reports, not simulation).
double riemann_norm(const ManifoldModel& model, const ChartPoint& p);
double nabla_riemann_norm(const ManifoldModel& model, const ChartPoint& p);

// max_abs residual of d_k g_ij - g_il Gamma^l_jk - g_lj Gamma^l_ik (= nabla g).
double metric_compatibility_residual(const ManifoldModel& model, const ChartPoint& p);

// max_abs residual of the first Bianchi identity R^l_ijk + R^l_jki + R^l_kij.
double bianchi_residual(const ManifoldModel& model, const ChartPoint& p);

}  // namespace msde::geometry
