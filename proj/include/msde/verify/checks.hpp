#pragma once

#include <functional>

#include "msde/integrator/integrator.hpp"
#include "msde/report.hpp"

namespace msde::verify {

using fields::TensorField11;
using fields::VectorField;
using geometry::ChartId;
using geometry::ChartPoint;
using geometry::ManifoldModel;
using integrator::TrajectoryRecord;

// Smooth test function anchored in one chart, with value/gradient/Hessian in
// that chart's coordinates.
struct TestFunction {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<void(const Vec&, Vec&)> grad;
  std::function<void(const Vec&, Mat&)> hess;
};

TestFunction quadratic_norm(int dim);
TestFunction constant_fn(int dim, double c);
// phi = cos d(x0, .) = <P(x0), P(.)> through the sphere embedding; the first
// eigenfunction of the generator of Brownian motion on S^d.
TestFunction sphere_cos_distance(const ManifoldModel& model, const ChartPoint& x0);

// max_t ||zeta^T g zeta - (zeta^T g zeta)(0)||_inf over the saved rows.
ReportEntry check_frame_invariant(const TrajectoryRecord& rec, const ManifoldModel& model,
                                  double tol);
// Linear-in-h acceptance tolerance calibrated on the refinement study.
inline double frame_invariant_tolerance(double h) { return std::max(50.0 * h, 1e-12); }

struct GeneratorResidualParams {
  double T = 0.01;
  double h = 1e-4;
  int n_paths = 20000;
  uint64_t seed = 1;
  int threads = 0;
  double bias_slack_per_t = 1.0;  // O(t) weak-expansion slack coefficient
};
// Compares (E[phi(X_T)] - phi(x0))/T to the generator
// (B + 1/2 nabla A . A) . grad phi + 1/2 Sigma . hess phi at (0, x0).
ReportEntry generator_residual(const ManifoldModel& model, const TensorField11& A,
                               const VectorField& B, const ChartPoint& x0,
                               const TestFunction& phi, const GeneratorResidualParams& params);

struct MomentStudy {
  Vec dt_grid;   // realized lags (integer multiples of h)
  Vec p_grid;
  Mat estimates;  // row = p index, col = lag index
  Mat stderrs;
  Vec slopes;     // fitted log-log slope per p
  std::vector<std::vector<char>> used;
};

struct FlowStudyParams {
  Vec p_grid = {1.0, 2.0};
  double dt_min = 1e-3;
  double dt_max = 1e-1;
  int n_dt = 7;
  double h = 1e-3;
  int n_paths = 10000;
  uint64_t seed = 2;
  int threads = 0;
};
// E[d^p(X_0, X_dt)] over the lag grid, with log-log slope fits restricted to
// lags whose relative standard error is below 20%.
MomentStudy flow_moment_study(const ManifoldModel& model, const TensorField11& A,
                              const VectorField& B, const ChartPoint& x0,
                              const FlowStudyParams& params);
ReportEntry flow_slope_entry(const MomentStudy& study, double p, double lo, double hi);

struct ExitStudyParams {
  double rho = 0.0;  // 0 = 1.5 * sqrt(tr g_inv(x0) * dt_max)
  double dt_max = 0.05;
  int n_dt = 6;
  double h = 1e-3;
  int n_paths = 10000;
  uint64_t seed = 3;
  int threads = 0;
  double slope_min = 1.6;
};
struct ExitStudy {
  Vec dt_grid;
  Vec prob;
  Vec se;
  double rho = 0.0;
  double slope = 0.0;
  double fitted_c = 0.0;
  int points_used = 0;
};
// P( sup_{[0,dt]} ||xi_u - xi_0|| > rho ) in a fixed chart (no switching),
// with the log-log decay slope of the measurable grid points.
ExitStudy exit_probability_study(const ManifoldModel& model, const TensorField11& A,
                                 const VectorField& B, const ChartPoint& x0,
                                 const ExitStudyParams& params);
ReportEntry exit_slope_entry(const ExitStudy& study, double slope_min);

struct LaplacianStudy {
  Vec r_grid;
  Vec laplacian;    // Delta_g r at distance r
  Vec lower_bound;  // (n-1) K1 cot(K1 r)   (1/r limit for K1 = 0)
  Vec upper_bound;  // (n-1) K2 coth(K2 r)  (1/r limit for K2 = 0)
  std::vector<ReportEntry> entries;
};
// Delta_g of the exact distance from x0, by high-order finite differences of
// the distance function in chart coordinates (step 1e-4), checked against the
// curvature comparison bounds with slack 1e-3 + FD budget.
LaplacianStudy laplacian_comparison_check(const ManifoldModel& model, const ChartPoint& x0,
                                          const Vec& r_grid);

struct TransitionStudyParams {
  double T = 0.02;
  double h = 5e-4;
  int n_seeds = 20;
  uint64_t seed = 4;
  int threads = 0;
};
// Integrates identical noise natively in two overlapping charts and measures
// the world-distance endpoint gap at h and h/2; the per-seed ratio should
// concentrate around 2 for a first-order-coherent scheme.
std::vector<ReportEntry> transition_consistency_check(const ManifoldModel& model,
                                                      const TensorField11& A,
                                                      const VectorField& B, ChartId from,
                                                      ChartId to, const Vec& x0,
                                                      const TransitionStudyParams& params);

// max-abs residual of the Christoffel coordinate-change identity at x (chart
// `from`), with the second derivative of the inverse transition taken by FD.
double christoffel_transform_residual(const ManifoldModel& model, ChartId from, ChartId to,
                                      const Vec& x);

// Least-squares slope of log y against log x.
double loglog_slope(const Vec& x, const Vec& y, const std::vector<char>& use);

}  // namespace msde::verify
