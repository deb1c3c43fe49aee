#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msde/errors.hpp"
#include "msde/linalg.hpp"
#include "msde/rng.hpp"

namespace msde::geometry {

struct ChartId {
  int index = 0;
  friend bool operator==(ChartId a, ChartId b) { return a.index == b.index; }
  friend bool operator!=(ChartId a, ChartId b) { return a.index != b.index; }
};

struct ChartPoint {
  ChartId chart;
  Vec x;  // chart coordinates, ||x|| < 1 on a normalized atlas
};

// Metric data at a chart point: g, its inverse, and first partials
// dg(k,i,j) = d_k g_ij.
struct MetricEval {
  Mat g;
  Mat g_inv;
  Ten3 dg;
};

enum class ModelKind { Euclidean, Sphere, Hyperbolic, FlatTorus };

inline const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Euclidean: return "euclidean";
    case ModelKind::Sphere: return "sphere";
    case ModelKind::Hyperbolic: return "hyperbolic";
    case ModelKind::FlatTorus: return "torus";
  }
  return "?";
}

// Sectional curvature bounded above by k1^2, Ricci bounded below by -(n-1) k2^2.
// k1 == 0 or k2 == 0 encodes the flat limit of the corresponding bound.
struct CurvatureConstants {
  double k1 = 0.0;
  double k2 = 0.0;
};

// Squared rescale of the sphere's stereographic charts: raw coordinates are
// sqrt(3) times the chart coordinates, so the unit chart ball reaches height
// z = 1/2 and the r-shrunk charts cover past the equator for r > 1/sqrt(3).
inline constexpr double kSphereChartScale2 = 3.0;

// A model manifold with a normalized atlas: every chart maps its domain onto
// the open unit ball, the shrunk balls of radius `shrink_radius` cover the
// manifold (or the configured working region for the non-compact models), and
// the pullback metrics are K-equivalent to the Euclidean metric.
//
// All gallery models supply analytic metric derivatives; the default
// implementations of eval_dg / eval_d2g fall back to central finite
// differences so that test-only models can be declared from g alone.
class ManifoldModel {
 public:
  virtual ~ManifoldModel() = default;

  int dim() const { return dim_; }
  ModelKind kind() const { return kind_; }
  double shrink_radius() const { return shrink_r_; }
  double metric_equivalence() const { return metric_K_; }
  int declared_multiplicity() const { return multiplicity_; }
  double injectivity_radius() const { return injectivity_radius_; }
  const std::optional<CurvatureConstants>& curvature_constants() const { return curvature_; }
  virtual int num_charts() const = 0;
  virtual std::string describe() const = 0;

  void check_inside(ChartId c, const Vec& x) const;

  // Pullback metric in chart coordinates. Throws PointOutsideChart.
  void metric(ChartId c, const Vec& x, MetricEval& out) const;
  // Second partials d2g(l,k,i,j) = d_l d_k g_ij, needed for dGamma.
  void metric_d2(ChartId c, const Vec& x, Ten4& out) const;

  // xbar = (phi_to . psi_from)(x) with Jacobian. Throws NotInOverlap when the
  // image leaves the target chart ball (or x is outside the source ball).
  void transition(ChartId from, ChartId to, const Vec& x, Vec& xbar, Mat& jac) const;
  // Same map without the source-ball check; lets the integrator re-anchor a
  // state whose step overshot the chart. The target check still applies.
  void transition_extended(ChartId from, ChartId to, const Vec& x, Vec& xbar, Mat& jac) const;

  // World representation: R^d for Euclidean/Hyperbolic (Poincare ball
  // coordinates)/FlatTorus ([0,1)^d), R^{d+1} embedding for Sphere.
  virtual int world_dim() const { return dim_; }
  Vec world_of(ChartId c, const Vec& x) const;
  // d(world)/d(chart coords), world_dim x dim. Default: central differences of
  // the chart inverse map; gallery models override with closed forms.
  virtual void world_jacobian(ChartId c, const Vec& x, Mat& jac) const;
  // Extension of psi beyond the unit ball, used only to recover a state whose
  // step overshot the chart; nullopt when the extension is invalid.
  virtual std::optional<Vec> world_of_extended(ChartId c, const Vec& x) const = 0;

  // phi_c(w) if w lies in chart c's domain, else nullopt.
  virtual std::optional<Vec> chart_coords(ChartId c, const Vec& w) const = 0;

  // Lowest-index chart whose *shrunk* ball contains w (the partition order of
  // the switching construction).
  virtual std::optional<ChartId> first_chart_containing_shrunk(const Vec& w) const = 0;
  // Chart whose coordinates of w have the smallest norm (ties by index); used
  // by event re-anchoring, which wants the point deep inside the new chart.
  virtual std::optional<ChartId> deepest_chart_containing_shrunk(const Vec& w) const;
  virtual std::vector<ChartId> charts_containing(const Vec& w, bool shrunk) const = 0;

  // Closed-form geodesic distance between world points.
  virtual double distance_world(const Vec& w1, const Vec& w2) const = 0;

  // Uniform-ish sample of the working region, for atlas validation reports.
  virtual Vec sample_world(SplitMix& rng) const = 0;

 protected:
  ManifoldModel(int dim, ModelKind kind, double shrink_r, double metric_K)
      : dim_(dim), kind_(kind), shrink_r_(shrink_r), metric_K_(metric_K) {}

  virtual void eval_g(ChartId c, const Vec& x, Mat& g) const = 0;
  virtual void eval_dg(ChartId c, const Vec& x, Ten3& dg) const;    // default: central FD, step 1e-6
  virtual void eval_d2g(ChartId c, const Vec& x, Ten4& d2g) const;  // default: central FD of eval_dg
  // Combined g/g_inv/dg evaluation; models with closed forms override this to
  // keep the integrator loop free of generic matrix inversion.
  virtual void do_metric(ChartId c, const Vec& x, MetricEval& out) const;
  virtual void eval_transition(ChartId from, ChartId to, const Vec& x, Vec& xbar, Mat& jac) const = 0;

  int dim_;
  ModelKind kind_;
  double shrink_r_;
  double metric_K_;
  int multiplicity_ = 1;
  double injectivity_radius_ = 0.0;
  std::optional<CurvatureConstants> curvature_;
};

using ModelPtr = std::shared_ptr<const ManifoldModel>;

double exact_distance(const ManifoldModel& model, const ChartPoint& p, const ChartPoint& q);

// A distinguished base point: the center of the first chart that contains the
// model's canonical world origin (pole for the sphere, 0 elsewhere).
ChartPoint canonical_origin(const ManifoldModel& model);

struct ModelSpec {
  ModelKind kind = ModelKind::Euclidean;
  int dim = 2;
  double shrink_r = 0.9;
  double metric_K = 0.0;  // 0 = derive from the atlas construction
  double extent = 0.0;    // working-region radius for the non-compact models; 0 = default
};

ModelPtr make_model(const ModelSpec& spec);

}  // namespace msde::geometry
