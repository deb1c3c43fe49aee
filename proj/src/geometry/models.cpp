#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "msde/geometry/model.hpp"

namespace msde::geometry {
namespace {

constexpr double kPi = 3.14159265358979323846;

// All gallery charts carry a conformal pullback metric
//   g_ij(x) = mu(x) delta_ij,  mu(x) = A / (1 + B |x|^2)^2,
// with per-model constants A > 0 and B (B > 0 sphere, B < 0 hyperbolic,
// B = 0 flat). Metric derivatives are closed-form.
class ConformalChartModel : public ManifoldModel {
 protected:
  ConformalChartModel(int dim, ModelKind kind, double shrink_r, double metric_K, double conf_a,
                      double conf_b)
      : ManifoldModel(dim, kind, shrink_r, metric_K), conf_a_(conf_a), conf_b_(conf_b) {}

  double conf_mu(const Vec& x) const {
    const double den = 1.0 + conf_b_ * dot(x, x);
    return conf_a_ / (den * den);
  }

  void eval_g(ChartId, const Vec& x, Mat& g) const override {
    const double mu = conf_mu(x);
    g.resize(dim_, dim_);
    for (int i = 0; i < dim_; ++i) g(i, i) = mu;
  }

  void eval_dg(ChartId, const Vec& x, Ten3& dg) const override {
    const double den = 1.0 + conf_b_ * dot(x, x);
    const double f = -4.0 * conf_a_ * conf_b_ / (den * den * den);
    dg.resize(dim_, dim_, dim_);
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i) dg(k, i, i) = f * x[k];
  }

  void eval_d2g(ChartId, const Vec& x, Ten4& d2g) const override {
    const double den = 1.0 + conf_b_ * dot(x, x);
    const double den3 = den * den * den;
    const double c1 = -4.0 * conf_a_ * conf_b_ / den3;
    const double c2 = 24.0 * conf_a_ * conf_b_ * conf_b_ / (den3 * den);
    d2g.resize(dim_, dim_, dim_, dim_);
    for (int l = 0; l < dim_; ++l)
      for (int k = 0; k < dim_; ++k) {
        const double v = (l == k ? c1 : 0.0) + c2 * x[k] * x[l];
        for (int i = 0; i < dim_; ++i) d2g(l, k, i, i) = v;
      }
  }

  void do_metric(ChartId, const Vec& x, MetricEval& out) const override {
    const double t = dot(x, x);
    const double den = 1.0 + conf_b_ * t;
    const double mu = conf_a_ / (den * den);
    const double f = -4.0 * conf_a_ * conf_b_ / (den * den * den);
    out.g.resize(dim_, dim_);
    out.g_inv.resize(dim_, dim_);
    out.dg.resize(dim_, dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      out.g(i, i) = mu;
      out.g_inv(i, i) = 1.0 / mu;
    }
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i) out.dg(k, i, i) = f * x[k];
  }

  double conf_a_;
  double conf_b_;
};

// ---------------------------------------------------------------------------
// Euclidean space covered by unit-ball charts centered on a cubic lattice.
// Chart maps are pure translations, so the pullback metric is the identity
// and the flat case degenerates exactly.
// ---------------------------------------------------------------------------
class EuclideanModel final : public ConformalChartModel {
 public:
  EuclideanModel(int d, double r, double k_override, double extent)
      : ConformalChartModel(d, ModelKind::Euclidean, r, k_override > 0 ? k_override : 1.0, 1.0,
                            0.0),
        extent_(extent) {
    // Dyadic lattice spacing keeps chart translations exact in binary
    // floating point. Coverage margin: spacing*sqrt(d)/2 <= 0.8*r.
    spacing_ = std::floor(1.6 * r / std::sqrt(static_cast<double>(d)) * 8.0) / 8.0;
    if (spacing_ <= 0.0)
      throw std::invalid_argument("euclidean: shrink radius too small for dimension");
    half_span_ = static_cast<int>(std::ceil(extent_ / spacing_));
    per_axis_ = 2 * half_span_ + 1;
    double count = 1.0;
    for (int i = 0; i < d; ++i) count *= per_axis_;
    if (count > 2.0e9)
      throw std::invalid_argument("euclidean: atlas too large; reduce extent or dimension");
    charts_ = static_cast<int>(count);
    sample_extent_ = std::max(0.5, half_span_ * spacing_ - 1.0);
    injectivity_radius_ = std::numeric_limits<double>::infinity();
    curvature_ = CurvatureConstants{0.0, 0.0};
    multiplicity_ = probe_multiplicity();
  }

  int num_charts() const override { return charts_; }

  std::string describe() const override {
    std::ostringstream os;
    os << "euclidean d=" << dim_ << " r=" << shrink_r_ << " spacing=" << spacing_
       << " charts=" << charts_;
    return os.str();
  }

  std::optional<Vec> world_of_extended(ChartId c, const Vec& x) const override {
    Vec w = center_of(c.index);
    for (int i = 0; i < dim_; ++i) w[i] += x[i];
    return w;
  }

  std::optional<Vec> chart_coords(ChartId c, const Vec& w) const override {
    Vec x = center_of(c.index);
    for (int i = 0; i < dim_; ++i) x[i] = w[i] - x[i];
    if (norm2(x) < 1.0) return x;
    return std::nullopt;
  }

  std::optional<ChartId> first_chart_containing_shrunk(const Vec& w) const override {
    std::optional<ChartId> found;
    scan_candidates(w, shrink_r_, [&](int id, const Vec&) {
      found = ChartId{id};
      return false;  // stop at the first (lowest-index) hit
    });
    return found;
  }

  std::optional<ChartId> deepest_chart_containing_shrunk(const Vec& w) const override {
    // nearest lattice center, directly by rounding
    int id = 0;
    double d2 = 0.0;
    for (int i = 0; i < dim_; ++i) {
      int n = static_cast<int>(std::llround(w[i] / spacing_));
      n = std::clamp(n, -half_span_, half_span_);
      const double dx = w[i] - spacing_ * n;
      d2 += dx * dx;
      id = id * per_axis_ + (n + half_span_);
    }
    if (d2 >= shrink_r_ * shrink_r_) return ManifoldModel::deepest_chart_containing_shrunk(w);
    return ChartId{id};
  }

  std::vector<ChartId> charts_containing(const Vec& w, bool shrunk) const override {
    std::vector<ChartId> out;
    scan_candidates(w, shrunk ? shrink_r_ : 1.0, [&](int id, const Vec&) {
      out.push_back(ChartId{id});
      return true;
    });
    return out;
  }

  double distance_world(const Vec& a, const Vec& b) const override {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }

  Vec sample_world(SplitMix& rng) const override {
    Vec w(dim_);
    for (int i = 0; i < dim_; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * sample_extent_;
    return w;
  }

  void world_jacobian(ChartId, const Vec&, Mat& jac) const override {
    jac = Mat::identity(dim_);
  }

 protected:
  void eval_transition(ChartId from, ChartId to, const Vec& x, Vec& xbar,
                       Mat& jac) const override {
    const Vec cf = center_of(from.index);
    const Vec ct = center_of(to.index);
    xbar.resize(dim_);
    for (int i = 0; i < dim_; ++i) xbar[i] = x[i] + (cf[i] - ct[i]);
    jac = Mat::identity(dim_);
  }

 private:
  Vec center_of(int id) const {
    Vec c(dim_);
    for (int i = dim_ - 1; i >= 0; --i) {
      c[i] = spacing_ * (id % per_axis_ - half_span_);
      id /= per_axis_;
    }
    return c;
  }

  // Visit lattice charts near w in ascending index order; callback returns
  // false to stop.
  template <class F>
  void scan_candidates(const Vec& w, double radius, F&& f) const {
    const int range = static_cast<int>(std::ceil(radius / spacing_));
    std::vector<int> lo(dim_), hi(dim_), cur(dim_);
    for (int i = 0; i < dim_; ++i) {
      const int base = static_cast<int>(std::llround(w[i] / spacing_));
      lo[i] = std::max(-half_span_, base - range);
      hi[i] = std::min(half_span_, base + range);
      if (lo[i] > hi[i]) return;
      cur[i] = lo[i];
    }
    for (;;) {
      double d2 = 0.0;
      for (int i = 0; i < dim_; ++i) {
        const double dx = w[i] - spacing_ * cur[i];
        d2 += dx * dx;
      }
      if (d2 < radius * radius) {
        int id = 0;
        for (int i = 0; i < dim_; ++i) id = id * per_axis_ + (cur[i] + half_span_);
        if (!f(id, w)) return;
      }
      int axis = dim_ - 1;
      while (axis >= 0) {
        if (++cur[axis] <= hi[axis]) break;
        cur[axis] = lo[axis];
        --axis;
      }
      if (axis < 0) return;
    }
  }

  int probe_multiplicity() const {
    // Overlap pattern is lattice-periodic: probing one cell suffices.
    const int grid = dim_ <= 3 ? 17 : 5;
    std::vector<int> cur(dim_, 0);
    int worst = 1;
    for (;;) {
      Vec p(dim_);
      for (int i = 0; i < dim_; ++i) p[i] = spacing_ * cur[i] / (grid - 1);
      worst = std::max(worst, static_cast<int>(charts_containing(p, false).size()));
      int axis = dim_ - 1;
      while (axis >= 0) {
        if (++cur[axis] < grid) break;
        cur[axis] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
    return worst;
  }

  double extent_;
  double spacing_;
  int half_span_ = 0;
  int per_axis_ = 0;
  int charts_ = 0;
  double sample_extent_ = 0.0;
};

// ---------------------------------------------------------------------------
// Unit round sphere S^d with two stereographic charts (from the north and
// south poles). Chart coordinates are the raw stereographic coordinates
// divided by sqrt(3), so each chart domain is the unit ball and the r-shrunk
// charts cover past the equator whenever r > 1/sqrt(3).
// Pullback metric: g = 12/(1 + 3|u|^2)^2 I.
// ---------------------------------------------------------------------------
class SphereModel final : public ConformalChartModel {
 public:
  static constexpr double kScale2 = kSphereChartScale2;

  SphereModel(int d, double r, double k_override)
      : ConformalChartModel(d, ModelKind::Sphere, r, k_override > 0 ? k_override : 12.0,
                            4.0 * kScale2, kScale2) {
    injectivity_radius_ = kPi;
    curvature_ = CurvatureConstants{1.0, 1.0};
    multiplicity_ = 2;
  }

  int num_charts() const override { return 2; }
  int world_dim() const override { return dim_ + 1; }

  std::string describe() const override {
    std::ostringstream os;
    os << "sphere d=" << dim_ << " r=" << shrink_r_ << " charts=2";
    return os.str();
  }

  std::optional<Vec> world_of_extended(ChartId c, const Vec& u) const override {
    const double t = kScale2 * dot(u, u);
    Vec w(dim_ + 1);
    const double f = 2.0 * std::sqrt(kScale2) / (1.0 + t);
    for (int i = 0; i < dim_; ++i) w[i] = f * u[i];
    const double z = (t - 1.0) / (t + 1.0);
    w[dim_] = c.index == 0 ? z : -z;
    return w;
  }

  std::optional<Vec> chart_coords(ChartId c, const Vec& w) const override {
    const double z = c.index == 0 ? w[dim_] : -w[dim_];
    const double denom = (1.0 - z) * std::sqrt(kScale2);
    if (denom < 1e-14) return std::nullopt;
    Vec u(dim_);
    for (int i = 0; i < dim_; ++i) u[i] = w[i] / denom;
    if (norm2(u) < 1.0) return u;
    return std::nullopt;
  }

  std::optional<ChartId> first_chart_containing_shrunk(const Vec& w) const override {
    for (int c = 0; c < 2; ++c) {
      auto u = chart_coords(ChartId{c}, w);
      if (u && norm2(*u) < shrink_r_) return ChartId{c};
    }
    return std::nullopt;
  }

  std::vector<ChartId> charts_containing(const Vec& w, bool shrunk) const override {
    std::vector<ChartId> out;
    for (int c = 0; c < 2; ++c) {
      auto u = chart_coords(ChartId{c}, w);
      if (u && norm2(*u) < (shrunk ? shrink_r_ : 1.0)) out.push_back(ChartId{c});
    }
    return out;
  }

  double distance_world(const Vec& a, const Vec& b) const override {
    double s = 0.0;
    for (int i = 0; i <= dim_; ++i) s += a[i] * b[i];
    return std::acos(std::clamp(s, -1.0, 1.0));
  }

  Vec sample_world(SplitMix& rng) const override {
    Vec w(dim_ + 1);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (int i = 0; i <= dim_; ++i) {
        w[i] = rng.gaussian();
        n2 += w[i] * w[i];
      }
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    for (int i = 0; i <= dim_; ++i) w[i] *= inv;
    return w;
  }

  void world_jacobian(ChartId c, const Vec& u, Mat& jac) const override {
    const double s = std::sqrt(kScale2);
    const double den = 1.0 + kScale2 * dot(u, u);
    jac.resize(dim_ + 1, dim_);
    for (int a = 0; a < dim_; ++a)
      for (int j = 0; j < dim_; ++j)
        jac(a, j) = 2.0 * s * ((a == j ? 1.0 : 0.0) / den - 2.0 * kScale2 * u[a] * u[j] / (den * den));
    const double zsign = c.index == 0 ? 1.0 : -1.0;
    for (int j = 0; j < dim_; ++j)
      jac(dim_, j) = zsign * 4.0 * kScale2 * u[j] / (den * den);
  }

 protected:
  void eval_transition(ChartId, ChartId, const Vec& x, Vec& xbar, Mat& jac) const override {
    // Antipodal stereographic overlap map: u -> u / (3 |u|^2).
    const double t = dot(x, x);
    if (t < 1e-30) throw NotInOverlap("pole is not in the overlap");
    xbar.resize(dim_);
    const double f = 1.0 / (kScale2 * t);
    for (int i = 0; i < dim_; ++i) xbar[i] = f * x[i];
    jac.resize(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) jac(i, j) = f * ((i == j ? 1.0 : 0.0) - 2.0 * x[i] * x[j] / t);
  }
};

// ---------------------------------------------------------------------------
// Hyperbolic space H^d (curvature -1), d in {2,3}. Charts are hyperbolic
// balls of radius 2 artanh(rho) around net centers, mapped onto the unit
// ball by a Mobius translation followed by a 1/rho rescale; every chart sees
// the same conformal metric g = 4 rho^2 / (1 - rho^2 |u|^2)^2 I.
// Centers form a greedy net in a hyperbolic ball of radius `extent`.
// ---------------------------------------------------------------------------
class HyperbolicModel final : public ConformalChartModel {
 public:
  static constexpr double kRho = 0.6;

  HyperbolicModel(int d, double r, double k_override, double extent)
      : ConformalChartModel(d, ModelKind::Hyperbolic, r,
                            k_override > 0 ? k_override
                                           : 4.0 * kRho * kRho / ((1.0 - kRho * kRho) * (1.0 - kRho * kRho)),
                            4.0 * kRho * kRho, -kRho * kRho),
        extent_(extent) {
    if (d != 2 && d != 3)
      throw std::invalid_argument("hyperbolic: only d = 2 and d = 3 are supported");
    injectivity_radius_ = std::numeric_limits<double>::infinity();
    curvature_ = CurvatureConstants{0.0, 1.0};
    chart_radius_ = 2.0 * std::atanh(kRho);
    shrunk_radius_ = 2.0 * std::atanh(kRho * r);
    build_net();
  }

  int num_charts() const override { return static_cast<int>(centers_.size()); }

  std::string describe() const override {
    std::ostringstream os;
    os << "hyperbolic d=" << dim_ << " r=" << shrink_r_ << " extent=" << extent_
       << " charts=" << centers_.size();
    return os.str();
  }

  std::optional<Vec> world_of_extended(ChartId c, const Vec& x) const override {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = kRho * x[i];
    if (norm2(v) >= 0.999) return std::nullopt;
    return mobius_add(centers_[c.index], v);
  }

  std::optional<Vec> chart_coords(ChartId c, const Vec& w) const override {
    Vec neg = centers_[c.index];
    for (double& q : neg) q = -q;
    Vec u = mobius_add(neg, w);
    for (double& q : u) q /= kRho;
    if (norm2(u) < 1.0) return u;
    return std::nullopt;
  }

  std::optional<ChartId> first_chart_containing_shrunk(const Vec& w) const override {
    const double bound = std::cosh(shrunk_radius_) - 1.0;
    for (size_t k = 0; k < centers_.size(); ++k)
      if (cosh_dist_m1(centers_[k], w) < bound) return ChartId{static_cast<int>(k)};
    return std::nullopt;
  }

  std::vector<ChartId> charts_containing(const Vec& w, bool shrunk) const override {
    const double bound = std::cosh(shrunk ? shrunk_radius_ : chart_radius_) - 1.0;
    std::vector<ChartId> out;
    for (size_t k = 0; k < centers_.size(); ++k)
      if (cosh_dist_m1(centers_[k], w) < bound) out.push_back(ChartId{static_cast<int>(k)});
    return out;
  }

  double distance_world(const Vec& a, const Vec& b) const override {
    return std::acosh(1.0 + cosh_dist_m1(a, b));
  }

  Vec sample_world(SplitMix& rng) const override {
    // Hyperbolic-uniform in the well-covered interior ball.
    const double S = std::max(0.5, extent_ - chart_radius_);
    const double u = rng.uniform();
    double s;
    if (dim_ == 2) {
      s = std::acosh(1.0 + u * (std::cosh(S) - 1.0));
    } else {
      // invert V(s) ~ sinh(2s)/2 - s by bisection
      const auto vol = [](double t) { return 0.5 * std::sinh(2.0 * t) - t; };
      const double target = u * vol(S);
      double lo = 0.0, hi = S;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (vol(mid) < target ? lo : hi) = mid;
      }
      s = 0.5 * (lo + hi);
    }
    Vec dir(dim_);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (int i = 0; i < dim_; ++i) {
        dir[i] = rng.gaussian();
        n2 += dir[i] * dir[i];
      }
    } while (n2 < 1e-12);
    const double e = std::tanh(0.5 * s) / std::sqrt(n2);
    for (int i = 0; i < dim_; ++i) dir[i] *= e;
    return dir;
  }

  void world_jacobian(ChartId c, const Vec& x, Mat& jac) const override {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = kRho * x[i];
    jac = mobius_jacobian(centers_[c.index], v);
    for (double& e : jac.a) e *= kRho;
  }

  static Vec mobius_add(const Vec& a, const Vec& v) {
    const double av = dot(a, v), aa = dot(a, a), vv = dot(v, v);
    const double alpha = 1.0 + 2.0 * av + vv;
    const double beta = 1.0 - aa;
    const double den = 1.0 + 2.0 * av + aa * vv;
    Vec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = (alpha * a[i] + beta * v[i]) / den;
    return out;
  }

  // Jacobian of v -> mobius_add(a, v).
  static Mat mobius_jacobian(const Vec& a, const Vec& v) {
    const int d = static_cast<int>(a.size());
    const double av = dot(a, v), aa = dot(a, a), vv = dot(v, v);
    const double alpha = 1.0 + 2.0 * av + vv;
    const double beta = 1.0 - aa;
    const double den = 1.0 + 2.0 * av + aa * vv;
    Vec m(d);
    for (int i = 0; i < d; ++i) m[i] = (alpha * a[i] + beta * v[i]) / den;
    Mat jac(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double dalpha = 2.0 * a[j] + 2.0 * v[j];
        const double dden = 2.0 * a[j] + 2.0 * aa * v[j];
        jac(i, j) = (dalpha * a[i] + beta * (i == j ? 1.0 : 0.0)) / den - m[i] * dden / den;
      }
    return jac;
  }

 protected:
  void eval_transition(ChartId from, ChartId to, const Vec& x, Vec& xbar,
                       Mat& jac) const override {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = kRho * x[i];
    const Vec& qf = centers_[from.index];
    Vec p = mobius_add(qf, v);
    Vec neg = centers_[to.index];
    for (double& q : neg) q = -q;
    xbar = mobius_add(neg, p);
    for (double& q : xbar) q /= kRho;
    // chart scale factors rho and 1/rho cancel in the chain rule
    jac = matmul(mobius_jacobian(neg, p), mobius_jacobian(qf, v));
  }

 private:
  static double cosh_dist_m1(const Vec& a, const Vec& b) {
    double d2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return 2.0 * d2 / ((1.0 - dot(a, a)) * (1.0 - dot(b, b)));
  }

  void build_net() {
    const double delta = 0.75 * shrunk_radius_;
    const double cand_sp = 0.15 * shrunk_radius_;
    const double keep_bound = std::cosh(delta) - 1.0;
    std::vector<Vec> candidates;
    candidates.push_back(Vec(dim_, 0.0));
    for (int j = 1; j * cand_sp <= extent_; ++j) {
      const double s = j * cand_sp;
      const double e = std::tanh(0.5 * s);
      if (dim_ == 2) {
        const int m = std::max(6, static_cast<int>(std::ceil(2.0 * kPi * std::sinh(s) / cand_sp)));
        for (int k = 0; k < m; ++k) {
          const double th = 2.0 * kPi * k / m;
          candidates.push_back({e * std::cos(th), e * std::sin(th)});
        }
      } else {
        const double area = 4.0 * kPi * std::sinh(s) * std::sinh(s);
        const int m = std::max(24, static_cast<int>(std::ceil(area / (cand_sp * cand_sp))));
        const double ga = kPi * (3.0 - std::sqrt(5.0));  // golden angle
        for (int k = 0; k < m; ++k) {
          const double z = 1.0 - 2.0 * (k + 0.5) / m;
          const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
          const double th = ga * k;
          candidates.push_back({e * rr * std::cos(th), e * rr * std::sin(th), e * z});
        }
      }
    }
    for (const Vec& c : candidates) {
      bool keep = true;
      for (const Vec& q : centers_) {
        if (cosh_dist_m1(q, c) < keep_bound) {
          keep = false;
          break;
        }
      }
      if (keep) centers_.push_back(c);
    }
    if (centers_.size() > 100000) throw std::invalid_argument("hyperbolic: atlas too large");
    // Probe multiplicity on a candidate subset (candidates are dense in the region).
    const double full_bound = std::cosh(chart_radius_) - 1.0;
    int worst = 1;
    for (size_t i = 0; i < candidates.size(); i += 7) {
      int cnt = 0;
      for (const Vec& q : centers_)
        if (cosh_dist_m1(q, candidates[i]) < full_bound) ++cnt;
      worst = std::max(worst, cnt);
    }
    multiplicity_ = worst + 1;
  }

  double extent_;
  double chart_radius_ = 0.0;
  double shrunk_radius_ = 0.0;
  std::vector<Vec> centers_;
};

// ---------------------------------------------------------------------------
// Flat torus R^d / Z^d (unit periods), d <= 3, covered by 2^d charts centered
// at the half-integer offsets. rho is dyadic so wrap arithmetic stays exact.
// ---------------------------------------------------------------------------
class TorusModel final : public ConformalChartModel {
 public:
  static constexpr double kRho = 0.484375;  // 31/64

  TorusModel(int d, double r, double k_override)
      : ConformalChartModel(d, ModelKind::FlatTorus, r,
                            k_override > 0 ? k_override : 1.0 / (kRho * kRho), kRho * kRho, 0.0) {
    if (d < 1 || d > 3) throw std::invalid_argument("torus: only 1 <= d <= 3 is supported");
    injectivity_radius_ = 0.5;
    curvature_ = CurvatureConstants{0.0, 0.0};
    charts_ = 1 << d;
    multiplicity_ = charts_;
  }

  int num_charts() const override { return charts_; }

  std::string describe() const override {
    std::ostringstream os;
    os << "torus d=" << dim_ << " r=" << shrink_r_ << " charts=" << charts_;
    return os.str();
  }

  std::optional<Vec> world_of_extended(ChartId c, const Vec& x) const override {
    Vec w = center_of(c.index);
    for (int i = 0; i < dim_; ++i) w[i] = wrap01(w[i] + kRho * x[i]);
    return w;
  }

  std::optional<Vec> chart_coords(ChartId c, const Vec& w) const override {
    const Vec ctr = center_of(c.index);
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = wrap_pm(w[i] - ctr[i]) / kRho;
    if (norm2(x) < 1.0) return x;
    return std::nullopt;
  }

  std::optional<ChartId> first_chart_containing_shrunk(const Vec& w) const override {
    for (int c = 0; c < charts_; ++c) {
      auto x = chart_coords(ChartId{c}, w);
      if (x && norm2(*x) < shrink_r_) return ChartId{c};
    }
    return std::nullopt;
  }

  std::vector<ChartId> charts_containing(const Vec& w, bool shrunk) const override {
    std::vector<ChartId> out;
    for (int c = 0; c < charts_; ++c) {
      auto x = chart_coords(ChartId{c}, w);
      if (x && norm2(*x) < (shrunk ? shrink_r_ : 1.0)) out.push_back(ChartId{c});
    }
    return out;
  }

  double distance_world(const Vec& a, const Vec& b) const override {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double d = std::fabs(wrap_pm(a[i] - b[i]));
      s += d * d;
    }
    return std::sqrt(s);
  }

  Vec sample_world(SplitMix& rng) const override {
    Vec w(dim_);
    for (int i = 0; i < dim_; ++i) w[i] = rng.uniform();
    return w;
  }

  void world_jacobian(ChartId, const Vec&, Mat& jac) const override {
    jac.resize(dim_, dim_);
    for (int i = 0; i < dim_; ++i) jac(i, i) = kRho;
  }

 protected:
  void eval_transition(ChartId from, ChartId to, const Vec& x, Vec& xbar,
                       Mat& jac) const override {
    const Vec cf = center_of(from.index);
    const Vec ct = center_of(to.index);
    xbar.resize(dim_);
    for (int i = 0; i < dim_; ++i) xbar[i] = wrap_pm(cf[i] - ct[i] + kRho * x[i]) / kRho;
    jac = Mat::identity(dim_);
  }

 private:
  static double wrap01(double v) { return v - std::floor(v); }
  static double wrap_pm(double v) { return v - std::floor(v + 0.5); }

  Vec center_of(int id) const {
    Vec c(dim_);
    for (int i = 0; i < dim_; ++i) c[i] = (id >> i) & 1 ? 0.5 : 0.0;
    return c;
  }

  int charts_ = 0;
};

}  // namespace

ModelPtr make_model(const ModelSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("model dimension must be positive");
  if (!(spec.shrink_r > 0.0 && spec.shrink_r < 1.0))
    throw std::invalid_argument("shrink radius r must lie in (0,1)");
  if (spec.metric_K != 0.0 && spec.metric_K < 1.0)
    throw std::invalid_argument("metric equivalence K must be >= 1");
  switch (spec.kind) {
    case ModelKind::Euclidean:
      return std::make_shared<EuclideanModel>(spec.dim, spec.shrink_r, spec.metric_K,
                                              spec.extent > 0 ? spec.extent : 16.0);
    case ModelKind::Sphere:
      return std::make_shared<SphereModel>(spec.dim, spec.shrink_r, spec.metric_K);
    case ModelKind::Hyperbolic:
      return std::make_shared<HyperbolicModel>(spec.dim, spec.shrink_r, spec.metric_K,
                                               spec.extent > 0 ? spec.extent
                                                               : (spec.dim == 2 ? 5.0 : 3.0));
    case ModelKind::FlatTorus:
      return std::make_shared<TorusModel>(spec.dim, spec.shrink_r, spec.metric_K);
  }
  throw std::invalid_argument("unknown model kind");
}

}  // namespace msde::geometry
