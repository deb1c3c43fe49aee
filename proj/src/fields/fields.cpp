#include "msde/fields/fields.hpp"

#include <cmath>

namespace msde::fields {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

void TensorField11::d2(double t, ChartId c, const Vec& x, Ten4& dda) const {
  const int d = static_cast<int>(x.size());
  const double h = 1e-5;
  dda.resize(d, d, d, d);
  Ten3 dp, dm;
  Vec xp = x, xm = x;
  for (int n = 0; n < d; ++n) {
    xp[n] = x[n] + h;
    xm[n] = x[n] - h;
    d1(t, c, xp, dp);
    d1(t, c, xm, dm);
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int l = 0; l < d; ++l) dda(n, k, i, l) = (dp(k, i, l) - dm(k, i, l)) / (2.0 * h);
    xp[n] = x[n];
    xm[n] = x[n];
  }
}

void VectorField::d1(double t, ChartId c, const Vec& x, Mat& db) const {
  const int d = static_cast<int>(x.size());
  const double h = 1e-6;
  db.resize(d, d);
  Vec bp, bm, xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    value(t, c, xp, bp);
    value(t, c, xm, bm);
    for (int i = 0; i < d; ++i) db(j, i) = (bp[i] - bm[i]) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
}

void ScalarField::hess(double t, ChartId c, const Vec& x, Mat& h) const {
  const int d = static_cast<int>(x.size());
  const double step = 1e-5;
  h.resize(d, d);
  Vec gp, gm, xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    grad(t, c, xp, gp);
    grad(t, c, xm, gm);
    for (int i = 0; i < d; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  // symmetrize FD noise
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double m = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = m;
      h(j, i) = m;
    }
}

namespace {

class IdentityTensor final : public TensorField11 {
 public:
  explicit IdentityTensor(int dim) : dim_(dim) {}
  void value(double, ChartId, const Vec&, Mat& a) const override {
    a.resize(dim_, dim_);
    for (int i = 0; i < dim_; ++i) a(i, i) = 1.0;
  }
  void d1(double, ChartId, const Vec&, Ten3& da) const override { da.resize(dim_, dim_, dim_); }
  void d2(double, ChartId, const Vec&, Ten4& dda) const override {
    dda.resize(dim_, dim_, dim_, dim_);
  }
  std::string name() const override { return "identity"; }

 private:
  int dim_;
};

class ZeroTensor final : public TensorField11 {
 public:
  explicit ZeroTensor(int dim) : dim_(dim) {}
  void value(double, ChartId, const Vec&, Mat& a) const override { a.resize(dim_, dim_); }
  void d1(double, ChartId, const Vec&, Ten3& da) const override { da.resize(dim_, dim_, dim_); }
  void d2(double, ChartId, const Vec&, Ten4& dda) const override {
    dda.resize(dim_, dim_, dim_, dim_);
  }
  std::string name() const override { return "zero"; }

 private:
  int dim_;
};

class ConstantTensor final : public TensorField11 {
 public:
  explicit ConstantTensor(Mat a) : a_(std::move(a)) {}
  void value(double, ChartId, const Vec&, Mat& a) const override { a = a_; }
  void d1(double, ChartId, const Vec&, Ten3& da) const override {
    da.resize(a_.rows, a_.rows, a_.rows);
  }
  void d2(double, ChartId, const Vec&, Ten4& dda) const override {
    dda.resize(a_.rows, a_.rows, a_.rows, a_.rows);
  }
  bool tensorial() const override { return false; }
  std::string name() const override { return "constant"; }

 private:
  Mat a_;
};

// f = c0 + <coeffs, w(x)> on the affine-world models; on the torus the same
// coefficients weight sin(2 pi w_i) so that f stays smooth across the wrap.
class WorldScalar final : public ScalarField {
 public:
  WorldScalar(ModelPtr model, double c0, Vec coeffs)
      : model_(std::move(model)), c0_(c0), coeffs_(std::move(coeffs)) {
    if (static_cast<int>(coeffs_.size()) != model_->world_dim())
      throw std::invalid_argument("scalar field: coefficient length must match world dimension");
    torus_ = model_->kind() == geometry::ModelKind::FlatTorus;
  }

  double value(double, ChartId c, const Vec& x) const override {
    const auto w = model_->world_of_extended(c, x);
    if (!w) throw PointOutsideChart("scalar field: point outside chart-map domain");
    double f = c0_;
    for (size_t i = 0; i < coeffs_.size(); ++i)
      f += coeffs_[i] * (torus_ ? std::sin(kTwoPi * (*w)[i]) : (*w)[i]);
    return f;
  }

  void grad(double, ChartId c, const Vec& x, Vec& g) const override {
    const auto w = model_->world_of_extended(c, x);
    if (!w) throw PointOutsideChart("scalar field: point outside chart-map domain");
    Mat jw;
    model_->world_jacobian(c, x, jw);
    const int wd = model_->world_dim();
    const int d = model_->dim();
    g.assign(d, 0.0);
    for (int i = 0; i < wd; ++i) {
      const double dfdw = coeffs_[i] * (torus_ ? kTwoPi * std::cos(kTwoPi * (*w)[i]) : 1.0);
      for (int j = 0; j < d; ++j) g[j] += dfdw * jw(i, j);
    }
  }

  std::string name() const override { return torus_ ? "world_sin" : "world_affine"; }

 private:
  ModelPtr model_;
  double c0_;
  Vec coeffs_;
  bool torus_ = false;
};

class ScaledIdentityTensor final : public TensorField11 {
 public:
  ScaledIdentityTensor(ModelPtr model, double c0, Vec coeffs)
      : dim_(model->dim()), scalar_(std::move(model), c0, std::move(coeffs)) {}

  void value(double t, ChartId c, const Vec& x, Mat& a) const override {
    const double f = scalar_.value(t, c, x);
    a.resize(dim_, dim_);
    for (int i = 0; i < dim_; ++i) a(i, i) = f;
  }
  void d1(double t, ChartId c, const Vec& x, Ten3& da) const override {
    Vec g;
    scalar_.grad(t, c, x, g);
    da.resize(dim_, dim_, dim_);
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i) da(k, i, i) = g[k];
  }
  void d2(double t, ChartId c, const Vec& x, Ten4& dda) const override {
    Mat h;
    scalar_.hess(t, c, x, h);
    dda.resize(dim_, dim_, dim_, dim_);
    for (int n = 0; n < dim_; ++n)
      for (int k = 0; k < dim_; ++k)
        for (int i = 0; i < dim_; ++i) dda(n, k, i, i) = h(n, k);
  }
  std::string name() const override { return "scaled_identity(" + scalar_.name() + ")"; }

 private:
  int dim_;
  WorldScalar scalar_;
};

class ZeroVector final : public VectorField {
 public:
  explicit ZeroVector(int dim) : dim_(dim) {}
  void value(double, ChartId, const Vec&, Vec& b) const override { b.assign(dim_, 0.0); }
  void d1(double, ChartId, const Vec&, Mat& db) const override { db.resize(dim_, dim_); }
  std::string name() const override { return "zero"; }

 private:
  int dim_;
};

class ConstantVector final : public VectorField {
 public:
  explicit ConstantVector(Vec v) : v_(std::move(v)) {}
  void value(double, ChartId, const Vec&, Vec& b) const override { b = v_; }
  void d1(double, ChartId, const Vec&, Mat& db) const override {
    const int d = static_cast<int>(v_.size());
    db.resize(d, d);
  }
  bool tensorial() const override { return false; }
  std::string name() const override { return "constant"; }

 private:
  Vec v_;
};

class RotationField final : public VectorField {
 public:
  RotationField(ModelPtr model, double omega) : model_(std::move(model)), omega_(omega) {
    if (model_->dim() != 2)
      throw std::invalid_argument("rotation field: only d = 2 models");
    if (model_->kind() == geometry::ModelKind::FlatTorus)
      throw std::invalid_argument("rotation field: not defined on the torus");
  }

  void value(double, ChartId c, const Vec& x, Vec& b) const override {
    switch (model_->kind()) {
      case geometry::ModelKind::Sphere:
        // rotation about the polar axis acts as a plane rotation in both
        // stereographic charts
        b = {-omega_ * x[1], omega_ * x[0]};
        return;
      case geometry::ModelKind::Euclidean: {
        const auto w = model_->world_of_extended(c, x);
        b = {-omega_ * (*w)[1], omega_ * (*w)[0]};
        return;
      }
      default: {  // hyperbolic: pull the ball rotation back through the chart
        const auto w = model_->world_of_extended(c, x);
        if (!w) throw PointOutsideChart("rotation field: point outside chart-map domain");
        Mat jw;
        model_->world_jacobian(c, x, jw);
        const Vec bw = {-omega_ * (*w)[1], omega_ * (*w)[0]};
        const Mat ji = inverse(jw);
        matvec(ji, bw, b);
        return;
      }
    }
  }

  void d1(double t, ChartId c, const Vec& x, Mat& db) const override {
    if (model_->kind() == geometry::ModelKind::Sphere ||
        model_->kind() == geometry::ModelKind::Euclidean) {
      db.resize(2, 2);
      db(1, 0) = -omega_;  // d_1 b^0
      db(0, 1) = omega_;   // d_0 b^1
      return;
    }
    VectorField::d1(t, c, x, db);
  }

  std::string name() const override { return "rotation"; }

 private:
  ModelPtr model_;
  double omega_;
};

}  // namespace

TensorFieldPtr identity_tensor(int dim) { return std::make_shared<IdentityTensor>(dim); }
TensorFieldPtr zero_tensor(int dim) { return std::make_shared<ZeroTensor>(dim); }
TensorFieldPtr scaled_identity_tensor(ModelPtr model, double c0, Vec coeffs) {
  return std::make_shared<ScaledIdentityTensor>(std::move(model), c0, std::move(coeffs));
}
TensorFieldPtr constant_tensor(Mat a) { return std::make_shared<ConstantTensor>(std::move(a)); }
VectorFieldPtr zero_vector(int dim) { return std::make_shared<ZeroVector>(dim); }
VectorFieldPtr constant_vector(Vec v) { return std::make_shared<ConstantVector>(std::move(v)); }
VectorFieldPtr rotation_field(ModelPtr model, double omega) {
  return std::make_shared<RotationField>(std::move(model), omega);
}

void covariant_derivative_11(const TensorField11& A, const ManifoldModel& model, double t,
                             const ChartPoint& p, Ten3& nabla_a) {
  const int d = model.dim();
  Mat a;
  Ten3 da, gamma;
  A.value(t, p.chart, p.x, a);
  A.d1(t, p.chart, p.x, da);
  geometry::christoffel(model, p, gamma);
  nabla_a.resize(d, d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) {
        double s = da(j, i, k);
        for (int l = 0; l < d; ++l) s += gamma(i, j, l) * a(l, k) - gamma(l, j, k) * a(i, l);
        nabla_a(i, k, j) = s;
      }
}

namespace {

double norm_order0_tensor(const Mat& a, const MetricEval& me) {
  const int d = a.rows;
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s += a(i, k) * a(j, l) * me.g(i, j) * me.g_inv(k, l);
  return std::sqrt(std::max(0.0, s));
}

double norm_order1_tensor(const Ten3& na, const MetricEval& me) {
  const int d = na.n0;
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j)
        for (int i2 = 0; i2 < d; ++i2)
          for (int k2 = 0; k2 < d; ++k2)
            for (int j2 = 0; j2 < d; ++j2)
              s += na(i, k, j) * na(i2, k2, j2) * me.g(i, i2) * me.g_inv(k, k2) * me.g_inv(j, j2);
  return std::sqrt(std::max(0.0, s));
}

// second covariant derivative of a (1,1) field, as a (1,3) array (i,k,j,n)
void second_covariant_11(const TensorField11& A, const ManifoldModel& model, double t,
                         const ChartPoint& p, Ten4& out) {
  const int d = model.dim();
  Mat a;
  Ten3 da, gamma, nabla;
  Ten4 dda, dgamma;
  A.value(t, p.chart, p.x, a);
  A.d1(t, p.chart, p.x, da);
  A.d2(t, p.chart, p.x, dda);
  geometry::christoffel(model, p, gamma);
  geometry::dchristoffel(model, p, dgamma);
  covariant_derivative_11(A, model, t, p, nabla);

  out.resize(d, d, d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j)
        for (int n = 0; n < d; ++n) {
          // d_n of nabla(i,k,j)
          double s = dda(n, j, i, k);
          for (int l = 0; l < d; ++l)
            s += dgamma(n, i, j, l) * a(l, k) + gamma(i, j, l) * da(n, l, k) -
                 dgamma(n, l, j, k) * a(i, l) - gamma(l, j, k) * da(n, i, l);
          // connection corrections for slots (i up; k, j down)
          for (int q = 0; q < d; ++q)
            s += gamma(i, n, q) * nabla(q, k, j) - gamma(q, n, k) * nabla(i, q, j) -
                 gamma(q, n, j) * nabla(i, k, q);
          out(i, k, j, n) = s;
        }
}

double norm_order2_tensor(const Ten4& n2, const MetricEval& me) {
  const int d = n2.n0;
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int i2 = 0; i2 < d; ++i2)
      for (int k = 0; k < d; ++k)
        for (int k2 = 0; k2 < d; ++k2)
          for (int j = 0; j < d; ++j)
            for (int j2 = 0; j2 < d; ++j2)
              for (int n = 0; n < d; ++n)
                for (int m = 0; m < d; ++m)
                  s += n2(i, k, j, n) * n2(i2, k2, j2, m) * me.g(i, i2) * me.g_inv(k, k2) *
                       me.g_inv(j, j2) * me.g_inv(n, m);
  return std::sqrt(std::max(0.0, s));
}

template <class PerPoint>
double sampled_sup(const ManifoldModel& model, int n_samples, uint64_t seed, PerPoint&& f) {
  SplitMix rng(seed);
  double sup = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Vec w = model.sample_world(rng);
    const auto c = model.first_chart_containing_shrunk(w);
    if (!c) continue;
    const ChartPoint p{*c, *model.chart_coords(*c, w)};
    sup = std::max(sup, f(p));
  }
  return sup;
}

}  // namespace

double tensor_sup_norm(const TensorField11& A, const ManifoldModel& model, int order,
                       int n_samples, uint64_t seed) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("tensor_sup_norm: order must be 0, 1 or 2");
  return sampled_sup(model, n_samples, seed, [&](const ChartPoint& p) {
    MetricEval me;
    model.metric(p.chart, p.x, me);
    Mat a;
    A.value(0.0, p.chart, p.x, a);
    double v = norm_order0_tensor(a, me);
    if (order >= 1) {
      Ten3 na;
      covariant_derivative_11(A, model, 0.0, p, na);
      v = std::max(v, norm_order1_tensor(na, me));
    }
    if (order >= 2) {
      Ten4 n2;
      second_covariant_11(A, model, 0.0, p, n2);
      v = std::max(v, norm_order2_tensor(n2, me));
    }
    return v;
  });
}

double tensor_sup_norm(const VectorField& B, const ManifoldModel& model, int order, int n_samples,
                       uint64_t seed) {
  if (order < 0 || order > 1)
    throw std::invalid_argument("tensor_sup_norm: vector fields support order 0 or 1");
  return sampled_sup(model, n_samples, seed, [&](const ChartPoint& p) {
    MetricEval me;
    model.metric(p.chart, p.x, me);
    const int d = model.dim();
    Vec b;
    B.value(0.0, p.chart, p.x, b);
    double s0 = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s0 += b[i] * b[j] * me.g(i, j);
    double v = std::sqrt(std::max(0.0, s0));
    if (order >= 1) {
      Mat db;
      Ten3 gamma;
      B.d1(0.0, p.chart, p.x, db);
      geometry::christoffel_from_metric(me, gamma);
      Mat nb(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = db(j, i);
          for (int l = 0; l < d; ++l) s += gamma(i, j, l) * b[l];
          nb(i, j) = s;
        }
      double s1 = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int i2 = 0; i2 < d; ++i2)
            for (int j2 = 0; j2 < d; ++j2)
              s1 += nb(i, j) * nb(i2, j2) * me.g(i, i2) * me.g_inv(j, j2);
      v = std::max(v, std::sqrt(std::max(0.0, s1)));
    }
    return v;
  });
}

void generator_data(const TensorField11& A, const VectorField& B, const ManifoldModel& model,
                    double t, const ChartPoint& p, GeneratorData& out) {
  const int d = model.dim();
  MetricEval me;
  model.metric(p.chart, p.x, me);
  Ten3 gamma;
  geometry::christoffel_from_metric(me, gamma);
  Mat a;
  Ten3 da;
  Vec b;
  A.value(t, p.chart, p.x, a);
  A.d1(t, p.chart, p.x, da);
  B.value(t, p.chart, p.x, b);

  out.sigma.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s += a(i, k) * me.g_inv(k, l) * a(j, l);
      out.sigma(i, j) = s;
    }

  out.correction.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    // d_j a^i_l a^j_k g^kl
    double s1 = 0.0;
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s1 += da(j, i, l) * a(j, k) * me.g_inv(k, l);
    // a^i_l g^nj a^k_n Gamma^l_kj
    double s2 = 0.0;
    for (int l = 0; l < d; ++l)
      for (int n = 0; n < d; ++n)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) s2 += a(i, l) * me.g_inv(n, j) * a(k, n) * gamma(l, k, j);
    out.correction[i] = 0.5 * (s1 - s2);
  }

  out.full_drift.resize(d);
  for (int i = 0; i < d; ++i) out.full_drift[i] = b[i] + out.correction[i];
}

void transform_field(const TensorField11& A, const ManifoldModel& model, ChartId from, ChartId to,
                     double t, const Vec& x, Mat& abar) {
  Vec xbar;
  Mat jac;
  model.transition(from, to, x, xbar, jac);
  Mat a;
  A.value(t, from, x, a);
  abar = matmul(matmul(jac, a), inverse(jac));
}

void transform_field(const VectorField& B, const ManifoldModel& model, ChartId from, ChartId to,
                     double t, const Vec& x, Vec& bbar) {
  Vec xbar;
  Mat jac;
  model.transition(from, to, x, xbar, jac);
  Vec b;
  B.value(t, from, x, b);
  matvec(jac, b, bbar);
}

}  // namespace msde::fields
