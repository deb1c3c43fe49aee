#pragma once

#include <memory>
#include <string>

#include "msde/geometry/model.hpp"
#include "msde/geometry/tensors.hpp"

namespace msde::fields {

using geometry::ChartId;
using geometry::ChartPoint;
using geometry::ManifoldModel;
using geometry::MetricEval;
using geometry::ModelPtr;

// Diffusion coefficient: a (1,1)-tensor field evaluated in chart coordinates.
//   value:  a(i,l)      = a^i_l(t, x)
//   d1:     da(k,i,l)   = d_k a^i_l
//   d2:     dda(n,k,i,l)= d_n d_k a^i_l  (default: central FD of d1; only
//                         reports use second derivatives, never the stepper)
class TensorField11 {
 public:
  virtual ~TensorField11() = default;
  virtual void value(double t, ChartId c, const Vec& x, Mat& a) const = 0;
  virtual void d1(double t, ChartId c, const Vec& x, Ten3& da) const = 0;
  virtual void d2(double t, ChartId c, const Vec& x, Ten4& dda) const;
  virtual bool tensorial() const { return true; }
  virtual std::string name() const = 0;
};

// Drift coefficient: vector field b^i(t, x) with first partials
// db(j,i) = d_j b^i.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual void value(double t, ChartId c, const Vec& x, Vec& b) const = 0;
  virtual void d1(double t, ChartId c, const Vec& x, Mat& db) const;  // default: central FD
  virtual bool tensorial() const { return true; }
  virtual std::string name() const = 0;
};

using TensorFieldPtr = std::shared_ptr<const TensorField11>;
using VectorFieldPtr = std::shared_ptr<const VectorField>;

// Scalar function on the manifold, used to scale built-in tensor fields.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual double value(double t, ChartId c, const Vec& x) const = 0;
  virtual void grad(double t, ChartId c, const Vec& x, Vec& g) const = 0;
  virtual void hess(double t, ChartId c, const Vec& x, Mat& h) const;  // default: FD of grad
  virtual std::string name() const = 0;
};

// --- built-ins ---------------------------------------------------------

TensorFieldPtr identity_tensor(int dim);
TensorFieldPtr zero_tensor(int dim);
// a = f * Id with f = c0 + <coeffs, world(x)> (affine in world coordinates,
// hence a well-defined function on the manifold).
TensorFieldPtr scaled_identity_tensor(ModelPtr model, double c0, Vec coeffs);
// Same constant coefficient matrix in every chart; not tensorial on curved
// overlaps (negative-test material).
TensorFieldPtr constant_tensor(Mat a);

VectorFieldPtr zero_vector(int dim);
// Same constant components in every chart (tensorial only on flat models).
VectorFieldPtr constant_vector(Vec v);
// Killing rotation field about the origin / polar axis, d = 2 only:
// sphere and euclidean have closed chart forms, hyperbolic pulls the ball
// rotation back through the chart Jacobian.
VectorFieldPtr rotation_field(ModelPtr model, double omega);

// --- operations --------------------------------------------------------

// (nabla A)^i_{k;j} = d_j a^i_k + Gamma^i_jl a^l_k - Gamma^l_jk a^i_l,
// returned as nabla_a(i,k,j).
void covariant_derivative_11(const TensorField11& A, const ManifoldModel& model, double t,
                             const ChartPoint& p, Ten3& nabla_a);

// Sampled sup over charts x points of the g-norm of nabla^i A, i = 0..k.
double tensor_sup_norm(const TensorField11& A, const ManifoldModel& model, int order,
                       int n_samples, uint64_t seed);
double tensor_sup_norm(const VectorField& B, const ManifoldModel& model, int order, int n_samples,
                       uint64_t seed);

// Ito generator data of the chart SDE at (t, p):
//   sigma^ij   = a^i_k g^kl a^j_l
//   correction^i = 1/2 (d_j a^i_l a^j_k g^kl - a^i_l g^nj a^k_n Gamma^l_kj)
//   full_drift = b + correction
struct GeneratorData {
  Mat sigma;
  Vec correction;
  Vec full_drift;
};
void generator_data(const TensorField11& A, const VectorField& B, const ManifoldModel& model,
                    double t, const ChartPoint& p, GeneratorData& out);

// Push coefficients through a chart transition: abar = J a J^-1, bbar = J b.
void transform_field(const TensorField11& A, const ManifoldModel& model, ChartId from, ChartId to,
                     double t, const Vec& x, Mat& abar);
void transform_field(const VectorField& B, const ManifoldModel& model, ChartId from, ChartId to,
                     double t, const Vec& x, Vec& bbar);

}  // namespace msde::fields
