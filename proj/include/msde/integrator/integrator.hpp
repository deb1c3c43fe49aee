#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "msde/chart_sde/chart_sde.hpp"
#include "msde/rng.hpp"

namespace msde::integrator {

using chart_sde::BumpParams;
using chart_sde::ChartSdeCoeffs;
using chart_sde::CoeffWorkspace;
using chart_sde::FrameState;
using fields::TensorField11;
using fields::VectorField;
using geometry::ChartId;
using geometry::ManifoldModel;

enum class StepScheme { StratHeun, ItoEuler };

const char* scheme_name(StepScheme s);

// When and how the trajectory is re-anchored to a fresh chart.
//  Grid : at the times k T / m, to the first chart whose shrunk ball contains
//         the point (the switching construction's partition order).
//  Event: eagerly, to the deepest containing chart, once ||xi|| exceeds the
//         hop radius (default min(0.5, inner bump radius); an explicit
//         threshold is honored verbatim). Keeping the state near a chart
//         center leaves the bump identically 1 along the whole path (with
//         overwhelming probability), so predictor stages never sample the
//         cutoff shell.
//  None : never (diagnostic runs confined to one chart).
// Any policy except None also re-anchors a state that lands where the bump
// vanishes, so the process is never left frozen.
struct SwitchPolicy {
  enum class Kind { Grid, Event, None };
  Kind kind = Kind::Event;
  int grid_m = 0;
  double threshold = 0.0;  // 0 = default hop radius

  static SwitchPolicy grid(int m) { return {Kind::Grid, m, 0.0}; }
  static SwitchPolicy event(double threshold = 0.0) { return {Kind::Event, 0, threshold}; }
  static SwitchPolicy none() { return {Kind::None, 0, 0.0}; }
};

// Driving noise: i.i.d. Gaussian d-vectors scaled by sqrt(h), a pure function
// of (seed, trajectory, step, component). One global Brownian path drives all
// charts; increments are never transformed at switches.
struct NoiseSource {
  uint64_t seed;
  uint64_t trajectory;
  CounterRng rng;

  NoiseSource(uint64_t seed_, uint64_t trajectory_)
      : seed(seed_), trajectory(trajectory_), rng(seed_, trajectory_) {}

  void increments(int64_t step, double sqrt_h, Vec& dw) const {
    for (size_t i = 0; i < dw.size(); ++i)
      dw[i] = sqrt_h * rng.gaussian(static_cast<uint64_t>(step), i);
  }
};

enum class TrajStatus { Completed, FrameBlowup, LeftAtlas };
const char* status_name(TrajStatus s);

struct SwitchEvent {
  double time;
  ChartId from;
  ChartId to;
};

struct TrajectoryRecord {
  Vec times;
  std::vector<int> charts;
  std::vector<Vec> xis;
  std::vector<Mat> zetas;
  std::vector<char> switched;  // a switch happened since the previous saved row
  std::vector<SwitchEvent> switches;
  std::vector<Vec> increments;  // per integration step, when requested
  TrajStatus status = TrajStatus::Completed;
  int64_t steps_done = 0;
  double h = 0.0;
};

struct SimParams {
  double T = 1.0;
  double h = 1e-3;
  StepScheme scheme = StepScheme::StratHeun;
  SwitchPolicy policy = SwitchPolicy::event();
  int save_stride = 1;
  bool record_increments = false;
};

// Reusable single-trajectory stepping engine; owns all scratch buffers, so
// the per-step path performs no allocation after the first step.
class Stepper {
 public:
  Stepper(const ManifoldModel& model, const TensorField11& A, const VectorField& B,
          StepScheme scheme);

  void advance(FrameState& state, double t, double h, const Vec& dw);
  const BumpParams& bump_params() const { return bump_; }

 private:
  const ManifoldModel& model_;
  const TensorField11& a_;
  const VectorField& b_;
  StepScheme scheme_;
  BumpParams bump_;
  ChartSdeCoeffs c0_, c1_;
  CoeffWorkspace ws_;
  FrameState pred_;
};

// Single guarded step (throws FrameBlowup / PointOutsideChart); trajectories
// use the internal loop below, which re-anchors instead of throwing.
FrameState step(StepScheme scheme, const ManifoldModel& model, const TensorField11& A,
                const VectorField& B, const FrameState& state, double t, double h, const Vec& dw);

// (xi, zeta) -> (xbar(xi), J zeta); the Gram matrix is preserved by
// tensoriality. Throws NotInOverlap.
FrameState switch_chart(const ManifoldModel& model, const FrameState& state, ChartId to);

namespace detail {

struct AnchorResult {
  bool ok = true;
  bool switched = false;
};

// `deepest` picks the chart whose coordinates of the point are smallest
// (event policy); otherwise the first-match partition order is used.
AnchorResult re_anchor(const ManifoldModel& model, FrameState& state, double t, bool deepest,
                       std::vector<SwitchEvent>* events);

}  // namespace detail

// Array-backed noise for refinement couplings (increments pre-scaled).
struct ArrayNoise {
  const std::vector<Vec>* steps;
  void increments(int64_t step, double, Vec& dw) const { dw = (*steps)[step]; }
};

// Core loop; obs(step_index, time, state, switched_since_last_obs) is invoked
// for step_index = 0..n. Template so observers inline away in hot studies.
template <class Obs, class Noise = NoiseSource>
TrajStatus simulate_observed(const ManifoldModel& model, const TensorField11& A,
                             const VectorField& B, FrameState state, const SimParams& sp,
                             const Noise& noise, Obs&& obs,
                             std::vector<SwitchEvent>* events = nullptr,
                             std::vector<Vec>* increments = nullptr) {
  const int d = model.dim();
  if (sp.h <= 0.0 || sp.T <= 0.0 || sp.h > sp.T + 1e-15)
    throw std::invalid_argument("simulate: need 0 < h <= T");
  const int64_t n_steps = static_cast<int64_t>(std::llround(sp.T / sp.h));
  if (n_steps < 1 || std::fabs(n_steps * sp.h - sp.T) > 1e-9 * std::max(1.0, sp.T))
    throw std::invalid_argument("simulate: h must divide T");

  Stepper stepper(model, A, B, sp.scheme);
  const BumpParams& bp = stepper.bump_params();
  const double hop_radius =
      sp.policy.threshold > 0.0 ? sp.policy.threshold : std::min(0.5, bp.inner);
  const double blowup = 2.0 * model.metric_equivalence() * model.metric_equivalence();

  double anchor_dt = 0.0;
  double next_anchor = 0.0;
  if (sp.policy.kind == SwitchPolicy::Kind::Grid) {
    if (sp.policy.grid_m < 1) throw std::invalid_argument("simulate: grid policy needs m >= 1");
    anchor_dt = sp.T / sp.policy.grid_m;
  }

  bool switched_accum = false;
  const bool deep_anchor = sp.policy.kind != SwitchPolicy::Kind::Grid;
  auto anchor_now = [&](double t) -> bool {
    const auto r = detail::re_anchor(model, state, t, deep_anchor, events);
    switched_accum = switched_accum || r.switched;
    return r.ok;
  };

  // initial anchoring
  bool alive = true;
  if (sp.policy.kind == SwitchPolicy::Kind::Grid) {
    alive = anchor_now(0.0);
    next_anchor = anchor_dt;
  } else if (sp.policy.kind == SwitchPolicy::Kind::Event && norm2(state.xi) >= hop_radius) {
    alive = anchor_now(0.0);
  }
  obs(static_cast<int64_t>(0), 0.0, state, switched_accum);
  switched_accum = false;
  if (!alive) return TrajStatus::LeftAtlas;

  Vec dw(d);
  const double sqrt_h = std::sqrt(sp.h);
  for (int64_t k = 0; k < n_steps; ++k) {
    const double t = k * sp.h;
    if (k > 0 && sp.policy.kind != SwitchPolicy::Kind::None) {
      bool want_anchor = norm2(state.xi) >= bp.outer;  // never step from the dead zone
      if (sp.policy.kind == SwitchPolicy::Kind::Grid && t >= next_anchor - 1e-12) {
        want_anchor = true;
        while (next_anchor <= t + 1e-12) next_anchor += anchor_dt;
      }
      if (sp.policy.kind == SwitchPolicy::Kind::Event && norm2(state.xi) >= hop_radius)
        want_anchor = true;
      if (want_anchor && !anchor_now(t)) return TrajStatus::LeftAtlas;
    }

    noise.increments(k, sqrt_h, dw);
    if (increments) increments->push_back(dw);
    stepper.advance(state, t, sp.h, dw);

    for (int m = 0; m < d; ++m) {
      double cn = 0.0;
      for (int i = 0; i < d; ++i) cn += state.zeta(i, m) * state.zeta(i, m);
      if (cn > blowup * blowup) return TrajStatus::FrameBlowup;
    }
    if (norm2(state.xi) >= 2.0) return TrajStatus::LeftAtlas;

    obs(k + 1, (k + 1) * sp.h, state, switched_accum);
    switched_accum = false;
  }
  return TrajStatus::Completed;
}

TrajectoryRecord simulate(const ManifoldModel& model, const TensorField11& A, const VectorField& B,
                          const FrameState& init, const SimParams& sp, const NoiseSource& noise);

std::vector<TrajectoryRecord> ensemble(const ManifoldModel& model, const TensorField11& A,
                                       const VectorField& B, const FrameState& init,
                                       const SimParams& sp, uint64_t seed, int n_paths,
                                       int threads);

}  // namespace msde::integrator
