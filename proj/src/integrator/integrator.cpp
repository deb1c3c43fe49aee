#include "msde/integrator/integrator.hpp"

#include <cmath>

#include "msde/parallel.hpp"

namespace msde::integrator {

const char* scheme_name(StepScheme s) {
  return s == StepScheme::StratHeun ? "strat_heun" : "ito_euler";
}

const char* status_name(TrajStatus s) {
  switch (s) {
    case TrajStatus::Completed: return "completed";
    case TrajStatus::FrameBlowup: return "aborted_frame_blowup";
    case TrajStatus::LeftAtlas: return "aborted_left_atlas";
  }
  return "?";
}

Stepper::Stepper(const ManifoldModel& model, const TensorField11& A, const VectorField& B,
                 StepScheme scheme)
    : model_(model), a_(A), b_(B), scheme_(scheme),
      bump_(BumpParams::from_r(model.shrink_radius())) {}

namespace {

// state += diff * dw + drift * h
void apply_increment(FrameState& s, const Mat& xi_diff, const Ten3& zeta_diff,
                     const Vec& xi_drift, const Mat& zeta_drift, double h, const Vec& dw) {
  const int d = static_cast<int>(s.xi.size());
  for (int i = 0; i < d; ++i) {
    double inc = xi_drift[i] * h;
    for (int m = 0; m < d; ++m) inc += xi_diff(i, m) * dw[m];
    s.xi[i] += inc;
  }
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) {
      double inc = zeta_drift(k, m) * h;
      for (int n = 0; n < d; ++n) inc += zeta_diff(k, m, n) * dw[n];
      s.zeta(k, m) += inc;
    }
}

}  // namespace

void Stepper::advance(FrameState& state, double t, double h, const Vec& dw) {
  const int d = model_.dim();
  if (scheme_ == StepScheme::ItoEuler) {
    chart_sde::ito_coefficients(a_, b_, model_, t, state, bump_, c0_, ws_);
    apply_increment(state, c0_.xi_diff, c0_.zeta_diff, c0_.xi_drift_ito, c0_.zeta_drift_ito, h,
                    dw);
    return;
  }
  // Heun predictor-corrector on the Stratonovich form (weak order 1)
  chart_sde::strat_coefficients(a_, b_, model_, t, state, bump_, c0_, ws_);
  pred_.chart = state.chart;
  pred_.xi = state.xi;
  pred_.zeta = state.zeta;
  apply_increment(pred_, c0_.xi_diff, c0_.zeta_diff, c0_.xi_drift, c0_.zeta_drift, h, dw);
  chart_sde::strat_coefficients(a_, b_, model_, t + h, pred_, bump_, c1_, ws_);
  for (int i = 0; i < d; ++i) {
    double inc = 0.5 * (c0_.xi_drift[i] + c1_.xi_drift[i]) * h;
    for (int m = 0; m < d; ++m) inc += 0.5 * (c0_.xi_diff(i, m) + c1_.xi_diff(i, m)) * dw[m];
    state.xi[i] += inc;
  }
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) {
      double inc = 0.5 * (c0_.zeta_drift(k, m) + c1_.zeta_drift(k, m)) * h;
      for (int n = 0; n < d; ++n)
        inc += 0.5 * (c0_.zeta_diff(k, m, n) + c1_.zeta_diff(k, m, n)) * dw[n];
      state.zeta(k, m) += inc;
    }
}

FrameState step(StepScheme scheme, const ManifoldModel& model, const TensorField11& A,
                const VectorField& B, const FrameState& state, double t, double h, const Vec& dw) {
  if (h <= 0.0) throw std::invalid_argument("step: h must be positive");
  model.check_inside(state.chart, state.xi);
  Stepper stepper(model, A, B, scheme);
  FrameState out = state;
  stepper.advance(out, t, h, dw);
  const int d = model.dim();
  const double blowup = 2.0 * model.metric_equivalence() * model.metric_equivalence();
  for (int m = 0; m < d; ++m) {
    double cn = 0.0;
    for (int i = 0; i < d; ++i) cn += out.zeta(i, m) * out.zeta(i, m);
    if (cn > blowup * blowup)
      throw FrameBlowup("frame column norm exceeded 2K^2 after step");
  }
  if (norm2(out.xi) >= 1.0)
    throw PointOutsideChart("step left the unit chart ball");
  return out;
}

FrameState switch_chart(const ManifoldModel& model, const FrameState& state, ChartId to) {
  Vec xbar;
  Mat jac;
  model.transition(state.chart, to, state.xi, xbar, jac);
  FrameState out;
  out.chart = to;
  out.xi = std::move(xbar);
  matmul(jac, state.zeta, out.zeta);
  return out;
}

namespace detail {

AnchorResult re_anchor(const ManifoldModel& model, FrameState& state, double t, bool deepest,
                       std::vector<SwitchEvent>* events) {
  const auto w = model.world_of_extended(state.chart, state.xi);
  if (!w) return {false, false};
  const auto target = deepest ? model.deepest_chart_containing_shrunk(*w)
                              : model.first_chart_containing_shrunk(*w);
  if (!target) return {false, false};
  if (*target == state.chart) return {true, false};
  Vec xbar;
  Mat jac;
  try {
    model.transition_extended(state.chart, *target, state.xi, xbar, jac);
  } catch (const NotInOverlap&) {
    return {false, false};
  }
  if (events) events->push_back({t, state.chart, *target});
  state.xi = std::move(xbar);
  state.zeta = matmul(jac, state.zeta);
  state.chart = *target;
  return {true, true};
}

}  // namespace detail

TrajectoryRecord simulate(const ManifoldModel& model, const TensorField11& A, const VectorField& B,
                          const FrameState& init, const SimParams& sp, const NoiseSource& noise) {
  if (sp.save_stride < 1) throw std::invalid_argument("simulate: save stride must be >= 1");
  TrajectoryRecord rec;
  rec.h = sp.h;
  const int64_t n_steps = static_cast<int64_t>(std::llround(sp.T / sp.h));
  bool switched_since_save = false;
  auto obs = [&](int64_t k, double t, const FrameState& s, bool switched) {
    switched_since_save = switched_since_save || switched;
    rec.steps_done = k;
    if (k % sp.save_stride == 0 || k == n_steps) {
      rec.times.push_back(t);
      rec.charts.push_back(s.chart.index);
      rec.xis.push_back(s.xi);
      rec.zetas.push_back(s.zeta);
      rec.switched.push_back(switched_since_save ? 1 : 0);
      switched_since_save = false;
    }
  };
  rec.status = simulate_observed(model, A, B, init, sp, noise, obs, &rec.switches,
                                 sp.record_increments ? &rec.increments : nullptr);
  return rec;
}

std::vector<TrajectoryRecord> ensemble(const ManifoldModel& model, const TensorField11& A,
                                       const VectorField& B, const FrameState& init,
                                       const SimParams& sp, uint64_t seed, int n_paths,
                                       int threads) {
  if (n_paths < 1) throw std::invalid_argument("ensemble: n_paths must be >= 1");
  std::vector<TrajectoryRecord> out(n_paths);
  parallel_for(n_paths, threads, [&](int i) {
    out[i] = simulate(model, A, B, init, sp, NoiseSource(seed, static_cast<uint64_t>(i)));
  });
  return out;
}

}  // namespace msde::integrator
