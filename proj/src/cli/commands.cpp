#include "msde/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "msde/geometry/atlas_checks.hpp"
#include "msde/geometry/tensors.hpp"
#include "msde/report.hpp"
#include "msde/verify/checks.hpp"

namespace msde::cli {

namespace fs = std::filesystem;
using geometry::ChartPoint;
using geometry::ManifoldModel;
using geometry::ModelPtr;
using integrator::SimParams;
using verify::TestFunction;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path);
}

void fill_meta(VerificationReport& report, const RunConfig& cfg, const ModelPtr& model) {
  report.meta["model"] = model->describe();
  report.meta["a_field"] = cfg.a_field.name;
  report.meta["b_field"] = cfg.b_field.name;
  report.meta["scheme"] = integrator::scheme_name(cfg.scheme);
  report.meta["h"] = fmt_double(cfg.h);
  report.meta["T"] = fmt_double(cfg.T);
  report.meta["n_paths"] = std::to_string(cfg.n_paths);
  report.meta["seed"] = std::to_string(cfg.seed);
}

void write_run_meta(const std::string& out_dir, const RunConfig& cfg,
                    const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = nlohmann::ordered_json::parse(config_echo_json(cfg));
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  j["timestamp_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  write_file(out_dir + "/run_meta.json", j.dump(2) + "\n");
}

chart_sde::FrameState initial_state(const RunConfig& cfg, const ModelPtr& model) {
  ChartPoint p;
  if (cfg.init_chart >= 0) {
    if (cfg.init_chart >= model->num_charts())
      throw ConfigError("config: init.chart out of range");
    p.chart = geometry::ChartId{cfg.init_chart};
    p.x = cfg.init_xi.empty() ? Vec(model->dim(), 0.0) : cfg.init_xi;
  } else {
    p = geometry::canonical_origin(*model);
    if (!cfg.init_xi.empty()) p.x = cfg.init_xi;
  }
  return chart_sde::orthonormal_frame_at(*model, p);
}

// deterministic overlap point, the deepest available in both charts
bool find_overlap_point(const ManifoldModel& model, geometry::ChartId& from, geometry::ChartId& to,
                        Vec& x) {
  SplitMix rng(20240901u);
  double best = 0.75;  // both coordinates must start at least this deep
  bool found = false;
  for (int tries = 0; tries < 4000; ++tries) {
    const Vec w = model.sample_world(rng);
    const auto charts = model.charts_containing(w, false);
    if (charts.size() < 2) continue;
    for (size_t a = 0; a + 1 < charts.size(); ++a)
      for (size_t b = a + 1; b < charts.size(); ++b) {
        const auto xa = model.chart_coords(charts[a], w);
        const auto xb = model.chart_coords(charts[b], w);
        if (!xa || !xb) continue;
        const double depth = std::max(norm2(*xa), norm2(*xb));
        if (depth < best) {
          best = depth;
          from = charts[a];
          to = charts[b];
          x = *xa;
          found = true;
        }
      }
  }
  return found;
}

Vec laplacian_r_grid(const ManifoldModel& model) {
  const double inj = model.injectivity_radius();
  const double r_max = std::min(2.0, 0.9 * inj);
  // stay within the reach of a single chart along a coordinate ray
  double reach = 1.3;
  if (model.kind() == geometry::ModelKind::FlatTorus) reach = 0.4;
  if (model.kind() == geometry::ModelKind::Hyperbolic) reach = 1.2;
  if (model.kind() == geometry::ModelKind::Sphere) reach = 1.5;
  const double hi = std::min(r_max, reach);
  Vec grid;
  for (int i = 0; i < 8; ++i) grid.push_back(0.1 + (hi - 0.1) * i / 7.0);
  return grid;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const integrator::TrajectoryRecord& rec, int dim) {
  os << "t,chart";
  for (int i = 0; i < dim; ++i) os << ",xi_" << i;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) os << ",zeta_" << i << j;
  os << ",switched\n";
  for (size_t k = 0; k < rec.times.size(); ++k) {
    os << fmt_double(rec.times[k]) << ',' << rec.charts[k];
    for (int i = 0; i < dim; ++i) os << ',' << fmt_double(rec.xis[k][i]);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) os << ',' << fmt_double(rec.zetas[k](i, j));
    os << ',' << static_cast<int>(rec.switched[k]) << '\n';
  }
}

int cmd_geometry_report(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const ModelPtr model = build_model(cfg);
  VerificationReport report = geometry::verify_uniform_atlas(*model, 2000, cfg.seed + 1);
  report.append(geometry::bounded_geometry_report(*model, 100, cfg.seed + 2));
  fill_meta(report, cfg, model);

  // curvature oracles on sampled points
  const int d = model->dim();
  double sec_target = 0.0;
  if (model->kind() == geometry::ModelKind::Sphere) sec_target = 1.0;
  if (model->kind() == geometry::ModelKind::Hyperbolic) sec_target = -1.0;
  SplitMix rng(cfg.seed + 3);
  double worst_sec = 0.0, worst_compat = 0.0, worst_bianchi = 0.0, worst_gamma_sym = 0.0;
  for (int s = 0; s < 50; ++s) {
    const Vec w = model->sample_world(rng);
    const auto c = model->first_chart_containing_shrunk(w);
    if (!c) continue;
    const ChartPoint p{*c, *model->chart_coords(*c, w)};
    worst_compat = std::max(worst_compat, geometry::metric_compatibility_residual(*model, p));
    worst_bianchi = std::max(worst_bianchi, geometry::bianchi_residual(*model, p));
    Ten3 gamma;
    geometry::christoffel(*model, p, gamma);
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          worst_gamma_sym = std::max(worst_gamma_sym, std::fabs(gamma(k, i, j) - gamma(k, j, i)));
    if (d >= 2) {
      Vec u(d, 0.0), v(d, 0.0);
      u[0] = 1.0;
      v[1] = 1.0;
      for (int i = 0; i < d; ++i) {
        u[i] += 0.2 * (rng.uniform() - 0.5);
        v[i] += 0.2 * (rng.uniform() - 0.5);
      }
      worst_sec = std::max(worst_sec,
                           std::fabs(geometry::sectional(*model, p, u, v) - sec_target));
    }
  }
  if (d >= 2)
    report.add(ReportEntry::deterministic("curvature.sectional_deviation", worst_sec, 0.0, 1e-6,
                                          "|sectional - model constant| over sampled planes"));
  report.add(ReportEntry::deterministic("christoffel.metric_compatibility", worst_compat, 0.0,
                                        1e-8, "nabla g residual"));
  report.add(ReportEntry::deterministic("curvature.first_bianchi", worst_bianchi, 0.0, 1e-8, ""));
  report.add(ReportEntry::deterministic("christoffel.symmetry", worst_gamma_sym, 0.0, 1e-10, ""));

  write_file(out_dir + "/geometry_report.json", report_to_json(report));
  write_run_meta(out_dir, cfg, "geometry-report");
  return report.all_pass() ? kOk : kVerifyFailed;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const ModelPtr model = build_model(cfg);
  const auto a_field = build_a_field(cfg, model);
  const auto b_field = build_b_field(cfg, model);
  const auto init = initial_state(cfg, model);

  SimParams sp;
  sp.T = cfg.T;
  sp.h = cfg.h;
  sp.scheme = cfg.scheme;
  sp.policy = cfg.policy;
  sp.save_stride = cfg.save_stride;

  const auto records =
      integrator::ensemble(*model, *a_field, *b_field, init, sp, cfg.seed, cfg.n_paths,
                           cfg.threads);
  for (int i = 0; i < cfg.n_paths; ++i) {
    std::ostringstream os;
    write_trajectory_csv(os, records[i], model->dim());
    write_file(out_dir + "/traj_" + std::to_string(i) + ".csv", os.str());
  }
  nlohmann::ordered_json statuses = nlohmann::ordered_json::array();
  for (const auto& r : records) statuses.push_back(integrator::status_name(r.status));
  nlohmann::ordered_json summary;
  summary["statuses"] = statuses;
  write_file(out_dir + "/statuses.json", summary.dump(2) + "\n");
  write_run_meta(out_dir, cfg, "simulate");
  return kOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite, const std::string& out_dir) {
  static const std::set<std::string> known = {"invariants", "generator", "flow",
                                              "exit",       "laplacian", "transition",
                                              "all"};
  if (!known.count(suite))
    throw ConfigError("verify: unknown suite '" + suite +
                      "' (invariants|generator|flow|exit|laplacian|transition|all)");
  const bool all = suite == "all";
  if ((all || suite == "flow") && cfg.n_paths < 1000)
    throw ConfigError("verify: the flow study needs sim.n_paths >= 1000");

  ensure_dir(out_dir);
  const ModelPtr model = build_model(cfg);
  const auto a_field = build_a_field(cfg, model);
  const auto b_field = build_b_field(cfg, model);
  const ChartPoint origin = geometry::canonical_origin(*model);

  VerificationReport report;
  fill_meta(report, cfg, model);
  report.meta["suite"] = suite;

  if (all || suite == "invariants") {
    SimParams sp;
    sp.T = cfg.T;
    sp.h = cfg.h;
    sp.scheme = cfg.scheme;
    sp.policy = cfg.policy;
    const auto init = initial_state(cfg, model);
    for (int i = 0; i < std::min(3, cfg.n_paths); ++i) {
      const auto rec = integrator::simulate(*model, *a_field, *b_field, init, sp,
                                            integrator::NoiseSource(cfg.seed, i));
      auto e = verify::check_frame_invariant(rec, *model, verify::frame_invariant_tolerance(cfg.h));
      e.name += "." + std::to_string(i);
      report.add(e);
    }
  }

  if (all || suite == "generator") {
    verify::GeneratorResidualParams prm;
    prm.n_paths = std::max(cfg.n_paths, 2000);
    prm.seed = cfg.seed + 11;
    prm.threads = cfg.threads;
    report.add(verify::generator_residual(*model, *a_field, *b_field, origin,
                                          verify::quadratic_norm(model->dim()), prm));
    if (model->kind() == geometry::ModelKind::Sphere)
      report.add(verify::generator_residual(*model, *a_field, *b_field, origin,
                                            verify::sphere_cos_distance(*model, origin), prm));
  }

  if (all || suite == "flow") {
    verify::FlowStudyParams prm;
    prm.n_paths = cfg.n_paths;
    prm.seed = cfg.seed + 13;
    prm.threads = cfg.threads;
    prm.h = std::min(cfg.h, 1e-3);
    const auto study = verify::flow_moment_study(*model, *a_field, *b_field, origin, prm);
    const bool flat = model->kind() == geometry::ModelKind::Euclidean;
    report.add(verify::flow_slope_entry(study, 2.0, flat ? 0.97 : 0.85, flat ? 1.03 : 1.15));
    report.add(verify::flow_slope_entry(study, 1.0, 0.35, 0.65));
  }

  if (all || suite == "exit") {
    verify::ExitStudyParams prm;
    prm.n_paths = std::max(cfg.n_paths, 2000);
    prm.seed = cfg.seed + 17;
    prm.threads = cfg.threads;
    const auto study = verify::exit_probability_study(*model, *a_field, *b_field, origin, prm);
    report.add(verify::exit_slope_entry(study, prm.slope_min));
  }

  if (all || suite == "laplacian") {
    const auto study = verify::laplacian_comparison_check(*model, origin,
                                                          laplacian_r_grid(*model));
    for (const auto& e : study.entries) report.add(e);
  }

  if (all || suite == "transition") {
    geometry::ChartId from, to;
    Vec x;
    if (find_overlap_point(*model, from, to, x)) {
      verify::TransitionStudyParams prm;
      prm.seed = cfg.seed + 19;
      prm.threads = cfg.threads;
      // scale the horizon by the local diffusion rate so the coupled runs
      // stay inside the bump core of both charts
      geometry::MetricEval me;
      model->metric(from, x, me);
      double trg = 0.0;
      for (int i = 0; i < model->dim(); ++i) trg += me.g_inv(i, i);
      prm.T = std::min(0.02, 0.02 / trg);
      prm.h = prm.T / 40.0;
      for (const auto& e :
           verify::transition_consistency_check(*model, *a_field, *b_field, from, to, x, prm))
        report.add(e);
      double worst = 0.0;
      SplitMix rng(cfg.seed + 23);
      int found = 0;
      for (int tries = 0; tries < 2000 && found < 20; ++tries) {
        const Vec w = model->sample_world(rng);
        const auto charts = model->charts_containing(w, false);
        if (charts.size() < 2) continue;
        const auto xa = model->chart_coords(charts[0], w);
        if (!xa || norm2(*xa) > 0.9) continue;
        worst = std::max(worst, verify::christoffel_transform_residual(*model, charts[0],
                                                                       charts[1], *xa));
        ++found;
      }
      report.add(ReportEntry::deterministic("transition.christoffel_identity", worst, 0.0, 1e-6,
                                            "coordinate-change identity on sampled overlaps"));
    } else {
      ReportEntry e;
      e.name = "transition.overlap_search";
      e.pass = false;
      e.note = "no usable overlap point found";
      report.add(e);
    }
  }

  write_file(out_dir + "/verify_report.json", report_to_json(report));
  write_run_meta(out_dir, cfg, "verify " + suite);
  return report.all_pass() ? kOk : kVerifyFailed;
}

}  // namespace msde::cli
