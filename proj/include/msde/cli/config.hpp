#pragma once

#include <cstdint>
#include <string>

#include "msde/fields/fields.hpp"
#include "msde/integrator/integrator.hpp"

namespace msde::cli {

struct FieldSpec {
  std::string name;
  double c0 = 1.0;     // scaled_identity offset
  Vec coeffs;          // scaled_identity world coefficients
  Mat matrix;          // constant tensor
  Vec v;               // constant vector
  double omega = 1.0;  // rotation rate
};

// One flat JSON document per run; unknown keys are rejected so typos fail
// loudly instead of silently falling back to defaults.
struct RunConfig {
  geometry::ModelSpec model;
  FieldSpec a_field{"identity", 1.0, {}, {}, {}, 1.0};
  FieldSpec b_field{"zero", 1.0, {}, {}, {}, 1.0};
  double T = 1.0;
  double h = 1e-3;
  integrator::StepScheme scheme = integrator::StepScheme::StratHeun;
  integrator::SwitchPolicy policy = integrator::SwitchPolicy::event();
  int n_paths = 1;
  int save_stride = 1;
  int threads = 0;
  int init_chart = -1;  // -1 = canonical origin chart
  Vec init_xi;          // empty = chart center
  uint64_t seed = 0;
};

RunConfig parse_config_json(const std::string& text);
RunConfig parse_config_file(const std::string& path);

geometry::ModelPtr build_model(const RunConfig& config);
fields::TensorFieldPtr build_a_field(const RunConfig& config, const geometry::ModelPtr& model);
fields::VectorFieldPtr build_b_field(const RunConfig& config, const geometry::ModelPtr& model);

// canonical echo of the parsed configuration (deterministic)
std::string config_echo_json(const RunConfig& config);

}  // namespace msde::cli
