#pragma once

#include <ostream>
#include <string>

#include "msde/cli/config.hpp"
#include "msde/integrator/integrator.hpp"

namespace msde::cli {

// Exit codes: 0 success / all checks pass, 1 verification failure,
// 2 configuration error, 3 I/O error.
enum ExitCode { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kIoError = 3 };

int cmd_geometry_report(const RunConfig& config, const std::string& out_dir);
int cmd_simulate(const RunConfig& config, const std::string& out_dir);
int cmd_verify(const RunConfig& config, const std::string& suite, const std::string& out_dir);

// CSV layout: t,chart,xi_0..xi_{d-1},zeta_00..zeta_{d-1}{d-1},switched
void write_trajectory_csv(std::ostream& os, const integrator::TrajectoryRecord& rec, int dim);

}  // namespace msde::cli
