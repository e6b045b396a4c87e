#ifndef RKF_CLI_HPP
#define RKF_CLI_HPP

#include <optional>
#include <string>

#include "rkf/least_favorable.hpp"
#include "rkf/performance.hpp"
#include "rkf/scenario.hpp"

namespace rkf::cli {

/// Exit codes of the batch front-end: 0 success, 2 input error (bad scenario,
/// bad model), 3 numerical error (recursion breakdown, no convergence).
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalError = 3;

/// Results of the forward (analyze) stage shared by every command.
struct Analysis {
  Scenario scenario;
  StateSpaceModel normalized;
  double c = 0.0;                       // tolerance actually used
  std::optional<double> c_max_estimate; // set when the scenario asked for "auto"
  ForwardTrajectory forward;
  SteadyState steady;
};

/// Results of the backward (synthesize) stage.
struct Synthesis {
  std::vector<BackwardIterate> backward;
  ConvergenceCertificate certificate;
  SteadyBackwardResult steady_backward;
  LeastFavorableModel lf;
  StabilizingCheck stabilizing;
};

Analysis analyze(const Scenario& scenario);
Synthesis synthesize(const Analysis& analysis);

/// Command entry points: compute and write the output files into `outdir`
/// (the scenario's `outputs` directory unless overridden). Downstream
/// commands also write the files of the stages they imply; a JSON output
/// already stamped with the same scenario hash is left untouched.
void cmd_analyze(const Scenario& scenario, const std::string& outdir);
void cmd_synthesize(const Scenario& scenario, const std::string& outdir);
void cmd_compare(const Scenario& scenario, const std::string& outdir);
void cmd_certificate_sweep(const Scenario& scenario, const std::string& outdir);

/// Full front-end: loads the scenario, dispatches `command`, maps errors to
/// exit codes and writes diagnostics to stderr.
int run(const std::string& command, const std::string& scenario_path,
        const std::string& out_override);

/// 17-significant-digit decimal formatting used for all CSV numbers.
std::string fmt17(double x);

}  // namespace rkf::cli

#endif  // RKF_CLI_HPP
