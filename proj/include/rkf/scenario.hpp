#ifndef RKF_SCENARIO_HPP
#define RKF_SCENARIO_HPP

#include <cstdint>
#include <string>

#include "rkf/model.hpp"

namespace rkf {

/// A batch-run description parsed from a scenario JSON file:
///
///   {
///     "A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]], "P0": [[...]],
///     "c": 0.1879 | "auto",
///     "T": 2000,
///     "rho_grid": 512,                              // optional
///     "c_bracket": [1e-6, 10.0], "c_probes": 16,    // optional, for "auto"
///     "mc": {"N": 10000, "T": 500, "seed": 1},      // optional
///     "outputs": "out"                              // optional
///   }
///
/// Matrices are row-major nested arrays. "c": "auto" asks the pipeline to
/// replace c by the empirical tolerance-ceiling estimate.
struct Scenario {
  StateSpaceModel model;
  bool c_auto = false;
  double c = 0.0;
  int horizon = 0;
  int rho_grid = 512;
  double c_bracket_lo = 1e-6;
  double c_bracket_hi = 10.0;
  int c_probes = 16;
  bool has_mc = false;
  int mc_trajectories = 0;
  int mc_horizon = 0;
  std::uint64_t mc_seed = 0;
  std::string outputs = ".";
  std::string hash;  // FNV-1a of the scenario file bytes, hex
};

/// Parses scenario JSON text. Throws InputError with a parse location on
/// malformed JSON and on schema violations.
Scenario parse_scenario(const std::string& json_text);

/// Reads and parses a scenario file; fills Scenario::hash.
Scenario load_scenario(const std::string& path);

/// FNV-1a 64-bit hash, hex-encoded. Used to stamp outputs for provenance.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace rkf

#endif  // RKF_SCENARIO_HPP
