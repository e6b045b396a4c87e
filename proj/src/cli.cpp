#include "rkf/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "rkf/version.hpp"

namespace rkf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

// Column-major (vec) entry names for a matrix column block, e.g. P_0_0, P_1_0, ...
void append_vec_header(std::string& header, const std::string& name, Eigen::Index rows,
                       Eigen::Index cols) {
  for (Eigen::Index k = 0; k < cols; ++k) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      header += "," + name + "_" + std::to_string(i) + "_" + std::to_string(k);
    }
  }
}

void append_vec_row(std::string& row, const Mat& m) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      row += "," + fmt17(m(i, k));
    }
  }
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& comment, const std::string& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw InputError("cannot open output file " + path.string());
    out_ << "# " << comment << "\n" << header << "\n";
  }

  void row(const std::string& line) { out_ << line << "\n"; }

 private:
  std::ofstream out_;
};

void write_json_file(const fs::path& path, json j, const std::string& scenario_hash) {
  j["meta"] = {{"scenario_hash", scenario_hash}, {"library_version", kVersion}};
  // Cache check: identical scenario produces identical content, so a file
  // already stamped with this hash is current.
  if (fs::exists(path)) {
    try {
      std::ifstream in(path, std::ios::binary);
      json existing = json::parse(in);
      if (existing.contains("meta") && existing["meta"].value("scenario_hash", "") ==
          scenario_hash) {
        return;
      }
    } catch (...) {
      // unreadable or foreign file: overwrite
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file " + path.string());
  out << j.dump(2) << "\n";
}

json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

// ============================================================
// Pipeline stages
// ============================================================

Analysis analyze(const Scenario& scenario) {
  Analysis a;
  a.scenario = scenario;
  validate(scenario.model);
  a.normalized = normalize(scenario.model);
  validate(a.normalized);

  if (scenario.c_auto) {
    a.c_max_estimate = estimate_c_max(a.normalized, scenario.c_bracket_lo,
                                      scenario.c_bracket_hi, scenario.c_probes);
    a.c = *a.c_max_estimate;
  } else {
    a.c = scenario.c;
  }

  a.forward = run_forward(a.normalized, a.normalized.P0, a.c, scenario.horizon);
  a.steady = steady_state(a.normalized, a.c);
  return a;
}

Synthesis synthesize(const Analysis& analysis) {
  Synthesis s;
  s.backward = backward_recursion(analysis.normalized, analysis.forward);
  s.certificate = certify(analysis.steady, analysis.scenario.rho_grid);
  if (!s.certificate.holds) {
    std::cerr << "warning: convergence certificate does not hold (margin "
              << s.certificate.margin << "); proceeding with the backward iteration anyway\n";
  }
  s.steady_backward = steady_backward(analysis.steady);
  s.lf = assemble(analysis.normalized, analysis.steady, s.steady_backward.X);
  s.stabilizing = stabilizing_check(s.steady_backward.X, analysis.steady.Abar,
                                    analysis.steady.Bbar);
  return s;
}

// ============================================================
// File emission
// ============================================================

namespace {

void write_analysis_files(const Analysis& a, const fs::path& outdir) {
  const Eigen::Index n = a.normalized.state_dim();
  const Eigen::Index p = a.normalized.obs_dim();
  const std::string& hash = a.scenario.hash;

  {
    std::string header = "t";
    append_vec_header(header, "P", n, n);
    header += ",theta";
    append_vec_header(header, "V", n, n);
    append_vec_header(header, "G", n, p);
    CsvWriter csv(outdir / "forward_trajectory.csv",
                  "matrix columns in vec() order (column-major); X_i_j = entry (row i, col j)",
                  header);
    for (int t = 0; t < a.forward.horizon(); ++t) {
      std::string row = std::to_string(t);
      append_vec_row(row, a.forward.steps[t].P);
      row += "," + fmt17(a.forward.risk(t));
      append_vec_row(row, a.forward.steps[t].V);
      append_vec_row(row, a.forward.gain(t));
      csv.row(row);
    }
  }

  json ss;
  ss["c"] = a.c;
  ss["P"] = mat_to_json(a.steady.P);
  ss["V"] = mat_to_json(a.steady.V);
  ss["theta"] = a.steady.theta;
  ss["G"] = mat_to_json(a.steady.G);
  ss["Abar_spectral_radius"] = spectral_radius(a.steady.Abar);
  ss["riccati_residual"] = riccati_residual(a.normalized, a.steady.P, a.steady.theta);
  ss["iterations"] = a.steady.iterations;
  ss["forward_converged"] = a.forward.converged;
  ss["forward_converged_at"] = a.forward.converged_at;
  write_json_file(outdir / "steady_state.json", ss, hash);

  if (a.c_max_estimate) {
    json cm;
    cm["c_max_estimate"] = *a.c_max_estimate;
    cm["bracket"] = {a.scenario.c_bracket_lo, a.scenario.c_bracket_hi};
    cm["probes"] = a.scenario.c_probes;
    cm["note"] =
        "empirical estimate: largest probed tolerance for which the forward recursion "
        "converges from seeded initial covariances; not an analytic bound";
    write_json_file(outdir / "c_max.json", cm, hash);
  }
}

void write_synthesis_files(const Analysis& a, const Synthesis& s, const fs::path& outdir) {
  const Eigen::Index n = a.normalized.state_dim();
  const std::string& hash = a.scenario.hash;

  {
    std::string header = "t";
    append_vec_header(header, "OmegaInv", n, n);
    CsvWriter csv(outdir / "backward_trajectory.csv",
                  "matrix columns in vec() order (column-major); X_i_j = entry (row i, col j)",
                  header);
    for (const BackwardIterate& it : s.backward) {
      std::string row = std::to_string(it.t);
      append_vec_row(row, it.OmegaInv);
      csv.row(row);
    }
  }

  json cert;
  cert["rho"] = s.certificate.rho;
  cert["margin"] = number_or_null(s.certificate.margin);
  cert["holds"] = s.certificate.holds;
  cert["degenerate"] = s.certificate.degenerate;
  cert["SigmaRho"] = mat_to_json(s.certificate.SigmaRho);
  write_json_file(outdir / "certificate.json", cert, hash);

  json lf;
  lf["Atil"] = mat_to_json(s.lf.Atil);
  lf["Btil"] = mat_to_json(s.lf.Btil);
  lf["Ctil"] = mat_to_json(s.lf.Ctil);
  lf["Dtil"] = mat_to_json(s.lf.Dtil);
  lf["H"] = mat_to_json(s.lf.H);
  lf["Ktil"] = mat_to_json(s.lf.Ktil);
  lf["L"] = mat_to_json(s.lf.L);
  lf["OmegaInv"] = mat_to_json(s.lf.OmegaInvLimit);
  lf["stationary"] = s.lf.stationary;
  lf["theta_iterations"] = s.steady_backward.iterations;
  write_json_file(outdir / "lf_model.json", lf, hash);

  json stab;
  json eigs = json::array();
  for (Eigen::Index i = 0; i < s.stabilizing.eigenvalues.size(); ++i) {
    eigs.push_back({{"re", s.stabilizing.eigenvalues(i).real()},
                    {"im", s.stabilizing.eigenvalues(i).imag()}});
  }
  stab["eigenvalues"] = eigs;
  stab["spectral_radius"] = s.stabilizing.eigenvalues.cwiseAbs().maxCoeff();
  stab["stable"] = s.stabilizing.stable;
  stab["J"] = mat_to_json(s.stabilizing.J);
  write_json_file(outdir / "stabilizing.json", stab, hash);
}

void write_compare_files(const Analysis& a, const Synthesis& s, const fs::path& outdir) {
  const Eigen::Index n = a.normalized.state_dim();
  const std::string& hash = a.scenario.hash;
  const Scenario& sc = a.scenario;

  const ComparisonReport rep = compare(a.normalized, a.steady, s.lf, sc.horizon);
  const std::vector<Mat>& pi_kalman = rep.pi_kalman;
  const std::vector<Mat>& pi_robust = rep.pi_robust;

  const Mat v0 = symmetrize(a.normalized.P0);
  std::optional<MonteCarloReport> mc_kalman;
  std::optional<MonteCarloReport> mc_robust;
  if (sc.has_mc) {
    mc_kalman = monte_carlo_check(s.lf, rep.kalman_gain, v0, sc.mc_trajectories, sc.mc_horizon,
                                  sc.mc_seed);
    mc_robust = monte_carlo_check(s.lf, a.steady.G, v0, sc.mc_trajectories, sc.mc_horizon,
                                  sc.mc_seed + 1);
  }

  {
    std::string header = "t";
    for (Eigen::Index i = 0; i < n; ++i) header += ",var_kalman_" + std::to_string(i + 1) + "_db";
    for (Eigen::Index i = 0; i < n; ++i) header += ",var_robust_" + std::to_string(i + 1) + "_db";
    if (sc.has_mc) {
      for (Eigen::Index i = 0; i < n; ++i) {
        header += ",mc_var_kalman_" + std::to_string(i + 1);
        header += ",mc_se_kalman_" + std::to_string(i + 1);
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        header += ",mc_var_robust_" + std::to_string(i + 1);
        header += ",mc_se_robust_" + std::to_string(i + 1);
      }
    }
    CsvWriter csv(outdir / "compare.csv",
                  "per-component prediction-error variances under the least favorable model, "
                  "10*log10 scale; mc_* columns are raw variances",
                  header);
    for (int t = 0; t <= sc.horizon; ++t) {
      std::string row = std::to_string(t);
      for (Eigen::Index i = 0; i < n; ++i) {
        row += "," + fmt17(10.0 * std::log10(pi_kalman[t](i, i)));
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        row += "," + fmt17(10.0 * std::log10(pi_robust[t](i, i)));
      }
      if (sc.has_mc) {
        const bool have = t <= sc.mc_horizon;
        auto emit = [&](const MonteCarloReport& mc) {
          for (Eigen::Index i = 0; i < n; ++i) {
            if (have) {
              const double var = mc.variance_trajectory[t][i];
              row += "," + fmt17(var);
              row += "," + fmt17(var * std::sqrt(2.0 / (mc.trajectories - 1.0)));
            } else {
              row += ",,";
            }
          }
        };
        emit(*mc_kalman);
        emit(*mc_robust);
      }
      csv.row(row);
    }
  }

  json gap;
  gap["c"] = a.c;
  gap["kalman_db"] = rep.kalman_db;
  gap["robust_db"] = rep.robust_db;
  gap["gap_db"] = rep.gap_db;
  write_json_file(outdir / "gap.json", gap, hash);
}

void write_sweep_file(const Analysis& a, const fs::path& outdir) {
  const auto curve = certificate_sweep(a.steady.Abar, a.steady.Bbar, a.steady.theta,
                                       a.scenario.rho_grid);
  CsvWriter csv(outdir / "certificate_sweep.csv",
                "minimum eigenvalue of (1 - rho^-2) SigmaRho^-1 - Bbar Bbar^T over the rho grid",
                "rho,min_eigenvalue");
  for (const auto& [rho, margin] : curve) {
    csv.row(fmt17(rho) + "," + fmt17(margin));
  }
}

fs::path prepare_outdir(const Scenario& scenario, const std::string& outdir) {
  fs::path dir = outdir.empty() ? fs::path(scenario.outputs) : fs::path(outdir);
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

// ============================================================
// Commands
// ============================================================

void cmd_analyze(const Scenario& scenario, const std::string& outdir) {
  const fs::path dir = prepare_outdir(scenario, outdir);
  Analysis a = analyze(scenario);
  write_analysis_files(a, dir);
}

void cmd_synthesize(const Scenario& scenario, const std::string& outdir) {
  const fs::path dir = prepare_outdir(scenario, outdir);
  Analysis a = analyze(scenario);
  write_analysis_files(a, dir);
  Synthesis s = synthesize(a);
  write_synthesis_files(a, s, dir);
}

void cmd_compare(const Scenario& scenario, const std::string& outdir) {
  const fs::path dir = prepare_outdir(scenario, outdir);
  Analysis a = analyze(scenario);
  write_analysis_files(a, dir);
  Synthesis s = synthesize(a);
  write_synthesis_files(a, s, dir);
  write_compare_files(a, s, dir);
}

void cmd_certificate_sweep(const Scenario& scenario, const std::string& outdir) {
  const fs::path dir = prepare_outdir(scenario, outdir);
  Analysis a = analyze(scenario);
  write_analysis_files(a, dir);
  write_sweep_file(a, dir);
}

int run(const std::string& command, const std::string& scenario_path,
        const std::string& out_override) {
  try {
    Scenario scenario = load_scenario(scenario_path);
    if (command == "analyze") {
      cmd_analyze(scenario, out_override);
    } else if (command == "synthesize") {
      cmd_synthesize(scenario, out_override);
    } else if (command == "compare") {
      cmd_compare(scenario, out_override);
    } else if (command == "certificate-sweep") {
      cmd_certificate_sweep(scenario, out_override);
    } else {
      std::cerr << "error: unknown command \"" << command << "\"\n";
      return kExitInputError;
    }
    return kExitOk;
  } catch (const InputError& e) {
    std::cerr << "error (input): " << e.what() << "\n";
    return kExitInputError;
  } catch (const NumericalError& e) {
    std::cerr << "error (numerical): " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace rkf::cli
