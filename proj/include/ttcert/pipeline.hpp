#pragma once

// End-to-end driver: collocation, primal solve, flux reconstruction,
// certification and (when the exact solution is known) the true error.

#include "ttcert/estimator.hpp"
#include "ttcert/problems.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ttcert {

struct RunConfig {
  std::string problem = "const-kappa";
  Index dim = 3;
  Index n = 16;
  int m = 4;
  double kappa2 = 0.0;  ///< const-kappa parameter
  double alpha = 0.2617993877991494;  ///< rotated-gaussian angle, default pi / 12
  double delta_p = 1e-3;
  double delta_c = 1e-7;
  std::optional<double> kappa0;  ///< empty: problem default
  std::uint64_t seed = 1;
  Index max_rank = 0;            ///< cap for primal and flux ranks, 0 means none
  double cross_tol = 1e-10;      ///< relative accuracy of collocated data and exact-solution fields
  std::string save_tt_dir;       ///< if set, u_h and the flux components are written there

  /// Throws std::invalid_argument for invalid values.
  void validate() const;
};

/// One pipeline run. Numeric fields are deterministic for a fixed config.
struct RunRecord {
  // config echo
  std::string problem;
  Index dim = 0;
  Index n = 0;
  int m = 0;
  double kappa2 = 0.0;
  double alpha = 0.0;
  double delta_p = 0.0;
  double delta_c = 0.0;
  double kappa0 = 0.0;
  std::uint64_t seed = 0;
  Index max_rank_cap = 0;

  // certificate
  double eta1 = 0.0;
  double eta2 = 0.0;
  double osc = 0.0;
  double shift_term = 0.0;
  double bound = 0.0;
  double poincare_cp = 0.0;
  double osc_constant = 0.0;

  // exact error, present only with an exact solution
  std::optional<double> energy_error;
  std::optional<double> relative_energy_error;
  std::optional<double> i_eff;

  double t_collocate = 0.0;
  double t_primal = 0.0;
  double t_compl = 0.0;
  double t_estimate = 0.0;

  Index rank_u = 0;
  Index rank_tau = 0;
  Index rank_estimator = 0;
  int sweeps_primal = 0;
  int sweeps_compl = 0;
  bool converged_cross = false;
  bool converged_primal = false;
  bool converged_compl = false;

  std::string status = "ok";  ///< "ok" or "failed"
  std::string failed_stage;   ///< config, collocate, primal, complementary, estimate, energy_error or output
  std::string message;

  bool ok() const { return status == "ok"; }
};

/// Execute the full pipeline. Stage failures are caught and recorded; the
/// partially filled record is returned.
RunRecord run(const RunConfig& config);

/// The record together with the discrete solution and flux of a run (empty
/// when the producing stage failed).
struct RunArtifacts {
  RunRecord record;
  std::optional<TtVector> u_h;
  std::optional<BlockTtVector> tau;
};
RunArtifacts run_with_artifacts(const RunConfig& config);

/// Axes accepted by sweep: "n", "d", "kappa2", "alpha".
std::vector<std::string> sweep_axes();

/// Copy of `base` with the given axis set to `value`.
RunConfig with_axis(const RunConfig& base, const std::string& axis, double value);

/// One run per value. Runs are independent; `workers` > 1 runs them
/// concurrently without changing any result.
std::vector<RunRecord> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                             int workers = 1);

/// Least-squares slope of log(i_eff - 1) against log(n) over the successful
/// records with i_eff > 1. Empty when fewer than two such points exist.
std::optional<double> effectivity_slope(const std::vector<RunRecord>& records);

/// Output in CSV (fixed header) or JSON lines; keys are the RunRecord field names.
std::vector<std::string> record_fields();
std::string csv_header();
std::string csv_row(const RunRecord& r);
std::string json_line(const RunRecord& r);
void write_records(std::ostream& out, const std::vector<RunRecord>& records, const std::string& format);

}  // namespace ttcert
