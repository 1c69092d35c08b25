#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>

#include "nonnormal/config.h"
#include "nonnormal/experiments.h"

namespace nonnormal::report {

/// Library version baked in at build time.
std::string_view version();

/// Six significant digits, the CSV number format.
std::string sig6(double value);

// Row-level CSVs. Column order is part of the interface.
//   ci1.csv  alpha,kappa_v,log_kappa_v,g_peak,cov_trace_analytic,cov_trace_empirical
//   ci2.csv  arm,action_variance,cov_trace_analytic,cov_trace_empirical,j_peak,g_peak
//   ci3.csv  scenario,seed,level,arm,action_variance,cov_trace,j_peak,state_rms_x,
//            state_rms_z,state_rms_theta,state_rms_full,control_rms,diverged_count
std::string ci1_csv(const CI1Result& result);
std::string ci2_csv(const CI2Result& result);
std::string ci3_csv(const CI3Result& result);
//   ci3_reductions.csv  scenario,seed,level,action_variance_pct,cov_trace_pct,j_peak_pct
//   ci3_aggregate.csv   level,action_variance_pct_mean,action_variance_pct_std,
//                       cov_trace_pct_mean,cov_trace_pct_std
//   ci3_stress.csv      scenario,g_peak,action_variance_pct_mean,action_variance_pct_std,
//                       cov_trace_pct_mean,cov_trace_pct_std
std::string ci3_reductions_csv(const CI3Summary& summary);
std::string ci3_aggregate_csv(const CI3Summary& summary);
std::string ci3_stress_csv(const CI3Summary& summary);

/// Summary documents: headline numbers, seed, config echo and version.
std::string ci1_json(const CI1Result& result, const ExperimentConfig& config);
std::string ci2_json(const CI2Result& result, const ExperimentConfig& config);
std::string ci3_json(const CI3Result& result, const ExperimentConfig& config);

std::string ci1_text(const CI1Result& result);
std::string ci2_text(const CI2Result& result);
/// Includes the stress-case table: Scen. & G_peak & Δ act. [%] & Δ cov. [%].
std::string ci3_text(const CI3Result& result);

/// Throws IoError if the directory cannot be created or is not writable.
void ensure_directory(const std::filesystem::path& dir);
/// Throws IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

/// CSV sink for trajectories: label,rollout,t,x0..,raw0..,applied0..
/// Input columns are empty on the final state row.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);

  LabeledTrajectorySink sink();
  void write(const std::string& label, std::size_t rollout, const Matrix& states,
             const Signal& raw, const Signal& applied);

 private:
  std::filesystem::path path_;
  std::shared_ptr<std::ofstream> out_;
  bool header_written_ = false;
};

}  // namespace nonnormal::report
