#include "nonnormal/report.h"

#include <cstdio>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "nonnormal/errors.h"

namespace nonnormal::report {

namespace {

using Json = nlohmann::ordered_json;

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

Json echo_json(const ExperimentConfig& config) {
  Json out = Json::object();
  for (const ConfigEntry& e : config.echo()) out[e.section][e.key] = e.value;
  return out;
}

Json header(std::string_view experiment, const ExperimentConfig& config) {
  Json doc;
  doc["experiment"] = experiment;
  doc["version"] = version();
  doc["base_seed"] = config.base_seed;
  return doc;
}

Json interval(const Interval& ci) { return Json::array({ci.lo, ci.hi}); }

Json peak_json(const PeakGainResult& peak) {
  return Json{{"value", peak.value},
              {"argmax_step", peak.argmax_step},
              {"certified", peak.terminated_certified},
              {"steps_examined", peak.steps_examined}};
}

Json metrics_json(const RolloutMetrics& m) {
  return Json{{"action_variance", m.applied_input_variance},
              {"action_jitter", m.applied_input_jitter},
              {"cov_trace", m.cov_trace},
              {"j_peak", m.j_peak},
              {"state_rms_full", m.state_rms_full},
              {"control_rms", m.control_rms},
              {"accepted", m.accepted_count},
              {"diverged", m.diverged_count}};
}

Json mean_std(const MeanStd& v) { return Json{{"mean", v.mean}, {"std", v.std}}; }

std::string pm(const MeanStd& v) { return fixed(v.mean, 2) + " ± " + fixed(v.std, 2); }

}  // namespace

std::string_view version() { return NONNORMAL_VERSION; }

std::string sig6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string ci1_csv(const CI1Result& result) {
  std::string out = "alpha,kappa_v,log_kappa_v,g_peak,cov_trace_analytic,cov_trace_empirical\n";
  for (const CI1Row& r : result.rows) {
    out += sig6(r.alpha) + "," + sig6(r.kappa_v) + "," + sig6(r.log_kappa_v) + "," +
           sig6(r.g_peak) + "," + sig6(r.cov_trace_analytic) + "," +
           sig6(r.cov_trace_empirical) + "\n";
  }
  return out;
}

std::string ci2_csv(const CI2Result& result) {
  std::string out = "arm,action_variance,cov_trace_analytic,cov_trace_empirical,j_peak,g_peak\n";
  const auto row = [&](const char* name, const CI2Arm& arm, double g_peak) {
    out += std::string(name) + "," + sig6(arm.metrics.applied_input_variance) + "," +
           sig6(arm.cov_trace_analytic) + "," + sig6(arm.metrics.cov_trace) + "," +
           sig6(arm.metrics.j_peak) + "," + sig6(g_peak) + "\n";
  };
  row("white", result.white, result.g_peak_white);
  row("filtered", result.filtered, result.g_peak_filtered);
  return out;
}

std::string ci3_csv(const CI3Result& result) {
  std::string out =
      "scenario,seed,level,arm,action_variance,cov_trace,j_peak,state_rms_x,state_rms_z,"
      "state_rms_theta,state_rms_full,control_rms,diverged_count\n";
  for (const CI3MetricRow& r : result.rows) {
    out += r.scenario + "," + std::to_string(r.seed) + "," + sig6(r.level) + "," +
           std::string(quadrotor::to_string(r.arm)) + "," + sig6(r.action_variance) + "," +
           sig6(r.cov_trace) + "," + sig6(r.j_peak) + "," + sig6(r.state_rms_x) + "," +
           sig6(r.state_rms_z) + "," + sig6(r.state_rms_theta) + "," +
           sig6(r.state_rms_full) + "," + sig6(r.control_rms) + "," +
           std::to_string(r.diverged_count) + "\n";
  }
  return out;
}

std::string ci3_reductions_csv(const CI3Summary& summary) {
  std::string out = "scenario,seed,level,action_variance_pct,cov_trace_pct,j_peak_pct\n";
  for (const CI3Reduction& r : summary.reductions) {
    out += r.scenario + "," + std::to_string(r.seed) + "," + sig6(r.level) + "," +
           sig6(r.action_variance_pct) + "," + sig6(r.cov_trace_pct) + "," +
           sig6(r.j_peak_pct) + "\n";
  }
  return out;
}

std::string ci3_aggregate_csv(const CI3Summary& summary) {
  std::string out =
      "level,action_variance_pct_mean,action_variance_pct_std,cov_trace_pct_mean,"
      "cov_trace_pct_std\n";
  for (const CI3LevelAggregate& a : summary.by_level) {
    out += sig6(a.level) + "," + sig6(a.action_variance_pct.mean) + "," +
           sig6(a.action_variance_pct.std) + "," + sig6(a.cov_trace_pct.mean) + "," +
           sig6(a.cov_trace_pct.std) + "\n";
  }
  return out;
}

std::string ci3_stress_csv(const CI3Summary& summary) {
  std::string out =
      "scenario,g_peak,action_variance_pct_mean,action_variance_pct_std,cov_trace_pct_mean,"
      "cov_trace_pct_std\n";
  for (const CI3StressRow& s : summary.stress) {
    out += s.scenario + "," + sig6(s.g_peak) + "," + sig6(s.action_variance_pct.mean) + "," +
           sig6(s.action_variance_pct.std) + "," + sig6(s.cov_trace_pct.mean) + "," +
           sig6(s.cov_trace_pct.std) + "\n";
  }
  return out;
}

std::string ci1_json(const CI1Result& result, const ExperimentConfig& config) {
  Json doc = header("ci1", config);
  doc["headline"] = {
      {"corr_kappa_cov_trace", result.corr_kappa_cov},
      {"ci_kappa_cov_trace", interval(result.ci_cov)},
      {"corr_kappa_g_peak", result.corr_kappa_gpeak},
      {"ci_kappa_g_peak", interval(result.ci_gpeak)},
      {"corr_log_kappa_cov_trace", result.corr_log_kappa_cov},
      {"corr_log_kappa_g_peak", result.corr_log_kappa_gpeak},
      {"corr_kappa_cov_trace_empirical", result.corr_kappa_cov_empirical},
      {"rho_drift", result.rho_drift},
      {"eigenvalue_drift", result.controls.max_eigenvalue_drift},
  };
  Json rows = Json::array();
  for (const CI1Row& r : result.rows) {
    rows.push_back({{"alpha", r.alpha},
                    {"kappa_v", r.kappa_v},
                    {"log_kappa_v", r.log_kappa_v},
                    {"g_peak", r.g_peak},
                    {"rho", r.rho},
                    {"cov_trace_analytic", r.cov_trace_analytic},
                    {"cov_trace_empirical", r.cov_trace_empirical},
                    {"cov_trace_expected", r.cov_trace_expected}});
  }
  doc["rows"] = std::move(rows);
  doc["config"] = echo_json(config);
  return doc.dump(2) + "\n";
}

std::string ci2_json(const CI2Result& result, const ExperimentConfig& config) {
  Json doc = header("ci2", config);
  const auto arm = [](const CI2Arm& a) {
    Json j = metrics_json(a.metrics);
    j["action_variance_analytic"] = a.applied_variance_analytic;
    j["cov_trace_analytic"] = a.cov_trace_analytic;
    j["cov_trace_expected"] = a.cov_trace_expected;
    return j;
  };
  const double white_var = result.white.metrics.applied_input_variance;
  doc["headline"] = {
      {"alpha", result.alpha},
      {"rho", result.rho},
      {"kappa_v", result.kappa_v},
      {"g_peak_white", result.g_peak_white},
      {"g_peak_filtered", result.g_peak_filtered},
      {"action_variance_ratio",
       white_var > 0.0 ? result.filtered.metrics.applied_input_variance / white_var : 1.0},
      {"action_variance_reduction_pct", result.reductions.action_variance_pct},
      {"cov_trace_reduction_pct", result.reductions.cov_trace_pct},
      {"j_peak_reduction_pct", result.reductions.j_peak_pct},
  };
  doc["arms"] = {{"white", arm(result.white)}, {"filtered", arm(result.filtered)}};
  doc["config"] = echo_json(config);
  return doc.dump(2) + "\n";
}

std::string ci3_json(const CI3Result& result, const ExperimentConfig& config) {
  Json doc = header("ci3", config);
  Json diagnostics = Json::array();
  for (const CI3Diagnostic& d : result.diagnostics) {
    diagnostics.push_back({{"scenario", d.scenario},
                           {"rho", d.rho},
                           {"kappa_v", d.kappa_v},
                           {"g_peak", peak_json(d.g_peak)},
                           {"riccati_iterations", d.riccati_iterations}});
  }
  Json levels = Json::array();
  for (const CI3LevelAggregate& a : result.summary.by_level) {
    levels.push_back({{"level", a.level},
                      {"action_variance_pct", mean_std(a.action_variance_pct)},
                      {"cov_trace_pct", mean_std(a.cov_trace_pct)}});
  }
  Json stress = Json::array();
  for (const CI3StressRow& s : result.summary.stress) {
    stress.push_back({{"scenario", s.scenario},
                      {"g_peak", s.g_peak},
                      {"action_variance_pct", mean_std(s.action_variance_pct)},
                      {"cov_trace_pct", mean_std(s.cov_trace_pct)}});
  }
  std::size_t diverged = 0;
  for (const CI3MetricRow& r : result.rows) diverged += r.diverged_count;
  doc["diagnostics"] = std::move(diagnostics);
  doc["aggregate_by_level"] = std::move(levels);
  doc["stress"] = std::move(stress);
  doc["metric_rows"] = result.rows.size();
  doc["diverged_rollouts"] = diverged;
  doc["config"] = echo_json(config);
  return doc.dump(2) + "\n";
}

std::string ci1_text(const CI1Result& result) {
  std::ostringstream out;
  out << "CI-1 amplifier isolation (" << result.rows.size() << " members)\n";
  out << "  Pearson(kappa, tr Sigma) = " << fixed(result.corr_kappa_cov, 4) << "  CI ["
      << fixed(result.ci_cov.lo, 4) << ", " << fixed(result.ci_cov.hi, 4) << "]\n";
  out << "  Pearson(kappa, G_peak)   = " << fixed(result.corr_kappa_gpeak, 4) << "  CI ["
      << fixed(result.ci_gpeak.lo, 4) << ", " << fixed(result.ci_gpeak.hi, 4) << "]\n";
  out << "  Pearson(log kappa, tr Sigma) = " << fixed(result.corr_log_kappa_cov, 4)
      << ", Pearson(log kappa, G_peak) = " << fixed(result.corr_log_kappa_gpeak, 4) << "\n";
  char drift[64];
  std::snprintf(drift, sizeof drift, "%.3g", result.rho_drift);
  out << "  rho drift across sweep: " << drift << "\n\n";
  out << "     alpha    kappa_v   G_peak  trSigma  trSigma_mc  E[trSigma_mc]\n";
  for (const CI1Row& r : result.rows) {
    char line[160];
    std::snprintf(line, sizeof line, "  %8.3f %10.4f %8.4f %8.4f %11.4f %14.4f\n", r.alpha,
                  r.kappa_v, r.g_peak, r.cov_trace_analytic, r.cov_trace_empirical,
                  r.cov_trace_expected);
    out << line;
  }
  return out.str();
}

std::string ci2_text(const CI2Result& result) {
  std::ostringstream out;
  char line[200];
  out << "CI-2 source-only intervention (alpha = " << sig6(result.alpha)
      << ", rho = " << sig6(result.rho) << ", kappa_v = " << sig6(result.kappa_v) << ")\n";
  out << "  arm         act.var   tr Sigma (mc)  tr Sigma (stat)   J_peak   G_peak\n";
  const auto row = [&](const char* name, const CI2Arm& a, double g) {
    std::snprintf(line, sizeof line, "  %-9s %9.5f %15.4f %16.4f %8.4f %8.4f\n", name,
                  a.metrics.applied_input_variance, a.metrics.cov_trace,
                  a.cov_trace_analytic, a.metrics.j_peak, g);
    out << line;
  };
  row("white", result.white, result.g_peak_white);
  row("filtered", result.filtered, result.g_peak_filtered);
  std::snprintf(line, sizeof line,
                "  reductions: action %.2f%%, covariance %.2f%%, J_peak %.2f%%\n",
                result.reductions.action_variance_pct, result.reductions.cov_trace_pct,
                result.reductions.j_peak_pct);
  out << line;
  return out.str();
}

std::string ci3_text(const CI3Result& result) {
  std::ostringstream out;
  char line[200];
  out << "CI-3 quadrotor bridge\n  local diagnostics (transient_raw):\n";
  for (const CI3Diagnostic& d : result.diagnostics) {
    std::snprintf(line, sizeof line, "    %-17s rho %.4f  kappa_v %9.3f  G_peak %.3f%s\n",
                  d.scenario.c_str(), d.rho, d.kappa_v, d.g_peak.value,
                  d.g_peak.terminated_certified ? "" : " (uncertified)");
    out << line;
  }
  out << "\n  aggregate reductions by level (mean ± std over seeds):\n";
  for (const CI3LevelAggregate& a : result.summary.by_level) {
    out << "    level " << fixed(a.level, 2) << ": act. " << pm(a.action_variance_pct)
        << " %, cov. " << pm(a.cov_trace_pct) << " %\n";
  }
  out << "\n  Scen. & G_peak & Δ act. [%] & Δ cov. [%] \\\\\n";
  for (const CI3StressRow& s : result.summary.stress) {
    out << "  " << s.scenario << " & " << fixed(s.g_peak, 2) << " & "
        << pm(s.action_variance_pct) << " & " << pm(s.cov_trace_pct) << " \\\\\n";
  }
  return out.str();
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
  }
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path)
    : path_(path), out_(std::make_shared<std::ofstream>(path, std::ios::binary | std::ios::trunc)) {
  if (!*out_) throw IoError("cannot open " + path.string() + " for writing");
}

LabeledTrajectorySink TrajectoryWriter::sink() {
  return [this](const std::string& label, std::size_t rollout, const Matrix& states,
                const Signal& raw, const Signal& applied) {
    write(label, rollout, states, raw, applied);
  };
}

void TrajectoryWriter::write(const std::string& label, std::size_t rollout,
                             const Matrix& states, const Signal& raw, const Signal& applied) {
  std::ofstream& out = *out_;
  const Eigen::Index n = states.cols();
  const Eigen::Index m = raw.cols();
  if (!header_written_) {
    out << "label,rollout,t";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
    for (Eigen::Index j = 0; j < m; ++j) out << ",raw" << j;
    for (Eigen::Index j = 0; j < m; ++j) out << ",applied" << j;
    out << "\n";
    header_written_ = true;
  }
  for (Eigen::Index t = 0; t < states.rows(); ++t) {
    out << label << "," << rollout << "," << t;
    for (Eigen::Index i = 0; i < n; ++i) out << "," << sig6(states(t, i));
    const bool has_input = t < raw.rows();
    for (Eigen::Index j = 0; j < m; ++j) out << "," << (has_input ? sig6(raw(t, j)) : "");
    for (Eigen::Index j = 0; j < m; ++j) out << "," << (has_input ? sig6(applied(t, j)) : "");
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path_.string());
}

}  // namespace nonnormal::report
