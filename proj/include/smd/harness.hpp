#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "smd/coherence.hpp"
#include "smd/dynamics.hpp"
#include "smd/problems.hpp"
#include "smd/regularizer.hpp"
#include "smd/schedule.hpp"
#include "smd/smd.hpp"

namespace smd {

inline constexpr const char* kTraceSchema = "smd-trace/1";
inline constexpr const char* kSummarySchema = "smd-summary/1";

enum class JobKind { Run, CertifyVc, CertifyLvc, Sharpness, Flow, Apt, FiniteHit };
std::string to_string(JobKind job);
JobKind job_from_string(const std::string& name);

struct JobParams {
  double hit_radius = 0.05;
  double fenchel_delta = 0.05;
  long vc_samples = 10000;
  long constants_samples = 10000;

  std::optional<Vector> lvc_candidate;
  double lvc_radius = 0.1;
  std::vector<double> lvc_radii;
  long lvc_samples = 10000;

  std::optional<Vector> sharpness_candidate;
  long sharpness_dirs = 1000;

  std::optional<Vector> flow_y0;
  double flow_T = 20.0;
  double flow_dt = kDefaultFlowStep;

  std::vector<double> apt_times{10.0, 50.0, 200.0, 800.0};
  double apt_T = 5.0;
  double apt_dt = kDefaultFlowStep;

  std::optional<Vector> finite_hit_vertex;
  long tail_window = 1000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  std::string regularizer = "euclidean";
  StepSchedule schedule{0.5, 0.8, 0};
  long n_iters = 1000;
  std::vector<std::uint64_t> seeds{1};
  NoiseModel noise = NoiseModel::none();
  long record_every = 1;
  std::optional<Vector> y0;
  std::filesystem::path outputs = "smd-out";
  std::vector<JobKind> jobs{JobKind::Run};
  JobParams params;
};

/// Parses and validates a configuration document. Throws ConfigError naming
/// the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError if the configuration violates an invariant.
void validate_config(const ExperimentConfig& config);

struct ProblemConstants {
  double R = 0.0;
  double B_hat = 0.0;
  double noise_rms = 0.0;
  double Vstar_hat = 0.0;
};

/// R from the region, B_hat = max sampled ||grad g||_*, and
/// Vstar_hat = max(2 B_hat, sqrt(E ||zeta||_*^2)).
ProblemConstants estimate_constants(const StochasticProblem& problem, long n_samples, CounterRng& rng,
                                    NormKind norm = NormKind::L2);

struct Quantiles {
  double q10 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
};

/// Linear-interpolation quantiles of a nonempty sample.
Quantiles quantiles(std::vector<double> values);
double median(std::vector<double> values);

struct SeedOutcome {
  std::uint64_t seed = 0;
  double final_dist = 0.0;
  double ergodic_dist = 0.0;
  long hits = 0;
  long fenchel_hits = 0;
};

struct SummaryStats {
  std::vector<SeedOutcome> runs;
  std::optional<Quantiles> final_dist_quantiles;
  std::vector<std::pair<std::uint64_t, std::optional<long>>> finite_hits;
  std::vector<std::pair<std::uint64_t, std::vector<double>>> apt;
  ProblemConstants constants;
  std::optional<double> gamma_hat;
  std::optional<Verdict> vc_verdict;
  std::optional<Verdict> lvc_verdict;
  /// Certification, sharpness and flow reports keyed by job name.
  nlohmann::json reports = nlohmann::json::object();
  std::vector<std::string> errors;

  nlohmann::json to_json(const ExperimentConfig& config) const;
};

struct RunContext {
  int threads = 1;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed_override;
  /// Restrict to these jobs; empty means every configured job.
  std::set<JobKind> only;
};

/// Executes every (job, seed) pair, writes per-job CSV/JSON artifacts plus
/// summary.json into the output directory. Job failures are collected in
/// SummaryStats::errors.
SummaryStats run_experiment(const ExperimentConfig& config, const RunContext& context = {});

nlohmann::json report_to_json(const CoherenceReport& report);
nlohmann::json report_to_json(const SharpnessReport& report);

/// Trace CSV: "n,x_1..x_d,dist,fenchel"; recorded samples then the final state.
void write_trace_csv(std::ostream& os, const RunTrace& trace);
std::string trace_csv_header(int dim);

/// Exit codes of the command-line runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitJobFailure = 3;

/// SMD_THREADS when set and valid, otherwise `requested`.
int resolve_threads(int requested);

}  // namespace smd
