// Command-line runner: smd run|certify|flow <config>, smd list-problems.
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "smd/errors.hpp"
#include "smd/harness.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_dir;
  int threads = 1;
};

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("config", flags.config, "experiment configuration (JSON)")->required();
  cmd->add_option("--seed-override", flags.seed_override, "run a single seed instead of the configured list");
  cmd->add_option("--out-dir", flags.out_dir, "output directory (overrides the config)");
  cmd->add_option("--threads", flags.threads, "worker threads; SMD_THREADS takes precedence")->check(CLI::PositiveNumber);
}

int execute(const Flags& flags, std::set<smd::JobKind> allowed, const std::string& verb) {
  smd::ExperimentConfig config;
  try {
    config = smd::load_config(flags.config);
  } catch (const smd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return smd::kExitConfigError;
  }

  smd::RunContext ctx;
  ctx.threads = smd::resolve_threads(flags.threads);
  ctx.seed_override = flags.seed_override;
  if (flags.out_dir) ctx.out_dir = *flags.out_dir;
  for (auto job : config.jobs) {
    if (allowed.contains(job)) ctx.only.insert(job);
  }
  if (ctx.only.empty()) {
    std::cerr << "config error at jobs: no job applicable to '" << verb << "'\n";
    return smd::kExitConfigError;
  }

  try {
    const smd::SummaryStats summary = smd::run_experiment(config, ctx);
    for (const auto& e : summary.errors) std::cerr << "job failed: " << e << '\n';
    std::cout << "wrote " << (ctx.out_dir.value_or(config.outputs) / "summary.json").string() << '\n';
    return summary.errors.empty() ? smd::kExitOk : smd::kExitJobFailure;
  } catch (const smd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return smd::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "job failed: " << e.what() << '\n';
    return smd::kExitJobFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using smd::JobKind;
  CLI::App app{"stochastic mirror descent laboratory"};
  app.require_subcommand(1);

  Flags run_flags, certify_flags, flow_flags;
  auto* run_cmd = app.add_subcommand("run", "SMD runs (run, finite-hit jobs)");
  add_common(run_cmd, run_flags);
  auto* certify_cmd = app.add_subcommand("certify", "coherence certification and sharpness jobs");
  add_common(certify_cmd, certify_flags);
  auto* flow_cmd = app.add_subcommand("flow", "mean dynamics and asymptotic pseudotrajectory jobs");
  add_common(flow_cmd, flow_flags);
  auto* list_cmd = app.add_subcommand("list-problems", "print the built-in problem names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? smd::kExitOk : smd::kExitConfigError;
  }

  if (*list_cmd) {
    for (const auto& name : smd::problem_names()) std::cout << name << '\n';
    return smd::kExitOk;
  }
  if (*run_cmd) return execute(run_flags, {JobKind::Run, JobKind::FiniteHit}, "run");
  if (*certify_cmd) {
    return execute(certify_flags, {JobKind::CertifyVc, JobKind::CertifyLvc, JobKind::Sharpness}, "certify");
  }
  return execute(flow_flags, {JobKind::Flow, JobKind::Apt}, "flow");
}
