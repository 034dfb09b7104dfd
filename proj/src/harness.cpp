#include "smd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "smd/errors.hpp"

namespace smd {

using nlohmann::json;

namespace {

constexpr std::uint64_t kConstantsStream = 101;
constexpr std::uint64_t kCertifyStream = 202;

const std::map<std::string, JobKind>& job_table() {
  static const std::map<std::string, JobKind> table{
      {"run", JobKind::Run},           {"certify-vc", JobKind::CertifyVc}, {"certify-lvc", JobKind::CertifyLvc},
      {"sharpness", JobKind::Sharpness}, {"flow", JobKind::Flow},         {"apt", JobKind::Apt},
      {"finite-hit", JobKind::FiniteHit},
  };
  return table;
}

// ---- config reading ------------------------------------------------------

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(join(path, key), "unknown field");
    }
  }
}

const json& require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  return v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<long>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

std::vector<double> as_number_list(const json& v, const std::string& path) {
  const Vector x = as_vector(v, path);
  return {x.data(), x.data() + x.size()};
}

template <typename Fn>
void with_field(const json& obj, const char* key, const std::string& path, Fn&& fn) {
  if (auto it = obj.find(key); it != obj.end()) fn(*it, join(path, key));
}

ProblemSpec parse_problem(const json& v, const std::string& path) {
  if (v.is_string()) return ProblemSpec{v.get<std::string>(), {}, {}};
  require_object(v, path);
  reject_unknown(v, path, {"name", "dim", "c"});
  ProblemSpec spec;
  if (!v.contains("name")) throw ConfigError(join(path, "name"), "missing");
  spec.name = as_string(v["name"], join(path, "name"));
  with_field(v, "dim", path, [&](const json& f, const std::string& p) {
    const long d = as_integer(f, p);
    if (d < 1) throw ConfigError(p, "must be >= 1");
    spec.dim = static_cast<int>(d);
  });
  with_field(v, "c", path, [&](const json& f, const std::string& p) { spec.cost = as_vector(f, p); });
  return spec;
}

NoiseModel parse_noise(const json& v, const std::string& path) {
  require_object(v, path);
  reject_unknown(v, path, {"kind", "sigma", "halfwidth"});
  const std::string kind = v.contains("kind") ? as_string(v["kind"], join(path, "kind")) : "none";
  try {
    if (kind == "none") return NoiseModel::none();
    if (kind == "gaussian") {
      if (!v.contains("sigma")) throw ConfigError(join(path, "sigma"), "missing");
      return NoiseModel::gaussian(as_number(v["sigma"], join(path, "sigma")));
    }
    if (kind == "uniform") {
      if (!v.contains("halfwidth")) throw ConfigError(join(path, "halfwidth"), "missing");
      return NoiseModel::uniform(as_number(v["halfwidth"], join(path, "halfwidth")));
    }
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "kind"), "unknown noise kind '" + kind + "'");
}

void parse_params(const json& v, const std::string& path, JobParams& p) {
  require_object(v, path);
  reject_unknown(v, path,
                 {"hit_radius", "fenchel_delta", "vc_samples", "constants_samples", "lvc", "sharpness", "flow", "apt",
                  "finite_hit"});
  with_field(v, "hit_radius", path, [&](const json& f, const std::string& q) { p.hit_radius = as_number(f, q); });
  with_field(v, "fenchel_delta", path, [&](const json& f, const std::string& q) { p.fenchel_delta = as_number(f, q); });
  with_field(v, "vc_samples", path, [&](const json& f, const std::string& q) { p.vc_samples = as_integer(f, q); });
  with_field(v, "constants_samples", path,
             [&](const json& f, const std::string& q) { p.constants_samples = as_integer(f, q); });
  with_field(v, "lvc", path, [&](const json& o, const std::string& q) {
    require_object(o, q);
    reject_unknown(o, q, {"candidate", "radius", "radii", "samples"});
    with_field(o, "candidate", q, [&](const json& f, const std::string& r) { p.lvc_candidate = as_vector(f, r); });
    with_field(o, "radius", q, [&](const json& f, const std::string& r) { p.lvc_radius = as_number(f, r); });
    with_field(o, "radii", q, [&](const json& f, const std::string& r) { p.lvc_radii = as_number_list(f, r); });
    with_field(o, "samples", q, [&](const json& f, const std::string& r) { p.lvc_samples = as_integer(f, r); });
  });
  with_field(v, "sharpness", path, [&](const json& o, const std::string& q) {
    require_object(o, q);
    reject_unknown(o, q, {"candidate", "n_dirs"});
    with_field(o, "candidate", q, [&](const json& f, const std::string& r) { p.sharpness_candidate = as_vector(f, r); });
    with_field(o, "n_dirs", q, [&](const json& f, const std::string& r) { p.sharpness_dirs = as_integer(f, r); });
  });
  with_field(v, "flow", path, [&](const json& o, const std::string& q) {
    require_object(o, q);
    reject_unknown(o, q, {"y0", "T", "dt"});
    with_field(o, "y0", q, [&](const json& f, const std::string& r) { p.flow_y0 = as_vector(f, r); });
    with_field(o, "T", q, [&](const json& f, const std::string& r) { p.flow_T = as_number(f, r); });
    with_field(o, "dt", q, [&](const json& f, const std::string& r) { p.flow_dt = as_number(f, r); });
  });
  with_field(v, "apt", path, [&](const json& o, const std::string& q) {
    require_object(o, q);
    reject_unknown(o, q, {"t", "T", "dt"});
    with_field(o, "t", q, [&](const json& f, const std::string& r) { p.apt_times = as_number_list(f, r); });
    with_field(o, "T", q, [&](const json& f, const std::string& r) { p.apt_T = as_number(f, r); });
    with_field(o, "dt", q, [&](const json& f, const std::string& r) { p.apt_dt = as_number(f, r); });
  });
  with_field(v, "finite_hit", path, [&](const json& o, const std::string& q) {
    require_object(o, q);
    reject_unknown(o, q, {"vertex", "tail_window"});
    with_field(o, "vertex", q, [&](const json& f, const std::string& r) { p.finite_hit_vertex = as_vector(f, r); });
    with_field(o, "tail_window", q, [&](const json& f, const std::string& r) { p.tail_window = as_integer(f, r); });
  });
}

// ---- output helpers ------------------------------------------------------

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error("failed writing " + path.string());
}

template <typename Fn>
void write_stream(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  fn(os);
  if (!os) throw Error("failed writing " + path.string());
}

json quantiles_json(const Quantiles& q) {
  return {{"q10", q.q10}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"q90", q.q90}};
}

struct Task {
  JobKind job;
  std::optional<std::uint64_t> seed;
};

struct TaskResult {
  std::optional<SeedOutcome> run;
  std::optional<std::optional<long>> n0;
  std::optional<std::vector<double>> apt;
  json report;
  std::optional<double> gamma_hat;
  std::optional<Verdict> verdict;
  std::string error;
};

std::string seed_suffix(std::uint64_t seed) { return "_seed" + std::to_string(seed); }

}  // namespace

std::string to_string(JobKind job) {
  for (const auto& [name, kind] : job_table()) {
    if (kind == job) return name;
  }
  return "unknown";
}

JobKind job_from_string(const std::string& name) {
  const auto& table = job_table();
  if (auto it = table.find(name); it != table.end()) return it->second;
  throw ConfigError("jobs", "unknown job '" + name + "'");
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "<root>");
  reject_unknown(doc, "",
                 {"name", "problem", "regularizer", "schedule", "n_iters", "seeds", "noise", "record_every", "y0",
                  "outputs", "jobs", "params"});
  ExperimentConfig cfg;
  with_field(doc, "name", "", [&](const json& f, const std::string& p) { cfg.name = as_string(f, p); });
  if (!doc.contains("problem")) throw ConfigError("problem", "missing");
  cfg.problem = parse_problem(doc["problem"], "problem");
  with_field(doc, "regularizer", "", [&](const json& f, const std::string& p) { cfg.regularizer = as_string(f, p); });
  with_field(doc, "schedule", "", [&](const json& f, const std::string& p) {
    require_object(f, p);
    reject_unknown(f, p, {"base_alpha", "beta", "offset"});
    with_field(f, "base_alpha", p, [&](const json& v, const std::string& q) { cfg.schedule.base_alpha = as_number(v, q); });
    with_field(f, "beta", p, [&](const json& v, const std::string& q) { cfg.schedule.beta = as_number(v, q); });
    with_field(f, "offset", p, [&](const json& v, const std::string& q) { cfg.schedule.offset = as_integer(v, q); });
  });
  with_field(doc, "n_iters", "", [&](const json& f, const std::string& p) { cfg.n_iters = as_integer(f, p); });
  with_field(doc, "seeds", "", [&](const json& f, const std::string& p) {
    if (!f.is_array()) throw ConfigError(p, "expected an array of non-negative integers");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string q = p + "[" + std::to_string(i) + "]";
      const long s = as_integer(f[i], q);
      if (s < 0) throw ConfigError(q, "seed must be >= 0");
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  });
  with_field(doc, "noise", "", [&](const json& f, const std::string& p) { cfg.noise = parse_noise(f, p); });
  with_field(doc, "record_every", "", [&](const json& f, const std::string& p) { cfg.record_every = as_integer(f, p); });
  with_field(doc, "y0", "", [&](const json& f, const std::string& p) { cfg.y0 = as_vector(f, p); });
  with_field(doc, "outputs", "", [&](const json& f, const std::string& p) { cfg.outputs = as_string(f, p); });
  with_field(doc, "jobs", "", [&](const json& f, const std::string& p) {
    if (!f.is_array()) throw ConfigError(p, "expected an array of job names");
    cfg.jobs.clear();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string q = p + "[" + std::to_string(i) + "]";
      const std::string name = as_string(f[i], q);
      if (!job_table().contains(name)) throw ConfigError(q, "unknown job '" + name + "'");
      cfg.jobs.push_back(job_table().at(name));
    }
  });
  with_field(doc, "params", "", [&](const json& f, const std::string& p) { parse_params(f, p, cfg.params); });
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

void validate_config(const ExperimentConfig& cfg) {
  const ScheduleReport sched = validate_schedule(cfg.schedule, 0);
  if (!sched.passes) throw ConfigError("schedule", sched.reason);
  if (cfg.n_iters < 0) throw ConfigError("n_iters", "must be >= 0");
  if (cfg.record_every < 1) throw ConfigError("record_every", "must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("seeds", "must be nonempty");
  {
    std::set<std::uint64_t> unique(cfg.seeds.begin(), cfg.seeds.end());
    if (unique.size() != cfg.seeds.size()) throw ConfigError("seeds", "must be distinct");
  }
  if (cfg.jobs.empty()) throw ConfigError("jobs", "must be nonempty");

  StochasticProblem problem = [&] {
    try {
      return make_problem(cfg.problem);
    } catch (const Error& e) {
      throw ConfigError("problem", e.what());
    }
  }();
  Regularizer h = [&] {
    try {
      return Regularizer::from_name(cfg.regularizer);
    } catch (const Error& e) {
      throw ConfigError("regularizer", e.what());
    }
  }();
  if (!h.supports(problem.region)) {
    throw ConfigError("regularizer", h.name() + " is not supported on " + problem.region.describe());
  }
  const int d = problem.region.dim();
  auto check_dim = [d](const std::optional<Vector>& v, const std::string& path) {
    if (v && v->size() != d) throw ConfigError(path, "expected " + std::to_string(d) + " entries");
  };
  auto check_point = [&](const std::optional<Vector>& v, const std::string& path) {
    check_dim(v, path);
    if (v && !problem.region.contains(*v)) throw ConfigError(path, "point is not feasible");
  };
  check_dim(cfg.y0, "y0");
  check_dim(cfg.params.flow_y0, "params.flow.y0");
  check_point(cfg.params.lvc_candidate, "params.lvc.candidate");
  check_point(cfg.params.sharpness_candidate, "params.sharpness.candidate");
  check_point(cfg.params.finite_hit_vertex, "params.finite_hit.vertex");
  const JobParams& p = cfg.params;
  if (!(p.hit_radius > 0.0)) throw ConfigError("params.hit_radius", "must be > 0");
  if (!(p.fenchel_delta > 0.0)) throw ConfigError("params.fenchel_delta", "must be > 0");
  if (p.vc_samples < 1) throw ConfigError("params.vc_samples", "must be >= 1");
  if (p.constants_samples < 1) throw ConfigError("params.constants_samples", "must be >= 1");
  if (!(p.lvc_radius > 0.0)) throw ConfigError("params.lvc.radius", "must be > 0");
  if (p.lvc_samples < 1) throw ConfigError("params.lvc.samples", "must be >= 1");
  if (p.sharpness_dirs < 0) throw ConfigError("params.sharpness.n_dirs", "must be >= 0");
  if (!(p.flow_T > 0.0)) throw ConfigError("params.flow.T", "must be > 0");
  if (!(p.flow_dt > 0.0)) throw ConfigError("params.flow.dt", "must be > 0");
  if (!(p.apt_T > 0.0)) throw ConfigError("params.apt.T", "must be > 0");
  if (!(p.apt_dt > 0.0)) throw ConfigError("params.apt.dt", "must be > 0");
  if (p.tail_window < 1) throw ConfigError("params.finite_hit.tail_window", "must be >= 1");
}

ProblemConstants estimate_constants(const StochasticProblem& problem, long n_samples, CounterRng& rng, NormKind norm) {
  ProblemConstants c;
  c.R = problem.region.radius_bound(norm);
  double second_moment = 0.0;
  long drawn = 0;
  for (long k = 0; k < n_samples; ++k) {
    auto x = problem.region.sample_uniform(rng);
    if (!x) continue;
    c.B_hat = std::max(c.B_hat, dual_norm(problem.mean_gradient(*x), norm));
    const double z = dual_norm(problem.noise.sample(problem.region.dim(), rng), norm);
    second_moment += z * z;
    ++drawn;
  }
  c.noise_rms = drawn > 0 ? std::sqrt(second_moment / static_cast<double>(drawn)) : 0.0;
  c.Vstar_hat = std::max(2.0 * c.B_hat, c.noise_rms);
  return c;
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw DomainError("quantiles of an empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.10), at(0.25), at(0.50), at(0.75), at(0.90)};
}

double median(std::vector<double> values) { return quantiles(std::move(values)).median; }

std::string trace_csv_header(int dim) {
  std::string out = "n";
  for (int i = 1; i <= dim; ++i) out += ",x_" + std::to_string(i);
  out += ",dist,fenchel";
  return out;
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  const int d = trace.iterates.empty() ? static_cast<int>(trace.final_iterate.size())
                                       : static_cast<int>(trace.iterates.front().size());
  os << trace_csv_header(d) << '\n';
  const auto precision = os.precision(17);
  auto row = [&](long n, const Vector& x, double dist, double fenchel) {
    os << n;
    for (int i = 0; i < d; ++i) os << ',' << x[i];
    os << ',' << dist << ',' << fenchel << '\n';
  };
  for (std::size_t k = 0; k < trace.size(); ++k) row(trace.indices[k], trace.iterates[k], trace.dist[k], trace.fenchel[k]);
  const bool final_recorded = !trace.indices.empty() && trace.indices.back() == trace.n_iters;
  if (!final_recorded) row(trace.n_iters, trace.final_iterate, trace.final_dist, trace.final_fenchel);
  os.precision(precision);
}

json report_to_json(const CoherenceReport& r) {
  json out{{"verdict", to_string(r.verdict)},
           {"samples_tested", r.samples_tested},
           {"pairs_tested", r.pairs_tested},
           {"min_inner_product", r.min_inner_product},
           {"tolerance", r.tolerance},
           {"witness", nullptr},
           {"equality_violations", json::array()}};
  if (r.witness) {
    out["witness"] = {{"x", vector_json(r.witness->x)}, {"x_star", vector_json(r.witness->x_star)}, {"value", r.witness->value}};
  }
  for (const auto& v : r.equality_violations) out["equality_violations"].push_back(vector_json(v));
  if (!r.note.empty()) out["note"] = r.note;
  return out;
}

json report_to_json(const SharpnessReport& r) {
  return {{"is_sharp", r.is_sharp},
          {"gamma_hat", r.gamma_hat},
          {"directions_tested", r.directions_tested},
          {"worst_direction", r.worst_direction.size() ? vector_json(r.worst_direction) : json(nullptr)}};
}

json SummaryStats::to_json(const ExperimentConfig& config) const {
  json out;
  out["schema"] = kSummarySchema;
  out["trace_schema"] = kTraceSchema;
  out["experiment"] = config.name;
  out["problem"] = config.problem.name;
  out["regularizer"] = config.regularizer;
  out["schedule"] = {{"base_alpha", config.schedule.base_alpha}, {"beta", config.schedule.beta}, {"offset", config.schedule.offset}};
  out["noise"] = config.noise.describe();
  out["n_iters"] = config.n_iters;
  out["constants"] = {{"R", constants.R}, {"B_hat", constants.B_hat}, {"noise_rms", constants.noise_rms}, {"Vstar_hat", constants.Vstar_hat}};
  if (!runs.empty()) {
    json per_seed = json::array();
    for (const auto& r : runs) {
      per_seed.push_back({{"seed", r.seed}, {"final_dist", r.final_dist}, {"ergodic_dist", r.ergodic_dist},
                          {"hits", r.hits}, {"fenchel_hits", r.fenchel_hits}});
    }
    out["run"] = {{"per_seed", per_seed}};
    if (final_dist_quantiles) out["run"]["final_dist_quantiles"] = quantiles_json(*final_dist_quantiles);
  }
  if (!finite_hits.empty()) {
    json per_seed = json::array();
    std::vector<double> n0s;
    for (const auto& [seed, n0] : finite_hits) {
      per_seed.push_back({{"seed", seed}, {"n0", n0 ? json(*n0) : json(nullptr)}});
      if (n0) n0s.push_back(static_cast<double>(*n0));
    }
    out["finite_hit"] = {{"per_seed", per_seed}, {"present", n0s.size()}, {"total", finite_hits.size()}};
    if (!n0s.empty()) out["finite_hit"]["n0_quantiles"] = quantiles_json(quantiles(n0s));
  }
  if (!apt.empty()) {
    json per_seed = json::array();
    for (const auto& [seed, dev] : apt) per_seed.push_back({{"seed", seed}, {"deviation", dev}});
    std::vector<double> medians;
    for (std::size_t i = 0; i < apt.front().second.size(); ++i) {
      std::vector<double> column;
      for (const auto& [seed, dev] : apt) column.push_back(dev[i]);
      medians.push_back(median(column));
    }
    out["apt"] = {{"t", config.params.apt_times}, {"T", config.params.apt_T}, {"median", medians}, {"per_seed", per_seed}};
  }
  if (gamma_hat) out["gamma_hat"] = *gamma_hat;
  if (!reports.empty()) out["reports"] = reports;
  out["errors"] = errors;
  return out;
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("SMD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1, requested);
}

SummaryStats run_experiment(const ExperimentConfig& config_in, const RunContext& context) {
  ExperimentConfig config = config_in;
  if (context.seed_override) config.seeds = {*context.seed_override};
  validate_config(config);

  const std::filesystem::path out_dir = context.out_dir.value_or(config.outputs);
  std::filesystem::create_directories(out_dir);

  const StochasticProblem problem = make_problem(config.problem).with_noise(config.noise);
  const Regularizer h = Regularizer::from_name(config.regularizer);
  const JobParams& params = config.params;
  const std::uint64_t base_seed = config.seeds.front();

  std::vector<Task> tasks;
  for (JobKind job : config.jobs) {
    if (!context.only.empty() && !context.only.contains(job)) continue;
    const bool seeded = job == JobKind::Run || job == JobKind::Apt || job == JobKind::FiniteHit;
    if (seeded) {
      for (auto s : config.seeds) tasks.push_back({job, s});
    } else {
      tasks.push_back({job, std::nullopt});
    }
  }

  auto run_options = [&](std::uint64_t seed) {
    RunOptions opts;
    opts.n_iters = config.n_iters;
    opts.seed = seed;
    opts.record_every = config.record_every;
    opts.y0 = config.y0;
    return opts;
  };

  auto execute = [&](const Task& task) -> TaskResult {
    TaskResult result;
    CounterRng certify_rng = CounterRng(base_seed).split(kCertifyStream);
    switch (task.job) {
      case JobKind::Run: {
        HittingTimeDetector hits(problem.minimizers, params.hit_radius, h.paired_norm());
        FenchelZoneDetector zone(h, problem.region, problem.minimizers, params.fenchel_delta);
        RunOptions opts = run_options(*task.seed);
        opts.observer = [&](long n, const Vector& x, const Vector& y) {
          hits.observe(n, x);
          zone.observe(n, y);
        };
        const RunTrace trace = run(problem, h, config.schedule, opts);
        write_stream(out_dir / ("run" + seed_suffix(*task.seed) + ".csv"),
                     [&](std::ostream& os) { write_trace_csv(os, trace); });
        result.run = SeedOutcome{*task.seed, trace.final_dist, trace.ergodic_dist,
                                 static_cast<long>(hits.hits().size()), static_cast<long>(zone.hits().size())};
        break;
      }
      case JobKind::FiniteHit: {
        const Vector vertex = params.finite_hit_vertex.value_or(problem.minimizers.front());
        FiniteHitDetector detector(vertex, params.tail_window);
        RunOptions opts = run_options(*task.seed);
        opts.observer = std::ref(detector);
        const RunTrace trace = run(problem, h, config.schedule, opts);
        write_stream(out_dir / ("finite_hit" + seed_suffix(*task.seed) + ".csv"),
                     [&](std::ostream& os) { write_trace_csv(os, trace); });
        result.n0 = detector.n0();
        break;
      }
      case JobKind::Apt: {
        const InterpolatedProcess process =
            InterpolatedProcess::record(problem, h, config.schedule, config.n_iters, *task.seed, config.y0);
        std::vector<double> dev = apt_deviation(process, problem, h, params.apt_times, params.apt_T, params.apt_dt);
        write_stream(out_dir / ("apt" + seed_suffix(*task.seed) + ".csv"), [&](std::ostream& os) {
          os << "t,deviation\n";
          os.precision(17);
          for (std::size_t i = 0; i < dev.size(); ++i) os << params.apt_times[i] << ',' << dev[i] << '\n';
        });
        result.apt = std::move(dev);
        break;
      }
      case JobKind::CertifyVc: {
        const CoherenceReport report = certify_vc(problem, params.vc_samples, certify_rng);
        result.report = report_to_json(report);
        result.verdict = report.verdict;
        write_text(out_dir / "certify_vc.json", result.report.dump(2) + "\n");
        break;
      }
      case JobKind::CertifyLvc: {
        const PrimalPoint candidate(problem.region, params.lvc_candidate.value_or(problem.minimizers.front()));
        const CoherenceReport report = certify_lvc(problem, candidate, params.lvc_radius, params.lvc_samples, certify_rng);
        result.report = report_to_json(report);
        result.report["radius"] = params.lvc_radius;
        result.report["candidate"] = vector_json(candidate.coords());
        if (!params.lvc_radii.empty()) {
          auto basin = lvc_basin_radius(problem, candidate, params.lvc_radii, params.lvc_samples, certify_rng);
          result.report["largest_passing_radius"] = basin ? json(*basin) : json(nullptr);
        }
        result.verdict = report.verdict;
        write_text(out_dir / "certify_lvc.json", result.report.dump(2) + "\n");
        break;
      }
      case JobKind::Sharpness: {
        const PrimalPoint candidate(problem.region, params.sharpness_candidate.value_or(problem.minimizers.front()));
        const SharpnessReport report = check_sharpness(problem, candidate, params.sharpness_dirs, certify_rng);
        result.report = report_to_json(report);
        result.gamma_hat = report.gamma_hat;
        write_text(out_dir / "sharpness.json", result.report.dump(2) + "\n");
        break;
      }
      case JobKind::Flow: {
        const Vector y0 = params.flow_y0.value_or(config.y0.value_or(Vector::Zero(problem.region.dim())));
        const FlowTrajectory traj = integrate_flow(problem, h, y0, params.flow_T, params.flow_dt);
        const FenchelProfile profile = fenchel_along_flow(traj, problem.minimizers);
        write_stream(out_dir / "flow.csv", [&](std::ostream& os) { write_flow_csv(os, traj, profile); });
        result.report = {{"monotone", profile.monotone},
                         {"max_increase", profile.max_increase},
                         {"tolerance_per_step", profile.tolerance_per_step},
                         {"final_dist", distance_to_set(problem.minimizers, traj.primal_states.back(), h.paired_norm())},
                         {"final_fenchel", profile.values.back()}};
        break;
      }
    }
    return result;
  };

  std::vector<TaskResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = execute(tasks[i]);
      } catch (const std::exception& e) {
        std::string label = to_string(tasks[i].job);
        if (tasks[i].seed) label += "(seed " + std::to_string(*tasks[i].seed) + ")";
        results[i].error = label + ": " + e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(context.threads, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SummaryStats summary;
  CounterRng constants_rng = CounterRng(base_seed).split(kConstantsStream);
  summary.constants = estimate_constants(problem, params.constants_samples, constants_rng, h.paired_norm());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    TaskResult& r = results[i];
    if (!r.error.empty()) {
      summary.errors.push_back(r.error);
      continue;
    }
    const Task& t = tasks[i];
    if (r.run) summary.runs.push_back(*r.run);
    if (r.n0) summary.finite_hits.emplace_back(*t.seed, *r.n0);
    if (r.apt) summary.apt.emplace_back(*t.seed, *r.apt);
    if (r.gamma_hat) summary.gamma_hat = r.gamma_hat;
    if (t.job == JobKind::CertifyVc) summary.vc_verdict = r.verdict;
    if (t.job == JobKind::CertifyLvc) summary.lvc_verdict = r.verdict;
    if (!r.report.is_null()) summary.reports[to_string(t.job)] = r.report;
  }
  if (!summary.runs.empty()) {
    std::vector<double> finals;
    for (const auto& r : summary.runs) finals.push_back(r.final_dist);
    summary.final_dist_quantiles = quantiles(finals);
  }
  write_text(out_dir / "summary.json", summary.to_json(config).dump(2) + "\n");
  return summary;
}

}  // namespace smd
