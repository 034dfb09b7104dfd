#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "smd/errors.hpp"
#include "smd/harness.hpp"

using namespace smd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json::parse(R"({
    "name": "t",
    "problem": "quadratic",
    "regularizer": "euclidean",
    "schedule": {"base_alpha": 0.5, "beta": 0.8, "offset": 0},
    "n_iters": 2000,
    "seeds": [1, 2, 3],
    "noise": {"kind": "gaussian", "sigma": 0.1},
    "record_every": 50,
    "jobs": ["run"]
  })");
}

std::string config_error_path(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("smd-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(SMD_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing reports field paths") {
  CHECK(config_error_path(base_config()) == "<none>");

  auto doc = base_config();
  doc["schedule"]["beta"] = 0.5;
  CHECK(config_error_path(doc) == "schedule");

  doc = base_config();
  doc["seeds"] = json::array({1, 1});
  CHECK(config_error_path(doc) == "seeds");
  doc["seeds"] = json::array();
  CHECK(config_error_path(doc) == "seeds");

  doc = base_config();
  doc["regularizer"] = "entropic";
  CHECK(config_error_path(doc) == "regularizer");

  doc = base_config();
  doc["noise"]["sigma"] = "big";
  CHECK(config_error_path(doc) == "noise.sigma");

  doc = base_config();
  doc["jobs"] = json::array({"run", "dance"});
  CHECK(config_error_path(doc) == "jobs[1]");

  doc = base_config();
  doc["colour"] = 3;
  CHECK(config_error_path(doc) == "colour");

  doc = base_config();
  doc["params"] = {{"lvc", {{"candidate", {5, 5}}}}};
  CHECK(config_error_path(doc) == "params.lvc.candidate");

  doc = base_config();
  doc["y0"] = {1, 2, 3};
  CHECK(config_error_path(doc) == "y0");

  doc = base_config();
  doc["problem"] = {{"name", "lp-simplex"}, {"c", {1, 1}}};
  CHECK(config_error_path(doc) == "problem");

  doc = base_config();
  doc.erase("problem");
  CHECK(config_error_path(doc) == "problem");
}

TEST_CASE("zero iterations write a single row") {
  auto doc = base_config();
  doc["n_iters"] = 0;
  doc["seeds"] = {1};
  const auto cfg = parse_config(doc);
  RunContext ctx;
  ctx.out_dir = scratch("zero");
  const auto summary = run_experiment(cfg, ctx);
  CHECK(summary.errors.empty());
  std::istringstream is(slurp(*ctx.out_dir / "run_seed1.csv"));
  std::string header, row, extra;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header == "n,x_1,x_2,dist,fenchel");
  CHECK(row.rfind("0,0,0,", 0) == 0);
  CHECK_FALSE(std::getline(is, extra));
}

TEST_CASE("pinned CSV headers") {
  CHECK(trace_csv_header(3) == "n,x_1,x_2,x_3,dist,fenchel");
  CHECK(std::string(kTraceSchema) == "smd-trace/1");
  CHECK(std::string(kSummarySchema) == "smd-summary/1");
}

TEST_CASE("experiments are reproducible and independent of the thread count") {
  auto doc = base_config();
  doc["problem"] = "lp-simplex";
  doc["jobs"] = {"run", "finite-hit", "certify-vc", "certify-lvc", "sharpness", "flow", "apt"};
  doc["n_iters"] = 20000;
  doc["params"] = {{"vc_samples", 2000},
                   {"lvc", {{"radius", 0.05}, {"samples", 500}}},
                   {"apt", {{"t", {1, 2}}, {"T", 1}}},
                   {"flow", {{"T", 2}}}};
  const auto cfg = parse_config(doc);
  RunContext a, b, c;
  a.out_dir = scratch("det-a");
  b.out_dir = scratch("det-b");
  c.out_dir = scratch("det-c");
  c.threads = 4;
  const auto sa = run_experiment(cfg, a);
  run_experiment(cfg, b);
  run_experiment(cfg, c);
  CHECK(sa.errors.empty());
  const auto fa = snapshot(*a.out_dir);
  CHECK(fa.size() == 3 * 3 + 4 + 1);
  CHECK(fa == snapshot(*b.out_dir));
  CHECK(fa == snapshot(*c.out_dir));

  const json summary = json::parse(fa.at("summary.json"));
  CHECK(summary["schema"] == kSummarySchema);
  CHECK(summary["finite_hit"]["present"] == 3);
  CHECK(summary["reports"]["certify-vc"]["verdict"] == "pass");
  CHECK(summary["run"]["per_seed"].size() == 3);
  const auto& q = summary["run"]["final_dist_quantiles"];
  CHECK(q["q10"] <= q["q25"]);
  CHECK(q["q25"] <= q["median"]);
  CHECK(q["median"] <= q["q75"]);
  CHECK(q["q75"] <= q["q90"]);
  for (const auto& s : summary["run"]["per_seed"]) CHECK(s["hits"] >= 0);
}

TEST_CASE("seed override and job filter") {
  const auto cfg = parse_config(base_config());
  RunContext ctx;
  ctx.out_dir = scratch("override");
  ctx.seed_override = 77;
  const auto s = run_experiment(cfg, ctx);
  REQUIRE(s.runs.size() == 1);
  CHECK(s.runs[0].seed == 77);
  CHECK(fs::exists(*ctx.out_dir / "run_seed77.csv"));

  RunContext none;
  none.out_dir = scratch("filter");
  none.only = {JobKind::Flow};
  const auto empty = run_experiment(cfg, none);
  CHECK(empty.runs.empty());
}

TEST_CASE("job failures are collected") {
  auto doc = base_config();
  doc["jobs"] = {"apt"};
  doc["n_iters"] = 10;
  doc["params"] = {{"apt", {{"t", {100}}}}};
  RunContext ctx;
  ctx.out_dir = scratch("fail");
  const auto s = run_experiment(parse_config(doc), ctx);
  CHECK(s.errors.size() == 3);
}

TEST_CASE("problem constants") {
  CounterRng rng(1);
  const auto quiet = make_quadratic(FeasibleRegion::unit_box(3), Vector::Zero(3));
  const auto c = estimate_constants(quiet, 20000, rng);
  CHECK(c.R == std::sqrt(3.0));
  CHECK(c.Vstar_hat == 2.0 * c.B_hat);
  CHECK(c.B_hat <= std::sqrt(3.0));
  CHECK(c.B_hat >= 0.97 * std::sqrt(3.0));

  // The noise term dominates here; doubling sigma doubles it.
  const auto flat = make_quadratic(FeasibleRegion::unit_box(2), Vector::Constant(2, 0.5));
  CounterRng r1(2), r2(2);
  const auto n1 = estimate_constants(flat.with_noise(NoiseModel::gaussian(5.0)), 20000, r1);
  const auto n2 = estimate_constants(flat.with_noise(NoiseModel::gaussian(10.0)), 20000, r2);
  CHECK(n2.noise_rms / n1.noise_rms == Catch::Approx(2.0).epsilon(0.02));
  CHECK(n2.Vstar_hat / n1.Vstar_hat == Catch::Approx(2.0).epsilon(0.02));
}

TEST_CASE("quantiles") {
  const auto q = quantiles({5, 1, 4, 2, 3});
  CHECK(q.median == 3.0);
  CHECK(q.q25 == 2.0);
  CHECK(q.q10 == Catch::Approx(1.4));
  CHECK(median({1, 2, 3, 4}) == 2.5);
  CHECK_THROWS_AS(quantiles({}), DomainError);
}

TEST_CASE("thread count resolution") {
  ::unsetenv("SMD_THREADS");
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) == 1);
  ::setenv("SMD_THREADS", "5", 1);
  CHECK(resolve_threads(3) == 5);
  ::setenv("SMD_THREADS", "junk", 1);
  CHECK(resolve_threads(3) == 3);
  ::unsetenv("SMD_THREADS");
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  auto doc = base_config();
  doc["n_iters"] = 100;
  doc["outputs"] = (dir / "out").string();
  std::ofstream(dir / "ok.json") << doc.dump();
  doc["seeds"] = json::array();
  std::ofstream(dir / "bad.json") << doc.dump();
  std::ofstream(dir / "broken.json") << "{ not json";
  doc = base_config();
  doc["jobs"] = {"apt"};
  doc["n_iters"] = 10;
  doc["params"] = {{"apt", {{"t", {100}}}}};
  std::ofstream(dir / "failing.json") << doc.dump();

  CHECK(cli("list-problems") == kExitOk);
  CHECK(cli("run " + (dir / "ok.json").string()) == kExitOk);
  CHECK(fs::exists(dir / "out" / "summary.json"));
  CHECK(cli("run " + (dir / "ok.json").string() + " --seed-override 9 --threads 2 --out-dir " + (dir / "o2").string()) ==
        kExitOk);
  CHECK(fs::exists(dir / "o2" / "run_seed9.csv"));
  CHECK(cli("run " + (dir / "bad.json").string()) == kExitConfigError);
  CHECK(cli("run " + (dir / "broken.json").string()) == kExitConfigError);
  CHECK(cli("run " + (dir / "missing.json").string()) == kExitConfigError);
  CHECK(cli("flow " + (dir / "failing.json").string() + " --out-dir " + (dir / "o3").string()) == kExitJobFailure);
}
