#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "argmin/error.hpp"
#include "argmin/harness.hpp"

using namespace argmin;
using namespace argmin::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("argmin_test_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an argmin::Error");
  return ErrorCode::kIo;
}

ExperimentConfig cubic_config(Algorithm a, std::vector<double> grid) {
  ExperimentConfig cfg;
  cfg.problem.gen.family = ProblemFamily::kCubicPower;
  cfg.algorithm = a;
  cfg.eps_grid = std::move(grid);
  return cfg;
}

RunSummary summary(double eps, std::int64_t calls, int p = 2) {
  RunSummary s;
  s.eps = eps;
  s.p = p;
  s.total_calls = {calls, calls, calls};
  s.termination = "converged";
  return s;
}

std::vector<RunSummary> summaries(const std::vector<RunRecord>& records) {
  std::vector<RunSummary> out;
  for (const RunRecord& r : records) out.push_back(r.summary);
  return out;
}

void check_record(const RunRecord& r) {
  const auto& rows = r.trace.rows();
  REQUIRE_FALSE(rows.empty());
  std::array<std::int64_t, 3> sum{0, 0, 0}, prev{0, 0, 0};
  for (const TraceRow& row : rows) {
    const std::array<std::int64_t, 3> now{row.calls0, row.calls1, row.calls2};
    for (int k = 0; k < 3; ++k) {
      CHECK(now[k] >= prev[k]);
      sum[k] += now[k] - prev[k];
    }
    prev = now;
  }
  CHECK(sum == r.summary.total_calls);
  CHECK(rows.back().grad_norm == r.summary.final_grad_norm);
}

}  // namespace

TEST_CASE("config parsing: defaults, round trip and hash") {
  const ExperimentConfig cfg = config_from_json(R"({
    "problem": {"family": "cubic_power", "n": 4},
    "algorithm": "ar_cubic",
    "eps_grid": [1e-2, 1e-3]
  })");
  CHECK(cfg.problem.gen.n == 4);
  CHECK(cfg.problem.gen.m == 8);
  CHECK(cfg.algorithm == Algorithm::kArCubic);
  CHECK(cfg.p == 2);
  CHECK(cfg.eps_grid == std::vector<double>{1e-2, 1e-3});
  CHECK_FALSE(cfg.L.has_value());

  const ExperimentConfig again = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);

  ExperimentConfig other = cfg;
  other.seed = 2;
  CHECK(config_hash(other) != config_hash(cfg));
  other = cfg;
  other.out_dir = "elsewhere";
  CHECK(config_hash(other) == config_hash(cfg));

  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("config errors are rejected before any work") {
  const auto parse = [](const std::string& text) { return [text] { config_from_json(text); }; };
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic"}, "algorithm": "acnm", "eps_grid": [1e-3, 1e-2]})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic"}, "algorithm": "acnm", "eps_grid": []})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic"}, "algorithm": "acnm", "eps_grid": [1e-2], "bogus": 1})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic", "size": 3}, "algorithm": "acnm", "eps_grid": [1e-2]})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "circle"}, "algorithm": "acnm", "eps_grid": [1e-2]})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic"}, "algorithm": "newton", "eps_grid": [1e-2]})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic"}, "algorithm": "acnm", "eps_grid": "small"})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic"}, "algorithm": "acnm", "eps_grid": [1e-2], "nu": 0.5})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse(R"({"problem": {"family": "quadratic"}, "algorithm": "acnm", "eps_grid": [1e-2], "p": 1})")) ==
        ErrorCode::kConfig);
  CHECK(code_of(parse("{not json")) == ErrorCode::kConfig);
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::kIo);

  // The run entry points validate too.
  ExperimentConfig cfg = cubic_config(Algorithm::kArCubic, {1e-3, 1e-2});
  CHECK(code_of([&] { run_experiment(cfg); }) == ErrorCode::kConfig);
  // Missing constants surface as configuration errors.
  cfg = cubic_config(Algorithm::kArGeneral, {1e-2});
  cfg.problem.gen.family = ProblemFamily::kLogSumExp;
  CHECK(code_of([&] { run_single(cfg, 1e-2); }) == ErrorCode::kConfig);
}

TEST_CASE("same config twice gives byte-identical files; sweep matches sequential") {
  ExperimentConfig cfg = cubic_config(Algorithm::kArCubic, {1e-2, 1e-3});
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  write_records(run_experiment(cfg), a.string());
  write_records(run_experiment(cfg), b.string());
  write_records(run_sweep(cfg, 2), c.string());
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(b / name));
    CHECK(slurp(entry.path()) == slurp(c / name));
    ++files;
  }
  CHECK(files == 3);
  const auto read = read_summaries(a.string());
  REQUIRE(read.size() == 2);
  CHECK(read[0].config_hash < read[1].config_hash);
  for (const auto& s : read) {
    CHECK(fs::exists(a / ("trace_" + s.config_hash + ".csv")));
    CHECK(s.termination == "converged");
    CHECK(s.final_grad_norm <= s.eps);
  }
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("acnm on cubic_power with relation checks: residual columns within slack") {
  ExperimentConfig cfg = cubic_config(Algorithm::kAcnm, {1e-2});
  cfg.check_relations = true;
  const RunRecord r = run_single(cfg, 1e-2);
  CHECK(r.summary.termination == "converged");
  CHECK(r.summary.final_grad_norm <= 1e-2);
  const auto& rows = r.trace.rows();
  REQUIRE(rows.size() >= 2);
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i].r1_residual <= 1e-8);
    CHECK(rows[i].r2_residual <= 1e-8);
  }
  // The closing row describes the returned point and carries no residuals.
  CHECK(rows.back().epoch == 0);
  CHECK(std::isnan(rows.back().r1_residual));
  check_record(r);
}

TEST_CASE("every algorithm: counter integrity and final-row agreement") {
  std::vector<ExperimentConfig> cfgs;
  for (Algorithm a : {Algorithm::kAcnm, Algorithm::kArCubic, Algorithm::kArGeneral, Algorithm::kArPf,
                      Algorithm::kGuessD, Algorithm::kUniformRestart, Algorithm::kUniformPf})
    cfgs.push_back(cubic_config(a, {1e-4}));
  ExperimentConfig agd = cubic_config(Algorithm::kArGeneral, {1e-4});
  agd.problem.gen.family = ProblemFamily::kQuadratic;
  agd.p = 1;
  cfgs.push_back(agd);
  for (const ExperimentConfig& cfg : cfgs) {
    CAPTURE(to_string(cfg.algorithm));
    const RunRecord r = run_single(cfg, cfg.eps_grid.front());
    CHECK(r.summary.termination == "converged");
    CHECK_FALSE(r.summary.aborted);
    CHECK(r.summary.final_grad_norm <= 1e-4);
    check_record(r);
  }
}

TEST_CASE("algorithm failures are recorded in the summary") {
  // Strong convexity claimed at the gradient Lipschitz constant of an ill-conditioned quadratic.
  ExperimentConfig cfg;
  cfg.problem.gen.family = ProblemFamily::kQuadratic;
  cfg.problem.gen.n = 6;
  cfg.problem.gen.cond = 1e4;
  cfg.problem.x0 = Vec::Zero(6);
  cfg.algorithm = Algorithm::kUniformRestart;
  cfg.p = 1;
  cfg.q = 2.0;
  cfg.L = 1.0;
  cfg.sigma_q = 1.0;
  cfg.seed = 2;
  cfg.eps_grid = {1e-8};
  const RunRecord r = run_single(cfg, 1e-8);
  CHECK(r.summary.aborted);
  CHECK(r.summary.termination == to_string(ErrorCode::kHalvingFailure));
  CHECK_FALSE(r.summary.message.empty());
  CHECK(r.summary.total_calls[1] > 0);

  // A run that ends short of eps without an error.
  ExperimentConfig few = cubic_config(Algorithm::kAcnm, {1e-10});
  few.max_iters = 3;
  const RunRecord m = run_single(few, 1e-10);
  CHECK_FALSE(m.summary.aborted);
  CHECK(m.summary.termination == "target_missed");
  check_record(m);
}

TEST_CASE("empty trace gives a header-only CSV") {
  std::ostringstream out;
  write_csv(RunTrace(), out);
  CHECK(out.str() ==
        "epoch,iter,calls0,calls1,calls2,f,grad_norm,grad_fs_norm,sigma,L_est,wall_ns,r1_residual,r2_residual\n");
}

TEST_CASE("rate fitting") {
  std::vector<RunSummary> constant, power;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    constant.push_back(summary(eps, 500));
    power.push_back(summary(eps, static_cast<std::int64_t>(std::llround(10.0 * std::pow(eps, -0.5)))));
  }
  const RateFit flat = estimate_rate(constant);
  CHECK(std::abs(flat.slope) <= 1e-12);
  CHECK(flat.points == 4);
  const RateFit half = estimate_rate(power);
  CHECK(half.slope == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(half.r2 >= 0.999999);

  // The order-p column is the one fitted.
  std::vector<RunSummary> first_order = power;
  for (auto& s : first_order) {
    s.p = 1;
    s.total_calls[2] = 1;
  }
  CHECK(estimate_rate(first_order).slope == doctest::Approx(0.5).epsilon(1e-4));

  CHECK(code_of([&] { estimate_rate({power.begin(), power.begin() + 3}); }) == ErrorCode::kInsufficientRange);
  std::vector<RunSummary> narrow;
  for (double eps : {1e-2, 5e-3, 2e-3, 1.5e-3}) narrow.push_back(summary(eps, 100));
  CHECK(code_of([&] { estimate_rate(narrow); }) == ErrorCode::kInsufficientRange);
  std::vector<RunSummary> aborted = power;
  aborted[0].aborted = true;
  CHECK(code_of([&] { estimate_rate(aborted); }) == ErrorCode::kInsufficientRange);
}

TEST_CASE("rate of accelerated gradient inside accumulative regularization on a quadratic") {
  ExperimentConfig cfg;
  cfg.problem.gen.family = ProblemFamily::kQuadratic;
  cfg.problem.gen.n = 10;
  cfg.problem.gen.cond = 1e6;
  cfg.algorithm = Algorithm::kArGeneral;
  cfg.p = 1;
  cfg.C_A = 2.0;
  cfg.eps_grid = {1e-2, 1e-3, 1e-4, 1e-5};
  const auto records = run_sweep(cfg, 4);
  const RateFit fit = estimate_rate(summaries(records));
  CHECK(fit.slope >= 0.40);
  CHECK(fit.slope <= 0.625);
}

TEST_CASE("rate of cubic accumulative regularization on cubic_power") {
  const auto records = run_sweep(cubic_config(Algorithm::kArCubic, {1e-2, 1e-3, 1e-4, 1e-5}), 4);
  const RateFit fit = estimate_rate(summaries(records));
  CHECK(fit.slope >= 0.26);
  CHECK(fit.slope <= 0.42);
}

TEST_CASE("verify suite passes on a clean build and catches a prox sign error") {
  const auto clean = verify_suite();
  CHECK(clean.size() >= 40);
  for (const auto& c : clean) {
    CAPTURE(c.module);
    CAPTURE(c.name);
    CHECK(c.passed);
  }
  for (const char* module : {"core_linalg", "cubic_solver", "problems", "regularization", "subroutines",
                             "ar_framework", "uniform_convex", "harness_cli"})
    CHECK(std::any_of(clean.begin(), clean.end(), [&](const CheckResult& c) { return c.module == module; }));
  CHECK(format_report(clean).find("checks passed") != std::string::npos);

  VerifyOptions mutated;
  mutated.filter = "regularization";
  mutated.prox_eval = [](const PowerProxTerm& t, const Vec& x, int order) {
    ProxEval e = prox_eval(t, x, order);
    if (order >= 1) e.gradient = -e.gradient;
    return e;
  };
  const auto broken = verify_suite(mutated);
  bool fd_failed = false;
  for (const auto& c : broken) {
    CHECK(c.module == "regularization");
    if (c.name.find("prox gradient vs finite differences") != std::string::npos) fd_failed = !c.passed;
  }
  CHECK(fd_failed);
}
