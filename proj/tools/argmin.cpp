#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "argmin/error.hpp"
#include "argmin/harness.hpp"

namespace {

namespace h = argmin::harness;

enum Exit { kOk = 0, kConfigError = 2, kAbort = 3, kVerifyFailed = 4 };

int report(const std::vector<h::RunRecord>& records, const std::string& dir) {
  h::write_records(records, dir);
  int status = kOk;
  for (const h::RunRecord& r : records) {
    const h::RunSummary& s = r.summary;
    std::printf("%s  eps=%-10.3g %-15s grad=%-12.6g calls=%lld/%lld/%lld\n", s.config_hash.c_str(), s.eps,
                s.termination.c_str(), s.final_grad_norm, static_cast<long long>(s.total_calls[0]),
                static_cast<long long>(s.total_calls[1]), static_cast<long long>(s.total_calls[2]));
    if (!s.message.empty()) std::fprintf(stderr, "  %s\n", s.message.c_str());
    if (s.termination != "converged") status = kAbort;
  }
  std::printf("wrote %zu trace(s) and summary.json to %s\n", records.size(), dir.c_str());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accumulative-regularization experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, filter;
  double eps = 0.0;
  unsigned threads = 1;

  auto* run = app.add_subcommand("run", "Run every eps in the config's grid");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--eps", eps, "Run this single eps instead of the grid");
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  auto* sweep = app.add_subcommand("sweep", "Run the eps grid in parallel");
  sweep->add_option("--config", config_path, "JSON experiment config")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides the config)");
  sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run the property checks of every module");
  verify->add_option("--filter", filter, "Only modules whose name contains this string");

  auto* rate = app.add_subcommand("rate", "Fit the call-count exponent of a finished sweep");
  rate->add_option("--in", in_dir, "Directory holding summary.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run || *sweep) {
      h::ExperimentConfig cfg = h::load_config(config_path);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (*run && run->count("--eps")) {
        cfg.eps_grid = {eps};
        h::validate(cfg);
      }
      const auto records = *run ? h::run_experiment(cfg) : h::run_sweep(cfg, threads);
      return report(records, cfg.out_dir);
    }
    if (*verify) {
      h::VerifyOptions opt;
      opt.filter = filter;
      const auto checks = h::verify_suite(opt);
      std::cout << h::format_report(checks);
      if (checks.empty()) {
        std::cerr << "no module matches filter '" << filter << "'\n";
        return kConfigError;
      }
      for (const auto& c : checks)
        if (!c.passed) return kVerifyFailed;
      return kOk;
    }
    if (*rate) {
      const h::RateFit fit = h::estimate_rate(h::read_summaries(in_dir));
      std::printf("slope %.6f  r2 %.6f  points %d\n", fit.slope, fit.r2, fit.points);
      return kOk;
    }
  } catch (const argmin::Error& e) {
    std::cerr << e.what() << '\n';
    if (argmin::is_algorithm_abort(e.code())) return kAbort;
    return kConfigError;
  }
  return kOk;
}
