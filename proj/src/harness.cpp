#include "argmin/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "argmin/error.hpp"
#include "argmin/subroutines.hpp"
#include "argmin/uniform.hpp"

namespace argmin::harness {

using nlohmann::json;

namespace {

constexpr Algorithm kAlgorithms[] = {Algorithm::kAcnm,   Algorithm::kArCubic,        Algorithm::kArGeneral,
                                     Algorithm::kArPf,   Algorithm::kGuessD,         Algorithm::kUniformRestart,
                                     Algorithm::kUniformPf};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

Regime parse_regime(const std::string& s) {
  if (s == "hoelder") return Regime::kHoelder;
  if (s == "lipschitz") return Regime::kLipschitz;
  config_error("unknown regime '" + s + "' (expected hoelder or lipschitz)");
}

const char* regime_name(Regime r) { return r == Regime::kHoelder ? "hoelder" : "lipschitz"; }

// Typed field access with the key path in every message.
template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("'" + where + key + "' has the wrong type");
  }
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) config_error("'" + (where.empty() ? std::string("config") : where) + "' must be an object");
  for (const auto& item : j.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      config_error("unknown key '" + where + item.key() + "'");
}

template <class T>
std::optional<T> get_optional(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<T>(j, key, where);
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json problem_json(const ProblemConfig& pc) {
  json x0 = nullptr;
  if (pc.x0) x0 = std::vector<double>(pc.x0->data(), pc.x0->data() + pc.x0->size());
  return json{{"family", to_string(pc.gen.family)},
              {"n", pc.gen.n},
              {"m", pc.gen.m},
              {"q", pc.gen.q},
              {"reg", pc.gen.reg},
              {"t", pc.gen.t},
              {"cond", pc.gen.cond},
              {"x0", x0},
              {"x0_offset", pc.x0_offset}};
}

json config_json(const ExperimentConfig& cfg, bool with_output) {
  json j{{"problem", problem_json(cfg.problem)},
         {"algorithm", to_string(cfg.algorithm)},
         {"p", cfg.p},
         {"nu", cfg.nu},
         {"eps_grid", cfg.eps_grid},
         {"seed", cfg.seed},
         {"cubic_tol", cfg.cubic_tol},
         {"C_A", cfg.C_A},
         {"regime", cfg.regime ? json(regime_name(*cfg.regime)) : json(nullptr)},
         {"L", optional_json(cfg.L)},
         {"L0", cfg.L0},
         {"sigma1", optional_json(cfg.sigma1)},
         {"sigma0", optional_json(cfg.sigma0)},
         {"q", optional_json(cfg.q)},
         {"sigma_q", optional_json(cfg.sigma_q)},
         {"max_iters", cfg.max_iters},
         {"max_epochs", cfg.max_epochs},
         {"max_rounds", cfg.max_rounds},
         {"check_relations", cfg.check_relations},
         {"record_wall_time", cfg.record_wall_time}};
  if (with_output) j["out"] = cfg.out_dir;
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ExperimentConfig at_eps(const ExperimentConfig& cfg, double eps) {
  ExperimentConfig one = cfg;
  one.eps_grid = {eps};
  return one;
}

Vec starting_point(const ProblemConfig& pc, const Problem& prob) {
  if (pc.x0) {
    if (pc.x0->size() != prob.dim())
      config_error("problem.x0 has " + std::to_string(pc.x0->size()) + " entries, expected " +
                   std::to_string(prob.dim()));
    return *pc.x0;
  }
  const Vec offset = Vec::Constant(prob.dim(), pc.x0_offset);
  return prob.known().x_star ? Vec(*prob.known().x_star + offset) : offset;
}

double smoothness(const ExperimentConfig& cfg, const Problem& prob) {
  if (cfg.L) return *cfg.L;
  const auto& c = cfg.p == 2 ? prob.known().L3 : prob.known().L2;
  if (!c || !(c->value > 0.0))
    config_error(std::string("problem ") + prob.name() + " has no positive " + (cfg.p == 2 ? "L3" : "L2") +
                 "; set L in the config");
  return c->value;
}

UniformConvexity uniform_data(const ExperimentConfig& cfg, const Problem& prob) {
  UniformConvexity u;
  if (prob.known().uniform) u = *prob.known().uniform;
  if (cfg.q) u.q = *cfg.q;
  if (cfg.sigma_q) u.sigma = *cfg.sigma_q;
  if (!(u.sigma > 0.0))
    config_error(std::string("problem ") + prob.name() + " has no uniform-convexity constant; set sigma_q");
  return u;
}

struct Outcome {
  Vec x;
  double sigma = 0.0;
  double L_est = 0.0;
  RunTrace trace;
};

Outcome dispatch(const ExperimentConfig& cfg, double eps, const std::shared_ptr<ProblemOracle>& base,
                 const Vec& x0) {
  const Problem& prob = base->problem();
  Outcome out;
  switch (cfg.algorithm) {
    case Algorithm::kAcnm: {
      const double L = smoothness(cfg, prob);
      RunOptions ro;
      ro.selection = Selection::kBaseGradient;
      ro.stop_gradient = eps;
      ro.cubic_tol = cfg.cubic_tol;
      ro.check_relations = cfg.check_relations;
      ro.seed = cfg.seed;
      ro.record_wall_time = cfg.record_wall_time;
      SubroutineResult r = acnm_run(*base, x0, AcnmParams::from_lipschitz(L), cfg.max_iters, ro);
      out.x = r.x_best;
      out.L_est = r.L_out;
      out.trace = std::move(r.trace);
      break;
    }
    case Algorithm::kArCubic:
    case Algorithm::kArGeneral: {
      const double L = smoothness(cfg, prob);
      const double D = dist_to_opt(prob, x0);
      const EpochSchedule sched =
          cfg.algorithm == Algorithm::kArCubic
              ? schedule_cubic(eps, D, L)
              : schedule_general(eps, D, L, cfg.p, cfg.nu, cfg.C_A, cfg.regime.value_or(Regime::kHoelder));
      ArOptions ao;
      ao.sub = cfg.p == 2 ? SubroutineKind::kAcnm : SubroutineKind::kAgd;
      ao.p = cfg.p;
      ao.nu = cfg.nu;
      ao.L = L;
      ao.cubic_tol = cfg.cubic_tol;
      ao.check_relations = cfg.check_relations;
      ao.seed = cfg.seed;
      ao.record_wall_time = cfg.record_wall_time;
      ARResult r = ar_run(base, x0, sched, ao);
      out.x = r.x_hat;
      out.sigma = r.stack.sigma();
      out.L_est = L;
      out.trace = std::move(r.trace);
      break;
    }
    case Algorithm::kArPf:
    case Algorithm::kGuessD: {
      ParamFreeOptions po;
      po.p = cfg.p;
      po.nu = cfg.nu;
      po.max_epochs = cfg.max_epochs;
      po.cubic_tol = cfg.cubic_tol;
      po.record_wall_time = cfg.record_wall_time;
      ARResult r;
      if (cfg.algorithm == Algorithm::kArPf) {
        const double pnu = cfg.p + cfg.nu;
        const double sigma1 =
            cfg.sigma1.value_or(eps / (3.0 * std::pow(9.0 * dist_to_opt(prob, x0), pnu - 1.0)));
        r = ar_parameter_free(base, x0, sigma1, cfg.L0, po);
      } else {
        r = guess_and_check_D(base, x0, eps, cfg.L0, po, cfg.max_rounds).ar;
      }
      out.x = r.x_hat;
      out.sigma = r.stack.sigma();
      out.L_est = r.epochs.empty() ? 0.0 : r.epochs.back().L_at_N;
      out.trace = std::move(r.trace);
      break;
    }
    case Algorithm::kUniformRestart: {
      const double L = smoothness(cfg, prob);
      const UniformConvexity u = uniform_data(cfg, prob);
      RestartOptions ro;
      ro.cubic_tol = cfg.cubic_tol;
      ro.C_A = cfg.C_A;
      ro.regime = cfg.regime.value_or(Regime::kLipschitz);
      ro.max_epochs = cfg.max_epochs;
      ro.record_wall_time = cfg.record_wall_time;
      RestartResult r = restart_uniform(base, x0, L, u.sigma, cfg.p, u.q, eps, ro);
      out.x = r.x_hat;
      out.sigma = u.sigma;
      out.L_est = L;
      out.trace = std::move(r.trace);
      break;
    }
    case Algorithm::kUniformPf: {
      const double sigma0 = cfg.sigma0 ? *cfg.sigma0 : uniform_data(cfg, prob).sigma;
      PfUniformOptions po;
      po.max_rounds = cfg.max_rounds;
      po.inner.max_epochs = cfg.max_epochs;
      po.inner.cubic_tol = cfg.cubic_tol;
      po.inner.record_wall_time = cfg.record_wall_time;
      RestartResult r = pf_uniform(base, x0, sigma0, cfg.L0, cfg.p, eps, po);
      out.x = r.x_hat;
      out.sigma = r.epochs.empty() ? sigma0 : r.epochs.back().sigma_estimate;
      out.trace = std::move(r.trace);
      break;
    }
  }
  return out;
}

RunSummary summarize(const ExperimentConfig& cfg, double eps, const std::string& problem) {
  RunSummary s;
  s.config_hash = config_hash(at_eps(cfg, eps));
  s.algorithm = to_string(cfg.algorithm);
  s.problem = problem;
  s.eps = eps;
  s.p = cfg.p;
  s.nu = cfg.nu;
  return s;
}

json summary_to_json(const RunSummary& s) {
  return json{{"config_hash", s.config_hash},
              {"algorithm", s.algorithm},
              {"problem", s.problem},
              {"eps", s.eps},
              {"p", s.p},
              {"nu", s.nu},
              {"final_grad_norm", std::isfinite(s.final_grad_norm) ? json(s.final_grad_norm) : json(nullptr)},
              {"total_calls", s.total_calls},
              {"termination", s.termination},
              {"message", s.message},
              {"aborted", s.aborted}};
}

void sort_by_hash(std::vector<RunRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.summary.config_hash < b.summary.config_hash; });
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kAcnm:
      return "acnm";
    case Algorithm::kArCubic:
      return "ar_cubic";
    case Algorithm::kArGeneral:
      return "ar_general";
    case Algorithm::kArPf:
      return "ar_pf";
    case Algorithm::kGuessD:
      return "guess_d";
    case Algorithm::kUniformRestart:
      return "uniform_restart";
    case Algorithm::kUniformPf:
      return "uniform_pf";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : kAlgorithms)
    if (name == to_string(a)) return a;
  config_error("unknown algorithm '" + name + "'");
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  check_keys(j,
             {"problem", "algorithm", "p", "nu", "eps_grid", "seed", "cubic_tol", "C_A", "regime", "L", "L0", "sigma1",
              "sigma0", "q", "sigma_q", "max_iters", "max_epochs", "max_rounds", "check_relations", "record_wall_time",
              "out"},
             "");
  ExperimentConfig cfg;
  if (!j.contains("problem")) config_error("missing 'problem'");
  if (!j.contains("algorithm")) config_error("missing 'algorithm'");
  if (!j.contains("eps_grid")) config_error("missing 'eps_grid'");

  const json& pj = j.at("problem");
  check_keys(pj, {"family", "n", "m", "q", "reg", "t", "cond", "x0", "x0_offset"}, "problem.");
  if (!pj.contains("family")) config_error("missing 'problem.family'");
  GeneratorParams& gp = cfg.problem.gen;
  gp.family = parse_problem_family(get<std::string>(pj, "family", "problem."));
  gp.n = get_optional<Eigen::Index>(pj, "n", "problem.").value_or(gp.n);
  gp.m = get_optional<Eigen::Index>(pj, "m", "problem.").value_or(gp.m);
  gp.q = get_optional<double>(pj, "q", "problem.").value_or(gp.q);
  gp.reg = get_optional<double>(pj, "reg", "problem.").value_or(gp.reg);
  gp.t = get_optional<double>(pj, "t", "problem.").value_or(gp.t);
  gp.cond = get_optional<double>(pj, "cond", "problem.").value_or(gp.cond);
  if (auto x0 = get_optional<std::vector<double>>(pj, "x0", "problem."))
    cfg.problem.x0 = Eigen::Map<const Vec>(x0->data(), static_cast<Eigen::Index>(x0->size()));
  cfg.problem.x0_offset = get_optional<double>(pj, "x0_offset", "problem.").value_or(cfg.problem.x0_offset);

  cfg.algorithm = parse_algorithm(get<std::string>(j, "algorithm", ""));
  cfg.p = get_optional<int>(j, "p", "").value_or(cfg.p);
  cfg.nu = get_optional<double>(j, "nu", "").value_or(cfg.nu);
  cfg.eps_grid = get<std::vector<double>>(j, "eps_grid", "");
  cfg.seed = get_optional<std::uint64_t>(j, "seed", "").value_or(cfg.seed);
  cfg.cubic_tol = get_optional<double>(j, "cubic_tol", "").value_or(cfg.cubic_tol);
  cfg.C_A = get_optional<double>(j, "C_A", "").value_or(cfg.C_A);
  if (auto r = get_optional<std::string>(j, "regime", "")) cfg.regime = parse_regime(*r);
  cfg.L = get_optional<double>(j, "L", "");
  cfg.L0 = get_optional<double>(j, "L0", "").value_or(cfg.L0);
  cfg.sigma1 = get_optional<double>(j, "sigma1", "");
  cfg.sigma0 = get_optional<double>(j, "sigma0", "");
  cfg.q = get_optional<double>(j, "q", "");
  cfg.sigma_q = get_optional<double>(j, "sigma_q", "");
  cfg.max_iters = get_optional<int>(j, "max_iters", "").value_or(cfg.max_iters);
  cfg.max_epochs = get_optional<int>(j, "max_epochs", "").value_or(cfg.max_epochs);
  cfg.max_rounds = get_optional<int>(j, "max_rounds", "").value_or(cfg.max_rounds);
  cfg.check_relations = get_optional<bool>(j, "check_relations", "").value_or(cfg.check_relations);
  cfg.record_wall_time = get_optional<bool>(j, "record_wall_time", "").value_or(cfg.record_wall_time);
  cfg.out_dir = get_optional<std::string>(j, "out", "").value_or(cfg.out_dir);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg, true).dump(2) + "\n"; }

void validate(const ExperimentConfig& cfg) {
  if (cfg.eps_grid.empty()) config_error("eps_grid is empty");
  for (size_t i = 0; i < cfg.eps_grid.size(); ++i) {
    if (!(cfg.eps_grid[i] > 0.0) || !std::isfinite(cfg.eps_grid[i]))
      config_error("eps_grid entries must be positive and finite");
    if (i > 0 && !(cfg.eps_grid[i] < cfg.eps_grid[i - 1])) config_error("eps_grid must be strictly decreasing");
  }
  if (cfg.p != 1 && cfg.p != 2) config_error("p must be 1 or 2");
  if (cfg.nu != 1.0) config_error("nu must be 1 (the implemented subroutines are Lipschitz-smooth)");
  if (cfg.algorithm == Algorithm::kAcnm || cfg.algorithm == Algorithm::kArCubic) {
    if (cfg.p != 2) config_error(std::string(to_string(cfg.algorithm)) + " needs p = 2");
  }
  if (cfg.algorithm == Algorithm::kUniformPf && cfg.q && *cfg.q != cfg.p + 1.0)
    config_error("uniform_pf needs q = p + 1");
  if (cfg.problem.gen.n < 1 || cfg.problem.gen.m < 1) config_error("problem.n and problem.m must be >= 1");
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0)) config_error(std::string(name) + " must be positive");
  };
  positive(cfg.cubic_tol, "cubic_tol");
  positive(cfg.L0, "L0");
  positive(cfg.L, "L");
  positive(cfg.sigma1, "sigma1");
  positive(cfg.sigma0, "sigma0");
  positive(cfg.sigma_q, "sigma_q");
  if (cfg.q && !(*cfg.q >= 2.0)) config_error("q must be >= 2");
  if (!(cfg.C_A >= 1.0)) config_error("C_A must be >= 1");
  if (cfg.max_iters < 1 || cfg.max_epochs < 1 || cfg.max_rounds < 1)
    config_error("max_iters, max_epochs and max_rounds must be >= 1");
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(config_json(cfg, false).dump())); }

RunRecord run_single(const ExperimentConfig& cfg, double eps) {
  validate(cfg);
  std::shared_ptr<const Problem> prob;
  try {
    prob = make_problem(generate_spec(cfg.problem.gen, cfg.seed));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) config_error(std::string("problem: ") + e.what());
    throw;
  }
  RunRecord rec;
  rec.summary = summarize(cfg, eps, prob->name());
  rec.trace = RunTrace(cfg.record_wall_time);
  auto base = std::make_shared<ProblemOracle>(prob);
  const Vec x0 = starting_point(cfg.problem, *prob);

  try {
    Outcome out = dispatch(cfg, eps, base, x0);
    rec.trace = std::move(out.trace);
    const Evaluation at = base->audit(out.x, 1);
    TraceRow row;
    row.f = at.f;
    row.grad_norm = at.g.norm();
    row.grad_fs_norm = at.g.norm();
    row.sigma = out.sigma;
    row.L_est = out.L_est;
    rec.trace.add(row, base->counter());
    rec.summary.final_grad_norm = row.grad_norm;
    rec.summary.termination = row.grad_norm <= eps ? "converged" : "target_missed";
  } catch (const AbortedRun& e) {
    if (!is_algorithm_abort(e.code())) config_error(e.what());
    rec.trace = e.partial_trace();
    rec.summary.termination = to_string(e.code());
    rec.summary.message = e.what();
    rec.summary.aborted = true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kDistanceUnavailable)
      config_error(e.what());
    if (!is_algorithm_abort(e.code())) throw;
    rec.summary.termination = to_string(e.code());
    rec.summary.message = e.what();
    rec.summary.aborted = true;
  }
  if (rec.summary.aborted)
    rec.summary.final_grad_norm =
        rec.trace.empty() ? std::numeric_limits<double>::quiet_NaN() : rec.trace.rows().back().grad_norm;
  rec.summary.total_calls = base->counter().all();
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<RunRecord> out;
  for (double eps : cfg.eps_grid) out.push_back(run_single(cfg, eps));
  sort_by_hash(out);
  return out;
}

std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, unsigned threads) {
  validate(cfg);
  const size_t n = cfg.eps_grid.size();
  const unsigned workers = static_cast<unsigned>(std::max<size_t>(1, std::min<size_t>(threads ? threads : 1, n)));
  std::vector<std::optional<RunRecord>> slots(n);
  std::atomic<size_t> next{0};
  std::vector<std::future<void>> futures;
  for (unsigned w = 0; w < workers; ++w)
    futures.push_back(std::async(std::launch::async, [&] {
      for (size_t i = next++; i < n; i = next++) slots[i] = run_single(cfg, cfg.eps_grid[i]);
    }));
  for (auto& f : futures) f.get();
  std::vector<RunRecord> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  sort_by_hash(out);
  return out;
}

std::string summary_json(const std::vector<RunRecord>& records) {
  json arr = json::array();
  for (const RunRecord& r : records) arr.push_back(summary_to_json(r.summary));
  return arr.dump(2) + "\n";
}

void write_records(const std::vector<RunRecord>& records, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory '" + dir + "': " + ec.message());
  for (const RunRecord& r : records)
    write_csv_file(r.trace, (std::filesystem::path(dir) / ("trace_" + r.summary.config_hash + ".csv")).string());
  const std::string path = (std::filesystem::path(dir) / "summary.json").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << summary_json(records);
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

std::vector<RunSummary> read_summaries(const std::string& dir) {
  const std::string path = (std::filesystem::path(dir) / "summary.json").string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kIo, "malformed '" + path + "': " + e.what());
  }
  std::vector<RunSummary> out;
  try {
    for (const json& r : j) {
      RunSummary s;
      s.config_hash = r.at("config_hash").get<std::string>();
      s.algorithm = r.at("algorithm").get<std::string>();
      s.problem = r.at("problem").get<std::string>();
      s.eps = r.at("eps").get<double>();
      s.p = r.at("p").get<int>();
      s.nu = r.at("nu").get<double>();
      s.final_grad_norm = r.at("final_grad_norm").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                              : r.at("final_grad_norm").get<double>();
      s.total_calls = r.at("total_calls").get<std::array<std::int64_t, 3>>();
      s.termination = r.at("termination").get<std::string>();
      s.message = r.at("message").get<std::string>();
      s.aborted = r.at("aborted").get<bool>();
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, "unexpected content in '" + path + "': " + e.what());
  }
  return out;
}

RateFit estimate_rate(const std::vector<RunSummary>& records) {
  std::vector<double> xs, ys;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const RunSummary& r : records) {
    if (r.aborted) continue;
    const auto calls = r.total_calls.at(static_cast<size_t>(std::clamp(r.p, 0, 2)));
    if (calls <= 0 || !(r.eps > 0.0)) continue;
    xs.push_back(std::log(1.0 / r.eps));
    ys.push_back(std::log(static_cast<double>(calls)));
    lo = std::min(lo, r.eps);
    hi = std::max(hi, r.eps);
  }
  if (xs.size() < 4 || !(hi / lo >= 100.0 * (1.0 - 1e-12)))
    throw Error(ErrorCode::kInsufficientRange, "need at least 4 completed runs spanning 2 decades of eps, got " +
                                                   std::to_string(xs.size()) + " runs");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.points = static_cast<int>(xs.size());
  fit.slope = sxy / sxx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace argmin::harness
