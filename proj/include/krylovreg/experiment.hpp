#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "preconditioners.hpp"
#include "problems.hpp"
#include "regularization.hpp"
#include "solvers.hpp"
#include "svg.hpp"
#include "types.hpp"

namespace krylovreg {

/// User error in an experiment configuration (maps to exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runtime failure while solving (maps to exit code 3).
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string name;  // downshift | circshift | baart | heat | blur2d
  std::size_t size = 200;
  double noise_level = 1e-2;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::string psf = "motion";  // blur2d only: motion | gaussian | delta
  std::size_t psf_size = 7;
};

struct SolverConfig {
  std::vector<std::string> regularizers{"none"};
  std::vector<std::string> preconditioners{"none"};
  std::string kp_rule = "auto_stop2";  // auto_stop1 | auto_stop2 | fixed
  std::size_t kp_fixed = 0;
  std::size_t kmax = 0;  // 0: problem default (60 for 1D, 100 for 2D)
  double tau = 1.01;
  double tau1_prime = 1e-4;
  double tau1_double_prime = 0.9;
  double tau2 = 1e-10;
  bool reorthogonalize = true;
  bool lsqr_baseline = false;
};

struct OutputConfig {
  std::string dir = ".";
  bool emit_svg = false;
};

struct ExperimentConfig {
  ProblemConfig problem;
  SolverConfig solver;
  OutputConfig output;
};

struct RunRecord {
  std::size_t run = 0;
  std::size_t iter = 0;
  double relerr = 0.0;
  double relres_projected = 0.0;
  double relres_true = 0.0;
  std::string param;  // mu or truncation index, blank when not applicable
};

struct RunOutcome {
  std::vector<RunRecord> records;
  double best_relerr = 0.0;
  std::size_t kp_used = 0;
  bool kp_applicable = false;
};

struct ConfigurationSummary {
  std::string preconditioner;
  std::string regularizer;
  std::string kp_spec;
  std::size_t runs = 0;
  double avg_best_relerr = 0.0;
};

struct ExperimentResult {
  std::vector<ConfigurationSummary> summary;
  std::vector<std::string> files_written;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& section) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + it.key() + "' in section '" + section + "'");
  }
}

inline std::vector<std::string> string_or_list(const json& v, const std::string& field) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError("field '" + field + "' must hold strings");
      out.push_back(e.get<std::string>());
    }
  } else {
    throw ConfigError("field '" + field + "' must be a string or an array of strings");
  }
  if (out.empty()) throw ConfigError("field '" + field + "' must not be empty");
  return out;
}

inline bool is_one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return true;
  return false;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using detail::check_keys;
  if (!j.is_object()) throw ConfigError("configuration root must be a JSON object");
  check_keys(j, {"problem", "solver", "output"}, "root");
  if (!j.contains("problem")) throw ConfigError("missing section 'problem'");

  ExperimentConfig cfg;
  const auto& p = j.at("problem");
  check_keys(p, {"name", "m", "n", "noise_level", "seed", "runs", "psf", "psf_size"}, "problem");
  if (!p.contains("name")) throw ConfigError("missing field 'problem.name'");
  cfg.problem.name = p.at("name").get<std::string>();
  if (!detail::is_one_of(cfg.problem.name, {"downshift", "circshift", "baart", "heat", "blur2d"}))
    throw ConfigError("unknown problem name '" + cfg.problem.name + "' in field 'problem.name'");
  if (p.contains("m") && p.contains("n"))
    throw ConfigError("give either 'problem.m' or 'problem.n', not both");
  if (p.contains("m")) cfg.problem.size = p.at("m").get<std::size_t>();
  if (p.contains("n")) cfg.problem.size = p.at("n").get<std::size_t>();
  if (p.contains("noise_level")) cfg.problem.noise_level = p.at("noise_level").get<double>();
  if (cfg.problem.noise_level < 0.0) throw ConfigError("field 'problem.noise_level' must be >= 0");
  if (p.contains("seed")) cfg.problem.seed = p.at("seed").get<std::uint64_t>();
  if (p.contains("runs")) cfg.problem.runs = p.at("runs").get<std::size_t>();
  if (cfg.problem.runs < 1) throw ConfigError("field 'problem.runs' must be >= 1");
  if (p.contains("psf")) cfg.problem.psf = p.at("psf").get<std::string>();
  if (!detail::is_one_of(cfg.problem.psf, {"motion", "gaussian", "delta"}))
    throw ConfigError("unknown point-spread function '" + cfg.problem.psf + "' in 'problem.psf'");
  if (p.contains("psf_size")) cfg.problem.psf_size = p.at("psf_size").get<std::size_t>();

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s,
               {"regularizer", "preconditioner", "kp", "kmax", "tau", "tau1_prime",
                "tau1_double_prime", "tau2", "reorth", "lsqr_baseline"},
               "solver");
    if (s.contains("regularizer"))
      cfg.solver.regularizers = detail::string_or_list(s.at("regularizer"), "solver.regularizer");
    if (s.contains("preconditioner"))
      cfg.solver.preconditioners =
          detail::string_or_list(s.at("preconditioner"), "solver.preconditioner");
    for (const auto& r : cfg.solver.regularizers)
      if (!detail::is_one_of(r, {"none", "tikhonov", "tsvd"}))
        throw ConfigError("unknown regularizer '" + r + "' in 'solver.regularizer'");
    for (const auto& pc : cfg.solver.preconditioners)
      if (!detail::is_one_of(pc, {"none", "c1", "c2", "c3", "m1", "m2", "m3", "m4"}))
        throw ConfigError("unknown preconditioner '" + pc + "' in 'solver.preconditioner'");
    if (s.contains("kp")) {
      const auto& kp = s.at("kp");
      if (kp.is_string()) {
        cfg.solver.kp_rule = kp.get<std::string>();
        if (!detail::is_one_of(cfg.solver.kp_rule, {"auto_stop1", "auto_stop2"}))
          throw ConfigError("field 'solver.kp' must be auto_stop1, auto_stop2, or an integer");
      } else if (kp.is_number_unsigned() || kp.is_number_integer()) {
        cfg.solver.kp_rule = "fixed";
        cfg.solver.kp_fixed = kp.get<std::size_t>();
        if (cfg.solver.kp_fixed < 1) throw ConfigError("field 'solver.kp' must be >= 1");
      } else {
        throw ConfigError("field 'solver.kp' must be auto_stop1, auto_stop2, or an integer");
      }
    }
    if (s.contains("kmax")) cfg.solver.kmax = s.at("kmax").get<std::size_t>();
    if (s.contains("tau")) cfg.solver.tau = s.at("tau").get<double>();
    if (cfg.solver.tau < 1.0) throw ConfigError("field 'solver.tau' must be >= 1");
    if (s.contains("tau1_prime")) cfg.solver.tau1_prime = s.at("tau1_prime").get<double>();
    if (s.contains("tau1_double_prime"))
      cfg.solver.tau1_double_prime = s.at("tau1_double_prime").get<double>();
    if (s.contains("tau2")) cfg.solver.tau2 = s.at("tau2").get<double>();
    if (s.contains("reorth")) cfg.solver.reorthogonalize = s.at("reorth").get<bool>();
    if (s.contains("lsqr_baseline")) cfg.solver.lsqr_baseline = s.at("lsqr_baseline").get<bool>();
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_keys(o, {"dir", "emit_svg"}, "output");
    if (o.contains("dir")) cfg.output.dir = o.at("dir").get<std::string>();
    if (o.contains("emit_svg")) cfg.output.emit_svg = o.at("emit_svg").get<bool>();
  }

  // hybrid regularizers drive the discrepancy principle and need delta > 0
  for (const auto& r : cfg.solver.regularizers)
    if (r != "none" && cfg.problem.noise_level <= 0.0)
      throw ConfigError("regularizer '" + r + "' needs 'problem.noise_level' > 0");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

namespace detail {

inline NoisyProblem build_base_problem(const ProblemConfig& p) {
  if (p.name == "downshift") return downshift_problem(p.size);
  if (p.name == "circshift") return circulant_shift_problem(p.size);
  if (p.name == "baart") return baart_problem(p.size, 0.0, 0);
  if (p.name == "heat") return heat_problem(p.size, 0.0, 0);
  if (p.name == "blur2d") {
    Psf psf;
    if (p.psf == "motion")
      psf = motion_psf(p.psf_size);
    else if (p.psf == "gaussian")
      psf = gaussian_psf(p.psf_size, 0.25 * static_cast<double>(p.psf_size));
    else
      psf = delta_psf();
    return blur2d_problem(p.size, psf, Boundary::reflective, 0.0, 0);
  }
  throw ConfigError("unknown problem name '" + p.name + "'");
}

inline std::size_t default_kmax(const std::string& problem_name) {
  return problem_name == "blur2d" ? 100 : 60;
}

inline PreconditionerVariant parse_variant(const std::string& name) {
  if (name == "c1") return PreconditionerVariant::c1;
  if (name == "c2") return PreconditionerVariant::c2;
  if (name == "c3") return PreconditionerVariant::c3;
  if (name == "m1") return PreconditionerVariant::m1;
  if (name == "m2") return PreconditionerVariant::m2;
  if (name == "m3") return PreconditionerVariant::m3;
  return PreconditionerVariant::m4;
}

inline std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

/// One (preconditioner, regularizer) solve on one noise realization.
inline RunOutcome run_single(const NoisyProblem& base, const ComplexVector& b, double delta,
                             std::uint64_t realization_seed, const std::string& prec_name,
                             const std::string& reg_name, const SolverConfig& sc,
                             std::size_t kmax, std::size_t run_index) {
  const LinearOperator& a = base.a;
  const DiscrepancyRule rule{delta, sc.tau};
  const double bnorm = norm(b);
  const double xnorm = norm(base.x_exact);

  LinearOperator m_op = identity_operator(a.dim_in());
  LinearOperator am_op = a;
  RunOutcome out;

  if (prec_name != "none") {
    const PreconditionerVariant variant = parse_variant(prec_name);
    if (prec_name[0] == 'c') {
      const Preconditioner p = circulant_preconditioner(a, variant, realization_seed);
      m_op = p.m_op;
      am_op = p.am_op;
    } else {
      std::size_t kp = sc.kp_fixed;
      if (sc.kp_rule != "fixed") {
        const KpThresholds taus{sc.tau1_prime, sc.tau1_double_prime, sc.tau2};
        const KpRule rule_tag = sc.kp_rule == "auto_stop1" ? KpRule::stop1 : KpRule::stop2;
        const std::size_t scan_max = std::min(kmax, a.dim_in() - 2);
        kp = select_kp(a, b, scan_max, taus, rule_tag, sc.reorthogonalize).kp;
      }
      const bool extra = variant == PreconditionerVariant::m3 || variant == PreconditionerVariant::m4;
      const std::size_t depth = kp + (extra ? 1 : 0);
      const ArnoldiDecomposition d = arnoldi_process(a, b, depth, 1, sc.reorthogonalize);
      if (d.breakdown && d.steps < depth)
        throw SolverFailure("Arnoldi broke down at step " + std::to_string(*d.breakdown) +
                            " before the preconditioner depth " + std::to_string(depth));
      const Preconditioner p = arnoldi_preconditioner(d, variant, a);
      m_op = p.m_op;
      am_op = p.am_op;
      out.kp_used = kp;
      out.kp_applicable = true;
    }
  }

  auto true_relres = [&](const ComplexVector& x) {
    return norm(subtract(a.apply(x), b)) / bnorm;
  };

  double best = std::numeric_limits<double>::infinity();
  if (reg_name == "none") {
    SolutionMap map;
    if (prec_name != "none") map = [m_op](const ComplexVector& y) { return m_op.apply(y); };
    const SolveHistory h =
        gmres(am_op, b, rule, kmax, &base.x_exact, map, sc.reorthogonalize);
    for (std::size_t k = 0; k < h.iterates.size(); ++k) {
      RunRecord rec;
      rec.run = run_index;
      rec.iter = k + 1;
      rec.relerr = h.iterate_relerr[k];
      rec.relres_projected = h.relres[k];
      rec.relres_true = true_relres(h.iterates[k]);
      out.records.push_back(std::move(rec));
      best = std::min(best, h.iterate_relerr[k]);
    }
  } else {
    const bool tsvd = reg_name == "tsvd";
    ArnoldiBuilder builder(am_op, b, sc.reorthogonalize);
    for (std::size_t k = 1; k <= kmax; ++k) {
      if (builder.broken_down()) break;
      builder.step();
      const ArnoldiDecomposition d = builder.finish();
      if (d.steps < k) break;
      RunRecord rec;
      rec.run = run_index;
      rec.iter = k;
      ComplexVector x;
      if (tsvd) {
        const TsvdSolution t = arnoldi_tsvd(d, m_op, rule);
        rec.relres_projected = t.discrepancy / bnorm;
        rec.param = std::to_string(t.truncation);
        x = t.x;
      } else {
        const TikhonovSolution t = arnoldi_tikhonov(d, m_op, rule);
        rec.relres_projected = t.discrepancy / bnorm;
        rec.param = format_param(t.mu);
        x = t.x;
      }
      rec.relerr = norm(subtract(base.x_exact, x)) / xnorm;
      rec.relres_true = true_relres(x);
      best = std::min(best, rec.relerr);
      out.records.push_back(std::move(rec));
    }
  }
  if (out.records.empty()) throw SolverFailure("no iterations were completed");
  out.best_relerr = best;
  return out;
}

inline RunOutcome run_lsqr_baseline(const NoisyProblem& base, const ComplexVector& b, double delta,
                                    const SolverConfig& sc, std::size_t kmax,
                                    std::size_t run_index) {
  const DiscrepancyRule rule{delta, sc.tau};
  const double bnorm = norm(b);
  const SolveHistory h = lsqr(base.a, b, rule, kmax, &base.x_exact);
  RunOutcome out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < h.iterates.size(); ++k) {
    RunRecord rec;
    rec.run = run_index;
    rec.iter = k + 1;
    rec.relerr = h.iterate_relerr[k];
    rec.relres_projected = h.relres[k];
    rec.relres_true = norm(subtract(base.a.apply(h.iterates[k]), b)) / bnorm;
    best = std::min(best, rec.relerr);
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) throw SolverFailure("no iterations were completed");
  out.best_relerr = best;
  return out;
}

inline void write_history_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw SolverFailure("cannot open output file " + path);
  out << "run,iter,relerr,relres_projected,relres_true,param\n";
  char buf[160];
  for (const RunRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.12e,%.12e,%.12e,", r.run, r.iter, r.relerr,
                  r.relres_projected, r.relres_true);
    out << buf << r.param << "\n";
  }
}

inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = 0;
  if (const char* env = std::getenv("KRYLOVREG_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  if (n == 0) n = std::max<unsigned>(1, std::thread::hardware_concurrency());
  return std::min(n, std::max<std::size_t>(jobs, 1));
}

}  // namespace detail

/// Runs every (preconditioner, regularizer) combination of a configuration
/// over `runs` noise realizations (seeds seed, seed+1, ...), writing one
/// history CSV per realization and configuration plus a summary table of
/// the average best relative errors; noise realizations run on a worker
/// pool (override the size with KRYLOVREG_THREADS).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const NoisyProblem base = detail::build_base_problem(cfg.problem);
  const std::size_t kmax_default = detail::default_kmax(cfg.problem.name);
  std::size_t kmax = cfg.solver.kmax > 0 ? cfg.solver.kmax : kmax_default;
  kmax = std::min(kmax, base.a.dim_in() - 1);

  fs::create_directories(cfg.output.dir);

  struct Job {
    std::string prec, reg;
  };
  std::vector<Job> jobs;
  for (const auto& pc : cfg.solver.preconditioners)
    for (const auto& rg : cfg.solver.regularizers) jobs.push_back({pc, rg});

  const std::size_t runs = cfg.problem.runs;
  const bool single_config = jobs.size() == 1 && !cfg.solver.lsqr_baseline;

  // results[job][run]
  std::vector<std::vector<RunOutcome>> results(jobs.size() + (cfg.solver.lsqr_baseline ? 1 : 0),
                                               std::vector<RunOutcome>(runs));
  std::vector<std::string> files(runs * results.size());
  std::atomic<std::size_t> next_run{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next_run.fetch_add(1);
      if (r >= runs || failed.load()) return;
      try {
        const std::uint64_t seed_r = cfg.problem.seed + r;
        const NoiseRealization noise =
            add_noise(base.b_exact, cfg.problem.noise_level, seed_r);
        for (std::size_t jb = 0; jb < jobs.size(); ++jb) {
          RunOutcome outcome = detail::run_single(base, noise.b, noise.delta, seed_r,
                                                  jobs[jb].prec, jobs[jb].reg, cfg.solver, kmax, r);
          const std::string name =
              single_config ? "history_r" + std::to_string(r) + ".csv"
                            : "history_" + jobs[jb].prec + "_" + jobs[jb].reg + "_r" +
                                  std::to_string(r) + ".csv";
          const std::string path = (fs::path(cfg.output.dir) / name).string();
          detail::write_history_csv(path, outcome.records);
          files[jb * runs + r] = path;
          results[jb][r] = std::move(outcome);
        }
        if (cfg.solver.lsqr_baseline) {
          RunOutcome outcome =
              detail::run_lsqr_baseline(base, noise.b, noise.delta, cfg.solver, kmax, r);
          const std::string path =
              (fs::path(cfg.output.dir) / ("history_lsqr_r" + std::to_string(r) + ".csv")).string();
          detail::write_history_csv(path, outcome.records);
          files[jobs.size() * runs + r] = path;
          results[jobs.size()][r] = std::move(outcome);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure_message.empty()) failure_message = e.what();
      }
    }
  };

  const std::size_t nthreads = detail::worker_count(runs);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load()) throw SolverFailure(failure_message);

  ExperimentResult result;
  for (const std::string& f : files)
    if (!f.empty()) result.files_written.push_back(f);

  const std::string kp_spec =
      cfg.solver.kp_rule == "fixed" ? std::to_string(cfg.solver.kp_fixed) : cfg.solver.kp_rule;
  for (std::size_t jb = 0; jb < jobs.size(); ++jb) {
    ConfigurationSummary s;
    s.preconditioner = jobs[jb].prec;
    s.regularizer = jobs[jb].reg;
    s.kp_spec = (jobs[jb].prec[0] == 'm') ? kp_spec : "-";
    s.runs = runs;
    double sum = 0.0;
    for (const RunOutcome& o : results[jb]) sum += o.best_relerr;
    s.avg_best_relerr = sum / static_cast<double>(runs);
    result.summary.push_back(std::move(s));
  }
  if (cfg.solver.lsqr_baseline) {
    ConfigurationSummary s;
    s.preconditioner = "lsqr";
    s.regularizer = "-";
    s.kp_spec = "-";
    s.runs = runs;
    double sum = 0.0;
    for (const RunOutcome& o : results[jobs.size()]) sum += o.best_relerr;
    s.avg_best_relerr = sum / static_cast<double>(runs);
    result.summary.push_back(std::move(s));
  }

  const std::string summary_path = (fs::path(cfg.output.dir) / "summary.csv").string();
  {
    std::ofstream out(summary_path);
    if (!out) throw SolverFailure("cannot open output file " + summary_path);
    out << "preconditioner,regularizer,kp,runs,avg_best_relerr\n";
    char buf[64];
    for (const ConfigurationSummary& s : result.summary) {
      std::snprintf(buf, sizeof(buf), "%.12e", s.avg_best_relerr);
      out << s.preconditioner << "," << s.regularizer << "," << s.kp_spec << "," << s.runs << ","
          << buf << "\n";
    }
  }
  result.files_written.push_back(summary_path);

  if (cfg.output.emit_svg) {
    SvgLineChart chart(cfg.problem.name + " relative error history (realization 0)", "iteration",
                       "relative error");
    for (std::size_t jb = 0; jb < jobs.size(); ++jb) {
      std::vector<double> ys;
      for (const RunRecord& rec : results[jb][0].records) ys.push_back(rec.relerr);
      chart.add_series(jobs[jb].prec + "/" + jobs[jb].reg, ys);
    }
    if (cfg.solver.lsqr_baseline) {
      std::vector<double> ys;
      for (const RunRecord& rec : results[jobs.size()][0].records) ys.push_back(rec.relerr);
      chart.add_series("lsqr", ys);
    }
    const std::string svg_path = (fs::path(cfg.output.dir) / "history.svg").string();
    chart.write(svg_path);
    result.files_written.push_back(svg_path);
  }
  return result;
}

}  // namespace krylovreg
