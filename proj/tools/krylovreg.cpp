// Command-line driver: batch experiment runs, matrix-nearness reports,
// and test-problem export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <krylovreg/experiment.hpp>
#include <krylovreg/matrix_market.hpp>
#include <krylovreg/nearness.hpp>
#include <krylovreg/problems.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

using namespace krylovreg;

int cmd_run(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
    if (!out_override.empty()) cfg.output.dir = out_override;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const ExperimentResult result = run_experiment(cfg);
    for (const ConfigurationSummary& s : result.summary)
      std::printf("%-6s %-9s kp=%-10s runs=%-3zu avg_best_relerr=%.6e\n", s.preconditioner.c_str(),
                  s.regularizer.c_str(), s.kp_spec.c_str(), s.runs, s.avg_best_relerr);
    std::printf("wrote %zu files to %s\n", result.files_written.size(), cfg.output.dir.c_str());
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_nearness(const std::string& matrix_path, const std::string& builtin, std::size_t m) {
  ComplexMatrix a;
  try {
    if (!matrix_path.empty()) {
      a = read_matrix_market(matrix_path);
    } else if (builtin == "downshift") {
      a = downshift_matrix(m);
    } else if (builtin == "circshift") {
      a = downshift_matrix(m);
      a(0, m - 1) = 1.0;
    } else if (builtin == "baart") {
      a = *baart_problem(m, 0.0, 0).a.dense_matrix();
    } else if (builtin == "heat") {
      a = *heat_problem(m, 0.0, 0).a.dense_matrix();
    } else {
      std::cerr << "error: unknown builtin '" << builtin << "'\n";
      return kExitConfig;
    }
    if (a.rows() != a.cols()) {
      std::cerr << "error: nearness needs a square matrix, got " << a.rows() << "x" << a.cols()
                << "\n";
      return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const NearnessReport r = compute_nearness_report(a);
    const double f = r.frobenius > 0.0 ? r.frobenius : 1.0;
    nlohmann::json j;
    j["dist_h"] = r.dist_hermitian / f;
    j["dist_skew"] = r.dist_skew / f;
    j["dist_hpsd"] = r.dist_hpsd / f;
    j["dist_hnsd"] = r.dist_hnsd / f;
    j["dist_g"] = r.dist_g / f;
    j["dist_gplus"] = r.dist_gplus / f;  // serialized as null when degenerate
    j["theta_hat"] = r.theta_hat;
    j["gamma_hat"] = r.gamma_hat;
    j["degenerate"] = r.degenerate_g;
    j["circulant_gap"] = r.circulant_gap / f;
    std::cout << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_problem(const std::string& name, std::size_t m, double noise, std::uint64_t seed,
                const std::string& emit_dir, const std::string& psf_name, std::size_t psf_size) {
  NoisyProblem p;
  try {
    if (name == "downshift") {
      p = downshift_problem(m);
    } else if (name == "circshift") {
      p = circulant_shift_problem(m);
    } else if (name == "baart") {
      p = baart_problem(m, noise, seed);
    } else if (name == "heat") {
      p = heat_problem(m, noise, seed);
    } else if (name == "blur2d") {
      Psf psf = psf_name == "gaussian" ? gaussian_psf(psf_size, 0.25 * psf_size)
                : psf_name == "delta"  ? delta_psf()
                                       : motion_psf(psf_size);
      p = blur2d_problem(m, psf, Boundary::reflective, noise, seed);
    } else {
      std::cerr << "error: unknown problem '" << name << "'\n";
      return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    namespace fs = std::filesystem;
    fs::create_directories(emit_dir);
    const auto path = [&](const char* base) { return (fs::path(emit_dir) / base).string(); };
    write_matrix_market(path("A.mtx"), *p.a.dense_matrix());
    write_matrix_market(path("b.mtx"), p.b);
    write_matrix_market(path("b_exact.mtx"), p.b_exact);
    write_matrix_market(path("x_exact.mtx"), p.x_exact);
    nlohmann::json manifest;
    manifest["problem"] = name;
    manifest["m"] = m;
    manifest["noise_level"] = noise;
    manifest["seed"] = seed;
    manifest["delta"] = p.delta;
    manifest["files"] = {{"matrix", "A.mtx"},
                         {"rhs", "b.mtx"},
                         {"rhs_exact", "b_exact.mtx"},
                         {"solution", "x_exact.mtx"}};
    std::ofstream mf(path("manifest.json"));
    if (!mf) throw std::runtime_error("cannot write manifest.json");
    mf << manifest.dump(2) << "\n";
    std::printf("wrote problem '%s' (m=%zu) to %s\n", name.c_str(), m, emit_dir.c_str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularizing Krylov methods with circulant and Arnoldi-based right "
               "preconditioners for linear discrete ill-posed problems"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  CLI::App* run = app.add_subcommand("run", "run a batch experiment from a JSON configuration");
  run->add_option("--config", config_path, "configuration file")->required();
  run->add_option("--out", out_override, "override the output directory");

  std::string matrix_path, builtin = "downshift";
  std::size_t near_m = 200;
  CLI::App* nearness = app.add_subcommand("nearness", "matrix-nearness report as JSON");
  auto* opt_matrix = nearness->add_option("--matrix", matrix_path, "Matrix Market file");
  auto* opt_builtin = nearness->add_option("--builtin", builtin,
                                           "builtin matrix: downshift|circshift|baart|heat");
  nearness->add_option("--m", near_m, "builtin matrix size");
  opt_matrix->excludes(opt_builtin);

  std::string prob_name, emit_dir = ".", psf_name = "motion";
  std::size_t prob_m = 200, psf_size = 7;
  double prob_noise = 0.0;
  std::uint64_t prob_seed = 0;
  CLI::App* problem = app.add_subcommand("problem", "export a test problem as Matrix Market files");
  problem->add_option("--name", prob_name, "downshift|circshift|baart|heat|blur2d")->required();
  problem->add_option("--m", prob_m, "problem size (image side for blur2d)")->required();
  problem->add_option("--noise", prob_noise, "relative noise level");
  problem->add_option("--seed", prob_seed, "noise seed");
  problem->add_option("--emit", emit_dir, "output directory")->required();
  problem->add_option("--psf", psf_name, "blur2d point-spread function: motion|gaussian|delta");
  problem->add_option("--psf-size", psf_size, "blur2d point-spread function size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return cmd_run(config_path, out_override);
  if (nearness->parsed()) return cmd_nearness(matrix_path, builtin, near_m);
  if (problem->parsed())
    return cmd_problem(prob_name, prob_m, prob_noise, prob_seed, emit_dir, psf_name, psf_size);
  return kExitConfig;
}
