#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sqkf/bench/compare.hpp"
#include "sqkf/bench/config.hpp"
#include "sqkf/bench/experiment.hpp"
#include "sqkf/errors.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitOverTolerance = 1;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitIoFailure = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Benchmark harness comparing the square-root Kalman filter against "
      "the conventional filter across working precisions"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a filter comparison experiment");
  std::string config_path;
  std::string scenario;
  std::string precision;
  std::string out_dir;
  std::string input_path;
  std::string model_path;
  std::size_t n = 0, m = 0, p = 0, steps = 0, trials = 0;
  std::uint64_t seed = 0;
  double epsilon = 0;
  auto* o_config = run->add_option(
      "--config", config_path, "JSON config file; explicit flags override it");
  auto* o_scenario = run->add_option("--scenario", scenario,
                                     "random | ill-conditioned | from-file");
  auto* o_n = run->add_option("--n", n, "state dimension (random scenario)");
  auto* o_m = run->add_option("--m", m, "measurement dimension");
  auto* o_p = run->add_option("--p", p, "control dimension");
  auto* o_steps = run->add_option("--steps", steps, "steps per trial");
  auto* o_trials = run->add_option("--trials", trials, "number of trials");
  auto* o_seed = run->add_option("--seed", seed, "experiment seed");
  auto* o_precision =
      run->add_option("--precision", precision, "single | double");
  auto* o_epsilon = run->add_option(
      "--epsilon", epsilon, "conditioning parameter (ill-conditioned scenario)");
  auto* o_out = run->add_option("--out", out_dir, "output directory");
  auto* o_input = run->add_option("--input", input_path,
                                  "trajectory CSV (from-file scenario)");
  auto* o_model =
      run->add_option("--model", model_path, "model JSON (from-file scenario)");

  auto* cmp = app.add_subcommand("compare", "Compare two trace CSV files");
  std::string a_path, b_path;
  double tol = 0;
  cmp->add_option("--a", a_path, "first CSV file")->required();
  cmp->add_option("--b", b_path, "second CSV file")->required();
  cmp->add_option("--tol", tol, "per-cell tolerance (absolute or relative)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigInvalid;
  }

  try {
    if (run->parsed()) {
      sqkf::bench::ExperimentConfig cfg;
      if (o_config->count()) {
        cfg = sqkf::bench::config_from_json_file(config_path);
      }
      if (o_scenario->count()) {
        cfg.scenario = sqkf::bench::scenario_from_string(scenario);
      }
      if (o_n->count()) cfg.state_dim = n;
      if (o_m->count()) cfg.measurement_dim = m;
      if (o_p->count()) cfg.control_dim = p;
      if (o_steps->count()) cfg.steps = steps;
      if (o_trials->count()) cfg.trials = trials;
      if (o_seed->count()) cfg.seed = seed;
      if (o_precision->count()) {
        cfg.precision = sqkf::bench::precision_from_string(precision);
      }
      if (o_epsilon->count()) cfg.epsilon = epsilon;
      if (o_out->count()) cfg.output_dir = out_dir;
      if (o_input->count()) cfg.input_trajectory = input_path;
      if (o_model->count()) cfg.input_model = model_path;

      const auto summary = sqkf::bench::run_experiment(cfg);
      std::cout << "wrote " << (cfg.output_dir / "summary.json").string()
                << "\n"
                << "aggregate: " << summary["aggregate"].dump() << "\n";
      return kExitSuccess;
    }
    // compare subcommand
    const auto report = sqkf::bench::compare_traces(a_path, b_path, tol);
    std::cout << sqkf::bench::format_report(report);
    return report.within_tolerance ? kExitSuccess : kExitOverTolerance;
  } catch (const sqkf::ConfigInvalid& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfigInvalid;
  } catch (const sqkf::IoError& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return kExitIoFailure;
  } catch (const sqkf::SchemaMismatch& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return kExitConfigInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
}
