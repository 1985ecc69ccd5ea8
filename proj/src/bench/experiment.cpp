#include "sqkf/bench/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sqkf/bench/model_io.hpp"
#include "sqkf/bench/sym_eig.hpp"
#include "sqkf/bench/trace.hpp"
#include "sqkf/errors.hpp"
#include "sqkf/filter.hpp"
#include "sqkf/random.hpp"
#include "sqkf/sim.hpp"
#include "sqkf/trajectory_io.hpp"

namespace sqkf::bench {

namespace {

using nlohmann::ordered_json;

struct CovarianceHealth {
  double min_eigenvalue;
  double norm;  // largest |eigenvalue|
  bool indefinite;
};

/// Health metric of an implied covariance. The indefiniteness threshold
/// is -10 * eps * norm with eps of the filter's working precision; the
/// eigenvalues themselves are always computed in double.
CovarianceHealth covariance_health(const Matrix<double>& cov,
                                   double working_eps) {
  const std::vector<double> eigs = symmetric_eigenvalues(cov);
  const double lo = eigs.front();
  const double norm = std::max(std::abs(eigs.front()), std::abs(eigs.back()));
  return {lo, norm, lo < -10.0 * working_eps * norm};
}

double mean_squared_error(const std::vector<double>& mean,
                          const std::vector<double>& truth) {
  double acc = 0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double d = mean[i] - truth[i];
    acc += d * d;
  }
  return acc / static_cast<double>(mean.size());
}

/// Accumulates one filter's trace and summary statistics over a trial.
struct FilterRun {
  explicit FilterRun(std::size_t state_dim) { trace.state_dim = state_dim; }

  FilterTrace trace;
  std::optional<std::size_t> first_indefinite;
  std::optional<std::size_t> error_step;
  std::string error_message;
  double sum_mse = 0;
  double last_mse = 0;
  double max_discrepancy = 0;
  std::size_t recorded_steps = 0;
  bool alive = true;

  void record(std::size_t step, std::vector<double> mean,
              const Matrix<double>& cov, const std::vector<double>& truth,
              double innovation_norm, double working_eps,
              const Matrix<double>* oracle_cov) {
    const CovarianceHealth health = covariance_health(cov, working_eps);
    const double mse = mean_squared_error(mean, truth);
    if (health.indefinite && !first_indefinite) first_indefinite = step;
    if (oracle_cov) {
      const double denom = oracle_cov->frobenius_norm();
      const double disc =
          (cov - *oracle_cov).frobenius_norm() / (denom > 0 ? denom : 1.0);
      max_discrepancy = std::max(max_discrepancy, disc);
    }
    sum_mse += mse;
    last_mse = mse;
    ++recorded_steps;
    trace.rows.push_back(TraceRow{step, std::move(mean), health.min_eigenvalue,
                                  health.norm, mse, innovation_norm,
                                  health.indefinite, false});
  }

  /// Terminal failure row: the last belief re-evaluated against the
  /// current truth, flagged, after which the filter stops.
  void fail(std::size_t step, std::string message,
            const std::vector<double>& stale_mean,
            const Matrix<double>& stale_cov, const std::vector<double>& truth,
            double working_eps) {
    const CovarianceHealth health = covariance_health(stale_cov, working_eps);
    trace.rows.push_back(TraceRow{step, stale_mean, health.min_eigenvalue,
                                  health.norm,
                                  mean_squared_error(stale_mean, truth), 0.0,
                                  health.indefinite, true});
    error_step = step;
    error_message = std::move(message);
    alive = false;
  }

  ordered_json summary_json() const {
    ordered_json j;
    if (recorded_steps > 0) {
      j["rmse"] = std::sqrt(sum_mse / static_cast<double>(recorded_steps));
      j["terminal_rmse"] = std::sqrt(last_mse);
    } else {
      j["rmse"] = nullptr;
      j["terminal_rmse"] = nullptr;
    }
    if (first_indefinite) {
      j["first_indefinite_step"] = *first_indefinite;
    } else {
      j["first_indefinite_step"] = nullptr;
    }
    j["max_cov_discrepancy_vs_oracle"] = max_discrepancy;
    if (error_step) {
      j["error"] = {{"step", *error_step}, {"message", error_message}};
    } else {
      j["error"] = nullptr;
    }
    return j;
  }
};

struct TrialRun {
  FilterRun sqkf;
  FilterRun kf;
  FilterRun oracle;
};

/// Run all three filters over one trajectory. WorkingScalar is the
/// precision of the square-root and conventional filters; the oracle is
/// always the conventional filter in double.
template <typename WorkingScalar>
TrialRun run_filters(const SystemModel<double>& model_d,
                     const StateEstimate<double>& prior_d,
                     const Trajectory<double>& traj) {
  const std::size_t n = model_d.state_dim();
  const double eps_w =
      static_cast<double>(std::numeric_limits<WorkingScalar>::epsilon());
  const double eps_d = std::numeric_limits<double>::epsilon();
  TrialRun run{FilterRun(n), FilterRun(n), FilterRun(n)};

  const SystemModel<WorkingScalar> model =
      model_d.template cast<WorkingScalar>();
  const Matrix<double> prior_cov = prior_d.factor.transpose_times_self();

  StateEstimate<WorkingScalar> sq = prior_d.template cast<WorkingScalar>();
  FullCovEstimate<WorkingScalar> kf{
      vector_cast<WorkingScalar>(prior_d.mean),
      prior_cov.template cast<WorkingScalar>()};
  FullCovEstimate<double> oracle{prior_d.mean, prior_cov};

  // Last successfully evaluated belief per filter, kept in double for
  // failure rows.
  std::vector<double> sq_mean = prior_d.mean;
  Matrix<double> sq_cov = prior_cov;
  std::vector<double> kf_mean = prior_d.mean;
  Matrix<double> kf_cov = prior_cov;

  const std::size_t steps = traj.steps();
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t step = t + 1;
    const std::vector<double>& u_d = traj.controls[t];
    const std::vector<double>& y_d = traj.measurements[t];
    const std::vector<double>& truth = traj.states[t + 1];
    // Both working-precision filters see the identical rounded stream.
    const std::vector<WorkingScalar> u = vector_cast<WorkingScalar>(u_d);
    const std::vector<WorkingScalar> y = vector_cast<WorkingScalar>(y_d);

    const Matrix<double>* oracle_cov = nullptr;
    if (run.oracle.alive) {
      try {
        const std::vector<double> mean_pred =
            detail::advance_mean(model_d, oracle.mean, u_d);
        const std::vector<double> z =
            vector_sub(y_d, model_d.measurement_map() * mean_pred);
        oracle = kf_step(oracle, model_d, u_d, y_d);
        run.oracle.record(step, oracle.mean, oracle.covariance, truth,
                          vector_norm(z), eps_d, &oracle.covariance);
        oracle_cov = &oracle.covariance;
      } catch (const std::exception& e) {
        run.oracle.fail(step, e.what(), oracle.mean, oracle.covariance, truth,
                        eps_d);
      }
    }

    if (run.sqkf.alive) {
      try {
        const StateEstimate<WorkingScalar> pred = predict(sq, model, u);
        const Innovation<WorkingScalar> inn = innovate(pred, model, y);
        const Matrix<WorkingScalar> gain =
            kalman_gain(pred, model.measurement_map(), inn.factor);
        sq = update(pred, model, inn, gain);
        sq_mean = vector_cast<double>(sq.mean);
        sq_cov = sq.factor.template cast<double>().transpose_times_self();
        run.sqkf.record(step, sq_mean, sq_cov, truth,
                        vector_norm(vector_cast<double>(inn.residual)), eps_w,
                        oracle_cov);
      } catch (const std::exception& e) {
        run.sqkf.fail(step, e.what(), sq_mean, sq_cov, truth, eps_w);
      }
    }

    if (run.kf.alive) {
      try {
        const std::vector<WorkingScalar> mean_pred =
            detail::advance_mean(model, kf.mean, u);
        const std::vector<WorkingScalar> z =
            vector_sub(y, model.measurement_map() * mean_pred);
        kf = kf_step(kf, model, u, y);
        kf_mean = vector_cast<double>(kf.mean);
        kf_cov = kf.covariance.template cast<double>();
        run.kf.record(step, kf_mean, kf_cov, truth,
                      vector_norm(vector_cast<double>(z)), eps_w, oracle_cov);
      } catch (const std::exception& e) {
        run.kf.fail(step, e.what(), kf_mean, kf_cov, truth, eps_w);
      }
    }
  }
  return run;
}

ordered_json config_echo(const ExperimentConfig& config) {
  // The output directory is deliberately not echoed so that identical
  // runs into different directories stay byte-comparable.
  ordered_json j;
  j["scenario"] = to_string(config.scenario);
  j["n"] = config.state_dim;
  j["m"] = config.measurement_dim;
  j["p"] = config.control_dim;
  j["steps"] = config.steps;
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["precision"] = to_string(config.precision);
  j["epsilon"] = config.epsilon ? ordered_json(*config.epsilon)
                                : ordered_json(nullptr);
  j["input"] = config.input_trajectory
                   ? ordered_json(config.input_trajectory->string())
                   : ordered_json(nullptr);
  j["model"] = config.input_model ? ordered_json(config.input_model->string())
                                  : ordered_json(nullptr);
  return j;
}

}  // namespace

std::string trial_filename(std::size_t trial, const std::string& suffix) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial_%03zu_", trial);
  return std::string(buf) + suffix;
}

ordered_json run_experiment(const ExperimentConfig& config) {
  config.validate();
  try {
    std::filesystem::create_directories(config.output_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(std::string("cannot create output directory: ") + e.what());
  }

  // From-file inputs are loaded once and shared across trials.
  std::optional<SystemModel<double>> file_model;
  std::optional<Trajectory<double>> file_trajectory;
  if (config.scenario == Scenario::kFromFile) {
    file_model = read_model_json(*config.input_model);
    file_trajectory = read_trajectory_csv(*config.input_trajectory);
    if (file_trajectory->states[0].size() != file_model->state_dim() ||
        file_trajectory->measurements[0].size() !=
            file_model->measurement_dim() ||
        file_trajectory->controls[0].size() != file_model->control_dim()) {
      throw ConfigInvalid("trajectory dimensions do not match the model");
    }
  }

  ordered_json summary;
  summary["config"] = config_echo(config);
  summary["trials"] = ordered_json::array();

  double max_disc_sqkf = 0;
  double max_disc_kf = 0;
  std::size_t indefinite_sqkf = 0;
  std::size_t indefinite_kf = 0;
  std::size_t errored = 0;

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);
    ordered_json tj;
    tj["trial"] = trial;
    tj["seed"] = trial_seed;
    try {
      std::optional<SystemModel<double>> model;
      StateEstimate<double> prior{{}, UpperTriangular<double>(1)};
      if (config.scenario == Scenario::kRandom) {
        model = random_system(config.state_dim, config.measurement_dim,
                              config.control_dim, 0.9,
                              derive_seed(trial_seed, 1));
        prior = StateEstimate<double>{
            std::vector<double>(model->state_dim(), 0.0),
            UpperTriangular<double>::identity(model->state_dim())};
      } else if (config.scenario == Scenario::kIllConditioned) {
        auto [m, p] = ill_conditioned_problem(*config.epsilon);
        model = std::move(m);
        prior = std::move(p);
      } else {
        model = *file_model;
        prior = StateEstimate<double>{
            std::vector<double>(model->state_dim(), 0.0),
            UpperTriangular<double>::identity(model->state_dim())};
      }

      Trajectory<double> traj{{}, {}, {}, 0};
      if (config.scenario == Scenario::kFromFile) {
        traj = *file_trajectory;
      } else {
        // Draw the true initial state from the prior, then simulate.
        Rng aux(derive_seed(trial_seed, 2));
        std::vector<double> xi(model->state_dim());
        for (double& v : xi) v = aux.normal();
        const std::vector<double> x0 =
            vector_add(prior.mean, prior.factor.transpose_times(xi));
        std::vector<std::vector<double>> controls;
        if (model->control_dim() > 0) {
          controls.resize(config.steps);
          for (auto& u : controls) {
            u.resize(model->control_dim());
            for (double& v : u) v = aux.normal();
          }
        }
        traj = simulate(*model, x0, controls, config.steps,
                        derive_seed(trial_seed, 3));
      }

      write_model_json(config.output_dir / trial_filename(trial, "model.json"),
                       *model);
      write_trajectory_csv(
          config.output_dir / trial_filename(trial, "trajectory.csv"), traj);

      const TrialRun run =
          config.precision == Precision::kSingle
              ? run_filters<float>(*model, prior, traj)
              : run_filters<double>(*model, prior, traj);

      write_trace_csv(
          config.output_dir / trial_filename(trial, "sqkf_trace.csv"),
          run.sqkf.trace);
      write_trace_csv(config.output_dir / trial_filename(trial, "kf_trace.csv"),
                      run.kf.trace);
      write_trace_csv(
          config.output_dir / trial_filename(trial, "oracle_trace.csv"),
          run.oracle.trace);

      tj["filters"] = {{"sqkf", run.sqkf.summary_json()},
                       {"kf", run.kf.summary_json()},
                       {"oracle", run.oracle.summary_json()}};
      tj["error"] = nullptr;

      max_disc_sqkf = std::max(max_disc_sqkf, run.sqkf.max_discrepancy);
      max_disc_kf = std::max(max_disc_kf, run.kf.max_discrepancy);
      indefinite_sqkf += run.sqkf.first_indefinite.has_value();
      indefinite_kf += run.kf.first_indefinite.has_value();
      if (run.sqkf.error_step || run.kf.error_step || run.oracle.error_step) {
        ++errored;
      }
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      // Setup failures (model construction, precision cast, ...) are
      // recorded against the trial; the batch continues.
      tj["error"] = e.what();
      ++errored;
    }
    summary["trials"].push_back(std::move(tj));
  }

  summary["aggregate"] = {{"max_cov_discrepancy_sqkf", max_disc_sqkf},
                          {"max_cov_discrepancy_kf", max_disc_kf},
                          {"trials_with_indefinite_sqkf", indefinite_sqkf},
                          {"trials_with_indefinite_kf", indefinite_kf},
                          {"trials_with_error", errored}};

  const std::filesystem::path summary_path =
      config.output_dir / "summary.json";
  std::ofstream out(summary_path);
  if (!out) throw IoError("cannot open " + summary_path.string());
  out << summary.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + summary_path.string());
  return summary;
}

}  // namespace sqkf::bench
