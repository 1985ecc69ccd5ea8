#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sqkf/filter.hpp"
#include "sqkf/sim.hpp"
#include "test_support.hpp"

using namespace sqkf;
using test_support::from_eigen;
using test_support::rel_frobenius;
using test_support::to_eigen;

namespace {

SystemModel<double> scalar_model(double a, double c, double gw, double gv) {
  return SystemModel<double>(
      Matrix<double>(1, 1, {a}), std::nullopt, Matrix<double>(1, 1, {c}),
      UpperTriangular<double>::scaled_identity(1, gw),
      UpperTriangular<double>::scaled_identity(1, gv));
}

/// Mean and covariance of the reference filter, one step, via Eigen.
struct EigenKf {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

EigenKf eigen_kf_step(const EigenKf& est, const SystemModel<double>& model,
                      const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd a = to_eigen(model.dynamics());
  const Eigen::MatrixXd c = to_eigen(model.measurement_map());
  const Eigen::MatrixXd w = to_eigen(model.process_noise_factor().dense());
  const Eigen::MatrixXd v = to_eigen(model.measurement_noise_factor().dense());
  const Eigen::MatrixXd wg = w.transpose() * w;
  const Eigen::MatrixXd vg = v.transpose() * v;

  Eigen::VectorXd mp = a * est.mean;
  if (model.control_map()) mp += to_eigen(*model.control_map()) * u;
  const Eigen::MatrixXd pp = a * est.cov * a.transpose() + wg;
  const Eigen::MatrixXd s = c * pp * c.transpose() + vg;
  const Eigen::MatrixXd gain = pp * c.transpose() * s.inverse();
  const Eigen::VectorXd z = y - c * mp;
  const Eigen::MatrixXd ikc =
      Eigen::MatrixXd::Identity(pp.rows(), pp.cols()) - gain * c;
  return {mp + gain * z,
          ikc * pp * ikc.transpose() + gain * vg * gain.transpose()};
}

}  // namespace

TEST_CASE("predict: scalar full-covariance oracle") {
  const auto model = scalar_model(2.0, 1.0, 1.0, 1.0);
  const StateEstimate<double> est{{1.0},
                                  UpperTriangular<double>::identity(1)};
  const auto pred = predict(est, model);
  CHECK(pred.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
  // Sigma' = 2*1*2 + 1 = 5
  CHECK(pred.factor(0, 0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("predict: identity dynamics with zero process noise is a no-op") {
  Rng rng(3);
  const auto spd = test_support::random_spd(3, 10.0, 1.0, rng);
  const auto factor = cholesky(from_eigen(spd));
  const StateEstimate<double> est{{0.3, -0.7, 1.1}, factor};
  SystemModel<double> model(Matrix<double>::identity(3), std::nullopt,
                            Matrix<double>::identity(3),
                            UpperTriangular<double>(3),
                            UpperTriangular<double>::identity(3));
  const auto pred = predict(est, model);
  CHECK(pred.mean == est.mean);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j)
      CHECK(pred.factor(i, j) ==
            doctest::Approx(factor(i, j)).epsilon(1e-14));
}

TEST_CASE("predict: factor Gram matches the full-covariance recursion") {
  const auto model = random_system(3, 2, 1, 0.9, 77);
  Rng rng(8);
  const auto prior_cov = test_support::random_spd(3, 5.0, 1.0, rng);
  const StateEstimate<double> est{{0.1, 0.2, -0.4},
                                  cholesky(from_eigen(prior_cov))};
  const auto pred = predict(est, model, {0.5});
  const Eigen::MatrixXd a = to_eigen(model.dynamics());
  const Eigen::MatrixXd w = to_eigen(model.process_noise_factor().dense());
  const Eigen::MatrixXd expected =
      a * to_eigen(est.factor.transpose_times_self()) * a.transpose() +
      w.transpose() * w;
  CHECK(rel_frobenius(to_eigen(pred.factor.transpose_times_self()), expected) <=
        1e-12);
}

TEST_CASE("innovate: scalar oracle") {
  const auto model = scalar_model(1.0, 1.0, 1.0, 1.0);
  const StateEstimate<double> pred{{1.0}, UpperTriangular<double>::identity(1)};
  const auto inn = innovate(pred, model, {3.0});
  CHECK(inn.residual[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(inn.factor(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("innovate: zero measurement map passes the noise factor through") {
  SystemModel<double> model(Matrix<double>::identity(3), std::nullopt,
                            Matrix<double>(2, 3),
                            UpperTriangular<double>(3),
                            UpperTriangular<double>::scaled_identity(2, 0.5));
  const StateEstimate<double> pred{{1.0, 2.0, 3.0},
                                   UpperTriangular<double>::identity(3)};
  const auto inn = innovate(pred, model, {4.0, 5.0});
  CHECK(inn.residual == std::vector<double>{4.0, 5.0});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = i; j < 2; ++j)
      CHECK(inn.factor(i, j) ==
            doctest::Approx(i == j ? 0.5 : 0.0).epsilon(1e-15));
}

TEST_CASE("innovate: factor Gram matches C Sigma C^T + V") {
  const auto model = random_system(3, 2, 0, 0.8, 555);
  Rng rng(12);
  const auto cov = test_support::random_spd(3, 8.0, 1.0, rng);
  const StateEstimate<double> pred{{0.5, -1.0, 0.25},
                                   cholesky(from_eigen(cov))};
  const auto inn = innovate(pred, model, {0.0, 1.0});
  const Eigen::MatrixXd c = to_eigen(model.measurement_map());
  const Eigen::MatrixXd v = to_eigen(model.measurement_noise_factor().dense());
  const Eigen::MatrixXd expected =
      c * to_eigen(pred.factor.transpose_times_self()) * c.transpose() +
      v.transpose() * v;
  CHECK(rel_frobenius(to_eigen(inn.factor.transpose_times_self()), expected) <=
        1e-12);
}

TEST_CASE("kalman_gain: scalar oracle") {
  const StateEstimate<double> pred{{0.0}, UpperTriangular<double>::identity(1)};
  const auto gain =
      kalman_gain(pred, Matrix<double>(1, 1, {1.0}),
                  UpperTriangular<double>::scaled_identity(1, std::sqrt(2.0)));
  CHECK(gain(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("kalman_gain: zero measurement map gives zero gain") {
  const StateEstimate<double> pred{{0.0, 0.0},
                                   UpperTriangular<double>::identity(2)};
  const auto gain = kalman_gain(pred, Matrix<double>(2, 2),
                                UpperTriangular<double>::identity(2));
  CHECK(gain.max_abs() == 0.0);
}

TEST_CASE("kalman_gain: matches the dense-inverse oracle") {
  Rng rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const auto model = random_system(4, 2, 0, 0.85, 1000 + rep);
    const auto cov = test_support::random_spd(4, 20.0, 1.0, rng);
    const StateEstimate<double> pred{{0.1, 0.2, 0.3, 0.4},
                                     cholesky(from_eigen(cov))};
    const auto inn = innovate(pred, model, {0.0, 0.0});
    const auto gain =
        kalman_gain(pred, model.measurement_map(), inn.factor);

    const Eigen::MatrixXd sigma = to_eigen(pred.factor.transpose_times_self());
    const Eigen::MatrixXd c = to_eigen(model.measurement_map());
    const Eigen::MatrixXd v =
        to_eigen(model.measurement_noise_factor().dense());
    const Eigen::MatrixXd s = c * sigma * c.transpose() + v.transpose() * v;
    const Eigen::MatrixXd expected = sigma * c.transpose() * s.inverse();
    CHECK(rel_frobenius(to_eigen(gain), expected) <= 1e-10);
  }
}

TEST_CASE("kalman_gain: singular innovation factor is rejected") {
  const StateEstimate<double> pred{{0.0, 0.0},
                                   UpperTriangular<double>::identity(2)};
  UpperTriangular<double> g(2);
  g.set(0, 0, 1.0);  // second diagonal entry zero
  CHECK_THROWS_AS(kalman_gain(pred, Matrix<double>::identity(2), g),
                  SingularFactor);
}

TEST_CASE("update: zero gain leaves the estimate unchanged") {
  const auto model = random_system(3, 2, 0, 0.9, 31);
  Rng rng(14);
  const auto cov = test_support::random_spd(3, 4.0, 1.0, rng);
  const StateEstimate<double> pred{{1.0, -2.0, 0.5},
                                   cholesky(from_eigen(cov))};
  const Innovation<double> inn{{0.7, -0.1},
                               UpperTriangular<double>::identity(2)};
  const auto post = update(pred, model, inn, Matrix<double>(3, 2));
  CHECK(post.mean == pred.mean);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j)
      CHECK(post.factor(i, j) ==
            doctest::Approx(pred.factor(i, j)).epsilon(1e-14));
}

TEST_CASE("update: scalar Joseph oracle") {
  const auto model = scalar_model(1.0, 1.0, 1.0, 1.0);
  const StateEstimate<double> pred{{2.0}, UpperTriangular<double>::identity(1)};
  const Innovation<double> inn{{2.0},
                               UpperTriangular<double>::scaled_identity(
                                   1, std::sqrt(2.0))};
  const auto post = update(pred, model, inn, Matrix<double>(1, 1, {0.5}));
  CHECK(post.mean[0] == doctest::Approx(3.0).epsilon(1e-15));
  // (1-0.5)^2 * 1 + 0.5^2 * 1 = 0.5
  CHECK(post.factor(0, 0) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("update: factor Gram matches the Joseph form") {
  const auto model = random_system(3, 2, 0, 0.9, 99);
  Rng rng(25);
  const auto cov = test_support::random_spd(3, 6.0, 1.0, rng);
  const StateEstimate<double> pred{{0.0, 0.1, -0.2},
                                   cholesky(from_eigen(cov))};
  const auto inn = innovate(pred, model, {1.0, -1.0});
  const auto gain = kalman_gain(pred, model.measurement_map(), inn.factor);
  const auto post = update(pred, model, inn, gain);

  const Eigen::MatrixXd sigma = to_eigen(pred.factor.transpose_times_self());
  const Eigen::MatrixXd c = to_eigen(model.measurement_map());
  const Eigen::MatrixXd v = to_eigen(model.measurement_noise_factor().dense());
  const Eigen::MatrixXd l = to_eigen(gain);
  const Eigen::MatrixXd ikc = Eigen::MatrixXd::Identity(3, 3) - l * c;
  const Eigen::MatrixXd joseph =
      ikc * sigma * ikc.transpose() + l * v.transpose() * v * l.transpose();
  CHECK(rel_frobenius(to_eigen(post.factor.transpose_times_self()), joseph) <=
        1e-12);
}

TEST_CASE("sqkf_step equals the explicit pipeline bit for bit") {
  const auto model = random_system(4, 2, 2, 0.9, 123);
  const StateEstimate<double> est{{0.0, 0.0, 0.0, 0.0},
                                  UpperTriangular<double>::identity(4)};
  const std::vector<double> u{0.4, -0.2};
  const std::vector<double> y{1.0, 0.3};

  const auto pred = predict(est, model, u);
  const auto inn = innovate(pred, model, y);
  const auto gain = kalman_gain(pred, model.measurement_map(), inn.factor);
  const auto stepwise = update(pred, model, inn, gain);
  const auto direct = sqkf_step(est, model, u, y);

  CHECK(direct.mean == stepwise.mean);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i; j < 4; ++j)
      CHECK(direct.factor(i, j) == stepwise.factor(i, j));
}

TEST_CASE("sqkf_step: scalar end-to-end golden values") {
  const auto model = scalar_model(2.0, 1.0, 1.0, 1.0);
  const StateEstimate<double> est{{1.0}, UpperTriangular<double>::identity(1)};
  const auto post = sqkf_step(est, model, {}, {3.0});
  // mu'' = 2 + 5/6, Sigma'' = 5/6; confirmed against the reference filter.
  CHECK(post.mean[0] == doctest::Approx(2.0 + 5.0 / 6.0).epsilon(1e-14));
  CHECK(post.factor(0, 0) ==
        doctest::Approx(std::sqrt(5.0 / 6.0)).epsilon(1e-14));

  const FullCovEstimate<double> full{{1.0}, Matrix<double>::identity(1)};
  const auto ref = kf_step(full, model, {}, {3.0});
  CHECK(ref.mean[0] == doctest::Approx(post.mean[0]).epsilon(1e-14));
  CHECK(ref.covariance(0, 0) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("kf_step: zero measurement map reduces to pure prediction") {
  SystemModel<double> model(Matrix<double>(2, 2, {0.5, 0.1, 0.0, 0.7}),
                            std::nullopt, Matrix<double>(1, 2),
                            UpperTriangular<double>::scaled_identity(2, 0.3),
                            UpperTriangular<double>::identity(1));
  const FullCovEstimate<double> est{{1.0, -1.0}, Matrix<double>::identity(2)};
  const auto post = kf_step(est, model, {}, {0.0});
  const Eigen::MatrixXd a = to_eigen(model.dynamics());
  const Eigen::MatrixXd w =
      to_eigen(model.process_noise_factor().transpose_times_self());
  const Eigen::MatrixXd expected =
      a * to_eigen(est.covariance) * a.transpose() + w;
  CHECK((to_eigen(post.covariance) - expected).norm() == 0.0);
  const Eigen::VectorXd mean_expected =
      a * Eigen::Vector2d(est.mean[0], est.mean[1]);
  CHECK(post.mean[0] == mean_expected(0));
  CHECK(post.mean[1] == mean_expected(1));
}

TEST_CASE("kf_step: covariance stays numerically symmetric in double") {
  Rng rng(40);
  for (int rep = 0; rep < 10; ++rep) {
    const auto model = random_system(4, 2, 1, 0.9, 300 + rep);
    FullCovEstimate<double> est{{0.0, 0.0, 0.0, 0.0},
                                Matrix<double>::identity(4)};
    const auto traj = simulate(*&model, {0.1, 0.2, -0.3, 0.4},
                               std::vector<std::vector<double>>(
                                   20, std::vector<double>{0.25}),
                               20, 900 + rep);
    for (std::size_t t = 0; t < traj.steps(); ++t) {
      est = kf_step(est, model, traj.controls[t], traj.measurements[t]);
      CHECK(est.covariance.max_asymmetry() <=
            1e-12 * est.covariance.max_abs());
    }
  }
}

TEST_CASE("kf_step and eigen reference agree") {
  const auto model = random_system(3, 2, 1, 0.9, 808);
  FullCovEstimate<double> est{{0.1, -0.1, 0.2}, Matrix<double>::identity(3)};
  EigenKf ref{Eigen::Vector3d(0.1, -0.1, 0.2), Eigen::MatrixXd::Identity(3, 3)};
  const auto traj =
      simulate(model, {0.0, 0.0, 0.0},
               std::vector<std::vector<double>>(10, std::vector<double>{0.1}),
               10, 71);
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    est = kf_step(est, model, traj.controls[t], traj.measurements[t]);
    Eigen::VectorXd u(1), y(2);
    u << traj.controls[t][0];
    y << traj.measurements[t][0], traj.measurements[t][1];
    ref = eigen_kf_step(ref, model, u, y);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(est.mean[i] ==
            doctest::Approx(ref.mean(static_cast<int>(i))).epsilon(1e-11));
    CHECK(rel_frobenius(to_eigen(est.covariance), ref.cov) <= 1e-11);
  }
}

TEST_CASE("oracle equivalence: square-root and conventional filters track") {
  for (int sys = 0; sys < 10; ++sys) {
    Rng dims(6000 + sys);
    const std::size_t n = 1 + (dims.next_u64() % 6);
    const std::size_t m = 1 + (dims.next_u64() % 3);
    const std::size_t p = dims.next_u64() % 3;
    const auto model = random_system(n, m, p, 0.9, 6100 + sys);

    std::vector<std::vector<double>> controls(
        50, std::vector<double>(p, 0.1));
    const auto traj =
        simulate(model, std::vector<double>(n, 0.0), controls, 50, 6200 + sys);

    StateEstimate<double> sq{std::vector<double>(n, 0.0),
                             UpperTriangular<double>::identity(n)};
    FullCovEstimate<double> kf{std::vector<double>(n, 0.0),
                               Matrix<double>::identity(n)};
    for (std::size_t t = 0; t < traj.steps(); ++t) {
      sq = sqkf_step(sq, model, traj.controls[t], traj.measurements[t]);
      kf = kf_step(kf, model, traj.controls[t], traj.measurements[t]);
      double diff = 0, scale = 0;
      for (std::size_t i = 0; i < n; ++i) {
        diff += (sq.mean[i] - kf.mean[i]) * (sq.mean[i] - kf.mean[i]);
        scale += kf.mean[i] * kf.mean[i];
      }
      CHECK(std::sqrt(diff) <= 1e-9 * std::max(std::sqrt(scale), 0.1));
      CHECK(rel_frobenius(to_eigen(sq.factor.transpose_times_self()),
                          to_eigen(kf.covariance)) <= 1e-9);
    }
  }
}

TEST_CASE("oracle equivalence: terminal state of a 100-step n=6 m=3 run") {
  const auto model = random_system(6, 3, 2, 0.9, 424242);
  std::vector<std::vector<double>> controls(100, std::vector<double>(2));
  Rng aux(515151);
  for (auto& u : controls)
    for (double& v : u) v = aux.normal();
  const auto traj =
      simulate(model, std::vector<double>(6, 0.0), controls, 100, 616161);

  StateEstimate<double> sq{std::vector<double>(6, 0.0),
                           UpperTriangular<double>::identity(6)};
  FullCovEstimate<double> kf{std::vector<double>(6, 0.0),
                             Matrix<double>::identity(6)};
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    sq = sqkf_step(sq, model, traj.controls[t], traj.measurements[t]);
    kf = kf_step(kf, model, traj.controls[t], traj.measurements[t]);
  }
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    diff += (sq.mean[i] - kf.mean[i]) * (sq.mean[i] - kf.mean[i]);
    scale += kf.mean[i] * kf.mean[i];
  }
  CHECK(std::sqrt(diff / scale) <= 1e-9);
  CHECK(rel_frobenius(to_eigen(sq.factor.transpose_times_self()),
                      to_eigen(kf.covariance)) <= 1e-9);
}

TEST_CASE("stress problem: single precision separates the filters") {
  const auto [model_d, prior_d] = ill_conditioned_problem(1e-4);
  const auto traj = simulate(model_d, {1.0, -1.0}, {}, 100, 90909);
  const auto model = model_d.cast<float>();
  StateEstimate<float> sq = prior_d.cast<float>();
  FullCovEstimate<float> kf{
      vector_cast<float>(prior_d.mean),
      prior_d.factor.transpose_times_self().cast<float>()};

  const double eps_f = std::numeric_limits<float>::epsilon();
  std::size_t kf_first_indefinite = 0;
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    const auto y = vector_cast<float>(traj.measurements[t]);
    sq = sqkf_step(sq, model, {}, y);
    kf = kf_step(kf, model, {}, y);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_kf(
        to_eigen(kf.covariance.cast<double>()));
    const double norm_kf = es_kf.eigenvalues().cwiseAbs().maxCoeff();
    if (kf_first_indefinite == 0 &&
        es_kf.eigenvalues().minCoeff() < -10.0 * eps_f * norm_kf) {
      kf_first_indefinite = t + 1;
    }
    const Eigen::MatrixXd gram =
        to_eigen(sq.factor.cast<double>().transpose_times_self());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_sq(gram);
    CHECK(es_sq.eigenvalues().minCoeff() >= -2.0 * eps_f * gram.norm());
  }
  // Pinned from the first run of this seeded configuration.
  CHECK(kf_first_indefinite == 2);
  CHECK(kf_first_indefinite <= 25);
}

TEST_CASE("stress problem: double precision stays healthy for 1000 steps") {
  const auto [model, prior] = ill_conditioned_problem(1e-4);
  const auto traj = simulate(model, {1.0, -1.0}, {}, 1000, 80808);
  StateEstimate<double> sq = prior;
  FullCovEstimate<double> kf{prior.mean, prior.factor.transpose_times_self()};
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    sq = sqkf_step(sq, model, {}, traj.measurements[t]);
    kf = kf_step(kf, model, {}, traj.measurements[t]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(kf.covariance));
  CHECK(es.eigenvalues().minCoeff() >=
        -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
  CHECK(rel_frobenius(to_eigen(sq.factor.transpose_times_self()),
                      to_eigen(kf.covariance)) <= 1e-6);
}

TEST_CASE("joseph update equals the short form for the optimal gain") {
  Rng rng(50);
  for (int rep = 0; rep < 10; ++rep) {
    const auto model = random_system(3, 2, 0, 0.9, 7100 + rep);
    const auto cov = test_support::random_spd(3, 10.0, 1.0, rng);
    FullCovEstimate<double> est{{0.2, -0.2, 0.0}, from_eigen(cov)};
    const auto post = kf_step(est, model, {}, {0.5, -0.5});

    const Eigen::MatrixXd a = to_eigen(model.dynamics());
    const Eigen::MatrixXd c = to_eigen(model.measurement_map());
    const Eigen::MatrixXd w =
        to_eigen(model.process_noise_factor().transpose_times_self());
    const Eigen::MatrixXd v =
        to_eigen(model.measurement_noise_factor().transpose_times_self());
    const Eigen::MatrixXd pp = a * cov * a.transpose() + w;
    const Eigen::MatrixXd s = c * pp * c.transpose() + v;
    const Eigen::MatrixXd gain = pp * c.transpose() * s.inverse();
    const Eigen::MatrixXd short_form = pp - gain * c * pp;
    CHECK(rel_frobenius(to_eigen(post.covariance), short_form) <= 1e-10);
  }
}

TEST_CASE("factor Gram stays PSD at both precisions") {
  const double eps_f = std::numeric_limits<float>::epsilon();
  const double eps_d = std::numeric_limits<double>::epsilon();
  for (int sys = 0; sys < 5; ++sys) {
    const std::size_t n = 2 + sys % 4;
    const auto model = random_system(n, 2, 0, 0.9, 8000 + sys);
    const auto traj = simulate(model, std::vector<double>(n, 0.0), {}, 40,
                               8100 + sys);
    StateEstimate<double> sq_d{std::vector<double>(n, 0.0),
                               UpperTriangular<double>::identity(n)};
    auto model_f = model.cast<float>();
    StateEstimate<float> sq_f{std::vector<float>(n, 0.0f),
                              UpperTriangular<float>::identity(n)};
    for (std::size_t t = 0; t < traj.steps(); ++t) {
      sq_d = sqkf_step(sq_d, model, {}, traj.measurements[t]);
      sq_f = sqkf_step(sq_f, model_f, {},
                       vector_cast<float>(traj.measurements[t]));
      const Eigen::MatrixXd gd = to_eigen(sq_d.factor.transpose_times_self());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_d(gd);
      CHECK(es_d.eigenvalues().minCoeff() >=
            -static_cast<double>(n) * eps_d * gd.norm());
      const Eigen::MatrixXd gf =
          to_eigen(sq_f.factor.cast<double>().transpose_times_self());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_f(gf);
      CHECK(es_f.eigenvalues().minCoeff() >=
            -static_cast<double>(n) * eps_f * gf.norm());
    }
  }
}

TEST_CASE("filter: deterministic replay is bit-identical") {
  const auto model = random_system(4, 2, 1, 0.9, 11);
  const auto traj =
      simulate(model, {0.0, 0.0, 0.0, 0.0},
               std::vector<std::vector<double>>(30, std::vector<double>{0.2}),
               30, 13);
  auto run_once = [&] {
    StateEstimate<double> est{{0.0, 0.0, 0.0, 0.0},
                              UpperTriangular<double>::identity(4)};
    for (std::size_t t = 0; t < traj.steps(); ++t)
      est = sqkf_step(est, model, traj.controls[t], traj.measurements[t]);
    return est;
  };
  const auto a = run_once();
  const auto b = run_once();
  CHECK(a.mean == b.mean);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i; j < 4; ++j)
      CHECK(a.factor(i, j) == b.factor(i, j));
}

TEST_CASE("estimate construction from a full covariance") {
  Rng rng(61);
  const auto cov = test_support::random_spd(3, 12.0, 1.5, rng);
  const auto est = StateEstimate<double>::from_covariance(
      {1.0, 2.0, 3.0}, from_eigen(cov));
  CHECK(rel_frobenius(to_eigen(est.covariance()), cov) <= 1e-13);
  for (std::size_t i = 0; i < 3; ++i) CHECK(est.factor(i, i) > 0.0);
  CHECK_THROWS_AS(StateEstimate<double>::from_covariance(
                      {1.0, 2.0}, Matrix<double>(2, 2, {1, 2, 2, 1})),
                  NotPositiveDefinite);
}

TEST_CASE("filter: dimension and model validation errors") {
  const auto model = random_system(3, 2, 1, 0.9, 1);
  const StateEstimate<double> est{{0.0, 0.0, 0.0},
                                  UpperTriangular<double>::identity(3)};
  CHECK_THROWS_AS(predict(est, model, {}), DimensionMismatch);        // p=1
  CHECK_THROWS_AS(predict(est, model, {0.0, 0.0}), DimensionMismatch);
  const auto pred = predict(est, model, {0.0});
  CHECK_THROWS_AS(innovate(pred, model, {0.0}), DimensionMismatch);   // m=2
  CHECK_THROWS_AS(
      StateEstimate<double>::from_factor({0.0, 0.0},
                                         UpperTriangular<double>::identity(3)),
      DimensionMismatch);
  // measurement noise factor must be nonsingular
  CHECK_THROWS_AS(
      SystemModel<double>(Matrix<double>::identity(2), std::nullopt,
                          Matrix<double>::identity(2),
                          UpperTriangular<double>(2),
                          UpperTriangular<double>(2)),
      std::invalid_argument);

  const auto inn = innovate(pred, model, {0.0, 0.0});
  CHECK_THROWS_AS(update(pred, model, inn, Matrix<double>(2, 2)),
                  DimensionMismatch);
  const FullCovEstimate<double> bad_kf{{0.0, 0.0},
                                       Matrix<double>::identity(2)};
  CHECK_THROWS_AS(kf_step(bad_kf, model, {0.0}, {0.0, 0.0}),
                  DimensionMismatch);
}
