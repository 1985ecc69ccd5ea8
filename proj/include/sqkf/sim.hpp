#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sqkf/errors.hpp"
#include "sqkf/filter.hpp"
#include "sqkf/linalg.hpp"
#include "sqkf/matrix.hpp"
#include "sqkf/random.hpp"
#include "sqkf/triangular.hpp"

namespace sqkf {

/// Ground-truth states, controls, and measurements of one simulated run.
/// states holds x_0..x_T; controls holds u_0..u_{T-1}; measurements holds
/// the readings taken at times 1..T (measurements[i] observes states[i+1]).
template <typename Scalar>
struct Trajectory {
  std::vector<std::vector<Scalar>> states;
  std::vector<std::vector<Scalar>> controls;
  std::vector<std::vector<Scalar>> measurements;
  std::uint64_t seed = 0;

  std::size_t steps() const { return measurements.size(); }
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> random_gaussian_matrix(std::size_t rows, std::size_t cols,
                                      Rng& rng) {
  Matrix<Scalar> m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = static_cast<Scalar>(rng.normal());
  return m;
}

/// Random orthogonal matrix: Gaussian entries orthonormalized by two
/// passes of modified Gram-Schmidt over the columns.
inline Matrix<double> random_orthogonal(std::size_t dim, Rng& rng) {
  Matrix<double> q = random_gaussian_matrix<double>(dim, dim, rng);
  for (std::size_t j = 0; j < dim; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0;
        for (std::size_t i = 0; i < dim; ++i) dot += q(i, k) * q(i, j);
        for (std::size_t i = 0; i < dim; ++i) q(i, j) -= dot * q(i, k);
      }
    }
    double norm = 0;
    for (std::size_t i = 0; i < dim; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-8) {
      // Degenerate draw; replace the column and redo it.
      for (std::size_t i = 0; i < dim; ++i) q(i, j) = rng.normal();
      --j;
      continue;
    }
    for (std::size_t i = 0; i < dim; ++i) q(i, j) /= norm;
  }
  return q;
}

/// Random SPD matrix with largest eigenvalue max_eig and condition number
/// drawn log-uniformly from [1, max_condition].
inline Matrix<double> random_spd(std::size_t dim, double max_eig,
                                 double max_condition, Rng& rng) {
  const double condition = std::exp(rng.uniform01() * std::log(max_condition));
  std::vector<double> eigs(dim, max_eig);
  if (dim >= 2) {
    eigs[dim - 1] = max_eig / condition;
    for (std::size_t i = 1; i + 1 < dim; ++i) {
      eigs[i] = max_eig * std::pow(condition, -rng.uniform01());
    }
  }
  const Matrix<double> q = random_orthogonal(dim, rng);
  Matrix<double> m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      double acc = 0;
      for (std::size_t k = 0; k < dim; ++k) acc += q(k, i) * eigs[k] * q(k, j);
      m(i, j) = acc;
      m(j, i) = acc;
    }
  }
  return m;
}

}  // namespace detail

/// Simulate the model forward from x0 for `steps` steps.
///
/// x_{t+1} = A x_t + B u_t + noise_w^T xi_t
/// y_{t+1} = C x_{t+1} + noise_v^T eta_t
///
/// with xi, eta i.i.d. standard normal from Rng(seed), drawn in the fixed
/// order (xi_0, eta_0, xi_1, eta_1, ...). Sampling through the transposed
/// factors makes the realized noise covariances exactly the factors'
/// Gram matrices, the same representation the filter consumes. `controls`
/// must hold one length-p vector per step, or be empty for a model with
/// no control map.
template <typename Scalar>
Trajectory<Scalar> simulate(const SystemModel<Scalar>& model,
                            const std::vector<Scalar>& initial_state,
                            const std::vector<std::vector<Scalar>>& controls,
                            std::size_t steps, std::uint64_t seed) {
  const std::size_t n = model.state_dim();
  const std::size_t m = model.measurement_dim();
  const std::size_t p = model.control_dim();
  if (steps < 1) throw std::invalid_argument("simulate: steps must be >= 1");
  if (initial_state.size() != n) {
    throw DimensionMismatch("simulate: initial state length != state dim");
  }
  if (p == 0) {
    if (!controls.empty() && controls.size() != steps) {
      throw DimensionMismatch("simulate: control sequence length != steps");
    }
  } else if (controls.size() != steps) {
    throw DimensionMismatch("simulate: control sequence length != steps");
  }

  Trajectory<Scalar> out;
  out.seed = seed;
  out.states.reserve(steps + 1);
  out.controls.reserve(steps);
  out.measurements.reserve(steps);
  out.states.push_back(initial_state);

  Rng rng(seed);
  std::vector<Scalar> xi(n), eta(m);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::vector<Scalar> u =
        (p == 0) ? std::vector<Scalar>{} : controls[t];
    for (std::size_t i = 0; i < n; ++i)
      xi[i] = static_cast<Scalar>(rng.normal());
    for (std::size_t i = 0; i < m; ++i)
      eta[i] = static_cast<Scalar>(rng.normal());

    std::vector<Scalar> next =
        vector_add(detail::advance_mean(model, out.states.back(), u),
                   model.process_noise_factor().transpose_times(xi));
    std::vector<Scalar> y =
        vector_add(model.measurement_map() * next,
                   model.measurement_noise_factor().transpose_times(eta));

    out.states.push_back(std::move(next));
    out.controls.push_back(u);
    out.measurements.push_back(std::move(y));
  }
  return out;
}

/// Seeded random LTI system.
///
/// The dynamics matrix is built as Q^T D Q with Q a random orthogonal
/// matrix and D block diagonal holding one real eigenvalue pinned at
/// spectral_radius plus random smaller real eigenvalues and 2x2
/// rotation-scale blocks (complex pairs), so the spectral radius equals
/// the request up to roundoff. Noise covariances are random
/// well-conditioned SPD matrices (condition <= 100) stored as their
/// Cholesky factors. C is dense Gaussian, full row rank for m <= n.
/// p == 0 produces a model without a control map.
inline SystemModel<double> random_system(std::size_t n, std::size_t m,
                                         std::size_t p, double spectral_radius,
                                         std::uint64_t seed) {
  if (n < 1 || m < 1) {
    throw std::invalid_argument("random_system: n and m must be >= 1");
  }
  if (!(spectral_radius > 0.0) || spectral_radius > 1.0) {
    throw std::invalid_argument(
        "random_system: spectral radius must be in (0, 1]");
  }
  Rng rng(seed);

  // Block-diagonal spectrum; the dominant eigenvalue is exact by
  // construction, the rest stay at most 0.95 * spectral_radius.
  Matrix<double> d(n, n);
  d(0, 0) = spectral_radius;
  std::size_t pos = 1;
  while (pos < n) {
    if (n - pos >= 2 && rng.uniform01() < 0.7) {
      const double r = spectral_radius * rng.uniform(0.2, 0.95);
      const double theta = rng.uniform(0.1, std::numbers::pi - 0.1);
      const double c = r * std::cos(theta);
      const double s = r * std::sin(theta);
      d(pos, pos) = c;
      d(pos, pos + 1) = s;
      d(pos + 1, pos) = -s;
      d(pos + 1, pos + 1) = c;
      pos += 2;
    } else {
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      d(pos, pos) = sign * spectral_radius * rng.uniform(0.2, 0.95);
      pos += 1;
    }
  }
  const Matrix<double> q = detail::random_orthogonal(n, rng);
  const Matrix<double> a = q.transposed() * d * q;

  std::optional<Matrix<double>> b;
  if (p >= 1) b = detail::random_gaussian_matrix<double>(n, p, rng);
  const Matrix<double> c = detail::random_gaussian_matrix<double>(m, n, rng);

  const UpperTriangular<double> noise_w =
      cholesky(detail::random_spd(n, 0.1, 100.0, rng));
  const UpperTriangular<double> noise_v =
      cholesky(detail::random_spd(m, 0.1, 100.0, rng));

  return SystemModel<double>(a, std::move(b), c, noise_w, noise_v);
}

/// The classic near-degenerate observation problem: two almost collinear
/// measurement rows and measurement noise of size epsilon, with identity
/// dynamics and no process noise. Once epsilon^2 drops below the working
/// machine epsilon the conventional filter's covariance update loses
/// positive definiteness, while the factored form cannot. The returned
/// estimate is the prior (zero mean, identity covariance factor).
inline std::pair<SystemModel<double>, StateEstimate<double>>
ill_conditioned_problem(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument(
        "ill_conditioned_problem: epsilon must be in (0, 1)");
  }
  Matrix<double> c(2, 2, {1.0, 1.0, 1.0, 1.0 + epsilon});
  SystemModel<double> model(Matrix<double>::identity(2), std::nullopt, c,
                            UpperTriangular<double>(2),
                            UpperTriangular<double>::scaled_identity(2, epsilon));
  StateEstimate<double> prior{{0.0, 0.0}, UpperTriangular<double>::identity(2)};
  return {std::move(model), std::move(prior)};
}

}  // namespace sqkf
