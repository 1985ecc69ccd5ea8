#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqkf/errors.hpp"
#include "sqkf/linalg.hpp"
#include "sqkf/matrix.hpp"
#include "sqkf/triangular.hpp"

namespace sqkf {

/// Gaussian state belief in square-root form: mean plus an
/// upper-triangular factor F with covariance F^T F.
template <typename Scalar>
struct StateEstimate {
  std::vector<Scalar> mean;
  UpperTriangular<Scalar> factor;

  static StateEstimate from_factor(std::vector<Scalar> mean,
                                   UpperTriangular<Scalar> factor) {
    if (mean.size() != factor.dim()) {
      throw DimensionMismatch("StateEstimate: mean length " +
                              std::to_string(mean.size()) +
                              " vs factor dim " +
                              std::to_string(factor.dim()));
    }
    return StateEstimate{std::move(mean), std::move(factor)};
  }

  /// Convenience for callers holding a full covariance; the factor is
  /// recovered by Cholesky factorization.
  static StateEstimate from_covariance(std::vector<Scalar> mean,
                                       const Matrix<Scalar>& covariance) {
    return from_factor(std::move(mean), cholesky(covariance));
  }

  Matrix<Scalar> covariance() const { return factor.transpose_times_self(); }

  template <typename Other>
  StateEstimate<Other> cast() const {
    return StateEstimate<Other>{vector_cast<Other>(mean),
                                factor.template cast<Other>()};
  }
};

/// Discrete-time LTI system with noise covariances held as their
/// upper-triangular Cholesky factors. The measurement-noise factor must
/// be nonsingular (it guarantees a nonsingular innovation factor, which
/// the gain solve requires); the process-noise factor may be singular or
/// zero. A model without a control map describes an autonomous system.
template <typename Scalar>
class SystemModel {
 public:
  SystemModel(Matrix<Scalar> dynamics, std::optional<Matrix<Scalar>> control_map,
              Matrix<Scalar> measurement_map,
              UpperTriangular<Scalar> process_noise_factor,
              UpperTriangular<Scalar> measurement_noise_factor)
      : dynamics_(std::move(dynamics)),
        control_map_(std::move(control_map)),
        measurement_map_(std::move(measurement_map)),
        process_noise_factor_(std::move(process_noise_factor)),
        measurement_noise_factor_(std::move(measurement_noise_factor)) {
    const std::size_t n = dynamics_.rows();
    const std::size_t m = measurement_map_.rows();
    if (dynamics_.cols() != n) {
      throw DimensionMismatch("SystemModel: dynamics must be square");
    }
    if (control_map_ && control_map_->rows() != n) {
      throw DimensionMismatch("SystemModel: control map row count != n");
    }
    if (measurement_map_.cols() != n) {
      throw DimensionMismatch("SystemModel: measurement map column count != n");
    }
    if (process_noise_factor_.dim() != n) {
      throw DimensionMismatch("SystemModel: process noise factor dim != n");
    }
    if (measurement_noise_factor_.dim() != m) {
      throw DimensionMismatch("SystemModel: measurement noise factor dim != m");
    }
    if (!(measurement_noise_factor_.min_diagonal() > Scalar(0))) {
      throw std::invalid_argument(
          "SystemModel: measurement noise factor must have a strictly "
          "positive diagonal");
    }
  }

  std::size_t state_dim() const { return dynamics_.rows(); }
  std::size_t measurement_dim() const { return measurement_map_.rows(); }
  std::size_t control_dim() const {
    return control_map_ ? control_map_->cols() : 0;
  }

  const Matrix<Scalar>& dynamics() const { return dynamics_; }
  const std::optional<Matrix<Scalar>>& control_map() const {
    return control_map_;
  }
  const Matrix<Scalar>& measurement_map() const { return measurement_map_; }
  const UpperTriangular<Scalar>& process_noise_factor() const {
    return process_noise_factor_;
  }
  const UpperTriangular<Scalar>& measurement_noise_factor() const {
    return measurement_noise_factor_;
  }

  template <typename Other>
  SystemModel<Other> cast() const {
    std::optional<Matrix<Other>> control;
    if (control_map_) control = control_map_->template cast<Other>();
    return SystemModel<Other>(dynamics_.template cast<Other>(),
                              std::move(control),
                              measurement_map_.template cast<Other>(),
                              process_noise_factor_.template cast<Other>(),
                              measurement_noise_factor_.template cast<Other>());
  }

 private:
  Matrix<Scalar> dynamics_;
  std::optional<Matrix<Scalar>> control_map_;
  Matrix<Scalar> measurement_map_;
  UpperTriangular<Scalar> process_noise_factor_;
  UpperTriangular<Scalar> measurement_noise_factor_;
};

/// Measurement residual z together with the upper-triangular factor G of
/// its covariance S = G^T G.
template <typename Scalar>
struct Innovation {
  std::vector<Scalar> residual;
  UpperTriangular<Scalar> factor;
};

/// State belief of the conventional filter: mean plus the covariance
/// stored in full. At reduced precision this representation is allowed
/// to degrade (lose symmetry, go indefinite); that degradation is what
/// the benchmarks measure.
template <typename Scalar>
struct FullCovEstimate {
  std::vector<Scalar> mean;
  Matrix<Scalar> covariance;

  template <typename Other>
  FullCovEstimate<Other> cast() const {
    return FullCovEstimate<Other>{vector_cast<Other>(mean),
                                  covariance.template cast<Other>()};
  }
};

namespace detail {

template <typename Scalar>
std::vector<Scalar> advance_mean(const SystemModel<Scalar>& model,
                                 const std::vector<Scalar>& mean,
                                 const std::vector<Scalar>& control) {
  if (mean.size() != model.state_dim()) {
    throw DimensionMismatch("advance_mean: mean length != state dim");
  }
  if (control.size() != model.control_dim()) {
    throw DimensionMismatch("advance_mean: control length " +
                            std::to_string(control.size()) + " vs model " +
                            std::to_string(model.control_dim()));
  }
  std::vector<Scalar> next = model.dynamics() * mean;
  if (model.control_map()) {
    next = vector_add(next, *model.control_map() * control);
  }
  return next;
}

/// Gaussian elimination with partial pivoting, solving A X = B.
/// Intentionally generic and precision-faithful: this is the dense solve
/// the conventional filter uses for its gain.
template <typename Scalar>
Matrix<Scalar> solve_dense(Matrix<Scalar> a, Matrix<Scalar> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw DimensionMismatch("solve_dense: incompatible shapes");
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot_row = k;
    Scalar pivot_mag = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const Scalar mag = std::abs(a(i, k));
      if (mag > pivot_mag) {
        pivot_mag = mag;
        pivot_row = i;
      }
    }
    if (pivot_mag == Scalar(0)) {
      throw SingularInnovationCovariance(
          "solve_dense: zero pivot at column " + std::to_string(k));
    }
    if (pivot_row != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pivot_row, j));
      for (std::size_t j = 0; j < b.cols(); ++j)
        std::swap(b(k, j), b(pivot_row, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Scalar f = a(i, k) / a(k, k);
      a(i, k) = Scalar(0);
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  Matrix<Scalar> x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t ii = 0; ii < n; ++ii) {
      const std::size_t i = n - 1 - ii;
      Scalar acc = b(i, c);
      for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x(j, c);
      x(i, c) = acc / a(i, i);
    }
  }
  return x;
}

}  // namespace detail

/// Time update. Propagates the mean through the noise-free dynamics and
/// the covariance factor through one qr_r:
///   F' = qr_r(F A^T, process_noise_factor)
/// so F'^T F' = A (F^T F) A^T + W without ever forming a covariance.
template <typename Scalar>
StateEstimate<Scalar> predict(const StateEstimate<Scalar>& est,
                              const SystemModel<Scalar>& model,
                              const std::vector<Scalar>& control = {}) {
  std::vector<Scalar> mean = detail::advance_mean(model, est.mean, control);
  UpperTriangular<Scalar> factor =
      qr_r(est.factor * model.dynamics().transposed(),
           model.process_noise_factor().dense());
  return StateEstimate<Scalar>{std::move(mean), std::move(factor)};
}

/// Measurement update, first half: the residual z = y - C mean and the
/// innovation covariance factor G = qr_r(F C^T, measurement_noise_factor),
/// with S = G^T G.
template <typename Scalar>
Innovation<Scalar> innovate(const StateEstimate<Scalar>& predicted,
                            const SystemModel<Scalar>& model,
                            const std::vector<Scalar>& measurement) {
  if (measurement.size() != model.measurement_dim()) {
    throw DimensionMismatch("innovate: measurement length " +
                            std::to_string(measurement.size()) + " vs model " +
                            std::to_string(model.measurement_dim()));
  }
  std::vector<Scalar> residual =
      vector_sub(measurement, model.measurement_map() * predicted.mean);
  UpperTriangular<Scalar> factor =
      qr_r(predicted.factor * model.measurement_map().transposed(),
           model.measurement_noise_factor().dense());
  return Innovation<Scalar>{std::move(residual), std::move(factor)};
}

/// Kalman gain L = (S^{-1} C Sigma)^T computed purely through the factors:
/// two triangular solves against G followed by multiplication with F^T F.
/// Neither S nor S^{-1} is ever formed. The F^T F product here is local to
/// the gain; the stored belief stays in factor form.
template <typename Scalar>
Matrix<Scalar> kalman_gain(const StateEstimate<Scalar>& predicted,
                           const Matrix<Scalar>& measurement_map,
                           const UpperTriangular<Scalar>& innovation_factor) {
  const Matrix<Scalar> t1 = solve_lower(innovation_factor, measurement_map);
  const Matrix<Scalar> t2 = solve_upper(innovation_factor, t1);
  return (t2 * predicted.factor.transpose_times_self()).transposed();
}

/// Measurement update, second half. The mean moves by L z; the factor
/// goes through the factored Joseph form
///   F' = qr_r(F (I - L C)^T, measurement_noise_factor L^T)
/// which keeps the implied covariance PSD for any gain.
template <typename Scalar>
StateEstimate<Scalar> update(const StateEstimate<Scalar>& predicted,
                             const SystemModel<Scalar>& model,
                             const Innovation<Scalar>& innovation,
                             const Matrix<Scalar>& gain) {
  const std::size_t n = model.state_dim();
  if (gain.rows() != n || gain.cols() != model.measurement_dim()) {
    throw DimensionMismatch("update: gain shape mismatch");
  }
  std::vector<Scalar> mean =
      vector_add(predicted.mean, gain * innovation.residual);
  const Matrix<Scalar> closed_loop =
      Matrix<Scalar>::identity(n) - gain * model.measurement_map();
  UpperTriangular<Scalar> factor =
      qr_r(predicted.factor * closed_loop.transposed(),
           model.measurement_noise_factor() * gain.transposed());
  return StateEstimate<Scalar>{std::move(mean), std::move(factor)};
}

/// One full square-root filter step: predict, innovate, gain, update.
template <typename Scalar>
StateEstimate<Scalar> sqkf_step(const StateEstimate<Scalar>& est,
                                const SystemModel<Scalar>& model,
                                const std::vector<Scalar>& control,
                                const std::vector<Scalar>& measurement) {
  const StateEstimate<Scalar> predicted = predict(est, model, control);
  const Innovation<Scalar> innovation =
      innovate(predicted, model, measurement);
  const Matrix<Scalar> gain =
      kalman_gain(predicted, model.measurement_map(), innovation.factor);
  return update(predicted, model, innovation, gain);
}

/// One step of the conventional Kalman filter on a fully stored
/// covariance: explicit innovation covariance, generic dense solve for
/// the gain, Joseph-form update. No symmetrization or repair is applied;
/// whatever roundoff does to the covariance is kept, making this filter
/// both the correctness oracle (in double) and the degradation baseline
/// (at reduced precision).
template <typename Scalar>
FullCovEstimate<Scalar> kf_step(const FullCovEstimate<Scalar>& est,
                                const SystemModel<Scalar>& model,
                                const std::vector<Scalar>& control,
                                const std::vector<Scalar>& measurement) {
  const std::size_t n = model.state_dim();
  if (est.covariance.rows() != n || est.covariance.cols() != n ||
      est.mean.size() != n) {
    throw DimensionMismatch("kf_step: estimate dimensions != state dim");
  }
  if (measurement.size() != model.measurement_dim()) {
    throw DimensionMismatch("kf_step: measurement length mismatch");
  }
  const Matrix<Scalar>& a = model.dynamics();
  const Matrix<Scalar>& c = model.measurement_map();
  const Matrix<Scalar> w = model.process_noise_factor().transpose_times_self();
  const Matrix<Scalar> v =
      model.measurement_noise_factor().transpose_times_self();

  std::vector<Scalar> mean_pred =
      detail::advance_mean(model, est.mean, control);
  const Matrix<Scalar> cov_pred = a * est.covariance * a.transposed() + w;

  const std::vector<Scalar> residual =
      vector_sub(measurement, c * mean_pred);
  const Matrix<Scalar> cross = c * cov_pred;              // C Sigma
  const Matrix<Scalar> s = cross * c.transposed() + v;    // C Sigma C^T + V
  const Matrix<Scalar> gain = detail::solve_dense(s, cross).transposed();

  std::vector<Scalar> mean = vector_add(mean_pred, gain * residual);
  const Matrix<Scalar> closed_loop = Matrix<Scalar>::identity(n) - gain * c;
  Matrix<Scalar> cov = closed_loop * cov_pred * closed_loop.transposed() +
                       gain * v * gain.transposed();
  return FullCovEstimate<Scalar>{std::move(mean), std::move(cov)};
}

}  // namespace sqkf
