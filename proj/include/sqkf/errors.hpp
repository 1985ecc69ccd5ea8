#pragma once

#include <stdexcept>
#include <string>

namespace sqkf {

/// Operands have incompatible shapes.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Cholesky factorization hit a nonpositive pivot.
class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(const std::string& what)
      : std::runtime_error(what) {}
};

/// Asymmetry of a nominally symmetric matrix exceeds tolerance.
class NotSymmetric : public std::invalid_argument {
 public:
  explicit NotSymmetric(const std::string& what)
      : std::invalid_argument(what) {}
};

/// A triangular factor has a zero (or below-tolerance) diagonal entry.
class SingularFactor : public std::runtime_error {
 public:
  explicit SingularFactor(const std::string& what)
      : std::runtime_error(what) {}
};

/// The dense solve on the innovation covariance failed.
class SingularInnovationCovariance : public std::runtime_error {
 public:
  explicit SingularInnovationCovariance(const std::string& what)
      : std::runtime_error(what) {}
};

/// Experiment configuration failed validation.
class ConfigInvalid : public std::invalid_argument {
 public:
  explicit ConfigInvalid(const std::string& what)
      : std::invalid_argument(what) {}
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Two trace files do not share the same schema.
class SchemaMismatch : public std::runtime_error {
 public:
  explicit SchemaMismatch(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace sqkf
