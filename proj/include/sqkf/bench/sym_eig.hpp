#pragma once

#include <vector>

#include "sqkf/matrix.hpp"

namespace sqkf::bench {

/// Eigenvalues of the symmetric part (M + M^T)/2, ascending.
///
/// Cyclic Jacobi iteration; intended for the small covariance matrices
/// the benchmark monitors (n <= 16 or so). Always evaluated in double so
/// the health metric does not depend on the filter's working precision.
std::vector<double> symmetric_eigenvalues(const Matrix<double>& m);

}  // namespace sqkf::bench
