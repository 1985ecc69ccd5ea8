#include "sqkf/bench/sym_eig.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "sqkf/errors.hpp"

namespace sqkf::bench {

std::vector<double> symmetric_eigenvalues(const Matrix<double>& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("symmetric_eigenvalues: matrix not square");
  }
  const std::size_t n = m.rows();
  Matrix<double> a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));

  if (n > 1) {
    const double scale = a.frobenius_norm();
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double off = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
      if (std::sqrt(2.0 * off) <= 1e-16 * scale || off == 0.0) break;

      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t =
              (theta >= 0.0)
                  ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                  : -1.0 / (-theta + std::sqrt(1.0 + theta * theta));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k);
            const double aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
        }
      }
    }
  }

  std::vector<double> eigs(n);
  for (std::size_t i = 0; i < n; ++i) eigs[i] = a(i, i);
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

}  // namespace sqkf::bench
