#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dc2b/catalog.hpp"

namespace dc2b::testing {

inline RowMatrix random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  RowMatrix X(n, d);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = z(rng);
  return X;
}

inline ItemCatalog random_catalog(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RawId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<RawId>(i + 1);
  return ItemCatalog(ids, random_rows(n, d, rng));
}

inline std::vector<ItemId> iota_ids(std::size_t n) {
  std::vector<ItemId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

/// Determinant by partial-pivot LU, independent of the library's Cholesky.
inline double det_of(const Matrix& A) { return A.rows() == 0 ? 1.0 : A.partialPivLu().determinant(); }

inline Matrix principal(const Matrix& L, const std::vector<ItemId>& S) {
  Matrix out(S.size(), S.size());
  for (std::size_t a = 0; a < S.size(); ++a)
    for (std::size_t b = 0; b < S.size(); ++b) out(a, b) = L(S[a], S[b]);
  return out;
}

inline double plain_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace dc2b::testing
