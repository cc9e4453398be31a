#include "dc2b/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dc2b::dpp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Keep the largest stored diagonal around e^300 so Cholesky products stay finite.
constexpr double kMaxStoredLogQuality = 150.0;

std::vector<Eigen::Index> rows_for(const Kernel& kernel, std::span<const ItemId> subset) {
  std::vector<Eigen::Index> rows;
  rows.reserve(subset.size());
  for (ItemId id : subset) {
    rows.push_back(kernel.row_of(id));
  }
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("subset contains duplicate ids");
  }
  return rows;
}

// log det of the principal submatrix of the stored matrix. A pivot at or
// below the relative floor marks the submatrix singular.
double stored_log_det(const Matrix& L, const std::vector<Eigen::Index>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix chol = Matrix::Zero(n, n);
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double diag = L(rows[j], rows[j]);
    double pivot = diag;
    for (Eigen::Index k = 0; k < j; ++k) {
      pivot -= chol(j, k) * chol(j, k);
    }
    if (pivot <= kResidualFloor * diag || diag <= 0.0) {
      return kNegInf;
    }
    const double root = std::sqrt(pivot);
    chol(j, j) = root;
    log_det += std::log(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = L(rows[i], rows[j]);
      for (Eigen::Index k = 0; k < j; ++k) {
        v -= chol(i, k) * chol(j, k);
      }
      chol(i, j) = v / root;
    }
  }
  return log_det;
}

std::vector<ItemId> validated_candidates(const Kernel& kernel, std::size_t K,
                                         std::span<const ItemId> candidates) {
  if (K == 0) {
    throw InputError("slate size K must be at least 1");
  }
  if (candidates.empty()) {
    throw InputError("candidate set is empty");
  }
  std::vector<ItemId> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("candidate set contains duplicate ids");
  }
  for (ItemId id : sorted) {
    (void)kernel.row_of(id);
  }
  return sorted;
}

}  // namespace

Kernel Kernel::from_matrix(Matrix L, std::optional<Vector> log_quality) {
  const auto n = L.rows();
  if (L.cols() != n) {
    throw InputError("kernel matrix must be square");
  }
  std::vector<ItemId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), ItemId{0});
  Vector lq = log_quality.value_or(Vector::Zero(n));
  return Kernel(std::move(ids), std::move(L), std::move(lq));
}

Kernel::Kernel(std::vector<ItemId> ids, Matrix L, Vector log_quality, double log_scale)
    : ids_(std::move(ids)), L_(std::move(L)), log_quality_(std::move(log_quality)), log_scale_(log_scale) {
  const auto n = static_cast<Eigen::Index>(ids_.size());
  if (L_.rows() != n || L_.cols() != n) {
    throw InputError("kernel matrix shape does not match id count");
  }
  if (log_quality_.size() != n) {
    throw InputError("log_quality length does not match id count");
  }
  if (!L_.allFinite()) {
    throw NumericError("kernel matrix has non-finite entries");
  }
  const double scale = std::max(1.0, L_.cwiseAbs().maxCoeff());
  if ((L_ - L_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InputError("kernel matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (L_(i, i) < 0.0) {
      throw InputError("kernel diagonal entry " + std::to_string(i) + " is negative");
    }
  }
  index_.reserve(ids_.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    index_.emplace_back(ids_[static_cast<std::size_t>(r)], r);
  }
  std::sort(index_.begin(), index_.end());
  for (std::size_t k = 1; k < index_.size(); ++k) {
    if (index_[k].first == index_[k - 1].first) {
      throw InputError("kernel ids must be distinct");
    }
  }
}

Kernel::Kernel(const Kernel& other)
    : ids_(other.ids_),
      index_(other.index_),
      L_(other.L_),
      log_quality_(other.log_quality_),
      log_scale_(other.log_scale_) {
  std::lock_guard lock(other.cache_mutex_);
  log_normalizer_ = other.log_normalizer_;
}

Kernel& Kernel::operator=(const Kernel& other) {
  if (this != &other) {
    Kernel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Kernel::Kernel(Kernel&& other) noexcept
    : ids_(std::move(other.ids_)),
      index_(std::move(other.index_)),
      L_(std::move(other.L_)),
      log_quality_(std::move(other.log_quality_)),
      log_scale_(other.log_scale_),
      log_normalizer_(other.log_normalizer_) {}

Kernel& Kernel::operator=(Kernel&& other) noexcept {
  ids_ = std::move(other.ids_);
  index_ = std::move(other.index_);
  L_ = std::move(other.L_);
  log_quality_ = std::move(other.log_quality_);
  log_scale_ = other.log_scale_;
  log_normalizer_ = other.log_normalizer_;
  return *this;
}

Kernel::~Kernel() = default;

Eigen::Index Kernel::row_of(ItemId id) const {
  auto it = std::lower_bound(index_.begin(), index_.end(), id,
                             [](const auto& entry, ItemId key) { return entry.first < key; });
  if (it == index_.end() || it->first != id) {
    throw InputError("item id " + std::to_string(id) + " is not covered by the kernel");
  }
  return it->second;
}

double Kernel::log_normalizer() const {
  std::lock_guard lock(cache_mutex_);
  if (!log_normalizer_) {
    const auto n = L_.rows();
    if (log_scale_ == 0.0) {
      Eigen::LLT<Matrix> llt(L_ + Matrix::Identity(n, n));
      if (llt.info() != Eigen::Success) {
        throw NumericError("det(L + I): Cholesky failed, kernel is not PSD");
      }
      log_normalizer_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    } else {
      // log det(c·A + I) = Σ log1p(c·λ_k) over the eigenvalues of A.
      Eigen::SelfAdjointEigenSolver<Matrix> eig(L_, Eigen::EigenvaluesOnly);
      double total = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double lambda = std::max(0.0, eig.eigenvalues()(k));
        if (lambda == 0.0) continue;
        const double log_term = log_scale_ + std::log(lambda);
        total += log_term > 35.0 ? log_term + std::log1p(std::exp(-log_term))
                                 : std::log1p(std::exp(log_term));
      }
      log_normalizer_ = total;
    }
  }
  return *log_normalizer_;
}

Kernel build_kernel(const Vector& theta, const ItemCatalog& items, double alpha,
                    std::span<const ItemId> ids) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InputError("alpha must be a positive finite scalar");
  }
  if (static_cast<std::size_t>(theta.size()) != items.dim()) {
    throw InputError("theta has dimension " + std::to_string(theta.size()) +
                     " but item features have dimension " + std::to_string(items.dim()));
  }
  std::vector<ItemId> rows;
  if (ids.empty()) {
    rows.resize(items.size());
    std::iota(rows.begin(), rows.end(), ItemId{0});
  } else {
    items.check_ids(ids);
    rows.assign(ids.begin(), ids.end());
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(items.dim());
  RowMatrix X(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    X.row(r) = items.feature(rows[static_cast<std::size_t>(r)]);
  }
  const Vector z = X * theta;
  Vector log_quality(n);
  Vector exponent(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!std::isfinite(z(r))) {
      throw NumericError("theta·x is not finite for item " +
                         std::to_string(rows[static_cast<std::size_t>(r)]));
    }
    const double zc = std::clamp(z(r), -kQualityClamp, kQualityClamp);
    log_quality(r) = log_sigmoid(zc);
    exponent(r) = alpha * zc;
  }
  const double shift = n > 0 ? std::max(0.0, exponent.maxCoeff() - kMaxStoredLogQuality) : 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    X.row(r) *= std::exp(exponent(r) - shift);
  }
  Matrix L = X * X.transpose();
  L = 0.5 * (L + L.transpose());
  return Kernel(std::move(rows), std::move(L), std::move(log_quality), 2.0 * shift);
}

double subset_log_det(const Kernel& kernel, std::span<const ItemId> subset) {
  const auto rows = rows_for(kernel, subset);
  const double stored = stored_log_det(kernel.matrix(), rows);
  if (stored == kNegInf) return kNegInf;
  return stored + static_cast<double>(rows.size()) * kernel.log_scale();
}

double slate_probability(const Kernel& kernel, std::span<const ItemId> subset) {
  const double log_det = subset_log_det(kernel, subset);
  if (log_det == kNegInf) return 0.0;
  return std::exp(log_det - kernel.log_normalizer());
}

double map_log_objective(const Kernel& kernel, std::span<const ItemId> subset, MapObjective objective) {
  double quality = 0.0;
  for (ItemId id : subset) {
    quality += kernel.log_quality()(kernel.row_of(id));
  }
  double value = objective.quality_weight * quality;
  if (objective.det_weight != 0.0) {
    const double log_det = subset_log_det(kernel, subset);
    if (log_det == kNegInf) return kNegInf;
    value += objective.det_weight * log_det;
  }
  return value;
}

Slate greedy_map(const Kernel& kernel, std::size_t K, std::span<const ItemId> candidates,
                 MapObjective objective) {
  const std::vector<ItemId> cand = validated_candidates(kernel, K, candidates);
  const std::size_t n = cand.size();
  const std::size_t picks = std::min(K, n);
  const bool use_det = objective.det_weight != 0.0;
  const Matrix& L = kernel.matrix();

  std::vector<Eigen::Index> row(n);
  std::vector<double> diag(n);
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    row[i] = kernel.row_of(cand[i]);
    diag[i] = L(row[i], row[i]);
    residual[i] = diag[i];
  }
  // c_i vectors, one column per accepted step.
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(picks));
  std::vector<bool> taken(n, false);

  Slate slate;
  for (std::size_t step = 0; step < picks; ++step) {
    std::size_t best = n;
    double best_score = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double score = objective.quality_weight * kernel.log_quality()(row[i]);
      if (use_det) {
        if (diag[i] <= 0.0 || residual[i] <= kResidualFloor * diag[i]) continue;
        score += objective.det_weight * (std::log(residual[i]) + kernel.log_scale());
      }
      // cand is sorted, so strict '>' keeps the smallest id on ties.
      if (best == n || score > best_score) {
        best = i;
        best_score = score;
      }
    }
    if (best == n || !std::isfinite(best_score)) break;

    taken[best] = true;
    slate.items.push_back(cand[best]);
    slate.gains.push_back(best_score);
    slate.objective += best_score;

    if (!use_det || step + 1 == picks) continue;
    const auto k = static_cast<Eigen::Index>(step);
    const auto j = static_cast<Eigen::Index>(best);
    const double dj = std::sqrt(residual[best]);
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double inner = k > 0 ? c.row(j).head(k).dot(c.row(ii).head(k)) : 0.0;
      const double e = (L(row[best], row[i]) - inner) / dj;
      c(ii, k) = e;
      residual[i] -= e * e;
    }
  }
  return slate;
}

Slate exhaustive_map(const Kernel& kernel, std::size_t K, std::span<const ItemId> candidates,
                     MapObjective objective) {
  const std::vector<ItemId> cand = validated_candidates(kernel, K, candidates);
  if (cand.size() > kExhaustiveCap) {
    throw InputError("exhaustive_map: " + std::to_string(cand.size()) +
                     " candidates exceeds the cap of " + std::to_string(kExhaustiveCap));
  }
  const std::size_t n = cand.size();
  const std::size_t k = std::min(K, n);

  // Lexicographic enumeration of k-combinations; strict '>' keeps the first.
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  std::vector<ItemId> subset(k);
  Slate best;
  bool have_best = false;
  while (true) {
    for (std::size_t t = 0; t < k; ++t) subset[t] = cand[pick[t]];
    const double value = map_log_objective(kernel, subset, objective);
    if (!have_best || value > best.objective) {
      best.items = subset;
      best.objective = value;
      have_best = true;
    }
    std::size_t t = k;
    while (t > 0 && pick[t - 1] == n - k + t - 1) --t;
    if (t == 0) break;
    ++pick[t - 1];
    for (std::size_t u = t; u < k; ++u) pick[u] = pick[u - 1] + 1;
  }
  return best;
}

}  // namespace dc2b::dpp
