#pragma once

#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "dc2b/catalog.hpp"
#include "dc2b/common.hpp"

namespace dc2b::dpp {

/// θ·x is clamped to ±this before exponentiation.
inline constexpr double kQualityClamp = 30.0;
/// Relative floor on greedy residuals: d_i² ≤ kResidualFloor · L_ii scores −∞.
inline constexpr double kResidualFloor = 1e-12;
inline constexpr std::size_t kExhaustiveCap = 15;

/// Quality-weighted DPP kernel L = V Vᵀ over a set of catalog items, plus the
/// per-item log engagement probabilities used in MAP scoring.
///
/// Rows are addressed by ItemId; `ids()` lists the catalog items the kernel
/// covers in row order. The true kernel is exp(log_scale()) · matrix(); the
/// scale is 0 unless exp(2α·θx) would overflow a double (large α).
/// Immutable after construction; safe to share between threads (the det(L+I)
/// cache is guarded).
class Kernel {
 public:
  /// Wrap an explicit PSD matrix; ids are 0..n-1. `log_quality` defaults to 0
  /// (p_i = 1), which makes MAP scoring pure log-det.
  static Kernel from_matrix(Matrix L, std::optional<Vector> log_quality = std::nullopt);

  Kernel(std::vector<ItemId> ids, Matrix L, Vector log_quality, double log_scale = 0.0);

  Kernel(const Kernel& other);
  Kernel& operator=(const Kernel& other);
  Kernel(Kernel&&) noexcept;
  Kernel& operator=(Kernel&&) noexcept;
  ~Kernel();

  std::size_t size() const noexcept { return ids_.size(); }
  const Matrix& matrix() const noexcept { return L_; }
  const Vector& log_quality() const noexcept { return log_quality_; }
  double log_scale() const noexcept { return log_scale_; }
  const std::vector<ItemId>& ids() const noexcept { return ids_; }

  /// Row of `id`; InputError if the kernel does not cover it.
  Eigen::Index row_of(ItemId id) const;

  /// log det(L + I), computed once on first use.
  double log_normalizer() const;

 private:
  std::vector<ItemId> ids_;
  std::vector<std::pair<ItemId, Eigen::Index>> index_;  // sorted by id
  Matrix L_;
  Vector log_quality_;
  double log_scale_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::optional<double> log_normalizer_;
};

/// An ordered super arm. `gains[k]` is the score increment accepted at step k.
struct Slate {
  std::vector<ItemId> items;
  std::vector<double> gains;
  double objective = 0.0;

  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }
};

/// Weights of the MAP objective  Σ quality_weight·log p_i + det_weight·log det(L_S).
/// The default (1, 1) is log(Π p_i · det L_S).
struct MapObjective {
  double quality_weight = 1.0;
  double det_weight = 1.0;
};

/// Builds L with rows V_i = exp(θ·x_i)^α · x_i over `ids` (all catalog items
/// when empty) and stores log p_i = log σ(θ·x_i).
Kernel build_kernel(const Vector& theta, const ItemCatalog& items, double alpha,
                    std::span<const ItemId> ids = {});

/// log det(L_S); −∞ for a singular submatrix. Empty subset gives 0.
double subset_log_det(const Kernel& kernel, std::span<const ItemId> subset);

/// det(L_S) / det(L + I).
double slate_probability(const Kernel& kernel, std::span<const ItemId> subset);

/// Value of the weighted MAP objective for a fixed subset.
double map_log_objective(const Kernel& kernel, std::span<const ItemId> subset,
                         MapObjective objective = {});

/// Greedy MAP search by incremental Cholesky. Picks min(K, |candidates|)
/// items, or fewer when every remaining residual hits the floor.
Slate greedy_map(const Kernel& kernel, std::size_t K, std::span<const ItemId> candidates,
                 MapObjective objective = {});

/// Exact argmax over all subsets of size min(K, |candidates|). Test oracle;
/// rejects more than kExhaustiveCap candidates.
Slate exhaustive_map(const Kernel& kernel, std::size_t K, std::span<const ItemId> candidates,
                     MapObjective objective = {});

}  // namespace dc2b::dpp
