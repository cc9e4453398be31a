#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dc2b/catalog.hpp"
#include "dc2b/common.hpp"

namespace dc2b::posterior {

/// Gaussian belief N(m, Σ) over the bandit parameter θ.
struct PosteriorState {
  Vector mean;
  Matrix covariance;
  std::size_t trial_count = 0;

  /// m = 0, Σ = λI.
  static PosteriorState prior(std::size_t dim, double lambda);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }

  /// Throws InputError / NumericError if shapes, finiteness, symmetry or
  /// positive definiteness are violated.
  void validate() const;
};

/// Diagnostics of one coordinate-ascent run.
struct VariationalAux {
  Vector xi;
  int iterations_used = 0;
  bool converged = true;
  /// log ∫ h(θ, ξ) N(θ; m, Σ) dθ after each iteration; non-decreasing.
  std::vector<double> bound_trace;
};

struct UpdateOptions {
  double tol = 1e-6;
  int max_iter = 100;
};

struct UpdateResult {
  PosteriorState state;
  VariationalAux aux;
};

/// λ(ξ) = (σ(ξ) − ½)/(2ξ), with the analytic limit 1/8 for ξ ≤ 1e-8.
double lambda_of_xi(double xi);

/// Logistic lower bound σ(ξ)·exp((x−ξ)/2 − λ(ξ)(x² − ξ²)).
double logistic_lower_bound(double x, double xi);

/// Closed-form variational update from one slate of binary feedback.
/// ξ starts at 1 for every slate item and is re-optimized jointly with
/// (m, Σ) until max|Δξ| < tol. The input state is not modified.
UpdateResult update(const PosteriorState& state, std::span<const ItemId> slate,
                    std::span<const double> feedback, const ItemCatalog& items, double alpha,
                    UpdateOptions options = {});

/// Same update on explicit slate feature rows (one row per slate item). Rows
/// need not be normalized; a zero row contributes nothing.
UpdateResult update_features(const PosteriorState& state, const RowMatrix& slate_features,
                             std::span<const double> feedback, double alpha,
                             UpdateOptions options = {});

/// Marginal of the quadratic surrogate under the prior: the quantity the ξ
/// iterations maximize.
double variational_bound(const PosteriorState& state, const RowMatrix& slate_features,
                         std::span<const double> feedback, double alpha, std::span<const double> xi);

/// θ̂ = m + chol(Σ)·z with z ~ N(0, I) drawn from `seed`.
Vector sample_theta(const PosteriorState& state, Seed seed);

/// Slate log-likelihood with the DPP selection term and the full catalog
/// normalizer. Returns −∞ when X_S X_Sᵀ is singular.
double log_likelihood(const Vector& theta, std::span<const ItemId> slate,
                      std::span<const double> feedback, const ItemCatalog& items, double alpha);

/// The quadratic surrogate log h(θ, ξ) that lower bounds the slate terms.
double surrogate_log_h(const Vector& theta, std::span<const ItemId> slate,
                       std::span<const double> feedback, const ItemCatalog& items, double alpha,
                       std::span<const double> xi);

/// Slate terms of log_likelihood minus the geometric det term and catalog
/// normalizer: Σ φ(y_i, p_i) + 2α log r_i. The surrogate bounds this from below.
double slate_log_terms(const Vector& theta, std::span<const ItemId> slate,
                       std::span<const double> feedback, const ItemCatalog& items, double alpha);

inline constexpr int kSnapshotVersion = 1;

nlohmann::json to_json(const PosteriorState& state);
PosteriorState from_json(const nlohmann::json& j);

}  // namespace dc2b::posterior
