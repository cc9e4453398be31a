#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dc2b/catalog.hpp"
#include "dc2b/dpp.hpp"
#include "dc2b/posterior.hpp"

namespace dc2b::policies {

using dpp::Slate;

enum class PolicyKind { dc2b, log_rank, mmr, eps_greedy, dpp_map };

std::string_view to_string(PolicyKind kind);
/// Accepts the canonical names plus a few spellings ("dc2b", "logrank", "eps-greedy", ...).
PolicyKind parse_policy_kind(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::dc2b;
  double alpha = 3.0;
  double lambda_prior = 1.0;
  /// DC2B prior mean is prior_mean_scale · ū. 0 keeps the zero prior mean.
  double prior_mean_scale = 0.0;
  double mmr_alpha = 0.9;
  double epsilon = 0.1;
  double dpp_map_theta = 0.6;
  std::size_t slate_size = 10;
  Seed seed = 42;
  posterior::UpdateOptions update{};

  /// InputError on any out-of-range field.
  void validate() const;
};

/// Items still eligible for recommendation: the catalog minus everything
/// already recommended. Kept sorted.
class CandidatePool {
 public:
  CandidatePool() = default;
  explicit CandidatePool(std::size_t catalog_size);
  explicit CandidatePool(std::vector<ItemId> ids);

  const std::vector<ItemId>& remaining() const noexcept { return remaining_; }
  std::size_t size() const noexcept { return remaining_.size(); }
  bool empty() const noexcept { return remaining_.empty(); }
  bool contains(ItemId id) const;

  /// Removes the slate's items; InputError if any is not in the pool.
  void remove(std::span<const ItemId> slate);

 private:
  std::vector<ItemId> remaining_;
};

/// LogRank quality σ(ū·x_i) for every pool item, in pool order.
std::vector<double> logrank_quality(const CandidatePool& pool, const ItemCatalog& items,
                                    const Vector& mean_user);

Slate dc2b_select(const posterior::PosteriorState& state, const CandidatePool& pool,
                  const ItemCatalog& items, const PolicyConfig& cfg, Seed draw_seed);

posterior::PosteriorState dc2b_feedback(const posterior::PosteriorState& state, const Slate& slate,
                                        std::span<const double> feedback, const ItemCatalog& items,
                                        const PolicyConfig& cfg);

Slate log_rank_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                      std::size_t K);

/// Maximal marginal relevance: α·q_i − ((1−α)/|S|)·Σ_{j∈S} cos(x_i, x_j).
Slate mmr_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                 double mmr_alpha, std::size_t K);

/// Each slot is uniform over the unselected pool with probability ε, else
/// the best remaining LogRank item.
Slate eps_greedy_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                        double epsilon, std::size_t K, Seed seed);

/// Greedy MAP over the similarity kernel X Xᵀ with per-step score
/// θ'·log q_i + (1−θ')·log d_i².
Slate dpp_map_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                     double theta_tradeoff, std::size_t K);

/// Builds the (similarity kernel, LogRank log-quality) pair that dpp_map_select searches.
dpp::Kernel dpp_map_kernel(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user);
dpp::MapObjective dpp_map_objective(double theta_tradeoff);

/// One simulated user's policy: the configuration, the candidate pool, and
/// (for DC²B) the running posterior. Plain value; copy it to fork a run.
class Policy {
 public:
  Policy(PolicyConfig cfg, const ItemCatalog& items, Vector mean_user);

  const PolicyConfig& config() const noexcept { return cfg_; }
  const CandidatePool& pool() const noexcept { return pool_; }
  const std::optional<posterior::PosteriorState>& posterior() const noexcept { return posterior_; }
  std::size_t trials() const noexcept { return trial_; }

  /// Selects from the current pool. Deterministic in (config, seed, history).
  Slate select() const;

  /// Feeds back engagements, updates the posterior (DC²B) and removes the
  /// slate from the pool.
  void observe(const Slate& slate, std::span<const double> feedback);

  /// Disables pool shrinkage (repeatable action set).
  void set_pool_shrinks(bool shrinks) noexcept { shrink_pool_ = shrinks; }

 private:
  PolicyConfig cfg_;
  const ItemCatalog* items_;
  Vector mean_user_;
  CandidatePool pool_;
  std::optional<posterior::PosteriorState> posterior_;
  std::size_t trial_ = 0;
  bool shrink_pool_ = true;
};

}  // namespace dc2b::policies
