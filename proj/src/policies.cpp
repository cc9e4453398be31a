#include "dc2b/policies.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>

namespace dc2b::policies {
namespace {

void check_mean_user(const ItemCatalog& items, const Vector& mean_user) {
  if (static_cast<std::size_t>(mean_user.size()) != items.dim()) {
    throw InputError("mean user embedding has dimension " + std::to_string(mean_user.size()) +
                     " but item features have dimension " + std::to_string(items.dim()));
  }
}

void check_pool(const CandidatePool& pool, std::size_t K) {
  if (pool.empty()) throw InputError("candidate pool is empty");
  if (K == 0) throw InputError("slate size K must be at least 1");
}

// Index of the best unselected entry; ties go to the smallest id (pool order).
std::size_t argmax_unselected(const std::vector<double>& score, const std::vector<bool>& taken) {
  std::size_t best = score.size();
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (taken[i]) continue;
    if (best == score.size() || score[i] > score[best]) best = i;
  }
  return best;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::dc2b: return "dc2b";
    case PolicyKind::log_rank: return "log_rank";
    case PolicyKind::mmr: return "mmr";
    case PolicyKind::eps_greedy: return "eps_greedy";
    case PolicyKind::dpp_map: return "dpp_map";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  std::string key;
  for (char ch : name) {
    if (ch == '-' || ch == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (key == "dc2b") return PolicyKind::dc2b;
  if (key == "logrank") return PolicyKind::log_rank;
  if (key == "mmr") return PolicyKind::mmr;
  if (key == "epsgreedy" || key == "epsilongreedy") return PolicyKind::eps_greedy;
  if (key == "dppmap" || key == "dpp") return PolicyKind::dpp_map;
  throw InputError("unknown policy '" + std::string(name) + "'");
}

void PolicyConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in [0, 1]");
  if (!(mmr_alpha >= 0.0 && mmr_alpha <= 1.0)) throw InputError("mmr_alpha must lie in [0, 1]");
  if (!(dpp_map_theta >= 0.0 && dpp_map_theta <= 1.0)) throw InputError("dpp_map_theta must lie in [0, 1]");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be positive");
  if (!(lambda_prior > 0.0) || !std::isfinite(lambda_prior)) throw InputError("lambda must be positive");
  if (slate_size < 1) throw InputError("slate size must be at least 1");
  if (!(prior_mean_scale >= 0.0) || !std::isfinite(prior_mean_scale)) {
    throw InputError("prior mean scale must be finite and non-negative");
  }
}

CandidatePool::CandidatePool(std::size_t catalog_size) : remaining_(catalog_size) {
  std::iota(remaining_.begin(), remaining_.end(), ItemId{0});
}

CandidatePool::CandidatePool(std::vector<ItemId> ids) : remaining_(std::move(ids)) {
  std::sort(remaining_.begin(), remaining_.end());
  remaining_.erase(std::unique(remaining_.begin(), remaining_.end()), remaining_.end());
}

bool CandidatePool::contains(ItemId id) const {
  return std::binary_search(remaining_.begin(), remaining_.end(), id);
}

void CandidatePool::remove(std::span<const ItemId> slate) {
  for (ItemId id : slate) {
    auto it = std::lower_bound(remaining_.begin(), remaining_.end(), id);
    if (it == remaining_.end() || *it != id) {
      throw InputError("item " + std::to_string(id) + " is not in the candidate pool");
    }
    remaining_.erase(it);
  }
}

std::vector<double> logrank_quality(const CandidatePool& pool, const ItemCatalog& items,
                                    const Vector& mean_user) {
  check_mean_user(items, mean_user);
  items.check_ids(pool.remaining());
  std::vector<double> q;
  q.reserve(pool.size());
  for (ItemId id : pool.remaining()) {
    q.push_back(sigmoid(items.feature(id).dot(mean_user)));
  }
  return q;
}

Slate dc2b_select(const posterior::PosteriorState& state, const CandidatePool& pool,
                  const ItemCatalog& items, const PolicyConfig& cfg, Seed draw_seed) {
  check_pool(pool, cfg.slate_size);
  const Vector theta = posterior::sample_theta(state, draw_seed);
  const dpp::Kernel kernel = dpp::build_kernel(theta, items, cfg.alpha, pool.remaining());
  return dpp::greedy_map(kernel, cfg.slate_size, pool.remaining());
}

posterior::PosteriorState dc2b_feedback(const posterior::PosteriorState& state, const Slate& slate,
                                        std::span<const double> feedback, const ItemCatalog& items,
                                        const PolicyConfig& cfg) {
  return posterior::update(state, slate.items, feedback, items, cfg.alpha, cfg.update).state;
}

Slate log_rank_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                      std::size_t K) {
  check_pool(pool, K);
  const auto q = logrank_quality(pool, items, mean_user);
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min(K, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return q[a] > q[b] || (q[a] == q[b] && a < b); });
  Slate slate;
  for (std::size_t t = 0; t < k; ++t) {
    slate.items.push_back(pool.remaining()[order[t]]);
    slate.gains.push_back(q[order[t]]);
    slate.objective += q[order[t]];
  }
  return slate;
}

Slate mmr_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                 double mmr_alpha, std::size_t K) {
  check_pool(pool, K);
  const auto q = logrank_quality(pool, items, mean_user);
  const auto& ids = pool.remaining();
  const std::size_t n = ids.size();
  const std::size_t k = std::min(K, n);
  // Catalog rows are unit length, so cosine is the dot product; a zero row
  // (possible only in hand-built catalogs) has similarity 0.
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = items.feature(ids[i]).norm();

  std::vector<double> sim_sum(n, 0.0);
  std::vector<bool> taken(n, false);
  std::vector<double> score(n);
  Slate slate;
  for (std::size_t step = 0; step < k; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      score[i] = step == 0 ? mmr_alpha * q[i]
                           : mmr_alpha * q[i] - (1.0 - mmr_alpha) / static_cast<double>(step) * sim_sum[i];
    }
    const std::size_t best = argmax_unselected(score, taken);
    taken[best] = true;
    slate.items.push_back(ids[best]);
    slate.gains.push_back(score[best]);
    slate.objective += score[best];
    const auto xb = items.feature(ids[best]);
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double denom = norms[i] * norms[best];
      sim_sum[i] += denom > 0.0 ? items.feature(ids[i]).dot(xb) / denom : 0.0;
    }
  }
  return slate;
}

Slate eps_greedy_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                        double epsilon, std::size_t K, Seed seed) {
  check_pool(pool, K);
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in [0, 1]");
  const auto q = logrank_quality(pool, items, mean_user);
  const auto& ids = pool.remaining();
  const std::size_t n = ids.size();
  const std::size_t k = std::min(K, n);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> free_slots;
  Slate slate;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t pick;
    if (coin(rng) < epsilon) {
      free_slots.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free_slots.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> uniform(0, free_slots.size() - 1);
      pick = free_slots[uniform(rng)];
    } else {
      pick = argmax_unselected(q, taken);
    }
    taken[pick] = true;
    slate.items.push_back(ids[pick]);
    slate.gains.push_back(q[pick]);
    slate.objective += q[pick];
  }
  return slate;
}

dpp::Kernel dpp_map_kernel(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user) {
  check_mean_user(items, mean_user);
  items.check_ids(pool.remaining());
  const auto& ids = pool.remaining();
  const auto n = static_cast<Eigen::Index>(ids.size());
  RowMatrix X(n, static_cast<Eigen::Index>(items.dim()));
  Vector log_q(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const ItemId id = ids[static_cast<std::size_t>(r)];
    X.row(r) = items.feature(id);
    log_q(r) = log_sigmoid(items.feature(id).dot(mean_user));
  }
  Matrix L = X * X.transpose();
  L = 0.5 * (L + L.transpose());
  return dpp::Kernel(ids, std::move(L), std::move(log_q));
}

dpp::MapObjective dpp_map_objective(double theta_tradeoff) {
  if (!(theta_tradeoff >= 0.0 && theta_tradeoff <= 1.0)) {
    throw InputError("dpp_map_theta must lie in [0, 1]");
  }
  return {theta_tradeoff, 1.0 - theta_tradeoff};
}

Slate dpp_map_select(const CandidatePool& pool, const ItemCatalog& items, const Vector& mean_user,
                     double theta_tradeoff, std::size_t K) {
  check_pool(pool, K);
  const auto objective = dpp_map_objective(theta_tradeoff);
  return dpp::greedy_map(dpp_map_kernel(pool, items, mean_user), K, pool.remaining(), objective);
}

Policy::Policy(PolicyConfig cfg, const ItemCatalog& items, Vector mean_user)
    : cfg_(cfg), items_(&items), mean_user_(std::move(mean_user)), pool_(items.size()) {
  cfg_.validate();
  if (cfg_.kind == PolicyKind::dc2b) {
    posterior_ = posterior::PosteriorState::prior(items.dim(), cfg_.lambda_prior);
    if (cfg_.prior_mean_scale != 0.0) {
      check_mean_user(items, mean_user_);
      posterior_->mean = cfg_.prior_mean_scale * mean_user_;
    }
  } else {
    check_mean_user(items, mean_user_);
  }
}

Slate Policy::select() const {
  const Seed trial_seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(cfg_.kind), trial_);
  switch (cfg_.kind) {
    case PolicyKind::dc2b: return dc2b_select(*posterior_, pool_, *items_, cfg_, trial_seed);
    case PolicyKind::log_rank: return log_rank_select(pool_, *items_, mean_user_, cfg_.slate_size);
    case PolicyKind::mmr: return mmr_select(pool_, *items_, mean_user_, cfg_.mmr_alpha, cfg_.slate_size);
    case PolicyKind::eps_greedy:
      return eps_greedy_select(pool_, *items_, mean_user_, cfg_.epsilon, cfg_.slate_size, trial_seed);
    case PolicyKind::dpp_map:
      return dpp_map_select(pool_, *items_, mean_user_, cfg_.dpp_map_theta, cfg_.slate_size);
  }
  throw InputError("unknown policy kind");
}

void Policy::observe(const Slate& slate, std::span<const double> feedback) {
  if (feedback.size() != slate.size()) {
    throw InputError("feedback length does not match slate size");
  }
  if (cfg_.kind == PolicyKind::dc2b) {
    posterior_ = dc2b_feedback(*posterior_, slate, feedback, *items_, cfg_);
  }
  if (shrink_pool_) pool_.remove(slate.items);
  ++trial_;
}

}  // namespace dc2b::policies
