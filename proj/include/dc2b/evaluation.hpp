#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dc2b/catalog.hpp"
#include "dc2b/policies.hpp"

namespace dc2b::eval {

using dpp::Slate;

struct TrialLog {
  std::size_t trial = 0;
  Slate slate;
  std::vector<double> feedback;
  double clicks = 0.0;
};

struct ReplaySession {
  RawId user_id = 0;
  std::vector<ItemId> positive_set;  // sorted catalog indices
  std::vector<TrialLog> trials;
  std::size_t requested_trials = 0;
  /// The pool ran dry (or a slate came back short) before all trials ran.
  bool truncated = false;

  /// Recommended items in trial order, then selection order.
  std::vector<ItemId> recommended() const;
};

/// One test user's ground truth.
struct UserPositives {
  RawId user_id = 0;
  std::vector<ItemId> positives;  // catalog indices
};

/// Runs T trials of `policy`; feedback is 1 iff the item is a positive.
/// The policy is taken by value and advanced in place.
ReplaySession replay_user(policies::Policy policy, const UserPositives& user, std::size_t T);

struct PrecisionAt {
  double value = 0.0;
  std::size_t available = 0;
  /// Fewer than N items were recommended; value is over the prefix.
  bool truncated = false;
};

PrecisionAt precision_at_n(const ReplaySession& session, std::size_t N);

/// Intra-list distance of one slate: mean of (1 − sim) over unordered pairs.
/// nullopt for slates with fewer than 2 items.
std::optional<double> slate_ild(std::span<const ItemId> slate, const ItemCatalog& items);

/// Mean ILD over the session's trials (singleton slates skipped).
std::optional<double> session_ild(const ReplaySession& session, const ItemCatalog& items);

/// Per-user session ILD averaged with equal user weight.
double ild_diversity(std::span<const ReplaySession> sessions, const ItemCatalog& items);

/// Harmonic mean of two values in [0, 1]; 0 when both are 0.
double f_measure(double accuracy, double diversity);

inline const std::vector<std::size_t> kDefaultPrecisionCutoffs = {10, 30, 50};

struct UserMetrics {
  RawId user_id = 0;
  std::map<std::size_t, double> precision_at;
  double diversity = 0.0;
  double f_measure = 0.0;
};

struct MetricsReport {
  std::string policy;
  std::map<std::size_t, double> precision_at;
  double diversity = 0.0;
  /// f_measure(precision_at[accuracy_cutoff], diversity) on the averaged values.
  double f_measure = 0.0;
  std::size_t accuracy_cutoff = 50;
  std::size_t users = 0;
  std::size_t truncated_sessions = 0;
  std::vector<UserMetrics> per_user;
};

MetricsReport summarize(std::string policy_name, std::span<const ReplaySession> sessions,
                        const ItemCatalog& items,
                        const std::vector<std::size_t>& cutoffs = kDefaultPrecisionCutoffs);

/// Everything a replay needs besides the policy configuration.
struct ReplayInputs {
  const ItemCatalog* items = nullptr;
  Vector mean_user;
  std::vector<UserPositives> users;
};

struct ReplayOptions {
  std::size_t trials = 5;
  std::vector<std::size_t> cutoffs = kDefaultPrecisionCutoffs;
  /// 0 → DC2B_THREADS or hardware concurrency.
  unsigned threads = 0;
};

/// Replays every user with a per-user seed derived from cfg.seed.
std::vector<ReplaySession> replay_all(const ReplayInputs& inputs, const policies::PolicyConfig& cfg,
                                      const ReplayOptions& options);

MetricsReport evaluate_policy(const ReplayInputs& inputs, const policies::PolicyConfig& cfg,
                              const ReplayOptions& options);

/// Worker count: `requested` if non-zero, else $DC2B_THREADS, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Synthetic regret simulation

struct SyntheticEnvSpec {
  std::size_t dim = 5;
  std::size_t items = 12;
  double alpha = 0.1;
  double noise_sigma = 0.1;
  Seed seed = 7;
};

struct SyntheticEnv {
  Vector theta_star;  // ‖θ*‖₂ ≤ 1
  double noise_sigma = 0.1;
  double alpha = 0.1;
  ItemCatalog items;
  Seed seed = 0;
};

/// Unit-norm random features and a θ* drawn uniformly from the unit ball.
SyntheticEnv make_synthetic_env(const SyntheticEnvSpec& spec, Seed seed);

/// f_θ(S) = Π p_i · det(L_S) under (θ, α).
double reward_value(const Vector& theta, const ItemCatalog& items, double alpha, std::span<const ItemId> slate);

enum class RegretPolicy { dc2b, uniform_random, oracle };
std::string_view to_string(RegretPolicy policy);
RegretPolicy parse_regret_policy(std::string_view name);

struct RegretOptions {
  RegretPolicy policy = RegretPolicy::dc2b;
  std::size_t slate_size = 3;
  std::size_t horizon = 2000;
  std::size_t episodes = 20;
  /// Allow a greedy stand-in for the per-trial optimum when N exceeds the exhaustive cap.
  bool approx_oracle = false;
  /// Draw a fresh environment per episode (Bayesian regret over θ*); otherwise reuse one.
  bool resample_env = true;
  double lambda_prior = 1.0;
  posterior::UpdateOptions update{};
  Seed seed = 2024;
  unsigned threads = 0;
};

struct RegretCurve {
  RegretPolicy policy = RegretPolicy::dc2b;
  /// Mean over episodes of Σ_{s≤t} (f(S*) − f(S_s)), t = 1..T.
  std::vector<double> cumulative;
  /// Mean over episodes of the per-trial regret.
  std::vector<double> per_trial;
  /// Mean realized (noisy) reward per trial.
  std::vector<double> realized_reward;
  /// Smallest single regret term seen (should be ≥ −1e-9).
  double min_term = 0.0;
  bool approx_oracle = false;
  std::size_t episodes = 0;
};

RegretCurve simulate_regret(const SyntheticEnvSpec& spec, const RegretOptions& options);

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepParameter { alpha, slate_size };
std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

struct SweepRow {
  double value = 0.0;
  double precision_at_50 = 0.0;
  double diversity = 0.0;
  double f_measure = 0.0;
};

/// One replay per value with shared seeds. For slate_size sweeps the trial
/// count is raised to ceil(50/K) so Precision@50 stays defined.
std::vector<SweepRow> sweep(SweepParameter parameter, std::span<const double> values,
                            const ReplayInputs& inputs, const policies::PolicyConfig& base,
                            const ReplayOptions& options);

/// Items grouped in `clusters` tight feature clusters, one category per
/// cluster, and users whose positives concentrate in one cluster.
struct ClusteredScenario {
  ItemCatalog items;
  Vector mean_user;
  std::vector<UserPositives> users;
  ReplayInputs inputs() const { return {&items, mean_user, users}; }
};

struct ClusteredSpec {
  std::size_t clusters = 8;
  std::size_t items_per_cluster = 40;
  std::size_t dim = 10;
  std::size_t users = 40;
  double spread = 0.35;
};

ClusteredScenario make_clustered_scenario(const ClusteredSpec& spec, Seed seed);

// ---------------------------------------------------------------------------
// CSV output

/// policy,metric,value: one row per policy × metric.
void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports);
/// policy,prec@10,prec@30,prec@50,diversity,f_measure
void write_compare_csv(std::ostream& out, std::span<const MetricsReport> reports);
void write_sweep_csv(std::ostream& out, SweepParameter parameter, std::span<const SweepRow> rows);
void write_regret_csv(std::ostream& out, const RegretCurve& curve);

}  // namespace dc2b::eval
