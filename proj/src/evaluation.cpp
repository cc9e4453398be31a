#include "dc2b/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "dc2b/data_io.hpp"

namespace dc2b::eval {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<ItemId> random_subset(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<ItemId> all(n);
  std::iota(all.begin(), all.end(), ItemId{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(k);
  return all;
}

Vector random_unit(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

std::vector<ItemId> ReplaySession::recommended() const {
  std::vector<ItemId> out;
  for (const auto& trial : trials) out.insert(out.end(), trial.slate.items.begin(), trial.slate.items.end());
  return out;
}

ReplaySession replay_user(policies::Policy policy, const UserPositives& user, std::size_t T) {
  ReplaySession session;
  session.user_id = user.user_id;
  session.positive_set = user.positives;
  std::sort(session.positive_set.begin(), session.positive_set.end());
  session.requested_trials = T;
  const std::size_t K = policy.config().slate_size;
  for (std::size_t t = 0; t < T; ++t) {
    if (policy.pool().empty()) {
      session.truncated = true;
      break;
    }
    const std::size_t expected = std::min(K, policy.pool().size());
    TrialLog log;
    log.trial = t;
    log.slate = policy.select();
    if (log.slate.size() < expected) session.truncated = true;
    log.feedback.reserve(log.slate.size());
    for (ItemId id : log.slate.items) {
      const bool hit = std::binary_search(session.positive_set.begin(), session.positive_set.end(), id);
      log.feedback.push_back(hit ? 1.0 : 0.0);
      log.clicks += hit ? 1.0 : 0.0;
    }
    policy.observe(log.slate, log.feedback);
    session.trials.push_back(std::move(log));
    if (session.trials.back().slate.empty()) {
      session.truncated = true;
      break;
    }
  }
  return session;
}

PrecisionAt precision_at_n(const ReplaySession& session, std::size_t N) {
  if (N == 0) throw InputError("precision_at_n: N must be positive");
  const auto recs = session.recommended();
  PrecisionAt result;
  result.available = std::min(N, recs.size());
  result.truncated = recs.size() < N;
  if (result.available == 0) return result;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < result.available; ++k) {
    if (std::binary_search(session.positive_set.begin(), session.positive_set.end(), recs[k])) ++hits;
  }
  result.value = static_cast<double>(hits) / static_cast<double>(result.available);
  return result;
}

std::optional<double> slate_ild(std::span<const ItemId> slate, const ItemCatalog& items) {
  if (slate.size() < 2) return std::nullopt;
  items.check_ids(slate);
  if (!items.has_categories()) throw InputError("ILD needs item categories");
  double dissimilarity = 0.0;
  for (std::size_t i = 0; i < slate.size(); ++i) {
    for (std::size_t j = i + 1; j < slate.size(); ++j) {
      dissimilarity += 1.0 - data::jaccard_similarity(items.categories(slate[i]), items.categories(slate[j]));
    }
  }
  const double n = static_cast<double>(slate.size());
  return 2.0 * dissimilarity / (n * (n - 1.0));
}

std::optional<double> session_ild(const ReplaySession& session, const ItemCatalog& items) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& trial : session.trials) {
    if (auto v = slate_ild(trial.slate.items, items)) {
      total += *v;
      ++counted;
    }
  }
  if (counted == 0) return std::nullopt;
  return total / static_cast<double>(counted);
}

double ild_diversity(std::span<const ReplaySession> sessions, const ItemCatalog& items) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& s : sessions) {
    if (auto v = session_ild(s, items)) {
      total += *v;
      ++counted;
    }
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

double f_measure(double accuracy, double diversity) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0 && diversity >= 0.0 && diversity <= 1.0)) {
    throw InputError("f_measure inputs must lie in [0, 1]");
  }
  if (accuracy + diversity == 0.0) return 0.0;
  return 2.0 * accuracy * diversity / (accuracy + diversity);
}

MetricsReport summarize(std::string policy_name, std::span<const ReplaySession> sessions,
                        const ItemCatalog& items, const std::vector<std::size_t>& cutoffs) {
  MetricsReport report;
  report.policy = std::move(policy_name);
  report.users = sessions.size();
  report.accuracy_cutoff = cutoffs.empty() ? 0 : cutoffs.back();
  for (std::size_t N : cutoffs) report.precision_at[N] = 0.0;
  std::size_t diversity_users = 0;
  for (const auto& s : sessions) {
    UserMetrics um;
    um.user_id = s.user_id;
    for (std::size_t N : cutoffs) {
      um.precision_at[N] = precision_at_n(s, N).value;
      report.precision_at[N] += um.precision_at[N];
    }
    if (auto div = session_ild(s, items)) {
      um.diversity = *div;
      report.diversity += *div;
      ++diversity_users;
    }
    um.f_measure = report.accuracy_cutoff ? f_measure(um.precision_at[report.accuracy_cutoff], um.diversity) : 0.0;
    if (s.truncated) ++report.truncated_sessions;
    report.per_user.push_back(std::move(um));
  }
  if (!sessions.empty()) {
    for (auto& [N, v] : report.precision_at) v /= static_cast<double>(sessions.size());
  }
  if (diversity_users > 0) report.diversity /= static_cast<double>(diversity_users);
  if (report.accuracy_cutoff) {
    report.f_measure = f_measure(report.precision_at[report.accuracy_cutoff], report.diversity);
  }
  return report;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DC2B_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<ReplaySession> replay_all(const ReplayInputs& inputs, const policies::PolicyConfig& cfg,
                                      const ReplayOptions& options) {
  if (inputs.items == nullptr) throw InputError("replay inputs have no catalog");
  std::vector<ReplaySession> sessions(inputs.users.size());
  parallel_for(inputs.users.size(), resolve_threads(options.threads), [&](std::size_t u) {
    policies::PolicyConfig user_cfg = cfg;
    user_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(inputs.users[u].user_id));
    policies::Policy policy(user_cfg, *inputs.items, inputs.mean_user);
    sessions[u] = replay_user(std::move(policy), inputs.users[u], options.trials);
  });
  return sessions;
}

MetricsReport evaluate_policy(const ReplayInputs& inputs, const policies::PolicyConfig& cfg,
                              const ReplayOptions& options) {
  const auto sessions = replay_all(inputs, cfg, options);
  return summarize(std::string(policies::to_string(cfg.kind)), sessions, *inputs.items, options.cutoffs);
}

// ---------------------------------------------------------------------------

SyntheticEnv make_synthetic_env(const SyntheticEnvSpec& spec, Seed seed) {
  if (spec.dim == 0 || spec.items == 0) throw InputError("synthetic env needs positive dim and item count");
  if (!(spec.alpha > 0.0)) throw InputError("synthetic env alpha must be positive");
  std::mt19937_64 rng(seed);
  RowMatrix X(static_cast<Eigen::Index>(spec.items), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index r = 0; r < X.rows(); ++r) X.row(r) = random_unit(spec.dim, rng).transpose();
  // Uniform in the unit ball: direction times U^(1/d).
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = std::pow(unit(rng), 1.0 / static_cast<double>(spec.dim));
  SyntheticEnv env;
  env.theta_star = radius * random_unit(spec.dim, rng);
  env.noise_sigma = spec.noise_sigma;
  env.alpha = spec.alpha;
  env.seed = seed;
  std::vector<RawId> ids(spec.items);
  std::iota(ids.begin(), ids.end(), RawId{0});
  env.items = ItemCatalog(std::move(ids), std::move(X));
  return env;
}

double reward_value(const Vector& theta, const ItemCatalog& items, double alpha, std::span<const ItemId> slate) {
  const auto kernel = dpp::build_kernel(theta, items, alpha);
  return std::exp(dpp::map_log_objective(kernel, slate));
}

std::string_view to_string(RegretPolicy policy) {
  switch (policy) {
    case RegretPolicy::dc2b: return "dc2b";
    case RegretPolicy::uniform_random: return "random";
    case RegretPolicy::oracle: return "oracle";
  }
  return "unknown";
}

RegretPolicy parse_regret_policy(std::string_view name) {
  if (name == "dc2b") return RegretPolicy::dc2b;
  if (name == "random" || name == "uniform" || name == "uniform_random") return RegretPolicy::uniform_random;
  if (name == "oracle") return RegretPolicy::oracle;
  throw InputError("unknown regret policy '" + std::string(name) + "'");
}

RegretCurve simulate_regret(const SyntheticEnvSpec& spec, const RegretOptions& options) {
  if (options.slate_size == 0 || options.horizon == 0 || options.episodes == 0) {
    throw InputError("regret simulation needs positive slate size, horizon and episodes");
  }
  if (options.slate_size > std::min(spec.dim, spec.items)) {
    throw InputError("slate size " + std::to_string(options.slate_size) + " exceeds min(dim, items) = " +
                     std::to_string(std::min(spec.dim, spec.items)) + "; every slate would have zero reward");
  }
  if (spec.items > dpp::kExhaustiveCap && !options.approx_oracle) {
    throw InputError("catalog of " + std::to_string(spec.items) + " items exceeds the exhaustive oracle cap (" +
                     std::to_string(dpp::kExhaustiveCap) + "); pass --approx-oracle to use the greedy optimum");
  }
  const std::size_t T = options.horizon;
  std::vector<std::vector<double>> terms(options.episodes);
  std::vector<std::vector<double>> realized(options.episodes);

  parallel_for(options.episodes, resolve_threads(options.threads), [&](std::size_t ep) {
    const Seed env_seed = options.resample_env ? derive_seed(options.seed, 1, ep) : spec.seed;
    const SyntheticEnv env = make_synthetic_env(spec, env_seed);
    const auto kernel_star = dpp::build_kernel(env.theta_star, env.items, env.alpha);
    std::vector<ItemId> all(env.items.size());
    std::iota(all.begin(), all.end(), ItemId{0});
    const Slate best = spec.items <= dpp::kExhaustiveCap ? dpp::exhaustive_map(kernel_star, options.slate_size, all)
                                                         : dpp::greedy_map(kernel_star, options.slate_size, all);
    const double f_best = std::exp(dpp::map_log_objective(kernel_star, best.items));

    std::mt19937_64 rng(derive_seed(options.seed, 3, ep));
    std::normal_distribution<double> noise(0.0, env.noise_sigma);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    std::optional<policies::Policy> policy;
    if (options.policy == RegretPolicy::dc2b) {
      policies::PolicyConfig cfg;
      cfg.kind = policies::PolicyKind::dc2b;
      cfg.alpha = env.alpha;
      cfg.lambda_prior = options.lambda_prior;
      cfg.slate_size = options.slate_size;
      cfg.seed = derive_seed(options.seed, 2, ep);
      cfg.update = options.update;
      policy.emplace(cfg, env.items, Vector::Zero(static_cast<Eigen::Index>(spec.dim)));
      policy->set_pool_shrinks(false);
    }

    auto& ep_terms = terms[ep];
    auto& ep_reward = realized[ep];
    ep_terms.resize(T);
    ep_reward.resize(T);
    std::vector<double> feedback;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<ItemId> chosen;
      Slate slate;
      switch (options.policy) {
        case RegretPolicy::oracle: chosen = best.items; break;
        case RegretPolicy::uniform_random:
          chosen = random_subset(env.items.size(), std::min(options.slate_size, env.items.size()), rng);
          break;
        case RegretPolicy::dc2b:
          slate = policy->select();
          chosen = slate.items;
          break;
      }
      const double f = std::exp(dpp::map_log_objective(kernel_star, chosen));
      ep_terms[t] = f_best - f;
      ep_reward[t] = std::clamp(f + noise(rng), 0.0, f_best);

      feedback.clear();
      for (ItemId id : chosen) {
        const double p = sigmoid(env.items.feature(id).dot(env.theta_star));
        feedback.push_back(coin(rng) < p ? 1.0 : 0.0);
      }
      if (policy) policy->observe(slate, feedback);
    }
  });

  RegretCurve curve;
  curve.policy = options.policy;
  curve.approx_oracle = spec.items > dpp::kExhaustiveCap;
  curve.episodes = options.episodes;
  curve.per_trial.assign(T, 0.0);
  curve.cumulative.assign(T, 0.0);
  curve.realized_reward.assign(T, 0.0);
  curve.min_term = std::numeric_limits<double>::infinity();
  const double inv = 1.0 / static_cast<double>(options.episodes);
  for (std::size_t ep = 0; ep < options.episodes; ++ep) {
    double running = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      running += terms[ep][t];
      curve.per_trial[t] += terms[ep][t] * inv;
      curve.cumulative[t] += running * inv;
      curve.realized_reward[t] += realized[ep][t] * inv;
      curve.min_term = std::min(curve.min_term, terms[ep][t]);
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SweepParameter p) {
  return p == SweepParameter::alpha ? "alpha" : "slate_size";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "alpha") return SweepParameter::alpha;
  if (name == "slate_size" || name == "slate-size" || name == "K") return SweepParameter::slate_size;
  throw InputError("unknown sweep parameter '" + std::string(name) + "'");
}

std::vector<SweepRow> sweep(SweepParameter parameter, std::span<const double> values, const ReplayInputs& inputs,
                            const policies::PolicyConfig& base, const ReplayOptions& options) {
  if (values.empty()) throw InputError("sweep needs at least one value");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double value : values) {
    policies::PolicyConfig cfg = base;
    ReplayOptions opts = options;
    opts.cutoffs = {50};
    if (parameter == SweepParameter::alpha) {
      cfg.alpha = value;
    } else {
      if (!(value >= 1.0) || value != std::floor(value)) throw InputError("slate size values must be positive integers");
      cfg.slate_size = static_cast<std::size_t>(value);
      opts.trials = std::max(opts.trials, (50 + cfg.slate_size - 1) / cfg.slate_size);
    }
    const auto report = evaluate_policy(inputs, cfg, opts);
    rows.push_back({value, report.precision_at.at(50), report.diversity, report.f_measure});
  }
  return rows;
}

ClusteredScenario make_clustered_scenario(const ClusteredSpec& spec, Seed seed) {
  if (spec.clusters == 0 || spec.items_per_cluster == 0 || spec.dim == 0 || spec.users == 0) {
    throw InputError("clustered scenario needs positive sizes");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> centers;
  for (std::size_t c = 0; c < spec.clusters; ++c) centers.push_back(random_unit(spec.dim, rng));

  const std::size_t n = spec.clusters * spec.items_per_cluster;
  RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dim));
  std::vector<CategorySet> cats(n);
  std::vector<RawId> ids(n);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    for (std::size_t k = 0; k < spec.items_per_cluster; ++k) {
      const std::size_t i = c * spec.items_per_cluster + k;
      Vector x = centers[c];
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += spec.spread * normal(rng) / std::sqrt(double(spec.dim));
      X.row(static_cast<Eigen::Index>(i)) = x.transpose();
      cats[i] = {static_cast<int>(c)};
      ids[i] = static_cast<RawId>(i);
    }
  }

  ClusteredScenario scenario;
  scenario.items = ItemCatalog(std::move(ids), std::move(X), std::move(cats));
  scenario.mean_user = Vector::Zero(static_cast<Eigen::Index>(spec.dim));
  std::uniform_int_distribution<std::size_t> pick_cluster(0, spec.clusters - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t u = 0; u < spec.users; ++u) {
    const std::size_t fav = pick_cluster(rng);
    scenario.mean_user += centers[fav] / static_cast<double>(spec.users);
    UserPositives user;
    user.user_id = static_cast<RawId>(u);
    for (std::size_t i = 0; i < n; ++i) {
      const bool in_fav = i / spec.items_per_cluster == fav;
      if (coin(rng) < (in_fav ? 0.7 : 0.05)) user.positives.push_back(i);
    }
    scenario.users.push_back(std::move(user));
  }
  return scenario;
}

// ---------------------------------------------------------------------------

void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports) {
  out << "policy,metric,value\n";
  for (const auto& r : reports) {
    for (const auto& [N, v] : r.precision_at) out << r.policy << ",precision@" << N << ',' << fmt(v) << '\n';
    out << r.policy << ",diversity," << fmt(r.diversity) << '\n';
    out << r.policy << ",f_measure," << fmt(r.f_measure) << '\n';
  }
}

void write_compare_csv(std::ostream& out, std::span<const MetricsReport> reports) {
  out << "policy,prec@10,prec@30,prec@50,diversity,f_measure\n";
  auto at = [](const MetricsReport& r, std::size_t N) {
    auto it = r.precision_at.find(N);
    return it == r.precision_at.end() ? 0.0 : it->second;
  };
  for (const auto& r : reports) {
    out << r.policy << ',' << fmt(at(r, 10)) << ',' << fmt(at(r, 30)) << ',' << fmt(at(r, 50)) << ','
        << fmt(r.diversity) << ',' << fmt(r.f_measure) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, SweepParameter parameter, std::span<const SweepRow> rows) {
  out << to_string(parameter) << ",precision@50,diversity,f_measure\n";
  for (const auto& row : rows) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", row.value);
    out << buf << ',' << fmt(row.precision_at_50) << ',' << fmt(row.diversity) << ',' << fmt(row.f_measure) << '\n';
  }
}

void write_regret_csv(std::ostream& out, const RegretCurve& curve) {
  out << "t,cumulative_regret,per_trial_regret,realized_reward\n";
  for (std::size_t t = 0; t < curve.cumulative.size(); ++t) {
    out << (t + 1) << ',' << fmt(curve.cumulative[t]) << ',' << fmt(curve.per_trial[t]) << ','
        << fmt(curve.realized_reward[t]) << '\n';
  }
}

}  // namespace dc2b::eval
