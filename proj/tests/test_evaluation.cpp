#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "dc2b/evaluation.hpp"
#include "support.hpp"

using namespace dc2b;
using namespace dc2b::eval;
using policies::PolicyConfig;
using policies::PolicyKind;

namespace {

ItemCatalog catalog_with_categories(std::size_t n, std::size_t d, std::uint64_t seed,
                                    std::vector<CategorySet> cats) {
  std::mt19937_64 rng(seed);
  std::vector<RawId> ids(n);
  std::iota(ids.begin(), ids.end(), 1);
  return ItemCatalog(ids, dc2b::testing::random_rows(n, d, rng), std::move(cats));
}

ReplaySession session_of(std::vector<std::vector<ItemId>> slates, std::vector<ItemId> positives) {
  ReplaySession s;
  std::sort(positives.begin(), positives.end());
  s.positive_set = positives;
  for (std::size_t t = 0; t < slates.size(); ++t) {
    TrialLog log;
    log.trial = t;
    log.slate.items = slates[t];
    s.trials.push_back(log);
  }
  s.requested_trials = slates.size();
  return s;
}

double slope_r2(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i + 1);
    sx += x, sy += y[i], sxx += x * x, sxy += x * y[i], syy += y[i] * y[i];
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  return cov * cov / (vx * vy);
}

}  // namespace

TEST_CASE("f_measure") {
  CHECK(f_measure(0.4, 0.4) == doctest::Approx(0.4));
  CHECK(f_measure(0.0, 0.0) == 0.0);
  CHECK(std::abs(f_measure(0.2882, 0.8118) - 0.4254) < 5e-5);
  CHECK(std::abs(f_measure(0.3117, 0.8367) - 0.4542) < 5e-5);
  CHECK(f_measure(0.3, 0.9) <= 0.9);
  CHECK_THROWS_AS(f_measure(1.2, 0.5), InputError);
}

TEST_CASE("precision_at_n") {
  const auto all = session_of({{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(precision_at_n(all, 10).value == 1.0);
  CHECK(!precision_at_n(all, 10).truncated);

  const auto alt = session_of({{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}}, {0, 2, 4, 6, 8});
  CHECK(precision_at_n(alt, 10).value == doctest::Approx(0.5));

  std::vector<std::vector<ItemId>> slates(5);
  for (ItemId i = 0; i < 50; ++i) slates[i / 10].push_back(i);
  std::vector<ItemId> hits;
  for (ItemId i = 0; i < 17; ++i) hits.push_back(3 * i);  // 0, 3, ..., 48
  const auto counted = session_of(slates, hits);
  CHECK(precision_at_n(counted, 50).value == doctest::Approx(0.34));

  const auto short_session = session_of({{0, 1, 2}}, {0});
  const auto p = precision_at_n(short_session, 10);
  CHECK(p.truncated);
  CHECK(p.available == 3);
  CHECK(p.value == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("ILD") {
  const std::vector<ItemId> s{0, 1, 2};
  const auto same = catalog_with_categories(3, 2, 1, {{1, 2}, {1, 2}, {1, 2}});
  CHECK(*slate_ild(s, same) == doctest::Approx(0.0));
  const auto disjoint = catalog_with_categories(3, 2, 1, {{1}, {2}, {3}});
  CHECK(*slate_ild(s, disjoint) == doctest::Approx(1.0));

  // {a,b}, {b,c}, {d}: sims 1/3, 0, 0
  const auto mixed = catalog_with_categories(3, 2, 1, {{1, 2}, {2, 3}, {4}});
  CHECK(*slate_ild(s, mixed) == doctest::Approx(1.0 - (1.0 / 3.0) / 3.0));
  // {a,b}, {a,b}, {b,c}: sims 1, 1/3, 1/3
  const auto twins = catalog_with_categories(3, 2, 1, {{1, 2}, {1, 2}, {2, 3}});
  CHECK(*slate_ild(s, twins) == doctest::Approx(1.0 - (1.0 + 2.0 / 3.0) / 3.0));
  // ILD arithmetic for the similarity triple {1, 0, 1/3}
  CHECK(1.0 - (1.0 + 0.0 + 1.0 / 3.0) / 3.0 == doctest::Approx(0.5556).epsilon(1e-4));

  const std::vector<ItemId> permuted{2, 0, 1};
  CHECK(*slate_ild(permuted, mixed) == doctest::Approx(*slate_ild(s, mixed)));
  const std::vector<ItemId> single{2};
  CHECK(!slate_ild(single, mixed).has_value());

  // Session and user averaging: singleton trials are skipped, users weigh equally.
  const auto a = session_of({{0, 1}, {2}}, {});
  const auto b = session_of({{0, 2}}, {});
  CHECK(*session_ild(a, mixed) == doctest::Approx(1.0 - 1.0 / 3.0));
  const std::vector<ReplaySession> both{a, b};
  CHECK(ild_diversity(both, mixed) == doctest::Approx(((1.0 - 1.0 / 3.0) + 1.0) / 2.0));
}

TEST_CASE("replay_user: saturated and empty relevance") {
  const auto items = catalog_with_categories(30, 4, 2, std::vector<CategorySet>(30, CategorySet{1}));
  const Vector u = Vector::Constant(4, 0.2);
  PolicyConfig cfg;
  cfg.slate_size = 5;
  UserPositives everyone{7, dc2b::testing::iota_ids(30)};
  const auto full = replay_user(policies::Policy(cfg, items, u), everyone, 3);
  CHECK(precision_at_n(full, 10).value == 1.0);
  for (const auto& t : full.trials)
    for (double y : t.feedback) CHECK(y == 1.0);

  UserPositives nobody{8, {}};
  policies::Policy p(cfg, items, u);
  const auto before = p.posterior()->covariance;
  const auto empty = replay_user(p, nobody, 3);
  CHECK(precision_at_n(empty, 10).value == 0.0);
  policies::Policy q(cfg, items, u);
  const auto s = q.select();
  q.observe(s, std::vector<double>(s.size(), 0.0));
  CHECK((q.posterior()->covariance - before).norm() > 1e-6);
}

TEST_CASE("replay_user: hand-traced LogRank fixture") {
  // Scores along e1 are 0.9, 0.8, ..., so LogRank recommends in id order.
  RowMatrix X(7, 2);
  for (int i = 0; i < 7; ++i) X.row(i) << 1.0 - 0.1 * i, 0.3;
  const ItemCatalog items({1, 2, 3, 4, 5, 6, 7}, X, std::vector<CategorySet>(7, CategorySet{1}));
  Vector u(2);
  u << 1.0, 0.0;
  PolicyConfig cfg;
  cfg.kind = PolicyKind::log_rank;
  cfg.slate_size = 2;
  const auto s = replay_user(policies::Policy(cfg, items, u), {1, {1, 4}}, 3);
  REQUIRE(s.trials.size() == 3);
  CHECK(s.trials[0].slate.items == std::vector<ItemId>{0, 1});
  CHECK(s.trials[1].slate.items == std::vector<ItemId>{2, 3});
  CHECK(s.trials[2].slate.items == std::vector<ItemId>{4, 5});
  CHECK(s.trials[0].feedback == std::vector<double>{0, 1});
  CHECK(s.trials[1].feedback == std::vector<double>{0, 0});
  CHECK(s.trials[2].feedback == std::vector<double>{1, 0});
  CHECK(s.recommended() == std::vector<ItemId>{0, 1, 2, 3, 4, 5});
  CHECK(!s.truncated);

  const auto cut = replay_user(policies::Policy(cfg, items, u), {1, {1}}, 5);
  CHECK(cut.truncated);
  CHECK(cut.recommended().size() == 7);
}

TEST_CASE("replay determinism and metric bounds") {
  const auto scenario = make_clustered_scenario(ClusteredSpec{4, 20, 6, 10, 0.35}, 3);
  ReplayOptions opts;
  opts.threads = 2;
  for (auto kind : {PolicyKind::dc2b, PolicyKind::log_rank, PolicyKind::mmr, PolicyKind::eps_greedy,
                    PolicyKind::dpp_map}) {
    PolicyConfig cfg;
    cfg.kind = kind;
    const auto a = evaluate_policy(scenario.inputs(), cfg, opts);
    opts.threads = 1;
    const auto b = evaluate_policy(scenario.inputs(), cfg, opts);
    std::ostringstream ca, cb;
    write_compare_csv(ca, std::vector<MetricsReport>{a});
    write_compare_csv(cb, std::vector<MetricsReport>{b});
    CHECK(ca.str() == cb.str());
    for (auto [n, v] : a.precision_at) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(a.diversity >= 0.0);
    CHECK(a.diversity <= 1.0);
    CHECK(a.f_measure <= std::max(a.precision_at.at(50), a.diversity) + 1e-12);
    CHECK(a.users == 10);
  }
}

TEST_CASE("regret: oracle is zero and terms are non-negative") {
  RegretOptions opts;
  opts.horizon = 200;
  opts.episodes = 4;
  opts.policy = RegretPolicy::oracle;
  const auto o = simulate_regret(SyntheticEnvSpec{}, opts);
  CHECK(o.cumulative.back() == 0.0);
  for (auto p : {RegretPolicy::uniform_random, RegretPolicy::dc2b}) {
    opts.policy = p;
    const auto c = simulate_regret(SyntheticEnvSpec{}, opts);
    CHECK(c.min_term >= -1e-9);
  }
}

TEST_CASE("regret: uniform random grows linearly") {
  RegretOptions opts;
  opts.policy = RegretPolicy::uniform_random;
  opts.horizon = 1000;
  opts.episodes = 10;
  const auto c = simulate_regret(SyntheticEnvSpec{}, opts);
  CHECK(c.cumulative.back() > 0.0);
  const double r2 = slope_r2(c.cumulative);
  MESSAGE("random-policy R^2 " << r2);
  CHECK(r2 > 0.95);
}

TEST_CASE("regret: input guards") {
  RegretOptions opts;
  SyntheticEnvSpec big;
  big.items = 20;
  CHECK_THROWS_AS(simulate_regret(big, opts), InputError);
  opts.approx_oracle = true;
  opts.horizon = 20;
  opts.episodes = 1;
  CHECK(simulate_regret(big, opts).approx_oracle);
  RegretOptions wide;
  wide.slate_size = 6;
  CHECK_THROWS_AS(simulate_regret(SyntheticEnvSpec{}, wide), InputError);
}

TEST_CASE("synthetic env respects the unit ball") {
  for (int s = 0; s < 50; ++s) {
    const auto env = make_synthetic_env(SyntheticEnvSpec{}, derive_seed(1, s));
    CHECK(env.theta_star.norm() <= 1.0);
    CHECK(env.items.size() == 12);
  }
}

TEST_CASE("sweep: single value equals one replay") {
  const auto scenario = make_clustered_scenario(ClusteredSpec{4, 20, 6, 8, 0.35}, 5);
  PolicyConfig cfg;
  ReplayOptions opts;
  const std::vector<double> values{3.0};
  const auto rows = sweep(SweepParameter::alpha, values, scenario.inputs(), cfg, opts);
  const auto direct = evaluate_policy(scenario.inputs(), cfg, opts);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].precision_at_50 == direct.precision_at.at(50));
  CHECK(rows[0].diversity == direct.diversity);
  CHECK(rows[0].f_measure == direct.f_measure);
  CHECK_THROWS_AS(sweep(SweepParameter::alpha, std::vector<double>{}, scenario.inputs(), cfg, opts), InputError);
}

TEST_CASE("CSV writers") {
  MetricsReport r;
  r.policy = "log_rank";
  r.precision_at = {{10, 0.5}, {30, 0.25}, {50, 0.2}};
  r.diversity = 0.8;
  r.f_measure = f_measure(0.2, 0.8);
  std::ostringstream m, c;
  write_metrics_csv(m, std::vector<MetricsReport>{r});
  write_compare_csv(c, std::vector<MetricsReport>{r});
  CHECK(m.str().rfind("policy,metric,value\n", 0) == 0);
  CHECK(m.str().find("log_rank,precision@10,0.500000") != std::string::npos);
  CHECK(c.str() == "policy,prec@10,prec@30,prec@50,diversity,f_measure\nlog_rank,0.500000,0.250000,0.200000,0.800000,0.320000\n");
}
