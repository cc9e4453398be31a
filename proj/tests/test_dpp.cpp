#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "dc2b/dpp.hpp"
#include "support.hpp"

using namespace dc2b;
using namespace dc2b::dpp;
using dc2b::testing::det_of;
using dc2b::testing::iota_ids;
using dc2b::testing::principal;

namespace {

ItemCatalog catalog_of(std::initializer_list<std::initializer_list<double>> rows) {
  RowMatrix X(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) X(i, j++) = v;
    ++i;
  }
  std::vector<RawId> ids(rows.size());
  std::iota(ids.begin(), ids.end(), 1);
  return ItemCatalog(ids, X);
}

Matrix random_psd(std::size_t n, std::size_t rank, std::mt19937_64& rng) {
  const RowMatrix B = dc2b::testing::random_rows(n, rank, rng);
  return B * B.transpose();
}

// Brute-force argmax of Σ log p + log det over all K-subsets, lexicographic ties.
std::vector<ItemId> brute_argmax(const Matrix& L, const Vector& logp, std::size_t K) {
  const std::size_t n = static_cast<std::size_t>(L.rows());
  std::vector<ItemId> best;
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + K, true);
  do {
    std::vector<ItemId> S;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) S.push_back(i);
    const double det = det_of(principal(L, S));
    if (det <= 0) continue;
    double val = std::log(det);
    for (auto i : S) val += logp(i);
    if (val > best_val) {
      best_val = val;
      best = S;
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

double log_objective(const Matrix& L, const Vector& logp, std::vector<ItemId> S) {
  std::sort(S.begin(), S.end());
  double v = std::log(det_of(principal(L, S)));
  for (auto i : S) v += logp(i);
  return v;
}

}  // namespace

TEST_CASE("build_kernel: zero parameter gives the Gram matrix") {
  const auto items = dc2b::testing::random_catalog(5, 3, 11);
  const auto K = build_kernel(Vector::Zero(3), items, 2.5);
  const Matrix gram = items.features() * items.features().transpose();
  CHECK((K.matrix() - gram).cwiseAbs().maxCoeff() < 1e-14);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(K.log_quality()(i) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("build_kernel: single item identity") {
  const auto items = catalog_of({{1, 0}});
  const auto K = build_kernel(Vector::Zero(2), items, 1.0);
  CHECK(K.matrix().rows() == 1);
  CHECK(K.matrix()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("build_kernel: hand-evaluated 2x2") {
  const auto items = catalog_of({{1, 0}, {0, 1}});
  Vector theta(2);
  theta << 1, 0;
  const auto K = build_kernel(theta, items, 0.5);
  // V_1 = e^{0.5}·[1,0], V_2 = [0,1]
  CHECK(K.matrix()(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(K.matrix()(0, 1) == doctest::Approx(0.0));
  CHECK(K.matrix()(1, 1) == doctest::Approx(1.0));
  CHECK(K.log_quality()(0) == doctest::Approx(1.0 - std::log1p(std::exp(1.0))));
}

TEST_CASE("build_kernel: errors") {
  const auto items = dc2b::testing::random_catalog(3, 2, 1);
  CHECK_THROWS_AS(build_kernel(Vector::Zero(3), items, 1.0), InputError);
  CHECK_THROWS_AS(build_kernel(Vector::Zero(2), items, 0.0), InputError);
  Vector bad(2);
  bad << std::nan(""), 0;
  CHECK_THROWS_AS(build_kernel(bad, items, 1.0), NumericError);
  const std::vector<ItemId> out_of_range{7};
  CHECK_THROWS_AS(build_kernel(Vector::Zero(2), items, 1.0, out_of_range), InputError);
}

TEST_CASE("build_kernel: subset of ids keeps row order and addressing") {
  const auto items = dc2b::testing::random_catalog(6, 3, 5);
  Vector theta = Vector::Constant(3, 0.3);
  const std::vector<ItemId> ids{4, 1, 2};
  const auto K = build_kernel(theta, items, 1.0, ids);
  const auto full = build_kernel(theta, items, 1.0);
  CHECK(K.ids() == ids);
  for (auto a : ids)
    for (auto b : ids)
      CHECK(K.matrix()(K.row_of(a), K.row_of(b)) == doctest::Approx(full.matrix()(a, b)).epsilon(1e-12));
}

TEST_CASE("subset_log_det examples") {
  Matrix L(2, 2);
  L << 2, 1, 1, 2;
  const auto K = Kernel::from_matrix(L);
  const std::vector<ItemId> one{0}, both{0, 1}, none{};
  CHECK(subset_log_det(K, one) == doctest::Approx(std::log(2.0)));
  CHECK(subset_log_det(K, both) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(subset_log_det(K, none) == 0.0);

  const auto dup = catalog_of({{1, 2}, {1, 2}, {0, 1}});
  const auto Kd = build_kernel(Vector::Zero(2), dup, 1.0);
  const std::vector<ItemId> twins{0, 1};
  CHECK(std::isinf(subset_log_det(Kd, twins)));
  CHECK(subset_log_det(Kd, twins) < 0);

  const std::vector<ItemId> bad{5};
  CHECK_THROWS_AS(subset_log_det(K, bad), InputError);
  const std::vector<ItemId> repeated{0, 0};
  CHECK_THROWS_AS(subset_log_det(K, repeated), InputError);
}

TEST_CASE("slate_probability examples") {
  Matrix one(1, 1);
  one << 1;
  const auto K1 = Kernel::from_matrix(one);
  const std::vector<ItemId> s{0}, none{};
  CHECK(slate_probability(K1, s) == doctest::Approx(0.5));
  CHECK(slate_probability(K1, none) == doctest::Approx(0.5));

  Matrix L(2, 2);
  L << 2, 1, 1, 2;
  const auto K = Kernel::from_matrix(L);
  // det(L + I) = 9 − 1 = 8
  CHECK(slate_probability(K, none) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("property: subset probabilities sum to one (50 kernels, N <= 8)") {
  std::mt19937_64 rng(2718);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rep % 8;
    const Matrix L = random_psd(n, 1 + rep % 4, rng);
    const auto K = Kernel::from_matrix(L);
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<ItemId> S;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) S.push_back(i);
      const double p = slate_probability(K, S);
      CHECK(p >= -1e-9);
      CHECK(p <= 1 + 1e-9);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("greedy_map: K=1 is the argmax of log L_ii + log p_i") {
  std::mt19937_64 rng(3);
  const Matrix L = random_psd(7, 4, rng);
  Vector logp = Vector::Zero(7);
  for (int i = 0; i < 7; ++i) logp(i) = -0.1 * i;
  const auto K = Kernel::from_matrix(L, logp);
  const auto ids = iota_ids(7);
  const auto slate = greedy_map(K, 1, ids);
  REQUIRE(slate.size() == 1);
  std::size_t best = 0;
  for (std::size_t i = 1; i < 7; ++i)
    if (std::log(L(i, i)) + logp(i) > std::log(L(best, best)) + logp(best)) best = i;
  CHECK(slate.items[0] == best);
}

TEST_CASE("greedy_map: duplicate of the first pick is never chosen") {
  const auto items = catalog_of({{1, 0, 0}, {1, 0, 0}, {0.1, 1, 0}, {0, 0.2, 1}});
  Vector theta(3);
  theta << 2, 0, 0;
  const auto K = build_kernel(theta, items, 1.0);
  const auto ids = iota_ids(4);
  const auto slate = greedy_map(K, 2, ids);
  REQUIRE(slate.size() == 2);
  CHECK(slate.items[0] == 0);
  CHECK(slate.items[1] != 1);
}

TEST_CASE("greedy_map: ties break toward the smallest id") {
  const auto K = Kernel::from_matrix(Matrix::Identity(4, 4));
  const std::vector<ItemId> ids{3, 1, 2, 0};
  const auto slate = greedy_map(K, 2, ids);
  CHECK(slate.items == std::vector<ItemId>{0, 1});
}

TEST_CASE("greedy_map: short slate when residuals collapse") {
  const auto items = catalog_of({{1, 0}, {0, 1}, {1, 1}, {1, -1}});
  const auto K = build_kernel(Vector::Zero(2), items, 1.0);
  const auto slate = greedy_map(K, 4, iota_ids(4));
  CHECK(slate.size() == 2);
}

TEST_CASE("greedy_map: input errors") {
  const auto K = Kernel::from_matrix(Matrix::Identity(3, 3));
  const std::vector<ItemId> none{};
  CHECK_THROWS_AS(greedy_map(K, 2, none), InputError);
  CHECK_THROWS_AS(greedy_map(K, 0, iota_ids(3)), InputError);
}

TEST_CASE("greedy_map: matches brute force on N=4, K=2 where they agree") {
  std::mt19937_64 rng(404);
  int agree = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix L = random_psd(4, 3, rng);
    Vector logp(4);
    for (int i = 0; i < 4; ++i) logp(i) = -std::uniform_real_distribution<double>(0, 2)(rng);
    const auto K = Kernel::from_matrix(L, logp);
    auto g = greedy_map(K, 2, iota_ids(4)).items;
    std::sort(g.begin(), g.end());
    const auto b = brute_argmax(L, logp, 2);
    if (g == b) {
      ++agree;
      CHECK(exhaustive_map(K, 2, iota_ids(4)).items == b);
    }
    CHECK(log_objective(L, logp, g) <= log_objective(L, logp, b) + 1e-9);
  }
  MESSAGE("N=4 K=2 greedy agreement: " << agree << "/50");
  CHECK(agree >= 40);
}

TEST_CASE("exhaustive_map examples") {
  std::mt19937_64 rng(9);
  const Matrix L = random_psd(5, 5, rng);
  const auto K = Kernel::from_matrix(L);
  const auto all = exhaustive_map(K, 5, iota_ids(5));
  CHECK(all.items == iota_ids(5));

  Matrix D = Matrix::Zero(4, 4);
  D.diagonal() << 1.0, 4.0, 2.0, 3.0;
  Vector logp(4);
  logp << std::log(0.9), std::log(0.5), std::log(0.8), std::log(0.5);
  // products: 0.9, 2.0, 1.6, 1.5 → top two are items 1 and 2
  const auto slate = exhaustive_map(Kernel::from_matrix(D, logp), 2, iota_ids(4));
  auto got = slate.items;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<ItemId>{1, 2});

  const auto big = Kernel::from_matrix(Matrix::Identity(16, 16));
  CHECK_THROWS_AS(exhaustive_map(big, 2, iota_ids(16)), InputError);
}

TEST_CASE("property: greedy vs exhaustive on 100 instances, N=6, K=3") {
  std::mt19937_64 rng(1234);
  int agree = 0;
  double ratio_sum = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto items = dc2b::testing::random_catalog(6, 4, 1000 + rep);
    const Vector theta = dc2b::testing::random_rows(1, 4, rng).row(0).transpose();
    const auto K = build_kernel(theta, items, 1.0);
    auto g = greedy_map(K, 3, iota_ids(6));
    auto e = exhaustive_map(K, 3, iota_ids(6));
    auto gs = g.items, es = e.items;
    std::sort(gs.begin(), gs.end());
    std::sort(es.begin(), es.end());
    if (gs == es) ++agree;
    // ratio of f = Π p · det(L_S) values
    ratio_sum += std::exp(map_log_objective(K, g.items) - map_log_objective(K, e.items));
    CHECK(e.objective >= g.objective - 1e-9);
  }
  MESSAGE("agreement " << agree << "/100, mean ratio " << ratio_sum / 100);
  CHECK(agree >= 90);
  CHECK(ratio_sum / 100 >= 0.99);
}

TEST_CASE("property: PSD of constructed kernels") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 50; ++rep) {
    const auto items = dc2b::testing::random_catalog(8, 3, 500 + rep);
    const Vector theta = 3.0 * dc2b::testing::random_rows(1, 3, rng).row(0).transpose();
    const auto K = build_kernel(theta, items, 2.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(K.matrix());
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * std::max(1.0, es.eigenvalues().maxCoeff()));
  }
}

TEST_CASE("property: greedy residual identity and finite increments") {
  for (int rep = 0; rep < 30; ++rep) {
    std::mt19937_64 rng(900 + rep);
    const auto items = dc2b::testing::random_catalog(12, 6, 40 + rep);
    const Vector theta = dc2b::testing::random_rows(1, 6, rng).row(0).transpose();
    const auto K = build_kernel(theta, items, 1.5);
    const auto slate = greedy_map(K, 5, iota_ids(12));
    REQUIRE(slate.size() == 5);
    double sum_gain = 0.0;
    double sum_logp = 0.0;
    for (std::size_t k = 0; k < slate.size(); ++k) {
      CHECK(std::isfinite(slate.gains[k]));
      sum_gain += slate.gains[k];
      sum_logp += K.log_quality()(K.row_of(slate.items[k]));
    }
    CHECK(sum_gain - sum_logp == doctest::Approx(subset_log_det(K, slate.items)).epsilon(1e-8));
    CHECK(slate.objective == doctest::Approx(sum_gain).epsilon(1e-12));
  }
}

TEST_CASE("property: det identity log det L_S = Σ 2α θ·x + log det X_S X_Sᵀ") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const auto items = dc2b::testing::random_catalog(7, 5, 200 + rep);
    const Vector theta = dc2b::testing::random_rows(1, 5, rng).row(0).transpose();
    const double alpha = 0.5 + rep % 4;
    const auto K = build_kernel(theta, items, alpha);
    const std::vector<ItemId> S{0, 2, 3, 6};
    RowMatrix XS(S.size(), 5);
    double lin = 0.0;
    for (std::size_t k = 0; k < S.size(); ++k) {
      XS.row(k) = items.feature(S[k]);
      lin += 2 * alpha * items.feature(S[k]).dot(theta);
    }
    const double expected = lin + std::log(det_of(XS * XS.transpose()));
    CHECK(subset_log_det(K, S) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("large alpha stays finite through the stored scale") {
  const auto items = dc2b::testing::random_catalog(6, 3, 8);
  Vector theta(3);
  theta << 2, -1, 0.5;
  const auto K = build_kernel(theta, items, 100.0);
  CHECK(K.matrix().allFinite());
  const auto slate = greedy_map(K, 3, iota_ids(6));
  CHECK(slate.size() == 3);
  const std::vector<ItemId> S{0, 1};
  const double expected = 200 * (items.feature(0).dot(theta) + items.feature(1).dot(theta)) +
                          std::log(det_of(principal(items.features() * items.features().transpose(), {0, 1})));
  CHECK(subset_log_det(K, S) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("kernel validation") {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(Kernel::from_matrix(asym), InputError);
  Matrix neg(1, 1);
  neg << -1;
  CHECK_THROWS_AS(Kernel::from_matrix(neg), InputError);
}

TEST_CASE("determinism: identical inputs give identical slates") {
  const auto items = dc2b::testing::random_catalog(30, 5, 99);
  Vector theta = Vector::LinSpaced(5, -1, 1);
  const auto a = greedy_map(build_kernel(theta, items, 3.0), 10, iota_ids(30));
  const auto b = greedy_map(build_kernel(theta, items, 3.0), 10, iota_ids(30));
  CHECK(a.items == b.items);
  CHECK(a.objective == b.objective);
}
