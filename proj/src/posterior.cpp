#include "dc2b/posterior.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "dc2b/dpp.hpp"

namespace dc2b::posterior {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSamplingJitter = 1e-12;

void check_feedback(std::size_t slate_size, std::span<const double> feedback) {
  if (feedback.size() != slate_size) {
    throw InputError("feedback has " + std::to_string(feedback.size()) + " entries but slate has " +
                     std::to_string(slate_size) + " items");
  }
  for (double y : feedback) {
    if (y != 0.0 && y != 1.0) {
      throw InputError("feedback values must be 0 or 1");
    }
  }
}

RowMatrix gather(const ItemCatalog& items, std::span<const ItemId> slate) {
  items.check_ids(slate);
  RowMatrix X(static_cast<Eigen::Index>(slate.size()), static_cast<Eigen::Index>(items.dim()));
  for (std::size_t k = 0; k < slate.size(); ++k) {
    X.row(static_cast<Eigen::Index>(k)) = items.feature(slate[k]);
  }
  return X;
}

Matrix symmetrized(const Matrix& A) { return 0.5 * (A + A.transpose()); }

// φ(ξ) = log σ(ξ) − ξ/2 + λ(ξ)ξ²
double surrogate_offset(double xi) { return log_sigmoid(xi) - 0.5 * xi + lambda_of_xi(xi) * xi * xi; }

}  // namespace

PosteriorState PosteriorState::prior(std::size_t dim, double lambda) {
  if (dim == 0) throw InputError("posterior dimension must be positive");
  if (!(lambda > 0.0)) throw InputError("prior scale lambda must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  return {Vector::Zero(d), lambda * Matrix::Identity(d, d), 0};
}

void PosteriorState::validate() const {
  const auto d = mean.size();
  if (d == 0 || covariance.rows() != d || covariance.cols() != d) {
    throw InputError("posterior shapes are inconsistent");
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw NumericError("posterior has non-finite entries");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw NumericError("posterior covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericError("posterior covariance is not positive definite");
  }
}

double lambda_of_xi(double xi) {
  if (std::isnan(xi) || xi < 0.0) {
    throw InputError("lambda_of_xi: xi must be non-negative");
  }
  if (xi <= 1e-8) return 0.125;
  return (sigmoid(xi) - 0.5) / (2.0 * xi);
}

double logistic_lower_bound(double x, double xi) {
  const double a = std::abs(xi);
  return sigmoid(a) * std::exp((x - a) / 2.0 - lambda_of_xi(a) * (x * x - a * a));
}

UpdateResult update_features(const PosteriorState& state, const RowMatrix& X,
                             std::span<const double> feedback, double alpha, UpdateOptions options) {
  check_feedback(static_cast<std::size_t>(X.rows()), feedback);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be positive");
  if (!(options.tol > 0.0) || options.max_iter < 1) throw InputError("tol must be positive and max_iter >= 1");
  state.validate();
  if (static_cast<std::size_t>(X.cols()) != state.dim()) {
    throw InputError("slate features have dimension " + std::to_string(X.cols()) +
                     " but the posterior has dimension " + std::to_string(state.dim()));
  }
  if (X.rows() == 0) {
    return {state, VariationalAux{}};
  }
  const auto d = static_cast<Eigen::Index>(state.dim());
  const auto n = X.rows();

  Eigen::LLT<Matrix> prior_llt(state.covariance);
  if (prior_llt.info() != Eigen::Success) {
    throw NumericError("prior covariance is not positive definite");
  }
  const Matrix prior_precision = symmetrized(prior_llt.solve(Matrix::Identity(d, d)));
  Vector linear = prior_precision * state.mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    linear += (feedback[static_cast<std::size_t>(i)] + 2.0 * alpha - 0.5) * X.row(i).transpose();
  }

  VariationalAux aux;
  aux.xi = Vector::Ones(n);
  aux.converged = false;
  std::vector<double> xi_view(static_cast<std::size_t>(n));

  PosteriorState post;
  post.trial_count = state.trial_count + 1;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    Matrix precision = prior_precision;
    for (Eigen::Index i = 0; i < n; ++i) {
      precision += 2.0 * lambda_of_xi(aux.xi(i)) * X.row(i).transpose() * X.row(i);
    }
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) {
      throw NumericError("posterior precision is singular");
    }
    post.covariance = symmetrized(llt.solve(Matrix::Identity(d, d)));
    post.mean = post.covariance * linear;

    for (Eigen::Index i = 0; i < n; ++i) xi_view[static_cast<std::size_t>(i)] = aux.xi(i);
    aux.bound_trace.push_back(variational_bound(state, X, feedback, alpha, xi_view));

    const Matrix second_moment = post.covariance + post.mean * post.mean.transpose();
    Vector next(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      next(i) = std::sqrt(std::max(0.0, X.row(i).dot(second_moment * X.row(i).transpose())));
    }
    const double delta = (next - aux.xi).cwiseAbs().maxCoeff();
    aux.xi = next;
    aux.iterations_used = iter + 1;
    if (delta < options.tol) {
      aux.converged = true;
      break;
    }
  }
  if (!post.mean.allFinite() || !post.covariance.allFinite()) {
    throw NumericError("posterior update produced non-finite values");
  }
  return {std::move(post), std::move(aux)};
}

UpdateResult update(const PosteriorState& state, std::span<const ItemId> slate,
                    std::span<const double> feedback, const ItemCatalog& items, double alpha,
                    UpdateOptions options) {
  check_feedback(slate.size(), feedback);
  return update_features(state, gather(items, slate), feedback, alpha, options);
}

double variational_bound(const PosteriorState& state, const RowMatrix& X,
                         std::span<const double> feedback, double alpha, std::span<const double> xi) {
  check_feedback(static_cast<std::size_t>(X.rows()), feedback);
  if (xi.size() != static_cast<std::size_t>(X.rows())) {
    throw InputError("xi length does not match slate size");
  }
  const auto d = static_cast<Eigen::Index>(state.dim());
  Eigen::LLT<Matrix> prior_llt(state.covariance);
  const Matrix prior_precision = prior_llt.solve(Matrix::Identity(d, d));
  Matrix precision = prior_precision;
  Vector linear = prior_precision * state.mean;
  double offset = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    precision += 2.0 * lambda_of_xi(xi[k]) * X.row(i).transpose() * X.row(i);
    linear += (feedback[k] + 2.0 * alpha - 0.5) * X.row(i).transpose();
    offset += surrogate_offset(xi[k]);
  }
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericError("posterior precision is singular");
  }
  const double log_det_prior = 2.0 * prior_llt.matrixLLT().diagonal().array().log().sum();
  const double log_det_post = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (log_det_prior + log_det_post) + 0.5 * linear.dot(llt.solve(linear)) -
         0.5 * state.mean.dot(prior_precision * state.mean) + offset;
}

Vector sample_theta(const PosteriorState& state, Seed seed) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  Eigen::LLT<Matrix> llt(state.covariance);
  if (llt.info() != Eigen::Success) {
    llt.compute(state.covariance + kSamplingJitter * Matrix::Identity(d, d));
    if (llt.info() != Eigen::Success) {
      throw NumericError("sample_theta: covariance Cholesky failed");
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(d);
  for (Eigen::Index k = 0; k < d; ++k) z(k) = normal(rng);
  return state.mean + llt.matrixL() * z;
}

double slate_log_terms(const Vector& theta, std::span<const ItemId> slate,
                       std::span<const double> feedback, const ItemCatalog& items, double alpha) {
  check_feedback(slate.size(), feedback);
  const RowMatrix X = gather(items, slate);
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double z = X.row(i).dot(theta);
    const double y = feedback[static_cast<std::size_t>(i)];
    total += y * log_sigmoid(z) + (1.0 - y) * log_sigmoid(-z) + 2.0 * alpha * z;
  }
  return total;
}

double surrogate_log_h(const Vector& theta, std::span<const ItemId> slate,
                       std::span<const double> feedback, const ItemCatalog& items, double alpha,
                       std::span<const double> xi) {
  check_feedback(slate.size(), feedback);
  if (xi.size() != slate.size()) throw InputError("xi length does not match slate size");
  const RowMatrix X = gather(items, slate);
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double z = X.row(i).dot(theta);
    total += (2.0 * feedback[k] - 1.0) * z / 2.0 - lambda_of_xi(xi[k]) * z * z + 2.0 * alpha * z +
             surrogate_offset(xi[k]);
  }
  return total;
}

double log_likelihood(const Vector& theta, std::span<const ItemId> slate,
                      std::span<const double> feedback, const ItemCatalog& items, double alpha) {
  const double slate_terms = slate_log_terms(theta, slate, feedback, items, alpha);
  const RowMatrix X = gather(items, slate);
  const Matrix gram = X * X.transpose();
  std::vector<ItemId> all(slate.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  const double geometric = dpp::subset_log_det(dpp::Kernel::from_matrix(gram), all);
  if (geometric == kNegInf) return kNegInf;

  double normalizer = 0.0;
  for (ItemId j = 0; j < items.size(); ++j) {
    const auto x = items.feature(j);
    const double a = 2.0 * alpha * x.dot(theta) + std::log(x.squaredNorm());
    normalizer += a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
  }
  return slate_terms + geometric - normalizer;
}

nlohmann::json to_json(const PosteriorState& state) {
  const auto d = state.mean.size();
  std::vector<double> m(state.mean.data(), state.mean.data() + d);
  std::vector<double> sigma;
  sigma.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) sigma.push_back(state.covariance(r, c));
  }
  return {{"version", kSnapshotVersion},
          {"d", d},
          {"m", m},
          {"Sigma", sigma},
          {"trial_count", state.trial_count}};
}

PosteriorState from_json(const nlohmann::json& j) {
  if (j.value("version", -1) != kSnapshotVersion) {
    throw InputError("unsupported posterior snapshot version");
  }
  const auto d = j.at("d").get<Eigen::Index>();
  const auto m = j.at("m").get<std::vector<double>>();
  const auto sigma = j.at("Sigma").get<std::vector<double>>();
  if (d <= 0 || static_cast<Eigen::Index>(m.size()) != d ||
      static_cast<Eigen::Index>(sigma.size()) != d * d) {
    throw InputError("posterior snapshot shapes are inconsistent");
  }
  PosteriorState state;
  state.mean = Eigen::Map<const Vector>(m.data(), d);
  state.covariance = Eigen::Map<const RowMatrix>(sigma.data(), d, d);
  state.trial_count = j.at("trial_count").get<std::size_t>();
  state.validate();
  return state;
}

}  // namespace dc2b::posterior
