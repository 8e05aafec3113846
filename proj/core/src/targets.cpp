#include "swiss/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "swiss/error.hpp"

namespace swiss {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ½ log 2π

// log(1 + eˣ) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_std_normal(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

// Unbiased index in [0, bound) from the stream's engine.
std::uint64_t uniform_index(RngStream& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng.engine()();
  } while (r >= limit);
  return r % bound;
}

template <typename T>
void fisher_yates(std::vector<T>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::string_view to_string(Convention c) {
  switch (c) {
    case Convention::Full: return "full";
    case Convention::SubPosterior: return "sub-posterior";
    case Convention::Inflated: return "inflated";
  }
  return "unknown";
}

Convention parse_convention(std::string_view name) {
  if (name == "full") return Convention::Full;
  if (name == "sub-posterior" || name == "subposterior") return Convention::SubPosterior;
  if (name == "inflated") return Convention::Inflated;
  throw InvalidArgumentError("unknown convention '" + std::string(name) +
                             "' (expected full|sub-posterior|inflated)");
}

Exponents exponents_for(Convention c, int num_batches) {
  if (num_batches < 1) throw InvalidArgumentError("number of batches must be >= 1");
  const double b = static_cast<double>(num_batches);
  switch (c) {
    case Convention::Full: return {1.0, 1.0};
    case Convention::SubPosterior: return {1.0 / b, 1.0};
    case Convention::Inflated: return {1.0, b};
  }
  return {};
}

double TargetModel::log_density(const Vector& x) const {
  double lp = 0.0;
  if (log_prior) lp += exponents.prior_power * log_prior(x);
  if (log_likelihood) lp += exponents.likelihood_power * log_likelihood(x);
  if (log_jacobian) lp += log_jacobian(x);
  return std::isnan(lp) ? -std::numeric_limits<double>::infinity() : lp;
}

Vector TargetModel::output(const Vector& x) const { return to_output ? to_output(x) : x; }

double rare_bernoulli_logpdf(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) return -std::numeric_limits<double>::infinity();
  return std::log(theta) + 999.0 * std::log1p(-theta);
}

double warped_gaussian_logpdf(const Vector& theta) {
  if (theta.size() != 2) throw InvalidArgumentError("warped gaussian is 2-dimensional");
  return log_std_normal(theta(0)) + log_std_normal(theta(1) + theta(0) * theta(0));
}

double gaussian_mixture_logpdf(const Vector& theta, const Vector& mu1, const Vector& mu2) {
  if (theta.size() != mu1.size() || theta.size() != mu2.size())
    throw InvalidArgumentError("gaussian mixture: dimension mismatch");
  const double dim = static_cast<double>(theta.size());
  const double a = -0.5 * (theta - mu1).squaredNorm();
  const double b = -0.5 * (theta - mu2).squaredNorm();
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m)) - dim * kLogSqrt2Pi;
}

TargetModel replicated_target(std::string name, int dim, LogDensityFn logpdf,
                              int num_batches, Exponents exponents) {
  if (num_batches < 1) throw InvalidArgumentError("number of batches must be >= 1");
  const double share = 1.0 / static_cast<double>(num_batches);
  TargetModel t;
  t.name = std::move(name);
  t.dim = dim;
  t.log_likelihood = [logpdf = std::move(logpdf), share](const Vector& x) {
    return share * logpdf(x);
  };
  t.exponents = exponents;
  return t;
}

namespace {

// Effective power on the replicated density.
double replicated_power(int num_batches, const Exponents& e) {
  return e.likelihood_power / static_cast<double>(num_batches);
}

}  // namespace

TargetModel rare_bernoulli_target(int num_batches, Exponents exponents) {
  // Sampling coordinate φ = logit θ; log θ = −softplus(−φ), log(1−θ) = −softplus(φ).
  TargetModel t = replicated_target(
      "rare-bernoulli", 1,
      [](const Vector& phi) { return -softplus(-phi(0)) - 999.0 * softplus(phi(0)); },
      num_batches, exponents);
  t.log_jacobian = [](const Vector& phi) { return -softplus(-phi(0)) - softplus(phi(0)); };
  t.to_output = [](const Vector& phi) { return Vector::Constant(1, sigmoid(phi(0))); };
  t.draw_initial = [](RngStream& rng) {
    // Uniform prior on θ.
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    return Vector::Constant(1, std::log(u) - std::log1p(-u));
  };
  t.find_mode = [num_batches](const Exponents& e) {
    const double c = replicated_power(num_batches, e);
    const double a = c + 1.0;
    const double b = 999.0 * c + 1.0;
    const double theta = a / (a + b);
    const double var = 1.0 / ((a + b) * theta * (1.0 - theta));
    return ModeEstimate{Vector::Constant(1, std::log(theta / (1.0 - theta))),
                        SymmetricMatrix(Matrix::Constant(1, 1, var))};
  };
  return t;
}

TargetModel warped_gaussian_target(int num_batches, Exponents exponents) {
  TargetModel t = replicated_target("warped-gaussian", 2, warped_gaussian_logpdf,
                                    num_batches, exponents);
  t.draw_initial = [](RngStream& rng) { return rng.normal_vector(2); };
  t.find_mode = [num_batches](const Exponents& e) {
    const double c = replicated_power(num_batches, e);
    return ModeEstimate{Vector::Zero(2),
                        SymmetricMatrix(Matrix::Identity(2, 2) / c)};
  };
  return t;
}

TargetModel gaussian_mixture_target(int num_batches, Exponents exponents, Vector mu1,
                                    Vector mu2) {
  if (mu1.size() != 2 || mu2.size() != 2)
    throw InvalidArgumentError("gaussian mixture modes must be 2-dimensional");
  TargetModel t = replicated_target(
      "gaussian-mixture", 2,
      [mu1, mu2](const Vector& x) { return gaussian_mixture_logpdf(x, mu1, mu2); },
      num_batches, exponents);
  t.draw_initial = [](RngStream& rng) { return rng.normal_vector(2); };
  t.find_mode = [num_batches, mu1](const Exponents& e) {
    const double c = replicated_power(num_batches, e);
    return ModeEstimate{mu1, SymmetricMatrix(Matrix::Identity(2, 2) / c)};
  };
  return t;
}

std::vector<Moments> GaussianSuite::inflated() const {
  const double b = static_cast<double>(batches.size());
  std::vector<Moments> out;
  out.reserve(batches.size());
  for (const Moments& m : batches)
    out.emplace_back(m.mean, SymmetricMatrix(m.cov.matrix() / b));
  return out;
}

GaussianSuite gaussian_conjugate_suite(int d, int num_batches, std::uint64_t seed) {
  if (d < 1) throw InvalidArgumentError("gaussian suite: d must be >= 1");
  if (num_batches < 1) throw InvalidArgumentError("gaussian suite: B must be >= 1");
  RngStream rng(seed, 0);
  const SymmetricMatrix identity = SymmetricMatrix::identity(d);
  std::vector<Moments> batches;
  batches.reserve(static_cast<std::size_t>(num_batches));
  for (int b = 0; b < num_batches; ++b) {
    Vector mean = rng.normal_vector(d);
    SymmetricMatrix cov = sample_inverse_wishart(5.0 * d, identity, rng);
    batches.emplace_back(std::move(mean), std::move(cov));
  }
  Moments full = consensus_pool(batches);
  return GaussianSuite{std::move(batches), std::move(full)};
}

Matrix draw_gaussian(const Moments& m, Eigen::Index j, RngStream& rng) {
  const LowerTriangular l = cholesky(m.cov);
  Matrix x = rng.normal_matrix(j, m.dim()) * l.matrix().transpose();
  x.rowwise() += m.mean.transpose();
  return x;
}

Matrix draw_gaussian_matched(const Moments& m, Eigen::Index j, RngStream& rng) {
  const Eigen::Index d = m.dim();
  if (j <= d) throw InsufficientSamplesError(static_cast<long>(j), static_cast<long>(d));
  Matrix z = rng.normal_matrix(j, d);
  const Moments zm = estimate_moments(z);
  z.rowwise() -= zm.mean.transpose();
  // Right-multiplying by L_S⁻ᵀ turns the sample covariance L_S L_Sᵀ into I.
  const Matrix whiten = cholesky(zm.cov).inverse().transpose();
  Matrix x = z * whiten * cholesky(m.cov).matrix().transpose();
  x.rowwise() += m.mean.transpose();
  return x;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), p());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  if (group) out.group.emplace();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = rows[k];
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(r);
    out.y(static_cast<Eigen::Index>(k)) = y(r);
    if (group) out.group->push_back((*group)[static_cast<std::size_t>(r)]);
  }
  return out;
}

PartitionScheme parse_partition_scheme(std::string_view name) {
  if (name == "random-equal") return PartitionScheme::RandomEqual;
  if (name == "by-group") return PartitionScheme::ByGroup;
  throw InvalidArgumentError("unknown partition scheme '" + std::string(name) +
                             "' (expected random-equal|by-group)");
}

std::string_view to_string(PartitionScheme s) {
  return s == PartitionScheme::RandomEqual ? "random-equal" : "by-group";
}

std::vector<std::vector<Eigen::Index>> Partition::rows_by_batch() const {
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(num_batches));
  for (std::size_t i = 0; i < assignment.size(); ++i)
    out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<Eigen::Index> Partition::sizes() const {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(num_batches), 0);
  for (int b : assignment) ++out[static_cast<std::size_t>(b)];
  return out;
}

Partition partition(const Dataset& data, int num_batches, PartitionScheme scheme,
                    std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.n());
  if (num_batches < 1) throw InvalidArgumentError("partition: B must be >= 1");
  if (static_cast<std::size_t>(num_batches) > n)
    throw InvalidArgumentError("partition: B = " + std::to_string(num_batches) +
                               " exceeds n = " + std::to_string(n));
  RngStream rng(seed, 0);
  Partition out{std::vector<int>(n, 0), num_batches};

  if (scheme == PartitionScheme::RandomEqual) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    fisher_yates(perm, rng);
    const std::size_t base = n / static_cast<std::size_t>(num_batches);
    const std::size_t extra = n % static_cast<std::size_t>(num_batches);
    std::size_t pos = 0;
    for (int b = 0; b < num_batches; ++b) {
      const std::size_t len = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
      for (std::size_t k = 0; k < len; ++k) out.assignment[perm[pos++]] = b;
    }
    return out;
  }

  if (!data.group) throw InvalidArgumentError("partition by-group: dataset has no group column");
  const std::set<int> keys(data.group->begin(), data.group->end());
  if (static_cast<std::size_t>(num_batches) > keys.size())
    throw InvalidArgumentError("partition by-group: B = " + std::to_string(num_batches) +
                               " exceeds the number of groups " +
                               std::to_string(keys.size()));
  std::vector<int> groups(keys.begin(), keys.end());
  fisher_yates(groups, rng);
  std::vector<std::pair<int, int>> batch_of;  // (group, batch), sorted by group
  for (std::size_t i = 0; i < groups.size(); ++i)
    batch_of.emplace_back(groups[i], static_cast<int>(i % static_cast<std::size_t>(num_batches)));
  std::sort(batch_of.begin(), batch_of.end());
  for (std::size_t i = 0; i < n; ++i) {
    const int g = (*data.group)[i];
    auto it = std::lower_bound(batch_of.begin(), batch_of.end(), std::pair<int, int>{g, -1});
    out.assignment[i] = it->second;
  }
  return out;
}

Dataset simulate_rare_feature_data(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgumentError("simulate: n must be >= 1");
  constexpr Eigen::Index p = kRareFeatureFrequencies.size();
  RngStream rng(seed, 0);
  Dataset data;
  data.x.resize(n, p);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double eta = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double v = k == 0 ? 1.0 : (rng.bernoulli(kRareFeatureFrequencies[ku]) ? 1.0 : 0.0);
      data.x(i, k) = v;
      eta += v * kRareFeatureTheta[ku];
    }
    data.y(i) = rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
  }
  return data;
}

LogisticLikelihood::LogisticLikelihood(Matrix x, Vector y) {
  if (x.rows() != y.size())
    throw InvalidArgumentError("logistic: X has " + std::to_string(x.rows()) +
                               " rows but y has " + std::to_string(y.size()) + " entries");
  if (!x.allFinite()) throw DataError("logistic: non-finite features");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0)
      throw DataError("logistic: response " + std::to_string(i) + " is not 0/1");

  // Rows with identical features collapse into one weighted row, in order of
  // first appearance.
  std::map<std::vector<double>, Eigen::Index> seen;
  std::vector<Eigen::Index> first;
  std::vector<double> counts, successes;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> key;
    key.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) key.push_back(x(i, j));
    auto [it, inserted] = seen.try_emplace(std::move(key), static_cast<Eigen::Index>(first.size()));
    if (inserted) {
      first.push_back(i);
      counts.push_back(0.0);
      successes.push_back(0.0);
    }
    counts[static_cast<std::size_t>(it->second)] += 1.0;
    successes[static_cast<std::size_t>(it->second)] += y(i);
  }
  const auto u = static_cast<Eigen::Index>(first.size());
  x_.resize(u, x.cols());
  for (Eigen::Index k = 0; k < u; ++k) x_.row(k) = x.row(first[static_cast<std::size_t>(k)]);
  count_ = Eigen::Map<const Vector>(counts.data(), u);
  successes_ = Eigen::Map<const Vector>(successes.data(), u);
}

double LogisticLikelihood::log_likelihood(const Vector& theta) const {
  if (theta.size() != dim()) throw InvalidArgumentError("logistic: dimension mismatch");
  const Vector eta = x_ * theta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    s += successes_(i) * eta(i) - count_(i) * softplus(eta(i));
  return s;
}

Vector LogisticLikelihood::gradient(const Vector& theta) const {
  if (theta.size() != dim()) throw InvalidArgumentError("logistic: dimension mismatch");
  const Vector eta = x_ * theta;
  Vector resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    resid(i) = successes_(i) - count_(i) * sigmoid(eta(i));
  return x_.transpose() * resid;
}

Matrix LogisticLikelihood::fisher(const Vector& theta) const {
  const Vector eta = x_ * theta;
  Vector w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double s = sigmoid(eta(i));
    w(i) = count_(i) * s * (1.0 - s);
  }
  return x_.transpose() * w.asDiagonal() * x_;
}

TargetModel logistic_regression_model(const Matrix& x, const Vector& y, Exponents exponents,
                                      double prior_variance) {
  if (!(prior_variance > 0.0)) throw InvalidArgumentError("logistic: prior variance must be > 0");
  auto lik = std::make_shared<const LogisticLikelihood>(x, y);
  const int d = static_cast<int>(lik->dim());

  TargetModel t;
  t.name = "logistic";
  t.dim = d;
  t.exponents = exponents;
  t.log_prior = [prior_variance](const Vector& th) {
    return -0.5 * th.squaredNorm() / prior_variance;
  };
  t.log_likelihood = [lik](const Vector& th) { return lik->log_likelihood(th); };
  t.draw_initial = [d, prior_variance](RngStream& rng) {
    return Vector(std::sqrt(prior_variance) * rng.normal_vector(d));
  };
  t.find_mode = [lik, d, prior_variance](const Exponents& e) {
    auto objective = [&](const Vector& th) {
      return -0.5 * e.prior_power * th.squaredNorm() / prior_variance +
             e.likelihood_power * lik->log_likelihood(th);
    };
    Vector theta = Vector::Zero(d);
    double f = objective(theta);
    Matrix neg_hessian;
    for (int it = 0; it < 200; ++it) {
      const Vector grad = -e.prior_power * theta / prior_variance +
                          e.likelihood_power * lik->gradient(theta);
      neg_hessian = e.prior_power / prior_variance * Matrix::Identity(d, d) +
                    e.likelihood_power * lik->fisher(theta);
      const Vector step = spd_solve(SymmetricMatrix(neg_hessian), grad);
      double t_step = 1.0;
      Vector next = theta + step;
      double f_next = objective(next);
      while (!(f_next >= f) && t_step > 1e-10) {
        t_step *= 0.5;
        next = theta + t_step * step;
        f_next = objective(next);
      }
      theta = next;
      const double moved = (t_step * step).cwiseAbs().maxCoeff();
      f = f_next;
      if (moved < 1e-10) break;
    }
    neg_hessian = e.prior_power / prior_variance * Matrix::Identity(d, d) +
                  e.likelihood_power * lik->fisher(theta);
    return ModeEstimate{theta, spd_inverse(SymmetricMatrix(neg_hessian))};
  };
  return t;
}

}  // namespace swiss
