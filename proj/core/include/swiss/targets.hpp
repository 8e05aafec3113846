#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swiss/linalg.hpp"
#include "swiss/moments.hpp"
#include "swiss/random.hpp"

namespace swiss {

/// Powers applied to the prior and to the batch likelihood.
struct Exponents {
  double prior_power = 1.0;
  double likelihood_power = 1.0;
};

/// full: π0·f;  sub-posterior: π0^{1/B}·f_b;  inflated: π0·f_b^B.
enum class Convention { Full, SubPosterior, Inflated };

std::string_view to_string(Convention c);
Convention parse_convention(std::string_view name);
Exponents exponents_for(Convention c, int num_batches);

struct ModeEstimate {
  Vector mode;
  /// Inverse negative Hessian at the mode, when the target can supply it.
  std::optional<SymmetricMatrix> covariance;
};

using LogDensityFn = std::function<double(const Vector&)>;

/// An evaluatable log-density on the sampling space:
///   prior_power·log π0(x) + likelihood_power·log f(y_b | x) + log_jacobian(x).
///
/// `log_jacobian` and `to_output` describe a reparameterisation (the sampler
/// works on an unconstrained space, draws are reported after `to_output`).
/// The Jacobian term is applied once, independent of the exponents.
struct TargetModel {
  std::string name;
  int dim = 0;
  LogDensityFn log_prior;       ///< null means flat
  LogDensityFn log_likelihood;  ///< bound to one data batch
  Exponents exponents;
  LogDensityFn log_jacobian;                          ///< optional
  std::function<Vector(const Vector&)> to_output;     ///< optional
  std::function<Vector(RngStream&)> draw_initial;     ///< prior draw, optional
  std::function<ModeEstimate(const Exponents&)> find_mode;  ///< optional

  double log_density(const Vector& x) const;
  Vector output(const Vector& x) const;
};

// --- closed-form test densities -------------------------------------------

/// log θ + 999 log(1 − θ); −∞ outside (0, 1).
double rare_bernoulli_logpdf(double theta);
/// log φ(θ₁) + log φ(θ₂ + θ₁²).
double warped_gaussian_logpdf(const Vector& theta);
/// log(φ₂(θ − μ₁) + φ₂(θ − μ₂)).
double gaussian_mixture_logpdf(const Vector& theta, const Vector& mu1, const Vector& mu2);

/// A target whose full posterior is `logpdf` and whose B batches each carry
/// the likelihood logpdf/B, so the product of sub-posteriors is the full
/// posterior and every inflated sub-posterior equals it.
TargetModel replicated_target(std::string name, int dim, LogDensityFn logpdf,
                              int num_batches, Exponents exponents);

/// Rare Bernoulli target on the logit scale; draws are reported as θ.
TargetModel rare_bernoulli_target(int num_batches, Exponents exponents);
TargetModel warped_gaussian_target(int num_batches, Exponents exponents);
TargetModel gaussian_mixture_target(int num_batches, Exponents exponents,
                                    Vector mu1 = Vector{{-2.0, 0.0}},
                                    Vector mu2 = Vector{{2.0, 0.0}});

// --- Gaussian conjugate suite ---------------------------------------------

struct GaussianSuite {
  /// Sub-posterior moments N(μ_b, V_b).
  std::vector<Moments> batches;
  /// Analytic full posterior with precision Σ V_b⁻¹.
  Moments full;
  int num_batches() const { return static_cast<int>(batches.size()); }
  /// Inflated sub-posterior moments N(μ_b, V_b / B).
  std::vector<Moments> inflated() const;
};

/// μ_b ~ N_d(0, I), V_b ~ W⁻¹(5d, I).
GaussianSuite gaussian_conjugate_suite(int d, int num_batches, std::uint64_t seed);

/// J draws from N(mean, cov) via the Cholesky factor.
Matrix draw_gaussian(const Moments& m, Eigen::Index j, RngStream& rng);
/// Like draw_gaussian but the point set is standardised first so its sample
/// mean and covariance (divisor J − 1) equal the given moments.
Matrix draw_gaussian_matched(const Moments& m, Eigen::Index j, RngStream& rng);

// --- data, partitions, logistic regression --------------------------------

struct Dataset {
  Matrix x;
  Vector y;
  std::optional<std::vector<int>> group;

  Eigen::Index n() const noexcept { return x.rows(); }
  Eigen::Index p() const noexcept { return x.cols(); }
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

enum class PartitionScheme { RandomEqual, ByGroup };
PartitionScheme parse_partition_scheme(std::string_view name);
std::string_view to_string(PartitionScheme s);

struct Partition {
  std::vector<int> assignment;
  int num_batches = 0;

  std::vector<std::vector<Eigen::Index>> rows_by_batch() const;
  std::vector<Eigen::Index> sizes() const;
};

/// random-equal: seeded permutation cut into B contiguous chunks whose sizes
/// differ by at most one. by-group: shuffled groups dealt round-robin.
Partition partition(const Dataset& data, int num_batches, PartitionScheme scheme,
                    std::uint64_t seed);

inline constexpr std::array<double, 5> kRareFeatureFrequencies{1.0, 0.02, 0.03, 0.05, 0.001};
inline constexpr std::array<double, 5> kRareFeatureTheta{-3.0, 1.2, -0.5, 0.8, 3.0};

/// Binary features with the frequencies above (column 0 is the intercept),
/// responses from the logistic model at kRareFeatureTheta.
Dataset simulate_rare_feature_data(Eigen::Index n, std::uint64_t seed);

/// Bernoulli-logit likelihood Σ y η − log(1 + e^η), η = Xθ.
///
/// Duplicate feature rows are merged into (count, successes) pairs, which
/// makes binary designs cost O(distinct rows) per evaluation.
class LogisticLikelihood {
 public:
  LogisticLikelihood(Matrix x, Vector y);

  Eigen::Index dim() const noexcept { return x_.cols(); }
  Eigen::Index distinct_rows() const noexcept { return x_.rows(); }
  double log_likelihood(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;
  /// Negative Hessian Xᵀ diag(σ(1 − σ)) X.
  Matrix fisher(const Vector& theta) const;

 private:
  Matrix x_;  ///< distinct rows
  Vector count_;
  Vector successes_;
};

inline constexpr double kLogisticPriorVariance = 100.0;

/// Logistic regression with prior N(0, prior_variance·I).
TargetModel logistic_regression_model(const Matrix& x, const Vector& y,
                                      Exponents exponents = {},
                                      double prior_variance = kLogisticPriorVariance);

}  // namespace swiss
