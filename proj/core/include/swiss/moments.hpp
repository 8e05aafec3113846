#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swiss/linalg.hpp"

namespace swiss {

/// Provenance of a batch of draws.
///
/// `inflation_exponent` is the power on the batch likelihood (B for an
/// inflated sub-posterior, 1 for a plain one) and `prior_exponent` the power
/// on the prior (1 or 1/B).
struct BatchMeta {
  double inflation_exponent = 1.0;
  double prior_exponent = 1.0;
  std::uint64_t seed = 0;
  std::string target_name;
  int num_batches = 1;
};

/// J×d draws from one batch's (possibly inflated) sub-posterior.
struct SampleBatch {
  int batch_id = 0;
  Matrix draws;
  BatchMeta meta;

  Eigen::Index size() const noexcept { return draws.rows(); }
  Eigen::Index dim() const noexcept { return draws.cols(); }

  /// Throws unless J >= 2, d >= 1 and every entry is finite.
  void validate() const;
};

/// Throws unless the batches are individually valid and share one dimension.
void validate_batches(std::span<const SampleBatch> batches);

/// Mean and covariance of a distribution. Positive definiteness of `cov` is
/// checked where it is used, not at construction.
struct Moments {
  Vector mean;
  SymmetricMatrix cov;

  Moments(Vector m, SymmetricMatrix c);
  Eigen::Index dim() const noexcept { return mean.size(); }
};

/// Column means and the unbiased (divisor J − 1) sample covariance.
Moments estimate_moments(const Matrix& draws);
Moments estimate_moments(const SampleBatch& batch);

/// Precision-averaged pooling for inflated sub-posteriors:
///   V = ((1/B) Σ V_b⁻¹)⁻¹,  μ = V (1/B) Σ V_b⁻¹ μ_b.
/// A single input is returned unchanged.
Moments pool_moments(std::span<const Moments> per_batch);

/// Precision-summed pooling for plain sub-posteriors:
///   W = (Σ V_b⁻¹)⁻¹,  μ = W Σ V_b⁻¹ μ_b.
Moments consensus_pool(std::span<const Moments> per_batch);

}  // namespace swiss
