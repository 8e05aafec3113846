#include "swiss/moments.hpp"

#include <string>

#include "swiss/error.hpp"

namespace swiss {

void SampleBatch::validate() const {
  if (draws.cols() < 1)
    throw InvalidArgumentError("batch " + std::to_string(batch_id) +
                               " has zero parameters");
  if (draws.rows() < 2)
    throw InsufficientSamplesError(static_cast<long>(draws.rows()), 1);
  if (!draws.allFinite())
    throw DataError("batch " + std::to_string(batch_id) +
                    " contains non-finite draws");
}

void validate_batches(std::span<const SampleBatch> batches) {
  if (batches.empty()) throw InvalidArgumentError("no batches supplied");
  const Eigen::Index d = batches.front().dim();
  for (const SampleBatch& b : batches) {
    b.validate();
    if (b.dim() != d)
      throw InvalidArgumentError("batch " + std::to_string(b.batch_id) +
                                 " has d = " + std::to_string(b.dim()) +
                                 ", expected " + std::to_string(d));
  }
}

Moments::Moments(Vector m, SymmetricMatrix c)
    : mean(std::move(m)), cov(std::move(c)) {
  if (mean.size() != cov.dim())
    throw InvalidArgumentError("moments: mean has length " +
                               std::to_string(mean.size()) +
                               " but covariance is " +
                               std::to_string(cov.dim()) + "-dimensional");
}

Moments estimate_moments(const Matrix& draws) {
  const Eigen::Index j = draws.rows();
  const Eigen::Index d = draws.cols();
  if (d < 1) throw InvalidArgumentError("estimate_moments: zero columns");
  if (j <= d) throw InsufficientSamplesError(static_cast<long>(j), static_cast<long>(d));
  if (!draws.allFinite()) throw DataError("estimate_moments: non-finite draws");

  Vector mean = draws.colwise().mean().transpose();
  const Matrix centered = draws.rowwise() - mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(j - 1);
  return Moments(std::move(mean), SymmetricMatrix(cov));
}

Moments estimate_moments(const SampleBatch& batch) {
  try {
    return estimate_moments(batch.draws);
  } catch (Error& e) {
    e.attach_batch(batch.batch_id);
    throw;
  }
}

namespace {

struct PrecisionSums {
  Matrix precision;
  Vector weighted_mean;
};

PrecisionSums sum_precisions(std::span<const Moments> per_batch) {
  const Eigen::Index d = per_batch.front().dim();
  PrecisionSums s{Matrix::Zero(d, d), Vector::Zero(d)};
  for (std::size_t b = 0; b < per_batch.size(); ++b) {
    const Moments& m = per_batch[b];
    if (m.dim() != d)
      throw InvalidArgumentError("pooling: batch " + std::to_string(b) +
                                 " has d = " + std::to_string(m.dim()) +
                                 ", expected " + std::to_string(d));
    try {
      const SymmetricMatrix p = spd_inverse(m.cov);
      s.precision += p.matrix();
      s.weighted_mean += p.matrix() * m.mean;
    } catch (Error& e) {
      e.attach_batch(static_cast<int>(b));
      throw;
    }
  }
  return s;
}

Moments pool_with_scale(std::span<const Moments> per_batch, double scale) {
  if (per_batch.empty()) throw InvalidArgumentError("pooling: no batches");
  if (per_batch.size() == 1) return per_batch.front();
  PrecisionSums s = sum_precisions(per_batch);
  const SymmetricMatrix cov = spd_inverse(SymmetricMatrix(scale * s.precision));
  Vector mean = cov.matrix() * (scale * s.weighted_mean);
  return Moments(std::move(mean), cov);
}

}  // namespace

Moments pool_moments(std::span<const Moments> per_batch) {
  return pool_with_scale(per_batch, 1.0 / static_cast<double>(per_batch.size()));
}

Moments consensus_pool(std::span<const Moments> per_batch) {
  return pool_with_scale(per_batch, 1.0);
}

}  // namespace swiss
