#include "swiss/combiners.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>

#include "swiss/error.hpp"

namespace swiss {

std::string_view to_string(CombineMethod method) {
  switch (method) {
    case CombineMethod::Swiss: return "swiss";
    case CombineMethod::Consensus: return "consensus";
    case CombineMethod::AverageRecentring: return "ar";
    case CombineMethod::Barycenter: return "barycenter";
  }
  return "unknown";
}

CombineMethod parse_combine_method(std::string_view name) {
  if (name == "swiss") return CombineMethod::Swiss;
  if (name == "consensus") return CombineMethod::Consensus;
  if (name == "ar") return CombineMethod::AverageRecentring;
  if (name == "barycenter") return CombineMethod::Barycenter;
  throw InvalidArgumentError("unknown combine method '" + std::string(name) +
                             "' (expected swiss|consensus|ar|barycenter)");
}

bool uses_inflated_batches(CombineMethod method) {
  return method != CombineMethod::Consensus;
}

Vector AffineMap::apply(const Vector& x) const {
  return matrix * (x - center_in) + center_out;
}

Matrix AffineMap::apply_rows(const Matrix& rows) const {
  Matrix out = (rows.rowwise() - center_in.transpose()) * matrix.transpose();
  out.rowwise() += center_out.transpose();
  return out;
}

bool AffineMap::is_invertible(double rel_tol) const {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) return false;
  const SpectralDecomposition eig =
      eigh(SymmetricMatrix(matrix.transpose() * matrix));
  const double lmax = eig.eigenvalues(0);
  return lmax > 0.0 && eig.eigenvalues(eig.eigenvalues.size() - 1) > rel_tol * lmax;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Batches are processed in ascending batch_id order.
std::vector<std::size_t> batch_order(std::span<const SampleBatch> batches) {
  validate_batches(batches);
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return batches[a].batch_id < batches[b].batch_id;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (batches[order[k]].batch_id == batches[order[k - 1]].batch_id)
      throw InvalidArgumentError("duplicate batch_id " +
                                 std::to_string(batches[order[k]].batch_id));
  }
  return order;
}

std::vector<Moments> batch_moments(std::span<const SampleBatch> batches,
                                   const std::vector<std::size_t>& order,
                                   std::optional<std::span<const Moments>> injected) {
  if (injected && injected->size() != batches.size())
    throw InvalidArgumentError("expected " + std::to_string(batches.size()) +
                               " injected moments, got " +
                               std::to_string(injected->size()));
  std::vector<Moments> out;
  out.reserve(order.size());
  for (std::size_t idx : order) {
    if (injected) {
      const Moments& m = (*injected)[idx];
      if (m.dim() != batches[idx].dim())
        throw InvalidArgumentError("injected moments for batch " +
                                   std::to_string(batches[idx].batch_id) +
                                   " have the wrong dimension");
      out.push_back(m);
    } else {
      out.push_back(estimate_moments(batches[idx]));
    }
  }
  return out;
}

template <typename F>
auto with_batch_context(int batch_id, F&& f) {
  try {
    return f();
  } catch (Error& e) {
    e.attach_batch(batch_id);
    throw;
  }
}

Moments pool_sorted(std::span<const Moments> moments,
                    std::span<const SampleBatch> batches,
                    const std::vector<std::size_t>& order, bool consensus) {
  try {
    return consensus ? consensus_pool(moments) : pool_moments(moments);
  } catch (Error& e) {
    // Pooling reports list positions; translate them to batch ids.
    if (e.batch_id() && static_cast<std::size_t>(*e.batch_id()) < order.size())
      e.replace_batch(batches[order[static_cast<std::size_t>(*e.batch_id())]].batch_id);
    throw;
  }
}

// Stacks the mapped batches in batch_id order.
CombineResult apply_maps(std::span<const SampleBatch> batches,
                         const std::vector<std::size_t>& order,
                         std::vector<AffineMap> maps, Moments pooled) {
  Eigen::Index rows = 0;
  for (const SampleBatch& b : batches) rows += b.size();
  const Eigen::Index d = batches.front().dim();
  Matrix combined(rows, d);
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const SampleBatch& b = batches[order[k]];
    combined.middleRows(offset, b.size()) = maps[k].apply_rows(b.draws);
    offset += b.size();
  }
  return CombineResult{std::move(combined), std::move(maps), std::move(pooled), 0.0};
}

CombineResult map_onto_target(std::span<const SampleBatch> batches,
                              const std::vector<std::size_t>& order,
                              const std::vector<Moments>& moments,
                              const Moments& target) {
  const SymmetricRoot root = spsq_with_inverse(target.cov);
  std::vector<AffineMap> maps;
  maps.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int id = batches[order[k]].batch_id;
    Matrix a = with_batch_context(id, [&] { return swiss_matrix(moments[k].cov, root); });
    maps.push_back(AffineMap{id, std::move(a), moments[k].mean, target.mean});
  }
  return apply_maps(batches, order, std::move(maps), target);
}

}  // namespace

Matrix swiss_matrix(const SymmetricMatrix& batch_cov, const SymmetricRoot& target) {
  const Matrix& m = target.root.matrix();
  const Matrix& m_inv = target.inverse_root.matrix();
  if (batch_cov.dim() != target.root.dim())
    throw InvalidArgumentError("swiss_matrix: dimension mismatch");
  const SymmetricMatrix whitened(m_inv * batch_cov.matrix() * m_inv);
  const SymmetricRoot whitened_root = spsq_with_inverse(whitened);
  return m * whitened_root.inverse_root.matrix() * m_inv;
}

CombineResult swiss_combine(std::span<const SampleBatch> batches,
                            std::optional<std::span<const Moments>> moments) {
  const auto start = Clock::now();
  const std::vector<std::size_t> order = batch_order(batches);
  const std::vector<Moments> per_batch = batch_moments(batches, order, moments);
  const Moments pooled = pool_sorted(per_batch, batches, order, false);
  CombineResult result = map_onto_target(batches, order, per_batch, pooled);
  result.wall_time_seconds = seconds_since(start);
  return result;
}

CombineResult ar_combine(std::span<const SampleBatch> batches,
                         std::optional<std::span<const Moments>> moments) {
  const auto start = Clock::now();
  const std::vector<std::size_t> order = batch_order(batches);
  const std::vector<Moments> per_batch = batch_moments(batches, order, moments);
  Moments pooled = pool_sorted(per_batch, batches, order, false);
  const Eigen::Index d = pooled.dim();
  // Re-centre on the plain average of the batch means; the covariance is
  // left untouched and only reported.
  Vector center = Vector::Zero(d);
  for (const Moments& m : per_batch) center += m.mean;
  center /= static_cast<double>(per_batch.size());
  pooled.mean = center;
  std::vector<AffineMap> maps;
  maps.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k)
    maps.push_back(AffineMap{batches[order[k]].batch_id, Matrix::Identity(d, d),
                             per_batch[k].mean, center});
  CombineResult result = apply_maps(batches, order, std::move(maps), std::move(pooled));
  result.wall_time_seconds = seconds_since(start);
  return result;
}

CombineResult consensus_combine(std::span<const SampleBatch> batches,
                                std::optional<std::span<const Moments>> moments) {
  const auto start = Clock::now();
  const std::vector<std::size_t> order = batch_order(batches);
  const Eigen::Index j = batches[order.front()].size();
  for (std::size_t idx : order) {
    if (batches[idx].size() != j)
      throw InvalidArgumentError(
          "consensus requires equal draw counts: batch " +
          std::to_string(batches[idx].batch_id) + " has " +
          std::to_string(batches[idx].size()) + ", expected " + std::to_string(j));
  }
  const std::vector<Moments> per_batch = batch_moments(batches, order, moments);
  Moments pooled = pool_sorted(per_batch, batches, order, true);

  Matrix combined;
  if (order.size() == 1) {
    combined = batches[order.front()].draws;
  } else {
    // Row form of θ = W Σ_b P_b θ_b, using the symmetry of P_b and W.
    const Eigen::Index d = pooled.dim();
    combined = Matrix::Zero(j, d);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const SymmetricMatrix precision = with_batch_context(
          batches[order[k]].batch_id, [&] { return spd_inverse(per_batch[k].cov); });
      combined.noalias() += batches[order[k]].draws * precision.matrix();
    }
    combined = combined * pooled.cov.matrix();
  }
  CombineResult result{std::move(combined), {}, std::move(pooled), 0.0};
  result.wall_time_seconds = seconds_since(start);
  return result;
}

GaussianBarycenter gaussian_barycenter(std::span<const Moments> per_batch,
                                       const BarycenterOptions& options) {
  if (per_batch.empty()) throw InvalidArgumentError("barycenter: no batches");
  if (per_batch.size() == 1) return GaussianBarycenter{per_batch.front(), 0, 0.0};

  const Eigen::Index d = per_batch.front().dim();
  const double inv_b = 1.0 / static_cast<double>(per_batch.size());
  Vector mean = Vector::Zero(d);
  Matrix s = Matrix::Zero(d, d);
  for (std::size_t b = 0; b < per_batch.size(); ++b) {
    if (per_batch[b].dim() != d)
      throw InvalidArgumentError("barycenter: batch " + std::to_string(b) +
                                 " has the wrong dimension");
    mean += inv_b * per_batch[b].mean;
    s += inv_b * per_batch[b].cov.matrix();
  }

  SymmetricMatrix current(s);
  double residual = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const SymmetricRoot root = spsq_with_inverse(current);
    Matrix averaged = Matrix::Zero(d, d);
    for (std::size_t b = 0; b < per_batch.size(); ++b) {
      const SymmetricMatrix inner(root.root.matrix() * per_batch[b].cov.matrix() *
                                  root.root.matrix());
      averaged += inv_b * with_batch_context(static_cast<int>(b), [&] {
                    return spsq(inner);
                  }).matrix();
    }
    const SymmetricMatrix next(root.inverse_root.matrix() * averaged * averaged *
                               root.inverse_root.matrix());
    residual = max_abs(next.matrix() - current.matrix());
    const double scale = current.max_abs();
    current = next;
    if (residual <= options.rel_tol * scale)
      return GaussianBarycenter{Moments(mean, current), it, residual};
  }
  throw ConvergenceError("Gaussian barycenter fixed point", options.max_iterations,
                         residual);
}

CombineResult barycenter_combine(std::span<const SampleBatch> batches,
                                 std::optional<std::span<const Moments>> moments,
                                 const BarycenterOptions& options) {
  const auto start = Clock::now();
  const std::vector<std::size_t> order = batch_order(batches);
  const std::vector<Moments> per_batch = batch_moments(batches, order, moments);
  const GaussianBarycenter bary = gaussian_barycenter(per_batch, options);
  CombineResult result = map_onto_target(batches, order, per_batch, bary.moments);
  result.wall_time_seconds = seconds_since(start);
  return result;
}

CombineResult combine(CombineMethod method, std::span<const SampleBatch> batches,
                      std::optional<std::span<const Moments>> moments) {
  switch (method) {
    case CombineMethod::Swiss: return swiss_combine(batches, moments);
    case CombineMethod::Consensus: return consensus_combine(batches, moments);
    case CombineMethod::AverageRecentring: return ar_combine(batches, moments);
    case CombineMethod::Barycenter: return barycenter_combine(batches, moments);
  }
  throw InvalidArgumentError("unknown combine method");
}

double displacement(const Matrix& map_matrix, const Matrix& points) {
  if (map_matrix.rows() != map_matrix.cols() || map_matrix.cols() != points.cols())
    throw InvalidArgumentError("displacement: dimension mismatch");
  if (points.rows() == 0) throw InvalidArgumentError("displacement: no points");
  const Matrix moved = points - points * map_matrix.transpose();
  return moved.squaredNorm() / static_cast<double>(points.rows());
}

}  // namespace swiss
