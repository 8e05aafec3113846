#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "swiss/linalg.hpp"
#include "swiss/moments.hpp"

namespace swiss {

enum class CombineMethod { Swiss, Consensus, AverageRecentring, Barycenter };

std::string_view to_string(CombineMethod method);
/// Accepts "swiss", "consensus", "ar" and "barycenter".
CombineMethod parse_combine_method(std::string_view name);
/// Consensus consumes plain sub-posterior draws; the others inflated ones.
bool uses_inflated_batches(CombineMethod method);

/// x ↦ matrix (x − center_in) + center_out.
struct AffineMap {
  int batch_id = 0;
  Matrix matrix;
  Vector center_in;
  Vector center_out;

  Vector apply(const Vector& x) const;
  /// Applies the map to every row of a J×d matrix.
  Matrix apply_rows(const Matrix& rows) const;
  /// Smallest eigenvalue of AᵀA relative to the largest exceeds rel_tol.
  bool is_invertible(double rel_tol = 1e-12) const;
};

struct CombineResult {
  /// Rows ordered by (batch_id, draw index); J rows for consensus.
  Matrix combined;
  /// Keyed by batch_id in ascending order; empty for consensus.
  std::vector<AffineMap> per_batch_maps;
  Moments pooled;
  double wall_time_seconds = 0.0;
};

/// Maps a batch with covariance `batch_cov` onto the target whose symmetric
/// root and inverse root are given:
///   Ṽ_b = M⁻¹ V_b M⁻¹,  A_b = M SPSQ(Ṽ_b)⁻¹ M⁻¹.
Matrix swiss_matrix(const SymmetricMatrix& batch_cov, const SymmetricRoot& target);

/// SwISS recombination of inflated sub-posterior draws. With `moments`
/// supplied (one per batch, same order) the per-batch estimation is skipped.
CombineResult swiss_combine(std::span<const SampleBatch> batches,
                            std::optional<std::span<const Moments>> moments = {});

/// Draw-wise precision-weighted average of plain sub-posterior draws.
/// Requires equal J across batches.
CombineResult consensus_combine(std::span<const SampleBatch> batches,
                                std::optional<std::span<const Moments>> moments = {});

/// Shift-only recombination x − μ_b + μ̄ with μ̄ = (1/B) Σ μ_b. `pooled`
/// carries μ̄ and the pool_moments covariance.
CombineResult ar_combine(std::span<const SampleBatch> batches,
                         std::optional<std::span<const Moments>> moments = {});

struct BarycenterOptions {
  int max_iterations = 200;
  double rel_tol = 1e-10;
};

struct GaussianBarycenter {
  Moments moments;
  int iterations = 0;
  double residual = 0.0;
};

/// Equal-weight 2-Wasserstein barycenter of N(μ_b, V_b) by the fixed point
///   S ← S^{-1/2} ((1/B) Σ (S^{1/2} V_b S^{1/2})^{1/2})² S^{-1/2}
/// started from the average covariance.
GaussianBarycenter gaussian_barycenter(std::span<const Moments> per_batch,
                                       const BarycenterOptions& options = {});

/// Moves each batch onto the Gaussian barycenter with the SwISS-style map.
CombineResult barycenter_combine(std::span<const SampleBatch> batches,
                                 std::optional<std::span<const Moments>> moments = {},
                                 const BarycenterOptions& options = {});

CombineResult combine(CombineMethod method, std::span<const SampleBatch> batches,
                      std::optional<std::span<const Moments>> moments = {});

/// Mean squared distance moved by the points under x ↦ A x:
///   (1/J) Σ_j ‖x_j − A x_j‖².
double displacement(const Matrix& map_matrix, const Matrix& points);

}  // namespace swiss
