#pragma once

#include <optional>
#include <span>
#include <vector>

#include "swiss/linalg.hpp"

namespace swiss {

/// Gaussian-kernel density estimate tabulated on an even grid.
struct Kde1D {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;

  /// Trapezoid rule over the grid.
  double integral() const;
};

struct KdeOptions {
  int grid_size = 512;
  std::optional<double> bandwidth;
  /// Grid endpoints; defaults to [min − 3h, max + 3h] of the samples.
  std::optional<std::pair<double, double>> grid_range;
};

/// Silverman's rule 0.9·min(σ̂, IQR/1.34)·n^{-1/5}; falls back to σ̂ when
/// the IQR is zero. Throws DataError on zero spread.
double silverman_bandwidth(std::span<const double> samples);

/// Kernel contributions beyond 8 bandwidths (< 1e-14 relative) are skipped.
Kde1D kde_1d(std::span<const double> samples, const KdeOptions& options = {});

struct IadOptions {
  int grid_size = 512;
};

struct IadResult {
  /// (1/d) Σ_j ½∫|π̂ᵃ_j − π̂ᶠ_j|; may exceed 1 by grid error.
  double total = 0.0;
  std::vector<double> per_dimension;
};

/// Integrated absolute distance between the marginal KDEs of two sample
/// matrices. Both KDEs share one grid covering the union of the samples
/// widened by 3 of the larger bandwidth, so the result is symmetric.
IadResult iad(const Matrix& approx, const Matrix& reference,
              const IadOptions& options = {});

/// √((μ_a − μ_f)ᵀ V_f⁻¹ (μ_a − μ_f)), reference covariance only.
double mahalanobis(const Matrix& approx, const Matrix& reference);

/// (1/d) Σ_i |γ̂ᵃ_i − γ̂ᶠ_i| with γ̂ = (1/J) Σ ((x − μ)/σ)³ and σ using the
/// J − 1 divisor.
double skew_deviation(const Matrix& approx, const Matrix& reference);

/// Per-column third standardised moment as used by skew_deviation.
Vector standardized_skewness(const Matrix& samples);

struct MetricReport {
  double mahalanobis = 0.0;
  double skew_dev = 0.0;
  /// Clamped to [0, 1]; the raw total is kept in `iad_raw`.
  double iad = 0.0;
  double iad_raw = 0.0;
  std::vector<double> per_dimension_iad;
};

MetricReport evaluate_metrics(const Matrix& approx, const Matrix& reference,
                              const IadOptions& options = {});

}  // namespace swiss
