#include "swiss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "swiss/error.hpp"
#include "swiss/moments.hpp"

namespace swiss {

namespace {

constexpr double kKernelCutoff = 8.0;

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double sample_sd(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

void check_samples(std::span<const double> samples) {
  if (samples.size() < 2)
    throw InvalidArgumentError("kde needs at least 2 samples, got " +
                               std::to_string(samples.size()));
  for (double v : samples)
    if (!std::isfinite(v)) throw DataError("kde: non-finite sample");
}

std::vector<double> even_grid(double lo, double hi, int n) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = lo + step * i;
  grid.back() = hi;
  return grid;
}

// Evaluates the KDE of already-sorted samples on `grid`.
std::vector<double> evaluate_kde(const std::vector<double>& sorted,
                                 const std::vector<double>& grid, double h) {
  const double norm =
      1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  const double reach = kKernelCutoff * h;
  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    auto first = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
    auto last = std::upper_bound(first, sorted.end(), x + reach);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / h;
      sum += std::exp(-0.5 * z * z);
    }
    density[g] = sum * norm;
  }
  return density;
}

double trapezoid(const std::vector<double>& grid, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    s += 0.5 * (grid[i] - grid[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

std::vector<double> column(const Matrix& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

void check_pair(const Matrix& a, const Matrix& f, const char* what) {
  if (a.cols() != f.cols())
    throw InvalidArgumentError(std::string(what) + ": dimension mismatch (" +
                               std::to_string(a.cols()) + " vs " +
                               std::to_string(f.cols()) + ")");
  if (a.cols() < 1) throw InvalidArgumentError(std::string(what) + ": empty samples");
  if (a.rows() < 2 || f.rows() < 2)
    throw InvalidArgumentError(std::string(what) + ": need at least 2 rows");
  if (!a.allFinite() || !f.allFinite())
    throw DataError(std::string(what) + ": non-finite samples");
}

}  // namespace

double Kde1D::integral() const { return trapezoid(grid, density); }

double silverman_bandwidth(std::span<const double> samples) {
  check_samples(samples);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = sample_sd(samples);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) throw DataError("kde: samples have zero spread");
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

Kde1D kde_1d(std::span<const double> samples, const KdeOptions& options) {
  check_samples(samples);
  if (options.grid_size < 2)
    throw InvalidArgumentError("kde: grid_size must be at least 2");
  const double h = options.bandwidth ? *options.bandwidth : silverman_bandwidth(samples);
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidArgumentError("kde: bandwidth must be positive");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double lo, hi;
  if (options.grid_range) {
    std::tie(lo, hi) = *options.grid_range;
    if (!(hi > lo)) throw InvalidArgumentError("kde: empty grid range");
  } else {
    if (!(sorted.back() > sorted.front()))
      throw DataError("kde: samples have zero spread");
    lo = sorted.front() - 3.0 * h;
    hi = sorted.back() + 3.0 * h;
  }
  Kde1D out;
  out.grid = even_grid(lo, hi, options.grid_size);
  out.density = evaluate_kde(sorted, out.grid, h);
  out.bandwidth = h;
  return out;
}

IadResult iad(const Matrix& approx, const Matrix& reference, const IadOptions& options) {
  check_pair(approx, reference, "iad");
  const Eigen::Index d = approx.cols();
  IadResult out;
  out.per_dimension.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    const std::vector<double> a = column(approx, j);
    const std::vector<double> f = column(reference, j);
    const double ha = silverman_bandwidth(a);
    const double hf = silverman_bandwidth(f);
    const double pad = 3.0 * std::max(ha, hf);
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [fmin, fmax] = std::minmax_element(f.begin(), f.end());
    const std::pair<double, double> range{std::min(*amin, *fmin) - pad,
                                          std::max(*amax, *fmax) + pad};
    const Kde1D ka = kde_1d(a, {options.grid_size, ha, range});
    const Kde1D kf = kde_1d(f, {options.grid_size, hf, range});
    std::vector<double> diff(ka.grid.size());
    for (std::size_t g = 0; g < diff.size(); ++g)
      diff[g] = std::abs(ka.density[g] - kf.density[g]);
    out.per_dimension[static_cast<std::size_t>(j)] = 0.5 * trapezoid(ka.grid, diff);
  }
  double total = 0.0;
  for (double v : out.per_dimension) total += v;
  out.total = total / static_cast<double>(d);
  return out;
}

double mahalanobis(const Matrix& approx, const Matrix& reference) {
  check_pair(approx, reference, "mahalanobis");
  const Moments ref = estimate_moments(reference);
  const Vector diff = approx.colwise().mean().transpose() - ref.mean;
  const double q = diff.dot(spd_solve(ref.cov, diff));
  return std::sqrt(std::max(q, 0.0));
}

Vector standardized_skewness(const Matrix& samples) {
  const double n = static_cast<double>(samples.rows());
  Vector out(samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const double mean = samples.col(j).mean();
    const Eigen::ArrayXd centered = samples.col(j).array() - mean;
    const double sd = std::sqrt(centered.square().sum() / (n - 1.0));
    if (!(sd > 0.0))
      throw DataError("skewness: column " + std::to_string(j) + " has zero variance");
    out(j) = (centered / sd).cube().sum() / n;
  }
  return out;
}

double skew_deviation(const Matrix& approx, const Matrix& reference) {
  check_pair(approx, reference, "skew_deviation");
  return (standardized_skewness(approx) - standardized_skewness(reference))
      .cwiseAbs()
      .mean();
}

MetricReport evaluate_metrics(const Matrix& approx, const Matrix& reference,
                              const IadOptions& options) {
  MetricReport r;
  r.mahalanobis = mahalanobis(approx, reference);
  r.skew_dev = skew_deviation(approx, reference);
  IadResult i = iad(approx, reference, options);
  r.iad_raw = i.total;
  r.iad = std::clamp(i.total, 0.0, 1.0);
  r.per_dimension_iad = std::move(i.per_dimension);
  return r;
}

}  // namespace swiss
