#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace swiss {

/// splitmix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for repetition `rep` and stream `stream` under `master`:
///   mix64(mix64(mix64(master) ^ (rep + 0x9e3779b97f4a7c15)) ^ (stream + 0xbf58476d1ce4e5b9))
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep,
                          std::uint64_t stream) noexcept;

/// A reproducible random stream identified by (master_seed, stream_id).
///
/// Not thread safe; each chain or generator owns its own stream.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double uniform();  // [0, 1)
  double normal();
  double gamma(double shape, double scale);
  double chi_squared(double df) { return gamma(0.5 * df, 2.0); }
  bool bernoulli(double p) { return uniform() < p; }

  Eigen::VectorXd normal_vector(Eigen::Index d);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace swiss
