#include "swiss/random.hpp"

namespace swiss {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep,
                          std::uint64_t stream) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (rep + 0x9e3779b97f4a7c15ULL));
  return mix64(h ^ (stream + 0xbf58476d1ce4e5b9ULL));
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      engine_(mix64(mix64(master_seed) ^ mix64(stream_id))) {}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

double RngStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

Eigen::VectorXd RngStream::normal_vector(Eigen::Index d) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = normal();
  return v;
}

Eigen::MatrixXd RngStream::normal_matrix(Eigen::Index rows,
                                         Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill so a draw's coordinates are consecutive in the stream.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

}  // namespace swiss
