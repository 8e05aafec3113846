#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include <unistd.h>

#include <Eigen/Dense>

#include "swiss/linalg.hpp"
#include "swiss/random.hpp"

namespace swiss::test {

// Random SPD matrix with a controlled condition number.
inline SymmetricMatrix random_spd(Eigen::Index d, RngStream& rng, double spread = 10.0) {
  const Matrix g = rng.normal_matrix(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  Vector lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) lambda(i) = 1.0 + (spread - 1.0) * rng.uniform();
  return SymmetricMatrix(q * lambda.asDiagonal() * q.transpose());
}

// Haar-ish orthogonal matrix: QR of a Gaussian matrix with the sign of R's
// diagonal folded into Q.
inline Matrix random_orthogonal(Eigen::Index d, RngStream& rng) {
  const Matrix g = rng.normal_matrix(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    RngStream rng(static_cast<std::uint64_t>(std::hash<std::string>{}(tag)),
                  static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() /
            ("swiss_" + tag + "_" + std::to_string(rng.engine()()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace swiss::test
