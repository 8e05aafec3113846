#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "swiss/combiners.hpp"
#include "swiss/error.hpp"
#include "swiss/targets.hpp"

using namespace swiss;
using swiss::test::random_orthogonal;
using swiss::test::random_spd;
using swiss::test::rel_diff;

namespace {

SampleBatch make_batch(int id, Matrix draws) {
  SampleBatch b;
  b.batch_id = id;
  b.draws = std::move(draws);
  return b;
}

// Batches whose sample moments equal the given moments exactly.
std::vector<SampleBatch> matched_batches(const std::vector<Moments>& ms, Eigen::Index j,
                                         std::uint64_t seed) {
  std::vector<SampleBatch> out;
  for (std::size_t b = 0; b < ms.size(); ++b) {
    RngStream rng(seed, b);
    out.push_back(make_batch(static_cast<int>(b), draw_gaussian_matched(ms[b], j, rng)));
  }
  return out;
}

std::vector<Moments> random_moments(int d, int batches, RngStream& rng, double spread = 20.0) {
  std::vector<Moments> ms;
  for (int b = 0; b < batches; ++b) ms.emplace_back(rng.normal_vector(d), random_spd(d, rng, spread));
  return ms;
}

Matrix block(const CombineResult& r, Eigen::Index start, Eigen::Index rows) {
  return r.combined.middleRows(start, rows);
}

}  // namespace

TEST_SUITE("method names") {
  TEST_CASE("round trip") {
    for (CombineMethod m : {CombineMethod::Swiss, CombineMethod::Consensus,
                            CombineMethod::AverageRecentring, CombineMethod::Barycenter})
      CHECK(parse_combine_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_combine_method("skde"), InvalidArgumentError);
    CHECK(uses_inflated_batches(CombineMethod::Swiss));
    CHECK_FALSE(uses_inflated_batches(CombineMethod::Consensus));
  }
}

TEST_SUITE("swiss_combine") {
  TEST_CASE("identical batch moments give identity maps and concatenated output") {
    RngStream rng(1, 0);
    const Moments m(rng.normal_vector(3), random_spd(3, rng));
    const std::vector<SampleBatch> bs = matched_batches({m, m, m}, 200, 5);
    const CombineResult r = swiss_combine(bs);
    for (const AffineMap& a : r.per_batch_maps) CHECK(rel_diff(a.matrix, Matrix::Identity(3, 3)) < 1e-9);
    for (int b = 0; b < 3; ++b) CHECK(rel_diff(block(r, 200 * b, 200), bs[b].draws) < 1e-9);
  }

  TEST_CASE("scalar batches with V = 1 and 4") {
    const std::vector<SampleBatch> bs{make_batch(0, Matrix::Constant(3, 1, 1.0)),
                                      make_batch(1, Matrix::Constant(3, 1, 0.0))};
    const std::vector<Moments> ms{Moments(Vector{{0.0}}, SymmetricMatrix::diagonal(Vector{{1.0}})),
                                  Moments(Vector{{0.0}}, SymmetricMatrix::diagonal(Vector{{4.0}}))};
    const CombineResult r = swiss_combine(bs, ms);
    CHECK(r.pooled.cov(0, 0) == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(r.per_batch_maps[0].matrix(0, 0) == doctest::Approx(std::sqrt(1.6)).epsilon(1e-14));
    CHECK(r.per_batch_maps[1].matrix(0, 0) == doctest::Approx(std::sqrt(0.4)).epsilon(1e-14));
    CHECK(r.combined(0, 0) == doctest::Approx(1.2649110640673518).epsilon(1e-14));
  }

  TEST_CASE("exact on moments for moment-matched Gaussian batches") {
    RngStream rng(2, 0);
    for (int d : {2, 5}) {
      const std::vector<Moments> ms = random_moments(d, 4, rng);
      const std::vector<SampleBatch> bs = matched_batches(ms, 300, 9);
      const CombineResult r = swiss_combine(bs, ms);
      const Moments pooled = pool_moments(ms);
      for (int b = 0; b < 4; ++b) {
        const Moments out = estimate_moments(Matrix(block(r, 300 * b, 300)));
        CHECK(rel_diff(out.mean, pooled.mean) < 1e-10);
        CHECK(rel_diff(out.cov.matrix(), pooled.cov.matrix()) < 1e-10);
      }
    }
  }

  TEST_CASE("every map carries its batch covariance onto the pooled one") {
    RngStream rng(3, 0);
    const std::vector<Moments> ms = random_moments(6, 5, rng, 100.0);
    const std::vector<SampleBatch> bs = matched_batches(ms, 100, 3);
    const CombineResult r = swiss_combine(bs, ms);
    for (int b = 0; b < 5; ++b) {
      const Matrix& a = r.per_batch_maps[b].matrix;
      const Matrix v = r.pooled.cov.matrix();
      CHECK(max_abs(a * ms[b].cov.matrix() * a.transpose() - v) <= 1e-6 * max_abs(v));
      CHECK(r.per_batch_maps[b].is_invertible());
    }
  }

  TEST_CASE("agrees with average re-centring when all covariances are equal") {
    RngStream rng(4, 0);
    const SymmetricMatrix v = random_spd(3, rng);
    std::vector<Moments> ms;
    for (int b = 0; b < 3; ++b) ms.emplace_back(rng.normal_vector(3), v);
    const std::vector<SampleBatch> bs = matched_batches(ms, 50, 4);
    CHECK(rel_diff(swiss_combine(bs, ms).combined, ar_combine(bs, ms).combined) < 1e-9);
  }

  TEST_CASE("batch order does not change pooled moments, maps or output") {
    RngStream rng(5, 0);
    const std::vector<Moments> ms = random_moments(3, 4, rng);
    std::vector<SampleBatch> bs;
    for (int b = 0; b < 4; ++b) bs.push_back(make_batch(b, draw_gaussian(ms[b], 40, rng)));
    const CombineResult r = swiss_combine(bs);
    std::vector<SampleBatch> perm{bs[2], bs[0], bs[3], bs[1]};
    const CombineResult q = swiss_combine(perm);
    CHECK(q.combined == r.combined);
    CHECK(q.pooled.cov.matrix() == r.pooled.cov.matrix());
    for (int b = 0; b < 4; ++b) {
      CHECK(q.per_batch_maps[b].batch_id == b);
      CHECK(q.per_batch_maps[b].matrix == r.per_batch_maps[b].matrix);
    }
  }

  TEST_CASE("output rows are ordered by batch id and count every draw") {
    RngStream rng(6, 0);
    const std::vector<Moments> ms = random_moments(2, 3, rng);
    std::vector<SampleBatch> bs{make_batch(5, draw_gaussian(ms[0], 30, rng)),
                                make_batch(1, draw_gaussian(ms[1], 20, rng)),
                                make_batch(3, draw_gaussian(ms[2], 25, rng))};
    const CombineResult r = swiss_combine(bs);
    CHECK(r.combined.rows() == 75);
    CHECK(r.per_batch_maps[0].batch_id == 1);
    CHECK(r.per_batch_maps[2].batch_id == 5);
    CHECK(rel_diff(block(r, 0, 20), r.per_batch_maps[0].apply_rows(bs[1].draws)) < 1e-15);
    CHECK(r.combined.allFinite());
  }

  TEST_CASE("failures carry the batch id") {
    RngStream rng(7, 0);
    std::vector<SampleBatch> bs{make_batch(0, rng.normal_matrix(30, 3)),
                                make_batch(4, rng.normal_matrix(3, 3))};
    try {
      swiss_combine(bs);
      FAIL("expected an exception");
    } catch (const InsufficientSamplesError& e) {
      CHECK(e.batch_id() == 4);
    }
    bs[1].draws = Matrix::Ones(30, 3);
    try {
      swiss_combine(bs);
      FAIL("expected an exception");
    } catch (const NotPositiveDefiniteError& e) {
      CHECK(e.batch_id() == 4);
    }
  }

  TEST_CASE("duplicate ids and mixed dimensions are rejected") {
    RngStream rng(8, 0);
    std::vector<SampleBatch> bs{make_batch(0, rng.normal_matrix(30, 2)),
                                make_batch(0, rng.normal_matrix(30, 2))};
    CHECK_THROWS_AS(swiss_combine(bs), InvalidArgumentError);
    bs[1] = make_batch(1, rng.normal_matrix(30, 3));
    CHECK_THROWS_AS(swiss_combine(bs), InvalidArgumentError);
  }

  TEST_CASE("single batch is a passthrough") {
    RngStream rng(9, 0);
    const std::vector<SampleBatch> bs{make_batch(0, rng.normal_matrix(40, 3))};
    for (CombineMethod m : {CombineMethod::Swiss, CombineMethod::Consensus,
                            CombineMethod::AverageRecentring, CombineMethod::Barycenter})
      CHECK(rel_diff(combine(m, bs).combined, bs[0].draws) < 1e-12);
  }
}

TEST_SUITE("consensus_combine") {
  TEST_CASE("equal weights average row by row") {
    RngStream rng(10, 0);
    const Moments m(Vector::Zero(2), SymmetricMatrix::identity(2));
    const std::vector<Moments> ms{m, m};
    const std::vector<SampleBatch> bs{make_batch(0, rng.normal_matrix(10, 2)),
                                      make_batch(1, rng.normal_matrix(10, 2))};
    const CombineResult r = consensus_combine(bs, ms);
    CHECK(rel_diff(r.combined, 0.5 * (bs[0].draws + bs[1].draws)) < 1e-14);
    CHECK(r.per_batch_maps.empty());
  }

  TEST_CASE("scalar weighted average") {
    const std::vector<SampleBatch> bs{make_batch(0, Matrix::Zero(4, 1)),
                                      make_batch(1, Matrix::Constant(4, 1, 4.0))};
    const std::vector<Moments> ms{Moments(Vector{{0.0}}, SymmetricMatrix::diagonal(Vector{{1.0}})),
                                  Moments(Vector{{4.0}}, SymmetricMatrix::diagonal(Vector{{3.0}}))};
    const CombineResult r = consensus_combine(bs, ms);
    CHECK(r.combined.rows() == 4);
    for (int j = 0; j < 4; ++j) CHECK(r.combined(j, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("matches an explicit per-draw formula") {
    RngStream rng(11, 0);
    const std::vector<Moments> ms = random_moments(3, 3, rng);
    std::vector<SampleBatch> bs;
    for (int b = 0; b < 3; ++b) bs.push_back(make_batch(b, draw_gaussian(ms[b], 20, rng)));
    const CombineResult r = consensus_combine(bs, ms);
    Matrix p = Matrix::Zero(3, 3);
    for (const Moments& m : ms) p += m.cov.matrix().inverse();
    const Matrix w = p.inverse();
    for (int j = 0; j < 20; ++j) {
      Vector acc = Vector::Zero(3);
      for (int b = 0; b < 3; ++b) acc += ms[b].cov.matrix().inverse() * bs[b].draws.row(j).transpose();
      CHECK(rel_diff(r.combined.row(j).transpose(), w * acc) < 1e-10);
    }
  }

  TEST_CASE("unequal draw counts are rejected") {
    RngStream rng(12, 0);
    const std::vector<SampleBatch> bs{make_batch(0, rng.normal_matrix(10, 1)),
                                      make_batch(1, rng.normal_matrix(11, 1))};
    CHECK_THROWS_AS(consensus_combine(bs), InvalidArgumentError);
  }
}

TEST_SUITE("ar_combine") {
  TEST_CASE("maps only shift, onto the average batch mean") {
    RngStream rng(13, 0);
    const std::vector<Moments> ms = random_moments(2, 3, rng);
    std::vector<SampleBatch> bs;
    for (int b = 0; b < 3; ++b) bs.push_back(make_batch(b, draw_gaussian(ms[b], 30, rng)));
    const CombineResult r = ar_combine(bs, ms);
    const Vector center = (ms[0].mean + ms[1].mean + ms[2].mean) / 3.0;
    CHECK(rel_diff(r.pooled.mean, center) < 1e-14);
    CHECK(rel_diff(r.pooled.cov.matrix(), pool_moments(ms).cov.matrix()) < 1e-14);
    for (int b = 0; b < 3; ++b) {
      CHECK(r.per_batch_maps[b].matrix == Matrix::Identity(2, 2));
      CHECK(rel_diff(r.per_batch_maps[b].center_out, center) < 1e-14);
      const Matrix expected = bs[b].draws.rowwise() + (center - ms[b].mean).transpose();
      CHECK(rel_diff(block(r, 30 * b, 30), expected) < 1e-12);
    }
  }

  TEST_CASE("combined mean is the average batch mean when sample means are used") {
    RngStream rng(16, 0);
    const std::vector<Moments> ms = random_moments(3, 4, rng);
    std::vector<SampleBatch> bs;
    Vector center = Vector::Zero(3);
    for (int b = 0; b < 4; ++b) {
      bs.push_back(make_batch(b, draw_gaussian(ms[b], 50, rng)));
      center += bs.back().draws.colwise().mean().transpose() / 4.0;
    }
    const Matrix out = ar_combine(bs).combined;
    CHECK(rel_diff(out.colwise().mean().transpose(), center) < 1e-12);
  }

  TEST_CASE("no scale correction: a wide batch stays wide") {
    RngStream rng(17, 0);
    const Moments narrow(Vector{{0.0}}, SymmetricMatrix::diagonal(Vector{{1.0}}));
    const Moments wide(Vector{{0.0}}, SymmetricMatrix::diagonal(Vector{{4.0}}));
    const std::vector<SampleBatch> bs = matched_batches({narrow, wide}, 400, 18);
    const CombineResult r = ar_combine(bs);
    CHECK(estimate_moments(block(r, 400, 400)).cov(0, 0) == doctest::Approx(4.0).epsilon(1e-10));
  }

  TEST_CASE("identical moments give pure concatenation") {
    RngStream rng(14, 0);
    const Moments m(rng.normal_vector(2), random_spd(2, rng));
    const std::vector<SampleBatch> bs = matched_batches({m, m}, 25, 2);
    const CombineResult r = ar_combine(bs);
    CHECK(rel_diff(block(r, 0, 25), bs[0].draws) < 1e-12);
    CHECK(rel_diff(block(r, 25, 25), bs[1].draws) < 1e-12);
  }
}

TEST_SUITE("gaussian barycenter") {
  TEST_CASE("equal covariances are a fixed point") {
    RngStream rng(15, 0);
    const SymmetricMatrix v = random_spd(3, rng);
    const std::vector<Moments> ms{Moments(Vector{{0.0, 1.0, 2.0}}, v),
                                  Moments(Vector{{2.0, 1.0, 0.0}}, v)};
    const GaussianBarycenter g = gaussian_barycenter(ms);
    CHECK(g.iterations == 1);
    CHECK(rel_diff(g.moments.cov.matrix(), v.matrix()) < 1e-10);
    CHECK(rel_diff(g.moments.mean, Vector{{1.0, 1.0, 1.0}}) < 1e-15);
  }

  TEST_CASE("1-D barycenter is the squared mean of standard deviations") {
    const std::vector<Moments> ms{Moments(Vector{{0.0}}, SymmetricMatrix::diagonal(Vector{{1.0}})),
                                  Moments(Vector{{0.0}}, SymmetricMatrix::diagonal(Vector{{4.0}})),
                                  Moments(Vector{{3.0}}, SymmetricMatrix::diagonal(Vector{{9.0}}))};
    const GaussianBarycenter g = gaussian_barycenter(ms);
    CHECK(g.moments.cov(0, 0) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(g.moments.mean(0) == doctest::Approx(1.0));
  }

  TEST_CASE("result satisfies the barycenter equation") {
    RngStream rng(16, 0);
    const std::vector<Moments> ms = random_moments(4, 5, rng, 50.0);
    const GaussianBarycenter g = gaussian_barycenter(ms);
    const Matrix s = g.moments.cov.matrix();
    const Matrix root = spsq(g.moments.cov).matrix();
    Matrix avg = Matrix::Zero(4, 4);
    for (const Moments& m : ms) avg += spsq(SymmetricMatrix(root * m.cov.matrix() * root)).matrix() / 5.0;
    CHECK(rel_diff(avg, s) < 1e-8);
  }

  TEST_CASE("commuting covariances have a closed form") {
    const std::vector<Moments> ms{Moments(Vector::Zero(2), SymmetricMatrix::diagonal(Vector{{1.0, 16.0}})),
                                  Moments(Vector::Zero(2), SymmetricMatrix::diagonal(Vector{{9.0, 4.0}}))};
    const GaussianBarycenter g = gaussian_barycenter(ms);
    CHECK(rel_diff(g.moments.cov.matrix(), Vector{{4.0, 9.0}}.asDiagonal().toDenseMatrix()) < 1e-9);
  }

  TEST_CASE("single batch passes through") {
    const std::vector<Moments> ms{Moments(Vector{{1.0}}, SymmetricMatrix::diagonal(Vector{{2.0}}))};
    const GaussianBarycenter g = gaussian_barycenter(ms);
    CHECK(g.moments.cov(0, 0) == 2.0);
    CHECK(g.iterations == 0);
  }

  TEST_CASE("iteration cap raises a convergence error") {
    RngStream rng(17, 0);
    const std::vector<Moments> ms = random_moments(4, 3, rng, 1000.0);
    CHECK_THROWS_AS(gaussian_barycenter(ms, BarycenterOptions{1, 1e-300}), ConvergenceError);
  }

  TEST_CASE("combined maps target the barycenter") {
    RngStream rng(18, 0);
    const std::vector<Moments> ms = random_moments(3, 4, rng);
    const std::vector<SampleBatch> bs = matched_batches(ms, 60, 8);
    const CombineResult r = barycenter_combine(bs, ms);
    const Matrix s = gaussian_barycenter(ms).moments.cov.matrix();
    for (int b = 0; b < 4; ++b) {
      const Matrix& a = r.per_batch_maps[b].matrix;
      CHECK(max_abs(a * ms[b].cov.matrix() * a.transpose() - s) <= 1e-6 * max_abs(s));
    }
  }
}

TEST_SUITE("displacement") {
  TEST_CASE("identity moves nothing") {
    RngStream rng(19, 0);
    CHECK(displacement(Matrix::Identity(3, 3), rng.normal_matrix(10, 3)) == 0.0);
  }

  TEST_CASE("2I on the unit vectors") {
    Matrix pts(2, 2);
    pts << 1, 0, 0, 1;
    CHECK(displacement(2.0 * Matrix::Identity(2, 2), pts) == doctest::Approx(1.0));
  }

  TEST_CASE("symmetric whitening root beats other whitening maps") {
    RngStream rng(20, 0);
    for (int d : {2, 5}) {
      const SymmetricMatrix v = random_spd(d, rng);
      const Matrix pts = draw_gaussian(Moments(Vector::Zero(d), v), 20000, rng);
      const Matrix m_inv = spsq_with_inverse(v).inverse_root.matrix();
      const double best = displacement(m_inv, pts);
      const Matrix chol_inv = cholesky(v).inverse();
      CHECK(best <= displacement(chol_inv, pts) + 1e-6);
      CHECK(best <= displacement(random_orthogonal(d, rng) * m_inv, pts) + 1e-6);
    }
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(displacement(Matrix::Identity(2, 2), Matrix::Zero(3, 3)), InvalidArgumentError);
  }
}

TEST_SUITE("AffineMap") {
  TEST_CASE("apply and invertibility") {
    AffineMap a{0, 2.0 * Matrix::Identity(2, 2), Vector{{1.0, 1.0}}, Vector{{0.0, 5.0}}};
    CHECK(rel_diff(a.apply(Vector{{2.0, 3.0}}), Vector{{2.0, 9.0}}) < 1e-15);
    CHECK(a.is_invertible());
    a.matrix(1, 1) = 0.0;
    CHECK_FALSE(a.is_invertible());
  }
}
