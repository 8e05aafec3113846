#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "swiss/error.hpp"
#include "swiss/io.hpp"

using namespace swiss;
using swiss::test::TempDir;

TEST_SUITE("format_double") {
  TEST_CASE("short values stay short") {
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(-3.0) == "-3");
    CHECK(io::format_double(1e-300) == "1e-300");
  }
  TEST_CASE("every value round trips") {
    RngStream rng(1, 0);
    for (int i = 0; i < 2000; ++i) {
      const double v = rng.normal() * std::pow(10.0, rng.uniform() * 40 - 20);
      CHECK(std::stod(io::format_double(v)) == v);
    }
    const double awkward = 0.1 + 0.2;
    CHECK(std::stod(io::format_double(awkward)) == awkward);
    CHECK(io::format_double(awkward).size() <= 20);
  }
}

TEST_SUITE("samples csv") {
  TEST_CASE("round trip is exact") {
    TempDir dir("io");
    RngStream rng(2, 0);
    const Matrix m = rng.normal_matrix(100, 4) * 1e3;
    io::write_samples_csv(dir / "a.csv", m);
    CHECK(io::read_samples_csv(dir / "a.csv") == m);
    CHECK(io::read_text(dir / "a.csv").rfind("param_0,param_1,param_2,param_3\n", 0) == 0);
  }

  TEST_CASE("parent directories are created") {
    TempDir dir("io");
    io::write_samples_csv(dir / "x/y/z.csv", Matrix::Ones(2, 1));
    CHECK(std::filesystem::exists(dir / "x/y/z.csv"));
  }

  TEST_CASE("bad rows report their line") {
    TempDir dir("io");
    io::write_text(dir / "ragged.csv", "param_0,param_1\n1,2\n3\n");
    try {
      io::read_samples_csv(dir / "ragged.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    io::write_text(dir / "text.csv", "param_0\n1\n2\nabc\n");
    try {
      io::read_samples_csv(dir / "text.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    io::write_text(dir / "nan.csv", "param_0\nnan\n");
    CHECK_THROWS_AS(io::read_samples_csv(dir / "nan.csv"), ParseError);
    io::write_text(dir / "header.csv", "theta,param_1\n1,2\n");
    CHECK_THROWS_AS(io::read_samples_csv(dir / "header.csv"), ParseError);
    io::write_text(dir / "empty.csv", "");
    CHECK_THROWS_AS(io::read_samples_csv(dir / "empty.csv"), ParseError);
  }

  TEST_CASE("missing file is an io error") {
    CHECK_THROWS_AS(io::read_samples_csv("/nonexistent/dir/file.csv"), IoError);
  }

  TEST_CASE("CRLF line endings are accepted") {
    TempDir dir("io");
    io::write_text(dir / "crlf.csv", "param_0,param_1\r\n1,2\r\n3,4\r\n");
    const Matrix m = io::read_samples_csv(dir / "crlf.csv");
    CHECK(m.rows() == 2);
    CHECK(m(1, 1) == 4.0);
  }
}

TEST_SUITE("batch files") {
  TEST_CASE("meta sidecar path") {
    CHECK(io::meta_path_for("out/batch_3.csv") == std::filesystem::path("out/batch_3.meta.json"));
  }

  TEST_CASE("batch round trip with meta and diagnostics") {
    TempDir dir("io");
    SampleBatch b;
    b.batch_id = 3;
    b.draws = Matrix::Random(20, 2);
    b.meta = BatchMeta{4.0, 1.0, 99, "warped-gaussian", 4};
    SamplerDiagnostics diag;
    diag.acceptance_rate = 0.25;
    diag.warning = "tuning failure";
    io::write_batch(dir / "batch_3.csv", b, diag);

    const SampleBatch r = io::read_batch(dir / "batch_3.csv", 0);
    CHECK(r.batch_id == 3);
    CHECK(r.draws == b.draws);
    CHECK(r.meta.inflation_exponent == 4.0);
    CHECK(r.meta.num_batches == 4);
    CHECK(r.meta.seed == 99);
    CHECK(r.meta.target_name == "warped-gaussian");

    const io::BatchFileMeta m = io::read_batch_meta(dir / "batch_3.meta.json");
    CHECK(m.samples == 20);
    CHECK(m.dim == 2);
  }

  TEST_CASE("without a sidecar the fallback id is used") {
    TempDir dir("io");
    io::write_samples_csv(dir / "plain.csv", Matrix::Random(5, 1));
    CHECK(io::read_batch(dir / "plain.csv", 7).batch_id == 7);
  }

  TEST_CASE("broken sidecar is a parse error") {
    TempDir dir("io");
    io::write_text(dir / "m.json", "{\"batch_id\": 1}");
    CHECK_THROWS_AS(io::read_batch_meta(dir / "m.json"), ParseError);
  }
}

TEST_SUITE("datasets and partitions") {
  TEST_CASE("dataset round trip with groups") {
    TempDir dir("io");
    Dataset d = simulate_rare_feature_data(300, 3);
    d.group = std::vector<int>(300);
    for (int i = 0; i < 300; ++i) (*d.group)[static_cast<std::size_t>(i)] = i % 4;
    io::write_dataset_csv(dir / "d.csv", d);
    const Dataset r = io::read_dataset_csv(dir / "d.csv");
    CHECK(r.x == d.x);
    CHECK(r.y == d.y);
    REQUIRE(r.group);
    CHECK(*r.group == *d.group);
  }

  TEST_CASE("dataset without groups") {
    TempDir dir("io");
    const Dataset d = simulate_rare_feature_data(50, 4);
    io::write_dataset_csv(dir / "d.csv", d);
    const Dataset r = io::read_dataset_csv(dir / "d.csv");
    CHECK(r.x == d.x);
    CHECK_FALSE(r.group);
  }

  TEST_CASE("dataset without a response column") {
    TempDir dir("io");
    io::write_text(dir / "d.csv", "x0,x1\n1,0\n");
    CHECK_THROWS_AS(io::read_dataset_csv(dir / "d.csv"), ParseError);
  }

  TEST_CASE("partition round trip and bad rows") {
    TempDir dir("io");
    const Dataset d = simulate_rare_feature_data(101, 5);
    const Partition p = partition(d, 4, PartitionScheme::RandomEqual, 6);
    io::write_partition_csv(dir / "p.csv", p);
    const Partition r = io::read_partition_csv(dir / "p.csv");
    CHECK(r.assignment == p.assignment);
    CHECK(r.num_batches == 4);

    io::write_text(dir / "bad.csv", "row,batch\n0,0\n5,1\n");
    try {
      io::read_partition_csv(dir / "bad.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
}

TEST_SUITE("json dumps") {
  TEST_CASE("metrics json carries every field") {
    MetricReport r;
    r.mahalanobis = 0.5;
    r.iad = 0.25;
    const std::string s = io::metrics_to_json(r);
    CHECK(s.find("\"mahalanobis\"") != std::string::npos);
    CHECK(s.find("\"iad\"") != std::string::npos);
    CHECK(s.find("\"skew_dev\"") != std::string::npos);
  }
}
