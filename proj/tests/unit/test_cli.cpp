#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "helpers.hpp"
#include "swiss/io.hpp"

using namespace swiss;
using swiss::test::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "swiss");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string str(const std::filesystem::path& p) { return p.string(); }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"combine", "--method", "swiss"}).code == cli::kExitUsage);
  CHECK(run({"evaluate", "--approx", "a.csv"}).code == cli::kExitUsage);
}

TEST_CASE("unknown method and missing files exit 1") {
  TempDir dir("cli");
  io::write_samples_csv(dir / "a.csv", Matrix::Random(10, 2));
  const Result r = run({"combine", "--method", "median", "--out", str(dir / "o.csv"), str(dir / "a.csv")});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("median") != std::string::npos);
  CHECK(run({"evaluate", "--approx", "/missing.csv", "--reference", "/missing.csv"}).code ==
        cli::kExitUsage);
}

TEST_CASE("malformed CSV is a usage error naming the line") {
  TempDir dir("cli");
  io::write_text(dir / "bad.csv", "param_0\n1\nx\n");
  const Result r = run({"evaluate", "--approx", str(dir / "bad.csv"), "--reference", str(dir / "bad.csv")});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find(":3") != std::string::npos);
}

TEST_CASE("singular batch covariance exits 2") {
  TempDir dir("cli");
  Matrix degenerate(20, 2);
  for (int i = 0; i < 20; ++i) degenerate.row(i) << i, 2.0 * i;
  io::write_samples_csv(dir / "a.csv", degenerate);
  io::write_samples_csv(dir / "b.csv", Matrix::Random(20, 2));
  const Result r = run({"combine", "--method", "swiss", "--out", str(dir / "o.csv"),
                        str(dir / "a.csv"), str(dir / "b.csv")});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.err.find("batch 0") != std::string::npos);
}

TEST_CASE("combining batches with identical draws returns their concatenation") {
  TempDir dir("cli");
  RngStream rng(1, 0);
  const Matrix draws = rng.normal_matrix(200, 3);
  io::write_samples_csv(dir / "a.csv", draws);
  io::write_samples_csv(dir / "b.csv", draws);
  for (const char* method : {"swiss", "ar", "barycenter"}) {
    const Result r = run({"combine", "--method", method, "--out", str(dir / "o.csv"),
                          "--maps", str(dir / "maps.json"), str(dir / "a.csv"), str(dir / "b.csv")});
    REQUIRE(r.code == cli::kExitOk);
    const Matrix combined = io::read_samples_csv(dir / "o.csv");
    REQUIRE(combined.rows() == 400);
    CHECK((combined.topRows(200) - draws).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((combined.bottomRows(200) - draws).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(io::read_text(dir / "maps.json").find("\"center_in\"") != std::string::npos);
  }
}

TEST_CASE("evaluating a sample against itself gives zeros") {
  TempDir dir("cli");
  io::write_samples_csv(dir / "a.csv", RngStream(2, 0).normal_matrix(500, 2));
  const Result r = run({"evaluate", "--approx", str(dir / "a.csv"), "--reference", str(dir / "a.csv")});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("\"iad\": 0.0") != std::string::npos);
  CHECK(r.out.find("\"mahalanobis\": 0.0") != std::string::npos);
}

TEST_CASE("simulate, partition, sample, combine, evaluate") {
  TempDir dir("cli");
  REQUIRE(run({"simulate", "--target", "logistic-rare", "--n", "3000", "--out", str(dir / "data.csv")}).code == 0);
  CHECK(io::read_dataset_csv(dir / "data.csv").n() == 3000);

  const Result p = run({"partition", "--data", str(dir / "data.csv"), "--batches", "3", "--out", str(dir / "part.csv")});
  REQUIRE(p.code == 0);
  CHECK(p.out.find("1000 1000 1000") != std::string::npos);

  for (const char* conv : {"inflated", "sub-posterior"}) {
    const Result s = run({"sample", "--target", "logistic-rare", "--data", str(dir / "data.csv"),
                          "--partition", str(dir / "part.csv"), "--convention", conv,
                          "--batches", "3", "--samples", "300", "--burn-in", "300", "--init", "mode",
                          "--workers", "2", "--out", str(dir / conv)});
    REQUIRE(s.code == 0);
    for (int b = 0; b < 3; ++b) {
      const std::filesystem::path f = dir / conv / ("batch_" + std::to_string(b) + ".csv");
      CHECK(io::read_samples_csv(f).rows() == 300);
      CHECK(std::filesystem::exists(io::meta_path_for(f)));
    }
  }
  const std::vector<std::string> inflated{str(dir / "inflated/batch_0.csv"), str(dir / "inflated/batch_1.csv"),
                                          str(dir / "inflated/batch_2.csv")};
  std::vector<std::string> args{"combine", "--method", "swiss", "--out", str(dir / "swiss.csv")};
  args.insert(args.end(), inflated.begin(), inflated.end());
  const Result c = run(args);
  REQUIRE(c.code == 0);
  CHECK(c.err.empty());
  CHECK(io::read_samples_csv(dir / "swiss.csv").rows() == 900);

  // Inflated batches handed to consensus draw a warning but still combine.
  args[2] = "consensus";
  const Result w = run(args);
  CHECK(w.code == 0);
  CHECK(w.err.find("warning") != std::string::npos);

  const Result e = run({"evaluate", "--approx", str(dir / "swiss.csv"), "--reference",
                        str(dir / "swiss.csv"), "--out", str(dir / "m.json")});
  CHECK(e.code == 0);
  CHECK(std::filesystem::exists(dir / "m.json"));
}

TEST_CASE("simulate gaussian-conjugate writes both conventions and a reference") {
  TempDir dir("cli");
  REQUIRE(run({"simulate", "--target", "gaussian-conjugate", "--dim", "3", "--batches", "4",
               "--samples", "100", "--out", str(dir.path())}).code == 0);
  CHECK(io::read_samples_csv(dir / "reference.csv").rows() == 400);
  CHECK(io::read_batch(dir / "inflated/batch_3.csv", 0).meta.inflation_exponent == 4.0);
  CHECK(io::read_batch(dir / "sub-posterior/batch_3.csv", 0).meta.prior_exponent == 0.25);
}

TEST_CASE("experiment subcommand writes reports") {
  TempDir dir("cli");
  io::write_text(dir / "c.json", R"({"target": {"name": "gaussian-conjugate", "dim": 2},
    "batches": 3, "samples": 300, "repetitions": 2})");
  const Result r = run({"experiment", "--config", str(dir / "c.json"), "--out", str(dir / "run")});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "run/report.json"));
  CHECK(r.out.find("swiss") != std::string::npos);
}

TEST_CASE("bench subcommand prints CSV") {
  const Result r = run({"bench", "--dims", "2,3", "--batches", "2", "--samples", "100", "--methods", "swiss,ar"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("d,method,iad,time_seconds,repetition\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);
}
