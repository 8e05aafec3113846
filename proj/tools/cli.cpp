#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "swiss/error.hpp"
#include "swiss/experiment.hpp"
#include "swiss/io.hpp"

namespace swiss::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string out;
  int workers = 1;
  std::uint64_t seed = 1;
};

struct SimulateOptions {
  std::string target = "logistic-rare";
  long n = 20000;
  int dim = 5;
  int batches = 5;
  int samples = 5000;
  long reference_samples = 0;
};

struct PartitionOptions {
  std::string data;
  int batches = 5;
  std::string scheme = "random-equal";
};

struct SampleOptions {
  std::string target = "logistic-rare";
  std::string data;
  std::string partition;
  std::string convention = "sub-posterior";
  int batches = 5;
  int samples = 5000;
  int burn_in = 1000;
  int thin = 1;
  std::string init = "prior-draw";
  double prior_variance = kLogisticPriorVariance;
};

struct CombineOptions {
  std::string method = "swiss";
  std::vector<std::string> inputs;
  std::string maps;
};

struct EvaluateOptions {
  std::string approx;
  std::string reference;
};

struct ExperimentOptions {
  std::string config;
};

struct BenchOptions {
  std::vector<int> dims{5, 10, 20, 40, 80};
  int batches = 10;
  int samples = 5000;
  long reference_samples = 0;
  int repetitions = 1;
  std::vector<std::string> methods;
  std::string moments = "estimated";
};

fs::path batch_path(const fs::path& dir, int b) {
  return dir / ("batch_" + std::to_string(b) + ".csv");
}

void require_out(const CommonOptions& c, const char* what) {
  if (c.out.empty()) throw InvalidArgumentError(std::string(what) + " needs --out");
}

int do_simulate(const SimulateOptions& o, const CommonOptions& c, std::ostream& out) {
  require_out(c, "simulate");
  if (o.target == "logistic-rare") {
    if (o.n < 1) throw InvalidArgumentError("--n must be >= 1");
    io::write_dataset_csv(c.out, simulate_rare_feature_data(o.n, c.seed));
    out << "wrote " << o.n << " rows to " << c.out << "\n";
    return kExitOk;
  }
  if (o.target != "gaussian-conjugate")
    throw InvalidArgumentError("simulate supports logistic-rare and gaussian-conjugate, not '" +
                               o.target + "'");
  if (o.dim < 1 || o.batches < 1 || o.samples < 2)
    throw InvalidArgumentError("--dim, --batches and --samples must be positive");
  const GaussianSuiteRun g =
      prepare_gaussian_suite(o.dim, o.batches, o.samples, o.reference_samples, c.seed, 0);
  const fs::path dir(c.out);
  fs::create_directories(dir / "inflated");
  fs::create_directories(dir / "sub-posterior");
  for (int b = 0; b < o.batches; ++b) {
    io::write_batch(batch_path(dir / "inflated", b), g.inflated[static_cast<std::size_t>(b)]);
    io::write_batch(batch_path(dir / "sub-posterior", b),
                    g.sub_posterior[static_cast<std::size_t>(b)]);
  }
  io::write_samples_csv(dir / "reference.csv", g.reference);
  out << "wrote " << o.batches << " inflated and sub-posterior batches and "
      << g.reference.rows() << " reference draws to " << dir.string() << "\n";
  return kExitOk;
}

int do_partition(const PartitionOptions& o, const CommonOptions& c, std::ostream& out) {
  require_out(c, "partition");
  const Dataset data = io::read_dataset_csv(o.data);
  const Partition p = partition(data, o.batches, parse_partition_scheme(o.scheme), c.seed);
  io::write_partition_csv(c.out, p);
  out << "batch sizes:";
  for (Eigen::Index s : p.sizes()) out << ' ' << s;
  out << "\n";
  return kExitOk;
}

int do_sample(const SampleOptions& o, const CommonOptions& c, std::ostream& out,
              std::ostream& err) {
  require_out(c, "sample");
  const Convention conv = parse_convention(o.convention);
  TargetSpec spec;
  spec.name = o.target;
  spec.prior_variance = o.prior_variance;

  std::optional<Dataset> data;
  std::optional<Partition> part;
  if (o.target == "logistic-rare") {
    if (o.data.empty()) throw InvalidArgumentError("logistic-rare needs --data");
    data = io::read_dataset_csv(o.data);
    if (conv != Convention::Full) {
      part = o.partition.empty()
                 ? partition(*data, o.batches, PartitionScheme::RandomEqual, c.seed)
                 : io::read_partition_csv(o.partition);
      if (static_cast<Eigen::Index>(part->assignment.size()) != data->n())
        throw DataError("partition has " + std::to_string(part->assignment.size()) +
                        " rows, dataset has " + std::to_string(data->n()));
    }
  }
  const int chains = conv == Convention::Full ? 1 : o.batches;
  SamplerConfig sc;
  sc.n_samples = o.samples;
  sc.burn_in = o.burn_in;
  sc.thin = o.thin;
  sc.init = parse_init_strategy(o.init);
  sc.seed = c.seed;
  const TargetFamily family = make_target_family(spec, o.batches, conv, data ? &*data : nullptr,
                                                 part ? &*part : nullptr);
  std::vector<SamplerOutput> outs = sample_all_batches(family, chains, sc, c.workers);

  const fs::path dir(c.out);
  fs::create_directories(dir);
  for (SamplerOutput& s : outs) {
    s.batch.meta.num_batches = o.batches;
    io::write_batch(batch_path(dir, s.batch.batch_id), s.batch, s.diagnostics);
    out << "batch " << s.batch.batch_id << ": acceptance " << std::fixed << std::setprecision(3)
        << s.diagnostics.acceptance_rate << "\n";
    if (s.diagnostics.warning)
      err << "warning: batch " << s.batch.batch_id << ": " << *s.diagnostics.warning << "\n";
  }
  return kExitOk;
}

// Batches written by `sample` carry their exponents; a mismatch with what the
// combiner expects is reported but not fatal.
void check_conventions(const std::vector<SampleBatch>& batches,
                       const std::vector<bool>& has_meta, CombineMethod method,
                       std::ostream& err) {
  const Convention want = convention_for(method);
  const Exponents e = exponents_for(want, static_cast<int>(batches.size()));
  for (std::size_t i = 0; i < batches.size(); ++i) {
    if (!has_meta[i]) continue;
    const BatchMeta& m = batches[i].meta;
    if (std::abs(m.inflation_exponent - e.likelihood_power) > 1e-12 ||
        std::abs(m.prior_exponent - e.prior_power) > 1e-12)
      err << "warning: batch " << batches[i].batch_id << " has exponents (prior "
          << m.prior_exponent << ", likelihood " << m.inflation_exponent << "); "
          << to_string(method) << " expects " << to_string(want) << " batches\n";
  }
}

int do_combine(const CombineOptions& o, const CommonOptions& c, std::ostream& out,
               std::ostream& err) {
  require_out(c, "combine");
  const CombineMethod method = parse_combine_method(o.method);
  std::vector<SampleBatch> batches;
  std::vector<bool> has_meta;
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    const fs::path p(o.inputs[i]);
    has_meta.push_back(fs::exists(io::meta_path_for(p)));
    batches.push_back(io::read_batch(p, static_cast<int>(i)));
  }
  check_conventions(batches, has_meta, method, err);
  const CombineResult res = combine(method, batches);
  io::write_samples_csv(c.out, res.combined);
  if (!o.maps.empty()) io::write_text(o.maps, io::maps_to_json(res, method));
  out << to_string(method) << ": " << res.combined.rows() << " draws from " << batches.size()
      << " batches\n";
  return kExitOk;
}

int do_evaluate(const EvaluateOptions& o, const CommonOptions& c, std::ostream& out) {
  const Matrix approx = io::read_samples_csv(o.approx);
  const Matrix reference = io::read_samples_csv(o.reference);
  const std::string report = io::metrics_to_json(evaluate_metrics(approx, reference));
  if (c.out.empty())
    out << report;
  else
    io::write_text(c.out, report);
  return kExitOk;
}

void print_aggregates(const ExperimentReport& r, std::ostream& out) {
  out << std::left << std::setw(12) << "method" << std::right << std::setw(6) << "runs"
      << std::setw(22) << "mahalanobis" << std::setw(22) << "skew_dev" << std::setw(22)
      << "iad" << "\n";
  auto cell = [&](const MeanAndError& m) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << m.mean << " +- " << m.standard_error;
    out << std::setw(22) << s.str();
  };
  for (const CombinerAggregate& a : r.aggregates) {
    out << std::left << std::setw(12) << to_string(a.method) << std::right << std::setw(6)
        << a.runs;
    cell(a.mahalanobis);
    cell(a.skew_dev);
    cell(a.iad);
    out << "\n";
  }
}

int do_experiment(const ExperimentOptions& o, CommonOptions c, const CLI::App& sub,
                  std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = parse_experiment_config(io::read_text(o.config));
  if (sub.count("--workers")) cfg.workers = c.workers;
  if (sub.count("--seed")) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (cfg.output_dir.empty()) throw InvalidArgumentError("experiment needs --out or output_dir");

  const ExperimentReport report = run_experiment(cfg);
  fs::create_directories(cfg.output_dir);
  write_experiment_outputs(report, cfg.output_dir);
  print_aggregates(report, out);

  int code = kExitOk;
  for (const RunReport& run : report.runs) {
    for (const ChainSummary& ch : run.chains)
      if (ch.warning)
        err << "warning: repetition " << run.repetition << " " << ch.role << " batch "
            << ch.batch_id << ": " << *ch.warning << "\n";
    if (run.error) {
      err << "error: " << *run.error << "\n";
      code = std::max(code, run.error_numerical ? kExitNumerical : kExitUsage);
    }
  }
  return code;
}

int do_bench(const BenchOptions& o, const CommonOptions& c, std::ostream& out) {
  BenchConfig cfg;
  cfg.dims = o.dims;
  cfg.batches = o.batches;
  cfg.samples = o.samples;
  cfg.reference_samples = o.reference_samples;
  cfg.repetitions = o.repetitions;
  cfg.moments = parse_moment_source(o.moments);
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  if (!o.methods.empty()) {
    cfg.combiners.clear();
    for (const std::string& m : o.methods) cfg.combiners.push_back(parse_combine_method(m));
  }
  const std::string csv = bench_to_csv(bench_dimension_scaling(cfg));
  if (c.out.empty())
    out << csv;
  else
    io::write_text(c.out, csv);
  return kExitOk;
}

void add_common(CLI::App* sub, CommonOptions& c, bool out_required_hint = true) {
  sub->add_option("--out", c.out, out_required_hint ? "Output path" : "Output path (optional)");
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Master seed");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Combine batch posterior samples and score the result"};
  app.name("swiss");
  app.require_subcommand(1);

  CommonOptions common;

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a dataset or exact Gaussian batches");
  simulate->add_option("--target", sim.target, "logistic-rare or gaussian-conjugate");
  simulate->add_option("--n", sim.n, "Rows for logistic-rare");
  simulate->add_option("--dim", sim.dim, "Dimension for gaussian-conjugate");
  simulate->add_option("--batches", sim.batches, "Batches for gaussian-conjugate");
  simulate->add_option("--samples", sim.samples, "Draws per batch");
  simulate->add_option("--reference-samples", sim.reference_samples,
                       "Reference draws (default batches*samples)");
  add_common(simulate, common);

  PartitionOptions part;
  CLI::App* partition_cmd = app.add_subcommand("partition", "Split a dataset into batches");
  partition_cmd->add_option("--data", part.data, "Dataset CSV")->required();
  partition_cmd->add_option("--batches", part.batches, "Number of batches");
  partition_cmd->add_option("--scheme", part.scheme, "random-equal or by-group");
  add_common(partition_cmd, common);

  SampleOptions smp;
  CLI::App* sample_cmd = app.add_subcommand("sample", "Run one sampler chain per batch");
  sample_cmd->add_option("--target", smp.target,
                         "logistic-rare, rare-bernoulli, warped-gaussian or gaussian-mixture");
  sample_cmd->add_option("--data", smp.data, "Dataset CSV (logistic-rare)");
  sample_cmd->add_option("--partition", smp.partition, "Partition CSV (logistic-rare)");
  sample_cmd->add_option("--convention", smp.convention, "full, sub-posterior or inflated");
  sample_cmd->add_option("--batches", smp.batches, "Number of batches");
  sample_cmd->add_option("--samples", smp.samples, "Kept draws per chain");
  sample_cmd->add_option("--burn-in", smp.burn_in, "Adaptive burn-in iterations");
  sample_cmd->add_option("--thin", smp.thin, "Thinning interval");
  sample_cmd->add_option("--init", smp.init, "prior-draw, mode or fixed");
  sample_cmd->add_option("--prior-variance", smp.prior_variance, "Logistic prior variance");
  add_common(sample_cmd, common);

  CombineOptions cmb;
  CLI::App* combine_cmd = app.add_subcommand("combine", "Merge batch samples");
  combine_cmd->add_option("--method", cmb.method, "swiss, consensus, ar or barycenter");
  combine_cmd->add_option("batches", cmb.inputs, "Batch CSV files")->required();
  combine_cmd->add_option("--maps", cmb.maps, "Write per-batch affine maps as JSON");
  add_common(combine_cmd, common);

  EvaluateOptions ev;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Score a sample against a reference");
  evaluate_cmd->add_option("--approx", ev.approx, "Approximate sample CSV")->required();
  evaluate_cmd->add_option("--reference", ev.reference, "Reference sample CSV")->required();
  add_common(evaluate_cmd, common, false);

  ExperimentOptions ex;
  CLI::App* experiment_cmd = app.add_subcommand("experiment", "Run a configured experiment");
  experiment_cmd->add_option("--config", ex.config, "Experiment JSON")->required();
  add_common(experiment_cmd, common);

  BenchOptions bn;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Gaussian dimension-scaling sweep");
  bench_cmd->add_option("--dims", bn.dims, "Dimensions")->delimiter(',');
  bench_cmd->add_option("--batches", bn.batches, "Number of batches");
  bench_cmd->add_option("--samples", bn.samples, "Draws per batch");
  bench_cmd->add_option("--reference-samples", bn.reference_samples, "Reference draws");
  bench_cmd->add_option("--repetitions", bn.repetitions, "Repetitions per dimension");
  bench_cmd->add_option("--methods", bn.methods, "Combiners")->delimiter(',');
  bench_cmd->add_option("--moments", bn.moments,
                        "estimated (from the draws) or analytic (injected suite moments)");
  add_common(bench_cmd, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return do_simulate(sim, common, out);
    if (*partition_cmd) return do_partition(part, common, out);
    if (*sample_cmd) return do_sample(smp, common, out, err);
    if (*combine_cmd) return do_combine(cmb, common, out, err);
    if (*evaluate_cmd) return do_evaluate(ev, common, out);
    if (*experiment_cmd) return do_experiment(ex, common, *experiment_cmd, out, err);
    if (*bench_cmd) return do_bench(bn, common, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_numerical() ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace swiss::cli
