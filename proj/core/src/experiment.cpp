#include "swiss/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "swiss/error.hpp"
#include "swiss/io.hpp"
#include "swiss/parallel.hpp"

namespace swiss {

using json = nlohmann::json;

namespace {

// Third argument of derive_seed for each consumer of randomness.
enum Stream : std::uint64_t {
  kStreamData = 0,
  kStreamPartition = 1,
  kStreamReference = 2,
  // Both conventions draw batch b from the same stream, so with B = 1 the
  // inflated and sub-posterior batches coincide.
  kStreamBatch = 3,
  kStreamSuite = 5,
};

constexpr std::uint64_t kSharedRepetition = std::numeric_limits<std::uint64_t>::max();

const std::set<std::string> kTargets{"logistic-rare", "rare-bernoulli", "warped-gaussian",
                                     "gaussian-mixture", "gaussian-conjugate"};
const std::set<std::string> kMetrics{"mahalanobis", "skew", "iad"};

bool wants(const ExperimentConfig& c, const std::string& metric) {
  return std::find(c.metrics.begin(), c.metrics.end(), metric) != c.metrics.end();
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

TargetFamily make_target_family(const TargetSpec& spec, int num_batches, Convention conv,
                                const Dataset* data, const Partition* part) {
  const Exponents use = exponents_for(conv, num_batches);
  const int replicas = conv == Convention::Full ? 1 : num_batches;
  if (spec.name == "logistic-rare") {
    if (!data) throw InvalidArgumentError("logistic-rare needs a dataset");
    std::vector<Dataset> shards;
    if (conv == Convention::Full) {
      shards.push_back(*data);
    } else {
      if (!part || part->num_batches != num_batches)
        throw InvalidArgumentError("logistic-rare needs a partition into " +
                                   std::to_string(num_batches) + " batches");
      for (const auto& rows : part->rows_by_batch()) shards.push_back(data->subset(rows));
    }
    const double pv = spec.prior_variance;
    return [shards = std::move(shards), use, pv](int b) {
      const Dataset& s = shards.at(static_cast<std::size_t>(b));
      return logistic_regression_model(s.x, s.y, use, pv);
    };
  }
  if (spec.name == "rare-bernoulli")
    return [use, replicas](int) { return rare_bernoulli_target(replicas, use); };
  if (spec.name == "warped-gaussian")
    return [use, replicas](int) { return warped_gaussian_target(replicas, use); };
  if (spec.name == "gaussian-mixture") {
    const Vector mu1 = spec.mu1, mu2 = spec.mu2;
    return [use, replicas, mu1, mu2](int) {
      return gaussian_mixture_target(replicas, use, mu1, mu2);
    };
  }
  throw InvalidArgumentError("target '" + spec.name + "' has no sampler family");
}

MomentSource parse_moment_source(std::string_view name) {
  if (name == "estimated") return MomentSource::Estimated;
  if (name == "analytic") return MomentSource::Analytic;
  throw InvalidArgumentError("unknown moment source '" + std::string(name) +
                             "' (expected estimated|analytic)");
}

std::string_view to_string(MomentSource m) {
  return m == MomentSource::Analytic ? "analytic" : "estimated";
}

Convention convention_for(CombineMethod method) {
  return uses_inflated_batches(method) ? Convention::Inflated : Convention::SubPosterior;
}

void ExperimentConfig::validate() const {
  if (!kTargets.count(target.name))
    throw InvalidArgumentError("unknown target '" + target.name + "'");
  if (batches < 1) throw InvalidArgumentError("batches must be >= 1");
  if (samples < 2) throw InvalidArgumentError("samples must be >= 2");
  if (burn_in < 0 || thin < 1 || reference_thin < 0)
    throw InvalidArgumentError("burn_in must be >= 0 and thin >= 1");
  if (repetitions < 1) throw InvalidArgumentError("repetitions must be >= 1");
  if (workers < 1) throw InvalidArgumentError("workers must be >= 1");
  if (reference_samples < 0) throw InvalidArgumentError("reference_samples must be >= 0");
  if (combiners.empty()) throw InvalidArgumentError("no combiners requested");
  for (const std::string& m : metrics)
    if (!kMetrics.count(m)) throw InvalidArgumentError("unknown metric '" + m + "'");
  if (target.name == "logistic-rare" && target.data_path.empty() && target.n < batches)
    throw InvalidArgumentError("n must be at least the number of batches");
  if (moments == MomentSource::Analytic && target.name != "gaussian-conjugate")
    throw InvalidArgumentError("analytic moments exist only for gaussian-conjugate");
  if (target.name == "gaussian-conjugate" && target.dim < 1)
    throw InvalidArgumentError("gaussian-conjugate needs dim >= 1");
  if (target.name == "gaussian-mixture" && (target.mu1.size() != 2 || target.mu2.size() != 2))
    throw InvalidArgumentError("gaussian-mixture modes must have length 2");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(json_text);
    if (j.contains("target")) {
      const json& t = j.at("target");
      if (t.is_string()) {
        c.target.name = t.get<std::string>();
      } else {
        c.target.name = t.at("name").get<std::string>();
        c.target.n = t.value("n", c.target.n);
        c.target.dim = t.value("dim", c.target.dim);
        c.target.prior_variance = t.value("prior_variance", c.target.prior_variance);
        c.target.data_path = t.value("data_path", c.target.data_path);
        if (t.contains("mu1")) c.target.mu1 = vector_from(t.at("mu1"));
        if (t.contains("mu2")) c.target.mu2 = vector_from(t.at("mu2"));
      }
    }
    c.batches = j.value("batches", c.batches);
    c.samples = j.value("samples", c.samples);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.thin = j.value("thin", c.thin);
    if (j.contains("init")) c.init = parse_init_strategy(j.at("init").get<std::string>());
    c.reference_samples = j.value("reference_samples", c.reference_samples);
    c.reference_thin = j.value("reference_thin", c.reference_thin);
    c.seed = j.value("seed", c.seed);
    c.repetitions = j.value("repetitions", c.repetitions);
    if (j.contains("partition"))
      c.partition = parse_partition_scheme(j.at("partition").get<std::string>());
    if (j.contains("combiners")) {
      c.combiners.clear();
      for (const json& m : j.at("combiners"))
        c.combiners.push_back(parse_combine_method(m.get<std::string>()));
    }
    if (j.contains("metrics")) c.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("moments")) c.moments = parse_moment_source(j.at("moments").get<std::string>());
    c.workers = j.value("workers", c.workers);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("conventions")) {
      for (const auto& [name, conv] : j.at("conventions").items()) {
        const CombineMethod m = parse_combine_method(name);
        const Convention given = parse_convention(conv.get<std::string>());
        if (given != convention_for(m))
          throw InvalidArgumentError("combiner '" + name + "' requires " +
                                     std::string(to_string(convention_for(m))) +
                                     " batches, config says " + std::string(to_string(given)));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError("config", 0, e.what());
  }
  c.validate();
  return c;
}

namespace {

json config_json(const ExperimentConfig& c) {
  json target{{"name", c.target.name}};
  if (c.target.name == "logistic-rare") {
    target["n"] = c.target.n;
    target["prior_variance"] = c.target.prior_variance;
    if (!c.target.data_path.empty()) target["data_path"] = c.target.data_path;
  } else if (c.target.name == "gaussian-conjugate") {
    target["dim"] = c.target.dim;
  } else if (c.target.name == "gaussian-mixture") {
    target["mu1"] = vector_json(c.target.mu1);
    target["mu2"] = vector_json(c.target.mu2);
  }
  json combiners = json::array();
  json conventions = json::object();
  for (CombineMethod m : c.combiners) {
    combiners.push_back(std::string(to_string(m)));
    conventions[std::string(to_string(m))] = std::string(to_string(convention_for(m)));
  }
  return json{{"target", target},
              {"batches", c.batches},
              {"samples", c.samples},
              {"burn_in", c.burn_in},
              {"thin", c.thin},
              {"init", std::string(to_string(c.init))},
              {"reference_samples", c.reference_samples},
              {"reference_thin", c.reference_thin},
              {"seed", c.seed},
              {"repetitions", c.repetitions},
              {"partition", std::string(to_string(c.partition))},
              {"combiners", combiners},
              {"conventions", conventions},
              {"metrics", c.metrics},
              {"moments", std::string(to_string(c.moments))},
              {"workers", c.workers},
              {"output_dir", c.output_dir}};
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
  return config_json(config).dump(2) + "\n";
}

bool ExperimentReport::ok() const {
  return std::none_of(runs.begin(), runs.end(), [](const RunReport& r) { return r.error.has_value(); });
}

MeanAndError mean_and_error(const std::vector<double>& values) {
  MeanAndError out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

GaussianSuiteRun prepare_gaussian_suite(int d, int batches, int samples, long reference_samples,
                                        std::uint64_t seed, int repetition) {
  const auto rep = static_cast<std::uint64_t>(repetition);
  GaussianSuiteRun run{gaussian_conjugate_suite(d, batches, derive_seed(seed, rep, kStreamSuite)),
                       Matrix{}, {}, {}};
  const long ref_n = reference_samples > 0 ? reference_samples
                                           : static_cast<long>(batches) * samples;
  RngStream ref_rng(derive_seed(seed, rep, kStreamReference), 0);
  run.reference = draw_gaussian(run.suite.full, ref_n, ref_rng);

  const std::vector<Moments> inflated = run.suite.inflated();
  for (int b = 0; b < batches; ++b) {
    const auto bu = static_cast<std::size_t>(b);
    RngStream inf_rng(derive_seed(seed, rep, kStreamBatch), bu);
    RngStream sub_rng(derive_seed(seed, rep, kStreamBatch), bu);
    SampleBatch inf{b, draw_gaussian(inflated[bu], samples, inf_rng),
                    BatchMeta{static_cast<double>(batches), 1.0, seed, "gaussian-conjugate", batches}};
    SampleBatch sub{b, draw_gaussian(run.suite.batches[bu], samples, sub_rng),
                    BatchMeta{1.0, 1.0 / batches, seed, "gaussian-conjugate", batches}};
    run.inflated.push_back(std::move(inf));
    run.sub_posterior.push_back(std::move(sub));
  }
  return run;
}

namespace {

// Batch chains, reference chain and combiner inputs for one repetition.
struct RepetitionInputs {
  Matrix reference;
  std::vector<SampleBatch> inflated;
  std::vector<SampleBatch> sub_posterior;
  std::vector<ChainSummary> chains;
  // Set only when analytic moments are injected.
  std::vector<Moments> inflated_moments;
  std::vector<Moments> sub_posterior_moments;
};

std::optional<std::span<const Moments>> injected(const std::vector<Moments>& m) {
  if (m.empty()) return std::nullopt;
  return std::span<const Moments>(m);
}

ChainSummary summarize(const std::string& role, const SamplerOutput& out) {
  return ChainSummary{role,
                      out.batch.batch_id,
                      out.diagnostics.acceptance_rate,
                      out.diagnostics.burn_in_acceptance_rate,
                      out.diagnostics.final_scale,
                      out.diagnostics.warning};
}

template <typename F>
auto in_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (Error& e) {
    e.attach_context(stage);
    throw;
  }
}

RepetitionInputs prepare_mcmc(const ExperimentConfig& c, const Dataset* data, int rep,
                              int workers) {
  const auto r = static_cast<std::uint64_t>(rep);
  RepetitionInputs in;
  std::optional<Partition> part;
  if (data) {
    part = in_stage("partition", [&] {
      return partition(*data, c.batches, c.partition, derive_seed(c.seed, r, kStreamPartition));
    });
  }

  SamplerConfig sc;
  sc.n_samples = c.samples;
  sc.burn_in = c.burn_in;
  sc.thin = c.thin;
  sc.init = c.init;

  SamplerConfig ref = sc;
  ref.n_samples = static_cast<int>(c.reference_samples > 0 ? c.reference_samples : c.samples);
  ref.thin = c.reference_thin > 0 ? c.reference_thin : c.thin;
  ref.seed = derive_seed(c.seed, r, kStreamReference);
  SamplerOutput ref_out = in_stage("reference chain", [&] {
    return sample(make_target_family(c.target, c.batches, Convention::Full, data, nullptr)(0), ref, 0, 0);
  });
  in.reference = std::move(ref_out.batch.draws);
  in.chains.push_back(summarize("reference", ref_out));

  std::set<Convention> needed;
  for (CombineMethod m : c.combiners) needed.insert(convention_for(m));
  for (Convention conv : {Convention::Inflated, Convention::SubPosterior}) {
    if (!needed.count(conv)) continue;
    SamplerConfig bc = sc;
    bc.seed = derive_seed(c.seed, r, kStreamBatch);
    const std::string role(to_string(conv));
    std::vector<SamplerOutput> outs = in_stage(role + " chains", [&] {
      return sample_all_batches(make_target_family(c.target, c.batches, conv, data, part ? &*part : nullptr),
                                c.batches, bc, workers);
    });
    auto& dest = conv == Convention::Inflated ? in.inflated : in.sub_posterior;
    for (SamplerOutput& o : outs) {
      in.chains.push_back(summarize(role, o));
      dest.push_back(std::move(o.batch));
    }
  }
  return in;
}

RunReport run_repetition(const ExperimentConfig& c, const Dataset* data, int rep, int workers) {
  RunReport report;
  report.repetition = rep;
  try {
    RepetitionInputs in;
    if (c.target.name == "gaussian-conjugate") {
      GaussianSuiteRun g = in_stage("gaussian suite", [&] {
        return prepare_gaussian_suite(c.target.dim, c.batches, c.samples, c.reference_samples,
                                      c.seed, rep);
      });
      in.reference = std::move(g.reference);
      in.inflated = std::move(g.inflated);
      in.sub_posterior = std::move(g.sub_posterior);
      if (c.moments == MomentSource::Analytic) {
        in.inflated_moments = g.suite.inflated();
        in.sub_posterior_moments = g.suite.batches;
      }
    } else {
      in = prepare_mcmc(c, data, rep, workers);
    }
    report.chains = std::move(in.chains);

    for (CombineMethod m : c.combiners) {
      const std::string stage = "combine " + std::string(to_string(m));
      const bool inflated = uses_inflated_batches(m);
      const auto& batches = inflated ? in.inflated : in.sub_posterior;
      const auto moments =
          injected(inflated ? in.inflated_moments : in.sub_posterior_moments);
      CombineResult res = in_stage(stage, [&] { return combine(m, batches, moments); });
      CombinerRun run;
      run.method = m;
      run.wall_time_seconds = res.wall_time_seconds;
      run.rows = static_cast<long>(res.combined.rows());
      in_stage("evaluate " + std::string(to_string(m)), [&] {
        if (wants(c, "mahalanobis")) run.metrics.mahalanobis = mahalanobis(res.combined, in.reference);
        if (wants(c, "skew")) run.metrics.skew_dev = skew_deviation(res.combined, in.reference);
        if (wants(c, "iad")) {
          IadResult i = iad(res.combined, in.reference);
          run.metrics.iad_raw = i.total;
          run.metrics.iad = std::clamp(i.total, 0.0, 1.0);
          run.metrics.per_dimension_iad = std::move(i.per_dimension);
        }
        return 0;
      });
      report.combiners.push_back(std::move(run));
    }
  } catch (Error& e) {
    e.attach_context("repetition " + std::to_string(rep));
    report.error = e.what();
    report.error_numerical = e.is_numerical();
    report.combiners.clear();
  }
  return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;

  std::optional<Dataset> data;
  if (config.target.name == "logistic-rare") {
    data = in_stage("data", [&] {
      return config.target.data_path.empty()
                 ? simulate_rare_feature_data(config.target.n,
                                              derive_seed(config.seed, kSharedRepetition, kStreamData))
                 : io::read_dataset_csv(config.target.data_path);
    });
  }

  // Repetitions run concurrently; with a single repetition the workers go to
  // the batch chains instead.
  const int outer = config.repetitions > 1 ? config.workers : 1;
  const int inner = config.repetitions > 1 ? 1 : config.workers;
  report.runs.resize(static_cast<std::size_t>(config.repetitions));
  parallel_for(report.runs.size(), outer, [&](std::size_t r) {
    report.runs[r] = run_repetition(config, data ? &*data : nullptr, static_cast<int>(r), inner);
  });

  for (CombineMethod m : config.combiners) {
    std::vector<double> mah, skew, iad_v, time;
    for (const RunReport& run : report.runs) {
      for (const CombinerRun& cr : run.combiners) {
        if (cr.method != m) continue;
        mah.push_back(cr.metrics.mahalanobis);
        skew.push_back(cr.metrics.skew_dev);
        iad_v.push_back(cr.metrics.iad);
        time.push_back(cr.wall_time_seconds);
      }
    }
    report.aggregates.push_back(CombinerAggregate{m, static_cast<int>(mah.size()),
                                                  mean_and_error(mah), mean_and_error(skew),
                                                  mean_and_error(iad_v), mean_and_error(time)});
  }
  return report;
}

namespace {

json mean_error_json(const MeanAndError& m) {
  return json{{"mean", m.mean}, {"standard_error", m.standard_error}};
}

MeanAndError mean_error_from(const json& j) {
  return MeanAndError{j.at("mean").get<double>(), j.at("standard_error").get<double>()};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report, bool include_timing) {
  const ExperimentConfig& c = report.config;
  json runs = json::array();
  for (const RunReport& run : report.runs) {
    json combiners = json::array();
    for (const CombinerRun& cr : run.combiners) {
      json metrics = json::object();
      if (wants(c, "mahalanobis")) metrics["mahalanobis"] = cr.metrics.mahalanobis;
      if (wants(c, "skew")) metrics["skew_dev"] = cr.metrics.skew_dev;
      if (wants(c, "iad")) {
        metrics["iad"] = cr.metrics.iad;
        metrics["iad_raw"] = cr.metrics.iad_raw;
        metrics["per_dimension_iad"] = cr.metrics.per_dimension_iad;
      }
      json entry{{"method", std::string(to_string(cr.method))},
                 {"rows", cr.rows},
                 {"metrics", metrics}};
      if (include_timing) entry["wall_time_seconds"] = cr.wall_time_seconds;
      combiners.push_back(std::move(entry));
    }
    json chains = json::array();
    for (const ChainSummary& ch : run.chains)
      chains.push_back({{"role", ch.role},
                        {"batch_id", ch.batch_id},
                        {"acceptance_rate", ch.acceptance_rate},
                        {"burn_in_acceptance_rate", ch.burn_in_acceptance_rate},
                        {"final_scale", ch.final_scale},
                        {"warning", ch.warning ? json(*ch.warning) : json(nullptr)}});
    runs.push_back({{"repetition", run.repetition},
                    {"combiners", combiners},
                    {"chains", chains},
                    {"error", run.error ? json(*run.error) : json(nullptr)},
                    {"error_numerical", run.error_numerical}});
  }
  json aggregates = json::array();
  for (const CombinerAggregate& a : report.aggregates) {
    json entry{{"method", std::string(to_string(a.method))},
               {"runs", a.runs},
               {"mahalanobis", mean_error_json(a.mahalanobis)},
               {"skew_dev", mean_error_json(a.skew_dev)},
               {"iad", mean_error_json(a.iad)}};
    if (include_timing) entry["wall_time_seconds"] = mean_error_json(a.wall_time_seconds);
    aggregates.push_back(std::move(entry));
  }
  json config = config_json(c);
  if (!include_timing) {
    config.erase("workers");
    config.erase("output_dir");
  }
  json j{{"config", config}, {"runs", runs}, {"aggregates", aggregates}};
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& json_text) {
  ExperimentReport r;
  try {
    const json j = json::parse(json_text);
    r.config = parse_experiment_config(j.at("config").dump());
    for (const json& run : j.at("runs")) {
      RunReport rr;
      rr.repetition = run.at("repetition").get<int>();
      for (const json& cr : run.at("combiners")) {
        CombinerRun c;
        c.method = parse_combine_method(cr.at("method").get<std::string>());
        c.rows = cr.at("rows").get<long>();
        c.wall_time_seconds = cr.value("wall_time_seconds", 0.0);
        const json& m = cr.at("metrics");
        c.metrics.mahalanobis = m.value("mahalanobis", 0.0);
        c.metrics.skew_dev = m.value("skew_dev", 0.0);
        c.metrics.iad = m.value("iad", 0.0);
        c.metrics.iad_raw = m.value("iad_raw", 0.0);
        if (m.contains("per_dimension_iad"))
          c.metrics.per_dimension_iad = m.at("per_dimension_iad").get<std::vector<double>>();
        rr.combiners.push_back(std::move(c));
      }
      for (const json& ch : run.at("chains")) {
        ChainSummary s;
        s.role = ch.at("role").get<std::string>();
        s.batch_id = ch.at("batch_id").get<int>();
        s.acceptance_rate = ch.at("acceptance_rate").get<double>();
        s.burn_in_acceptance_rate = ch.at("burn_in_acceptance_rate").get<double>();
        s.final_scale = ch.at("final_scale").get<double>();
        if (!ch.at("warning").is_null()) s.warning = ch.at("warning").get<std::string>();
        rr.chains.push_back(std::move(s));
      }
      if (!run.at("error").is_null()) rr.error = run.at("error").get<std::string>();
      rr.error_numerical = run.value("error_numerical", false);
      r.runs.push_back(std::move(rr));
    }
    for (const json& a : j.at("aggregates")) {
      CombinerAggregate ag;
      ag.method = parse_combine_method(a.at("method").get<std::string>());
      ag.runs = a.at("runs").get<int>();
      ag.mahalanobis = mean_error_from(a.at("mahalanobis"));
      ag.skew_dev = mean_error_from(a.at("skew_dev"));
      ag.iad = mean_error_from(a.at("iad"));
      if (a.contains("wall_time_seconds")) ag.wall_time_seconds = mean_error_from(a.at("wall_time_seconds"));
      r.aggregates.push_back(ag);
    }
  } catch (const json::exception& e) {
    throw ParseError("report", 0, e.what());
  }
  return r;
}

std::string runs_to_csv(const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  auto cell = [&](const char* metric, double v) {
    return wants(c, metric) ? io::format_double(v) : std::string();
  };
  std::ostringstream out;
  out << "repetition,method,mahalanobis,skew_dev,iad,time_seconds,rows\n";
  for (const RunReport& run : report.runs)
    for (const CombinerRun& cr : run.combiners)
      out << run.repetition << ',' << to_string(cr.method) << ','
          << cell("mahalanobis", cr.metrics.mahalanobis) << ','
          << cell("skew", cr.metrics.skew_dev) << ',' << cell("iad", cr.metrics.iad) << ','
          << io::format_double(cr.wall_time_seconds) << ',' << cr.rows << '\n';
  return out.str();
}

void write_experiment_outputs(const ExperimentReport& report, const std::filesystem::path& dir) {
  for (const RunReport& run : report.runs) {
    ExperimentReport single;
    single.config = report.config;
    single.runs.push_back(run);
    io::write_text(dir / ("run_" + std::to_string(run.repetition) + ".json"),
                   report_to_json(single));
  }
  io::write_text(dir / "report.json", report_to_json(report));
  io::write_text(dir / "runs.csv", runs_to_csv(report));
}

std::vector<BenchRow> bench_dimension_scaling(const BenchConfig& config) {
  if (config.dims.empty()) throw InvalidArgumentError("bench: no dimensions");
  for (int d : config.dims)
    if (d < 1) throw InvalidArgumentError("bench: dimensions must be >= 1");
  if (config.batches < 1 || config.samples < 2 || config.repetitions < 1)
    throw InvalidArgumentError("bench: invalid batches/samples/repetitions");

  struct Job {
    int d;
    int rep;
  };
  std::vector<Job> jobs;
  for (int d : config.dims)
    for (int r = 0; r < config.repetitions; ++r) jobs.push_back({d, r});

  std::vector<std::vector<BenchRow>> results(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t k) {
    const Job job = jobs[k];
    try {
      // Each dimension gets its own suite seed.
      const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(job.d), 0);
      GaussianSuiteRun g = prepare_gaussian_suite(job.d, config.batches, config.samples,
                                                  config.reference_samples, seed, job.rep);
      const std::vector<Moments> inflated_moments = g.suite.inflated();
      const bool analytic = config.moments == MomentSource::Analytic;
      for (CombineMethod m : config.combiners) {
        const bool inflated = uses_inflated_batches(m);
        const auto& batches = inflated ? g.inflated : g.sub_posterior;
        std::optional<std::span<const Moments>> moments;
        if (analytic) moments = std::span<const Moments>(inflated ? inflated_moments : g.suite.batches);
        const CombineResult res = combine(m, batches, moments);
        results[k].push_back(BenchRow{job.d, m, iad(res.combined, g.reference).total,
                                      res.wall_time_seconds, job.rep});
      }
    } catch (Error& e) {
      e.attach_context("bench d=" + std::to_string(job.d) + " repetition " +
                       std::to_string(job.rep));
      throw;
    }
  });
  std::vector<BenchRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "d,method,iad,time_seconds,repetition\n";
  for (const BenchRow& r : rows)
    out << r.d << ',' << to_string(r.method) << ',' << io::format_double(r.iad) << ','
        << io::format_double(r.time_seconds) << ',' << r.repetition << '\n';
  return out.str();
}

}  // namespace swiss
