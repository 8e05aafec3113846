#include "swiss/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swiss/error.hpp"
#include "swiss/parallel.hpp"

namespace swiss {

namespace {

constexpr double kProposalJitter = 1e-6;
constexpr int kCovarianceUpdateEvery = 50;
constexpr double kMinBurnInAcceptance = 0.01;

LowerTriangular proposal_factor(const Matrix& cov) {
  const Eigen::Index d = cov.rows();
  return cholesky(SymmetricMatrix(cov + kProposalJitter * Matrix::Identity(d, d)));
}

// Running mean and scatter of the burn-in trajectory (Welford).
struct RunningCovariance {
  Vector mean;
  Matrix scatter;
  long count = 0;

  explicit RunningCovariance(Eigen::Index d) : mean(Vector::Zero(d)), scatter(Matrix::Zero(d, d)) {}

  void add(const Vector& x) {
    ++count;
    const Vector delta = x - mean;
    mean += delta / static_cast<double>(count);
    scatter.noalias() += delta * (x - mean).transpose();
  }

  Matrix covariance() const {
    return 0.5 * (scatter + scatter.transpose()) / static_cast<double>(count - 1);
  }
};

}  // namespace

InitStrategy parse_init_strategy(std::string_view name) {
  if (name == "prior-draw") return InitStrategy::PriorDraw;
  if (name == "mode") return InitStrategy::Mode;
  if (name == "fixed") return InitStrategy::Fixed;
  throw InvalidArgumentError("unknown init strategy '" + std::string(name) +
                             "' (expected prior-draw|mode|fixed)");
}

std::string_view to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::PriorDraw: return "prior-draw";
    case InitStrategy::Mode: return "mode";
    case InitStrategy::Fixed: return "fixed";
  }
  return "unknown";
}

void SamplerConfig::validate() const {
  if (n_samples < 1) throw InvalidArgumentError("sampler: n_samples must be >= 1");
  if (burn_in < 0) throw InvalidArgumentError("sampler: burn_in must be >= 0");
  if (thin < 1) throw InvalidArgumentError("sampler: thin must be >= 1");
  if (proposal_scale < 0.0 || !std::isfinite(proposal_scale))
    throw InvalidArgumentError("sampler: proposal_scale must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw InvalidArgumentError("sampler: target_accept must lie in (0, 1)");
}

SamplerOutput sample(const TargetModel& target, const SamplerConfig& config, int batch_id,
                     std::uint64_t stream_id) {
  config.validate();
  const Eigen::Index d = target.dim;
  if (d < 1) throw InvalidArgumentError("sampler: target has no parameters");
  RngStream rng(config.seed, stream_id);

  Vector x;
  Matrix sigma = Matrix::Identity(d, d);
  switch (config.init) {
    case InitStrategy::Fixed:
      if (config.init_point.size() != d)
        throw InvalidArgumentError("sampler: init point has the wrong dimension");
      x = config.init_point;
      break;
    case InitStrategy::Mode: {
      if (!target.find_mode)
        throw InvalidArgumentError("sampler: target '" + target.name +
                                   "' cannot locate its mode");
      ModeEstimate m = target.find_mode(target.exponents);
      x = std::move(m.mode);
      if (m.covariance) sigma = m.covariance->matrix();
      break;
    }
    case InitStrategy::PriorDraw:
      x = target.draw_initial ? target.draw_initial(rng) : Vector::Zero(d);
      break;
  }
  double lp = target.log_density(x);
  if (!std::isfinite(lp))
    throw DataError("sampler: log-density of '" + target.name +
                    "' is not finite at the initial point");

  double log_scale = std::log(config.proposal_scale > 0.0
                                  ? config.proposal_scale
                                  : 2.38 / std::sqrt(static_cast<double>(d)));
  LowerTriangular factor = proposal_factor(sigma);
  RunningCovariance running(d);
  const long min_history = std::max<long>(100, 10 * d);

  struct Step {
    double alpha;
    bool accepted;
  };
  auto step = [&]() -> Step {
    Vector proposal = x + std::exp(log_scale) * (factor.matrix() * rng.normal_vector(d));
    const double lp_new = target.log_density(proposal);
    const double log_ratio = lp_new - lp;
    const double log_u = std::log(rng.uniform());
    if (!std::isfinite(lp_new)) return {0.0, false};
    const bool accept = log_u < log_ratio;
    if (accept) {
      x = std::move(proposal);
      lp = lp_new;
    }
    return {std::exp(std::min(log_ratio, 0.0)), accept};
  };

  long burn_accepted = 0;
  for (int t = 1; t <= config.burn_in; ++t) {
    const Step s = step();
    if (s.accepted) ++burn_accepted;
    if (!config.adapt) continue;
    log_scale += std::pow(static_cast<double>(t), -0.6) * (s.alpha - config.target_accept);
    running.add(x);
    if (t % kCovarianceUpdateEvery == 0 && running.count >= min_history) {
      const Matrix updated = running.covariance();
      try {
        LowerTriangular next = proposal_factor(updated);
        // Keep s²·Σ̂ continuous across the swap so the scale adaptation
        // only has to correct shape changes.
        log_scale += 0.5 * std::log(sigma.trace() / updated.trace());
        sigma = updated;
        factor = std::move(next);
      } catch (const NotPositiveDefiniteError&) {
        // Degenerate history so far (e.g. no accepted moves); keep the old proposal.
      }
    }
  }

  SamplerOutput out;
  out.batch.batch_id = batch_id;
  out.batch.meta.inflation_exponent = target.exponents.likelihood_power;
  out.batch.meta.prior_exponent = target.exponents.prior_power;
  out.batch.meta.seed = config.seed;
  out.batch.meta.target_name = target.name;

  const Vector probe = target.output(x);
  out.batch.draws.resize(config.n_samples, probe.size());
  long kept_accepted = 0;
  for (int i = 0; i < config.n_samples; ++i) {
    for (int k = 0; k < config.thin; ++k) {
      if (step().accepted) ++kept_accepted;
    }
    out.batch.draws.row(i) = target.output(x).transpose();
  }

  SamplerDiagnostics& diag = out.diagnostics;
  diag.burn_in_acceptance_rate =
      config.burn_in > 0 ? static_cast<double>(burn_accepted) / config.burn_in : 0.0;
  diag.acceptance_rate = static_cast<double>(kept_accepted) /
                         (static_cast<double>(config.n_samples) * config.thin);
  diag.final_scale = std::exp(log_scale);
  diag.proposal_covariance = diag.final_scale * diag.final_scale *
                             (factor.matrix() * factor.matrix().transpose());
  if (config.burn_in > 0 && diag.burn_in_acceptance_rate < kMinBurnInAcceptance)
    diag.warning = "tuning failure: burn-in acceptance rate " +
                   std::to_string(diag.burn_in_acceptance_rate) + " below 0.01";
  return out;
}

std::vector<SamplerOutput> sample_all_batches(const TargetFamily& family, int num_batches,
                                              const SamplerConfig& config, int workers) {
  if (num_batches < 1) throw InvalidArgumentError("sample_all_batches: B must be >= 1");
  std::vector<std::optional<SamplerOutput>> slots(static_cast<std::size_t>(num_batches));
  parallel_for(slots.size(), workers, [&](std::size_t b) {
    const int id = static_cast<int>(b);
    try {
      slots[b] = sample(family(id), config, id, static_cast<std::uint64_t>(id));
      slots[b]->batch.meta.num_batches = num_batches;
    } catch (Error& e) {
      e.attach_batch(id);
      throw;
    }
  });
  std::vector<SamplerOutput> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace swiss
