#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swiss/linalg.hpp"
#include "swiss/moments.hpp"
#include "swiss/targets.hpp"

namespace swiss {

enum class InitStrategy { PriorDraw, Mode, Fixed };

InitStrategy parse_init_strategy(std::string_view name);
std::string_view to_string(InitStrategy s);

struct SamplerConfig {
  int n_samples = 1000;
  int burn_in = 1000;
  int thin = 1;
  InitStrategy init = InitStrategy::PriorDraw;
  Vector init_point;  ///< used with InitStrategy::Fixed
  /// Initial random-walk scale s; 0 selects 2.38/√d.
  double proposal_scale = 0.0;
  bool adapt = true;
  double target_accept = 0.234;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SamplerDiagnostics {
  double acceptance_rate = 0.0;          ///< over the kept phase
  double burn_in_acceptance_rate = 0.0;
  double final_scale = 0.0;
  /// Proposal covariance s²·Σ̂ used after burn-in.
  Matrix proposal_covariance;
  std::optional<std::string> warning;
};

struct SamplerOutput {
  SampleBatch batch;
  SamplerDiagnostics diagnostics;
};

/// Adaptive random-walk Metropolis on `target`.
///
/// Proposals are x + s·L z with L Lᵀ = Σ̂ + 1e-6·I. During burn-in log s moves
/// by Robbins–Monro steps towards `target_accept` and Σ̂ tracks the running
/// chain covariance; both are frozen afterwards. Returns n_samples draws kept
/// every `thin` iterations, mapped through target.output().
///
/// The random stream is RngStream(config.seed, stream_id).
SamplerOutput sample(const TargetModel& target, const SamplerConfig& config,
                     int batch_id = 0, std::uint64_t stream_id = 0);

using TargetFamily = std::function<TargetModel(int batch_id)>;

/// One chain per batch with stream_id = batch_id; ordered by batch_id and
/// independent of `workers`.
std::vector<SamplerOutput> sample_all_batches(const TargetFamily& family, int num_batches,
                                              const SamplerConfig& config, int workers = 1);

}  // namespace swiss
