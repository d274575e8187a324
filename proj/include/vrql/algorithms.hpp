#pragma once

#include "vrql/mdp.hpp"
#include "vrql/sampling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vrql {

/// Stepsize schedule indexed by iteration k = 1, 2, ...
struct StepRule {
  enum class Kind { RescaledLinear, Polynomial, Constant };

  Kind kind = Kind::RescaledLinear;
  double parameter = 0.0;  // omega for Polynomial, alpha for Constant

  /// alpha_k = 1 / (1 + (1 - gamma) k)
  static StepRule rescaled_linear() { return {Kind::RescaledLinear, 0.0}; }
  /// alpha_k = 1 / k^omega, omega in (0, 1]
  static StepRule polynomial(double omega);
  /// alpha_k = alpha, alpha in (0, 1]
  static StepRule constant(double alpha);

  double operator()(std::uint64_t k, double gamma) const;
};

struct VrqlConfig {
  std::size_t num_epochs = 1;
  std::uint64_t epoch_length = 1;
  std::vector<std::uint64_t> recenter_sizes;
  double base = 2.0;
  double delta = 0.1;
  double c1 = 1.0;
  double c2 = 1.0;
  std::uint64_t seed = 0;
  bool record_inner = false;

  /// Throws ValidationError unless M >= 1, K >= 1, |{N_m}| = M, N_m >= 1.
  void validate() const;
};

enum class TracePhase { Inner, EpochEnd };

const char* to_string(TracePhase phase) noexcept;

struct TraceRecord {
  std::uint64_t cumulative_samples = 0;
  double linf_error = 0.0;
  std::size_t epoch = 0;
  TracePhase phase = TracePhase::Inner;
};

/// Error time series of one run. cumulative_samples is the sampler counter at
/// the time of recording and is strictly increasing.
struct RunTrace {
  std::vector<TraceRecord> records;
  std::string algorithm_tag;
  double gamma = 0.0;
  std::size_t trial = 0;

  /// Appends a record; throws std::logic_error if samples do not increase.
  void add(std::uint64_t samples, double error, std::size_t epoch, TracePhase phase);
};

struct RunResult {
  QFunction estimate;
  RunTrace trace;
};

/// Builds a config whose K and {N_m} follow the planner for this MDP.
VrqlConfig planned_config(const TabularMdp& mdp, std::size_t num_epochs, double delta, double c1,
                          double c2, double base, std::uint64_t seed);

/// (1/n) sum_i T_hat_i(theta_bar) over n fresh draws from `sampler`.
QFunction monte_carlo_bellman(const TabularMdp& mdp, const QFunction& theta_bar, std::uint64_t n,
                              GenerativeSampler& sampler);

/// One variance-reduced step:
///   theta + alpha * (T_hat(theta) - T_hat(theta_bar) + T_tilde(theta_bar) - theta)
/// with both empirical operators evaluated on the same sample.
QFunction vr_update(const QFunction& theta, double alpha, const QFunction& theta_bar,
                    const QFunction& recentered_bellman, const TabularMdp& mdp,
                    const SampleMatrix& sample);

/// Idealized recentering around the true fixed point. T(theta*) is taken to be
/// theta* itself, so theta* is an exact fixed point of this map.
QFunction oracle_vr_update(const QFunction& theta, double alpha, const QFunction& theta_star,
                           const TabularMdp& mdp, const SampleMatrix& sample);

/// One epoch: recentering estimate from n draws on the "recenter" child stream,
/// then k variance-reduced steps with rescaled-linear stepsizes on the "inner"
/// child stream. Consumes exactly n + k matrix samples.
QFunction run_epoch(const TabularMdp& mdp, const QFunction& theta_bar, std::uint64_t k,
                    std::uint64_t n, GenerativeSampler& sampler);

/// Epoch-structured variance-reduced Q-learning from theta_bar_0 = 0. The trace
/// measures error against theta_star_ref, solved internally when absent.
RunResult vr_q_learning(const TabularMdp& mdp, const VrqlConfig& config,
                        const std::optional<QFunction>& theta_star_ref = std::nullopt);

/// Optional trace layout for the single-loop algorithms below.
struct LoopRecording {
  std::uint64_t record_every = 1;
  /// When nonzero, iterations are grouped into blocks of this length; the last
  /// iteration of each block is recorded as an epoch_end of that block index.
  std::uint64_t epoch_length = 0;
};

/// Synchronous Q-learning theta_{k+1} = theta_k + alpha_k (T_hat_k(theta_k) - theta_k)
/// from theta_1 = 0.
RunResult ordinary_q_learning(const TabularMdp& mdp, std::uint64_t num_iters, const StepRule& step,
                              GenerativeSampler& sampler,
                              const std::optional<QFunction>& theta_star_ref = std::nullopt,
                              LoopRecording recording = {});

/// Repeated oracle_vr_update from zero. Test/illustration only: requires theta*.
RunResult oracle_vr_q_learning(const TabularMdp& mdp, std::uint64_t num_iters,
                               const StepRule& step, GenerativeSampler& sampler,
                               const QFunction& theta_star, LoopRecording recording = {});

struct TwoPhaseOptions {
  double epsilon = 0.1;
  double delta = 0.1;
  double c_epochs = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double base = 2.0;
  std::uint64_t seed = 0;
  bool record_inner = false;
};

struct TwoPhaseResult {
  QFunction estimate;
  QFunction phase1_estimate;
  RunTrace trace;
  std::size_t phase1_epochs = 0;
  std::size_t phase2_epochs = 0;
  std::uint64_t epoch_length = 0;
  std::uint64_t total_samples = 0;
};

/// Phase 1 runs the epoch algorithm to accuracy r_max / sqrt(1 - gamma), sizing
/// its epoch count from the uniform bound on b0. Phase 2 restarts from that
/// output for ceil(c_epochs * ln(r_max / ((1 - gamma) epsilon))) epochs with the
/// same K and a fresh recentering schedule.
TwoPhaseResult two_phase_minimax(const TabularMdp& mdp, const TwoPhaseOptions& options,
                                 const std::optional<QFunction>& theta_star_ref = std::nullopt);

}  // namespace vrql
