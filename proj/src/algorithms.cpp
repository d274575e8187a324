#include "vrql/algorithms.hpp"

#include "vrql/bounds.hpp"
#include "vrql/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vrql {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    std::ostringstream msg;
    msg << "stepsize " << alpha << " outside (0, 1]";
    throw ValidationError(msg.str());
  }
}

void require_match(const QFunction& a, const QFunction& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw MdpError(MdpError::Kind::ShapeMismatch, std::string(what) + ": shape mismatch");
  }
}

void require_sample(const TabularMdp& mdp, const SampleMatrix& sample, const char* what) {
  if (sample.num_states != mdp.num_states || sample.num_actions != mdp.num_actions) {
    throw MdpError(MdpError::Kind::ShapeMismatch, std::string(what) + ": sample shape mismatch");
  }
}

// (1 - alpha) * current + alpha * target, written so that target == current
// and alpha == 1 both reproduce target exactly.
inline double relax(double current, double alpha, double target) {
  return alpha == 1.0 ? target : current + alpha * (target - current);
}

// theta <- theta + alpha * (gamma * (V_theta(x) - V_anchor(x)) + recentered - theta).
// The reward cancels between the two empirical operators and is not formed.
void recentered_step(QFunction& theta, double alpha, const Eigen::VectorXd& anchor_value,
                     const QFunction& recentered, double gamma, const SampleMatrix& sample) {
  const Eigen::VectorXd value = max_over_actions(theta);
  for (std::size_t s = 0; s < sample.num_states; ++s) {
    for (std::size_t a = 0; a < sample.num_actions; ++a) {
      const std::uint32_t next = sample(s, a);
      const double target = gamma * (value[next] - anchor_value[next]) + recentered(s, a);
      theta(s, a) = relax(theta(s, a), alpha, target);
    }
  }
}

// theta <- theta + alpha * (r + gamma * V_theta(x) - theta)
void plain_step(QFunction& theta, double alpha, const TabularMdp& mdp, const SampleMatrix& sample) {
  const Eigen::VectorXd value = max_over_actions(theta);
  for (std::size_t s = 0; s < sample.num_states; ++s) {
    for (std::size_t a = 0; a < sample.num_actions; ++a) {
      const double target = mdp.reward(s, a) + mdp.discount * value[sample(s, a)];
      theta(s, a) = relax(theta(s, a), alpha, target);
    }
  }
}

struct EpochRecorder {
  const QFunction* theta_star = nullptr;
  RunTrace* trace = nullptr;
  std::size_t epoch = 0;
  bool record_inner = false;
};

QFunction run_epoch_impl(const TabularMdp& mdp, const QFunction& theta_bar, std::uint64_t k,
                         std::uint64_t n, GenerativeSampler& sampler, const EpochRecorder* recorder) {
  if (k == 0 || n == 0) throw ValidationError("run_epoch: k and n must be >= 1");

  // Recentering draws come first and from their own stream, so the inner
  // updates never reuse a sample from the Monte Carlo anchor.
  GenerativeSampler recenter_stream = sampler.split("recenter");
  const QFunction recentered = monte_carlo_bellman(mdp, theta_bar, n, recenter_stream);

  GenerativeSampler inner_stream = sampler.split("inner");
  const Eigen::VectorXd anchor_value = max_over_actions(theta_bar);
  const StepRule step = StepRule::rescaled_linear();
  QFunction theta = theta_bar;
  SampleMatrix sample(mdp.num_states, mdp.num_actions);
  for (std::uint64_t t = 1; t <= k; ++t) {
    inner_stream.draw_into(sample);
    recentered_step(theta, step(t, mdp.discount), anchor_value, recentered, mdp.discount, sample);
    if (recorder != nullptr && (t == k || recorder->record_inner)) {
      recorder->trace->add(sampler.samples_drawn(), linf_distance(theta, *recorder->theta_star),
                           recorder->epoch, t == k ? TracePhase::EpochEnd : TracePhase::Inner);
    }
  }
  return theta;
}

// Runs epochs first_epoch + 1, ... from `start`, drawing epoch m from the
// sampler's "epoch-m" child stream.
QFunction run_epochs(const TabularMdp& mdp, QFunction start, std::uint64_t epoch_length,
                     const std::vector<std::uint64_t>& recenter_sizes, GenerativeSampler& sampler,
                     const QFunction& theta_star, RunTrace& trace, std::size_t first_epoch,
                     bool record_inner) {
  QFunction theta_bar = std::move(start);
  for (std::size_t i = 0; i < recenter_sizes.size(); ++i) {
    GenerativeSampler epoch_stream = sampler.split("epoch-" + std::to_string(i + 1));
    const EpochRecorder recorder{&theta_star, &trace, first_epoch + i + 1, record_inner};
    theta_bar =
        run_epoch_impl(mdp, theta_bar, epoch_length, recenter_sizes[i], epoch_stream, &recorder);
  }
  return theta_bar;
}

QFunction reference_or_solve(const TabularMdp& mdp, const std::optional<QFunction>& ref) {
  if (ref) {
    require_match(*ref, mdp.reward, "theta_star_ref");
    return *ref;
  }
  return solve_optimal_q(mdp);
}

template <typename Step>
RunResult run_loop(const TabularMdp& mdp, std::uint64_t num_iters, const StepRule& rule,
                   GenerativeSampler& sampler, const QFunction& theta_star,
                   const LoopRecording& recording, const char* tag, Step&& step) {
  if (num_iters == 0) throw ValidationError("number of iterations must be >= 1");
  if (recording.record_every == 0) throw ValidationError("record_every must be >= 1");

  RunResult result;
  result.trace.algorithm_tag = tag;
  result.trace.gamma = mdp.discount;
  QFunction theta = QFunction::Zero(mdp.num_states, mdp.num_actions);
  result.trace.add(sampler.samples_drawn(), linf_distance(theta, theta_star), 0,
                   TracePhase::EpochEnd);

  SampleMatrix sample(mdp.num_states, mdp.num_actions);
  for (std::uint64_t k = 1; k <= num_iters; ++k) {
    sampler.draw_into(sample);
    const double alpha = rule(k, mdp.discount);
    step(theta, alpha, sample);

    const std::uint64_t block = recording.epoch_length;
    const bool block_end = block != 0 && k % block == 0;
    if (block_end || k % recording.record_every == 0 || k == num_iters) {
      const std::size_t epoch = block == 0 ? 0 : static_cast<std::size_t>((k - 1) / block + 1);
      result.trace.add(sampler.samples_drawn(), linf_distance(theta, theta_star), epoch,
                       block_end ? TracePhase::EpochEnd : TracePhase::Inner);
    }
  }
  result.estimate = std::move(theta);
  return result;
}

}  // namespace

StepRule StepRule::polynomial(double omega) {
  if (!(omega > 0.0 && omega <= 1.0)) throw ValidationError("polynomial exponent must lie in (0, 1]");
  return {Kind::Polynomial, omega};
}

StepRule StepRule::constant(double alpha) {
  require_alpha(alpha);
  return {Kind::Constant, alpha};
}

double StepRule::operator()(std::uint64_t k, double gamma) const {
  const auto kd = static_cast<double>(k);
  switch (kind) {
    case Kind::RescaledLinear:
      return 1.0 / (1.0 + (1.0 - gamma) * kd);
    case Kind::Polynomial:
      return 1.0 / std::pow(kd, parameter);
    case Kind::Constant:
      return parameter;
  }
  throw std::logic_error("unknown step rule");
}

void VrqlConfig::validate() const {
  if (num_epochs == 0) throw ValidationError("num_epochs must be >= 1");
  if (epoch_length == 0) throw ValidationError("epoch_length must be >= 1");
  if (recenter_sizes.size() != num_epochs) {
    throw ValidationError("recenter_sizes must list one size per epoch");
  }
  for (std::uint64_t n : recenter_sizes) {
    if (n == 0) throw ValidationError("recentering sample sizes must be >= 1");
  }
  if (!(base > 1.0)) throw ValidationError("base must be > 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ValidationError("c1 and c2 must be positive");
}

const char* to_string(TracePhase phase) noexcept {
  return phase == TracePhase::Inner ? "inner" : "epoch_end";
}

void RunTrace::add(std::uint64_t samples, double error, std::size_t epoch, TracePhase phase) {
  if (!records.empty() && samples <= records.back().cumulative_samples) {
    throw std::logic_error("RunTrace: cumulative samples must strictly increase");
  }
  records.push_back({samples, error, epoch, phase});
}

VrqlConfig planned_config(const TabularMdp& mdp, std::size_t num_epochs, double delta, double c1,
                          double c2, double base, std::uint64_t seed) {
  const bounds::ParameterPlan plan =
      bounds::plan_parameters(mdp.discount, delta, mdp.num_pairs(), num_epochs, c1, c2, base);
  VrqlConfig config;
  config.num_epochs = num_epochs;
  config.epoch_length = plan.epoch_length;
  config.recenter_sizes = plan.recenter_sizes;
  config.base = base;
  config.delta = delta;
  config.c1 = c1;
  config.c2 = c2;
  config.seed = seed;
  return config;
}

QFunction monte_carlo_bellman(const TabularMdp& mdp, const QFunction& theta_bar, std::uint64_t n,
                              GenerativeSampler& sampler) {
  if (n == 0) throw ValidationError("monte_carlo_bellman: n must be >= 1");
  require_match(theta_bar, mdp.reward, "monte_carlo_bellman");
  const Eigen::VectorXd value = max_over_actions(theta_bar);
  QFunction sum = QFunction::Zero(mdp.num_states, mdp.num_actions);
  SampleMatrix sample(mdp.num_states, mdp.num_actions);
  for (std::uint64_t i = 0; i < n; ++i) {
    sampler.draw_into(sample);
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      for (std::size_t a = 0; a < mdp.num_actions; ++a) sum(s, a) += value[sample(s, a)];
    }
  }
  return mdp.reward + (mdp.discount / static_cast<double>(n)) * sum;
}

QFunction vr_update(const QFunction& theta, double alpha, const QFunction& theta_bar,
                    const QFunction& recentered_bellman, const TabularMdp& mdp,
                    const SampleMatrix& sample) {
  require_alpha(alpha);
  require_match(theta, mdp.reward, "vr_update");
  require_match(theta_bar, mdp.reward, "vr_update");
  require_match(recentered_bellman, mdp.reward, "vr_update");
  require_sample(mdp, sample, "vr_update");
  QFunction next = theta;
  recentered_step(next, alpha, max_over_actions(theta_bar), recentered_bellman, mdp.discount,
                  sample);
  return next;
}

QFunction oracle_vr_update(const QFunction& theta, double alpha, const QFunction& theta_star,
                           const TabularMdp& mdp, const SampleMatrix& sample) {
  require_alpha(alpha);
  require_match(theta, mdp.reward, "oracle_vr_update");
  require_match(theta_star, mdp.reward, "oracle_vr_update");
  require_sample(mdp, sample, "oracle_vr_update");
  QFunction next = theta;
  recentered_step(next, alpha, max_over_actions(theta_star), theta_star, mdp.discount, sample);
  return next;
}

QFunction run_epoch(const TabularMdp& mdp, const QFunction& theta_bar, std::uint64_t k,
                    std::uint64_t n, GenerativeSampler& sampler) {
  require_match(theta_bar, mdp.reward, "run_epoch");
  return run_epoch_impl(mdp, theta_bar, k, n, sampler, nullptr);
}

RunResult vr_q_learning(const TabularMdp& mdp, const VrqlConfig& config,
                        const std::optional<QFunction>& theta_star_ref) {
  config.validate();
  const QFunction theta_star = reference_or_solve(mdp, theta_star_ref);
  GenerativeSampler sampler = build_sampler(mdp, config.seed);

  RunResult result;
  result.trace.algorithm_tag = "vrql";
  result.trace.gamma = mdp.discount;
  QFunction start = QFunction::Zero(mdp.num_states, mdp.num_actions);
  result.trace.add(sampler.samples_drawn(), linf_distance(start, theta_star), 0,
                   TracePhase::EpochEnd);
  result.estimate = run_epochs(mdp, std::move(start), config.epoch_length, config.recenter_sizes,
                               sampler, theta_star, result.trace, 0, config.record_inner);
  return result;
}

RunResult ordinary_q_learning(const TabularMdp& mdp, std::uint64_t num_iters, const StepRule& step,
                              GenerativeSampler& sampler,
                              const std::optional<QFunction>& theta_star_ref,
                              LoopRecording recording) {
  const QFunction theta_star = reference_or_solve(mdp, theta_star_ref);
  return run_loop(mdp, num_iters, step, sampler, theta_star, recording, "ordinary",
                  [&](QFunction& theta, double alpha, const SampleMatrix& sample) {
                    plain_step(theta, alpha, mdp, sample);
                  });
}

RunResult oracle_vr_q_learning(const TabularMdp& mdp, std::uint64_t num_iters,
                               const StepRule& step, GenerativeSampler& sampler,
                               const QFunction& theta_star, LoopRecording recording) {
  require_match(theta_star, mdp.reward, "oracle_vr_q_learning");
  const Eigen::VectorXd star_value = max_over_actions(theta_star);
  return run_loop(mdp, num_iters, step, sampler, theta_star, recording, "oracle_vr",
                  [&](QFunction& theta, double alpha, const SampleMatrix& sample) {
                    recentered_step(theta, alpha, star_value, theta_star, mdp.discount, sample);
                  });
}

TwoPhaseResult two_phase_minimax(const TabularMdp& mdp, const TwoPhaseOptions& options,
                                 const std::optional<QFunction>& theta_star_ref) {
  validate_mdp(mdp);
  const double gamma = mdp.discount;
  const double ceiling = mdp.r_max / (1.0 - gamma);
  if (!(options.epsilon > 0.0 && options.epsilon < ceiling)) {
    std::ostringstream msg;
    msg << "two_phase_minimax: epsilon " << options.epsilon << " outside (0, r_max/(1-gamma) = "
        << ceiling << ")";
    throw ValidationError(msg.str());
  }
  if (!(options.c_epochs > 0.0)) throw ValidationError("c_epochs must be positive");

  const QFunction theta_star = reference_or_solve(mdp, theta_star_ref);
  const std::size_t pairs = mdp.num_pairs();

  const double phase1_target = mdp.r_max / std::sqrt(1.0 - gamma);
  const std::size_t phase1_epochs =
      bounds::epochs_needed(phase1_target, bounds::uniform_b0_bound(gamma, mdp.r_max), options.base);
  const bounds::ParameterPlan phase1 = bounds::plan_parameters(
      gamma, options.delta, pairs, phase1_epochs, options.c1, options.c2, options.base);

  const double log_factor = std::log(mdp.r_max / ((1.0 - gamma) * options.epsilon));
  const auto phase2_epochs =
      static_cast<std::size_t>(std::max(1.0, std::ceil(options.c_epochs * log_factor)));
  const bounds::ParameterPlan phase2 = bounds::plan_parameters(
      gamma, options.delta, pairs, phase2_epochs, options.c1, options.c2, options.base);

  GenerativeSampler root = build_sampler(mdp, options.seed);
  TwoPhaseResult result;
  result.trace.algorithm_tag = "two_phase";
  result.trace.gamma = gamma;
  result.phase1_epochs = phase1_epochs;
  result.phase2_epochs = phase2_epochs;
  result.epoch_length = phase1.epoch_length;

  QFunction start = QFunction::Zero(mdp.num_states, mdp.num_actions);
  result.trace.add(root.samples_drawn(), linf_distance(start, theta_star), 0, TracePhase::EpochEnd);

  GenerativeSampler phase1_stream = root.split("phase-1");
  result.phase1_estimate =
      run_epochs(mdp, std::move(start), phase1.epoch_length, phase1.recenter_sizes, phase1_stream,
                 theta_star, result.trace, 0, options.record_inner);

  GenerativeSampler phase2_stream = root.split("phase-2");
  result.estimate = run_epochs(mdp, result.phase1_estimate, phase1.epoch_length,
                               phase2.recenter_sizes, phase2_stream, theta_star, result.trace,
                               phase1_epochs, options.record_inner);
  result.total_samples = root.samples_drawn();
  return result;
}

}  // namespace vrql
