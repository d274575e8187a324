#include "vrql/mdp.hpp"

#include "vrql/errors.hpp"
#include "vrql/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vrql {

namespace {

void require_shape(const TabularMdp& mdp, const QFunction& theta, const char* what) {
  if (static_cast<std::size_t>(theta.rows()) != mdp.num_states ||
      static_cast<std::size_t>(theta.cols()) != mdp.num_actions) {
    std::ostringstream msg;
    msg << what << ": Q-function shape " << theta.rows() << "x" << theta.cols()
        << " does not match MDP " << mdp.num_states << "x" << mdp.num_actions;
    throw MdpError(MdpError::Kind::ShapeMismatch, msg.str());
  }
}

}  // namespace

void validate_mdp(const TabularMdp& mdp) {
  const std::size_t S = mdp.num_states;
  const std::size_t A = mdp.num_actions;
  if (S == 0 || A == 0) {
    throw MdpError(MdpError::Kind::ShapeMismatch, "MDP must have at least one state and action");
  }
  if (mdp.kernel.size() != S * A * S) {
    throw MdpError(MdpError::Kind::ShapeMismatch, "kernel size must be |S|*|A|*|S|");
  }
  if (static_cast<std::size_t>(mdp.reward.rows()) != S ||
      static_cast<std::size_t>(mdp.reward.cols()) != A) {
    throw MdpError(MdpError::Kind::ShapeMismatch, "reward shape must be |S|x|A|");
  }
  if (!(mdp.discount > 0.0 && mdp.discount < 1.0)) {
    std::ostringstream msg;
    msg << "discount " << mdp.discount << " outside (0, 1)";
    throw MdpError(MdpError::Kind::DiscountOutOfRange, msg.str(), 0, 0, mdp.discount);
  }
  if (!(mdp.r_max >= 0.0) || !std::isfinite(mdp.r_max)) {
    throw MdpError(MdpError::Kind::RewardOutOfBound, "r_max must be finite and nonnegative", 0, 0,
                   mdp.r_max);
  }

  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double sum = 0.0;
      bool nonnegative = true;
      for (double p : mdp.row(s, a)) {
        if (!(p >= 0.0)) nonnegative = false;
        sum += p;
      }
      if (!nonnegative || !(std::abs(sum - 1.0) <= kStochasticRowTolerance)) {
        std::ostringstream msg;
        msg << "kernel row (" << s << ", " << a << ") is not a probability vector (sum " << sum
            << ")";
        throw MdpError(MdpError::Kind::NonStochasticRow, msg.str(), s, a, sum);
      }
      const double r = mdp.reward(s, a);
      if (!std::isfinite(r) || std::abs(r) > mdp.r_max) {
        std::ostringstream msg;
        msg << "reward (" << s << ", " << a << ") = " << r << " exceeds r_max " << mdp.r_max;
        throw MdpError(MdpError::Kind::RewardOutOfBound, msg.str(), s, a, r);
      }
    }
  }
}

Eigen::VectorXd max_over_actions(const QFunction& theta) { return theta.rowwise().maxCoeff(); }

QFunction bellman_apply(const TabularMdp& mdp, const QFunction& theta) {
  require_shape(mdp, theta, "bellman_apply");
  const Eigen::VectorXd value = max_over_actions(theta);
  QFunction out(mdp.num_states, mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      const auto row = mdp.row(s, a);
      double expected = 0.0;
      for (std::size_t next = 0; next < mdp.num_states; ++next) expected += row[next] * value[next];
      out(s, a) = mdp.reward(s, a) + mdp.discount * expected;
    }
  }
  return out;
}

QFunction empirical_bellman_apply(const QFunction& reward, double discount,
                                  const SampleMatrix& sample, const QFunction& theta) {
  const auto S = static_cast<std::size_t>(theta.rows());
  const auto A = static_cast<std::size_t>(theta.cols());
  if (sample.num_states != S || sample.num_actions != A || reward.rows() != theta.rows() ||
      reward.cols() != theta.cols()) {
    throw MdpError(MdpError::Kind::ShapeMismatch, "empirical_bellman_apply: shape mismatch");
  }
  const Eigen::VectorXd value = max_over_actions(theta);
  QFunction out(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::uint32_t next = sample(s, a);
      if (next >= S) throw ValidationError("empirical_bellman_apply: sample index out of range");
      out(s, a) = reward(s, a) + discount * value[next];
    }
  }
  return out;
}

QFunction solve_optimal_q(const TabularMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw ValidationError("solve_optimal_q: tol must be positive");
  const double gamma = mdp.discount;
  const double target = tol * (1.0 - gamma);

  // The residual after k sweeps from zero is at most gamma^k ||r||_inf.
  const double reward_norm = mdp.reward.cwiseAbs().maxCoeff();
  std::uint64_t cap = 1000;
  if (reward_norm > target) {
    cap += static_cast<std::uint64_t>(std::ceil(std::log(target / reward_norm) / std::log(gamma)));
  }

  QFunction theta = QFunction::Zero(mdp.num_states, mdp.num_actions);
  for (std::uint64_t iter = 0; iter <= cap; ++iter) {
    QFunction next = bellman_apply(mdp, theta);
    const double residual = linf_distance(next, theta);
    if (residual <= target) return theta;
    theta = std::move(next);
  }
  std::ostringstream msg;
  msg << "solve_optimal_q: residual did not reach " << target << " within " << cap
      << " iterations; tolerance is below floating resolution";
  throw ConvergenceError(msg.str());
}

Policy greedy_policy(const QFunction& theta) {
  Policy policy;
  policy.action.resize(static_cast<std::size_t>(theta.rows()));
  for (Eigen::Index s = 0; s < theta.rows(); ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < theta.cols(); ++a) {
      if (theta(s, a) > theta(s, best)) best = a;
    }
    policy.action[static_cast<std::size_t>(s)] = static_cast<std::size_t>(best);
  }
  return policy;
}

QFunction policy_q_exact(const TabularMdp& mdp, const Policy& policy) {
  const std::size_t S = mdp.num_states;
  const std::size_t A = mdp.num_actions;
  if (policy.size() != S) throw ValidationError("policy_q_exact: policy must cover every state");
  for (std::size_t s = 0; s < S; ++s) {
    if (policy[s] >= A) throw ValidationError("policy_q_exact: action index out of range");
  }

  // Unknowns indexed by pair (s, a) -> s * A + a.
  const std::size_t D = S * A;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(D, D);
  Eigen::VectorXd rhs(D);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t i = s * A + a;
      rhs[i] = mdp.reward(s, a);
      const auto row = mdp.row(s, a);
      for (std::size_t next = 0; next < S; ++next) {
        system(i, next * A + policy[next]) -= mdp.discount * row[next];
      }
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const Eigen::VectorXd solution = lu.solve(rhs);
  if (!solution.allFinite()) throw std::logic_error("policy_q_exact: singular policy system");

  QFunction q(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) q(s, a) = solution[s * A + a];
  }
  return q;
}

QFunction sigma_star(const TabularMdp& mdp, const QFunction& theta_star) {
  require_shape(mdp, theta_star, "sigma_star");
  const Eigen::VectorXd value = max_over_actions(theta_star);
  QFunction sigma(mdp.num_states, mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      const auto row = mdp.row(s, a);
      double mean = 0.0;
      for (std::size_t next = 0; next < mdp.num_states; ++next) mean += row[next] * value[next];
      double variance = 0.0;
      for (std::size_t next = 0; next < mdp.num_states; ++next) {
        const double centered = value[next] - mean;
        variance += row[next] * centered * centered;
      }
      sigma(s, a) = mdp.discount * std::sqrt(std::max(variance, 0.0));
    }
  }
  return sigma;
}

InstanceComplexity instance_complexity(const TabularMdp& mdp, const QFunction& theta_star) {
  InstanceComplexity out;
  out.sigma_star = sigma_star(mdp, theta_star);
  out.theta_star_norm = theta_star.cwiseAbs().maxCoeff();
  out.b0 = out.sigma_star.maxCoeff() + out.theta_star_norm * (1.0 - mdp.discount);
  return out;
}

double linf_distance(const QFunction& a, const QFunction& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw MdpError(MdpError::Kind::ShapeMismatch, "linf_distance: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace vrql
