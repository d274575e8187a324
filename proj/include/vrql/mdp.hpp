#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace vrql {

/// Q-function over state-action pairs, shape |S| x |A|. Also used for the
/// reward matrix and for sigma(theta*).
using QFunction = Eigen::MatrixXd;

/// Discounted tabular MDP with known deterministic rewards.
///
/// The kernel is stored dense and row-major: entry (s, a, s') lives at
/// `(s * num_actions + a) * num_states + s'`. Instances are not validated on
/// construction; call validate_mdp (the JSON loader and the sampler do).
struct TabularMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> kernel;
  QFunction reward;
  double discount = 0.0;
  double r_max = 0.0;

  std::size_t num_pairs() const noexcept { return num_states * num_actions; }

  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {kernel.data() + (s * num_actions + a) * num_states, num_states};
  }

  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return kernel[(s * num_actions + a) * num_states + next];
  }
};

/// Deterministic policy: one action index per state.
struct Policy {
  std::vector<std::size_t> action;

  std::size_t operator[](std::size_t s) const { return action[s]; }
  std::size_t size() const noexcept { return action.size(); }
  bool operator==(const Policy&) const = default;
};

/// Instance-dependent quantities the convergence guarantees are stated in.
struct InstanceComplexity {
  QFunction sigma_star;
  double theta_star_norm = 0.0;
  /// ||sigma(theta*)||_inf + ||theta*||_inf * (1 - gamma)
  double b0 = 0.0;
};

/// Tolerance on |sum_s' P(s,a,s') - 1|.
inline constexpr double kStochasticRowTolerance = 1e-12;
/// Default tolerance for the exact solver when used as a reference.
inline constexpr double kDefaultSolverTolerance = 1e-10;

/// Throws MdpError if any row is not a probability vector, a reward exceeds
/// r_max in magnitude, the discount is outside (0, 1), or shapes disagree.
void validate_mdp(const TabularMdp& mdp);

/// V(s) = max_a theta(s, a).
Eigen::VectorXd max_over_actions(const QFunction& theta);

/// Population Bellman operator, evaluated exactly from the kernel.
QFunction bellman_apply(const TabularMdp& mdp, const QFunction& theta);

struct SampleMatrix;

/// Empirical Bellman operator: r(s,a) + gamma * max_a' theta(x(s,a), a').
QFunction empirical_bellman_apply(const QFunction& reward, double discount,
                                  const SampleMatrix& sample, const QFunction& theta);

/// Value iteration from zero until ||T(theta) - theta||_inf <= tol * (1 - gamma),
/// which bounds the distance to the fixed point by tol. Throws ConvergenceError
/// when the residual cannot reach the target (tol below floating resolution).
QFunction solve_optimal_q(const TabularMdp& mdp, double tol = kDefaultSolverTolerance);

/// Per-state argmax, ties resolved to the lowest action index.
Policy greedy_policy(const QFunction& theta);

/// Solves Q = r + gamma * P^pi Q directly as a D x D linear system.
QFunction policy_q_exact(const TabularMdp& mdp, const Policy& policy);

/// Entrywise standard deviation of the empirical Bellman operator at theta*:
/// gamma * sqrt(Var_{x ~ P(s,a,.)}[max_a' theta*(x, a')]).
QFunction sigma_star(const TabularMdp& mdp, const QFunction& theta_star);

InstanceComplexity instance_complexity(const TabularMdp& mdp, const QFunction& theta_star);

double linf_distance(const QFunction& a, const QFunction& b);

}  // namespace vrql
