#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Sample-complexity calculators. Logarithms are natural; constant factors
// absorb any change of base. Log factors are clamped below at 1 except
// ln(b0 / epsilon) in corollary_budget, which is clamped at 0 so that the
// epoch term vanishes when no reduction is needed. Results are ceilings.

namespace vrql::bounds {

struct ParameterPlan {
  double gamma = 0.0;
  double delta = 0.0;
  std::size_t num_pairs = 0;
  std::size_t num_epochs = 0;
  double base = 2.0;
  double c1 = 1.0;
  double c2 = 1.0;

  std::uint64_t epoch_length = 0;
  std::vector<std::uint64_t> recenter_sizes;  // N_1 .. N_M
  std::uint64_t total_samples = 0;             // K * M + sum N_m
};

/// K = ceil(c1 ln(8MD / ((1-gamma) delta)) / (1-gamma)^3)
/// N_m = ceil(c2 (C^2)^m ln(8MD / delta) / (1-gamma)^2), m = 1..M
ParameterPlan plan_parameters(double gamma, double delta, std::size_t num_pairs,
                              std::size_t num_epochs, double c1 = 1.0, double c2 = 1.0,
                              double base = 2.0);

/// Smallest M >= 1 with b0 / C^M <= epsilon.
std::size_t epochs_needed(double epsilon, double b0, double base = 2.0);

double corollary_budget_value(double gamma, double delta, std::size_t num_pairs, double epsilon,
                              double b0, double c, double c_prime);
std::uint64_t corollary_budget(double gamma, double delta, std::size_t num_pairs, double epsilon,
                               double b0, double c, double c_prime);

/// c (r_max / epsilon)^2 ln(D / ((1-gamma) delta)) ln(1 / ((1-gamma) epsilon)) / (1-gamma)^3
double t_max_value(double gamma, double delta, std::size_t num_pairs, double epsilon,
                   double r_max, double c);
std::uint64_t t_max(double gamma, double delta, std::size_t num_pairs, double epsilon,
                    double r_max, double c);

/// Same as t_max with one extra factor of 1 / (1 - gamma).
double worst_case_budget_value(double gamma, double delta, std::size_t num_pairs, double epsilon,
                               double r_max, double c);
std::uint64_t worst_case_budget(double gamma, double delta, std::size_t num_pairs,
                                double epsilon, double r_max, double c);

/// Uniform bound r_max (2 / (1 - gamma) + 1) on b0 over all r_max-bounded MDPs.
double uniform_b0_bound(double gamma, double r_max);

}  // namespace vrql::bounds
