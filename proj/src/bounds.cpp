#include "vrql/bounds.hpp"

#include "vrql/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vrql::bounds {

namespace {

void check_unit_interval(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    std::ostringstream msg;
    msg << name << " = " << value << " must lie in (0, 1)";
    throw ValidationError(msg.str());
  }
}

void check_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << name << " = " << value << " must be positive and finite";
    throw ValidationError(msg.str());
  }
}

double clamped_log(double x) { return std::max(std::log(x), 1.0); }

std::uint64_t ceil_count(double value) {
  if (!(value >= 0.0) || value >= 0x1.0p63) {
    throw ValidationError("sample count is not representable as a 64-bit integer");
  }
  return static_cast<std::uint64_t>(std::ceil(value));
}

void check_budget_inputs(double gamma, double delta, std::size_t num_pairs, double epsilon) {
  check_unit_interval(gamma, "gamma");
  check_unit_interval(delta, "delta");
  if (num_pairs == 0) throw ValidationError("number of state-action pairs must be >= 1");
  check_positive(epsilon, "epsilon");
}

}  // namespace

ParameterPlan plan_parameters(double gamma, double delta, std::size_t num_pairs,
                              std::size_t num_epochs, double c1, double c2, double base) {
  check_unit_interval(gamma, "gamma");
  check_unit_interval(delta, "delta");
  if (num_pairs == 0) throw ValidationError("number of state-action pairs must be >= 1");
  if (num_epochs == 0) throw ValidationError("number of epochs must be >= 1");
  check_positive(c1, "c1");
  check_positive(c2, "c2");
  if (!(base > 1.0) || !std::isfinite(base)) throw ValidationError("base must be > 1");

  ParameterPlan plan;
  plan.gamma = gamma;
  plan.delta = delta;
  plan.num_pairs = num_pairs;
  plan.num_epochs = num_epochs;
  plan.base = base;
  plan.c1 = c1;
  plan.c2 = c2;

  const double gap = 1.0 - gamma;
  const double md = 8.0 * static_cast<double>(num_epochs) * static_cast<double>(num_pairs);
  plan.epoch_length = ceil_count(c1 * clamped_log(md / (gap * delta)) / (gap * gap * gap));

  const double per_epoch = c2 * clamped_log(md / delta) / (gap * gap);
  const double growth = base * base;
  plan.recenter_sizes.reserve(num_epochs);
  std::uint64_t total = plan.epoch_length * num_epochs;
  for (std::size_t m = 1; m <= num_epochs; ++m) {
    const std::uint64_t n = ceil_count(per_epoch * std::pow(growth, static_cast<double>(m)));
    plan.recenter_sizes.push_back(n);
    if (total > std::numeric_limits<std::uint64_t>::max() - n) {
      throw ValidationError("total sample count overflows");
    }
    total += n;
  }
  plan.total_samples = total;
  return plan;
}

std::size_t epochs_needed(double epsilon, double b0, double base) {
  check_positive(epsilon, "epsilon");
  if (!(b0 >= 0.0) || !std::isfinite(b0)) throw ValidationError("b0 must be finite and >= 0");
  if (!(base > 1.0)) throw ValidationError("base must be > 1");
  if (b0 <= epsilon) return 1;

  // Start from the logarithm, then settle on the exact smallest M with
  // b0 / C^M <= epsilon to avoid off-by-one from rounding in the ratio of logs.
  auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(b0 / epsilon) / std::log(base))));
  while (m > 1 && b0 / std::pow(base, static_cast<double>(m - 1)) <= epsilon) --m;
  while (b0 / std::pow(base, static_cast<double>(m)) > epsilon) ++m;
  return m;
}

double corollary_budget_value(double gamma, double delta, std::size_t num_pairs, double epsilon,
                              double b0, double c, double c_prime) {
  check_budget_inputs(gamma, delta, num_pairs, epsilon);
  check_positive(c, "c");
  check_positive(c_prime, "c_prime");
  const std::size_t epochs = epochs_needed(epsilon, b0);
  const double gap = 1.0 - gamma;
  const double md = 8.0 * static_cast<double>(epochs) * static_cast<double>(num_pairs);
  const double ratio = b0 / epsilon;
  const double epoch_term =
      c * clamped_log(md / (gap * delta)) / (gap * gap * gap) * std::max(std::log(ratio), 0.0);
  const double recenter_term = c_prime * ratio * ratio * clamped_log(md / delta) / (gap * gap);
  return epoch_term + recenter_term;
}

std::uint64_t corollary_budget(double gamma, double delta, std::size_t num_pairs, double epsilon,
                               double b0, double c, double c_prime) {
  return ceil_count(corollary_budget_value(gamma, delta, num_pairs, epsilon, b0, c, c_prime));
}

double t_max_value(double gamma, double delta, std::size_t num_pairs, double epsilon,
                   double r_max, double c) {
  check_budget_inputs(gamma, delta, num_pairs, epsilon);
  check_positive(c, "c");
  if (!(r_max >= 0.0)) throw ValidationError("r_max must be >= 0");
  const double gap = 1.0 - gamma;
  const double scale = r_max / epsilon;
  return c * scale * scale * clamped_log(static_cast<double>(num_pairs) / (gap * delta)) *
         clamped_log(1.0 / (gap * epsilon)) / (gap * gap * gap);
}

std::uint64_t t_max(double gamma, double delta, std::size_t num_pairs, double epsilon,
                    double r_max, double c) {
  return ceil_count(t_max_value(gamma, delta, num_pairs, epsilon, r_max, c));
}

double worst_case_budget_value(double gamma, double delta, std::size_t num_pairs, double epsilon,
                               double r_max, double c) {
  return t_max_value(gamma, delta, num_pairs, epsilon, r_max, c) / (1.0 - gamma);
}

std::uint64_t worst_case_budget(double gamma, double delta, std::size_t num_pairs,
                                double epsilon, double r_max, double c) {
  return ceil_count(worst_case_budget_value(gamma, delta, num_pairs, epsilon, r_max, c));
}

double uniform_b0_bound(double gamma, double r_max) {
  return r_max * (2.0 / (1.0 - gamma) + 1.0);
}

}  // namespace vrql::bounds
