#pragma once

#include "vrql/algorithms.hpp"
#include "vrql/generators.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vrql {

/// Exact header of every trace CSV.
inline constexpr const char* kTraceCsvHeader = "algorithm,gamma,trial,epoch,phase,samples,linf_error";

/// Epoch-structured VR Q-learning. The epoch count is `num_epochs` when set,
/// otherwise epochs_needed(epsilon target, b0, base). K and {N_m} come from the
/// planner unless given explicitly.
struct VrqlSpec {
  std::optional<std::size_t> num_epochs;
  std::optional<std::uint64_t> epoch_length;
  std::optional<std::vector<std::uint64_t>> recenter_sizes;
  double base = 2.0;
  double delta = 0.1;
  double c1 = 1.0;
  double c2 = 1.0;
  bool record_inner = false;
};

struct OrdinarySpec {
  std::uint64_t iters = 1000;
  StepRule step = StepRule::rescaled_linear();
  LoopRecording recording;
};

struct OracleVrSpec {
  std::uint64_t iters = 1000;
  StepRule step = StepRule::constant(0.5);
  LoopRecording recording;
};

/// epsilon falls back to the experiment's target when unset.
struct TwoPhaseSpec {
  std::optional<double> epsilon;
  double delta = 0.1;
  double c_epochs = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double base = 2.0;
  bool record_inner = false;
};

struct AlgorithmSpec {
  std::string name;  // CSV `algorithm` column; defaults to the kind name
  std::variant<VrqlSpec, OrdinarySpec, OracleVrSpec, TwoPhaseSpec> params;
};

struct ExperimentSpec {
  std::variant<std::filesystem::path, GeneratorParams> mdp_source;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<double> gammas;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::string output_path;
  /// Absolute accuracy target.
  std::optional<double> epsilon_target;
  /// Target as a fraction of ||theta*||_inf; used when epsilon_target is unset.
  std::optional<double> epsilon_relative;
  /// 0 means hardware concurrency.
  std::size_t workers = 0;

  void validate() const;
};

ExperimentSpec experiment_spec_from_json(const nlohmann::json& doc);

/// Per-gamma reference quantities computed once per experiment.
struct GammaReference {
  double gamma = 0.0;
  TabularMdp mdp;
  QFunction theta_star;
  InstanceComplexity complexity;
  std::optional<double> epsilon;
};

struct ExperimentResult {
  std::vector<GammaReference> references;
  /// Ordered by (gamma, algorithm, trial) as listed in the spec.
  std::vector<RunTrace> traces;
};

/// Runs every (gamma, algorithm, trial) with seed base_seed + trial, then
/// writes the CSV to spec.output_path when it is nonempty.
ExperimentResult run_experiment(const ExperimentSpec& spec);

void write_trace_csv(std::ostream& out, const std::vector<RunTrace>& traces);
std::string format_double(double value);

}  // namespace vrql
