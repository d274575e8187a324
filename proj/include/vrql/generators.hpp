#pragma once

#include "vrql/mdp.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace vrql {

enum class GeneratorKind { RandomDense, Garnet, Chain, HardSingleAction };

const char* to_string(GeneratorKind kind) noexcept;
GeneratorKind generator_kind_from_string(const std::string& name);

/// Parameters for the synthetic MDP families.
///
///  - random_dense: every kernel row drawn uniformly from the simplex.
///  - garnet: each (s, a) has `branching` distinct uniformly chosen successors
///    with simplex weights.
///  - chain: birth-death chain over num_states states with actions
///    {0: left, 1: right}; the intended move succeeds with `success_prob`,
///    otherwise the agent moves the other way. Reward r_max in the last state.
///  - hard_single_action: two states, one action. State 0 pays r_max and
///    stays with probability `stay_prob` (default (4 gamma - 1) / (3 gamma)),
///    otherwise falls into the absorbing zero-reward state 1.
///
/// random_dense and garnet rewards are uniform on [-r_max, r_max].
struct GeneratorParams {
  GeneratorKind kind = GeneratorKind::Garnet;
  std::size_t num_states = 10;
  std::size_t num_actions = 3;
  double r_max = 1.0;
  double gamma = 0.9;
  std::uint64_t seed = 0;
  std::size_t branching = 3;
  double success_prob = 1.0;
  std::optional<double> stay_prob;
};

/// Result always passes validate_mdp. Throws ValidationError on bad params.
TabularMdp generate_mdp(const GeneratorParams& params);

GeneratorParams generator_params_from_json(const nlohmann::json& doc);
nlohmann::json generator_params_to_json(const GeneratorParams& params);

}  // namespace vrql
