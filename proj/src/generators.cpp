#include "vrql/generators.hpp"

#include "vrql/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace vrql {

using nlohmann::json;

namespace {

TabularMdp empty_mdp(const GeneratorParams& params, std::size_t states, std::size_t actions) {
  TabularMdp mdp;
  mdp.num_states = states;
  mdp.num_actions = actions;
  mdp.kernel.assign(states * actions * states, 0.0);
  mdp.reward = QFunction::Zero(states, actions);
  mdp.discount = params.gamma;
  mdp.r_max = params.r_max;
  return mdp;
}

double& kernel_at(TabularMdp& mdp, std::size_t s, std::size_t a, std::size_t next) {
  return mdp.kernel[(s * mdp.num_actions + a) * mdp.num_states + next];
}

// Flat Dirichlet draw: normalized unit exponentials.
std::vector<double> simplex_point(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> exponential(1.0);
  std::vector<double> weights(n);
  double total = 0.0;
  for (double& w : weights) {
    w = exponential(rng);
    total += w;
  }
  for (double& w : weights) w /= total;
  return weights;
}

void fill_uniform_rewards(TabularMdp& mdp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-mdp.r_max, mdp.r_max);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) mdp.reward(s, a) = uniform(rng);
  }
}

TabularMdp random_dense(const GeneratorParams& params, std::mt19937_64& rng) {
  TabularMdp mdp = empty_mdp(params, params.num_states, params.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      const auto weights = simplex_point(mdp.num_states, rng);
      for (std::size_t next = 0; next < mdp.num_states; ++next) kernel_at(mdp, s, a, next) = weights[next];
    }
  }
  fill_uniform_rewards(mdp, rng);
  return mdp;
}

TabularMdp garnet(const GeneratorParams& params, std::mt19937_64& rng) {
  if (params.branching == 0 || params.branching > params.num_states) {
    throw ValidationError("garnet branching must lie in [1, num_states]");
  }
  TabularMdp mdp = empty_mdp(params, params.num_states, params.num_actions);
  std::vector<std::size_t> states(mdp.num_states);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      std::iota(states.begin(), states.end(), std::size_t{0});
      // Partial Fisher-Yates: the first `branching` entries are the successors.
      for (std::size_t i = 0; i < params.branching; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, mdp.num_states - 1);
        std::swap(states[i], states[pick(rng)]);
      }
      const auto weights = simplex_point(params.branching, rng);
      for (std::size_t i = 0; i < params.branching; ++i) kernel_at(mdp, s, a, states[i]) = weights[i];
    }
  }
  fill_uniform_rewards(mdp, rng);
  return mdp;
}

TabularMdp chain(const GeneratorParams& params) {
  if (params.num_actions != 2) throw ValidationError("chain has exactly two actions (left, right)");
  const double p = params.success_prob;
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("chain success_prob must lie in [0, 1]");
  TabularMdp mdp = empty_mdp(params, params.num_states, 2);
  const std::size_t last = mdp.num_states - 1;
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    const std::size_t left = s == 0 ? 0 : s - 1;
    const std::size_t right = s == last ? last : s + 1;
    kernel_at(mdp, s, 0, left) += p;
    kernel_at(mdp, s, 0, right) += 1.0 - p;
    kernel_at(mdp, s, 1, right) += p;
    kernel_at(mdp, s, 1, left) += 1.0 - p;
  }
  mdp.reward.row(static_cast<Eigen::Index>(last)).setConstant(params.r_max);
  return mdp;
}

TabularMdp hard_single_action(const GeneratorParams& params) {
  const double gamma = params.gamma;
  const double stay = params.stay_prob.value_or((4.0 * gamma - 1.0) / (3.0 * gamma));
  if (!(stay >= 0.0 && stay <= 1.0)) {
    std::ostringstream msg;
    msg << "hard_single_action stay probability " << stay
        << " outside [0, 1]; the default needs gamma >= 1/4";
    throw ValidationError(msg.str());
  }
  TabularMdp mdp = empty_mdp(params, 2, 1);
  kernel_at(mdp, 0, 0, 0) = stay;
  kernel_at(mdp, 0, 0, 1) = 1.0 - stay;
  kernel_at(mdp, 1, 0, 1) = 1.0;
  mdp.reward(0, 0) = params.r_max;
  return mdp;
}

}  // namespace

const char* to_string(GeneratorKind kind) noexcept {
  switch (kind) {
    case GeneratorKind::RandomDense:
      return "random_dense";
    case GeneratorKind::Garnet:
      return "garnet";
    case GeneratorKind::Chain:
      return "chain";
    case GeneratorKind::HardSingleAction:
      return "hard_single_action";
  }
  return "unknown";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
  for (auto kind : {GeneratorKind::RandomDense, GeneratorKind::Garnet, GeneratorKind::Chain,
                    GeneratorKind::HardSingleAction}) {
    if (name == to_string(kind)) return kind;
  }
  throw ValidationError("unknown generator kind `" + name + "`");
}

TabularMdp generate_mdp(const GeneratorParams& params) {
  if (params.num_states == 0 || params.num_actions == 0) {
    throw ValidationError("generator needs at least one state and one action");
  }
  if (!(params.r_max >= 0.0)) throw ValidationError("r_max must be >= 0");

  std::mt19937_64 rng(params.seed);
  TabularMdp mdp;
  switch (params.kind) {
    case GeneratorKind::RandomDense:
      mdp = random_dense(params, rng);
      break;
    case GeneratorKind::Garnet:
      mdp = garnet(params, rng);
      break;
    case GeneratorKind::Chain:
      mdp = chain(params);
      break;
    case GeneratorKind::HardSingleAction:
      mdp = hard_single_action(params);
      break;
  }
  validate_mdp(mdp);
  return mdp;
}

GeneratorParams generator_params_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("generator params must be a JSON object");
  GeneratorParams params;
  try {
    params.kind = generator_kind_from_string(doc.at("kind").get<std::string>());
    if (params.kind == GeneratorKind::Chain) params.num_actions = 2;
    if (params.kind == GeneratorKind::HardSingleAction) {
      params.num_states = 2;
      params.num_actions = 1;
    }
    params.num_states = doc.value("num_states", params.num_states);
    params.num_actions = doc.value("num_actions", params.num_actions);
    params.r_max = doc.value("r_max", params.r_max);
    params.gamma = doc.value("gamma", params.gamma);
    params.seed = doc.value("seed", params.seed);
    params.branching = doc.value("branching", params.branching);
    params.success_prob = doc.value("success_prob", params.success_prob);
    if (doc.contains("stay_prob")) params.stay_prob = doc.at("stay_prob").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("generator params: ") + e.what());
  }
  return params;
}

json generator_params_to_json(const GeneratorParams& params) {
  json doc{{"kind", to_string(params.kind)},
           {"num_states", params.num_states},
           {"num_actions", params.num_actions},
           {"r_max", params.r_max},
           {"gamma", params.gamma},
           {"seed", params.seed},
           {"branching", params.branching},
           {"success_prob", params.success_prob}};
  if (params.stay_prob) doc["stay_prob"] = *params.stay_prob;
  return doc;
}

}  // namespace vrql
