// vrql: exact solves, experiment runs, sample-size planning, MDP generation
// and trace summaries for variance-reduced Q-learning.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error.

#include "vrql/bounds.hpp"
#include "vrql/errors.hpp"
#include "vrql/experiment.hpp"
#include "vrql/generators.hpp"
#include "vrql/mdp_io.hpp"
#include "vrql/summary.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

void emit(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    vrql::write_text_file(out_path, text);
  }
}

json plan_to_json(const vrql::bounds::ParameterPlan& plan) {
  return json{{"gamma", plan.gamma},
              {"delta", plan.delta},
              {"num_pairs", plan.num_pairs},
              {"num_epochs", plan.num_epochs},
              {"base", plan.base},
              {"c1", plan.c1},
              {"c2", plan.c2},
              {"epoch_length", plan.epoch_length},
              {"recenter_sizes", plan.recenter_sizes},
              {"total_samples", plan.total_samples}};
}

struct SolveArgs {
  std::string mdp;
  double tol = vrql::kDefaultSolverTolerance;
  std::string out;
};

void cmd_solve(const SolveArgs& args) {
  const vrql::TabularMdp mdp = vrql::load_mdp(args.mdp);
  const vrql::QFunction theta = vrql::solve_optimal_q(mdp, args.tol);
  const vrql::InstanceComplexity complexity = vrql::instance_complexity(mdp, theta);
  emit(json{{"gamma", mdp.discount},
            {"tolerance", args.tol},
            {"theta_star", vrql::qfunction_to_json(theta)},
            {"greedy_policy", vrql::greedy_policy(theta).action},
            {"sigma_star", vrql::qfunction_to_json(complexity.sigma_star)},
            {"theta_star_norm", complexity.theta_star_norm},
            {"b0", complexity.b0}},
       args.out);
}

struct RunArgs {
  std::string spec;
  std::string out;
  std::optional<std::size_t> workers;
};

void cmd_run(const RunArgs& args) {
  vrql::ExperimentSpec spec = vrql::experiment_spec_from_json(vrql::read_json_file(args.spec));
  if (!args.out.empty()) spec.output_path = args.out;
  if (args.workers) spec.workers = *args.workers;
  if (spec.output_path.empty()) throw vrql::ValidationError("run: no output path (`output` or --out)");
  const auto result = vrql::run_experiment(spec);
  std::cerr << "wrote " << result.traces.size() << " traces to " << spec.output_path << "\n";
}

struct PlanArgs {
  double gamma = 0.9;
  double delta = 0.1;
  std::optional<std::size_t> pairs;
  std::optional<std::size_t> epochs;
  std::optional<double> epsilon;
  std::optional<double> b0;
  std::optional<double> r_max;
  std::string mdp;
  double c1 = 1.0;
  double c2 = 1.0;
  double c = 1.0;
  double c_prime = 1.0;
  double base = 2.0;
  std::string out;
};

void cmd_plan(PlanArgs args) {
  if (!args.mdp.empty()) {
    const vrql::TabularMdp mdp = vrql::load_mdp(args.mdp);
    args.gamma = mdp.discount;
    args.pairs = args.pairs.value_or(mdp.num_pairs());
    args.r_max = args.r_max.value_or(mdp.r_max);
    if (!args.b0) args.b0 = vrql::instance_complexity(mdp, vrql::solve_optimal_q(mdp)).b0;
  }
  if (!args.pairs) throw vrql::ValidationError("plan: give --pairs or --mdp");

  std::size_t epochs = 0;
  if (args.epochs) {
    epochs = *args.epochs;
  } else if (args.epsilon && args.b0) {
    epochs = vrql::bounds::epochs_needed(*args.epsilon, *args.b0, args.base);
  } else {
    throw vrql::ValidationError("plan: give --epochs, or --epsilon with --b0 (or --mdp)");
  }

  json doc = plan_to_json(vrql::bounds::plan_parameters(args.gamma, args.delta, *args.pairs, epochs,
                                                        args.c1, args.c2, args.base));
  if (args.epsilon) {
    json budgets;
    if (args.b0) {
      budgets["epochs_needed"] = vrql::bounds::epochs_needed(*args.epsilon, *args.b0, args.base);
      budgets["corollary_budget"] = vrql::bounds::corollary_budget(
          args.gamma, args.delta, *args.pairs, *args.epsilon, *args.b0, args.c, args.c_prime);
    }
    if (args.r_max) {
      budgets["worst_case_budget"] = vrql::bounds::worst_case_budget(
          args.gamma, args.delta, *args.pairs, *args.epsilon, *args.r_max, args.c);
      budgets["t_max"] =
          vrql::bounds::t_max(args.gamma, args.delta, *args.pairs, *args.epsilon, *args.r_max, args.c);
    }
    doc["budgets"] = budgets;
  }
  emit(doc, args.out);
}

struct GenerateArgs {
  std::string params_file;
  std::string kind = "garnet";
  std::optional<std::size_t> states;
  std::optional<std::size_t> actions;
  std::optional<std::size_t> branching;
  std::optional<double> r_max;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  std::optional<double> success_prob;
  std::optional<double> stay_prob;
  std::string out;
};

void cmd_generate(const GenerateArgs& args) {
  json doc = args.params_file.empty() ? json{{"kind", args.kind}}
                                      : vrql::read_json_file(args.params_file);
  if (args.states) doc["num_states"] = *args.states;
  if (args.actions) doc["num_actions"] = *args.actions;
  if (args.branching) doc["branching"] = *args.branching;
  if (args.r_max) doc["r_max"] = *args.r_max;
  if (args.gamma) doc["gamma"] = *args.gamma;
  if (args.seed) doc["seed"] = *args.seed;
  if (args.success_prob) doc["success_prob"] = *args.success_prob;
  if (args.stay_prob) doc["stay_prob"] = *args.stay_prob;
  emit(vrql::mdp_to_json(vrql::generate_mdp(vrql::generator_params_from_json(doc))), args.out);
}

struct SummarizeArgs {
  std::string csv;
  double epsilon = 0.0;
  std::string out;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-reduced Q-learning toolkit"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve for the optimal Q-function of an MDP");
  solve_cmd->add_option("--mdp", solve.mdp, "MDP JSON document")->required();
  solve_cmd->add_option("--tol", solve.tol, "Accuracy of theta* in sup norm");
  solve_cmd->add_option("-o,--out", solve.out, "Output path (default stdout)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment spec and write a trace CSV");
  run_cmd->add_option("--spec", run.spec, "Experiment spec JSON")->required();
  run_cmd->add_option("-o,--out", run.out, "CSV path (overrides the spec)");
  run_cmd->add_option("--workers", run.workers, "Concurrent trials");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Epoch length, recentering sizes and sample budgets");
  plan_cmd->add_option("--gamma", plan.gamma, "Discount factor");
  plan_cmd->add_option("--delta", plan.delta, "Failure probability");
  plan_cmd->add_option("--pairs", plan.pairs, "Number of state-action pairs D");
  plan_cmd->add_option("--epochs", plan.epochs, "Number of epochs M");
  plan_cmd->add_option("--epsilon", plan.epsilon, "Target sup-norm accuracy");
  plan_cmd->add_option("--b0", plan.b0, "Instance complexity b0");
  plan_cmd->add_option("--r-max", plan.r_max, "Reward bound");
  plan_cmd->add_option("--mdp", plan.mdp, "Take gamma, D, r_max and b0 from an MDP document");
  plan_cmd->add_option("--c1", plan.c1, "Epoch length constant");
  plan_cmd->add_option("--c2", plan.c2, "Recentering size constant");
  plan_cmd->add_option("--c", plan.c, "Budget constant c");
  plan_cmd->add_option("--c-prime", plan.c_prime, "Budget constant c'");
  plan_cmd->add_option("--base", plan.base, "Per-epoch contraction base C");
  plan_cmd->add_option("-o,--out", plan.out, "Output path (default stdout)");

  GenerateArgs generate;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a synthetic MDP document");
  gen_cmd->add_option("--params", generate.params_file, "GeneratorParams JSON");
  gen_cmd->add_option("--kind", generate.kind, "random_dense | garnet | chain | hard_single_action");
  gen_cmd->add_option("--states", generate.states);
  gen_cmd->add_option("--actions", generate.actions);
  gen_cmd->add_option("--branching", generate.branching);
  gen_cmd->add_option("--r-max", generate.r_max);
  gen_cmd->add_option("--gamma", generate.gamma);
  gen_cmd->add_option("--seed", generate.seed);
  gen_cmd->add_option("--success-prob", generate.success_prob, "chain: intended-move probability");
  gen_cmd->add_option("--stay-prob", generate.stay_prob, "hard_single_action: P(stay)");
  gen_cmd->add_option("-o,--out", generate.out, "Output path (default stdout)");

  SummarizeArgs summarize;
  auto* sum_cmd = app.add_subcommand("summarize", "Summarize a trace CSV at an accuracy target");
  sum_cmd->add_option("--csv", summarize.csv, "Trace CSV")->required();
  sum_cmd->add_option("--epsilon", summarize.epsilon, "Accuracy target")->required();
  sum_cmd->add_option("-o,--out", summarize.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*solve_cmd) cmd_solve(solve);
    if (*run_cmd) cmd_run(run);
    if (*plan_cmd) cmd_plan(plan);
    if (*gen_cmd) cmd_generate(generate);
    if (*sum_cmd) emit(vrql::summarize_csv(summarize.csv, summarize.epsilon), summarize.out);
  } catch (const vrql::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const vrql::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
