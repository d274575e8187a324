#include "vrql/experiment.hpp"

#include "vrql/bounds.hpp"
#include "vrql/errors.hpp"
#include "vrql/mdp_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace vrql {

using nlohmann::json;

namespace {

StepRule step_rule_from_json(const json& doc) {
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "rescaled_linear") return StepRule::rescaled_linear();
  if (kind == "polynomial") return StepRule::polynomial(doc.at("omega").get<double>());
  if (kind == "constant") return StepRule::constant(doc.at("alpha").get<double>());
  throw ValidationError("unknown step rule `" + kind + "`");
}

LoopRecording recording_from_json(const json& doc) {
  LoopRecording recording;
  recording.record_every = doc.value("record_every", recording.record_every);
  recording.epoch_length = doc.value("epoch_length", recording.epoch_length);
  return recording;
}

AlgorithmSpec algorithm_from_json(const json& doc) {
  AlgorithmSpec spec;
  const auto kind = doc.at("kind").get<std::string>();
  spec.name = doc.value("name", kind);
  if (kind == "vrql") {
    VrqlSpec p;
    if (doc.contains("num_epochs")) p.num_epochs = doc.at("num_epochs").get<std::size_t>();
    if (doc.contains("epoch_length")) p.epoch_length = doc.at("epoch_length").get<std::uint64_t>();
    if (doc.contains("recenter_sizes")) {
      p.recenter_sizes = doc.at("recenter_sizes").get<std::vector<std::uint64_t>>();
    }
    p.base = doc.value("base", p.base);
    p.delta = doc.value("delta", p.delta);
    p.c1 = doc.value("c1", p.c1);
    p.c2 = doc.value("c2", p.c2);
    p.record_inner = doc.value("record_inner", p.record_inner);
    spec.params = p;
  } else if (kind == "ordinary") {
    OrdinarySpec p;
    p.iters = doc.at("iters").get<std::uint64_t>();
    if (doc.contains("step")) p.step = step_rule_from_json(doc.at("step"));
    p.recording = recording_from_json(doc);
    spec.params = p;
  } else if (kind == "oracle_vr") {
    OracleVrSpec p;
    p.iters = doc.at("iters").get<std::uint64_t>();
    if (doc.contains("step")) p.step = step_rule_from_json(doc.at("step"));
    p.recording = recording_from_json(doc);
    spec.params = p;
  } else if (kind == "two_phase") {
    TwoPhaseSpec p;
    if (doc.contains("epsilon")) p.epsilon = doc.at("epsilon").get<double>();
    p.delta = doc.value("delta", p.delta);
    p.c_epochs = doc.value("c_epochs", p.c_epochs);
    p.c1 = doc.value("c1", p.c1);
    p.c2 = doc.value("c2", p.c2);
    p.base = doc.value("base", p.base);
    p.record_inner = doc.value("record_inner", p.record_inner);
    spec.params = p;
  } else {
    throw ValidationError("unknown algorithm kind `" + kind + "`");
  }
  return spec;
}

TabularMdp base_mdp(const ExperimentSpec& spec, double gamma) {
  if (const auto* params = std::get_if<GeneratorParams>(&spec.mdp_source)) {
    GeneratorParams copy = *params;
    copy.gamma = gamma;
    return generate_mdp(copy);
  }
  TabularMdp mdp = load_mdp(std::get<std::filesystem::path>(spec.mdp_source));
  mdp.discount = gamma;
  validate_mdp(mdp);
  return mdp;
}

struct TrialContext {
  const GammaReference* reference;
  const AlgorithmSpec* algorithm;
  std::size_t trial;
  std::uint64_t seed;
};

double require_epsilon(const std::optional<double>& epsilon, const char* who) {
  if (!epsilon) throw ValidationError(std::string(who) + " needs an epsilon target");
  return *epsilon;
}

RunTrace run_trial(const TrialContext& ctx) {
  const GammaReference& ref = *ctx.reference;
  const TabularMdp& mdp = ref.mdp;

  RunTrace trace = std::visit(
      [&](const auto& p) -> RunTrace {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, VrqlSpec>) {
          std::size_t epochs = 0;
          if (p.num_epochs) {
            epochs = *p.num_epochs;
          } else if (p.recenter_sizes) {
            epochs = p.recenter_sizes->size();
          } else {
            epochs = bounds::epochs_needed(require_epsilon(ref.epsilon, "vrql without num_epochs"),
                                           ref.complexity.b0, p.base);
          }
          VrqlConfig config = planned_config(mdp, epochs, p.delta, p.c1, p.c2, p.base, ctx.seed);
          if (p.epoch_length) config.epoch_length = *p.epoch_length;
          if (p.recenter_sizes) config.recenter_sizes = *p.recenter_sizes;
          config.record_inner = p.record_inner;
          return vr_q_learning(mdp, config, ref.theta_star).trace;
        } else if constexpr (std::is_same_v<T, OrdinarySpec>) {
          GenerativeSampler sampler = build_sampler(mdp, ctx.seed);
          return ordinary_q_learning(mdp, p.iters, p.step, sampler, ref.theta_star, p.recording).trace;
        } else if constexpr (std::is_same_v<T, OracleVrSpec>) {
          GenerativeSampler sampler = build_sampler(mdp, ctx.seed);
          return oracle_vr_q_learning(mdp, p.iters, p.step, sampler, ref.theta_star, p.recording)
              .trace;
        } else {
          TwoPhaseOptions options;
          options.epsilon = p.epsilon ? *p.epsilon : require_epsilon(ref.epsilon, "two_phase");
          options.delta = p.delta;
          options.c_epochs = p.c_epochs;
          options.c1 = p.c1;
          options.c2 = p.c2;
          options.base = p.base;
          options.seed = ctx.seed;
          options.record_inner = p.record_inner;
          return two_phase_minimax(mdp, options, ref.theta_star).trace;
        }
      },
      ctx.algorithm->params);

  trace.algorithm_tag = ctx.algorithm->name;
  trace.gamma = ref.gamma;
  trace.trial = ctx.trial;
  return trace;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (trials == 0) throw ValidationError("trials must be >= 1");
  if (algorithms.empty()) throw ValidationError("experiment lists no algorithms");
  for (const AlgorithmSpec& a : algorithms) {
    if (a.name.empty() || a.name.find_first_of(",\r\n") != std::string::npos) {
      throw ValidationError("algorithm name `" + a.name + "` must be nonempty without commas");
    }
  }
  if (gammas.empty()) throw ValidationError("experiment lists no discount factors");
  for (double g : gammas) {
    if (!(g > 0.0 && g < 1.0)) throw ValidationError("every gamma must lie in (0, 1)");
  }
  if (epsilon_target && !(*epsilon_target > 0.0)) throw ValidationError("epsilon_target must be > 0");
  if (epsilon_relative && !(*epsilon_relative > 0.0)) {
    throw ValidationError("epsilon_relative must be > 0");
  }
}

ExperimentSpec experiment_spec_from_json(const json& doc) {
  ExperimentSpec spec;
  try {
    const json& source = doc.at("mdp");
    if (source.contains("file")) {
      spec.mdp_source = std::filesystem::path(source.at("file").get<std::string>());
    } else {
      spec.mdp_source = generator_params_from_json(source.at("generator"));
    }
    for (const json& entry : doc.at("algorithms")) spec.algorithms.push_back(algorithm_from_json(entry));
    spec.gammas = doc.at("gammas").get<std::vector<double>>();
    spec.trials = doc.value("trials", spec.trials);
    spec.base_seed = doc.value("base_seed", spec.base_seed);
    spec.output_path = doc.value("output", spec.output_path);
    if (doc.contains("epsilon_target")) spec.epsilon_target = doc.at("epsilon_target").get<double>();
    if (doc.contains("epsilon_relative")) {
      spec.epsilon_relative = doc.at("epsilon_relative").get<double>();
    }
    spec.workers = doc.value("workers", spec.workers);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  result.references.reserve(spec.gammas.size());
  for (double gamma : spec.gammas) {
    GammaReference ref;
    ref.gamma = gamma;
    ref.mdp = base_mdp(spec, gamma);
    ref.theta_star = solve_optimal_q(ref.mdp);
    ref.complexity = instance_complexity(ref.mdp, ref.theta_star);
    if (spec.epsilon_target) {
      ref.epsilon = spec.epsilon_target;
    } else if (spec.epsilon_relative) {
      ref.epsilon = *spec.epsilon_relative * ref.complexity.theta_star_norm;
    }
    result.references.push_back(std::move(ref));
  }

  std::vector<TrialContext> tasks;
  for (const GammaReference& ref : result.references) {
    for (const AlgorithmSpec& algorithm : spec.algorithms) {
      for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        tasks.push_back({&ref, &algorithm, trial, spec.base_seed + trial});
      }
    }
  }

  // Each slot is written by exactly one worker; output order is the task order.
  result.traces.resize(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        result.traces[i] = run_trial(tasks[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::size_t workers = spec.workers != 0 ? spec.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, tasks.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  if (!spec.output_path.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, result.traces);
    write_text_file(spec.output_path, csv.str());
  }
  return result;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buffer, end);
}

void write_trace_csv(std::ostream& out, const std::vector<RunTrace>& traces) {
  out << kTraceCsvHeader << '\n';
  for (const RunTrace& trace : traces) {
    const std::string prefix =
        trace.algorithm_tag + ',' + format_double(trace.gamma) + ',' + std::to_string(trace.trial) + ',';
    for (const TraceRecord& r : trace.records) {
      out << prefix << r.epoch << ',' << to_string(r.phase) << ',' << r.cumulative_samples << ','
          << format_double(r.linf_error) << '\n';
    }
  }
}

}  // namespace vrql
