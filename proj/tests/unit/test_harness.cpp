#include "test_support.hpp"

#include "vrql/bounds.hpp"
#include "vrql/errors.hpp"
#include "vrql/experiment.hpp"
#include "vrql/generators.hpp"
#include "vrql/mdp_io.hpp"
#include "vrql/summary.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vrql;
using namespace vrql::testing;
using nlohmann::json;

namespace {

std::filesystem::path scratch_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "vrql_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunTrace make_trace(const std::string& tag, double gamma, std::size_t trial,
                    std::vector<std::pair<std::uint64_t, double>> points) {
  RunTrace trace;
  trace.algorithm_tag = tag;
  trace.gamma = gamma;
  trace.trial = trial;
  std::size_t epoch = 0;
  for (const auto& [samples, err] : points) trace.add(samples, err, epoch++, TracePhase::EpochEnd);
  return trace;
}

ExperimentSpec small_spec() {
  GeneratorParams params;
  params.kind = GeneratorKind::Garnet;
  params.num_states = 5;
  params.num_actions = 2;
  params.branching = 2;
  params.seed = 3;
  ExperimentSpec spec;
  spec.mdp_source = params;
  spec.gammas = {0.5, 0.7};
  spec.trials = 3;
  spec.base_seed = 40;
  spec.epsilon_relative = 0.05;
  VrqlSpec vr;
  vr.c1 = 0.2;
  vr.c2 = 0.2;
  OrdinarySpec ord;
  ord.iters = 300;
  ord.recording.record_every = 25;
  spec.algorithms = {{"vrql", vr}, {"ordinary", ord}};
  return spec;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("every generator family produces valid MDPs") {
  for (const auto kind : {GeneratorKind::RandomDense, GeneratorKind::Garnet, GeneratorKind::Chain,
                          GeneratorKind::HardSingleAction}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      GeneratorParams params;
      params.kind = kind;
      params.seed = seed;
      params.num_states = kind == GeneratorKind::HardSingleAction ? 2 : 7;
      params.num_actions = kind == GeneratorKind::HardSingleAction ? 1 : 2;
      params.success_prob = 0.8;
      params.r_max = 2.5;
      const TabularMdp mdp = generate_mdp(params);
      CHECK_NOTHROW(validate_mdp(mdp));
      CHECK(mdp.r_max == 2.5);
    }
  }
}

TEST_CASE("garnet rows have exactly `branching` successors") {
  const TabularMdp mdp = garnet_mdp(10, 3, 4, 0.9, 1);
  for (std::size_t s = 0; s < 10; ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      const auto row = mdp.row(s, a);
      CHECK(std::count_if(row.begin(), row.end(), [](double p) { return p > 0.0; }) == 4);
    }
  }
  const TabularMdp dense = garnet_mdp(6, 2, 6, 0.9, 2);
  for (double p : dense.kernel) CHECK(p > 0.0);
}

TEST_CASE("generators are deterministic in their seed") {
  GeneratorParams params;
  params.kind = GeneratorKind::RandomDense;
  params.seed = 77;
  const json a = mdp_to_json(generate_mdp(params));
  const json b = mdp_to_json(generate_mdp(params));
  CHECK(a.dump() == b.dump());
  params.seed = 78;
  CHECK(mdp_to_json(generate_mdp(params)).dump() != a.dump());
}

TEST_CASE("deterministic two-state chain has zero sigma") {
  GeneratorParams params;
  params.kind = GeneratorKind::Chain;
  params.num_states = 2;
  params.num_actions = 2;
  params.success_prob = 1.0;
  const TabularMdp mdp = generate_mdp(params);
  CHECK_NOTHROW(validate_mdp(mdp));
  CHECK(sigma_star(mdp, solve_optimal_q(mdp)).maxCoeff() == 0.0);
}

TEST_CASE("hard_single_action default stay probability") {
  GeneratorParams params;
  params.kind = GeneratorKind::HardSingleAction;
  params.num_states = 2;
  params.num_actions = 1;
  params.gamma = 0.9;
  const TabularMdp mdp = generate_mdp(params);
  const double p = (4 * 0.9 - 1) / (3 * 0.9);
  CHECK(mdp.transition(0, 0, 0) == doctest::Approx(p));
  CHECK(mdp.transition(1, 0, 1) == 1.0);
  // The noise level dominates the (1 - gamma) scale of theta*.
  const InstanceComplexity ic = instance_complexity(mdp, solve_optimal_q(mdp));
  CHECK(ic.sigma_star.maxCoeff() > ic.theta_star_norm * (1 - 0.9));
}

TEST_CASE("generator parameter validation and JSON") {
  GeneratorParams params;
  params.kind = GeneratorKind::Garnet;
  params.branching = 0;
  CHECK_THROWS_AS(generate_mdp(params), ValidationError);
  params.branching = 11;
  CHECK_THROWS_AS(generate_mdp(params), ValidationError);
  params.branching = 3;
  params.gamma = 1.0;
  CHECK_THROWS_AS(generate_mdp(params), ValidationError);

  params.gamma = 0.8;
  params.seed = 12;
  const GeneratorParams back = generator_params_from_json(generator_params_to_json(params));
  CHECK(mdp_to_json(generate_mdp(back)).dump() == mdp_to_json(generate_mdp(params)).dump());
  CHECK_THROWS_AS(generator_params_from_json(json{{"kind", "torus"}}), ValidationError);
}

TEST_CASE("experiment spec parsing") {
  const json doc = json::parse(R"({
    "mdp": {"generator": {"kind": "garnet", "num_states": 4, "num_actions": 2, "branching": 2}},
    "algorithms": [
      {"kind": "vrql", "num_epochs": 2, "c1": 0.5},
      {"kind": "ordinary", "name": "ql-poly", "iters": 10, "step": {"kind": "polynomial", "omega": 0.8}},
      {"kind": "oracle_vr", "iters": 10, "step": {"kind": "constant", "alpha": 0.5}, "epoch_length": 5},
      {"kind": "two_phase", "epsilon": 0.2}
    ],
    "gammas": [0.5],
    "trials": 2,
    "base_seed": 9,
    "output": "out.csv"
  })");
  const ExperimentSpec spec = experiment_spec_from_json(doc);
  REQUIRE(spec.algorithms.size() == 4);
  CHECK(spec.algorithms[0].name == "vrql");
  CHECK(std::get<VrqlSpec>(spec.algorithms[0].params).num_epochs == 2);
  CHECK(spec.algorithms[1].name == "ql-poly");
  CHECK(std::get<OrdinarySpec>(spec.algorithms[1].params).step.parameter == 0.8);
  CHECK(std::get<OracleVrSpec>(spec.algorithms[2].params).recording.epoch_length == 5);
  CHECK(std::get<TwoPhaseSpec>(spec.algorithms[3].params).epsilon == 0.2);
  CHECK(spec.trials == 2);
  CHECK(spec.output_path == "out.csv");

  json bad = doc;
  bad["trials"] = 0;
  CHECK_THROWS_AS(experiment_spec_from_json(bad), ValidationError);
  bad = doc;
  bad["algorithms"][1]["name"] = "a,b";
  CHECK_THROWS_AS(experiment_spec_from_json(bad), ValidationError);
  bad = doc;
  bad["algorithms"][0]["kind"] = "speedy";
  CHECK_THROWS_AS(experiment_spec_from_json(bad), ValidationError);
  bad = doc;
  bad["gammas"] = json::array({1.0});
  CHECK_THROWS_AS(experiment_spec_from_json(bad), ValidationError);
  bad = doc;
  bad.erase("mdp");
  CHECK_THROWS_AS(experiment_spec_from_json(bad), ValidationError);
}

TEST_CASE("deterministic-kernel experiment converges and writes increasing rows") {
  GeneratorParams params;
  params.kind = GeneratorKind::Chain;
  params.num_states = 6;
  params.num_actions = 2;
  params.success_prob = 1.0;
  ExperimentSpec spec;
  spec.mdp_source = params;
  spec.gammas = {0.5};
  spec.trials = 1;
  VrqlSpec vr;
  vr.num_epochs = 6;
  spec.algorithms = {{"vrql", vr}};
  spec.output_path = scratch_path("chain.csv").string();
  run_experiment(spec);

  std::ifstream in(spec.output_path);
  const auto traces = read_trace_csv(in);
  REQUIRE(traces.size() == 1);
  const auto& records = traces[0].records;
  for (std::size_t i = 1; i < records.size(); ++i) {
    CHECK(records[i].cumulative_samples > records[i - 1].cumulative_samples);
  }
  CHECK(records.back().linf_error <= 1e-6);
}

TEST_CASE("experiment output is ordered, seeded per trial and independent of worker count") {
  ExperimentSpec spec = small_spec();
  spec.workers = 1;
  const ExperimentResult serial = run_experiment(spec);
  spec.workers = 4;
  const ExperimentResult parallel = run_experiment(spec);

  REQUIRE(serial.traces.size() == 2 * 2 * 3);
  std::ostringstream a;
  std::ostringstream b;
  write_trace_csv(a, serial.traces);
  write_trace_csv(b, parallel.traces);
  CHECK(a.str() == b.str());

  std::size_t i = 0;
  for (double gamma : {0.5, 0.7}) {
    for (const char* name : {"vrql", "ordinary"}) {
      for (std::size_t trial = 0; trial < 3; ++trial, ++i) {
        CHECK(serial.traces[i].gamma == gamma);
        CHECK(serial.traces[i].algorithm_tag == name);
        CHECK(serial.traces[i].trial == trial);
      }
    }
  }

  // Trial t uses seed base_seed + t: rerunning the vrql cell directly must agree.
  const GammaReference& ref = serial.references[0];
  const std::size_t epochs =
      bounds::epochs_needed(*ref.epsilon, ref.complexity.b0, 2.0);
  const VrqlConfig config = planned_config(ref.mdp, epochs, 0.1, 0.2, 0.2, 2.0, spec.base_seed + 2);
  const RunResult direct = vr_q_learning(ref.mdp, config, ref.theta_star);
  REQUIRE(direct.trace.records.size() == serial.traces[2].records.size());
  for (std::size_t r = 0; r < direct.trace.records.size(); ++r) {
    CHECK(direct.trace.records[r].linf_error == serial.traces[2].records[r].linf_error);
    CHECK(direct.trace.records[r].cumulative_samples ==
          serial.traces[2].records[r].cumulative_samples);
  }
}

TEST_CASE("CSV round trip and header") {
  const ExperimentResult result = run_experiment(small_spec());
  std::ostringstream out;
  write_trace_csv(out, result.traces);
  const std::string text = out.str();
  CHECK(text.rfind(std::string(kTraceCsvHeader) + "\n", 0) == 0);

  std::istringstream in(text);
  const auto back = read_trace_csv(in);
  REQUIRE(back.size() == result.traces.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    REQUIRE(back[i].records.size() == result.traces[i].records.size());
    for (std::size_t r = 0; r < back[i].records.size(); ++r) {
      CHECK(back[i].records[r].linf_error == result.traces[i].records[r].linf_error);
      CHECK(back[i].records[r].epoch == result.traces[i].records[r].epoch);
    }
  }

  std::istringstream wrong_header("algorithm,gamma,trial\nx,0.5,0\n");
  CHECK_THROWS_AS(read_trace_csv(wrong_header), ValidationError);
  std::istringstream short_row(std::string(kTraceCsvHeader) + "\nvrql,0.5,0,1,epoch_end,10\n");
  CHECK_THROWS_AS(read_trace_csv(short_row), ValidationError);
  std::istringstream bad_phase(std::string(kTraceCsvHeader) + "\nvrql,0.5,0,1,middle,10,0.1\n");
  CHECK_THROWS_AS(read_trace_csv(bad_phase), ValidationError);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  const double x = 0.12345678901234567;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("quartiles use linear interpolation") {
  const Quartiles q = quartiles({4.0, 1.0, 3.0, 2.0});
  CHECK(q.q1 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q3 == doctest::Approx(3.25));
  CHECK(quartiles({7.0}).median == 7.0);
  CHECK_THROWS_AS(quartiles({}), ValidationError);
}

TEST_CASE("summary: a single trial reaching epsilon at 1000 samples") {
  const std::vector<RunTrace> traces{make_trace("vrql", 0.85, 0, {{0, 1.0}, {400, 0.3}, {1000, 0.04}})};
  const json out = summarize_traces(traces, 0.05);
  REQUIRE(out["groups"].size() == 1);
  const json& g = out["groups"][0];
  CHECK(g["samples_to_epsilon"]["median"] == 1000.0);
  CHECK(g["samples_to_epsilon"]["reached"] == 1);
  CHECK(g["samples_to_epsilon"]["unreached"] == 0);
  CHECK(g["final_error"]["median"] == 0.04);
  CHECK(g["halving_fraction"] == 1.0);
}

TEST_CASE("summary: nobody reaches epsilon") {
  const std::vector<RunTrace> traces{make_trace("ordinary", 0.5, 0, {{0, 1.0}, {10, 0.8}}),
                                     make_trace("ordinary", 0.5, 1, {{0, 1.0}, {10, 0.7}})};
  const json out = summarize_traces(traces, 0.01);
  const json& g = out["groups"][0];
  CHECK(g["samples_to_epsilon"]["median"].is_null());
  CHECK(g["samples_to_epsilon"]["reached"] == 0);
  CHECK(g["samples_to_epsilon"]["unreached"] == 2);
  CHECK(g["halving_fraction"] == 0.0);
  CHECK_THROWS_AS(summarize_traces(traces, 0.0), ValidationError);
}

TEST_CASE("summary: halving fraction of oracle VR on a deterministic kernel is one") {
  GeneratorParams params;
  params.kind = GeneratorKind::Chain;
  params.num_states = 8;
  params.num_actions = 2;
  params.success_prob = 1.0;
  ExperimentSpec spec;
  spec.mdp_source = params;
  spec.gammas = {0.7};
  spec.trials = 4;
  OracleVrSpec oracle;
  oracle.iters = 200;
  oracle.step = StepRule::constant(0.5);
  // (1 - 0.5 * 0.3)^5 < 1/2: every block halves the error.
  oracle.recording = {1000, 5};
  spec.algorithms = {{"oracle_vr", oracle}};
  spec.output_path = scratch_path("oracle.csv").string();
  run_experiment(spec);
  const json out = summarize_csv(spec.output_path, 1e-3);
  CHECK(out["groups"][0]["halving_fraction"] == 1.0);
  CHECK_THROWS_AS(summarize_csv(scratch_path("missing.csv"), 0.1), IoError);
}

TEST_CASE("experiment with a missing MDP file is an I/O error") {
  ExperimentSpec spec = small_spec();
  spec.mdp_source = scratch_path("does-not-exist.json");
  CHECK_THROWS_AS(run_experiment(spec), IoError);
}

TEST_CASE("experiment from an MDP file overrides its discount") {
  const auto path = scratch_path("mdp.json");
  save_mdp(garnet_mdp(4, 2, 2, 0.9, 5), path);
  ExperimentSpec spec = small_spec();
  spec.mdp_source = path;
  spec.trials = 1;
  const ExperimentResult result = run_experiment(spec);
  CHECK(result.references[0].mdp.discount == 0.5);
  CHECK(result.references[1].mdp.discount == 0.7);
  CHECK(slurp(path).find("\"gamma\"") != std::string::npos);
}

}  // TEST_SUITE
