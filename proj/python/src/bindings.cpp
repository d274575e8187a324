#include "vrql/algorithms.hpp"
#include "vrql/bounds.hpp"
#include "vrql/errors.hpp"
#include "vrql/experiment.hpp"
#include "vrql/generators.hpp"
#include "vrql/mdp.hpp"
#include "vrql/mdp_io.hpp"
#include "vrql/sampling.hpp"
#include "vrql/summary.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python package wraps these in json.loads/dumps.
vrql::TabularMdp mdp_from_text(const std::string& text) {
  return vrql::mdp_from_json(json::parse(text));
}

py::array_t<double> kernel_array(const vrql::TabularMdp& mdp) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(mdp.num_states),
                                                  static_cast<py::ssize_t>(mdp.num_actions),
                                                  static_cast<py::ssize_t>(mdp.num_states)});
  std::copy(mdp.kernel.begin(), mdp.kernel.end(), out.mutable_data());
  return out;
}

vrql::TabularMdp make_mdp(py::array_t<double, py::array::c_style | py::array::forcecast> kernel,
                          const vrql::QFunction& reward, double gamma, std::optional<double> r_max) {
  if (kernel.ndim() != 3) throw vrql::ValidationError("kernel must have shape (S, A, S)");
  vrql::TabularMdp mdp;
  mdp.num_states = static_cast<std::size_t>(kernel.shape(0));
  mdp.num_actions = static_cast<std::size_t>(kernel.shape(1));
  mdp.kernel.assign(kernel.data(), kernel.data() + kernel.size());
  mdp.reward = reward;
  mdp.discount = gamma;
  mdp.r_max = r_max.value_or(reward.size() == 0 ? 0.0 : reward.cwiseAbs().maxCoeff());
  vrql::validate_mdp(mdp);
  return mdp;
}

py::dict trace_to_dict(const vrql::RunTrace& trace) {
  std::vector<std::uint64_t> samples;
  std::vector<double> errors;
  std::vector<std::size_t> epochs;
  std::vector<std::string> phases;
  for (const auto& r : trace.records) {
    samples.push_back(r.cumulative_samples);
    errors.push_back(r.linf_error);
    epochs.push_back(r.epoch);
    phases.emplace_back(vrql::to_string(r.phase));
  }
  py::dict d;
  d["algorithm"] = trace.algorithm_tag;
  d["gamma"] = trace.gamma;
  d["trial"] = trace.trial;
  d["samples"] = samples;
  d["linf_error"] = errors;
  d["epoch"] = epochs;
  d["phase"] = phases;
  return d;
}

vrql::StepRule step_rule(const std::string& kind, double parameter) {
  if (kind == "rescaled_linear") return vrql::StepRule::rescaled_linear();
  if (kind == "polynomial") return vrql::StepRule::polynomial(parameter);
  if (kind == "constant") return vrql::StepRule::constant(parameter);
  throw vrql::ValidationError("unknown step rule `" + kind + "`");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Variance-reduced Q-learning on tabular MDPs";

  py::register_exception<vrql::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<vrql::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<vrql::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<vrql::TabularMdp>(m, "Mdp")
      .def(py::init(&make_mdp), py::arg("kernel"), py::arg("reward"), py::arg("gamma"),
           py::arg("r_max") = py::none(),
           "Build and validate an MDP from a (S, A, S) kernel and an (S, A) reward matrix.")
      .def_static("from_json", &mdp_from_text, py::arg("text"))
      .def("to_json", [](const vrql::TabularMdp& mdp) { return vrql::mdp_to_json(mdp).dump(); })
      .def_readonly("num_states", &vrql::TabularMdp::num_states)
      .def_readonly("num_actions", &vrql::TabularMdp::num_actions)
      .def_readonly("gamma", &vrql::TabularMdp::discount)
      .def_readonly("r_max", &vrql::TabularMdp::r_max)
      .def_readonly("reward", &vrql::TabularMdp::reward)
      .def_property_readonly("kernel", &kernel_array)
      .def_property_readonly("num_pairs", &vrql::TabularMdp::num_pairs);

  m.def("load_mdp", [](const std::string& path) { return vrql::load_mdp(path); }, py::arg("path"));
  m.def("validate_mdp", &vrql::validate_mdp, py::arg("mdp"));
  m.def("bellman_apply", &vrql::bellman_apply, py::arg("mdp"), py::arg("theta"));
  m.def("solve_optimal_q", &vrql::solve_optimal_q, py::arg("mdp"),
        py::arg("tol") = vrql::kDefaultSolverTolerance);
  m.def("greedy_policy", [](const vrql::QFunction& q) { return vrql::greedy_policy(q).action; },
        py::arg("theta"));
  m.def(
      "policy_q_exact",
      [](const vrql::TabularMdp& mdp, std::vector<std::size_t> policy) {
        return vrql::policy_q_exact(mdp, vrql::Policy{std::move(policy)});
      },
      py::arg("mdp"), py::arg("policy"));
  m.def("sigma_star", &vrql::sigma_star, py::arg("mdp"), py::arg("theta_star"));
  m.def(
      "instance_complexity",
      [](const vrql::TabularMdp& mdp, const vrql::QFunction& theta_star) {
        const auto ic = vrql::instance_complexity(mdp, theta_star);
        py::dict d;
        d["sigma_star"] = ic.sigma_star;
        d["theta_star_norm"] = ic.theta_star_norm;
        d["b0"] = ic.b0;
        return d;
      },
      py::arg("mdp"), py::arg("theta_star"));
  m.def("linf_distance", &vrql::linf_distance, py::arg("a"), py::arg("b"));

  py::class_<vrql::GenerativeSampler>(m, "Sampler")
      .def(py::init(&vrql::build_sampler), py::arg("mdp"), py::arg("seed"))
      .def("draw",
           [](vrql::GenerativeSampler& s) {
             const vrql::SampleMatrix x = s.draw();
             py::array_t<std::uint32_t> out(std::vector<py::ssize_t>{
                 static_cast<py::ssize_t>(x.num_states), static_cast<py::ssize_t>(x.num_actions)});
             std::copy(x.next_state.begin(), x.next_state.end(), out.mutable_data());
             return out;
           })
      .def("split", &vrql::GenerativeSampler::split, py::arg("label"))
      .def_property_readonly("samples_drawn", &vrql::GenerativeSampler::samples_drawn)
      .def_property_readonly("seed", &vrql::GenerativeSampler::seed);

  m.def(
      "vr_q_learning",
      [](const vrql::TabularMdp& mdp, std::size_t num_epochs, double delta, double c1, double c2,
         double base, std::uint64_t seed, std::optional<std::uint64_t> epoch_length,
         std::optional<std::vector<std::uint64_t>> recenter_sizes, bool record_inner,
         std::optional<vrql::QFunction> theta_star) {
        vrql::VrqlConfig config = vrql::planned_config(mdp, num_epochs, delta, c1, c2, base, seed);
        if (epoch_length) config.epoch_length = *epoch_length;
        if (recenter_sizes) {
          config.recenter_sizes = *recenter_sizes;
          config.num_epochs = recenter_sizes->size();
        }
        config.record_inner = record_inner;
        const vrql::RunResult r = vrql::vr_q_learning(mdp, config, theta_star);
        return py::make_tuple(r.estimate, trace_to_dict(r.trace));
      },
      py::arg("mdp"), py::arg("num_epochs"), py::arg("delta") = 0.1, py::arg("c1") = 1.0,
      py::arg("c2") = 1.0, py::arg("base") = 2.0, py::arg("seed") = 0,
      py::arg("epoch_length") = py::none(), py::arg("recenter_sizes") = py::none(),
      py::arg("record_inner") = false, py::arg("theta_star") = py::none(),
      "Epoch-structured variance-reduced Q-learning. Returns (estimate, trace dict).");

  m.def(
      "ordinary_q_learning",
      [](const vrql::TabularMdp& mdp, std::uint64_t iters, const std::string& step, double parameter,
         std::uint64_t seed, std::uint64_t record_every, std::optional<vrql::QFunction> theta_star) {
        vrql::GenerativeSampler sampler = vrql::build_sampler(mdp, seed);
        const vrql::RunResult r = vrql::ordinary_q_learning(
            mdp, iters, step_rule(step, parameter), sampler, theta_star, {record_every, 0});
        return py::make_tuple(r.estimate, trace_to_dict(r.trace));
      },
      py::arg("mdp"), py::arg("iters"), py::arg("step") = "rescaled_linear",
      py::arg("parameter") = 0.0, py::arg("seed") = 0, py::arg("record_every") = 1,
      py::arg("theta_star") = py::none());

  m.def(
      "two_phase_minimax",
      [](const vrql::TabularMdp& mdp, double epsilon, double delta, double c_epochs, double c1,
         double c2, double base, std::uint64_t seed) {
        vrql::TwoPhaseOptions o;
        o.epsilon = epsilon;
        o.delta = delta;
        o.c_epochs = c_epochs;
        o.c1 = c1;
        o.c2 = c2;
        o.base = base;
        o.seed = seed;
        const vrql::TwoPhaseResult r = vrql::two_phase_minimax(mdp, o);
        py::dict d;
        d["estimate"] = r.estimate;
        d["phase1_estimate"] = r.phase1_estimate;
        d["phase1_epochs"] = r.phase1_epochs;
        d["phase2_epochs"] = r.phase2_epochs;
        d["epoch_length"] = r.epoch_length;
        d["total_samples"] = r.total_samples;
        d["trace"] = trace_to_dict(r.trace);
        return d;
      },
      py::arg("mdp"), py::arg("epsilon"), py::arg("delta") = 0.1, py::arg("c_epochs") = 1.0,
      py::arg("c1") = 1.0, py::arg("c2") = 1.0, py::arg("base") = 2.0, py::arg("seed") = 0);

  m.def(
      "plan_parameters",
      [](double gamma, double delta, std::size_t pairs, std::size_t epochs, double c1, double c2,
         double base) {
        const auto p = vrql::bounds::plan_parameters(gamma, delta, pairs, epochs, c1, c2, base);
        py::dict d;
        d["epoch_length"] = p.epoch_length;
        d["recenter_sizes"] = p.recenter_sizes;
        d["total_samples"] = p.total_samples;
        d["num_epochs"] = p.num_epochs;
        return d;
      },
      py::arg("gamma"), py::arg("delta"), py::arg("num_pairs"), py::arg("num_epochs"),
      py::arg("c1") = 1.0, py::arg("c2") = 1.0, py::arg("base") = 2.0);
  m.def("epochs_needed", &vrql::bounds::epochs_needed, py::arg("epsilon"), py::arg("b0"),
        py::arg("base") = 2.0);
  m.def("corollary_budget", &vrql::bounds::corollary_budget, py::arg("gamma"), py::arg("delta"),
        py::arg("num_pairs"), py::arg("epsilon"), py::arg("b0"), py::arg("c") = 1.0,
        py::arg("c_prime") = 1.0);
  m.def("t_max", &vrql::bounds::t_max, py::arg("gamma"), py::arg("delta"), py::arg("num_pairs"),
        py::arg("epsilon"), py::arg("r_max"), py::arg("c") = 1.0);
  m.def("worst_case_budget", &vrql::bounds::worst_case_budget, py::arg("gamma"), py::arg("delta"),
        py::arg("num_pairs"), py::arg("epsilon"), py::arg("r_max"), py::arg("c") = 1.0);

  m.def(
      "generate_mdp_json",
      [](const std::string& params) {
        return vrql::mdp_to_json(vrql::generate_mdp(vrql::generator_params_from_json(json::parse(params))))
            .dump();
      },
      py::arg("params"));
  m.def(
      "run_experiment_csv",
      [](const std::string& spec_text) {
        const vrql::ExperimentSpec spec = vrql::experiment_spec_from_json(json::parse(spec_text));
        vrql::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = vrql::run_experiment(spec);
        }
        std::ostringstream csv;
        vrql::write_trace_csv(csv, result.traces);
        return csv.str();
      },
      py::arg("spec"), "Run an experiment spec (JSON text); returns the trace CSV text.");
  m.def(
      "summarize_csv",
      [](const std::string& path, double epsilon) { return vrql::summarize_csv(path, epsilon).dump(); },
      py::arg("path"), py::arg("epsilon"));
  m.attr("TRACE_CSV_HEADER") = vrql::kTraceCsvHeader;
}
