"""Python bindings for the vrql C++ library.

JSON documents (generator parameters, experiment specs, summaries) are passed
as dicts here and converted to text for the native module.
"""

import json

from . import _core
from ._core import (
    ConvergenceError,
    IoError,
    Mdp,
    Sampler,
    TRACE_CSV_HEADER,
    ValidationError,
    bellman_apply,
    corollary_budget,
    epochs_needed,
    greedy_policy,
    instance_complexity,
    linf_distance,
    load_mdp,
    ordinary_q_learning,
    plan_parameters,
    policy_q_exact,
    sigma_star,
    solve_optimal_q,
    t_max,
    two_phase_minimax,
    validate_mdp,
    vr_q_learning,
    worst_case_budget,
)


def generate_mdp(**params):
    """Generate an MDP, e.g. generate_mdp(kind="garnet", num_states=10, ...)."""
    return Mdp.from_json(_core.generate_mdp_json(json.dumps(params)))


def run_experiment(spec):
    """Run an experiment spec (dict) and return the trace CSV as text."""
    return _core.run_experiment_csv(json.dumps(spec))


def summarize(csv_path, epsilon):
    """Summarize a trace CSV file; returns the summary as a dict."""
    return json.loads(_core.summarize_csv(str(csv_path), epsilon))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
