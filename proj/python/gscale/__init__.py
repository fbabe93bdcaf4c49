"""Python access to the gscale simulator, baselines and trainer."""

import json

from ._core import (
    ConfigError,
    DomainError,
    ParseError,
    SimulationError,
    TrainingError,
    evaluate_json,
    execution_time,
    init_params,
    load_params,
    objective,
    param_count,
    plan_action,
    save_params,
    train,
    violation_degree,
    vm_cost,
)


def evaluate(scenario, policy="hgraphscale", seed=0, worst_case=False, theta=None, ablation="none",
             ablate_zeta=False):
    """Run one policy on the scenario's test split and return the report as a dict."""
    return json.loads(evaluate_json(str(scenario), policy, seed, worst_case, theta, ablation, ablate_zeta))


__all__ = [
    "ConfigError",
    "DomainError",
    "ParseError",
    "SimulationError",
    "TrainingError",
    "evaluate",
    "execution_time",
    "init_params",
    "load_params",
    "objective",
    "param_count",
    "plan_action",
    "save_params",
    "train",
    "violation_degree",
    "vm_cost",
]
