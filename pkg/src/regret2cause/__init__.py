"""Causal models recovered from the choices of regret-bounded agents."""

from .cbn import Cbn, Cpd, Dag, IntervenedModel, ModelError, Variable, apply_intervention, interventional_distribution, sample
from .cid import Cid, Policy, PublicTask, expected_utility, optimal_policy, regret, validate_assumptions
from .interventions import Composite, Hard, Local, Mixture, Null, Soft
from .oracle import PolicyOracle, SimulatedOracle, make_delta_oracle

__version__ = "0.1.0"

__all__ = [
    "Cbn",
    "Cpd",
    "Cid",
    "Composite",
    "Dag",
    "Hard",
    "IntervenedModel",
    "Local",
    "Mixture",
    "ModelError",
    "Null",
    "Policy",
    "PolicyOracle",
    "PublicTask",
    "SimulatedOracle",
    "Soft",
    "Variable",
    "apply_intervention",
    "expected_utility",
    "interventional_distribution",
    "make_delta_oracle",
    "optimal_policy",
    "regret",
    "sample",
    "validate_assumptions",
]
