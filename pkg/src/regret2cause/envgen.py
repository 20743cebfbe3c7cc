"""Random decision environments.

Parameters are drawn uniformly (each CPD row's final entry by complement via
a uniform stick-breaking draw, utility entries uniform then normalized).
Draws that sit too close to a degenerate configuration are rejected: ties
between decisions, parents whose influence is nearly invisible, and utility
tables under which a parameter cannot be solved for.  ``margin`` sets how
close is too close; ``margin = 0`` keeps every draw that passes the
structural assumption checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .cbn import Cbn, Cpd, Dag, Variable, marginal
from .cid import Cid, expected_utility_table, validate_assumptions
from .interventions import Hard, Null

Family = Literal["binary-pair", "random-dag"]
MAX_ATTEMPTS = 100_000


class ConfigurationError(ValueError):
    """A generator or sweep configuration that cannot be satisfied."""


@dataclass(frozen=True)
class GeneratorConfig:
    graph_family: Family = "binary-pair"
    n_chance: int = 2
    cardinalities: tuple[int, ...] = (2, 2)
    decision_cardinality: int = 2
    margin: float = 0.01
    edge_prob: float = 0.5
    n_info_parents: int = 0
    n_utility_parents: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.margin < 0:
            raise ConfigurationError("margin must be nonnegative")
        if self.graph_family == "binary-pair":
            object.__setattr__(self, "n_chance", 2)
            object.__setattr__(self, "cardinalities", (2, 2))
            object.__setattr__(self, "decision_cardinality", 2)
            object.__setattr__(self, "n_info_parents", 0)
            object.__setattr__(self, "n_utility_parents", 2)
        elif self.graph_family == "random-dag":
            cards = tuple(int(c) for c in self.cardinalities)
            if len(cards) == 1:
                cards = cards * self.n_chance
            if len(cards) != self.n_chance or any(c < 2 for c in cards):
                raise ConfigurationError("need one cardinality >= 2 per chance variable")
            object.__setattr__(self, "cardinalities", cards)
            if self.n_utility_parents is None:
                object.__setattr__(self, "n_utility_parents", min(self.n_chance, 2))
            if not 1 <= self.n_utility_parents <= self.n_chance:
                raise ConfigurationError("utility needs between 1 and n_chance chance parents")
            if not 0 <= self.n_info_parents < self.n_chance:
                raise ConfigurationError("info parents must leave at least one unobserved variable")
            if not 0.0 <= self.edge_prob <= 1.0:
                raise ConfigurationError("edge_prob must lie in [0, 1]")
        else:
            raise ConfigurationError(f"unknown graph family {self.graph_family!r}")
        if self.decision_cardinality < 2:
            raise ConfigurationError("decision needs at least two options")


def _random_rows(rng: np.random.Generator, rows: int, card: int) -> np.ndarray:
    """Uniform draws for all but the last entry; the remainder fills the last."""
    out = np.zeros((rows, card))
    left = np.ones(rows)
    for s in range(card - 1):
        take = rng.random(rows) * left
        out[:, s] = take
        left = left - take
    out[:, -1] = left
    return out


def _draw_structure(config: GeneratorConfig, rng: np.random.Generator) -> tuple[list[Variable], set[tuple[str, str]], list[str], list[str]]:
    if config.graph_family == "binary-pair":
        names = ["X", "Y"]
        edges = {("X", "Y")} if rng.random() < 0.5 else {("Y", "X")}
        return [Variable(n, 2) for n in names], edges, [], names
    names = [f"C{i + 1}" for i in range(config.n_chance)]
    order = list(rng.permutation(config.n_chance))
    edges = set()
    for i, j in itertools.combinations(range(config.n_chance), 2):
        if rng.random() < config.edge_prob:
            edges.add((names[order[i]], names[order[j]]))
    util = sorted(rng.choice(config.n_chance, size=config.n_utility_parents, replace=False))
    util_names = [names[i] for i in util]
    info_names = []
    if config.n_info_parents:
        info = sorted(rng.choice(config.n_chance, size=config.n_info_parents, replace=False))
        info_names = [names[i] for i in info]
    variables = [Variable(n, k) for n, k in zip(names, config.cardinalities)]
    return variables, edges, info_names, util_names


def draw_cid(config: GeneratorConfig, rng: np.random.Generator) -> Cid:
    """One unconditioned draw (no rejection)."""
    variables, edges, info, util = _draw_structure(config, rng)
    dag = Dag(tuple(variables), frozenset(edges))
    cpds = {}
    for v in variables:
        ps = dag.parents(v.name)
        rows = int(np.prod([dag.card(p) for p in ps], dtype=np.int64))
        cpds[v.name] = Cpd(v.name, ps, _random_rows(rng, rows, v.cardinality))
    chance = Cbn(dag, cpds)
    d = "D"
    shape = [dag.card(n) for n in util] + [config.decision_cardinality]
    table = rng.random(int(np.prod(shape)))
    return Cid.build(chance, d, info, list(util) + [d], table, config.decision_cardinality)


@dataclass(frozen=True)
class MarginAudit:
    decision_gap: float
    utility_gap: float
    edge_strength: float
    solvability: float

    def minimum(self) -> float:
        return min(self.decision_gap, self.utility_gap, self.edge_strength, self.solvability)


def _gap_rows(eu: np.ndarray) -> float:
    live = ~np.isnan(eu).any(axis=1)
    if not live.any():
        return np.inf
    s = np.sort(eu[live], axis=1)
    return float((s[:, -1] - s[:, -2]).min())


def audit(cid: Cid) -> MarginAudit:
    """Distances from the degenerate configurations the generator rejects.

    decision_gap: best minus runner-up expected utility, per context, under
    no shift and under every single-variable hard shift.
    utility_gap: best minus runner-up utility in every utility state.
    edge_strength: over every edge and every pair of parent states that
    differ only in that parent, the smallest largest change in the child's
    row.
    solvability: for every utility parent, every decision pair and every
    setting of the other utility parents, the spread of the decision-pair
    utility difference across that parent's states.
    """
    task = cid.task
    shifts = [Null()] + [Hard(v.name, s) for v in task.chance for s in range(v.cardinality)]
    decision_gap = min(_gap_rows(expected_utility_table(cid, sh)) for sh in shifts)

    flat = np.sort(task.utility.reshape(-1, task.n_decisions), axis=1)
    utility_gap = float((flat[:, -1] - flat[:, -2]).min())

    dag = cid.chance.dag
    edge_strength = np.inf
    for p, c in dag.edges:
        cpd = cid.chance.cpds[c]
        cards = [dag.card(q) for q in cpd.parents]
        table = cpd.table.reshape(cards + [dag.card(c)])
        j = cpd.parents.index(p)
        moved = np.moveaxis(table, j, 0)
        for a, b in itertools.combinations(range(cards[j]), 2):
            diff = np.abs(moved[a] - moved[b]).max(axis=-1)
            edge_strength = min(edge_strength, float(diff.min()))

    solvability = np.inf
    u = task.utility
    for i, _ in enumerate(task.utility_parents):
        moved = np.moveaxis(u, i, 0)
        for a, b in itertools.combinations(range(task.n_decisions), 2):
            du = moved[..., a] - moved[..., b]
            spread = du.max(axis=0) - du.min(axis=0)
            solvability = min(solvability, float(spread.min()))
    return MarginAudit(decision_gap, utility_gap, float(edge_strength), solvability)


def accept(cid: Cid, margin: float) -> bool:
    if not validate_assumptions(cid).passed:
        return False
    if margin <= 0:
        return True
    return audit(cid).minimum() >= margin


def random_cid(config: GeneratorConfig, rng: np.random.Generator, max_attempts: int = MAX_ATTEMPTS) -> Cid:
    """Draw until a candidate passes the assumption checks and the margin."""
    for _ in range(max_attempts):
        cid = draw_cid(config, rng)
        if accept(cid, config.margin):
            return cid
    raise ConfigurationError(f"no acceptable environment in {max_attempts} draws; lower the margin")


def env_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(index)]))


def generate(config: GeneratorConfig, n: int, stream: int = 0) -> list[Cid]:
    """``n`` environments, each drawn from its own stream derived from the seed."""
    return [random_cid(config, env_rng(config.seed, i, stream)) for i in range(n)]


def true_edges(cid: Cid) -> frozenset[tuple[str, str]]:
    return cid.chance.dag.edges


def true_joint(cid: Cid, names: Sequence[str] | None = None) -> np.ndarray:
    return marginal(cid.chance, list(names or cid.chance.names))
