"""Categorical causal Bayesian networks and their interventional semantics.

Inference is exact enumeration over the full joint, which is fine at the
scales used here (a handful of variables with a few states each).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .interventions import (
    Composite,
    Hard,
    InterventionSpec,
    Local,
    Mixture,
    Null,
    Soft,
    atomic_members,
    leaves,
)

ROW_TOL = 1e-12


class ModelError(ValueError):
    """Malformed model, query or intervention."""


@dataclass(frozen=True)
class Variable:
    name: str
    cardinality: int

    def __post_init__(self) -> None:
        if not self.name:
            raise ModelError("variable name must be non-empty")
        if int(self.cardinality) < 2:
            raise ModelError(f"{self.name}: cardinality must be >= 2, got {self.cardinality}")
        object.__setattr__(self, "cardinality", int(self.cardinality))


@dataclass(frozen=True)
class Dag:
    variables: tuple[Variable, ...]
    edges: frozenset[tuple[str, str]]
    _order: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        edges = frozenset((str(p), str(c)) for p, c in self.edges)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "edges", edges)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ModelError(f"duplicate variable names: {names}")
        known = set(names)
        for p, c in edges:
            if p not in known or c not in known:
                raise ModelError(f"edge {p}->{c} references an undeclared variable")
            if p == c:
                raise ModelError(f"self-loop on {p}")
        object.__setattr__(self, "_order", self._toposort(names, edges))

    @staticmethod
    def _toposort(names: list[str], edges: frozenset[tuple[str, str]]) -> tuple[str, ...]:
        # Kahn's algorithm, ties broken by declaration order
        indeg = {n: 0 for n in names}
        for _, c in edges:
            indeg[c] += 1
        order: list[str] = []
        ready = [n for n in names if indeg[n] == 0]
        rank = {n: i for i, n in enumerate(names)}
        while ready:
            ready.sort(key=rank.__getitem__)
            n = ready.pop(0)
            order.append(n)
            for p, c in edges:
                if p == n:
                    indeg[c] -= 1
                    if indeg[c] == 0:
                        ready.append(c)
        if len(order) != len(names):
            raise ModelError("graph has a directed cycle")
        return tuple(order)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    @cached_property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def card(self, name: str) -> int:
        return self.variables[self.index(name)].cardinality

    def parents(self, name: str) -> tuple[str, ...]:
        self.index(name)
        return tuple(n for n in self.names if (n, name) in self.edges)

    def children(self, name: str) -> tuple[str, ...]:
        self.index(name)
        return tuple(n for n in self.names if (name, n) in self.edges)

    def ancestors(self, name: str) -> frozenset[str]:
        return self._closure(name, self.parents)

    def descendants(self, name: str) -> frozenset[str]:
        return self._closure(name, self.children)

    def _closure(self, name: str, step) -> frozenset[str]:
        seen: set[str] = set()
        stack = list(step(name))
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(step(n))
        return frozenset(seen)

    def topological_order(self) -> tuple[str, ...]:
        return self._order

    def subgraph(self, keep: Iterable[str]) -> "Dag":
        keep = set(keep)
        return Dag(
            tuple(v for v in self.variables if v.name in keep),
            frozenset((p, c) for p, c in self.edges if p in keep and c in keep),
        )


def graph_queries(dag: Dag, name: str) -> dict[str, Any]:
    return {
        "parents": set(dag.parents(name)),
        "children": set(dag.children(name)),
        "ancestors": set(dag.ancestors(name)),
        "descendants": set(dag.descendants(name)),
        "topological_order": list(dag.topological_order()),
    }


def _check_rows(table: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(table)):
        raise ModelError(f"{what}: non-finite probability")
    if np.any(table < -ROW_TOL) or np.any(table > 1 + ROW_TOL):
        raise ModelError(f"{what}: probabilities must lie in [0, 1]")
    table = np.clip(table, 0.0, 1.0)
    sums = table.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_TOL):
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ModelError(f"{what}: row {bad} sums to {sums[bad]!r}")
    return table / sums[:, None]


@dataclass(frozen=True, eq=False)
class Cpd:
    """``table[r, s] = P(variable = s | parents in mixed-radix state r)``."""

    variable: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        arr = np.array(self.table, dtype=float)
        if arr.ndim != 2:
            raise ModelError(f"{self.variable}: CPD table must be 2-D")
        arr = _check_rows(arr, f"CPD of {self.variable}")
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)


def mixed_radix_index(values: Sequence[int], cards: Sequence[int]) -> int:
    idx = 0
    for v, k in zip(values, cards):
        idx = idx * k + int(v)
    return idx


def mixed_radix_states(cards: Sequence[int]) -> np.ndarray:
    """All joint states in mixed-radix order, first position most significant."""
    if not cards:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(tuple(cards)).reshape(len(cards), -1).T
    return grids.astype(np.int64)


@dataclass(frozen=True, eq=False)
class Cbn:
    dag: Dag
    cpds: Mapping[str, Cpd]

    def __post_init__(self) -> None:
        cpds = dict(self.cpds)
        if set(cpds) != set(self.dag.names):
            raise ModelError("need exactly one CPD per variable")
        for name, cpd in cpds.items():
            if cpd.variable != name:
                raise ModelError(f"CPD keyed {name!r} describes {cpd.variable!r}")
            if set(cpd.parents) != set(self.dag.parents(name)) or len(cpd.parents) != len(set(cpd.parents)):
                raise ModelError(f"CPD parents of {name} {cpd.parents} disagree with graph {self.dag.parents(name)}")
            rows = int(np.prod([self.dag.card(p) for p in cpd.parents], dtype=np.int64))
            if cpd.table.shape != (rows, self.dag.card(name)):
                raise ModelError(f"CPD of {name} has shape {cpd.table.shape}, expected {(rows, self.dag.card(name))}")
        object.__setattr__(self, "cpds", cpds)

    @property
    def names(self) -> tuple[str, ...]:
        return self.dag.names

    @property
    def cards(self) -> tuple[int, ...]:
        return self.dag.cards

    def factor(self, name: str) -> np.ndarray:
        """The CPD of ``name`` broadcast to the full joint shape."""
        cpd = self.cpds[name]
        axes = [self.dag.index(p) for p in cpd.parents] + [self.dag.index(name)]
        shape = [self.dag.card(p) for p in cpd.parents] + [self.dag.card(name)]
        arr = cpd.table.reshape(shape)
        perm = np.argsort(axes)
        arr = arr.transpose(perm)
        full = [1] * len(self.names)
        for ax in axes:
            full[ax] = self.cards[ax]
        return arr.reshape(full)

    @cached_property
    def joint(self) -> np.ndarray:
        out = np.ones(self.cards)
        for name in self.names:
            out = out * self.factor(name)
        out.setflags(write=False)
        return out

    def joint_probability(self, assignment: Mapping[str, int]) -> float:
        return float(self.joint[self._state_tuple(assignment)])

    def _state_tuple(self, assignment: Mapping[str, int]) -> tuple[int, ...]:
        extra = set(assignment) - set(self.names)
        if extra:
            raise ModelError(f"unknown variables {sorted(extra)}")
        missing = set(self.names) - set(assignment)
        if missing:
            raise ModelError(f"assignment misses {sorted(missing)}")
        state = []
        for v in self.dag.variables:
            s = int(assignment[v.name])
            if not 0 <= s < v.cardinality:
                raise ModelError(f"{v.name}={s} out of range 0..{v.cardinality - 1}")
            state.append(s)
        return tuple(state)

    def with_cpd(self, cpd: Cpd) -> "Cbn":
        """Replace one CPD; the graph follows the CPD's parent list."""
        return self.with_cpds([cpd])

    def with_cpds(self, new: Sequence[Cpd]) -> "Cbn":
        """Replace several CPDs at once, so only the final graph must be acyclic."""
        names = {c.variable for c in new}
        edges = {(p, c) for p, c in self.dag.edges if c not in names}
        cpds = dict(self.cpds)
        for cpd in new:
            edges.update((p, cpd.variable) for p in cpd.parents)
            cpds[cpd.variable] = cpd
        return Cbn(Dag(self.dag.variables, frozenset(edges)), cpds)

    # -- JSON -----------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "variables": [{"name": v.name, "cardinality": v.cardinality} for v in self.dag.variables],
            "edges": sorted([list(e) for e in self.dag.edges]),
            "cpds": [
                {
                    "variable": n,
                    "parents": list(self.cpds[n].parents),
                    "table": self.cpds[n].table.tolist(),
                }
                for n in self.names
            ],
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "Cbn":
        try:
            variables = tuple(Variable(str(v["name"]), int(v["cardinality"])) for v in obj["variables"])
            dag = Dag(variables, frozenset((str(p), str(c)) for p, c in obj.get("edges", [])))
            cpds = {}
            for c in obj["cpds"]:
                cpd = Cpd(str(c["variable"]), tuple(c["parents"]), np.asarray(c["table"], dtype=float))
                if cpd.variable in cpds:
                    raise ModelError(f"duplicate CPD for {cpd.variable}")
                cpds[cpd.variable] = cpd
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed model JSON: {exc}") from exc
        return cls(dag, cpds)


def point_mass_table(rows: int, card: int, value: int) -> np.ndarray:
    t = np.zeros((rows, card))
    t[:, value] = 1.0
    return t


def pushforward_table(table: np.ndarray, mapping: Sequence[int]) -> np.ndarray:
    """Move the mass of each state ``s`` onto ``mapping[s]``."""
    out = np.zeros_like(table)
    for s, target in enumerate(mapping):
        out[:, target] += table[:, s]
    return out


def _intervened_cpd(cbn: Cbn, spec) -> Cpd:
    name = spec.variable
    if name not in cbn.names:
        raise ModelError(f"intervention on unknown variable {name!r}")
    card = cbn.dag.card(name)
    cpd = cbn.cpds[name]
    if isinstance(spec, Hard):
        if not 0 <= spec.value < card:
            raise ModelError(f"hard value {spec.value} out of range for {name}")
        return Cpd(name, cpd.parents, point_mass_table(cpd.table.shape[0], card, spec.value))
    if isinstance(spec, Local):
        if len(spec.mapping) != card or any(not 0 <= v < card for v in spec.mapping):
            raise ModelError(f"local map {spec.mapping} is not a total map on the states of {name}")
        return Cpd(name, cpd.parents, pushforward_table(cpd.table, spec.mapping))
    if isinstance(spec, Soft):
        for p in spec.parents:
            if p not in cbn.names:
                raise ModelError(f"soft intervention parent {p!r} is undeclared")
        return Cpd(name, spec.parents, np.asarray(spec.table, dtype=float))
    raise TypeError(f"not a per-variable spec: {spec!r}")


def _apply_plain(cbn: Cbn, spec: InterventionSpec) -> Cbn:
    members = atomic_members(spec)
    if not members:
        return cbn
    return cbn.with_cpds([_intervened_cpd(cbn, m) for m in members])


@dataclass(frozen=True, eq=False)
class IntervenedModel:
    """A weighted collection of factorized models.

    Mixtures stay as lists: their weighted sum generally does not factorize
    over any single graph, so every query is evaluated per component.
    """

    components: tuple[tuple[float, Cbn], ...]

    @property
    def names(self) -> tuple[str, ...]:
        return self.components[0][1].names

    @property
    def cards(self) -> tuple[int, ...]:
        return self.components[0][1].cards

    @cached_property
    def joint(self) -> np.ndarray:
        out = np.zeros(self.cards)
        for w, cbn in self.components:
            out = out + w * cbn.joint
        out.setflags(write=False)
        return out

    def joint_probability(self, assignment: Mapping[str, int]) -> float:
        state = self.components[0][1]._state_tuple(assignment)
        return float(self.joint[state])


def apply_intervention(cbn: Cbn, spec: InterventionSpec) -> IntervenedModel:
    if not isinstance(spec, (Null, Hard, Local, Soft, Composite, Mixture)):
        raise TypeError(f"not an intervention spec: {spec!r}")
    return IntervenedModel(tuple((w, _apply_plain(cbn, leaf)) for w, leaf in leaves(spec)))


def _as_model(model: Cbn | IntervenedModel) -> IntervenedModel:
    if isinstance(model, Cbn):
        return IntervenedModel(((1.0, model),))
    return model


def marginal(model: Cbn | IntervenedModel, names: Sequence[str]) -> np.ndarray:
    """Joint table over ``names`` with axes in the given order."""
    m = _as_model(model)
    all_names = m.names
    idx = []
    for n in names:
        if n not in all_names:
            raise ModelError(f"unknown variable {n!r}")
        idx.append(all_names.index(n))
    if len(set(idx)) != len(idx):
        raise ModelError("repeated variable in query")
    drop = tuple(i for i in range(len(all_names)) if i not in idx)
    arr = m.joint.sum(axis=drop) if drop else np.array(m.joint)
    kept = sorted(idx)
    return arr.transpose([kept.index(i) for i in idx])


def interventional_distribution(
    model: Cbn | IntervenedModel,
    query_vars: Sequence[str],
    given_vars: Sequence[str] = (),
) -> np.ndarray:
    """``P(query | given)`` as an array indexed ``[given..., query...]``.

    Rows whose conditioning event has probability zero are NaN.
    """
    query_vars, given_vars = list(query_vars), list(given_vars)
    if set(query_vars) & set(given_vars):
        raise ModelError("query and conditioning variables must be disjoint")
    joint = marginal(model, given_vars + query_vars)
    if not given_vars:
        return joint
    g = len(given_vars)
    norm = joint.sum(axis=tuple(range(g, joint.ndim)), keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(norm > 0, joint / np.where(norm > 0, norm, 1.0), np.nan)
    return out


def probability(
    model: Cbn | IntervenedModel,
    event: Mapping[str, int],
    given: Mapping[str, int] | None = None,
) -> float | None:
    """Scalar ``P(event | given)``; None when the conditioning event is null."""
    given = dict(given or {})
    q, g = list(event), list(given)
    table = interventional_distribution(model, q, g)
    value = float(table[tuple(given[n] for n in g) + tuple(event[n] for n in q)])
    return None if np.isnan(value) else value


def sample(model: Cbn | IntervenedModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Forward ancestral samples, one row per draw, columns in variable order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    m = _as_model(model)
    out = np.zeros((n, len(m.names)), dtype=np.int64)
    if n == 0:
        return out
    weights = np.array([w for w, _ in m.components])
    which = rng.choice(len(weights), size=n, p=weights / weights.sum())
    for k, (_, cbn) in enumerate(m.components):
        rows = np.flatnonzero(which == k)
        if rows.size == 0:
            continue
        block = np.zeros((rows.size, len(cbn.names)), dtype=np.int64)
        for name in cbn.dag.topological_order():
            cpd = cbn.cpds[name]
            r = np.zeros(rows.size, dtype=np.int64)
            for p in cpd.parents:
                r = r * cbn.dag.card(p) + block[:, cbn.dag.index(p)]
            cum = np.cumsum(cpd.table[r], axis=1)
            u = rng.random(rows.size)
            draw = (u[:, None] >= cum).sum(axis=1)
            block[:, cbn.dag.index(name)] = np.minimum(draw, cbn.dag.card(name) - 1)
        out[rows] = block
    return out


def make_cbn(
    variables: Sequence[tuple[str, int]],
    cpds: Mapping[str, tuple[Sequence[str], Any]],
) -> Cbn:
    """Build a Cbn from ``[(name, card)]`` and ``{name: (parents, table)}``."""
    decls = tuple(Variable(n, k) for n, k in variables)
    edges = frozenset((p, c) for c, (ps, _) in cpds.items() for p in ps)
    return Cbn(Dag(decls, edges), {c: Cpd(c, tuple(ps), np.asarray(t, dtype=float)) for c, (ps, t) in cpds.items()})
