"""Single-decision causal influence diagrams.

A ``Cid`` couples a chance model with one decision ``D`` observed under the
information parents ``Pa_D`` and a utility table over chance parents plus
``D``.  The decision never feeds back into the chance variables, so shifting
the chance model and fixing ``D`` commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from .cbn import Cbn, ModelError, Variable, apply_intervention, mixed_radix_index, mixed_radix_states
from .interventions import (
    Composite,
    InterventionSpec,
    Mixture,
    Null,
    atomic_members,
    touched_variables,
)

TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PublicTask:
    """What an outside observer knows: variables, decision, utility.

    ``utility`` is normalized and indexed ``[x_1, ..., x_k, d]`` over
    ``utility_parents`` followed by the decision.  No chance-model parameters
    live here.
    """

    chance: tuple[Variable, ...]
    decision: Variable
    info_parents: tuple[str, ...]
    utility_parents: tuple[str, ...]
    utility: np.ndarray

    def __post_init__(self) -> None:
        names = [v.name for v in self.chance]
        for n in list(self.info_parents) + list(self.utility_parents):
            if n not in names:
                raise ModelError(f"{n!r} is not a chance variable")
        if self.decision.name in names:
            raise ModelError("decision name clashes with a chance variable")
        shape = tuple(self.card(n) for n in self.utility_parents) + (self.decision.cardinality,)
        arr = np.array(self.utility, dtype=float)
        if arr.shape != shape:
            raise ModelError(f"utility table has shape {arr.shape}, expected {shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "utility", arr)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.chance)

    @cached_property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.chance)

    def card(self, name: str) -> int:
        for v in self.chance:
            if v.name == name:
                return v.cardinality
        raise ModelError(f"unknown chance variable {name!r}")

    @property
    def n_decisions(self) -> int:
        return self.decision.cardinality

    @cached_property
    def context_cards(self) -> tuple[int, ...]:
        return tuple(self.card(n) for n in self.info_parents)

    @property
    def n_contexts(self) -> int:
        return int(np.prod(self.context_cards, dtype=np.int64))

    def context_index(self, context: Mapping[str, int] | int | None) -> int:
        if context is None:
            if self.info_parents:
                raise ModelError("a context is required when the decision observes variables")
            return 0
        if isinstance(context, (int, np.integer)):
            if not 0 <= int(context) < self.n_contexts:
                raise ModelError(f"context index {context} out of range")
            return int(context)
        return mixed_radix_index([context[n] for n in self.info_parents], self.context_cards)

    def context_assignment(self, index: int) -> dict[str, int]:
        states = mixed_radix_states(self.context_cards)[index]
        return {n: int(s) for n, s in zip(self.info_parents, states)}

    def utility_at(self, d: int, assignment: Mapping[str, int]) -> float:
        return float(self.utility[tuple(int(assignment[n]) for n in self.utility_parents) + (int(d),)])

    @cached_property
    def utility_full(self) -> np.ndarray:
        """Utility broadcast to ``(chance cards..., n_decisions)``."""
        idx = [self.names.index(n) for n in self.utility_parents]
        perm = np.argsort(idx)
        arr = self.utility.transpose(list(perm) + [len(idx)])
        shape = [1] * len(self.names) + [self.n_decisions]
        for ax in idx:
            shape[ax] = self.cards[ax]
        return arr.reshape(shape)

    def weighted_utility(self, joint: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``A[ctx, d] = sum_c P(c) U(d, x)`` over states in ctx, and ``p[ctx]``.

        ``joint`` is a probability table over the chance variables in order.
        """
        info = [self.names.index(n) for n in self.info_parents]
        drop = tuple(i for i in range(len(self.names)) if i not in info)
        weighted = joint[..., None] * self.utility_full
        a = weighted.sum(axis=drop) if drop else weighted
        p = joint.sum(axis=drop) if drop else joint
        order = sorted(info)
        perm = [order.index(i) for i in info]
        a = a.transpose(perm + [len(info)]).reshape(self.n_contexts, self.n_decisions)
        p = np.asarray(p).transpose(perm).reshape(self.n_contexts)
        return a, p

    def chance_utility_states(self) -> np.ndarray:
        return mixed_radix_states([self.card(n) for n in self.utility_parents])

    # -- JSON -------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "variables": [{"name": v.name, "cardinality": v.cardinality} for v in self.chance],
            "decision": {
                "name": self.decision.name,
                "info_parents": list(self.info_parents),
                "cardinality": self.decision.cardinality,
            },
            "utility": {
                "parents": list(self.utility_parents) + [self.decision.name],
                "table": self.utility.reshape(-1).tolist(),
            },
        }


@dataclass(frozen=True, eq=False)
class Cid:
    """Chance model + decision + utility.

    The utility is normalized at construction to span [0, 1]; ``scale`` and
    ``offset`` map normalized values back to the raw table
    (``raw = scale * normalized + offset``).
    """

    chance: Cbn
    task: PublicTask
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        if tuple(self.task.chance) != tuple(self.chance.dag.variables):
            raise ModelError("task variables must match the chance model")

    @classmethod
    def build(
        cls,
        chance: Cbn,
        decision: str,
        info_parents: Sequence[str],
        utility_parents: Sequence[str],
        table: Any,
        decision_cardinality: int | None = None,
    ) -> "Cid":
        """Create from a raw utility table.

        ``utility_parents`` must contain ``decision``; the flat ``table``
        follows mixed-radix order over ``utility_parents`` as listed.
        """
        utility_parents = list(utility_parents)
        if decision not in utility_parents:
            raise ModelError("the decision must be a parent of the utility")
        if len(set(utility_parents)) != len(utility_parents):
            raise ModelError("repeated utility parent")
        chance_parents = [n for n in utility_parents if n != decision]
        raw = np.asarray(table, dtype=float).reshape(-1)
        chance_size = int(np.prod([chance.dag.card(n) for n in chance_parents], dtype=np.int64))
        if decision_cardinality is None:
            if raw.size % chance_size:
                raise ModelError("utility table size is not a multiple of the chance-parent states")
            decision_cardinality = raw.size // chance_size
        dvar = Variable(decision, decision_cardinality)
        shape = [dvar.cardinality if n == decision else chance.dag.card(n) for n in utility_parents]
        if raw.size != int(np.prod(shape)):
            raise ModelError(f"utility table has {raw.size} entries, expected {int(np.prod(shape))}")
        if not np.all(np.isfinite(raw)):
            raise ModelError("utility table must be finite")
        arr = raw.reshape(shape)
        pos = utility_parents.index(decision)
        arr = np.moveaxis(arr, pos, -1)
        lo, hi = float(arr.min()), float(arr.max())
        scale = hi - lo
        if scale > 0:
            norm = (arr - lo) / scale
        else:
            # nothing to normalize; keep the constant as given
            norm, scale, lo = arr.copy(), 1.0, 0.0
        task = PublicTask(
            chance=tuple(chance.dag.variables),
            decision=dvar,
            info_parents=tuple(info_parents),
            utility_parents=tuple(chance_parents),
            utility=norm,
        )
        return cls(chance, task, scale, lo)

    @property
    def decision(self) -> str:
        return self.task.decision.name

    @property
    def info_parents(self) -> tuple[str, ...]:
        return self.task.info_parents

    @property
    def utility(self) -> np.ndarray:
        return self.task.utility

    @property
    def raw_utility(self) -> np.ndarray:
        return self.scale * self.task.utility + self.offset

    def with_chance(self, chance: Cbn) -> "Cid":
        task = PublicTask(
            tuple(chance.dag.variables),
            self.task.decision,
            self.task.info_parents,
            self.task.utility_parents,
            self.task.utility,
        )
        return Cid(chance, task, self.scale, self.offset)

    def to_dict(self) -> dict[str, Any]:
        out = self.chance.to_dict()
        out["decision"] = {
            "name": self.decision,
            "info_parents": list(self.info_parents),
            "cardinality": self.task.n_decisions,
        }
        out["utility"] = {
            "parents": list(self.task.utility_parents) + [self.decision],
            "table": self.raw_utility.reshape(-1).tolist(),
        }
        return out

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "Cid":
        chance = Cbn.from_dict(obj)
        try:
            dec = obj["decision"]
            util = obj["utility"]
            return cls.build(
                chance,
                str(dec["name"]),
                tuple(dec.get("info_parents", [])),
                tuple(util["parents"]),
                util["table"],
                dec.get("cardinality"),
            )
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed cid JSON: {exc}") from exc


def public_task_from_dict(obj: Mapping[str, Any]) -> PublicTask:
    """Read the public part of a cid JSON (chance CPDs, if present, are ignored)."""
    try:
        chance = tuple(Variable(str(v["name"]), int(v["cardinality"])) for v in obj["variables"])
        dec = obj["decision"]
        util = obj["utility"]
        parents = list(util["parents"])
        name = str(dec["name"])
        if name not in parents:
            raise ModelError("the decision must be a parent of the utility")
        cards = {v.name: v.cardinality for v in chance}
        chance_parents = [n for n in parents if n != name]
        raw = np.asarray(util["table"], dtype=float).reshape(-1)
        size = int(np.prod([cards[n] for n in chance_parents], dtype=np.int64))
        dcard = int(dec.get("cardinality") or raw.size // size)
        cards[name] = dcard
        arr = np.moveaxis(raw.reshape([cards[n] for n in parents]), parents.index(name), -1)
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed cid JSON: {exc}") from exc
    lo, hi = float(arr.min()), float(arr.max())
    norm = (arr - lo) / (hi - lo) if hi > lo else arr
    return PublicTask(chance, Variable(name, dcard), tuple(dec.get("info_parents", [])), tuple(chance_parents), norm)


# -- policies -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Policy:
    """``table[ctx, d] = pi(d | ctx)`` with contexts in mixed-radix order."""

    info_parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.table, dtype=float)
        if arr.ndim != 2 or np.any(arr < 0) or np.any(np.abs(arr.sum(axis=1) - 1.0) > TIE_TOL):
            raise ModelError("policy rows must be probability vectors")
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)
        object.__setattr__(self, "info_parents", tuple(self.info_parents))

    def support(self, context: int = 0) -> tuple[int, ...]:
        return tuple(int(d) for d in np.flatnonzero(self.table[context] > 0))

    def to_dict(self) -> dict[str, Any]:
        return {"info_parents": list(self.info_parents), "table": self.table.tolist()}


def check_shift(task: PublicTask, shift: InterventionSpec) -> None:
    touched = touched_variables(shift)
    if task.decision.name in touched:
        raise ModelError("a domain shift may not touch the decision")
    unknown = touched - set(task.names)
    if unknown:
        raise ModelError(f"shift touches unknown variables {sorted(unknown)}")


def shifted_utility(cid: Cid, shift: InterventionSpec) -> tuple[np.ndarray, np.ndarray]:
    check_shift(cid.task, shift)
    joint = apply_intervention(cid.chance, shift).joint
    return cid.task.weighted_utility(joint)


def conditional_eu(a: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Per-context expected utilities; NaN rows for null contexts."""
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(p[:, None] > 0, a / np.where(p > 0, p, 1.0)[:, None], np.nan)


def expected_utility_table(cid: Cid, shift: InterventionSpec) -> np.ndarray:
    a, p = shifted_utility(cid, shift)
    return conditional_eu(a, p)


def expected_utility(
    cid: Cid,
    decision_value: int,
    context: Mapping[str, int] | int | None = None,
    shift: InterventionSpec = Null(),
) -> float | None:
    """``E[U | d, pa_D; shift]``, or None if the context has probability 0."""
    if not 0 <= int(decision_value) < cid.task.n_decisions:
        raise ModelError(f"decision value {decision_value} out of range")
    ctx = cid.task.context_index(context)
    value = expected_utility_table(cid, shift)[ctx, int(decision_value)]
    return None if np.isnan(value) else float(value)


def argmax_set(values: np.ndarray, tol: float = TIE_TOL) -> np.ndarray:
    return np.flatnonzero(values >= values.max() - tol)


def optimal_policy_from_eu(task: PublicTask, eu: np.ndarray) -> Policy:
    table = np.zeros((task.n_contexts, task.n_decisions))
    for ctx in range(task.n_contexts):
        row = eu[ctx]
        if np.isnan(row).any():
            table[ctx] = 1.0 / task.n_decisions
        else:
            best = argmax_set(row)
            table[ctx, best] = 1.0 / len(best)
    return Policy(task.info_parents, table)


def optimal_policy(cid: Cid, shift: InterventionSpec = Null()) -> Policy:
    return optimal_policy_from_eu(cid.task, expected_utility_table(cid, shift))


def policy_value(cid: Cid, policy: Policy, shift: InterventionSpec = Null()) -> float:
    a, _ = shifted_utility(cid, shift)
    return float(np.sum(a * policy.table))


def regret(cid: Cid, policy: Policy, shift: InterventionSpec = Null(), raw: bool = False) -> float:
    """Shortfall against the optimal policy, in normalized units unless ``raw``."""
    if policy.table.shape != (cid.task.n_contexts, cid.task.n_decisions):
        raise ModelError("policy shape does not match the decision task")
    a, _ = shifted_utility(cid, shift)
    value = float(np.sum(a.max(axis=1)) - np.sum(a * policy.table))
    value = max(value, 0.0)
    return value * cid.scale if raw else value


# -- assumptions --------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    witness: str


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple[Check, ...]
    domain_independent: bool
    ancestors_of_utility: frozenset[str]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "witness": c.witness} for c in self.checks],
            "domain_independent": self.domain_independent,
            "ancestors_of_utility": sorted(self.ancestors_of_utility),
        }


def utility_ancestors(cid: Cid) -> frozenset[str]:
    """Chance variables that are ancestors of the utility node.

    The decision is a utility parent, so its observations and their
    ancestors count too.
    """
    dag = cid.chance.dag
    out: set[str] = set()
    for n in cid.task.utility_parents + cid.task.info_parents:
        out.add(n)
        out |= dag.ancestors(n)
    return frozenset(out)


def validate_assumptions(cid: Cid) -> AssumptionReport:
    task = cid.task
    checks = []

    # (i) no decision is optimal in every utility-parent state
    flat = task.utility.reshape(-1, task.n_decisions)
    dominant = [d for d in range(task.n_decisions) if np.all(flat[:, d] >= flat.max(axis=1) - TIE_TOL)]
    checks.append(
        Check(
            "no_dominant_decision",
            not dominant,
            f"dominant decisions {dominant}" if dominant else "every decision is beaten somewhere",
        )
    )

    # (ii) the observed context is a strict subset of the utility's ancestors
    anc = utility_ancestors(cid)
    info = set(task.info_parents)
    strict = info < anc
    checks.append(
        Check(
            "info_parents_strict_subset_of_ancestors",
            strict,
            f"Pa_D={sorted(info)} Anc_U={sorted(anc)}",
        )
    )

    # (iii) the decision influences utility directly
    varies = bool(np.any(np.ptp(task.utility, axis=-1) > TIE_TOL))
    checks.append(
        Check(
            "decision_is_utility_parent",
            varies,
            "utility varies with the decision" if varies else "utility ignores the decision",
        )
    )

    # unmediated: the decision has no chance descendants; true by construction
    checks.append(Check("unmediated", True, "decision has no chance-variable children"))

    return AssumptionReport(tuple(checks), anc <= info, anc)


# -- policies from learned models -------------------------------------------------------


def restrict_shift(shift: InterventionSpec, names: Sequence[str]) -> InterventionSpec:
    """Drop the parts of ``shift`` that touch variables outside ``names``."""
    keep = set(names)
    if isinstance(shift, Mixture):
        return Mixture(tuple((w, restrict_shift(s, names)) for w, s in shift.components))
    members = tuple(m for m in atomic_members(shift) if m.variable in keep)
    if not members:
        return Null()
    if len(members) == 1:
        return members[0]
    return Composite(members)


def policy_from_approximate_model(model: Any, task: PublicTask, shift: InterventionSpec = Null()) -> Policy:
    """Optimal policy computed against a learned chance model.

    ``model`` is a Cbn or anything with ``to_cbn()``.  It may cover only the
    utility's ancestors; shift components outside it cannot affect utility
    and are dropped.
    """
    cbn = model if isinstance(model, Cbn) else model.to_cbn()
    missing = (set(task.utility_parents) | set(task.info_parents)) - set(cbn.names)
    if missing:
        raise ModelError(f"learned model lacks {sorted(missing)}")
    sub = PublicTask(
        tuple(cbn.dag.variables),
        task.decision,
        task.info_parents,
        task.utility_parents,
        task.utility,
    )
    local = restrict_shift(shift, cbn.names)
    check_shift(sub, local)
    a, p = sub.weighted_utility(apply_intervention(cbn, local).joint)
    return optimal_policy_from_eu(sub, conditional_eu(a, p))
