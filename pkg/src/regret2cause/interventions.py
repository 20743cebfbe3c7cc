"""Intervention descriptors.

An intervention spec names variables and states only, never graph structure,
so the same spec can be applied to any candidate model over the same
variables.  ``Soft`` is the one exception (it re-parents a variable) and is
kept for completeness; the extraction procedures never build one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterator, Mapping, Sequence, Union

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Null:
    """No change to the model."""


@dataclass(frozen=True)
class Hard:
    variable: str
    value: int


@dataclass(frozen=True)
class Local:
    """Push the variable's mass through ``mapping`` (state ``s`` -> ``mapping[s]``)."""

    variable: str
    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping", tuple(int(v) for v in self.mapping))

    @property
    def is_constant(self) -> bool:
        return len(set(self.mapping)) == 1


@dataclass(frozen=True)
class Soft:
    """Replace a CPD outright, possibly with a new parent set.

    ``table`` rows follow mixed-radix order over ``parents`` (first parent most
    significant), one probability vector per row.
    """

    variable: str
    parents: tuple[str, ...]
    table: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", tuple(tuple(float(p) for p in row) for row in self.table))


Atomic = Union[Hard, Local, Soft]


@dataclass(frozen=True)
class Composite:
    """Several per-variable interventions applied jointly."""

    specs: tuple[Atomic, ...]

    def __post_init__(self) -> None:
        specs = tuple(self.specs)
        names = [s.variable for s in specs]
        if len(set(names)) != len(names):
            raise ValueError(f"composite touches a variable more than once: {names}")
        for s in specs:
            if not isinstance(s, (Hard, Local, Soft)):
                raise TypeError(f"composite members must be per-variable specs, got {s!r}")
        # order is irrelevant to the semantics, so fix one
        object.__setattr__(self, "specs", tuple(sorted(specs, key=lambda s: s.variable)))


@dataclass(frozen=True)
class Mixture:
    """Perform ``spec_i`` with probability ``weight_i``."""

    components: tuple[tuple[float, "InterventionSpec"], ...]

    def __post_init__(self) -> None:
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w < 0 or not math.isfinite(w) for w, _ in comps):
            raise ValueError("mixture weights must be finite and nonnegative")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)


InterventionSpec = Union[Null, Hard, Local, Soft, Composite, Mixture]


def hard(**assignment: int) -> InterventionSpec:
    """``hard(X=1, Y=0)`` -> Composite of Hard specs (or a single Hard)."""
    specs = tuple(Hard(k, int(v)) for k, v in assignment.items())
    if not specs:
        return Null()
    if len(specs) == 1:
        return specs[0]
    return Composite(specs)


def hard_from_mapping(assignment: Mapping[str, int]) -> InterventionSpec:
    return hard(**{str(k): int(v) for k, v in assignment.items()})


def combine(*specs: InterventionSpec) -> InterventionSpec:
    """Join non-mixture specs on disjoint variables into one Composite."""
    members: list[Atomic] = []
    for spec in specs:
        members.extend(atomic_members(spec))
    if not members:
        return Null()
    if len(members) == 1:
        return members[0]
    return Composite(tuple(members))


def atomic_members(spec: InterventionSpec) -> tuple[Atomic, ...]:
    if isinstance(spec, Null):
        return ()
    if isinstance(spec, (Hard, Local, Soft)):
        return (spec,)
    if isinstance(spec, Composite):
        return spec.specs
    raise TypeError("mixtures have no per-variable decomposition")


def leaves(spec: InterventionSpec, weight: float = 1.0) -> Iterator[tuple[float, InterventionSpec]]:
    """Flatten nested mixtures into ``(weight, non-mixture spec)`` pairs."""
    if isinstance(spec, Mixture):
        for w, sub in spec.components:
            yield from leaves(sub, weight * w)
    else:
        yield weight, spec


def touched_variables(spec: InterventionSpec) -> set[str]:
    out: set[str] = set()
    for _, leaf in leaves(spec):
        out.update(s.variable for s in atomic_members(leaf))
    return out


def fixed_values(spec: InterventionSpec) -> dict[str, int] | None:
    """States forced by a non-mixture spec, or None if it is a mixture.

    Hard specs and constant Local maps both force a state.
    """
    if isinstance(spec, Mixture):
        return None
    out: dict[str, int] = {}
    for s in atomic_members(spec):
        if isinstance(s, Hard):
            out[s.variable] = s.value
        elif isinstance(s, Local) and s.is_constant:
            out[s.variable] = s.mapping[0]
    return out


# -- canonical encoding ------------------------------------------------------

def _skeleton(spec: InterventionSpec, weights: list[float]) -> Any:
    if isinstance(spec, Null):
        return ["null"]
    if isinstance(spec, Hard):
        return ["hard", spec.variable, spec.value]
    if isinstance(spec, Local):
        return ["local", spec.variable, list(spec.mapping)]
    if isinstance(spec, Soft):
        return ["soft", spec.variable, list(spec.parents), [[repr(p) for p in row] for row in spec.table]]
    if isinstance(spec, Composite):
        return ["composite", [_skeleton(s, weights) for s in spec.specs]]
    if isinstance(spec, Mixture):
        parts = []
        for w, sub in spec.components:
            weights.append(w)
            parts.append(_skeleton(sub, weights))
        return ["mixture", parts]
    raise TypeError(f"not an intervention spec: {spec!r}")


def canonical_encoding(spec: InterventionSpec) -> tuple[str, tuple[float, ...]]:
    """Split a spec into a weight-free skeleton string and its weights.

    Weights are listed in depth-first order.  Oracles key their randomness on
    the pair so that a family of mixtures differing only in weights can be
    hashed in bulk.
    """
    weights: list[float] = []
    skel = _skeleton(spec, weights)
    return json.dumps(skel, separators=(",", ":")), tuple(weights)


# -- JSON ----------------------------------------------------------------------

def spec_to_json(spec: InterventionSpec) -> dict[str, Any]:
    if isinstance(spec, Null):
        return {"type": "null"}
    if isinstance(spec, Hard):
        return {"type": "hard", "variable": spec.variable, "value": spec.value}
    if isinstance(spec, Local):
        return {"type": "local", "variable": spec.variable, "map": list(spec.mapping)}
    if isinstance(spec, Soft):
        return {
            "type": "soft",
            "variable": spec.variable,
            "parents": list(spec.parents),
            "table": [list(row) for row in spec.table],
        }
    if isinstance(spec, Composite):
        return {"type": "composite", "specs": [spec_to_json(s) for s in spec.specs]}
    if isinstance(spec, Mixture):
        return {
            "type": "mixture",
            "components": [{"weight": w, "spec": spec_to_json(s)} for w, s in spec.components],
        }
    raise TypeError(f"not an intervention spec: {spec!r}")


def spec_from_json(obj: Mapping[str, Any]) -> InterventionSpec:
    kind = obj.get("type")
    if kind == "null":
        return Null()
    if kind == "hard":
        return Hard(str(obj["variable"]), int(obj["value"]))
    if kind == "local":
        return Local(str(obj["variable"]), tuple(int(v) for v in obj["map"]))
    if kind == "soft":
        return Soft(str(obj["variable"]), tuple(obj["parents"]), tuple(tuple(r) for r in obj["table"]))
    if kind == "composite":
        members = [spec_from_json(s) for s in obj["specs"]]
        return Composite(tuple(members))  # type: ignore[arg-type]
    if kind == "mixture":
        return Mixture(tuple((float(c["weight"]), spec_from_json(c["spec"])) for c in obj["components"]))
    raise ValueError(f"unknown intervention type {kind!r}")


def mixture_of(pairs: Sequence[tuple[float, InterventionSpec]]) -> Mixture:
    return Mixture(tuple(pairs))
