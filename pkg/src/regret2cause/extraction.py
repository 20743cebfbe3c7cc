"""Recover a causal model from the decisions of a policy oracle.

Every measurement has the same shape: mix a shift ``sigma`` with a fully hard
"anchor" intervention ``sigma'`` and find the mixture weight at which the
oracle's decision leaves the anchor's optimal set.  That weight pins down the
expected-utility gap ``Q`` between two decisions under ``sigma``.  Gaps under
leave-one-out interventions, combined through the utility table, give CPD
entries; comparing entries across contexts gives edges.

Cost: each target variable needs one row per joint state of the variables
held fixed, so the work grows exponentially with the number of chance
variables.  Keep models small (six or so chance variables).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .cbn import Cbn, Cpd, Dag, ModelError, Variable, mixed_radix_index
from .cid import TIE_TOL, PublicTask, argmax_set
from .interventions import Hard, InterventionSpec, Local, Mixture, combine, fixed_values, hard_from_mapping
from .oracle import InconsistentOracle, PolicyOracle

Mode = Literal["mc", "bisect"]
Sampling = Literal["iid", "stratified"]

BISECT_PRECISION = 2.0**-50
EDGE_EPS = 1e-9
DEFAULT_Z = 3.0
_CHUNK = 1 << 18


class DomainDependenceError(ValueError):
    """No utility state makes the given decision suboptimal."""


class DegenerateMixture(ValueError):
    """The estimated switch weight is zero, so the gap is unbounded."""


class Unidentifiable(ValueError):
    """A parameter cannot be pinned down from the available measurements."""


@dataclass(frozen=True)
class Anchor:
    spec: InterventionSpec
    x_prime: tuple[int, ...]
    d2: int
    optimal: tuple[int, ...]
    margin: float


@dataclass(frozen=True)
class QCritEstimate:
    q_crit_hat: float
    d1: int
    d2: int
    d3: int
    anchor: Anchor
    n_samples: int
    mode: str
    context: int
    hits: int
    stderr: float


@dataclass(frozen=True)
class GapEstimate:
    """``Q = sum_c P(c, ctx; sigma) [U(d_hi, x) - U(d_lo, x)]`` with bounds."""

    q_value: float
    lower: float
    upper: float
    delta: float
    xi: float
    delta0: float
    d_hi: int
    d_lo: int
    source: QCritEstimate | None = None

    def oriented(self, d_a: int, d_b: int) -> "GapEstimate":
        """The same gap expressed as ``U(d_a) - U(d_b)``."""
        if (self.d_hi, self.d_lo) == (d_a, d_b):
            return self
        if (self.d_hi, self.d_lo) == (d_b, d_a):
            return GapEstimate(-self.q_value, -self.upper, -self.lower, self.delta, self.xi, self.delta0, d_a, d_b, self.source)
        raise Unidentifiable(f"gap measured for decisions {(self.d_hi, self.d_lo)}, need {(d_a, d_b)}")

    def to_dict(self) -> dict[str, Any]:
        out = {
            "q_value": self.q_value,
            "lower": self.lower,
            "upper": self.upper,
            "delta": self.delta,
            "xi": self.xi,
            "delta0": self.delta0,
            "decisions": [self.d_hi, self.d_lo],
        }
        if self.source is not None:
            out["q_crit_hat"] = self.source.q_crit_hat
            out["n_samples"] = self.source.n_samples
            out["mode"] = self.source.mode
        return out


def mix(q: float, sigma: InterventionSpec, sigma_prime: InterventionSpec) -> Mixture:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"mixture weight {q} outside [0, 1]")
    return Mixture(((float(q), sigma), (1.0 - float(q), sigma_prime)))


def find_anchor(task: PublicTask, d1: int, context: int = 0) -> Anchor:
    """A utility state where ``d1`` is beaten, as a hard intervention on all of C.

    Among qualifying states the one where ``d1`` loses by the most is taken
    (ties to the lexicographically first); a wide gap keeps the later
    division by it well conditioned.  The state must agree with ``context``
    on any observed variable.
    """
    ctx = task.context_assignment(context)
    best: tuple[float, tuple[int, ...], np.ndarray] | None = None
    for x in task.chance_utility_states():
        assign = dict(zip(task.utility_parents, (int(v) for v in x)))
        if any(assign.get(n, s) != s for n, s in ctx.items()):
            continue
        row = task.utility[tuple(x)]
        opt = argmax_set(row)
        if d1 in opt:
            continue
        margin = float(row.max() - row[d1])
        if best is None or margin > best[0] + TIE_TOL:
            best = (margin, tuple(int(v) for v in x), opt)
    if best is None:
        raise DomainDependenceError(f"decision {d1} is optimal in every utility state consistent with context {ctx}")
    margin, x, opt = best
    full = {n: 0 for n in task.names}
    full.update(ctx)
    full.update(zip(task.utility_parents, x))
    return Anchor(hard_from_mapping(full), x, int(opt[0]), tuple(int(d) for d in opt), margin)


def _mc_hits(
    oracle: PolicyOracle,
    sigma,
    anchor: Anchor,
    n: int,
    rng: np.random.Generator,
    context: int,
    sampling: Sampling,
) -> int:
    opt = np.array(anchor.optimal)
    hits = 0
    for start in range(0, n, _CHUNK):
        m = min(n - start, _CHUNK)
        u = rng.random(m)
        if sampling == "stratified":
            # one uniform draw inside each of n equal cells of [0, 1)
            qs = (np.arange(start, start + m) + u) / n
        else:
            qs = u
        decisions = oracle.decide_on_line(sigma, anchor.spec, qs, context)
        hits += int(np.isin(decisions, opt).sum())
    return hits


def estimate_qcrit(
    oracle: PolicyOracle,
    sigma: InterventionSpec,
    task: PublicTask,
    n: int,
    rng: np.random.Generator | None = None,
    mode: Mode = "mc",
    context: int = 0,
    anchor: Anchor | None = None,
    sampling: Sampling = "stratified",
) -> QCritEstimate:
    """Locate the weight where the oracle stops choosing the anchor's optimum.

    ``mc`` draws ``n`` uniform weights and reports the fraction answered from
    the anchor's optimal set; ``stratified`` places one draw in each of ``n``
    equal cells, ``iid`` draws them independently.  ``bisect`` searches the switch point directly
    and is only meaningful for an exact (``delta = 0``) oracle.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    d1 = oracle.decide(sigma, context)
    if anchor is None:
        anchor = find_anchor(task, d1, context)
    opt = set(anchor.optimal)

    def in_set(q: float) -> bool:
        return oracle.decide(mix(q, sigma, anchor.spec), context) in opt

    if mode == "mc":
        if rng is None:
            raise ValueError("monte-carlo mode needs a random generator")
        hits = _mc_hits(oracle, sigma, anchor, n, rng, context, sampling)
        q_hat = hits / n
        if sampling == "stratified":
            # only cells inside the oracle's indifference band are random
            band = min(1.0, 2.0 * oracle.delta / anchor.margin * q_hat)
            stderr = math.sqrt(band / (4.0 * n)) + 1.0 / n
        else:
            stderr = max(math.sqrt(q_hat * (1.0 - q_hat) / n), 1.0 / n)
        eta = 1.0 / n
    elif mode == "bisect":
        if oracle.delta > 0:
            raise ValueError("bisection assumes an exact oracle (delta = 0)")
        lo, hi = 0.0, 1.0
        if in_set(1.0):
            lo = 1.0
        else:
            while hi - lo > BISECT_PRECISION:
                mid = 0.5 * (lo + hi)
                if in_set(mid):
                    lo = mid
                else:
                    hi = mid
        q_hat = 0.5 * (lo + hi)
        hits, stderr = 0, 0.0
        eta = 2.0**-40
    else:
        raise ValueError(f"unknown mode {mode!r}")

    d3 = None
    while True:
        q = min(1.0, q_hat + eta)
        d = oracle.decide(mix(q, sigma, anchor.spec), context)
        if d not in opt:
            d3 = d
            break
        if q >= 1.0:
            break
        eta *= 2.0
    if d3 is None:
        if oracle.delta == 0:
            raise InconsistentOracle("exact oracle still picks the anchor optimum at q = 1")
        # a bounded oracle may legitimately stay inside the set; d1 is outside it
        d3 = d1
    return QCritEstimate(q_hat, d1, anchor.d2, int(d3), anchor, n, mode, context, hits, stderr)


def gap_from_qcrit(est: QCritEstimate, task: PublicTask, delta: float, z: float = 0.0) -> GapEstimate:
    """Turn a switch weight into the gap ``Q`` for decisions ``(d2, d3)``.

    With ``delta > 0`` the bounds account for the oracle's slack.  ``z > 0``
    additionally widens them by ``z`` Monte-Carlo standard errors of the
    switch weight.
    """
    assign = dict(zip(task.utility_parents, est.anchor.x_prime))
    delta0 = task.utility_at(est.d2, assign) - task.utility_at(est.d3, assign)
    if delta0 <= 0:
        raise InconsistentOracle(f"anchor gap {delta0} is not positive")
    q = est.q_crit_hat
    if q <= 0:
        raise DegenerateMixture("switch weight estimated as zero")
    xi = delta / delta0
    value = delta0 * (1.0 - 1.0 / q)
    spread = z * est.stderr
    q_lo, q_hi = q - spread, min(1.0, q + spread)
    # Q = delta0 (1 - c / q) is increasing in q when c > 0
    c_up, c_dn = 1.0 - xi, 1.0 + xi
    if c_up >= 0:
        upper = delta0 * (1.0 - c_up / q_hi)
    else:
        upper = math.inf if q_lo <= 0 else delta0 * (1.0 - c_up / q_lo)
    lower = -math.inf if q_lo <= 0 else delta0 * (1.0 - c_dn / q_lo)
    if delta == 0 and spread == 0:
        lower = upper = value
    return GapEstimate(value, lower, upper, float(delta), xi, delta0, est.d2, est.d3, est)


# -- interval helpers --------------------------------------------------------------------


def interval_sub(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    return a[0] - b[1], a[1] - b[0]


def interval_div(num: tuple[float, float], den: tuple[float, float]) -> tuple[float, float]:
    if den[0] <= 0.0 <= den[1]:
        raise Unidentifiable("denominator interval contains zero")
    corners = [num[0] / den[0], num[0] / den[1], num[1] / den[0], num[1] / den[1]]
    return min(corners), max(corners)


# -- gap measurement under one shift -----------------------------------------------------


@dataclass
class _Measurer:
    oracle: PolicyOracle
    task: PublicTask
    n: int
    rng: np.random.Generator | None
    mode: Mode
    z: float
    sampling: Sampling = "stratified"
    cache: dict = field(default_factory=dict)

    def exact(self, spec: InterventionSpec, context: int, pair: tuple[int, int]) -> GapEstimate | None:
        fixed = fixed_values(spec)
        if fixed is None or set(fixed) != set(self.task.names):
            return None
        ctx = self.task.context_assignment(context)
        if any(fixed[k] != v for k, v in ctx.items()):
            value = 0.0
        else:
            value = self.task.utility_at(pair[0], fixed) - self.task.utility_at(pair[1], fixed)
        return GapEstimate(value, value, value, self.oracle.delta, 0.0, 1.0, pair[0], pair[1])

    def gap(self, spec: InterventionSpec, context: int, pair: tuple[int, int] | None) -> GapEstimate:
        if pair is not None:
            hit = self.exact(spec, context, pair)
            if hit is not None:
                return hit
        key = (spec, context)
        g = self.cache.get(key)
        if g is None:
            est = estimate_qcrit(self.oracle, spec, self.task, self.n, self.rng, self.mode, context, sampling=self.sampling)
            g = gap_from_qcrit(est, self.task, self.oracle.delta, self.z if self.mode == "mc" else 0.0)
            self.cache[key] = g
        return g if pair is None else g.oriented(*pair)


@dataclass(frozen=True)
class RowEstimate:
    """One CPD row of ``variable`` under a fixed assignment of the other variables."""

    variable: str
    fixed: tuple[tuple[str, int], ...]
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    identified: bool
    gaps: tuple[GapEstimate, ...]
    reason: str = ""


def _row_contexts(task: PublicTask, target: str, fixed: dict[str, int], card: int) -> list[int]:
    """Context index to use when estimating each state of ``target``."""
    out = []
    for s in range(card):
        assign = {}
        for n in task.info_parents:
            if n == target:
                assign[n] = s
            else:
                assign[n] = fixed.get(n, 0)
        out.append(mixed_radix_index([assign[n] for n in task.info_parents], task.context_cards))
    return out


def recover_row(
    oracle: PolicyOracle,
    task: PublicTask,
    target: str,
    fixed: dict[str, int],
    n: int,
    rng: np.random.Generator | None,
    mode: Mode = "mc",
    z: float = DEFAULT_Z,
    measurer: _Measurer | None = None,
    sampling: Sampling = "stratified",
) -> RowEstimate:
    """All states of ``P(target | do(fixed))``.

    Variables absent from ``fixed`` (other than the target) are left free;
    they must form a causal chain carrying the target's influence to the
    utility or the decision's observations.  State ``s`` comes from the
    gap under ``do(fixed)`` minus the gap after merging ``s`` into another
    state, divided by the difference of the two hard-target gaps.  The last
    state is the complement.
    """
    meas = measurer or _Measurer(oracle, task, n, rng, mode, z, sampling)
    card = task.card(target)
    sigma1 = hard_from_mapping(fixed)
    contexts = _row_contexts(task, target, fixed, card)
    point = np.full(card, np.nan)
    lower = np.full(card, np.nan)
    upper = np.full(card, np.nan)
    used: list[GapEstimate] = []
    try:
        for s in range(card - 1):
            ctx = contexts[s]
            g1 = meas.gap(sigma1, ctx, None)
            pair = (g1.d_hi, g1.d_lo)
            beta = [meas.gap(combine(sigma1, Hard(target, t)), ctx, pair) for t in range(card)]
            others = [t for t in range(card) if t != s]
            s2 = max(others, key=lambda t: (abs(beta[s].q_value - beta[t].q_value), -t))
            merge = tuple(s2 if t == s else t for t in range(card))
            g2 = meas.gap(combine(sigma1, Local(target, merge)), ctx, pair)
            used += [g1, g2, beta[s], beta[s2]]
            num = g1.q_value - g2.q_value
            den = beta[s].q_value - beta[s2].q_value
            if den == 0:
                raise Unidentifiable(f"{target}={s}: hard-target gaps coincide")
            point[s] = num / den
            lower[s], upper[s] = interval_div(
                interval_sub((g1.lower, g1.upper), (g2.lower, g2.upper)),
                interval_sub((beta[s].lower, beta[s].upper), (beta[s2].lower, beta[s2].upper)),
            )
    except (Unidentifiable, DegenerateMixture, DomainDependenceError) as exc:
        return RowEstimate(target, tuple(sorted(fixed.items())), point, lower, upper, False, tuple(used), str(exc))
    point[-1] = 1.0 - point[:-1].sum()
    lower[-1] = 1.0 - upper[:-1].sum()
    upper[-1] = 1.0 - lower[:-1].sum()
    return RowEstimate(target, tuple(sorted(fixed.items())), point, lower, upper, True, tuple(used))


def recover_cpd_entry(
    oracle: PolicyOracle,
    task: PublicTask,
    variable: str,
    state: int,
    fixed: dict[str, int],
    n: int = 10_000,
    rng: np.random.Generator | None = None,
    mode: Mode = "mc",
    z: float = DEFAULT_Z,
    sampling: Sampling = "stratified",
) -> tuple[float, tuple[float, float]]:
    """``P(variable = state | do(fixed))`` with an interval.

    ``fixed`` must assign every chance variable except ``variable`` and any
    chain of descendants that links it to the utility.
    """
    row = recover_row(oracle, task, variable, fixed, n, rng, mode, z, sampling=sampling)
    if not row.identified:
        raise Unidentifiable(row.reason)
    return float(row.point[state]), (float(row.lower[state]), float(row.upper[state]))


# -- full reconstruction ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReconstructedModel:
    graph: Dag
    parents: dict[str, tuple[str, ...]]
    points: dict[str, np.ndarray]
    lower: dict[str, np.ndarray]
    upper: dict[str, np.ndarray]
    provenance: dict[str, tuple[RowEstimate, ...]]
    unidentified: tuple[str, ...]
    delta: float
    mode: str

    def to_cbn(self) -> Cbn:
        """Point estimates clipped to [0, 1] and renormalized; unknown rows uniform."""
        cpds = {}
        for name in self.graph.names:
            t = np.array(self.points[name], dtype=float)
            t = np.where(np.isfinite(t), np.clip(t, 0.0, 1.0), np.nan)
            bad = np.isnan(t).any(axis=1) | (np.nansum(t, axis=1) <= 0)
            t[bad] = 1.0
            t = t / t.sum(axis=1, keepdims=True)
            cpds[name] = Cpd(name, self.parents[name], t)
        return Cbn(self.graph, cpds)

    def to_dict(self) -> dict[str, Any]:
        out = self.to_cbn().to_dict()
        out["bounds"] = [
            {
                "variable": n,
                "parents": list(self.parents[n]),
                "estimate": _nan_to_none(self.points[n]),
                "lower": _nan_to_none(self.lower[n]),
                "upper": _nan_to_none(self.upper[n]),
            }
            for n in self.graph.names
        ]
        out["unidentified"] = list(self.unidentified)
        out["delta"] = self.delta
        out["mode"] = self.mode
        return out


def _nan_to_none(arr: np.ndarray) -> list:
    return [[None if not np.isfinite(v) else float(v) for v in row] for row in np.asarray(arr)]


def _rows_differ(a: RowEstimate, b: RowEstimate, exact: bool) -> bool:
    if exact:
        return bool(np.any(np.abs(a.point - b.point) > EDGE_EPS))
    return bool(np.any((a.upper < b.lower) | (b.upper < a.lower)))


def reconstruct(
    oracle: PolicyOracle,
    task: PublicTask,
    n: int = 10_000,
    rng: np.random.Generator | None = None,
    mode: Mode = "mc",
    z: float = DEFAULT_Z,
    sampling: Sampling = "stratified",
) -> ReconstructedModel:
    """Learn the graph and CPDs over the utility's chance ancestors.

    Starts from the observed variables and the utility's chance parents.
    For each variable on the worklist it estimates every leave-chain-out row,
    declares an edge from each fixed variable whose value changes the row,
    and queues newly found parents with the chain extended by one link.
    In exact mode (``delta = 0`` with bisection) rows count as different
    beyond ``EDGE_EPS``; otherwise only disjoint intervals count, so every
    reported edge is real and only weak ones can be missed.
    """
    exact = mode == "bisect" and oracle.delta == 0
    meas = _Measurer(oracle, task, n, rng, mode, z, sampling)
    seeds = list(task.info_parents) + [v for v in task.utility_parents if v not in task.info_parents]
    chains: dict[str, tuple[str, ...]] = {v: (v,) for v in seeds}
    queue = list(seeds)
    found_parents: dict[str, list[str]] = {}
    rows: dict[str, list[RowEstimate]] = {}
    order = {v: i for i, v in enumerate(task.names)}

    while queue:
        target = queue.pop(0)
        free = set(chains[target])
        held = [v for v in task.names if v not in free]
        cards = [task.card(v) for v in held]
        by_state: dict[tuple[int, ...], RowEstimate] = {}
        for states in itertools.product(*(range(k) for k in cards)):
            fixed = dict(zip(held, states))
            by_state[states] = recover_row(oracle, task, target, fixed, n, rng, mode, z, meas)
        rows[target] = list(by_state.values())

        parents = []
        for j, name in enumerate(held):
            hit = False
            for states, row in by_state.items():
                if not row.identified:
                    continue
                for alt in range(states[j] + 1, cards[j]):
                    other = by_state[states[:j] + (alt,) + states[j + 1 :]]
                    if other.identified and _rows_differ(row, other, exact):
                        hit = True
                        break
                if hit:
                    break
            if hit:
                parents.append(name)
        found_parents[target] = sorted(parents, key=order.__getitem__)
        for p in found_parents[target]:
            longer = (p,) + chains[target]
            # a variable whose rows could not be measured along a shorter
            # chain gets another try along the longer one
            retry = p in rows and p not in queue and len(longer) > len(chains[p]) and not all(r.identified for r in rows[p])
            if p not in chains or retry:
                chains[p] = longer
                queue.append(p)

    learned = sorted(chains, key=order.__getitem__)
    variables = tuple(Variable(v, task.card(v)) for v in learned)
    edges = frozenset((p, c) for c, ps in found_parents.items() for p in ps)
    graph = Dag(variables, edges)

    points, lows, highs, prov, unknown = {}, {}, {}, {}, []
    for v in learned:
        ps = tuple(found_parents[v])
        pcards = [task.card(p) for p in ps]
        n_rows = int(np.prod(pcards, dtype=np.int64))
        card = task.card(v)
        pt = np.full((n_rows, card), np.nan)
        lo = np.full((n_rows, card), np.nan)
        hi = np.full((n_rows, card), np.nan)
        groups: dict[int, list[RowEstimate]] = {}
        for row in rows[v]:
            fixed = dict(row.fixed)
            groups.setdefault(mixed_radix_index([fixed[p] for p in ps], pcards), []).append(row)
        for r in range(n_rows):
            good = [row for row in groups.get(r, []) if row.identified]
            if not good:
                unknown.append(f"{v}[row {r}]")
                continue
            pt[r] = np.mean([row.point for row in good], axis=0)
            lo_r = np.max([row.lower for row in good], axis=0)
            hi_r = np.min([row.upper for row in good], axis=0)
            empty = lo_r > hi_r
            if np.any(empty):
                lo_r = np.where(empty, np.min([row.lower for row in good], axis=0), lo_r)
                hi_r = np.where(empty, np.max([row.upper for row in good], axis=0), hi_r)
            lo[r], hi[r] = lo_r, hi_r
            pt[r] = np.clip(pt[r], lo_r, hi_r)
        points[v], lows[v], highs[v] = pt, lo, hi
        prov[v] = tuple(rows[v])
        found_parents[v] = list(ps)

    return ReconstructedModel(
        graph,
        {v: tuple(found_parents[v]) for v in learned},
        points,
        lows,
        highs,
        prov,
        tuple(unknown),
        oracle.delta,
        mode,
    )


# -- two-variable graph learner -------------------------------------------------------------


@dataclass(frozen=True)
class Interventional:
    """``P(target = 0 | do(source = value))`` from one switch-weight estimate."""

    target: str
    source: str
    value: int
    p0: float
    stderr: float
    lower: float
    upper: float
    estimate: QCritEstimate | None


def _interventional(
    oracle: PolicyOracle,
    task: PublicTask,
    source: str,
    value: int,
    target: str,
    n: int,
    rng: np.random.Generator | None,
    mode: Mode,
    z: float,
    sampling: Sampling,
) -> Interventional:
    nan = Interventional(target, source, value, math.nan, math.inf, -math.inf, math.inf, None)
    try:
        est = estimate_qcrit(oracle, Hard(source, value), task, n, rng, mode, sampling=sampling)
        gap = gap_from_qcrit(est, task, oracle.delta, z if mode == "mc" else 0.0)
    except (DomainDependenceError, InconsistentOracle, DegenerateMixture):
        return nan
    du = []
    for t in (0, 1):
        st = {source: value, target: t}
        du.append(task.utility_at(est.d2, st) - task.utility_at(est.d3, st))
    denom = du[0] - du[1]
    if denom == 0:
        return nan
    q = est.q_crit_hat
    p0 = (gap.q_value - du[1]) / denom
    ends = sorted(((gap.lower - du[1]) / denom, (gap.upper - du[1]) / denom))
    se = abs(gap.delta0 / (q * q * denom)) * est.stderr
    return Interventional(target, source, value, p0, se, ends[0], ends[1], est)


@dataclass(frozen=True)
class GraphLearnerResult:
    x: str
    y: str
    edges: frozenset[tuple[str, str]]
    joint: np.ndarray
    interventionals: tuple[Interventional, ...]
    valid: bool

    @property
    def label(self) -> str:
        if not self.edges:
            return "empty"
        ((p, c),) = self.edges
        return f"{p}->{c}"


Equality = Literal["zscore", "interval"]


def graph_learner_binary(
    oracle: PolicyOracle,
    task: PublicTask,
    n: int = 10_000,
    rng: np.random.Generator | None = None,
    mode: Mode = "mc",
    z: float = DEFAULT_Z,
    tol: float = EDGE_EPS,
    equality: Equality = "zscore",
    sampling: Sampling = "stratified",
) -> GraphLearnerResult:
    """Structure and joint of two binary chance variables from four switch weights.

    Interventional probabilities under the two settings of a cause are
    compared for equality: within ``tol`` in bisection mode; in Monte-Carlo
    mode either within ``z`` combined standard errors (``zscore``) or by
    overlap of their regret-aware intervals (``interval``).  If the
    interventionals of the second variable agree, the first variable is not
    its cause.
    """
    if len(task.names) != 2 or any(k != 2 for k in task.cards) or task.n_decisions != 2 or task.info_parents:
        raise ModelError("graph learner needs two binary chance variables, a binary decision and no observations")
    if set(task.utility_parents) != set(task.names):
        raise ModelError("graph learner needs both chance variables in the utility")
    x, y = task.names
    args = (n, rng, mode, z, sampling)
    x_given_y = [_interventional(oracle, task, y, v, x, *args) for v in (0, 1)]
    y_given_x = [_interventional(oracle, task, x, v, y, *args) for v in (0, 1)]

    def same(a: Interventional, b: Interventional) -> bool:
        if not (math.isfinite(a.p0) and math.isfinite(b.p0)):
            return False
        if mode == "bisect":
            return abs(a.p0 - b.p0) <= tol
        if equality == "interval":
            return not (a.upper < b.lower or b.upper < a.lower)
        return abs(a.p0 - b.p0) <= max(tol, z * math.hypot(a.stderr, b.stderr))

    def dist(i: Interventional) -> np.ndarray:
        return np.array([i.p0, 1.0 - i.p0])

    joint = np.zeros((2, 2))
    if same(*y_given_x):
        if same(*x_given_y):
            edges: frozenset[tuple[str, str]] = frozenset()
            joint = np.outer(dist(x_given_y[0]), dist(y_given_x[0]))
        else:
            edges = frozenset({(y, x)})
            py = dist(y_given_x[0])
            for yv in (0, 1):
                joint[:, yv] = py[yv] * dist(x_given_y[yv])
    else:
        edges = frozenset({(x, y)})
        px = dist(x_given_y[0])
        for xv in (0, 1):
            joint[xv, :] = px[xv] * dist(y_given_x[xv])
    probs = [i.p0 for i in x_given_y + y_given_x]
    valid = all(math.isfinite(p) and -TIE_TOL <= p <= 1.0 + TIE_TOL for p in probs)
    return GraphLearnerResult(x, y, edges, joint, tuple(x_given_y + y_given_x), valid)
