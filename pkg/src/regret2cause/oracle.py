"""Policy oracles: interventions in, decisions out.

The simulated oracle answers from ground truth.  Among the decisions whose
expected utility is within ``delta`` of the best it picks one pseudo-randomly,
keyed on the seed, the intervention and the context, so every query is a pure
function of its arguments.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Sequence

import numpy as np

from .cbn import apply_intervention
from .cid import TIE_TOL, Cid, Policy, PublicTask, check_shift
from .interventions import InterventionSpec, Mixture, canonical_encoding, leaves

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def float_bits(w: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(w)))[0]


def base_key(seed: int, skeleton: str, context: int) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    h.update(b"\x00")
    h.update(skeleton.encode())
    h.update(b"\x00")
    h.update(str(int(context)).encode())
    return int.from_bytes(h.digest(), "little")


class InconsistentOracle(RuntimeError):
    """The oracle's answers contradict the assumptions of the extraction procedure."""


class PolicyOracle:
    """Query interface.  Subclasses implement ``decide``; the rest has defaults."""

    delta: float = 0.0
    task: PublicTask

    def decide(self, spec: InterventionSpec, context: int = 0) -> int:
        raise NotImplementedError

    def decide_on_line(
        self,
        sigma: InterventionSpec,
        sigma_prime: InterventionSpec,
        qs: np.ndarray,
        context: int = 0,
    ) -> np.ndarray:
        """Decisions at ``q * sigma + (1 - q) * sigma_prime`` for each q."""
        return np.array(
            [self.decide(Mixture(((float(q), sigma), (1.0 - float(q), sigma_prime))), context) for q in qs],
            dtype=np.int64,
        )

    def policy(self, spec: InterventionSpec) -> Policy:
        table = np.zeros((self.task.n_contexts, self.task.n_decisions))
        for ctx in range(self.task.n_contexts):
            table[ctx, self.decide(spec, ctx)] = 1.0
        return Policy(self.task.info_parents, table)


class SimulatedOracle(PolicyOracle):
    """δ-bounded oracle simulated from a known Cid.

    ``delta`` is measured in normalized utility units, per context.  With
    ``delta = 0`` the answer is always an optimal decision.
    """

    def __init__(self, cid: Cid, delta: float = 0.0, seed: int = 0):
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        self.cid = cid
        self.task = cid.task
        self.delta = float(delta)
        self.seed = int(seed)
        self.n_queries = 0
        self._leaf_cache: dict[InterventionSpec, tuple[np.ndarray, np.ndarray]] = {}
        self._key_cache: dict[tuple[str, int], int] = {}

    # per-leaf unnormalized expected utilities A[ctx, d] and context masses p[ctx]
    def _leaf(self, spec: InterventionSpec) -> tuple[np.ndarray, np.ndarray]:
        hit = self._leaf_cache.get(spec)
        if hit is None:
            joint = apply_intervention(self.cid.chance, spec).joint
            hit = self.task.weighted_utility(joint)
            self._leaf_cache[spec] = hit
        return hit

    def _combined(self, spec: InterventionSpec) -> tuple[np.ndarray, np.ndarray]:
        a = np.zeros((self.task.n_contexts, self.task.n_decisions))
        p = np.zeros(self.task.n_contexts)
        for w, leaf in leaves(spec):
            la, lp = self._leaf(leaf)
            a = a + w * la
            p = p + w * lp
        return a, p

    def _key(self, skeleton: str, context: int) -> int:
        k = (skeleton, context)
        hit = self._key_cache.get(k)
        if hit is None:
            hit = base_key(self.seed, skeleton, context)
            self._key_cache[k] = hit
        return hit

    def admissible(self, spec: InterventionSpec, context: int = 0) -> np.ndarray:
        check_shift(self.task, spec)
        a, p = self._combined(spec)
        return self._admissible_rows(a[context][None, :], np.array([p[context]]))[0]

    def _admissible_rows(self, a: np.ndarray, p: np.ndarray) -> np.ndarray:
        live = p > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            eu = a / np.where(live, p, 1.0)[:, None]
        best = eu.max(axis=1, keepdims=True)
        mask = eu >= best - self.delta - TIE_TOL
        mask[~live] = True
        return mask

    @staticmethod
    def _pick(mask: np.ndarray, keys: np.ndarray) -> np.ndarray:
        counts = mask.sum(axis=1).astype(np.uint64)
        rank = (keys % counts).astype(np.int64)
        cum = np.cumsum(mask, axis=1)
        return np.argmax(cum > rank[:, None], axis=1).astype(np.int64)

    def decide(self, spec: InterventionSpec, context: int = 0) -> int:
        check_shift(self.task, spec)
        self.n_queries += 1
        a, p = self._combined(spec)
        mask = self._admissible_rows(a[context][None, :], np.array([p[context]]))
        skeleton, weights = canonical_encoding(spec)
        key = self._key(skeleton, context)
        for w in weights:
            key = splitmix64(key ^ float_bits(w))
        return int(self._pick(mask, np.array([key], dtype=np.uint64))[0])

    def decide_on_line(
        self,
        sigma: InterventionSpec,
        sigma_prime: InterventionSpec,
        qs: np.ndarray,
        context: int = 0,
    ) -> np.ndarray:
        check_shift(self.task, sigma)
        check_shift(self.task, sigma_prime)
        qs = np.asarray(qs, dtype=float)
        self.n_queries += qs.size
        a1, p1 = self._combined(sigma)
        a0, p0 = self._combined(sigma_prime)
        rq = 1.0 - qs
        # same arithmetic as _combined on the two-leaf mixture
        a = (0.0 + qs[:, None] * a1[context]) + rq[:, None] * a0[context]
        p = (0.0 + qs * p1[context]) + rq * p0[context]
        mask = self._admissible_rows(a, p)

        skeleton, inner = canonical_encoding(Mixture(((0.5, sigma), (0.5, sigma_prime))))
        n1 = len(canonical_encoding(sigma)[1])
        keys = np.full(qs.shape, self._key(skeleton, context), dtype=np.uint64)
        qbits = qs.view(np.uint64)
        rbits = rq.view(np.uint64)
        for i, w in enumerate(inner):
            if i == 0:
                keys = splitmix64_array(keys ^ qbits)
            elif i == n1 + 1:
                keys = splitmix64_array(keys ^ rbits)
            else:
                keys = splitmix64_array(keys ^ np.uint64(float_bits(w)))
        return self._pick(mask, keys)


def make_delta_oracle(cid: Cid, delta: float, seed: int = 0) -> SimulatedOracle:
    return SimulatedOracle(cid, delta, seed)


def measured_regret(oracle: SimulatedOracle, spec: InterventionSpec) -> float:
    """Regret of the oracle's policy under ``spec``, computed from ground truth."""
    a, _ = oracle._combined(spec)
    pol = oracle.policy(spec)
    return float(np.sum(a.max(axis=1)) - np.sum(a * pol.table))


def decisions_for(oracle: PolicyOracle, specs: Sequence[InterventionSpec], context: int = 0) -> list[int]:
    return [oracle.decide(s, context) for s in specs]
