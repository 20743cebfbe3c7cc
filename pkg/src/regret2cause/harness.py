"""Error-versus-regret sweeps for the two-variable graph learner.

For each normalized regret bound ``b`` and each environment, the oracle's
raw bound is ``b`` times the environment's unshifted expected-utility gap
between the two decisions.  The same environments are reused across bounds
so the curves differ only through the bound and the per-bound streams.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .cid import Cid, expected_utility_table
from .envgen import ConfigurationError, GeneratorConfig, env_rng, random_cid
from .extraction import graph_learner_binary
from .interventions import Null
from .oracle import SimulatedOracle

log = logging.getLogger(__name__)

CSV_HEADER = (
    "regret_bound_normalized",
    "n_envs",
    "g_error_rate",
    "p_mean_abs_error",
    "p_worst_abs_error",
    "baseline_g_error_rate",
    "baseline_p_mean_abs_error",
    "fallback_rate",
)

THREADS_ENV = "REGRET2CAUSE_THREADS"


@dataclass(frozen=True)
class SweepConfig:
    regret_bounds: tuple[float, ...]
    n_envs: int = 1000
    n_samples: int = 10_000
    seed: int = 0
    mode: str = "mc"
    margin: float = 0.01
    include_fallback: bool = True
    equality_z: float = 3.0
    sampling: str = "stratified"
    equality: str = "zscore"

    def __post_init__(self) -> None:
        bounds = tuple(float(b) for b in self.regret_bounds)
        object.__setattr__(self, "regret_bounds", bounds)
        if not bounds:
            raise ConfigurationError("need at least one regret bound")
        if any(not 0.0 <= b <= 1.0 for b in bounds):
            raise ConfigurationError("regret bounds must lie in [0, 1]")
        if self.n_envs < 1 or self.n_samples < 1:
            raise ConfigurationError("n_envs and n_samples must be positive")
        if self.mode not in ("mc", "bisect"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.mode == "bisect" and any(b > 0 for b in bounds):
            raise ConfigurationError("bisection mode only supports a zero regret bound")
        if self.sampling not in ("iid", "stratified"):
            raise ConfigurationError(f"unknown sampling {self.sampling!r}")
        if self.equality not in ("zscore", "interval"):
            raise ConfigurationError(f"unknown equality test {self.equality!r}")


@dataclass(frozen=True)
class SweepRow:
    regret_bound_normalized: float
    n_envs: int
    g_error_rate: float
    p_mean_abs_error: float
    p_worst_abs_error: float
    baseline_g_error_rate: float
    baseline_p_mean_abs_error: float
    fallback_rate: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, k) for k in CSV_HEADER)


def _stream(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def _oracle_seed(seed: int, bound_idx: int, env_idx: int) -> int:
    ss = np.random.SeedSequence([int(seed), 1, int(bound_idx), int(env_idx)])
    return int(ss.generate_state(1, np.uint64)[0])


def unshifted_gap(cid: Cid) -> float:
    """``|E[u | D=1] - E[u | D=0]|`` with no shift (normalized utility units)."""
    eu = expected_utility_table(cid, Null())[0]
    return float(abs(eu[1] - eu[0]))


def _guess(rng: np.random.Generator, names: tuple[str, str]) -> tuple[frozenset, np.ndarray]:
    x, y = names
    edges = frozenset({(x, y)}) if rng.random() < 0.5 else frozenset({(y, x)})
    return edges, np.full((2, 2), 0.25)


def evaluate_env(
    cid: Cid,
    env_idx: int,
    bound: float,
    bound_idx: int,
    config: SweepConfig,
) -> dict[str, Any]:
    """Run the graph learner on one environment at one bound and score it."""
    names = cid.chance.names
    truth = np.asarray(cid.chance.joint)
    true_edges = cid.chance.dag.edges
    gap = unshifted_gap(cid)
    delta = bound * gap
    oracle = SimulatedOracle(cid, delta, _oracle_seed(config.seed, bound_idx, env_idx))
    rng = _stream(config.seed, 2, bound_idx, env_idx)
    result = graph_learner_binary(
        oracle, cid.task, config.n_samples, rng, config.mode,
        z=config.equality_z, equality=config.equality, sampling=config.sampling,
    )
    edges, joint = result.edges, result.joint
    fallback = not result.valid
    if fallback:
        edges, joint = _guess(_stream(config.seed, 4, bound_idx, env_idx), names)
    err = np.abs(joint - truth)
    base_edges, base_joint = _guess(_stream(config.seed, 3, bound_idx, env_idx), names)
    base_err = np.abs(base_joint - truth)
    return {
        "env": env_idx,
        "true_graph": sorted(map(list, true_edges)),
        "learned_graph": sorted(map(list, edges)),
        "graph_error": edges != true_edges,
        "p_mean_abs_error": float(err.mean()),
        "p_worst_abs_error": float(err.max()),
        "fallback": fallback,
        "baseline_graph_error": base_edges != true_edges,
        "baseline_p_mean_abs_error": float(base_err.mean()),
        "delta": delta,
        "unshifted_gap": gap,
        "interventionals": [i.p0 if np.isfinite(i.p0) else None for i in result.interventionals],
    }


def _env_task(args: tuple[SweepConfig, int]) -> list[dict[str, Any]]:
    config, idx = args
    cid = sweep_env(config, idx)
    return [evaluate_env(cid, idx, b, k, config) for k, b in enumerate(config.regret_bounds)]


def sweep_env(config: SweepConfig, idx: int) -> Cid:
    gen = GeneratorConfig("binary-pair", margin=config.margin, seed=config.seed)
    return random_cid(gen, env_rng(config.seed, idx))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigurationError(f"{THREADS_ENV} must be positive")
        return n
    return os.cpu_count() or 1


def summarize(bound: float, details: Sequence[dict[str, Any]], include_fallback: bool = True) -> SweepRow:
    n = len(details)
    scored = [d for d in details if include_fallback or not d["fallback"]]
    m = max(len(scored), 1)
    return SweepRow(
        regret_bound_normalized=bound,
        n_envs=n,
        g_error_rate=sum(d["graph_error"] for d in scored) / m,
        p_mean_abs_error=sum(d["p_mean_abs_error"] for d in scored) / m,
        p_worst_abs_error=sum(d["p_worst_abs_error"] for d in scored) / m,
        baseline_g_error_rate=sum(d["baseline_graph_error"] for d in details) / n,
        baseline_p_mean_abs_error=sum(d["baseline_p_mean_abs_error"] for d in details) / n,
        fallback_rate=sum(d["fallback"] for d in details) / n,
    )


def run_sweep(config: SweepConfig, workers: int | None = None) -> tuple[list[SweepRow], list[list[dict[str, Any]]]]:
    """Rows per bound plus per-environment detail, independent of worker count."""
    workers = worker_count() if workers is None else workers
    tasks = [(config, i) for i in range(config.n_envs)]
    if workers <= 1:
        per_env = [_env_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_env = list(pool.map(_env_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    rows, details = [], []
    for k, b in enumerate(config.regret_bounds):
        d = [per_env[i][k] for i in range(config.n_envs)]
        details.append(d)
        row = summarize(b, d, config.include_fallback)
        rows.append(row)
        log.info("bound %.3f: g_error=%.3f p_mean=%.4f fallback=%.3f", b, row.g_error_rate, row.p_mean_abs_error, row.fallback_rate)
    return rows, details


def emit_reports(
    rows: Sequence[SweepRow],
    path: str | os.PathLike,
    config: SweepConfig | None = None,
    details: Sequence[Sequence[dict[str, Any]]] | None = None,
) -> tuple[Path, Path]:
    """Write the CSV and a JSON mirror next to it (same stem, ``.json``)."""
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    json_path = path.with_suffix(".json")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in r.as_tuple()])
        mirror = {
            "config": asdict(config) if config is not None else None,
            "rows": [asdict(r) for r in rows],
            "details": [list(d) for d in details] if details is not None else None,
        }
        json_path.write_text(json.dumps(mirror, indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"could not write report to {path}: {exc}") from exc
    return path, json_path
