"""Command-line entry point: ``regret2cause {solve,discover,gen,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Sequence

import numpy as np

from .cbn import ModelError
from .cid import Cid, expected_utility_table, optimal_policy
from .envgen import ConfigurationError, GeneratorConfig, env_rng, random_cid
from .extraction import reconstruct
from .harness import SweepConfig, emit_reports, run_sweep, worker_count
from .interventions import spec_from_json
from .oracle import SimulatedOracle

EXIT_CONFIG = 2


def parse_bounds(text: str) -> tuple[float, ...]:
    """``"0,0.1,0.2"`` or with an ellipsis, ``"0,0.05,...,0.5"``.

    An ellipsis continues the step between the two values before it up to
    the value after it (inclusive).
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    out: list[Decimal] = []
    i = 0
    try:
        while i < len(parts):
            if parts[i] == "...":
                if len(out) < 2 or i + 1 >= len(parts):
                    raise ConfigurationError("an ellipsis needs two values before it and one after")
                step = out[-1] - out[-2]
                end = Decimal(parts[i + 1])
                if step <= 0:
                    raise ConfigurationError("ellipsis needs an increasing progression")
                v = out[-1] + step
                while v <= end:
                    out.append(v)
                    v += step
                if out[-1] != end:
                    out.append(end)
                i += 2
                continue
            out.append(Decimal(parts[i]))
            i += 1
    except InvalidOperation:
        raise ConfigurationError(f"cannot parse bounds {text!r}") from None
    if not out:
        raise ConfigurationError("no bounds given")
    return tuple(float(v) for v in out)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None


def _write_json(path: str, obj: dict) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(obj, indent=1) + "\n")


def cmd_solve(args: argparse.Namespace) -> int:
    cid = Cid.from_dict(_read_json(args.model))
    shift = spec_from_json(_read_json(args.shift)) if args.shift else spec_from_json({"type": "null"})
    policy = optimal_policy(cid, shift)
    eu = expected_utility_table(cid, shift)
    out = policy.to_dict()
    out["decision"] = cid.decision
    out["expected_utility"] = [[None if np.isnan(v) else float(v) for v in row] for row in eu]
    _write_json(args.out, out)
    return 0


def cmd_discover(args: argparse.Namespace) -> int:
    cid = Cid.from_dict(_read_json(args.cid))
    if args.delta < 0:
        raise ConfigurationError("delta must be nonnegative")
    if args.mode == "bisect" and args.delta > 0:
        raise ConfigurationError("bisection mode needs --delta 0")
    oracle = SimulatedOracle(cid, args.delta, args.seed)
    rng = np.random.default_rng(args.seed)
    # extraction only ever sees the public part of the task
    model = reconstruct(oracle, cid.task, args.samples, rng, args.mode, sampling=args.sampling)
    out = model.to_dict()
    out["oracle_queries"] = oracle.n_queries
    _write_json(args.out, out)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    cards = tuple(int(c) for c in args.cardinalities.split(",")) if args.cardinalities else (2,) * args.n_chance
    config = GeneratorConfig(
        graph_family=args.family,
        n_chance=args.n_chance,
        cardinalities=cards,
        decision_cardinality=args.decision_cardinality,
        margin=args.margin,
        edge_prob=args.edge_prob,
        n_info_parents=args.info_parents,
        n_utility_parents=args.utility_parents,
        seed=args.seed,
    )
    if args.n < 1:
        raise ConfigurationError("--n must be positive")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(args.n - 1)))
    files = []
    for i in range(args.n):
        cid = random_cid(config, env_rng(args.seed, i))
        name = f"env_{i:0{width}d}.json"
        (out / name).write_text(json.dumps(cid.to_dict(), indent=1) + "\n")
        files.append(name)
    manifest = {
        "family": config.graph_family,
        "n": args.n,
        "seed": args.seed,
        "margin": config.margin,
        "config": {k: getattr(config, k) for k in config.__dataclass_fields__},
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig(
        regret_bounds=parse_bounds(args.bounds),
        n_envs=args.n_envs,
        n_samples=args.samples,
        seed=args.seed,
        mode=args.mode,
        margin=args.margin,
        include_fallback=not args.exclude_fallback,
        sampling=args.sampling,
        equality=args.equality,
    )
    rows, details = run_sweep(config, worker_count())
    emit_reports(rows, args.out, config, details)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regret2cause", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="optimal policy of a cid under a shift")
    s.add_argument("--model", required=True)
    s.add_argument("--shift")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    d = sub.add_parser("discover", help="reconstruct the chance model from a simulated oracle")
    d.add_argument("--cid", required=True)
    d.add_argument("--delta", type=float, default=0.0)
    d.add_argument("--samples", type=int, default=100_000)
    d.add_argument("--mode", choices=["mc", "bisect"], default="mc")
    d.add_argument("--sampling", choices=["iid", "stratified"], default="stratified")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_discover)

    g = sub.add_parser("gen", help="write random environments")
    g.add_argument("--family", choices=["binary-pair", "random-dag"], default="binary-pair")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--margin", type=float, default=0.01)
    g.add_argument("--n-chance", type=int, default=2)
    g.add_argument("--cardinalities")
    g.add_argument("--decision-cardinality", type=int, default=2)
    g.add_argument("--edge-prob", type=float, default=0.5)
    g.add_argument("--info-parents", type=int, default=0)
    g.add_argument("--utility-parents", type=int)
    g.set_defaults(func=cmd_gen)

    w = sub.add_parser("sweep", help="graph-learner error against the regret bound")
    w.add_argument("--bounds", required=True)
    w.add_argument("--n-envs", type=int, default=1000)
    w.add_argument("--samples", type=int, default=10_000)
    w.add_argument("--mode", choices=["mc", "bisect"], default="mc")
    w.add_argument("--sampling", choices=["iid", "stratified"], default="stratified")
    w.add_argument("--equality", choices=["zscore", "interval"], default="zscore")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--margin", type=float, default=0.01)
    w.add_argument("--exclude-fallback", action="store_true")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, ModelError, ValueError) as exc:
        print(f"regret2cause: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
