from __future__ import annotations

import numpy as np
import pytest

from conftest import env_a_cbn, env_a_cid
from regret2cause.cbn import apply_intervention, make_cbn, probability
from regret2cause.cid import Cid
from regret2cause.envgen import GeneratorConfig, env_rng, random_cid
from regret2cause.extraction import (
    DomainDependenceError,
    QCritEstimate,
    Unidentifiable,
    estimate_qcrit,
    find_anchor,
    gap_from_qcrit,
    graph_learner_binary,
    interval_div,
    mix,
    reconstruct,
    recover_cpd_entry,
    recover_row,
)
from regret2cause.interventions import Composite, Hard, Local, Null
from regret2cause.oracle import InconsistentOracle, PolicyOracle, SimulatedOracle


def single_var_cid(u00: float) -> Cid:
    """One binary X; U(0, 0) = u00, U(1, 0) = 0, U(0, 1) = 0, U(1, 1) = 1."""
    cbn = make_cbn([("X", 2)], {"X": ((), [[0.5, 0.5]])})
    return Cid.build(cbn, "D", (), ("X", "D"), [u00, 0.0, 0.0, 1.0])


def pair_cid(edges: str, seed: int = 0) -> Cid:
    rng = np.random.default_rng(seed)
    if edges == "X->Y":
        spec = {"X": ((), [[0.35, 0.65]]), "Y": (("X",), [[0.75, 0.25], [0.3, 0.7]])}
    elif edges == "Y->X":
        spec = {"X": (("Y",), [[0.75, 0.25], [0.3, 0.7]]), "Y": ((), [[0.35, 0.65]])}
    else:
        spec = {"X": ((), [[0.35, 0.65]]), "Y": ((), [[0.6, 0.4]])}
    cbn = make_cbn([("X", 2), ("Y", 2)], spec)
    return Cid.build(cbn, "D", (), ("X", "Y", "D"), rng.random(8))


def test_mix_endpoints_and_midpoint(env_a):
    sigma, sigma_p = Hard("X", 1), Composite((Hard("X", 0), Hard("Y", 0)))
    cbn = env_a_cbn()
    one = apply_intervention(cbn, mix(1.0, sigma, sigma_p)).joint
    zero = apply_intervention(cbn, mix(0.0, sigma, sigma_p)).joint
    assert np.array_equal(one, apply_intervention(cbn, sigma).joint)
    assert np.array_equal(zero, apply_intervention(cbn, sigma_p).joint)
    half = apply_intervention(cbn, mix(0.5, sigma, sigma_p))
    assert probability(half, {"Y": 1}) == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(ValueError):
        mix(1.5, sigma, sigma_p)


def test_find_anchor_env_a(env_a):
    anchor = find_anchor(env_a.task, 1)
    assert anchor.spec == Composite((Hard("X", 0), Hard("Y", 0)))
    assert anchor.d2 == 0 and anchor.margin == pytest.approx(0.5)


def test_find_anchor_dominant_decision():
    cbn = make_cbn([("X", 2)], {"X": ((), [[0.5, 0.5]])})
    cid = Cid.build(cbn, "D", (), ("X", "D"), [1.0, 0.0, 1.0, 0.5])
    with pytest.raises(DomainDependenceError):
        find_anchor(cid.task, 0)


def test_find_anchor_matching_utility():
    anchor = find_anchor(single_var_cid(1.0).task, 0)
    assert anchor.x_prime == (1,) and anchor.d2 == 1


def test_qcrit_env_a_bisect(env_a):
    est = estimate_qcrit(SimulatedOracle(env_a), Hard("X", 1), env_a.task, 1, mode="bisect")
    assert abs(est.q_crit_hat - 0.625) <= 1e-9
    assert (est.d1, est.d2, est.d3) == (1, 0, 1)


@pytest.mark.parametrize("u00, q", [(1.0, 0.5), (1.0 / 3.0, 0.25)])
def test_qcrit_from_gap_ratio(u00, q):
    cid = single_var_cid(u00)
    est = estimate_qcrit(SimulatedOracle(cid), Hard("X", 1), cid.task, 1, mode="bisect")
    assert abs(est.q_crit_hat - q) <= 1e-9
    gap = gap_from_qcrit(est, cid.task, 0.0)
    assert gap.q_value == pytest.approx(u00 * (1.0 - 1.0 / q), abs=1e-9)
    assert gap.q_value == pytest.approx(-1.0, abs=1e-8)


def test_gap_env_a(env_a):
    est = estimate_qcrit(SimulatedOracle(env_a), Hard("X", 1), env_a.task, 1, mode="bisect")
    gap = gap_from_qcrit(est, env_a.task, 0.0)
    assert gap.delta0 == 0.5 and gap.xi == 0.0
    assert gap.q_value == pytest.approx(-0.3, abs=1e-9)
    assert gap.lower == gap.upper == gap.q_value


def test_gap_worst_case_upper_bound():
    cid = single_var_cid(1.0)
    anchor = find_anchor(cid.task, 0)
    # true Q = -1 with anchor gap 1; at delta 0.1 the band ends at q = 0.55
    est = QCritEstimate(0.55, 0, 1, 0, anchor, 1, "mc", 0, 0, 0.0)
    gap = gap_from_qcrit(est, cid.task, 0.1)
    assert gap.upper == pytest.approx(0.9 / 1.1 * -1 + 0.2 / 1.1, abs=1e-12)
    assert gap.upper == pytest.approx(-0.63636, abs=1e-5)
    assert gap.lower == pytest.approx(-1.0, abs=1e-12)
    assert gap.lower <= gap.q_value <= gap.upper


def test_mc_qcrit_converges(env_a):
    oracle = SimulatedOracle(env_a)
    for n in (1_000, 10_000, 100_000):
        for sampling in ("iid", "stratified"):
            est = estimate_qcrit(oracle, Hard("X", 1), env_a.task, n, np.random.default_rng(n), sampling=sampling)
            assert abs(est.q_crit_hat - 0.625) <= 4 / (2 * np.sqrt(n))


def test_inconsistent_oracle_detected(env_a):
    class Stubborn(PolicyOracle):
        delta = 0.0
        task = env_a.task

        def decide(self, spec, context=0):
            return 1 if spec == Hard("X", 1) else 0

    with pytest.raises(InconsistentOracle):
        estimate_qcrit(Stubborn(), Hard("X", 1), env_a.task, 1, mode="bisect")


def test_bisect_needs_exact_oracle(env_a):
    with pytest.raises(ValueError):
        estimate_qcrit(SimulatedOracle(env_a, 0.1), Hard("X", 1), env_a.task, 1, mode="bisect")


def test_recover_entry_env_a(env_a):
    p, (lo, hi) = recover_cpd_entry(SimulatedOracle(env_a), env_a.task, "Y", 1, {"X": 1}, mode="bisect")
    assert abs(p - 0.8) <= 1e-6 and lo == pytest.approx(p) and hi == pytest.approx(p)


def test_recover_deterministic_entry():
    cbn = make_cbn([("X", 2), ("Y", 2)], {"X": ((), [[0.5, 0.5]]), "Y": (("X",), [[1.0, 0.0], [0.3, 0.7]])})
    cid = Cid.build(cbn, "D", (), ("X", "Y", "D"), [0.5, 0, 0.5, 1, 0.5, 0, 0.5, 1])
    p, _ = recover_cpd_entry(SimulatedOracle(cid), cid.task, "Y", 0, {"X": 0}, mode="bisect")
    assert abs(p - 1.0) <= 1e-6


def test_large_delta_widens_but_contains(env_a):
    # every gap in this row is computed from a fully fixed shift, so even a
    # large bound leaves it identified, with an interval around the truth
    row = recover_row(SimulatedOracle(env_a, 0.45), env_a.task, "Y", {"X": 1}, 20_000, np.random.default_rng(0), "mc")
    assert row.identified
    assert row.lower[1] <= 0.8 <= row.upper[1]


def test_large_delta_unidentifiable():
    # utility sees only B; A's row must be read through B, whose gaps are estimated
    cbn = make_cbn([("A", 2), ("B", 2)], {"A": ((), [[0.4, 0.6]]), "B": (("A",), [[0.8, 0.2], [0.3, 0.7]])})
    cid = Cid.build(cbn, "D", (), ("B", "D"), [0.6, 0.0, 0.0, 1.0])
    oracle = SimulatedOracle(cid, 0.3, seed=1)
    row = recover_row(oracle, cid.task, "A", {}, 20_000, np.random.default_rng(0), "mc")
    assert not row.identified
    with pytest.raises(Unidentifiable):
        recover_cpd_entry(oracle, cid.task, "A", 0, {}, 20_000, np.random.default_rng(0))
    exact = recover_row(SimulatedOracle(cid), cid.task, "A", {}, 1, None, "bisect")
    assert exact.identified and np.allclose(exact.point, [0.4, 0.6], atol=1e-6)


def test_interval_division():
    assert interval_div((1.0, 2.0), (2.0, 4.0)) == (0.25, 1.0)
    assert interval_div((-1.0, 2.0), (-4.0, -2.0)) == (-1.0, 0.5)
    with pytest.raises(Unidentifiable):
        interval_div((1.0, 2.0), (-1.0, 1.0))


def test_reconstruct_env_a(env_a):
    model = reconstruct(SimulatedOracle(env_a), env_a.task, mode="bisect")
    assert model.graph.edges == {("X", "Y")}
    cbn = model.to_cbn()
    assert abs(cbn.cpds["X"].table[0, 1] - 0.3) <= 1e-6
    assert np.allclose(cbn.cpds["Y"].table[:, 1], [0.2, 0.8], atol=1e-6)
    out = model.to_dict()
    assert {"variables", "edges", "cpds", "bounds"} <= set(out)


def test_reconstruct_independent_pair():
    cid = pair_cid("none", seed=3)
    model = reconstruct(SimulatedOracle(cid), cid.task, mode="bisect")
    assert model.graph.edges == frozenset()
    assert np.allclose(model.to_cbn().joint, cid.chance.joint, atol=1e-6)


def test_reconstruct_random_dag_exact():
    config = GeneratorConfig("random-dag", n_chance=3, cardinalities=(2, 3, 2), n_utility_parents=2)
    cid = random_cid(config, env_rng(4, 0))
    model = reconstruct(SimulatedOracle(cid), cid.task, mode="bisect")
    anc = set(model.graph.names)
    assert model.graph.edges == {e for e in cid.chance.dag.edges if e[1] in anc}
    truth = cid.chance.joint
    names = list(cid.chance.names)
    drop = tuple(i for i, n in enumerate(names) if n not in anc)
    assert np.allclose(model.to_cbn().joint, truth.sum(axis=drop) if drop else truth, atol=1e-6)


def test_approximate_mode_emits_subgraph():
    config = GeneratorConfig("random-dag", n_chance=3, cardinalities=(2, 2, 2), n_utility_parents=2, edge_prob=0.7)
    for i in range(4):
        cid = random_cid(config, env_rng(9, i))
        oracle = SimulatedOracle(cid, 0.02, seed=i)
        model = reconstruct(oracle, cid.task, 5_000, np.random.default_rng(i), "mc")
        assert model.graph.edges <= cid.chance.dag.edges
        for v in model.graph.names:
            pt, lo, hi = model.points[v], model.lower[v], model.upper[v]
            ok = ~np.isnan(pt)
            assert np.all(lo[ok] <= pt[ok] + 1e-12) and np.all(pt[ok] <= hi[ok] + 1e-12)


def test_unnormalized_utility_linear_in_weight(env_a):
    oracle = SimulatedOracle(env_a)
    sigma, sigma_p = Hard("X", 1), Composite((Hard("X", 0), Hard("Y", 0)))
    qs = np.linspace(0, 1, 11)
    vals = np.array([oracle._combined(mix(float(q), sigma, sigma_p))[0][0] for q in qs])
    for d in range(2):
        fit = np.polyfit(qs, vals[:, d], 1)
        assert np.allclose(np.polyval(fit, qs), vals[:, d], atol=1e-14)


@pytest.mark.parametrize("edges", ["X->Y", "Y->X", "none"])
def test_graph_learner_exact(edges):
    cid = pair_cid(edges, seed=1)
    res = graph_learner_binary(SimulatedOracle(cid), cid.task, mode="bisect")
    assert res.valid
    assert res.label == {"X->Y": "X->Y", "Y->X": "Y->X", "none": "empty"}[edges]
    assert np.allclose(res.joint, cid.chance.joint, atol=1e-9)


def test_graph_learner_env_a_mc(env_a):
    # the utility ignores X, so only the interventionals of Y are measurable
    res = graph_learner_binary(SimulatedOracle(env_a), env_a.task, 1_000_000, np.random.default_rng(0))
    assert res.label == "X->Y" and not res.valid
    y_given_x = [i for i in res.interventionals if i.target == "Y"]
    assert [i.value for i in y_given_x] == [0, 1]
    assert abs(y_given_x[0].p0 - 0.8) <= 1e-3 and abs(y_given_x[1].p0 - 0.2) <= 1e-3


def test_graph_learner_pair_mc():
    cid = pair_cid("X->Y", seed=1)
    res = graph_learner_binary(SimulatedOracle(cid), cid.task, 1_000_000, np.random.default_rng(0))
    assert res.label == "X->Y" and res.valid
    assert np.max(np.abs(res.joint - cid.chance.joint)) <= 1e-3


def test_graph_learner_rejects_other_tasks():
    cid = single_var_cid(1.0)
    with pytest.raises(ValueError):
        graph_learner_binary(SimulatedOracle(cid), cid.task, mode="bisect")


def test_local_merge_in_row_recovery_uses_null_shift_free_variables(env_a):
    # X free: the row of X is its marginal
    row = recover_row(SimulatedOracle(env_a), env_a.task, "X", {}, 1, None, "bisect")
    assert row.identified and np.allclose(row.point, [0.7, 0.3], atol=1e-6)
    assert Null() is not None and Local("X", (0, 0)).is_constant
