from __future__ import annotations

import itertools

import numpy as np
import pytest

from conftest import env_a_cbn
from regret2cause.cbn import (
    Cbn,
    Cpd,
    Dag,
    ModelError,
    Variable,
    apply_intervention,
    graph_queries,
    interventional_distribution,
    make_cbn,
    marginal,
    probability,
    sample,
)
from regret2cause.interventions import Hard, Local, Mixture, Null


def figure_graph() -> Dag:
    names = [f"C{i}" for i in range(1, 7)]
    edges = {("C1", "C4"), ("C1", "C3"), ("C3", "C2"), ("C4", "C5")}
    return Dag(tuple(Variable(n, 2) for n in names), frozenset(edges))


def test_joint_probability_hand_product():
    assert env_a_cbn().joint_probability({"X": 1, "Y": 1}) == pytest.approx(0.24, abs=1e-15)


def test_deterministic_chain_is_zero_or_one():
    cbn = make_cbn([("A", 2), ("B", 2)], {"A": ((), [[0, 1]]), "B": (("A",), [[1, 0], [0, 1]])})
    for a, b in itertools.product(range(2), repeat=2):
        assert cbn.joint_probability({"A": a, "B": b}) in (0.0, 1.0)
    assert cbn.joint_probability({"A": 1, "B": 1}) == 1.0


def test_cycle_rejected():
    with pytest.raises(ModelError):
        Dag((Variable("A", 2), Variable("B", 2)), frozenset({("A", "B"), ("B", "A")}))


def test_bad_rows_rejected():
    with pytest.raises(ModelError):
        Cpd("A", (), np.array([[0.5, 0.6]]))
    with pytest.raises(ModelError):
        Cpd("A", (), np.array([[1.2, -0.2]]))


def test_near_normalized_rows_are_renormalized():
    cpd = Cpd("A", (), np.array([[0.3, 0.7 + 5e-13]]))
    assert cpd.table.sum() == pytest.approx(1.0, abs=1e-15)


def test_wrong_shape_rejected():
    with pytest.raises(ModelError):
        make_cbn([("A", 2), ("B", 2)], {"A": ((), [[0.5, 0.5]]), "B": (("A",), [[0.5, 0.5]])})


def test_unknown_assignment_rejected():
    with pytest.raises(ModelError):
        env_a_cbn().joint_probability({"X": 1})
    with pytest.raises(ModelError):
        env_a_cbn().joint_probability({"X": 1, "Y": 2})


def test_graph_queries_chain():
    dag = env_a_cbn().dag
    assert dag.ancestors("Y") == {"X"}
    assert dag.descendants("X") == {"Y"}
    assert dag.topological_order() == ("X", "Y")


def test_graph_queries_empty_graph():
    dag = Dag((Variable("A", 2), Variable("B", 3)), frozenset())
    assert dag.ancestors("A") == frozenset() and dag.ancestors("B") == frozenset()


def test_figure_graph_utility_ancestors():
    dag = figure_graph()
    # utility parents C2, C3, C6 and the decision, whose observations are C2, C4
    anc = set()
    for n in ("C2", "C3", "C6", "C4"):
        anc |= {n} | dag.ancestors(n)
    assert anc == {"C1", "C2", "C3", "C4", "C6"}
    assert "C5" not in anc
    q = graph_queries(dag, "C4")
    assert set(q["parents"]) == {"C1"} and set(q["children"]) == {"C5"}
    order = q["topological_order"]
    for p, c in dag.edges:
        assert order.index(p) < order.index(c)


def test_null_query():
    m = apply_intervention(env_a_cbn(), Null())
    assert probability(m, {"Y": 1}) == pytest.approx(0.38, abs=1e-15)


def test_hard_on_child_leaves_parent():
    m = apply_intervention(env_a_cbn(), Hard("Y", 0))
    assert probability(m, {"X": 1}) == pytest.approx(0.3, abs=1e-15)


def test_hard_on_parent():
    m = apply_intervention(env_a_cbn(), Hard("X", 1))
    assert probability(m, {"X": 1}) == 1.0
    assert probability(m, {"Y": 1}) == pytest.approx(0.8, abs=1e-15)
    assert probability(m, {"Y": 1}, {"X": 1}) == pytest.approx(0.8, abs=1e-15)


def test_local_merge():
    m = apply_intervention(env_a_cbn(), Local("X", (1, 1)))
    assert probability(m, {"X": 1}) == 1.0
    assert probability(m, {"X": 0}) == 0.0


def test_local_swap():
    m = apply_intervention(env_a_cbn(), Local("X", (1, 0)))
    assert probability(m, {"X": 1}) == pytest.approx(0.7, abs=1e-15)


def test_mixture_is_weighted():
    spec = Mixture(((0.4, Hard("X", 0)), (0.6, Hard("X", 1))))
    m = apply_intervention(env_a_cbn(), spec)
    assert len(m.components) == 2
    assert probability(m, {"X": 1}) == pytest.approx(0.6, abs=1e-15)
    assert probability(m, {"Y": 1}) == pytest.approx(0.56, abs=1e-15)


def test_null_conditioning_is_undefined():
    m = apply_intervention(env_a_cbn(), Hard("X", 1))
    assert probability(m, {"Y": 1}, {"X": 0}) is None
    table = interventional_distribution(m, ["Y"], ["X"])
    assert np.all(np.isnan(table[0])) and not np.any(np.isnan(table[1]))


def test_overlapping_query_rejected():
    with pytest.raises(ModelError):
        interventional_distribution(env_a_cbn(), ["X"], ["X"])


def test_sample_empty():
    assert sample(env_a_cbn(), np.random.default_rng(0), 0).shape == (0, 2)


def test_sample_frequency():
    draws = sample(env_a_cbn(), np.random.default_rng(1), 100_000)
    freq = np.mean((draws[:, 0] == 1) & (draws[:, 1] == 1))
    assert abs(freq - 0.24) <= 0.01


def test_sample_deterministic_model_constant():
    cbn = make_cbn([("A", 3), ("B", 2)], {"A": ((), [[0, 0, 1]]), "B": (("A",), [[1, 0], [1, 0], [0, 1]])})
    draws = sample(cbn, np.random.default_rng(2), 50)
    assert np.all(draws == draws[0]) and tuple(draws[0]) == (2, 1)


def test_sample_repeatable():
    a = sample(env_a_cbn(), np.random.default_rng(3), 100)
    b = sample(env_a_cbn(), np.random.default_rng(3), 100)
    assert np.array_equal(a, b)


def test_json_round_trip():
    cbn = env_a_cbn()
    obj = cbn.to_dict()
    assert set(obj) == {"variables", "edges", "cpds"}
    again = Cbn.from_dict(obj)
    assert np.array_equal(again.joint, cbn.joint)


def test_marginal_ordering():
    joint = marginal(env_a_cbn(), ["Y", "X"])
    assert joint[1, 0] == pytest.approx(0.7 * 0.2, abs=1e-15)
