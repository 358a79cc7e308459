import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diffusion_centrality.approx import (ResidualState, approximate_centrality,
                                         rms_error_vs_exact, verify_loop_invariant)
from diffusion_centrality.graph import Graph, cycle_graph, erdos_renyi, path_graph

from conftest import random_graphs


def exact_cr(g, s, alpha):
    return np.linalg.solve((np.eye(g.node_count) - alpha * g.to_dense()).T, s)


def test_single_node_drains_in_one_push():
    g = Graph(1, [], [])
    res = approximate_centrality(g, [1.0], 0.9, 0.5)
    assert res.scores.tolist() == [1.0]
    assert res.iterations_used == 1
    assert res.extra["residual_l1_final"] == 0.0


def test_zero_start_does_nothing():
    g = cycle_graph(5)
    res = approximate_centrality(g, np.zeros(5), 0.5, 0.1)
    assert res.scores.tolist() == [0.0] * 5
    assert res.iterations_used == 0


@pytest.mark.parametrize("delta", [0.0, -0.1, 1.5, float("nan")])
def test_delta_validated(delta):
    with pytest.raises(ValueError):
        approximate_centrality(cycle_graph(3), "uniform", 0.5, delta)


def test_non_finite_inputs_rejected():
    with pytest.raises(ValueError):
        approximate_centrality(cycle_graph(3), "uniform", float("inf"), 0.1)
    with pytest.raises(ValueError):
        approximate_centrality(cycle_graph(3), [1.0, float("nan"), 1.0], 0.5, 0.1)


def test_sandwich_on_fifty_nodes():
    g = erdos_renyi(50, 3 / 50, seed=7)
    a = 0.5 / g.out_degree.max()
    s = np.ones(50)
    res = approximate_centrality(g, s, a, 0.01)
    cr = exact_cr(g, s, a)
    assert res.extra["bound_applicable"]
    assert np.all(res.scores <= cr + 1e-12)
    assert np.all(res.scores >= cr * 0.99 - 1e-12)


def test_bound_metadata_for_nonuniform_start():
    g = erdos_renyi(40, 0.1, seed=1)
    a = 0.5 / g.out_degree.max()
    res = approximate_centrality(g, "indegree", a, 0.05)
    assert not res.extra["bound_applicable"]
    res = approximate_centrality(g, "uniform", a, 0.05, epsilon=1e-4)
    assert not res.extra["bound_applicable"]


def test_warns_when_runtime_precondition_fails():
    g = Graph.from_edges([(0, 1), (0, 2)])  # d_max = 2 but acyclic
    with pytest.warns(UserWarning, match="alpha\\*d_max"):
        res = approximate_centrality(g, "uniform", 0.9, 0.5)
    assert "iteration_bound" not in res.extra
    assert res.scores == pytest.approx([1.0, 1.9, 1.9])


def test_iteration_cap():
    with pytest.warns(UserWarning), pytest.raises(RuntimeError, match="exceeded 100"):
        approximate_centrality(cycle_graph(4), "uniform", 1.0, 0.5, max_iterations=100)


def test_weighted_edges_attenuate():
    g = Graph.from_edges([(0, 1, 0.5)])
    res = approximate_centrality(g, [1.0, 0.0], 0.8, 1e-3, epsilon=0.0)
    assert res.scores == pytest.approx([1.0, 0.4])


def test_invariant_examples():
    rep = verify_loop_invariant(path_graph(2), [1, 1], 0.25, 0.1)
    assert rep.ok and rep.checkpoints == rep.iterations + 1
    assert rep.violations[0] < 1e-15  # base case before any push
    rep = verify_loop_invariant(cycle_graph(3), "uniform", 0.4, 0.05)
    assert rep.ok and rep.iterations > 3


def test_invariant_checkpoint_spacing():
    g = erdos_renyi(60, 0.08, seed=3)
    a = 0.5 / g.out_degree.max()
    rep = verify_loop_invariant(g, "uniform", a, 0.001, every=5)
    assert rep.checkpoints == 1 + rep.iterations // 5
    assert rep.ok


def test_monotone_approx_and_queue_membership():
    g = erdos_renyi(80, 0.05, seed=12)
    a = 0.6 / g.out_degree.max()
    st_ = ResidualState(g, np.ones(80), a, 0.005)
    prev = st_.approx.copy()

    def hook(state):
        nonlocal prev
        assert np.all(state.approx >= prev)
        assert np.all(state.residual >= 0)
        assert len(state.queue) == len(set(state.queue)) == int(state.in_queue.sum())
        over = np.nonzero(state.residual > state.epsilon)[0]
        assert state.in_queue[over].all()
        prev = state.approx.copy()

    st_.run(hook=hook)
    assert not st_.queue


def test_deterministic():
    g = erdos_renyi(120, 0.03, seed=5)
    a = 0.5 / g.out_degree.max()
    r1 = approximate_centrality(g, "indegree", a, 0.01)
    r2 = approximate_centrality(g, "indegree", a, 0.01)
    assert r1.scores.tobytes() == r2.scores.tobytes()
    assert r1.iterations_used == r2.iterations_used


def test_iteration_bound_holds():
    for g in random_graphs(10, 10, 150, seed=9):
        d = g.out_degree.max()
        if d == 0:
            continue
        res = approximate_centrality(g, "uniform", 0.5 / d, 0.01)
        assert res.iterations_used <= res.extra["iteration_bound"]


def test_rms_full_drain_is_exact():
    g = erdos_renyi(100, 0.04, seed=2)
    a = 0.5 / g.out_degree.max()
    assert rms_error_vs_exact(g, a, epsilon_override=1e-300) < 1e-9


def test_rms_under_one_percent():
    g = erdos_renyi(100, 0.04, seed=8)
    a = 0.5 / g.out_degree.max()
    err = rms_error_vs_exact(g, a, s="indegree", delta=0.01)
    assert 0 < err < 0.01


@given(st.integers(0, 10_000), st.sampled_from([0.5, 0.1, 0.01]), st.floats(0.05, 0.95))
@settings(max_examples=40, deadline=None)
def test_sandwich_property(seed, delta, c):
    g = erdos_renyi(30, 0.1, seed=seed)
    d = g.out_degree.max()
    if d == 0:
        return
    a = c / d
    s = np.ones(30)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = approximate_centrality(g, s, a, delta)
    cr = exact_cr(g, s, a)
    assert np.all(res.scores <= cr + 1e-12)
    assert np.all(res.scores >= cr * (1 - delta) - 1e-12)
    assert res.iterations_used <= res.extra["iteration_bound"]
