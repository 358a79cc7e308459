import numpy as np
import pytest

from diffusion_centrality.graph import Graph, erdos_renyi


def fig1_graph():
    """Eight-node ranking-disagreement network, labels "1".."8".

    In-neighbors of 1 are {2, 5, 8}; in-neighbors of 3 are {2, 4}; 5 and 8
    each have out-degree 3; 4's only out-edge goes to 3. The remaining
    out-edges of 5 and 8 land on fillers 6 and 7, which have no other edges.
    """
    edges = [("2", "1"), ("2", "3"), ("4", "3"),
             ("5", "1"), ("5", "6"), ("5", "7"),
             ("8", "1"), ("8", "6"), ("8", "7")]
    labels = [str(i) for i in range(1, 9)]
    idx = {lab: i for i, lab in enumerate(labels)}
    return Graph.from_edges([(idx[u], idx[v]) for u, v in edges], node_count=8,
                            labels=labels)


def strongly_connected(n, extra_p, seed):
    """Directed n-cycle plus random chords."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < extra_p
    np.fill_diagonal(mask, False)
    mask[np.arange(n), (np.arange(n) + 1) % n] = True
    u, v = np.nonzero(mask)
    return Graph(n, u, v)


def random_graphs(count, n_lo, n_hi, seed, p_scale=3.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        out.append(erdos_renyi(n, p_scale / n, seed=int(rng.integers(2**31))))
    return out


@pytest.fixture
def fig1():
    return fig1_graph()


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
