import numpy as np
import pytest
from hypothesis import given, strategies as st

from quc.fixtures import load_grid
from quc.grid import Grid, GridError, Line, Node, build_b_matrix, injection_vector, solve_dcpf

# appendix t=1 injections: node1 600, node2 400, node3 500, loads -600 and -900
APPENDIX_P = {"node1": 600.0, "node2": 400.0, "node3": 500.0, "load1": -600.0, "load2": -900.0}
PAPER_FLOWS = [172.72, 427.27, 572.72, 318.18, 609.09, 290.90]
PAPER_COSTS = [1727, 4272.7, 5727, 3181.8, 6091, 2909]


def appendix_injections(bmat):
    return np.array([APPENDIX_P[nid] for nid in bmat.order])


@pytest.fixture(scope="module")
def bmat():
    return build_b_matrix(load_grid())


def test_node_order_and_slack(bmat):
    assert bmat.order == ("node1", "node3", "node2", "load1", "load2")
    # node3 has degree 3, the most of any node, and sits at position 1
    assert bmat.slack_index == 1
    assert bmat.avg_susceptance == 0.5


def test_b_matrix_entries(bmat):
    expect = np.array(
        [
            [1.0, -0.5, -0.5, 0.0, 0.0],
            [-0.5, 2.0, 0.0, -0.5, -0.5],
            [-0.5, 0.0, 1.0, -0.5, 0.0],
            [0.0, -0.5, -0.5, 1.5, -0.5],
            [0.0, -0.5, 0.0, -0.5, 1.0],
        ]
    )
    assert np.allclose(bmat.matrix, expect)
    assert np.allclose(bmat.laplacian.sum(axis=1), 0)


def test_appendix_flows_match_published_values(bmat):
    sol = solve_dcpf(bmat, appendix_injections(bmat))
    assert np.allclose(sol.line_flows, PAPER_FLOWS, rtol=5e-3)
    assert np.allclose(sol.trans_costs, PAPER_COSTS, rtol=1e-2)
    assert sol.theta[bmat.slack_index] == pytest.approx(0.0, abs=1e-9)


def test_zero_injections_give_zero_flows(bmat):
    sol = solve_dcpf(bmat, np.zeros(5))
    assert np.all(sol.line_flows == 0) and np.all(sol.trans_costs == 0)


def test_inactive_generator_is_masked(bmat):
    p = injection_vector(bmat, [600, 400, 500], 0, active=[1, 0, 1])
    assert p[bmat.position("node2")] == 0
    assert p[bmat.position("load2")] == -900
    sol = solve_dcpf(bmat, appendix_injections(bmat), active=[1, 0, 1])
    assert sol.injections[bmat.position("node2")] == 0


@pytest.mark.parametrize(
    "nodes, lines",
    [
        ([Node("g", "generator", 1, 2), Node("l", "load", demand=(1,)), Node("x", "load", demand=(1,))],
         [Line("g", "l", 1.0)]),
        ([Node("g", "generator", 1, 2), Node("l", "load", demand=(1,))],
         [Line("g", "l", 1.0), Line("l", "g", 2.0)]),
        ([Node("l", "load", demand=(1,))], []),
    ],
)
def test_invalid_grids_rejected(nodes, lines):
    with pytest.raises(GridError):
        build_b_matrix(Grid(tuple(nodes), tuple(lines)))


def test_bad_line_and_node_values():
    with pytest.raises(GridError):
        Line("a", "b", 0.0)
    with pytest.raises(GridError):
        Node("g", "generator", 5, 1)
    with pytest.raises(GridError):
        Node("l", "load", demand=(-1,))


def test_injection_length_checked(bmat):
    with pytest.raises(GridError):
        solve_dcpf(bmat, np.zeros(3))


def test_dict_round_trip():
    grid = load_grid()
    assert Grid.from_dict(grid.to_dict()).to_dict() == grid.to_dict()


@st.composite
def random_grids(draw):
    n_gen = draw(st.integers(1, 3))
    n_load = draw(st.integers(1, 3))
    ids = [f"g{k}" for k in range(n_gen)] + [f"l{k}" for k in range(n_load)]
    nodes = [Node(f"g{k}", "generator", 1.0, draw(st.floats(1, 500))) for k in range(n_gen)]
    nodes += [Node(f"l{k}", "load", demand=(draw(st.floats(0, 400)),)) for k in range(n_load)]
    # a random spanning tree plus extra edges keeps the grid connected
    pairs = set()
    for k in range(1, len(ids)):
        j = draw(st.integers(0, k - 1))
        pairs.add((ids[j], ids[k]))
    for _ in range(draw(st.integers(0, 3))):
        a, b = draw(st.permutations(ids))[:2]
        if (a, b) not in pairs and (b, a) not in pairs:
            pairs.add((a, b))
    lines = [Line(a, b, draw(st.floats(0.1, 2.0)), 10.0) for a, b in sorted(pairs)]
    return Grid(tuple(nodes), tuple(lines))


@given(random_grids(), st.data())
def test_power_balance_at_non_slack_nodes(grid, data):
    bmat = build_b_matrix(grid)
    p = np.array(data.draw(st.lists(st.floats(-500, 500), min_size=len(bmat.order), max_size=len(bmat.order))))
    sol = solve_dcpf(bmat, p)
    net = np.zeros(len(bmat.order))
    for ln, f in zip(grid.lines, sol.line_flows):
        net[bmat.position(ln.a)] += f
        net[bmat.position(ln.b)] -= f
    # outflow equals injection everywhere except at the slack, which also carries avg_B * theta
    residual = p - net
    residual[bmat.slack_index] -= bmat.avg_susceptance * sol.theta[bmat.slack_index]
    assert np.allclose(residual, 0, atol=1e-6 * (1 + np.abs(p).max()))


@given(random_grids())
def test_b_matrix_symmetric_positive_definite(grid):
    bmat = build_b_matrix(grid)
    assert np.allclose(bmat.matrix, bmat.matrix.T)
    assert np.linalg.eigvalsh(bmat.matrix).min() > 0
