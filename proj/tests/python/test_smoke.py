import math

import pytest

import sapg


def test_graph_and_hash():
    g = sapg.Graph.path(4)
    assert g.vertex_count == 4
    assert g.edges == [(1, 2), (2, 3), (3, 4)]
    assert sapg.Graph(4, [(1, 2), (2, 3), (3, 4)]) == g
    assert sapg.Graph.parse(str(g)) == g
    with pytest.raises(sapg.SapgError):
        sapg.Graph(4, [(1, 2), (3, 4)])


def test_hand_values():
    t = sapg.ValueTable(sapg.Graph.path(4), 3)
    assert t.value([1, 1, 1]) == pytest.approx(7 / 16, abs=1e-15)
    assert t.value([1, 0, 0]) == pytest.approx(0.5, abs=1e-15)
    tri = sapg.ValueTable(sapg.Graph.cycle(3), 3)
    assert tri.value([1, 1, 1]) == pytest.approx(2 / 3, abs=1e-15)
    assert t.optimal_move([1, 1, 1], 2) == 1
    assert t.optimal_move([1, 0, 0], 3) is None


def test_grid_maximum():
    rows, config, value = sapg.phase_diagram(sapg.Graph.path(4), 200)
    assert len(rows) == 201 * 202 // 2
    assert value == pytest.approx(0.2583299, abs=5e-7)
    assert 0.25 < config[0] / 200 < 0.5 and 0.25 < config[2] / 200 < 0.5


def test_geometry():
    g = sapg.Graph.path(4)
    assert sapg.x_star(g) == pytest.approx([0.375, 0.25, 0.375])
    name, face, slack = sapg.classify(g, [0.2, 0.3, 0.5])
    assert name == "Inaccessible"
    assert face == [0]
    assert slack == pytest.approx(-0.05)
    value, kernel = sapg.membership_flow(g, [0.375, 0.25, 0.375])
    assert value == pytest.approx(1.0)
    assert all(sum(row) == pytest.approx(1.0) for row in kernel)
    assert sapg.membership_flow(g, [0.2, 0.3, 0.5])[1] is None
    with pytest.raises(sapg.SapgError):
        sapg.classify(g, [0.5, 0.6, -0.1])


def test_scan_and_a_star():
    scan = sapg.transition_scan(sapg.Graph.path(4), [0.15, 0.35, 0.5], [40, 60, 80])
    assert scan["region"] == "Inaccessible"
    assert all(p <= math.exp(-n * 0.01 / 4) for n, _, p in scan["rows"])
    assert scan["fit"][0] < 0
    assert sapg.a_star(1, 4) == pytest.approx(math.log(1.5) / math.log(3))


def test_simulation_is_reproducible():
    g = sapg.Graph.path(4)
    a = sapg.simulate(g, [4, 3, 5], "optimal", runs=2000, seed=3, threads=1)
    b = sapg.simulate(g, [4, 3, 5], "optimal", runs=2000, seed=3, threads=2)
    assert a == b
    p = sapg.ValueTable(g, 12).value([4, 3, 5])
    assert abs(a["p_hat"] - p) < 4 * math.sqrt(p * (1 - p) / 2000)
    assert a["ci_lo"] <= a["p_hat"] <= a["ci_hi"]
    with pytest.raises(sapg.SapgError):
        sapg.simulate(g, [1, 1, 1], "nonsense")
