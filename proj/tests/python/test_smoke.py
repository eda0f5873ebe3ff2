import math

import pytest

import frogsim


@pytest.fixture(scope="module")
def tree():
    return frogsim.build_graph(frogsim.GraphSpec.regular_tree(3, 8))


def test_graph_shape(tree):
    assert tree.vertex_count == 1 + 3 * (2**8 - 1)
    assert tree.max_degree == 3
    assert sorted(frogsim.sphere(tree, 0, 1)) == tree.neighbors(0)


def test_single_vertex_exit():
    g = frogsim.build_graph(frogsim.GraphSpec.parse("lattice:2:5"))
    exits = frogsim.exit_probability_exact(g, [0], 1.0)
    assert exits[0] == pytest.approx(1 - math.exp(-1), abs=1e-12)


def test_survival_is_seeded(tree):
    a = frogsim.survival(tree, 2.0, 1.0, 5, 200, 11)
    b = frogsim.survival(tree, 2.0, 1.0, 5, 200, 11)
    assert a == b
    assert 0.0 <= a["mean"] <= 1.0


def test_cluster_contains_origin(tree):
    c = frogsim.cluster(tree, 1.0, 1.0, 3)
    assert c[0] == 0
    assert frogsim.cluster(tree, 1.0, 1.0, 3, schedule="lifo") == c


def test_gw_and_constants():
    assert frogsim.gw_extinction(0.5, 1.0) == 1.0
    assert frogsim.gw_extinction(2.0, 1.0) == pytest.approx(0.4101900344933956, abs=1e-10)
    k = frogsim.sharpness_constants(3, 1.0, 1.0)
    assert k["K"] == pytest.approx(3 / k["delta"])
    assert k["log_C"] == pytest.approx(188.66186989907043, rel=1e-9)


def test_bad_parameters_raise(tree):
    with pytest.raises(ValueError):
        frogsim.survival(tree, -1.0, 1.0, 3, 10, 1)
    with pytest.raises(ValueError):
        frogsim.GraphSpec.parse("torus:2")


def test_validate_lists_every_problem():
    msgs = frogsim.validate({"experiment": "survival", "lambda": "-1", "bogus": "1"})
    assert any("seed" in m for m in msgs)
    assert any("bogus" in m for m in msgs)
    assert any("negative" in m for m in msgs)


def test_run_returns_csv(tmp_path):
    res = frogsim.run({
        "experiment": "survival", "graph": "tree:3:8", "lambda": "1:2:1", "t": "1",
        "n": "4", "replicas": "50", "seed": "1", "out": str(tmp_path),
    })
    assert res["status"] == 0
    lines = res["csv"].strip().splitlines()
    assert lines[0].startswith("experiment,graph,lambda,t,n,")
    assert len(lines) == 3
    assert (tmp_path / "results.csv").exists()
