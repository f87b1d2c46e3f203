"""NN graph construction against a brute-force oracle and worked examples."""

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nnreflex import (
    DegenerateConfigurationWarning,
    PointSet,
    build_nn_graph,
    min_interpoint_distance,
)
from nnreflex.geom import densify_labels

from .conftest import brute_nn_sets


def test_collinear_example(collinear):
    g = build_nn_graph(collinear)
    assert [s.tolist() for s in g.nn_sets] == [[1], [0], [1]]
    assert g.R == 2
    assert g.Q == 2
    assert g.Q_counts == {1: 1, 2: 1}
    assert g.mutual == {(0, 1), (1, 0)}
    assert g.n_reflexive_pairs == 1


def test_square_corners_tie():
    ps = PointSet([[0, 0], [1, 0], [0, 1], [1, 1]], [1, 1, 2, 2])
    g = build_nn_graph(ps)
    assert g.nn_count.tolist() == [2, 2, 2, 2]
    assert g.has_ties
    assert g.R == 8


def test_tie_epsilon_widens_nn_sets():
    ps = PointSet([[0, 0], [1, 0], [0, 1.001]], [1, 2, 2])
    assert build_nn_graph(ps).nn_count[0] == 1
    assert build_nn_graph(ps, tie_epsilon=0.01).nn_count[0] == 2
    with pytest.raises(ValueError):
        build_nn_graph(ps, tie_epsilon=-1)


def test_coincident_points_warn():
    ps = PointSet([[0, 0], [0, 0], [3, 3]], [1, 2, 2])
    with pytest.warns(DegenerateConfigurationWarning):
        g = build_nn_graph(ps)
    assert g.nn_dist[0] == 0 and g.nn_dist[1] == 0
    assert g.warnings


def test_blocked_search_matches_brute_force():
    rng = np.random.default_rng(3)
    ps = PointSet(rng.random((1500, 2)), rng.integers(1, 3, 1500))
    g = build_nn_graph(ps)
    sample = rng.choice(1500, 40, replace=False)
    d = np.hypot(*(ps.coords[sample, None, :] - ps.coords[None, :, :]).transpose(2, 0, 1))
    d[np.arange(40), sample] = np.inf
    assert np.array_equal(g.edge_dst[np.searchsorted(g.edge_src, sample)], d.argmin(axis=1))


coords_strategy = st.integers(3, 25).flatmap(
    lambda n: arrays(np.float64, (n, 2), elements=st.floats(0, 1, allow_nan=False, width=32), unique=True)
)


@given(coords_strategy)
def test_graph_matches_oracle(coords):
    if len(np.unique(coords, axis=0)) < len(coords):
        return
    ps = PointSet(coords, np.arange(len(coords)) % 2 + 1)
    g = build_nn_graph(ps)
    oracle = brute_nn_sets(coords)
    assert [set(s.tolist()) for s in g.nn_sets] == oracle
    mutual = {(i, j) for i in range(len(coords)) for j in oracle[i] if i in oracle[j]}
    assert g.mutual == mutual
    assert g.R == len(mutual)
    indeg = np.zeros(len(coords), int)
    for s in oracle:
        for j in s:
            indeg[j] += 1
    assert g.Q == int(sum(d * (d - 1) for d in indeg))
    assert sum(g.Q_counts.values()) == int((indeg > 0).sum())
    assert sum(lv * c for lv, c in g.Q_counts.items()) == g.n_edges


@given(arrays(np.float64, (12, 2), elements=st.floats(-5, 5, allow_nan=False)))
def test_q_and_r_parity(coords):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateConfigurationWarning)
        g = build_nn_graph(PointSet(coords, [1, 2] * 6))
    assert g.R % 2 == 0 and g.Q % 2 == 0
    assert g.in_degree.sum() == g.n_edges == g.nn_count.sum()


def test_pointset_validation():
    with pytest.raises(ValueError):
        PointSet([[0, 0]], [1])
    with pytest.raises(ValueError):
        PointSet([[0, 0], [1, 1]], [1, 3])
    with pytest.raises(ValueError):
        PointSet([[0, 0], [np.nan, 1]], [1, 2])
    with pytest.raises(ValueError):
        PointSet([[0, 0], [1, 1]], ["a", "b"])
    with pytest.raises(ValueError):
        PointSet([[0, 0, 0], [1, 1, 1]], [1, 2])


def test_densify_orders_numeric_and_text():
    labels, names = densify_labels(["10", "2", "2", "10", "3"])
    assert names == ("2", "3", "10")
    assert labels.tolist() == [3, 1, 1, 3, 2]
    labels, names = densify_labels(["oak", "birch", "oak"])
    assert names == ("birch", "oak") and labels.tolist() == [2, 1, 2]


def test_min_interpoint_distance(collinear):
    assert min_interpoint_distance(collinear) == 1.0
    assert min_interpoint_distance(collinear, cls=1) == 1.0
    with pytest.raises(ValueError):
        min_interpoint_distance(collinear, cls=2)
