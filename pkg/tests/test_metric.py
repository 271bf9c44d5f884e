import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sewkit.metric import (
    CollapseError,
    FiniteMetricSpace,
    QuasiMetricTable,
    Subset,
    ball,
    chain_metrize,
    components,
    default_epsilon,
    diam,
    epsilon_graph,
    epsilon_net,
    mesh,
    restrict,
    validate_metric,
)

from _factories import euclid, random_quasimetric, random_space, tree_point


def chain_oracle(q: np.ndarray) -> np.ndarray:
    """Exhaustive reference for the chain infimum.

    Enumerates every simple chain between each pair, sums left to right,
    keeps the minimum, and reconciles the two orientations of each pair by
    taking the smaller value, exactly like the library contract.
    """
    n = q.shape[0]
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rest = [k for k in range(n) if k != i and k != j]
            best = q[i, j]
            for r in range(1, len(rest) + 1):
                for mid in itertools.permutations(rest, r):
                    acc = q[i, mid[0]]
                    prev = mid[0]
                    for m in mid[1:]:
                        acc = acc + q[prev, m]
                        prev = m
                    acc = acc + q[prev, j]
                    if acc < best:
                        best = acc
            d[i, j] = best
    return np.minimum(d, d.T)


def test_chain_metrize_matches_oracle_small():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        q = random_quasimetric(rng, n)
        got = chain_metrize(q).dist
        want = chain_oracle(q)
        assert np.array_equal(got, want)


def test_chain_metrize_triangle_violation_repaired():
    # one long edge gets replaced by the two-hop route
    q = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    d = chain_metrize(q).dist
    assert d[0, 2] == 2.0
    assert d[0, 1] == 1.0


def test_chain_metrize_idempotent_on_generic_metric():
    for seed in range(5):
        space = random_space(seed, n_max=60)
        again = chain_metrize(space.dist)
        assert np.array_equal(again.dist, space.dist)


def test_chain_metrize_rejects_degenerate_tables():
    # identified points (zero off-diagonal) are structural errors, caught
    # before any chains are summed; CollapseError stays importable as the
    # contract for a collapse discovered during metrization
    assert issubclass(CollapseError, ValueError)
    q = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    with pytest.raises(ValueError):
        chain_metrize(q)
    with pytest.raises(ValueError):
        chain_metrize(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(ValueError):
        chain_metrize(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_chain_metrize_accepts_table_type():
    rng = np.random.default_rng(3)
    q = random_quasimetric(rng, 5)
    a = chain_metrize(q)
    b = chain_metrize(QuasiMetricTable(q))
    assert np.array_equal(a.dist, b.dist)


@given(st.integers(0, 2**32 - 1), st.integers(3, 7))
@settings(max_examples=60, deadline=None)
def test_chain_metrize_permutation_equivariant(seed, n):
    rng = np.random.default_rng(seed)
    q = random_quasimetric(rng, n)
    perm = rng.permutation(n)
    d = chain_metrize(q).dist
    d_perm = chain_metrize(q[np.ix_(perm, perm)]).dist
    assert np.array_equal(d_perm, d[np.ix_(perm, perm)])


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
@settings(max_examples=60, deadline=None)
def test_chain_metrize_output_is_metric(seed, n):
    rng = np.random.default_rng(seed)
    q = random_quasimetric(rng, n)
    d = chain_metrize(q).dist
    assert np.array_equal(d, d.T)
    assert np.all(d <= q + 1e-15)
    rep = validate_metric(d)
    assert rep.ok, rep.violations


def test_validate_metric_reports_each_axiom():
    good = euclid([[0, 0], [1, 0], [0, 1]])
    assert validate_metric(good.dist).ok

    tri = np.array([[0.0, 1.0, 9.0], [1.0, 0.0, 1.0], [9.0, 1.0, 0.0]])
    rep = validate_metric(tri)
    assert not rep.ok
    assert rep.violations[0].axiom == "triangle"
    a, m, b = rep.violations[0].witness
    assert tri[a, b] > tri[a, m] + tri[m, b]

    asym = np.array([[0.0, 1.0], [2.0, 0.0]])
    assert any(v.axiom == "symmetry" for v in validate_metric(asym).violations)

    deg = np.array([[0.0, 0.0], [0.0, 0.0]])
    assert any(v.axiom == "positivity" for v in validate_metric(deg).violations)

    diag = np.array([[0.5, 1.0], [1.0, 0.0]])
    assert any(v.axiom == "diagonal" for v in validate_metric(diag).violations)


def test_validate_rejects_nan_and_nonsquare():
    with pytest.raises(ValueError):
        validate_metric(np.array([[0.0, np.nan], [np.nan, 0.0]]))
    with pytest.raises(ValueError):
        validate_metric(np.zeros((2, 3)))


def test_restrict_and_subset():
    space = random_space(11, n_max=40)
    idx = np.array([0, 3, 5])
    sub = restrict(space, Subset(space, idx))
    assert sub.n == 3
    assert np.array_equal(sub.dist, space.dist[np.ix_(idx, idx)])
    with pytest.raises(ValueError):
        Subset(space, np.array([0, 0, 1]))
    with pytest.raises(ValueError):
        Subset(space, np.array([space.n]))


def test_subset_sorted_view():
    space = random_space(12, n_max=30)
    sub = Subset(space, np.array([4, 1, 2]))
    assert np.array_equal(sub.indices, np.array([1, 2, 4]))


def test_ball_and_diam():
    line = euclid([[float(i), 0.0] for i in range(5)])
    b = ball(line, 0, 2.0)
    assert np.array_equal(b.indices, np.array([0, 1, 2]))
    assert diam(line) == 4.0
    assert diam(b) == 2.0


def test_mesh_and_epsilon_net():
    line = euclid([[float(i), 0.0] for i in range(9)])
    assert mesh(line) == 1.0
    net = epsilon_net(line, 2.0)
    # greedy farthest-point: pairwise gaps at least epsilon, covers within it
    d = line.dist[np.ix_(net.indices, net.indices)]
    off = d[~np.eye(len(net), dtype=bool)]
    assert np.all(off >= 2.0)
    assert np.all(line.dist[:, net.indices].min(axis=1) <= 2.0)


def test_epsilon_graph_components():
    # two separated clusters merge once epsilon spans the gap
    pts = [[0, 0], [0.1, 0], [5, 0], [5.1, 0]]
    space = euclid(pts)
    g = epsilon_graph(space, 0.5)
    comps = components(g)
    assert len(comps) == 2
    assert sorted(tuple(c.indices) for c in comps) == [(0, 1), (2, 3)]
    g2 = epsilon_graph(space, 6.0)
    assert len(components(g2)) == 1


def test_components_subset_restriction():
    pts = [[0, 0], [1, 0], [2, 0], [3, 0]]
    space = euclid(pts)
    g = epsilon_graph(space, 1.5)
    inner = components(g, Subset(space, np.array([0, 1, 3])))
    assert sorted(tuple(c.indices) for c in inner) == [(0, 1), (3,)]


def test_default_epsilon_connects():
    space = random_space(21, n_max=80)
    eps = default_epsilon(space)
    assert len(components(epsilon_graph(space, eps))) == 1


def test_tree_extension_idempotence_is_tie_limited():
    """Exact-sum degenerate metrics may round tied chains below the entry."""
    space = random_space(5, n_max=20)
    d = tree_point(space.dist, 0, 0.3)
    again = chain_metrize(d).dist
    assert np.all(np.abs(again - d) <= 4.0 * np.spacing(d.max()))


def test_scaled_space():
    space = random_space(9, n_max=30)
    double = space.scaled(2.0)
    assert np.array_equal(double.dist, space.dist * 2.0)
    with pytest.raises(ValueError):
        space.scaled(0.0)
