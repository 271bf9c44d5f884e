import numpy as np
import pytest

from sewkit.generators import carpet_net, circle_net, interval_net
from sewkit.maps import PointMap, qm_distortion
from sewkit.metric import Subset, diam, restrict, validate_metric
from sewkit.sphericalize import (
    BAND_FACTOR,
    IDENTITY_ENVELOPE_SLOPE,
    check_angle_transfer,
    check_diam_transfer,
    sphericalize,
)

from _factories import euclid, perp_segments, random_space


def _band_holds(sph):
    d = sph.space.dist
    q = sph.q_table.q
    assert (d - q).max() <= 0.0  # chains never exceed the direct entry
    off = ~np.eye(sph.n, dtype=bool)
    assert np.all(d[off] >= q[off] / BAND_FACTOR * (1.0 - 1e-12))


def test_band_on_random_spaces():
    for seed in range(8):
        space = random_space(seed, n_max=60)
        sph = sphericalize(space, w=space.n // 2)
        _band_holds(sph)
        assert validate_metric(sph.space.dist).ok


def test_band_on_generators():
    for space, w in ((circle_net(12), 0), (interval_net(16), 3), (carpet_net(1)[0], 7)):
        sph = sphericalize(space, w)
        _band_holds(sph)
        assert sph.n == space.n - 1


def test_three_point_line_closed_form():
    # points 0, 1, 2 on a line, inverted at the left end: the only distance
    # is 1 / (1 * 2)
    line = interval_net(2).scaled(2.0)
    sph = sphericalize(line, 0)
    assert sph.n == 2
    assert sph.space.dist[0, 1] == 0.5


def test_four_point_line_closed_form():
    line = interval_net(3).scaled(3.0)
    sph = sphericalize(line, 0)
    d = sph.space.dist
    q = sph.q_table.q
    assert d[0, 1] == 0.5
    assert d[1, 2] == 1.0 / 6.0
    # the end-to-end entry ties its two-hop chain exactly and survives
    assert d[0, 2] == q[0, 2] == 2.0 / 3.0


def test_delta_and_kept_bookkeeping():
    space = random_space(3, n_max=20)
    w = 5
    sph = sphericalize(space, w)
    assert w not in sph.kept
    assert np.array_equal(sph.delta, space.dist[sph.kept, w])
    assert sph.index_of(sph.kept[4]) == 4
    with pytest.raises(KeyError):
        sph.index_of(w)


def test_pull_subset():
    space = interval_net(8)
    sph = sphericalize(space, 0)
    sub = sph.pull_subset(Subset(space, np.array([3, 5, 8])))
    assert np.array_equal(sph.kept[sub.indices], [3, 5, 8])
    with pytest.raises(ValueError, match="basepoint"):
        sph.pull_subset(Subset(space, np.array([0, 3])))


def test_input_validation():
    space = interval_net(4)
    with pytest.raises(ValueError, match="out of range"):
        sphericalize(space, 9)
    with pytest.raises(ValueError, match="at least two"):
        sphericalize(euclid([[0.0, 0.0], [1.0, 0.0]]), 0)


def test_doubling_the_space_halves_the_result_bitwise():
    space = random_space(11, n_max=40)
    a = sphericalize(space, 0)
    b = sphericalize(space.scaled(2.0), 0)
    # q picks up exactly one factor of two downstairs; chain sums of halved
    # entries are halved sums, so the metrization commutes bitwise
    assert np.array_equal(b.space.dist * 2.0, a.space.dist)


def test_identity_cross_ratio_envelope():
    for space, w in ((circle_net(16), 0), (random_space(7, n_max=48), 10)):
        sph = sphericalize(space, w)
        outside = restrict(space, Subset(space, sph.kept))
        prof = qm_distortion(
            PointMap(outside, sph.space, np.arange(sph.n)), quadruple_cap=40000
        )
        assert float(np.max(prof.s / prof.t)) <= IDENTITY_ENVELOPE_SLOPE * (1 + 1e-12)


def test_diam_transfer_pass():
    space = interval_net(8)
    sph = sphericalize(space, 0)
    K = Subset(space, np.array([5, 6]))
    L = Subset(space, np.arange(4, 9))
    report = check_diam_transfer(sph, K, L, Delta=4.0, c=0.5)
    assert report.ok
    assert report.diam_L_hat <= report.bound
    assert report.slack >= 1.0


def test_diam_transfer_hypothesis_failures():
    space = interval_net(8)
    sph = sphericalize(space, 0)
    K = Subset(space, np.array([5, 6]))
    L = Subset(space, np.arange(4, 9))
    # overstated diameter comparability
    report = check_diam_transfer(sph, K, L, Delta=1.0, c=0.5)
    assert not report.ok and report.status == "hypothesis-failed"
    assert any("diam" in msg for msg in report.hypothesis_failures)
    # basepoint inside L
    bad_L = Subset(space, np.arange(0, 9))
    report = check_diam_transfer(sph, K, bad_L, Delta=8.0, c=0.5)
    assert any("basepoint" in msg for msg in report.hypothesis_failures)


def test_diam_transfer_input_errors():
    space = interval_net(8)
    sph = sphericalize(space, 0)
    K = Subset(space, np.array([2, 3]))
    L = Subset(space, np.arange(4, 9))
    with pytest.raises(ValueError, match="subset"):
        check_diam_transfer(sph, K, L, Delta=2.0, c=0.5)
    with pytest.raises(ValueError, match="Delta"):
        check_diam_transfer(sph, Subset(space, np.array([5, 6])), L, Delta=0.5, c=0.5)


def test_angle_transfer():
    space, A, B = perp_segments()
    w = int(B.indices[-1])  # far end of one arm
    report = check_angle_transfer(space, A, B, w, c=0.5, Delta=4.0)
    assert report.ok
    assert report.angle_after > 0.0
    assert report.witness_before is not None


def test_angle_transfer_hypothesis_failure():
    space, A, B = perp_segments()
    w = int(B.indices[-1])
    report = check_angle_transfer(space, A, B, w, c=1.0, Delta=4.0)
    assert report.status == "hypothesis-failed"
    assert any("angle" in msg for msg in report.hypothesis_failures)


def test_angle_transfer_requires_intersection():
    space, A, _ = perp_segments()
    other = Subset(space, np.array([10, 11]))
    with pytest.raises(ValueError, match="intersection"):
        check_angle_transfer(space, A, other, 12, c=0.5, Delta=2.0)
