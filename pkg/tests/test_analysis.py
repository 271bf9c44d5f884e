import math

import numpy as np
import pytest

from sewkit.analysis import (
    DisconnectedGraphError,
    InsufficientScaleError,
    ahlfors_dimension,
    ahlfors_report,
    angle,
    angle_report,
    bounded_turning,
    bounded_turning_report,
    certify_sewn,
    connectivity_threshold,
    doubling_constant,
    doubling_report,
    llc_check,
    porosity,
    porosity_report,
    relative_doubling,
    relative_doubling_report,
    relative_porosity,
    uniform_perfectness,
    uniform_perfectness_report,
)
from sewkit.generators import carpet_net, circle_net, interval_net, snowflake
from sewkit.metric import Subset, default_epsilon, mesh

from _factories import euclid, perp_segments, u_shape


def gapped_pairs():
    return euclid([[0.0, 0.0], [0.1, 0.0], [10.0, 0.0], [10.1, 0.0]])


def test_connectivity_threshold_interval():
    iv = interval_net(16)
    assert connectivity_threshold(iv) == 1.0 / 16.0


def test_disconnected_graph_detected():
    space = gapped_pairs()
    with pytest.raises(DisconnectedGraphError, match="larger epsilon"):
        bounded_turning(space, epsilon=default_epsilon(space))
    # above the gap the scan runs
    assert bounded_turning(space, epsilon=connectivity_threshold(space)) >= 1.0


def test_bounded_turning_geodesic_cases():
    assert bounded_turning(interval_net(64)) == 1.0
    assert bounded_turning(circle_net(24)) == 1.0


def test_bounded_turning_u_shape():
    space = u_shape()
    lam = bounded_turning(space, epsilon=3.0 / 16.0)
    # opposite prong tips sit 1 apart but connect only around the bottom
    assert abs(lam - math.sqrt(17.0)) <= 0.1 * math.sqrt(17.0)


def test_bounded_turning_report_fields():
    report = bounded_turning_report(u_shape(), epsilon=3.0 / 16.0, threshold=10.0)
    assert report.name == "bounded-turning"
    assert report.passed is True
    assert report.witnesses
    x, y = report.witnesses[0]
    assert x != y
    report = bounded_turning_report(u_shape(), epsilon=3.0 / 16.0, threshold=1.5)
    assert report.passed is False


def test_llc_circle():
    assert llc_check(circle_net(24)) == 1.0


def test_llc_interval_pays_for_cut_points():
    # removing a middle ball disconnects a line, so the second condition
    # forces the inner radius down to the sample spacing
    assert llc_check(interval_net(64)) == 24.25


def test_doubling_scale_invariance():
    iv = interval_net(64)
    n1 = doubling_constant(iv)
    assert n1 == 3
    assert doubling_constant(iv.scaled(2.0)) == n1
    assert doubling_constant(iv.scaled(0.5)) == n1


def test_doubling_carpet():
    space, _ = carpet_net(2)
    report = doubling_report(space, threshold=16)
    assert report.constants["N"] == 11
    assert report.passed is True


def test_porosity_extremes():
    iv = interval_net(64)
    everything = Subset(iv, np.arange(iv.n))
    assert porosity(iv, everything) == 0.0
    # a single endpoint leaves the whole far side as a hole
    assert porosity(iv, Subset(iv, np.array([0]))) == 0.5


def test_porosity_range_and_report():
    space, periph = carpet_net(1)
    report = porosity_report(space, periph[-1], threshold=0.01)
    p = report.constants["p"]
    assert 0.0 <= p <= 0.5
    assert report.passed is True
    assert report.witnesses


def test_ahlfors_interval_dimension_one():
    Q, c_low, c_high = ahlfors_dimension(interval_net(256))
    assert abs(Q - 1.0) <= 0.05
    assert 0.0 < c_low <= c_high


def test_ahlfors_carpet_dimension():
    space, _ = carpet_net(3)
    Q, c_low, c_high = ahlfors_dimension(space)
    assert Q == 1.7939110774302003
    assert c_low == 0.3655243005299972
    assert c_high == 1.253840163931956


def test_ahlfors_needs_points_and_scales():
    with pytest.raises(ValueError, match="32 points"):
        ahlfors_report(interval_net(8))
    with pytest.raises(InsufficientScaleError, match="dyadic levels"):
        ahlfors_report(interval_net(32))
    # snowflaking halves the log-scale range below the minimum
    with pytest.raises(InsufficientScaleError):
        ahlfors_report(snowflake(interval_net(256), 0.5))


def test_ahlfors_witness_table_matches_fit():
    report = ahlfors_report(interval_net(256))
    rs = np.array([r for r, _ in report.witnesses])
    ns = np.array([m for _, m in report.witnesses])
    Q, _ = np.polyfit(np.log(rs), np.log(ns), 1)
    assert float(Q) == report.constants["Q"]


def test_relative_doubling_carpet():
    space, periph = carpet_net(2)
    holes = periph[:-1]
    assert len(holes) == 9
    assert relative_doubling(space, holes, 0.5) == 3
    assert relative_doubling(space, holes, 0.25) == 6
    with pytest.raises(ValueError, match="eps_frac"):
        relative_doubling(space, holes, 1.5)


def test_relative_doubling_monotone_in_eps_frac():
    space, periph = carpet_net(2)
    holes = periph[:-1]
    counts = [relative_doubling(space, holes, f) for f in (0.2, 0.4, 0.6)]
    assert counts == sorted(counts, reverse=True)


def test_relative_porosity_carpet():
    space, periph = carpet_net(2)
    holes = periph[:-1]
    eps = max(default_epsilon(space), connectivity_threshold(space))
    p_X, r_0 = relative_porosity(space, holes, eps)
    assert p_X == 0.23570226039551584
    assert r_0 == 4.0 / 3.0


def test_relative_porosity_needs_scales():
    # a link scale above diam/4 leaves the dyadic grid empty
    space, periph = carpet_net(1)
    with pytest.raises(InsufficientScaleError):
        relative_porosity(space, periph[:-1], 10.0)


def test_angle_perpendicular_segments():
    space, A, B = perp_segments()
    got = angle(space, A, B)
    assert abs(got - 1.0 / math.sqrt(2.0)) <= 2.0 * mesh(space)
    # symmetric in the pair and invariant under exact rescaling
    assert angle(space, B, A) == got
    assert angle(space.scaled(4.0), A, B) == got


def test_angle_requires_intersection():
    space, A, B = perp_segments()
    tail = Subset(space, B.indices[1:])
    with pytest.raises(ValueError, match="intersection"):
        angle_report(space, A, tail)


def test_uniform_perfectness_circle():
    space = circle_net(24)
    lam = uniform_perfectness(space, Subset(space, np.arange(24)))
    assert lam == 1.0442095377604128
    report = uniform_perfectness_report(space, Subset(space, np.arange(24)), threshold=2.0)
    assert report.passed is True


def test_uniform_perfectness_gap_is_infinite():
    space = gapped_pairs()
    pair = Subset(space, np.array([0, 3]))
    report = uniform_perfectness_report(space, pair)
    assert report.constants["lambda"] == np.inf
    assert report.passed is False


def test_certify_sewn_toy(toy_sewn):
    cert = certify_sewn(toy_sewn)
    assert cert.passed
    # five points cannot support a regularity fit; recorded, not failed
    ahl = cert.report("ahlfors-regularity")
    assert ahl.passed is None and not ahl.constants
    assert cert.constants["Q"] is None
    assert cert.constants["c_flat"] == 1.0


def test_certify_sewn_level1(sewn_level1):
    cert = certify_sewn(sewn_level1)
    assert cert.passed
    assert cert.report("bt-vs-pieces").passed is True
    assert cert.report("llc-vs-pieces").passed is True
    assert cert.constants["lambda_bt"] <= cert.constants["bt_bound"] * 2.0
    with pytest.raises(KeyError):
        cert.report("no-such-scan")


def test_error_types():
    assert issubclass(DisconnectedGraphError, ValueError)
    assert issubclass(InsufficientScaleError, ValueError)
