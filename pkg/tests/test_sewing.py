import numpy as np
import pytest

from sewkit.generators import GluingComponent, ScenarioBundle, disk_net
from sewkit.maps import PowerLawEta
from sewkit.metric import Subset, default_epsilon, diam, validate_metric
from sewkit.sewing import (
    ComparabilityError,
    component_census,
    flatness_report,
    nearest_seam_check,
    normalize_gluing,
    sew,
    verify_ba_contract,
    verify_flatness,
)

from _factories import toy_bundle


def test_toy_exact(toy_sewn):
    assert toy_sewn.n == 5
    assert toy_sewn.certificates.L == 1.0
    # one seam hop realizes every cross distance, so metrization is a no-op
    assert np.array_equal(toy_sewn.space.dist, toy_sewn.q.q)
    assert np.all(toy_sewn.space.dist[4, :4] == 1.0)
    assert toy_sewn.certificates.c_flat == 1.0
    assert toy_sewn.certificates.Delta >= 1.0


def test_sewn_is_metric(toy_sewn, sewn_level1):
    for sewn in (toy_sewn, sewn_level1):
        assert validate_metric(sewn.space.dist).ok


def test_random_bundles_certify_exactly(random_bundles):
    for bundle in random_bundles:
        sewn = sew(bundle)
        c = sewn.certificates
        # seam diameters are matched during normalization, and these seams
        # are uniformly scaled copies, so the certified constant is 1 up to
        # the rounding of the rescale itself
        assert abs(c.L - 1.0) < 1e-12
        assert np.array_equal(sewn.space.dist, sewn.q.q)
        assert c.c_flat > 0.0
        assert nearest_seam_check(sewn).ok


def test_comparability_band(random_bundles):
    for bundle in random_bundles[:6]:
        sewn = sew(bundle)
        d, q, L = sewn.space.dist, sewn.q.q, sewn.certificates.L
        assert np.all(d <= q * (1.0 + 1e-9))
        assert np.all(d >= q / L * (1.0 - 1e-9))


def test_normalize_scaling_invariance():
    bundle = toy_bundle()
    comp = bundle.components[0]
    scaled = GluingComponent(
        comp.boundary,
        comp.filling.scaled(4.0),
        Subset(comp.filling.scaled(4.0), comp.boundary_image.indices),
        comp.psi,
        comp.L * 4.0,
        comp.cycle,
    )
    redone = normalize_gluing(ScenarioBundle(bundle.base, (scaled,)))
    base = normalize_gluing(bundle)
    # the seam-matching factor is exactly 1/4, a power of two, so rescaling
    # back is bitwise lossless
    assert np.array_equal(
        redone.components[0].filling.dist, base.components[0].filling.dist
    )
    assert redone.components[0].L == base.components[0].L == 1.0


def test_normalize_rejects_degenerate_boundary():
    base = toy_bundle().base
    filling, rim = disk_net(1, boundary_count=4)
    comp = GluingComponent(
        Subset(base, np.array([0])),
        filling,
        Subset(filling, rim.indices[:1]),
        rim.indices[:1].copy(),
        L=1.0,
    )
    with pytest.raises(ValueError, match="at least 2"):
        normalize_gluing(ScenarioBundle(base, (comp,)))


def test_layout_provenance(sewn_level1):
    layout = sewn_level1.layout
    nb = sewn_level1.base_size
    assert layout.provenance(0) == (-1, 0)
    k, idx = layout.provenance(nb)
    assert k == 0 and idx >= 0
    # every filling index lands either on its seam target or past the base
    comp = sewn_level1.bundle.components[0]
    f2s = layout.fill_to_sewn[0]
    assert np.array_equal(np.sort(f2s[comp.psi]), np.sort(comp.boundary.indices))
    assert np.all(f2s[layout.interiors[0]] >= nb)


def test_subset_views(sewn_level1):
    sewn = sewn_level1
    assert len(sewn.base_subset()) == sewn.base_size
    seam = sewn.seam_subset(0)
    interior = sewn.interior_subset(0)
    piece = sewn.piece_subset(0)
    assert len(piece) == len(seam) + len(interior)
    assert len(np.intersect1d(seam.indices, interior.indices)) == 0
    assert set(piece.indices.tolist()) == set(seam.indices.tolist()) | set(
        interior.indices.tolist()
    )


def test_flatness_positive(toy_sewn, sewn_level1, sewn_level2):
    for sewn in (toy_sewn, sewn_level1, sewn_level2):
        c = verify_flatness(sewn)
        assert 0.0 < c <= 1.0
        assert c == sewn.certificates.c_flat
    # disks sewn onto matched seams leave base geodesics untouched
    assert sewn_level1.certificates.c_flat >= 1.0 - 1e-12
    assert sewn_level2.certificates.c_flat >= 1.0 - 1e-12


def test_flatness_report_detail(sewn_level1, sewn_level2):
    c_flat, c_base, c_cross, wit_base, wit_cross = flatness_report(sewn_level1)
    assert c_cross is None  # a single filling has no cross term
    assert c_flat == min(1.0, c_base)
    assert wit_base is not None

    c_flat, c_base, c_cross, wit_base, wit_cross = flatness_report(sewn_level2)
    assert c_flat == min(1.0, c_base, c_cross)
    assert wit_base is not None and wit_cross is not None
    assert 0.0 < c_flat <= 1.0


def test_census(toy_sewn, sewn_level1, sewn_level2):
    for sewn, want in ((toy_sewn, 1), (sewn_level1, 1), (sewn_level2, 9)):
        report = component_census(sewn, default_epsilon(sewn.space))
        assert report.ok
        assert len(report.entries) == want
        for entry in report.entries:
            assert len(entry.origins) == 1


def test_nearest_seam(toy_sewn, sewn_level1, sewn_level2):
    for sewn in (toy_sewn, sewn_level1, sewn_level2):
        report = nearest_seam_check(sewn)
        assert report.ok
        want = sum(inter.size for inter in sewn.layout.interiors)
        assert report.checked == want


def test_ba_contract_uniform_scaling():
    bundle = toy_bundle()
    comp = bundle.components[0]
    d_hat = comp.filling.scaled(2.0)
    report = verify_ba_contract(
        comp.filling, comp.boundary, comp.psi, d_hat, eta=PowerLawEta(2.0, 1.0)
    )
    assert report.finite
    assert report.local_similarity == 1.0
    assert report.seam_bilipschitz == 2.0
    assert report.diam_ratio == 2.0
    assert report.hypothesis_ok is True
    # the identity between a metric and its multiple has no ratio distortion
    assert np.max(np.abs(report.identity_profile.s - report.identity_profile.t)) == 0.0


def test_ba_contract_hypothesis_failure():
    bundle = toy_bundle()
    comp = bundle.components[0]
    report = verify_ba_contract(
        comp.filling,
        comp.boundary,
        comp.psi,
        comp.filling.scaled(2.0),
        eta=PowerLawEta(0.5, 1.0),
    )
    assert report.hypothesis_ok is False


def test_ba_contract_without_eta():
    bundle = toy_bundle()
    comp = bundle.components[0]
    report = verify_ba_contract(
        comp.filling, comp.boundary, comp.psi, comp.filling.scaled(3.0)
    )
    assert report.hypothesis_ok is None


def test_ba_contract_rejects_size_mismatch(toy_sewn):
    bundle = toy_sewn.bundle
    comp = bundle.components[0]
    with pytest.raises(ValueError, match="point set"):
        verify_ba_contract(comp.filling, comp.boundary, comp.psi, bundle.base)


def test_delta_tracks_diam_ratio(sewn_level1):
    sewn = sewn_level1
    comp = sewn.bundle.components[0]
    d = sewn.space.dist
    piece = sewn.piece_subset(0).indices
    seam = comp.boundary.indices
    ratio = float(d[np.ix_(piece, piece)].max() / d[np.ix_(seam, seam)].max())
    assert sewn.certificates.Delta == max(1.0, ratio)


def test_comparability_error_type():
    assert issubclass(ComparabilityError, ValueError)
