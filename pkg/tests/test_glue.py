import numpy as np
import pytest

from sewkit.generators import GluingComponent, ScenarioBundle, snowflake
from sewkit.glue import CompatibilityError, certify_glued_qm, glue_maps, identity_glued
from sewkit.maps import PointMap
from sewkit.metric import Subset
from sewkit.sewing import sew

from _factories import carpet_rotation_pieces, disk_rotation_image


@pytest.fixture(scope="module")
def rotation(sewn_level2):
    base_map, pi, fills = carpet_rotation_pieces(sewn_level2.bundle, 2)
    return glue_maps(sewn_level2, sewn_level2, base_map, pi, fills)


def test_identity_glued(toy_sewn):
    gid = identity_glued(toy_sewn)
    assert np.array_equal(gid.assembled.image, np.arange(toy_sewn.n))
    cert = certify_glued_qm(gid)
    assert np.array_equal(cert.global_profile.s, cert.global_profile.t)
    assert cert.hypothesis_ok


def test_rotation_is_bitwise_isometry(sewn_level2, rotation):
    d = sewn_level2.space.dist
    perm = rotation.assembled.image
    assert np.array_equal(np.sort(perm), np.arange(sewn_level2.n))
    assert np.array_equal(d[np.ix_(perm, perm)], d)


def test_rotation_certificate(rotation):
    cert = certify_glued_qm(rotation, quadruple_cap=20000, triple_cap=20000)
    assert np.array_equal(cert.global_profile.s, cert.global_profile.t)
    assert cert.hypothesis_ok
    for side in cert.angles:
        assert all(a > 0.0 for a in side)
    for side in cert.diam_ratios:
        assert all(0.0 < r <= 1.0 for r in side)


def test_rotation_group(sewn_level2, rotation):
    n = sewn_level2.n
    powers = [identity_glued(sewn_level2)]
    for _ in range(3):
        powers.append(powers[-1].then(rotation))
    # order four, exactly
    r4 = powers[-1].then(rotation)
    assert np.array_equal(r4.assembled.image, powers[0].assembled.image)
    for a in range(4):
        for b in range(4):
            comp = powers[a].then(powers[b])
            manual = powers[b].assembled.image[powers[a].assembled.image]
            assert np.array_equal(comp.assembled.image, manual)


def test_rotation_inverse(sewn_level2, rotation):
    inv = rotation.inverse()
    round_trip = rotation.then(inv)
    assert np.array_equal(round_trip.assembled.image, np.arange(sewn_level2.n))
    assert np.array_equal(
        inv.assembled.image[rotation.assembled.image], np.arange(sewn_level2.n)
    )


def test_seam_mismatch_is_witnessed(sewn_level2):
    base_map, pi, fills = carpet_rotation_pieces(sewn_level2.bundle, 2)
    bundle = sewn_level2.bundle
    k_bad = 3
    comp = bundle.components[k_bad]
    img = disk_rotation_image(comp.filling.n)
    b = comp.psi.size
    ring = np.arange(comp.filling.n - b, comp.filling.n)
    img[ring] = ring[(np.arange(b) + b // 4 + 1) % b]  # one step too far
    bad = list(fills)
    bad[k_bad] = PointMap(comp.filling, bundle.components[int(pi[k_bad])].filling, img)
    with pytest.raises(CompatibilityError) as exc:
        glue_maps(sewn_level2, sewn_level2, base_map, pi, tuple(bad))
    assert exc.value.component == k_bad
    assert exc.value.seam_point in comp.boundary.indices


def test_structural_rejections(toy_sewn):
    gid = identity_glued(toy_sewn)
    base = toy_sewn.bundle.base
    filling = toy_sewn.bundle.components[0].filling
    with pytest.raises(ValueError, match="permutation"):
        glue_maps(toy_sewn, toy_sewn, gid.base_map, np.array([1]), gid.filling_maps)
    with pytest.raises(ValueError, match="filling map per component"):
        glue_maps(toy_sewn, toy_sewn, gid.base_map, np.array([0]), ())
    with pytest.raises(ValueError, match="does not match"):
        glue_maps(
            toy_sewn,
            toy_sewn,
            gid.base_map,
            np.array([0]),
            (PointMap.identity(base),),  # wrong point count for the filling
        )


def test_composition_domain_mismatch(toy_sewn, sewn_level1):
    with pytest.raises(ValueError, match="mismatch"):
        identity_glued(toy_sewn).then(identity_glued(sewn_level1))


def snowflaked_twin(sewn, alpha=0.5):
    """The same bundle with every piece snowflaked; L transforms as L**alpha."""
    bundle = sewn.bundle
    snow_base = snowflake(bundle.base, alpha)
    comps = []
    for c in bundle.components:
        flaked = snowflake(c.filling, alpha)
        comps.append(
            GluingComponent(
                boundary=Subset(snow_base, c.boundary.indices),
                filling=flaked,
                boundary_image=Subset(flaked, c.boundary_image.indices),
                psi=c.psi,
                L=float(c.L**alpha),
            )
        )
    return sew(ScenarioBundle(base=snow_base, components=tuple(comps)))


def test_snowflaked_target_dominated_piecewise(toy_sewn):
    snow = snowflaked_twin(toy_sewn)
    bundle = toy_sewn.bundle
    g = glue_maps(
        toy_sewn,
        snow,
        PointMap(bundle.base, snow.bundle.base, np.arange(bundle.base.n)),
        np.arange(len(bundle.components)),
        tuple(
            PointMap(c.filling, sc.filling, np.arange(c.filling.n))
            for c, sc in zip(bundle.components, snow.bundle.components)
        ),
    )
    cert = certify_glued_qm(g)
    assert cert.hypothesis_ok
    knots = cert.global_profile.knot_t
    piecewise = cert.piecewise_envelope(knots)
    shared = piecewise > 0
    assert shared.any()
    # the assembled distortion never exceeds twice the worst piece
    assert np.all(cert.global_profile.envelope(knots[shared]) <= 2.0 * piecewise[shared])
