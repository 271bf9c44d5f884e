import time

import numpy as np

from sewkit.generators import (
    GluingComponent,
    ScenarioBundle,
    carpet_with_disks,
    circle_net,
    disk_net,
    snowflake,
    _carpet_grid,
)
from sewkit.glue import CompatibilityError, certify_glued_qm, glue_maps, identity_glued
from sewkit.maps import PointMap
from sewkit.metric import Subset
from sewkit.sewing import sew


def toy_bundle():
    base = circle_net(4)
    filling, boundary = disk_net(1, boundary_count=4)
    psi = boundary.indices.copy()
    comp = GluingComponent(
        boundary=Subset(base, np.arange(4)),
        filling=filling,
        boundary_image=boundary,
        psi=psi,
        L=1.0,
    )
    return ScenarioBundle(base=base, components=(comp,))


# --- identity on the toy ------------------------------------------------------
toy = sew(toy_bundle())
gid = identity_glued(toy)
assert np.array_equal(gid.assembled.image, np.arange(toy.space.n))
cert = certify_glued_qm(gid)
print("toy identity: s == t exactly:", np.array_equal(cert.global_profile.t, cert.global_profile.s))
print("toy hypothesis_ok:", cert.hypothesis_ok,
      "angles:", cert.angles[0], "perf:", cert.perfectness[0], "ratios:", cert.diam_ratios[0])

# --- carpet rotation group ----------------------------------------------------
level = 2
g = 2 * 3**level + 1
holes, ix, iy, lookup = _carpet_grid(level)
t0 = time.time()
sewn = sew(carpet_with_disks(level))
print(f"sew cwd({level}): {time.time()-t0:.1f}s n={sewn.space.n}")
bundle = sewn.bundle

hole_pos = {(lv, hx, hy): i for i, (lv, hx, hy, side) in enumerate(holes)}
pi = np.array([hole_pos[(lv, 3**lv - 1 - hy, hx)] for lv, hx, hy, side in holes], dtype=np.int64)

base_img = np.array([lookup[g - 1 - iy[i], ix[i]] for i in range(bundle.base.n)], dtype=np.int64)
base_rot = PointMap(bundle.base, bundle.base, base_img)


def disk_rot_image(n_fill):
    img = np.empty(n_fill, dtype=np.int64)
    img[0] = 0
    j = 1
    start = 1
    while start < n_fill:
        c = 4 * j
        for p in range(c):
            img[start + p] = start + (p + j) % c
        start += c
        j += 1
    return img


fill_rots = tuple(
    PointMap(bundle.components[k].filling, bundle.components[int(pi[k])].filling,
             disk_rot_image(bundle.components[k].filling.n))
    for k in range(len(bundle.components))
)

t0 = time.time()
rot = glue_maps(sewn, sewn, base_rot, pi, fill_rots)
print(f"glue rotation: {time.time()-t0:.2f}s")

# exact isometry
d = sewn.space.dist
perm = rot.assembled.image
print("rotation is bitwise isometry:", np.array_equal(d[np.ix_(perm, perm)], d))

t0 = time.time()
cert_rot = certify_glued_qm(rot)
print(f"certify rotation: {time.time()-t0:.1f}s")
print("rotation: s == t exactly:", np.array_equal(cert_rot.global_profile.t, cert_rot.global_profile.s))
print("rotation hypothesis_ok:", cert_rot.hypothesis_ok)
print("  angles src:", [round(a, 4) for a in cert_rot.angles[0][:4]], "...")
print("  perfectness src:", [round(p, 4) for p in cert_rot.perfectness[0][:4]], "...")
print("  diam ratios src:", [round(r, 4) for r in cert_rot.diam_ratios[0][:4]], "...")

# functoriality over the order-4 group
maps = [identity_glued(sewn), rot]
maps.append(rot.then(rot))
maps.append(maps[2].then(rot))
r4 = maps[3].then(rot)
print("rot^4 == id point-for-point:", np.array_equal(r4.assembled.image, maps[0].assembled.image))
ok = True
for a in range(4):
    for b in range(4):
        comp = maps[a].then(maps[b])
        manual = maps[b].assembled.image[maps[a].assembled.image]
        ok &= np.array_equal(comp.assembled.image, manual)
print("functoriality over the group (16 pairs):", ok)

# inverse round-trip
inv = rot.inverse()
print("inverse round-trip:", np.array_equal(rot.then(inv).assembled.image, np.arange(sewn.space.n)))

# mismatched disk map -> seam witness
bad_fills = list(fill_rots)
k_bad = 3
comp_bad = bundle.components[k_bad]
img = disk_rot_image(comp_bad.filling.n)
b = comp_bad.psi.size
ring = np.arange(comp_bad.filling.n - b, comp_bad.filling.n)
img[ring] = ring[(np.arange(b) + b // 4 + 1) % b]  # one step too far
bad_fills[k_bad] = PointMap(comp_bad.filling, bundle.components[int(pi[k_bad])].filling, img)
try:
    glue_maps(sewn, sewn, base_rot, pi, tuple(bad_fills))
    print("mismatch: NOT rejected (bad)")
except CompatibilityError as e:
    print(f"mismatch rejected: component={e.component} seam_point={e.seam_point}: {e}")

# --- piecewise-snowflaked target ----------------------------------------------
toy_b = toy.bundle
alpha = 0.5
snow_comps = tuple(
    GluingComponent(
        boundary=c.boundary,
        filling=snowflake(c.filling, alpha),
        boundary_image=Subset(snowflake(c.filling, alpha), c.boundary_image.indices),
        psi=c.psi,
        L=c.L,
    )
    for c in toy_b.components
)
# boundary subsets must reference the snowflaked spaces
snow_base = snowflake(toy_b.base, alpha)
snow_comps = tuple(
    GluingComponent(
        boundary=Subset(snow_base, c.boundary.indices),
        filling=sc.filling,
        boundary_image=sc.boundary_image,
        psi=c.psi,
        L=float(c.L ** alpha) if c.L >= 1 else 1.0,
    )
    for c, sc in zip(toy_b.components, snow_comps)
)
snow = sew(ScenarioBundle(base=snow_base, components=snow_comps))
gsnow = glue_maps(
    toy,
    snow,
    PointMap(toy_b.base, snow_base, np.arange(toy_b.base.n)),
    np.arange(len(toy_b.components)),
    tuple(
        PointMap(c.filling, sc.filling, np.arange(c.filling.n))
        for c, sc in zip(toy_b.components, snow_comps)
    ),
)
cs = certify_glued_qm(gsnow)
tknots = cs.global_profile.knot_t
pw = cs.piecewise_envelope(tknots)
shared = pw > 0
dominated = np.all(cs.global_profile.envelope(tknots[shared]) <= 2.0 * pw[shared])
print("snowflaked target: global envelope finite:", np.isfinite(cs.global_profile.s).all(),
      "dominated by 2x piecewise:", bool(dominated),
      f"({int(shared.sum())}/{tknots.size} shared knots)")
worst = (cs.global_profile.envelope(tknots[shared]) / pw[shared]).max()
print("worst global/piecewise ratio:", float(worst))
