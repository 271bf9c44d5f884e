"""Shared constructions for the test suite.

Everything here is deterministic given a seed; the bundle factory builds
fillings whose seam blocks are exact scaled copies of the base block, so
validity is guaranteed by construction rather than by luck.
"""

import numpy as np

from sewkit.generators import GluingComponent, ScenarioBundle, circle_net, disk_net
from sewkit.metric import FiniteMetricSpace, Subset, diam, restrict


def euclid(points) -> FiniteMetricSpace:
    pts = np.asarray(points, dtype=np.float64)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, 0.0)
    d = np.maximum(d, d.T)
    return FiniteMetricSpace(d, coords=pts)


def random_space(seed, n_max=200, dim=2) -> FiniteMetricSpace:
    """Random planar net with a minimum separation, so no two points collide."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, n_max + 1))
    pts = rng.uniform(0.0, 1.0, (n, dim))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, np.inf)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if keep[i] and np.any(d[i, : i][keep[:i]] < 1e-3):
            keep[i] = False
    return euclid(pts[keep])


def random_quasimetric(rng, n) -> np.ndarray:
    t = rng.uniform(0.2, 2.0, (n, n))
    t = np.minimum(t, t.T)
    np.fill_diagonal(t, 0.0)
    return t


def tree_point(dist, anchor, r):
    """Append one point hanging off ``anchor`` at distance r (a metric extension).

    Every distance through the new point is an exact sum, so chain sums tie
    exactly; useful for degenerate-input tests, unsuitable where bitwise
    agreement between direct entries and chains is asserted.
    """
    n = dist.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = dist
    out[n, :n] = dist[anchor] + r
    out[:n, n] = out[n, :n]
    out[n, anchor] = r
    out[anchor, n] = r
    return out


def second_cone(dist, heights1, rng):
    """Append a second apex over the seam block with fresh generic heights.

    The apex gap is placed strictly between the triangle bounds forced by
    the two height families, so no entry is an exact sum of others.
    """
    b = heights1.size
    block = dist[:b, :b]
    off = block[~np.eye(b, dtype=bool)]
    h2 = heights1 + rng.uniform(0.25, 1.0, b) * (0.2 * float(off.min()))
    lo = float(np.abs(heights1 - h2).max())
    hi = float((heights1 + h2).min())
    gap = lo + (hi - lo) * float(rng.uniform(0.35, 0.65))
    n = dist.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = dist
    out[n, :b] = h2
    out[:b, n] = h2
    out[n, b] = gap
    out[b, n] = gap
    return out


def cone_filling(base, boundary_idx, height_frac, scale, rng=None):
    """Filling made of a scaled seam copy plus a near-cone point over it.

    Heights stay within half the smallest seam gap of a common value, which
    keeps the triangle inequality; the per-point jitter avoids exactly tied
    chain sums, whose rounding is allowed to disagree with the direct entry.
    """
    block = base.dist[np.ix_(boundary_idx, boundary_idx)] * scale
    b = boundary_idx.size
    h = height_frac * float(block.max())
    heights = np.full(b, h)
    if rng is not None and b > 1:
        off = block[~np.eye(b, dtype=bool)]
        heights = h + rng.uniform(0.0, 0.25 * float(off.min()), b)
    d = np.zeros((b + 1, b + 1))
    d[:b, :b] = block
    d[b, :b] = heights
    d[:b, b] = heights
    return FiniteMetricSpace(d)


def random_bundle(seed) -> ScenarioBundle:
    """Seeded gluing scenario with 1-2 components and tiny interiors.

    Even seeds use scale 1 on every seam, making the filling blocks exact
    copies of the base blocks (L = 1); odd seeds scale each block away
    from 1.
    """
    rng = np.random.default_rng(1000 + seed)
    base = random_space(2000 + seed, n_max=24)
    while base.n < 12:
        seed += 7919
        base = random_space(2000 + seed, n_max=24)
    order = rng.permutation(base.n)
    k = int(rng.integers(1, 3))
    comps = []
    at = 0
    for c in range(k):
        b = int(rng.integers(3, 6))
        idx = np.sort(order[at : at + b])
        at += b
        scale = 1.0 if seed % 2 == 0 else float(rng.uniform(0.7, 1.4))
        filling = cone_filling(base, idx, float(rng.uniform(0.6, 1.0)), scale, rng)
        if rng.random() < 0.5:
            heights = filling.dist[b, :b].copy()
            filling = FiniteMetricSpace(second_cone(filling.dist, heights, rng))
        comps.append(
            GluingComponent(
                boundary=Subset(base, idx),
                filling=filling,
                boundary_image=Subset(filling, np.arange(b)),
                psi=np.arange(b, dtype=np.int64),
                L=max(scale, 1.0 / scale),
            )
        )
    bundle = ScenarioBundle(base=base, components=tuple(comps))
    bundle.validate()
    return bundle


def toy_bundle() -> ScenarioBundle:
    """Unit-circle 4-net base filled with the same 4 points plus the center."""
    base = circle_net(4)
    filling, boundary = disk_net(1, boundary_count=4)
    comp = GluingComponent(
        boundary=Subset(base, np.arange(4)),
        filling=filling,
        boundary_image=boundary,
        psi=boundary.indices.copy(),
        L=1.0,
    )
    return ScenarioBundle(base=base, components=(comp,))


def u_shape() -> FiniteMetricSpace:
    """Two unit segments 1/4 apart, joined at one end by a short bend."""
    m = 16
    xs = np.arange(m + 1) / m
    top = np.stack([xs, np.full(m + 1, 0.25)], 1)
    bot = np.stack([xs, np.zeros(m + 1)], 1)
    bend = np.array([[1.0, 1 / 16], [1.0, 2 / 16], [1.0, 3 / 16]])
    return euclid(np.concatenate([top, bot, bend]))


def two_clusters() -> FiniteMetricSpace:
    """Two nearby pairs connected only through a long detour."""
    bridge = [(0.05 + 0.5 * i, 0.0) for i in range(1, 61)]
    back = [(30.05, 0.5), (30.05, 1.0)]
    ret = [(30.05 - 0.5 * i, 1.0) for i in range(1, 61)]
    pts = np.array([(0, 0), (0.05, 0)] + bridge + back + ret + [(0.05, 1), (0, 1)])
    return euclid(pts)


def perp_segments():
    """Two unit segments meeting at a right angle; returns (space, A, B)."""
    a_pts = np.array([[i, 0] for i in range(9)], float) / 8
    b_pts = np.array([[0, i] for i in range(1, 9)], float) / 8
    space = euclid(np.concatenate([a_pts, b_pts]))
    A = Subset(space, np.arange(9))
    B = Subset(space, np.concatenate([[0], np.arange(9, 17)]))
    return space, A, B


def disk_rotation_image(n_fill) -> np.ndarray:
    """Quarter-turn of a disk net: ring j (4j points) shifts by j positions."""
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


def carpet_rotation_pieces(bundle, level):
    """Quarter-turn data for the symmetric carpet-with-disks scenario.

    Returns (base_image, component_permutation, filling_images): the base
    grid rotates (x, y) -> (g-1-y, x), holes permute accordingly, and each
    disk rotates ring by ring.
    """
    from sewkit.generators import _carpet_grid
    from sewkit.maps import PointMap

    g = 2 * 3**level + 1
    holes, ix, iy, lookup = _carpet_grid(level)
    hole_pos = {(lv, hx, hy): i for i, (lv, hx, hy, side) in enumerate(holes)}
    pi = np.array(
        [hole_pos[(lv, 3**lv - 1 - hy, hx)] for lv, hx, hy, side in holes],
        dtype=np.int64,
    )
    base_img = np.array(
        [lookup[g - 1 - iy[i], ix[i]] for i in range(bundle.base.n)], dtype=np.int64
    )
    base_map = PointMap(bundle.base, bundle.base, base_img)
    fills = tuple(
        PointMap(
            bundle.components[k].filling,
            bundle.components[int(pi[k])].filling,
            disk_rotation_image(bundle.components[k].filling.n),
        )
        for k in range(len(bundle.components))
    )
    return base_map, pi, fills
