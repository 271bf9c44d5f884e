"""Deterministic constructors for the spaces the toolkit is exercised on.

Circles and disks compute chord lengths from integer index offsets rather
than cartesian coordinates, so that congruent pairs get bitwise-equal
distances and index rotations of a ring are exact isometries.  The carpet
does the same on its integer half-step grid.  Coordinates are still
attached as payload for plotting and serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metric import FiniteMetricSpace, Subset


@dataclass(frozen=True, eq=False)
class GluingComponent:
    """One boundary component of a gluing scenario.

    ``psi`` aligns with ``boundary.indices``: base point ``boundary.indices[t]``
    is identified with filling point ``psi[t]``.  ``cycle`` optionally records
    the seam in cyclic order (base indices); generators that know it fill it in.
    """

    boundary: Subset
    filling: FiniteMetricSpace
    boundary_image: Subset
    psi: np.ndarray
    L: float
    cycle: np.ndarray | None = None

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.int64).copy()
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        if self.cycle is not None:
            cyc = np.asarray(self.cycle, dtype=np.int64).copy()
            cyc.setflags(write=False)
            object.__setattr__(self, "cycle", cyc)

    @property
    def size(self) -> int:
        return len(self.boundary)


@dataclass(frozen=True, eq=False)
class ScenarioBundle:
    """Base space plus boundary components with fillings and seam maps."""

    base: FiniteMetricSpace
    components: tuple[GluingComponent, ...]

    def validate(self, rel_tol: float = 1e-9) -> None:
        """Check the structural and bi-Lipschitz invariants, raising on failure."""
        for k, comp in enumerate(self.components):
            b = comp.boundary.indices
            im = comp.psi
            if comp.boundary.space is not self.base:
                raise ValueError(f"component {k}: boundary not a subset of the base")
            if b.size != im.size or b.size != len(comp.boundary_image):
                raise ValueError(f"component {k}: seam map is not aligned")
            if not np.array_equal(np.sort(im), comp.boundary_image.indices):
                raise ValueError(f"component {k}: psi is not a bijection onto the image")
            if comp.L < 1.0:
                raise ValueError(f"component {k}: bi-Lipschitz constant below 1")
            db = self.base.dist[np.ix_(b, b)]
            df = comp.filling.dist[np.ix_(im, im)]
            hi = db * comp.L * (1.0 + rel_tol)
            lo = db / comp.L * (1.0 - rel_tol)
            if np.any(df > hi) or np.any(df < lo):
                i, j = np.unravel_index(int(np.argmax(df - hi)), df.shape)
                raise ValueError(
                    f"component {k}: seam pair ({b[i]}, {b[j]}) violates the "
                    f"bi-Lipschitz bound L={comp.L}"
                )


def _chord(count: int, sep: int, radius: float) -> float:
    """Chord between ring positions sep apart on a circle of given radius."""
    k = sep % count
    k = min(k, count - k)
    return radius * (2.0 * math.sin(math.pi * k / count))


def circle_net(m: int) -> FiniteMetricSpace:
    """m equally spaced points on the unit circle with the chordal metric."""
    if m < 3:
        raise ValueError("circle_net needs at least 3 points")
    d = np.zeros((m, m))
    for sep in range(1, m):
        c = _chord(m, sep, 1.0)
        idx = np.arange(m - sep)
        d[idx, idx + sep] = c
        d[idx + sep, idx] = c
    ang = 2.0 * math.pi * np.arange(m) / m
    coords = np.column_stack([np.cos(ang), np.sin(ang)])
    return FiniteMetricSpace(d, coords=coords)


def _ring_counts(k: int, boundary_count: int | None) -> list[int]:
    if boundary_count is None:
        return [math.ceil(2.0 * math.pi * j) for j in range(1, k + 1)]
    return [-(-boundary_count * j // k) for j in range(1, k + 1)]


def disk_net(
    k: int, boundary_count: int | None = None, radius: float = 1.0
) -> tuple[FiniteMetricSpace, Subset]:
    """Polar grid on a closed disk: center plus k rings, outermost = boundary.

    Ring j sits at radius j/k (times ``radius``) and carries ceil(2*pi*j)
    points by default; ``boundary_count`` instead prescribes the outer ring
    count b and gives ring j ceil(b*j/k) points.  Distances are Euclidean
    chords computed from exact rational angle offsets.  Returns the space and
    the boundary subset.
    """
    if k < 1:
        raise ValueError("disk_net needs at least one ring")
    if boundary_count is not None and boundary_count < 3:
        raise ValueError("boundary ring needs at least 3 points")
    if not radius > 0:
        raise ValueError("radius must be positive")
    counts = _ring_counts(k, boundary_count)
    ring = [0]
    pos = [0]
    rad = [0.0]
    for j, c in enumerate(counts, start=1):
        ring.extend([j] * c)
        pos.extend(range(c))
        rad.extend([radius * j / k] * c)
    n = len(ring)
    d = np.zeros((n, n))
    cos_cache: dict[tuple[int, int], float] = {}
    for a in range(n):
        ja, ta, ra = ring[a], pos[a], rad[a]
        for b in range(a + 1, n):
            jb, tb, rb = ring[b], pos[b], rad[b]
            if ja == 0 or jb == 0:
                v = max(ra, rb)
            elif ja == jb:
                v = _chord(counts[ja - 1], ta - tb, ra)
            else:
                ca, cb = counts[ja - 1], counts[jb - 1]
                den = ca * cb
                num = (ta * cb - tb * ca) % den
                num = min(num, den - num)
                key = (num, den)
                cs = cos_cache.get(key)
                if cs is None:
                    cs = math.cos(2.0 * math.pi * num / den)
                    cos_cache[key] = cs
                v = math.sqrt(ra * ra + rb * rb - 2.0 * ra * rb * cs)
            d[a, b] = v
            d[b, a] = v
    coords = np.empty((n, 2))
    for i in range(n):
        if ring[i] == 0:
            coords[i] = 0.0
        else:
            th = 2.0 * math.pi * pos[i] / counts[ring[i] - 1]
            coords[i] = (rad[i] * math.cos(th), rad[i] * math.sin(th))
    space = FiniteMetricSpace(d, coords=coords)
    boundary = Subset(space, np.arange(n - counts[-1], n, dtype=np.int64))
    return space, boundary


def interval_net(m: int) -> FiniteMetricSpace:
    """m+1 equally spaced points on the unit interval."""
    if m < 2:
        raise ValueError("interval_net needs m >= 2")
    num = np.arange(m + 1, dtype=np.float64)
    d = np.abs(np.subtract.outer(num, num)) / m
    return FiniteMetricSpace(d, coords=(num / m)[:, None])


def snowflake(space: FiniteMetricSpace, alpha: float) -> FiniteMetricSpace:
    """Replace d by d**alpha, a metric for 0 < alpha <= 1; coords are dropped."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("snowflake exponent must lie in (0, 1]")
    return FiniteMetricSpace(np.power(space.dist, alpha), labels=space.labels)


# --- Sierpinski carpet on the half-step grid ---------------------------------
#
# Level-L carpet approximated on the grid of spacing 3**-L / 2, so each
# removed square keeps grid points on its boundary midway along every edge
# (the smallest hole boundary is an 8-point cycle).  All geometry below is
# done in integer half-step units; distances are scaled integers, exact under
# the dihedral symmetries of the grid.

MAX_CARPET_LEVEL = 5


def _carpet_holes(level: int) -> list[tuple[int, int, int, int]]:
    """Removed squares as (level, hx, hy, side): level-lv cell (hx, hy), whose
    corner sits at (hx*side, hy*side) in half-step units, side = 2*3**(level-lv)."""
    holes = []
    alive = [(0, 0)]
    for lv in range(1, level + 1):
        side = 2 * 3 ** (level - lv)
        nxt = []
        for cx, cy in alive:
            for dy in range(3):
                for dx in range(3):
                    child = (3 * cx + dx, 3 * cy + dy)
                    if dx == 1 and dy == 1:
                        holes.append((lv, child[0], child[1], side))
                    else:
                        nxt.append(child)
        alive = nxt
    holes.sort(key=lambda hsq: (hsq[0], hsq[2], hsq[1]))
    return holes


def _square_cycle(x0: int, y0: int, side: int) -> list[tuple[int, int]]:
    """Grid points on a square ring, counterclockwise from the (x0, y0) corner."""
    pts = []
    for s in range(side):
        pts.append((x0 + s, y0))
    for s in range(side):
        pts.append((x0 + side, y0 + s))
    for s in range(side):
        pts.append((x0 + side - s, y0 + side))
    for s in range(side):
        pts.append((x0, y0 + side - s))
    return pts


def _carpet_grid(level: int):
    """Retained half-step grid nodes: (holes, ix, iy, lookup)."""
    g = 2 * 3**level + 1
    holes = _carpet_holes(level)
    keep = np.ones((g, g), dtype=bool)
    for _, hx, hy, side in holes:
        x0 = hx * side
        y0 = hy * side
        keep[x0 + 1 : x0 + side, y0 + 1 : y0 + side] = False
    # row-major point order: y outer, x inner
    iy_all, ix_all = np.meshgrid(np.arange(g), np.arange(g), indexing="ij")
    flat_keep = keep[ix_all.ravel(), iy_all.ravel()]
    ix = ix_all.ravel()[flat_keep]
    iy = iy_all.ravel()[flat_keep]
    lookup = -np.ones((g, g), dtype=np.int64)
    lookup[ix, iy] = np.arange(ix.size)
    return holes, ix, iy, lookup


def _blocked_grid_dist(ix: np.ndarray, iy: np.ndarray, h: float) -> np.ndarray:
    n = ix.size
    d = np.empty((n, n))
    step = max(1, min(n, (1 << 24) // max(n, 1)))
    fx = ix.astype(np.float64)
    fy = iy.astype(np.float64)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        dx = fx[lo:hi, None] - fx[None, :]
        dy = fy[lo:hi, None] - fy[None, :]
        np.multiply(dx, dx, out=dx)
        np.multiply(dy, dy, out=dy)
        np.add(dx, dy, out=dx)
        np.sqrt(dx, out=dx)
        dx *= h
        d[lo:hi] = dx
    d.setflags(write=False)
    return d


def _carpet_space(level: int, ix: np.ndarray, iy: np.ndarray) -> FiniteMetricSpace:
    h = 3.0**-level / 2.0
    return FiniteMetricSpace(
        _blocked_grid_dist(ix, iy, h), coords=np.column_stack([ix, iy]) * h
    )


def carpet_net(level: int) -> tuple[FiniteMetricSpace, list[Subset]]:
    """Sierpinski carpet approximation with its peripheral boundary cycles.

    Returns the retained grid points (Euclidean metric) and one Subset per
    removed square, ordered by removal level then row-major position, with
    the outer unit-square boundary appended last.
    """
    if not 1 <= level <= MAX_CARPET_LEVEL:
        raise ValueError(f"carpet level must be between 1 and {MAX_CARPET_LEVEL}")
    holes, ix, iy, lookup = _carpet_grid(level)
    space = _carpet_space(level, ix, iy)
    peripherals = []
    for _, hx, hy, side in holes:
        cyc = _square_cycle(hx * side, hy * side, side)
        peripherals.append(Subset(space, [int(lookup[x, y]) for x, y in cyc]))
    g = 2 * 3**level + 1
    outer = _square_cycle(0, 0, g - 1)
    peripherals.append(Subset(space, [int(lookup[x, y]) for x, y in outer]))
    return space, peripherals


def carpet_with_disks(level: int) -> ScenarioBundle:
    """Carpet base with a polar-disk filling sewn onto every inner hole.

    Each hole cycle of b points is matched, in cyclic order starting at its
    lexicographically smallest corner, to the boundary ring of a disk with
    b/4 rings and b boundary points, scaled so circle circumference equals
    square perimeter (the two cycles are arclength-isometric).  The stored L
    is the exact max ratio between chordal distances on the circle and
    Euclidean distances on the square cycle.  The outer boundary is left
    unfilled.
    """
    if not 1 <= level <= MAX_CARPET_LEVEL:
        raise ValueError(f"carpet level must be between 1 and {MAX_CARPET_LEVEL}")
    holes, ix, iy, lookup = _carpet_grid(level)
    base = _carpet_space(level, ix, iy)
    h = 3.0**-level / 2.0
    comps = []
    for _, hx, hy, side in holes:
        cyc = np.array(
            [lookup[x, y] for x, y in _square_cycle(hx * side, hy * side, side)],
            dtype=np.int64,
        )
        b = cyc.size
        rho = (b * h) / (2.0 * math.pi)
        filling, boundary_image = disk_net(b // 4, boundary_count=b, radius=rho)
        offset = filling.n - b
        fill_of_base = {int(cyc[t]): offset + t for t in range(b)}
        boundary = Subset(base, cyc)
        psi = np.array([fill_of_base[int(i)] for i in boundary.indices], dtype=np.int64)
        db = base.dist[np.ix_(boundary.indices, boundary.indices)]
        df = filling.dist[np.ix_(psi, psi)]
        mask = ~np.eye(b, dtype=bool)
        ratio = df[mask] / db[mask]
        L = float(max(ratio.max(), 1.0 / ratio.min()))
        comps.append(GluingComponent(boundary, filling, boundary_image, psi, L, cyc))
    bundle = ScenarioBundle(base, tuple(comps))
    bundle.validate()
    return bundle
