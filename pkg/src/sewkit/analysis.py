"""Discrete estimators for connectivity, size, and separation properties.

Every operation scans all centers (lowest indices first, hard cap) over
dyadic radii, so results are deterministic.  Path-based quantities use the
epsilon-graph surrogate: the minimal radius at which two points join the
same component stands in for the minimal diameter of a continuum through
them.  The surrogate upper-bounds the continuum quantity, which is why
bound assertions in certify_sewn carry an explicit slack factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .metric import (
    REL_TOL,
    FiniteMetricSpace,
    Subset,
    default_epsilon,
    diam,
    epsilon_graph,
    mesh,
    restrict,
)
from .sewing import SewnSpace
from .sphericalize import _pair_angle

CENTER_CAP = 4096
LLC_STEP = 0.25
LLC_MAX = 64.0
BOUND_SLACK = 2.0


class DisconnectedGraphError(ValueError):
    """The epsilon-graph is not connected at the requested scale."""


class InsufficientScaleError(ValueError):
    """Fewer dyadic scale levels available than the estimator needs."""


@dataclass(frozen=True, eq=False)
class PropertyReport:
    """Outcome of one property scan.

    ``witnesses`` holds the extremal configuration(s); re-evaluating them
    reproduces the reported constants.  ``passed`` is None when no
    threshold was supplied.
    """

    name: str
    constants: dict
    scale_range: tuple[float, float] | None
    witnesses: tuple
    passed: bool | None = None


def _dyadic_radii(hi: float, lo: float) -> list[float]:
    """Dyadic multiples of lo inside [lo, hi], largest first.

    Anchoring at the resolution floor keeps the top scale commensurate with
    the data instead of with diameter outliers; doubling by 2.0 is exact in
    floats, so the grid is reproducible."""
    out = []
    r = float(lo)
    while 0.0 < r <= hi:
        out.append(r)
        r *= 2.0
    out.reverse()
    return out


def _centers(n: int, cap: int = CENTER_CAP) -> range:
    return range(min(n, cap))


def connectivity_threshold(space: FiniteMetricSpace) -> float:
    """Smallest epsilon whose epsilon-graph is connected (largest MST edge)."""
    d = space.dist
    n = space.n
    if n == 1:
        return 0.0
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    mind = d[0].copy()
    worst = 0.0
    for _ in range(n - 1):
        j = int(np.where(in_tree, np.inf, mind).argmin())
        worst = max(worst, float(mind[j]))
        in_tree[j] = True
        np.minimum(mind, d[j], out=mind)
    return worst


def _require_connected(space, graph):
    visited = np.zeros(space.n, np.uint8)
    allowed = np.ones(space.n, np.uint8)
    count = _kernels.bfs_cover(graph.indptr, graph.adjacency, allowed, 0, visited)
    if count != space.n:
        raise DisconnectedGraphError(
            f"epsilon-graph at {graph.epsilon} has an unreached point "
            f"(covered {count} of {space.n}); try a larger epsilon"
        )


def bounded_turning_report(
    space: FiniteMetricSpace,
    epsilon: float | None = None,
    threshold: float | None = None,
    center_cap: int = CENTER_CAP,
) -> PropertyReport:
    """Largest over pairs of the minimal connection radius over the distance.

    For each source x, the minimal D with x and y in one component of the
    epsilon-graph restricted to the closed ball B(x, D) is computed for all
    y at once; pairs at distance <= epsilon are skipped.
    """
    eps = default_epsilon(space) if epsilon is None else float(epsilon)
    graph = epsilon_graph(space, eps)
    _require_connected(space, graph)
    d = space.dist
    lam = 1.0
    witness = ()
    for x in _centers(space.n, center_cap):
        order = np.argsort(d[x], kind="stable")
        T = _kernels.minimax_from_source(order, d[x], graph.indptr, graph.adjacency)
        far = d[x] > eps
        if not far.any():
            continue
        ratios = T[far] / d[x][far]
        j = int(ratios.argmax())
        if ratios[j] > lam:
            lam = float(ratios[j])
            witness = (x, int(np.flatnonzero(far)[j]))
    return PropertyReport(
        "bounded-turning",
        {"lambda": lam, "epsilon": eps},
        (eps, float(diam(space))),
        (witness,) if witness else (),
        None if threshold is None else lam <= threshold,
    )


def bounded_turning(space: FiniteMetricSpace, epsilon: float | None = None) -> float:
    return bounded_turning_report(space, epsilon).constants["lambda"]


def llc_check_report(
    space: FiniteMetricSpace,
    epsilon: float | None = None,
    threshold: float | None = None,
    center_cap: int = CENTER_CAP,
) -> PropertyReport:
    """Least grid constant passing both linear-connectivity tests everywhere.

    At each center x and dyadic radius r in [4 eps, diam]: ball points must
    join one component inside B(x, lambda r), and points outside B(x, r)
    must join one component avoiding B(x, r / lambda).  The grid is
    1, 1.25, 1.5, ...; both tests are monotone in lambda, so one global
    escalating value is exact.
    """
    eps = default_epsilon(space) if epsilon is None else float(epsilon)
    graph = epsilon_graph(space, eps)
    _require_connected(space, graph)
    d = space.dist
    radii = _dyadic_radii(diam(space), 4.0 * eps)
    lam = 1.0
    witness = ()
    visited = np.zeros(space.n, np.uint8)
    for x in _centers(space.n, center_cap):
        dx = d[x]
        for r in radii:
            inner = dx <= r
            outer = ~inner
            while lam <= LLC_MAX:
                ok = True
                if inner.sum() > 1:
                    allowed = (dx <= lam * r).astype(np.uint8)
                    start = int(np.flatnonzero(inner)[0])
                    _kernels.bfs_cover(
                        graph.indptr, graph.adjacency, allowed, start, visited
                    )
                    ok = bool(visited[inner].all())
                if ok and outer.sum() > 1:
                    allowed = (dx > r / lam).astype(np.uint8)
                    start = int(np.flatnonzero(outer)[0])
                    _kernels.bfs_cover(
                        graph.indptr, graph.adjacency, allowed, start, visited
                    )
                    ok = bool(visited[outer].all())
                if ok:
                    break
                lam += LLC_STEP
                witness = (x, r)
            if lam > LLC_MAX:
                return PropertyReport(
                    "llc",
                    {"lambda": np.inf, "epsilon": eps},
                    (4.0 * eps, radii[0]) if radii else None,
                    (witness,),
                    False,
                )
    return PropertyReport(
        "llc",
        {"lambda": lam, "epsilon": eps},
        (4.0 * eps, radii[0]) if radii else None,
        (witness,) if witness else (),
        None if threshold is None else lam <= threshold,
    )


def llc_check(space: FiniteMetricSpace, epsilon: float | None = None) -> float:
    return llc_check_report(space, epsilon).constants["lambda"]


def doubling_report(
    space: FiniteMetricSpace,
    threshold: float | None = None,
    center_cap: int = CENTER_CAP,
) -> PropertyReport:
    """Largest farthest-point (r/2)-net size over scanned balls."""
    d = space.dist
    m = mesh(space)
    radii = _dyadic_radii(diam(space), 4.0 * m)
    N = 1
    witness = ()
    for r in radii:
        for x in _centers(space.n, center_cap):
            members = np.flatnonzero(d[x] <= r)
            start = int(np.searchsorted(members, x))
            c = int(_kernels.farthest_net_size(d, members, start, r / 2.0))
            if c > N:
                N = c
                witness = (x, r)
    return PropertyReport(
        "doubling",
        {"N": N},
        (radii[-1], radii[0]) if radii else None,
        (witness,) if witness else (),
        None if threshold is None else N <= threshold,
    )


def doubling_constant(space: FiniteMetricSpace) -> int:
    return doubling_report(space).constants["N"]


def _subset_csr(subsets):
    if not subsets:
        raise ValueError("need at least one subset")
    off = np.zeros(len(subsets) + 1, np.int64)
    for i, s in enumerate(subsets):
        off[i + 1] = off[i] + len(s)
    idx = np.concatenate([s.indices for s in subsets])
    return off, idx


def relative_doubling_report(
    space: FiniteMetricSpace,
    subsets,
    eps_frac: float,
    threshold: float | None = None,
    center_cap: int = CENTER_CAP,
) -> PropertyReport:
    """Largest count of subsets meeting a ball with relative diameter >= eps_frac."""
    if not 0 < eps_frac < 1:
        raise ValueError("eps_frac must lie in (0, 1)")
    off, idx = _subset_csr(subsets)
    d = space.dist
    radii = _dyadic_radii(diam(space), 4.0 * mesh(space))
    N = 0
    witness = ()
    for r in radii:
        for x in _centers(space.n, center_cap):
            c = int(_kernels.rel_doubling_count(d, off, idx, x, r, eps_frac))
            if c > N:
                N = c
                witness = (x, r)
    return PropertyReport(
        "relative-doubling",
        {"N_eps": N, "eps_frac": eps_frac},
        (radii[-1], radii[0]) if radii else None,
        (witness,) if witness else (),
        None if threshold is None else N <= threshold,
    )


def relative_doubling(space, subsets, eps_frac: float) -> int:
    return relative_doubling_report(space, subsets, eps_frac).constants["N_eps"]


def porosity_report(
    space: FiniteMetricSpace,
    Y: Subset,
    threshold: float | None = None,
    center_cap: int = CENTER_CAP,
) -> PropertyReport:
    """Worst relative radius of a hole missing Y inside balls centered on Y.

    For each scanned ball B(y, r), the best hole radius is the largest over
    candidate centers z of min(d(z, Y), r - d(y, z)); p is the least ratio
    over the scan and lands in [0, 1/2].
    """
    if len(Y) == 0:
        raise ValueError("Y must be nonempty")
    d = space.dist
    dzY = d[:, Y.indices].min(axis=1)
    radii = np.array(_dyadic_radii(diam(space), 4.0 * mesh(space)))
    if radii.size == 0:
        raise InsufficientScaleError("no dyadic radius between 4*mesh and diam")
    p = np.inf
    witness = ()
    for yi in _centers(len(Y), center_cap):
        y = int(Y.indices[yi])
        best = np.minimum(dzY[None, :], radii[:, None] - d[y][None, :]).max(axis=1)
        ratios = best / radii
        j = int(ratios.argmin())
        if ratios[j] < p:
            p = float(ratios[j])
            witness = (y, float(radii[j]))
    p = max(p, 0.0)
    return PropertyReport(
        "porosity",
        {"p": p},
        (float(radii[-1]), float(radii[0])),
        (witness,) if witness else (),
        None if threshold is None else p >= threshold,
    )


def porosity(space: FiniteMetricSpace, Y: Subset) -> float:
    return porosity_report(space, Y).constants["p"]


def relative_porosity_report(
    space: FiniteMetricSpace,
    subsets,
    epsilon: float,
    threshold: float | None = None,
    center_cap: int = CENTER_CAP,
) -> PropertyReport:
    """Worst relative diameter of near-center subset pieces, and the top scale.

    A piece is an epsilon-linked component of one subset's intersection
    with B(x, r) that meets B(x, r/2); scales with no piece anywhere are
    vacuous, and r_0 is the largest non-vacuous dyadic radius.
    """
    off, idx = _subset_csr(subsets)
    d = space.dist
    radii = _dyadic_radii(diam(space), 4.0 * epsilon)
    if not radii:
        raise InsufficientScaleError("no dyadic radius between 4*epsilon and diam")
    r0 = np.nan
    p = np.inf
    witness = ()
    for r in radii:
        seen = False
        for x in _centers(space.n, center_cap):
            best = float(_kernels.rel_porosity_best(d, off, idx, x, r, epsilon))
            if best < 0:
                continue
            seen = True
            if best < p:
                p = best
                witness = (x, r)
        if seen and np.isnan(r0):
            r0 = r
    if np.isnan(r0):
        raise InsufficientScaleError("every scanned scale was vacuous")
    return PropertyReport(
        "relative-porosity",
        {"p_X": p, "r_0": r0, "epsilon": epsilon},
        (radii[-1], radii[0]),
        (witness,),
        None if threshold is None else p >= threshold,
    )


def relative_porosity(space, subsets, epsilon: float) -> tuple[float, float]:
    rep = relative_porosity_report(space, subsets, epsilon)
    return rep.constants["p_X"], rep.constants["r_0"]


def ahlfors_report(space: FiniteMetricSpace) -> PropertyReport:
    """Regularity exponent from the log-log fit of median ball counts.

    Counting measure: N(x, r) is the number of points in B(x, r), recorded
    at every center.  The witnesses tuple holds the (r, median N) table
    behind the fit.
    """
    if space.n < 32:
        raise ValueError("need at least 32 points for a regularity fit")
    d = space.dist
    radii = _dyadic_radii(diam(space) / 4.0, 4.0 * mesh(space))
    if len(radii) < 3:
        raise InsufficientScaleError(
            f"only {len(radii)} dyadic levels in [4*mesh, diam/4]; need 3"
        )
    step = max(1, (1 << 23) // space.n)
    meds = []
    all_counts = []
    for r in radii:
        counts = np.empty(space.n, np.int64)
        for i0 in range(0, space.n, step):
            counts[i0:i0 + step] = (d[i0:i0 + step] <= r).sum(axis=1)
        meds.append(float(np.median(counts)))
        all_counts.append(counts)
    logs_r = np.log(radii)
    logs_n = np.log(meds)
    Q, intercept = np.polyfit(logs_r, logs_n, 1)
    A = float(np.exp(intercept))
    c_low = np.inf
    c_high = 0.0
    for r, counts in zip(radii, all_counts):
        ratio = counts / (A * r**Q)
        c_low = min(c_low, float(ratio.min()))
        c_high = max(c_high, float(ratio.max()))
    return PropertyReport(
        "ahlfors-regularity",
        {"Q": float(Q), "C_low": c_low, "C_high": c_high},
        (radii[-1], radii[0]),
        tuple(zip(radii, meds)),
        None,
    )


def ahlfors_dimension(space: FiniteMetricSpace) -> tuple[float, float, float]:
    c = ahlfors_report(space).constants
    return c["Q"], c["C_low"], c["C_high"]


def angle_report(
    space: FiniteMetricSpace, A: Subset, B: Subset, threshold: float | None = None
) -> PropertyReport:
    """Agard-Gehring angle: worst direct-over-relayed distance ratio."""
    seam = np.intersect1d(A.indices, B.indices)
    if seam.size == 0:
        raise ValueError("A and B have empty intersection")
    c, witness = _pair_angle(space.dist, A.indices, B.indices, seam)
    return PropertyReport(
        "angle",
        {"c": c},
        None,
        (witness,) if witness else (),
        None if threshold is None else c >= threshold,
    )


def angle(space: FiniteMetricSpace, A: Subset, B: Subset) -> float:
    return angle_report(space, A, B).constants["c"]


def uniform_perfectness_report(
    space: FiniteMetricSpace, subset: Subset, threshold: float | None = None
) -> PropertyReport:
    """Least annulus ratio keeping every scanned annulus inhabited.

    The valid constants form an open ray (the annulus excludes its inner
    sphere), so the reported value is the infimum.  A scale where a point
    sees no other subset point within r while the subset extends past r is
    a failure and reports an infinite constant.
    """
    if len(subset) < 2:
        raise ValueError("subset needs at least 2 points")
    d = space.dist
    radii = _dyadic_radii(diam(space), 2.0 * mesh(space))
    lam = 1.0
    witness = ()
    failed = False
    for xi in range(len(subset)):
        x = int(subset.indices[xi])
        ds = d[x, subset.indices]
        for r in radii:
            inball = ds <= r
            if inball.all():
                continue
            g = float(ds[inball].max())
            if g == 0.0:
                return PropertyReport(
                    "uniform-perfectness",
                    {"lambda": np.inf},
                    (radii[-1], radii[0]),
                    ((x, r),),
                    False,
                )
            if r / g > lam:
                lam = r / g
                witness = (x, r)
    return PropertyReport(
        "uniform-perfectness",
        {"lambda": lam},
        (radii[-1], radii[0]) if radii else None,
        (witness,) if witness else (),
        None if threshold is None else lam <= threshold,
    )


def uniform_perfectness(space: FiniteMetricSpace, subset: Subset) -> float:
    return uniform_perfectness_report(space, subset).constants["lambda"]


@dataclass(frozen=True, eq=False)
class SewnCertificate:
    """Composite report for a sewn space against the implied piecewise bounds."""

    reports: tuple[PropertyReport, ...]
    constants: dict
    passed: bool

    def report(self, name: str) -> PropertyReport:
        for r in self.reports:
            if r.name == name:
                return r
        raise KeyError(name)


def _scan_epsilon(space: FiniteMetricSpace) -> float:
    return max(default_epsilon(space), connectivity_threshold(space))


def certify_sewn(sewn: SewnSpace, thresholds: dict | None = None) -> SewnCertificate:
    """Measure the sewn space and compare against the piecewise-implied bounds.

    Runs the property scans on the sewn space, the porosity of the base
    inside it, the relative checks of the base against its boundary
    components, and the regularity fit; measures each piece's turning and
    connectivity constants separately, then checks the sewn constants
    against lambda_pieces / c_flat (turning) and
    max{2(1 + 2 Delta lambda) / c, 4 lambda Delta} (connectivity), each
    with a 2x surrogate slack unless overridden via ``thresholds``.
    """
    thresholds = thresholds or {}
    space = sewn.space
    eps = _scan_epsilon(space)
    bt = bounded_turning_report(space, eps)
    llc = llc_check_report(space, eps)
    dbl = doubling_report(space)
    try:
        por = porosity_report(space, sewn.base_subset())
    except InsufficientScaleError as e:
        # spaces a few mesh widths wide have no dyadic scan grid at all;
        # recorded, not a failure
        por = PropertyReport("porosity", {}, None, (str(e),), None)
    try:
        ahl = ahlfors_report(space)
    except (InsufficientScaleError, ValueError) as e:
        # too few points or scales for a fit: recorded, not a failure
        ahl = PropertyReport("ahlfors-regularity", {}, None, (str(e),), None)

    base = sewn.bundle.base
    boundaries = [c.boundary for c in sewn.bundle.components]
    rel_reports = []
    if boundaries:
        rel_dbl = relative_doubling_report(base, boundaries, 0.5)
        try:
            rel_por = relative_porosity_report(base, boundaries, _scan_epsilon(base))
        except InsufficientScaleError as e:
            rel_por = PropertyReport("relative-porosity", {}, None, (str(e),), None)
        rel_reports = [rel_dbl, rel_por]

    pieces = [restrict(space, sewn.base_subset())] + [
        restrict(space, sewn.piece_subset(k))
        for k in range(len(sewn.bundle.components))
    ]
    lam_bt = 1.0
    lam_llc = 1.0
    for piece in pieces:
        pe = _scan_epsilon(piece)
        lam_bt = max(lam_bt, bounded_turning(piece, pe))
        lam_llc = max(lam_llc, llc_check(piece, pe))

    c_flat = sewn.certificates.c_flat
    Delta = sewn.certificates.Delta
    bt_bound = lam_bt / c_flat
    llc_bound = max(2.0 * (1.0 + 2.0 * Delta * lam_llc) / c_flat,
                    4.0 * lam_llc * Delta)
    bt_cap = thresholds.get("bt", BOUND_SLACK * bt_bound)
    llc_cap = thresholds.get("llc", BOUND_SLACK * llc_bound)
    bt_vs = PropertyReport(
        "bt-vs-pieces",
        {"measured": bt.constants["lambda"], "implied": bt_bound, "cap": bt_cap},
        None,
        (),
        bt.constants["lambda"] <= bt_cap,
    )
    llc_vs = PropertyReport(
        "llc-vs-pieces",
        {"measured": llc.constants["lambda"], "implied": llc_bound, "cap": llc_cap},
        None,
        (),
        llc.constants["lambda"] <= llc_cap,
    )
    reports = (bt, llc, dbl, por, ahl, *rel_reports, bt_vs, llc_vs)
    constants = {
        "lambda_bt": bt.constants["lambda"],
        "lambda_llc": llc.constants["lambda"],
        "lambda_bt_pieces": lam_bt,
        "lambda_llc_pieces": lam_llc,
        "N": dbl.constants["N"],
        "p_base": por.constants.get("p"),
        "Q": ahl.constants.get("Q"),
        "c_flat": c_flat,
        "Delta": Delta,
        "bt_bound": bt_bound,
        "llc_bound": llc_bound,
    }
    passed = bool(bt_vs.passed and llc_vs.passed
                  and all(r.passed is not False for r in reports))
    return SewnCertificate(reports, constants, passed)
