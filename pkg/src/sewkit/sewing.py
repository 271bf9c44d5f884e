"""Assembly of a sewn space from a gluing bundle.

The pipeline is: normalize filling scales, build the four-case quasimetric
on base points plus filling interiors, chain-metrize it, then certify the
comparability band q >= d >= q/L, the diameter-transfer constant, and the
flatness constant.  Seam points are represented once, by their base index;
fillings contribute only their non-seam points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .metric import (
    REL_TOL,
    FiniteMetricSpace,
    QuasiMetricTable,
    Subset,
    chain_metrize,
    components as graph_components,
    diam,
    epsilon_graph,
    restrict,
)
from .generators import GluingComponent, ScenarioBundle
from .maps import DistortionProfile, PointMap, qs_distortion


class ComparabilityError(ValueError):
    """The sewn metric left the certified band around the quasimetric."""


def _seam_bilipschitz(base, boundary_idx, filling, psi) -> float:
    db = base.dist[np.ix_(boundary_idx, boundary_idx)]
    df = filling.dist[np.ix_(psi, psi)]
    mask = ~np.eye(boundary_idx.size, dtype=bool)
    ratio = df[mask] / db[mask]
    return float(max(ratio.max(), 1.0 / ratio.min()))


def normalize_gluing(bundle: ScenarioBundle) -> ScenarioBundle:
    """Rescale each filling so seam diameters agree with the base, re-certifying L.

    The scale factor is diam(K, base) / diam(psi(K), filling); a factor of 1
    leaves the filling bitwise unchanged.
    """
    comps = []
    for k, comp in enumerate(bundle.components):
        if len(comp.boundary) < 2:
            raise ValueError(f"component {k}: boundary needs at least 2 points")
        db = diam(comp.boundary)
        df = diam(comp.boundary_image)
        if db == 0 or df == 0:
            raise ValueError(f"component {k}: degenerate boundary diameter")
        scale = db / df
        filling = comp.filling if scale == 1.0 else comp.filling.scaled(scale)
        L = _seam_bilipschitz(bundle.base, comp.boundary.indices, filling, comp.psi)
        comps.append(
            GluingComponent(
                comp.boundary,
                filling,
                Subset(filling, comp.boundary_image.indices),
                comp.psi,
                L,
                comp.cycle,
            )
        )
    out = ScenarioBundle(bundle.base, tuple(comps))
    out.validate()
    return out


@dataclass(frozen=True, eq=False)
class SewnLayout:
    """Index bookkeeping for a sewn point set.

    Sewn order is all base points first, then each component's interior
    filling points in ascending filling index.  ``origin_component`` is -1
    on base points; ``fill_to_sewn[k]`` maps every filling index of
    component k (seam and interior alike) to its sewn index.
    """

    base_size: int
    origin_component: np.ndarray
    origin_index: np.ndarray
    offsets: tuple[int, ...]
    interiors: tuple[np.ndarray, ...]
    fill_to_sewn: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return int(self.origin_component.size)

    def block(self, k: int) -> slice:
        off = self.offsets[k]
        return slice(off, off + self.interiors[k].size)

    def provenance(self, i: int) -> tuple[int, int]:
        """(-1, base index) for base points, else (component, filling index)."""
        return int(self.origin_component[i]), int(self.origin_index[i])


def _build_layout(bundle: ScenarioBundle) -> SewnLayout:
    nb = bundle.base.n
    origin_c = [np.full(nb, -1, dtype=np.int64)]
    origin_i = [np.arange(nb, dtype=np.int64)]
    offsets = []
    interiors = []
    fill_maps = []
    off = nb
    for k, comp in enumerate(bundle.components):
        seam = np.zeros(comp.filling.n, dtype=bool)
        seam[comp.psi] = True
        interior = np.flatnonzero(~seam).astype(np.int64)
        f2s = np.empty(comp.filling.n, dtype=np.int64)
        f2s[comp.psi] = comp.boundary.indices
        f2s[interior] = off + np.arange(interior.size)
        origin_c.append(np.full(interior.size, k, dtype=np.int64))
        origin_i.append(interior)
        offsets.append(off)
        interiors.append(interior)
        f2s.setflags(write=False)
        interior.setflags(write=False)
        fill_maps.append(f2s)
        off += interior.size
    return SewnLayout(
        nb,
        np.concatenate(origin_c),
        np.concatenate(origin_i),
        tuple(offsets),
        tuple(interiors),
        tuple(fill_maps),
    )


def build_quasimetric(bundle: ScenarioBundle) -> tuple[SewnLayout, QuasiMetricTable]:
    """Quasimetric on base points plus filling interiors, by the four cases:
    base pairs keep the base metric, same-filling pairs keep the filling
    metric, and mixed pairs relay through the cheapest seam point(s)."""
    layout = _build_layout(bundle)
    nb = layout.base_size
    n = layout.n
    dx = bundle.base.dist
    q = np.zeros((n, n))
    q[:nb, :nb] = dx
    reach = []  # per component: interior -> every base point via its own seam
    for k, comp in enumerate(bundle.components):
        interior = layout.interiors[k]
        blk = layout.block(k)
        df = comp.filling.dist
        m = _kernels.minplus(
            np.ascontiguousarray(df[np.ix_(interior, comp.psi)]),
            np.ascontiguousarray(dx[comp.boundary.indices, :]),
        )
        reach.append(m)
        q[blk, :nb] = m
        q[:nb, blk] = m.T
        q[blk, blk] = df[np.ix_(interior, interior)]
    for k1 in range(len(bundle.components)):
        comp1 = bundle.components[k1]
        for k2 in range(k1 + 1, len(bundle.components)):
            comp2 = bundle.components[k2]
            # both fold orientations of filling -> base -> filling; float
            # addition commutes, so their entrywise minimum makes the entry
            # independent of which side anchors the sum
            one = _kernels.minplus(
                np.ascontiguousarray(reach[k1][:, comp2.boundary.indices]),
                np.ascontiguousarray(
                    comp2.filling.dist[np.ix_(comp2.psi, layout.interiors[k2])]
                ),
            )
            other = _kernels.minplus(
                np.ascontiguousarray(
                    comp1.filling.dist[np.ix_(layout.interiors[k1], comp1.psi)]
                ),
                np.ascontiguousarray(reach[k2][:, comp1.boundary.indices].T),
            )
            cross = np.minimum(one, other)
            q[layout.block(k1), layout.block(k2)] = cross
            q[layout.block(k2), layout.block(k1)] = cross.T
    return layout, QuasiMetricTable(q)


@dataclass(frozen=True)
class Certificates:
    L: float
    c_flat: float
    Delta: float


@dataclass(frozen=True, eq=False)
class SewnSpace:
    """Sewn point set with its metric, provenance, and certificates."""

    space: FiniteMetricSpace
    layout: SewnLayout
    bundle: ScenarioBundle
    q: QuasiMetricTable
    certificates: Certificates

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def base_size(self) -> int:
        return self.layout.base_size

    def base_subset(self) -> Subset:
        return Subset(self.space, np.arange(self.base_size, dtype=np.int64))

    def seam_subset(self, k: int) -> Subset:
        return Subset(self.space, self.bundle.components[k].boundary.indices)

    def interior_subset(self, k: int) -> Subset:
        blk = self.layout.block(k)
        return Subset(self.space, np.arange(blk.start, blk.stop, dtype=np.int64))

    def piece_subset(self, k: int) -> Subset:
        """Seam plus interior: the whole filling, in sewn indices."""
        return Subset(self.space, self.layout.fill_to_sewn[k])

    def boundary_subsets(self) -> list[Subset]:
        return [self.seam_subset(k) for k in range(len(self.bundle.components))]


def _check_band(d, q, L, what):
    tol = 1.0 + REL_TOL
    over = d - q * tol
    if over.max() > 0:
        i, j = np.unravel_index(int(over.argmax()), d.shape)
        raise ComparabilityError(
            f"{what}: d({i},{j}) = {d[i, j]} exceeds q = {q[i, j]}"
        )
    under = q / L - d * tol
    if under.max() > 0:
        i, j = np.unravel_index(int(under.argmax()), d.shape)
        raise ComparabilityError(
            f"{what}: d({i},{j}) = {d[i, j]} below q/L = {q[i, j] / L}"
        )


def _flatness(space, layout, bundle):
    """Largest c with d(z,y) >= c * relay-through-own-seam and
    d(z,z') >= c * relay-through-base, plus the witnessing pairs."""
    d = space.dist
    nb = layout.base_size
    c_base = None
    c_cross = None
    wit_base = None
    wit_cross = None
    with_interior = [
        k for k in range(len(bundle.components)) if layout.interiors[k].size
    ]
    for k in with_interior:
        blk = layout.block(k)
        seam = bundle.components[k].boundary.indices
        relay = _kernels.minplus(
            np.ascontiguousarray(d[blk, :][:, seam]),
            np.ascontiguousarray(d[seam, :][:, :nb]),
        )
        ratios = d[blk, :nb] / relay
        v = float(ratios.min())
        if c_base is None or v < c_base:
            c_base = v
            zi, yi = np.unravel_index(int(ratios.argmin()), ratios.shape)
            wit_base = (blk.start + int(zi), int(yi))
    for a in range(len(with_interior)):
        for b in range(a + 1, len(with_interior)):
            k1, k2 = with_interior[a], with_interior[b]
            b1, b2 = layout.block(k1), layout.block(k2)
            relay = _kernels.minplus(
                np.ascontiguousarray(d[b1, :][:, :nb]),
                np.ascontiguousarray(d[:nb, :][:, b2]),
            )
            ratios = d[b1, b2] / relay
            v = float(ratios.min())
            if c_cross is None or v < c_cross:
                c_cross = v
                zi, zj = np.unravel_index(int(ratios.argmin()), ratios.shape)
                wit_cross = (b1.start + int(zi), b2.start + int(zj))
    candidates = [v for v in (c_base, c_cross) if v is not None]
    c_flat = min(1.0, *candidates) if candidates else 1.0
    return c_flat, c_base, c_cross, wit_base, wit_cross


def sew(bundle: ScenarioBundle) -> SewnSpace:
    """Sew a bundle: normalize, build the quasimetric, chain-metrize, certify.

    Certifies q >= d >= q/L within 1e-9 relative (L = the largest component
    constant), the base restriction staying L-bi-Lipschitz to the base
    metric, and records Delta = max diam ratio of filling over seam and the
    measured flatness constant.
    """
    bundle.validate()
    bundle = normalize_gluing(bundle)
    layout, qt = build_quasimetric(bundle)
    space = chain_metrize(qt)
    L = max((c.L for c in bundle.components), default=1.0)
    d = space.dist
    _check_band(d, qt.q, L, "comparability")
    nb = layout.base_size
    _check_band(d[:nb, :nb], bundle.base.dist, L, "base restriction")
    Delta = 1.0
    for k in range(len(bundle.components)):
        piece = layout.fill_to_sewn[k]
        seam = bundle.components[k].boundary.indices
        dp = float(d[np.ix_(piece, piece)].max())
        dk = float(d[np.ix_(seam, seam)].max())
        if dk > 0:
            Delta = max(Delta, dp / dk)
    c_flat, *_ = _flatness(space, layout, bundle)
    if not c_flat > 0:
        raise AssertionError("flatness constant collapsed to zero on valid input")
    return SewnSpace(space, layout, bundle, qt, Certificates(L, c_flat, Delta))


def verify_flatness(sewn: SewnSpace) -> float:
    """Largest c satisfying both flatness inequalities; in (0, 1]."""
    c_flat, *_ = _flatness(sewn.space, sewn.layout, sewn.bundle)
    return c_flat


def flatness_report(sewn: SewnSpace):
    """(c_flat, c_base, c_cross, witness_base, witness_cross) detail tuple."""
    return _flatness(sewn.space, sewn.layout, sewn.bundle)


@dataclass(frozen=True, eq=False)
class CensusEntry:
    members: Subset
    origins: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class CensusReport:
    entries: tuple[CensusEntry, ...]
    expected: tuple[int, ...]
    ok: bool


def component_census(sewn: SewnSpace, epsilon: float) -> CensusReport:
    """Components of the epsilon-graph on non-base points, tagged by origin.

    The census passes when these are in bijection with the gluing components
    that have interior points: one graph component per filling, each pure.
    """
    nonbase = Subset(
        sewn.space, np.arange(sewn.base_size, sewn.n, dtype=np.int64)
    )
    expected = tuple(
        k for k in range(len(sewn.bundle.components))
        if sewn.layout.interiors[k].size
    )
    if len(nonbase) == 0:
        return CensusReport((), expected, ok=not expected)
    graph = epsilon_graph(sewn.space, epsilon)
    comps = graph_components(graph, nonbase)
    entries = []
    seen: list[int] = []
    pure = True
    for c in comps:
        origins = tuple(sorted(set(sewn.layout.origin_component[c.indices].tolist())))
        entries.append(CensusEntry(c, origins))
        if len(origins) != 1:
            pure = False
        else:
            seen.append(origins[0])
    ok = pure and sorted(seen) == list(expected) and len(seen) == len(set(seen))
    return CensusReport(tuple(entries), expected, ok)


@dataclass(frozen=True)
class SeamViolation:
    point: int
    component: int
    nearest_base: int
    nearest_dist: float
    seam_dist: float


@dataclass(frozen=True, eq=False)
class NearestSeamReport:
    violations: tuple[SeamViolation, ...]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations


def nearest_seam_check(sewn: SewnSpace, rel_tol: float = REL_TOL) -> NearestSeamReport:
    """Check that each interior point's nearest base point lies on its own seam.

    Ties count as attained; violations are reported with both distances.
    """
    d = sewn.space.dist
    nb = sewn.base_size
    violations = []
    checked = 0
    for k, comp in enumerate(sewn.bundle.components):
        blk = sewn.layout.block(k)
        if blk.start == blk.stop:
            continue
        rows = d[blk, :nb]
        min_all = rows.min(axis=1)
        min_seam = rows[:, comp.boundary.indices].min(axis=1)
        checked += rows.shape[0]
        bad = np.flatnonzero(min_seam > min_all * (1.0 + rel_tol))
        for z in bad:
            violations.append(
                SeamViolation(
                    blk.start + int(z),
                    k,
                    int(rows[z].argmin()),
                    float(min_all[z]),
                    float(min_seam[z]),
                )
            )
    return NearestSeamReport(tuple(violations), checked)


@dataclass(frozen=True, eq=False)
class BAContractReport:
    """Measured conclusions for a candidate replacement metric on a filling."""

    identity_profile: DistortionProfile
    local_similarity: float
    seam_bilipschitz: float
    diam_ratio: float
    hypothesis_ok: bool | None

    @property
    def finite(self) -> bool:
        return bool(
            np.isfinite(self.local_similarity)
            and np.isfinite(self.seam_bilipschitz)
            and np.isfinite(self.diam_ratio)
            and np.all(np.isfinite(self.identity_profile.s))
        )


def verify_ba_contract(
    filling: FiniteMetricSpace,
    seam: Subset,
    psi: np.ndarray,
    d_hat: FiniteMetricSpace,
    eta=None,
) -> BAContractReport:
    """Measure how a candidate metric d_hat on a filling behaves.

    Reports the distortion profile of the identity (filling, d) -> (filling,
    d_hat), the local quasisimilarity constant over balls B(x, d(x, seam)/2)
    away from the seam, the bi-Lipschitz constant of the seam map into
    d_hat, and the diameter ratio.  When ``eta`` is given, the seam map's
    own quasisymmetry profile is checked against it first, so hypothesis
    failures are distinguishable from conclusion failures.
    """
    psi = np.asarray(psi, dtype=np.int64)
    if d_hat.n != filling.n:
        raise ValueError("candidate metric must live on the filling's point set")
    identity_profile = qs_distortion(PointMap(filling, d_hat, np.arange(filling.n)))

    seam_pts = psi
    interior = np.setdiff1d(np.arange(filling.n), seam_pts)
    d = filling.dist
    dh = d_hat.dist
    C = 1.0
    for x in interior:
        r = d[x, seam_pts].min() / 2.0
        members = np.flatnonzero(d[x] <= r)
        if members.size < 2:
            continue
        sub_d = d[np.ix_(members, members)]
        sub_h = dh[np.ix_(members, members)]
        mask = ~np.eye(members.size, dtype=bool)
        ratios = sub_h[mask] / sub_d[mask]
        C = max(C, float(ratios.max() / ratios.min()))

    base_d = seam.space.dist[np.ix_(seam.indices, seam.indices)]
    hat_d = dh[np.ix_(psi, psi)]
    mask = ~np.eye(len(seam), dtype=bool)
    ratios = hat_d[mask] / base_d[mask]
    seam_L = float(max(ratios.max(), 1.0 / ratios.min()))

    r = diam(filling) / diam(d_hat)
    diam_ratio = max(r, 1.0 / r)

    hypothesis_ok = None
    if eta is not None:
        seam_space = restrict(seam.space, seam)
        prof = qs_distortion(PointMap(seam_space, filling, psi))
        hypothesis_ok = bool(prof.max_slack(eta) <= 1.0 + REL_TOL)
    return BAContractReport(identity_profile, C, seam_L, diam_ratio, hypothesis_ok)
