"""Basepoint inversion of a finite metric space.

Removing a marked point w and dividing each distance by the product of the
endpoint distances to w gives a quasimetric whose chain metrization d-hat
is a genuine metric within an exact factor-4 band.  Cross-ratios of the
quasimetric coincide with those of the original metric, which pins the
quasi-Moebius distortion of the identity map to the linear envelope 16t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import minplus
from .metric import (
    REL_TOL,
    FiniteMetricSpace,
    QuasiMetricTable,
    Subset,
    chain_metrize,
    diam,
)

BAND_FACTOR = 4.0
IDENTITY_ENVELOPE_SLOPE = 16.0


@dataclass(frozen=True, eq=False)
class SphericalizedSpace:
    """Inverted space on the points other than the basepoint.

    ``kept[i]`` is the source index of point i of ``space``; ``delta`` is
    aligned with ``kept`` and holds the source distances to the basepoint.
    """

    space: FiniteMetricSpace
    basepoint: int
    delta: np.ndarray
    q_table: QuasiMetricTable
    source: FiniteMetricSpace
    kept: np.ndarray

    @property
    def n(self) -> int:
        return self.space.n

    def index_of(self, source_index: int) -> int:
        """Position of a source point in the inverted space."""
        i = int(np.searchsorted(self.kept, source_index))
        if i == len(self.kept) or self.kept[i] != source_index:
            raise KeyError(f"point {source_index} is not in the inverted space")
        return i

    def pull_subset(self, subset: Subset) -> Subset:
        """Re-home a subset of the source space, which must avoid the basepoint."""
        if int(self.basepoint) in subset.indices:
            raise ValueError("subset contains the basepoint")
        pos = np.searchsorted(self.kept, subset.indices)
        return Subset(self.space, pos.astype(np.int64))


def sphericalize(space: FiniteMetricSpace, w: int) -> SphericalizedSpace:
    """Invert ``space`` at basepoint ``w`` and certify the comparability band.

    The quasimetric is q(x,y) = d(x,y) / (d(x,w) d(y,w)) on the other
    points; the result's metric is its chain metrization and satisfies
    q/4 <= d-hat <= q pointwise.
    """
    w = int(w)
    if not 0 <= w < space.n:
        raise ValueError(f"basepoint {w} out of range for {space.n} points")
    if space.n < 3:
        raise ValueError("need at least two points besides the basepoint")
    kept = np.concatenate(
        [np.arange(w, dtype=np.int64), np.arange(w + 1, space.n, dtype=np.int64)]
    )
    delta = space.dist[kept, w].copy()
    q = space.dist[np.ix_(kept, kept)] / np.outer(delta, delta)
    np.fill_diagonal(q, 0.0)
    qt = QuasiMetricTable(q)
    sph = chain_metrize(qt)
    d = sph.dist
    if (d - qt.q).max() > 0:
        raise AssertionError("chain metrization exceeded the quasimetric")
    short = qt.q / BAND_FACTOR - d * (1.0 + REL_TOL)
    if short.max() > 0:
        i, j = np.unravel_index(int(short.argmax()), short.shape)
        raise AssertionError(
            f"lower comparability bound failed at pair ({i},{j}): "
            f"d={d[i, j]} q/4={qt.q[i, j] / BAND_FACTOR}"
        )
    delta.setflags(write=False)
    kept.setflags(write=False)
    return SphericalizedSpace(sph, w, delta, qt, space, kept)


def _pair_angle(dist, a_idx, b_idx, seam_idx):
    """Largest c with d(a,b) >= c * min over seam y of d(a,y) + d(y,b).

    Pairs sharing a point are skipped; no remaining pair gives 1 by
    convention.  The ratio never exceeds 1 up to roundoff.
    """
    relay = minplus(
        np.ascontiguousarray(dist[np.ix_(a_idx, seam_idx)]),
        np.ascontiguousarray(dist[np.ix_(seam_idx, b_idx)]),
    )
    direct = dist[np.ix_(a_idx, b_idx)]
    distinct = a_idx[:, None] != b_idx[None, :]
    if not distinct.any():
        return 1.0, None
    ratios = np.full(direct.shape, np.inf)
    np.divide(direct, relay, out=ratios, where=distinct)
    i, j = np.unravel_index(int(ratios.argmin()), ratios.shape)
    return min(1.0, float(ratios[i, j])), (int(a_idx[i]), int(b_idx[j]))


HYPOTHESIS_FAILED = "hypothesis-failed"
PASS = "pass"
CONCLUSION_FAILED = "conclusion-failed"


@dataclass(frozen=True, eq=False)
class DiamTransferReport:
    status: str
    hypothesis_failures: tuple[str, ...]
    diam_L_hat: float
    diam_K_hat: float
    bound: float
    slack: float

    @property
    def ok(self) -> bool:
        return self.status == PASS


def check_diam_transfer(
    sph: SphericalizedSpace, K: Subset, L: Subset, Delta: float, c: float
) -> DiamTransferReport:
    """Check diam(L, d-hat) <= (32 Delta / c^2) diam(K, d-hat).

    ``K`` and ``L`` are subsets of the source space with K inside L.  Both
    stated hypotheses (diameter comparability with Delta in the source
    metric, and the basepoint-flatness inequality with c) are verified
    exhaustively first; their failure is reported as a distinct status so
    it cannot be mistaken for a conclusion failure.
    """
    if not np.isin(K.indices, L.indices).all():
        raise ValueError("K must be a subset of L")
    if len(K) < 2:
        raise ValueError("K needs at least two points")
    if not Delta >= 1 or not 0 < c <= 1:
        raise ValueError("need Delta >= 1 and c in (0, 1]")
    failures = []
    w = sph.basepoint
    if w in L.indices:
        failures.append(f"basepoint {w} lies inside L")
    else:
        d = sph.source.dist
        dK = float(diam(K))
        dL = float(diam(L))
        if dL > Delta * dK * (1.0 + REL_TOL):
            failures.append(
                f"diam L = {dL} exceeds Delta * diam K = {Delta * dK}"
            )
        lhs = d[L.indices, w]
        relay = (d[np.ix_(L.indices, K.indices)] + d[K.indices, w]).min(axis=1)
        bad = np.flatnonzero(lhs * (1.0 + REL_TOL) < c * relay)
        if bad.size:
            x = int(L.indices[bad[0]])
            failures.append(
                f"flatness fails at point {x}: delta = {d[x, w]} "
                f"< c * relay = {c * relay[bad[0]]}"
            )
    if failures:
        return DiamTransferReport(
            HYPOTHESIS_FAILED, tuple(failures), np.nan, np.nan, np.nan, np.nan
        )
    k_hat = diam(sph.pull_subset(K))
    l_hat = diam(sph.pull_subset(L))
    bound = (32.0 * Delta / (c * c)) * k_hat
    ok = l_hat <= bound * (1.0 + REL_TOL)
    return DiamTransferReport(
        PASS if ok else CONCLUSION_FAILED,
        (),
        l_hat,
        k_hat,
        bound,
        bound / l_hat if l_hat > 0 else np.inf,
    )


@dataclass(frozen=True, eq=False)
class AngleTransferReport:
    status: str
    hypothesis_failures: tuple[str, ...]
    angle_before: float
    angle_after: float
    witness_before: tuple[int, int] | None
    witness_after: tuple[int, int] | None

    @property
    def ok(self) -> bool:
        return self.status == PASS


def check_angle_transfer(
    space: FiniteMetricSpace,
    A: Subset,
    B: Subset,
    w: int,
    c: float,
    Delta: float,
) -> AngleTransferReport:
    """Check that the angle between A and B stays positive after inversion.

    Verifies the angle hypothesis (angle in the source metric at least c)
    and the seam spread hypothesis (every seam point sees another seam
    point at least 1/(2 Delta) of its largest distance into A or B away)
    exhaustively, then inverts at w and reports the surviving angle.
    """
    if not 0 < c <= 1 or not Delta >= 1:
        raise ValueError("need c in (0, 1] and Delta >= 1")
    seam = np.intersect1d(A.indices, B.indices)
    if seam.size == 0:
        raise ValueError("A and B have empty intersection")
    d = space.dist
    failures = []
    before, wit_before = _pair_angle(d, A.indices, B.indices, seam)
    if before < c * (1.0 - REL_TOL):
        failures.append(f"angle {before} below the stated bound {c}")
    # The spread point is only needed for seam points much closer to the
    # basepoint than both ends of a pair; alpha is the proof's threshold.
    alpha = 1.0 / (4.0 * Delta + 2.0)
    delta_all = d[:, int(w)]
    ecc_seam = d[np.ix_(seam, seam)].max(axis=1)
    for i, x in enumerate(seam):
        thresh = delta_all[x] / alpha
        far_a = d[x, A.indices][delta_all[A.indices] >= thresh]
        far_b = d[x, B.indices][delta_all[B.indices] >= thresh]
        if far_a.size == 0 or far_b.size == 0:
            continue
        need = min(far_a.max(), far_b.max())
        if 2.0 * Delta * ecc_seam[i] * (1.0 + REL_TOL) < need:
            failures.append(
                f"seam spread fails at point {int(x)}: reach {ecc_seam[i]} "
                f"< {need} / (2 Delta)"
            )
            break
    if failures:
        return AngleTransferReport(
            HYPOTHESIS_FAILED, tuple(failures), before, np.nan, wit_before, None
        )
    sph = sphericalize(space, w)
    keep = lambda idx: idx[idx != int(w)]
    a2 = np.searchsorted(sph.kept, keep(A.indices))
    b2 = np.searchsorted(sph.kept, keep(B.indices))
    y2 = np.searchsorted(sph.kept, keep(seam))
    if y2.size == 0:
        raise ValueError("seam reduces to the basepoint alone")
    after, wit_after = _pair_angle(sph.space.dist, a2, b2, y2)
    if wit_after is not None:
        wit_after = (int(sph.kept[wit_after[0]]), int(sph.kept[wit_after[1]]))
    status = PASS if after > 0 else CONCLUSION_FAILED
    return AngleTransferReport(
        status, (), before, after, wit_before, wit_after
    )
