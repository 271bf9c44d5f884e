"""Empirical distortion machinery for maps between finite metric spaces.

Quasisymmetry compares distance ratios at a common basepoint; quasi-Mobius
compares cross-ratios of quadruples.  Both are measured here as sample
clouds (t, s) with a monotone upper envelope standing in for the distortion
function.  Enumeration is exhaustive up to a cap and falls back to a
deterministic stride over the lexicographic tuple order, so every run of
the same input yields the same profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .metric import FiniteMetricSpace, Subset, diam

TRIPLE_CAP = 2_000_000
QUADRUPLE_CAP = 5_000_000


@dataclass(frozen=True, eq=False)
class PointMap:
    """Map between finite spaces given by a per-point image index; injective."""

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    image: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.image, dtype=np.int64).copy()
        if img.size != self.source.n:
            raise ValueError("image length does not match source size")
        if img.size and (img.min() < 0 or img.max() >= self.target.n):
            raise ValueError("image index out of target range")
        if np.unique(img).size != img.size:
            raise ValueError("map is not injective")
        img.setflags(write=False)
        object.__setattr__(self, "image", img)

    def __call__(self, i: int) -> int:
        return int(self.image[i])

    @property
    def bijective(self) -> bool:
        return self.source.n == self.target.n

    @staticmethod
    def identity(space: FiniteMetricSpace) -> "PointMap":
        return PointMap(space, space, np.arange(space.n))

    def then(self, other: "PointMap") -> "PointMap":
        """Composition: first self, then other."""
        if other.source is not self.target and other.source.n != self.target.n:
            raise ValueError("composition domain mismatch")
        return PointMap(self.source, other.target, other.image[self.image])

    def inverse(self) -> "PointMap":
        if not self.bijective:
            raise ValueError("only bijective maps invert")
        inv = np.empty(self.source.n, dtype=np.int64)
        inv[self.image] = np.arange(self.source.n)
        return PointMap(self.target, self.source, inv)


@dataclass(frozen=True, eq=False)
class DistortionProfile:
    """Sample cloud (t, s) with its monotone upper envelope s*(t).

    ``t`` is sorted ascending; the envelope knots carry, at each distinct t,
    the largest s seen at any t' <= t.
    """

    t: np.ndarray
    s: np.ndarray
    knot_t: np.ndarray
    knot_s: np.ndarray

    @staticmethod
    def from_samples(t: np.ndarray, s: np.ndarray) -> "DistortionProfile":
        order = np.argsort(t, kind="stable")
        ts = np.ascontiguousarray(t[order])
        ss = np.ascontiguousarray(s[order])
        running = np.maximum.accumulate(ss)
        # last position of each distinct t holds the full prefix max
        last = np.flatnonzero(np.r_[ts[1:] != ts[:-1], True])
        kt = ts[last].copy()
        ks = running[last].copy()
        for a in (ts, ss, kt, ks):
            a.setflags(write=False)
        return DistortionProfile(ts, ss, kt, ks)

    def envelope(self, t) -> np.ndarray:
        """Largest sample s at ratio <= t; 0 below the sampled range."""
        idx = np.searchsorted(self.knot_t, t, side="right") - 1
        out = np.where(idx >= 0, self.knot_s[np.maximum(idx, 0)], 0.0)
        return out if np.ndim(t) else float(out)

    def max_slack(self, eta: Callable[[np.ndarray], np.ndarray]) -> float:
        """max s / eta(t) over samples; <= 1 means eta dominates the cloud."""
        return float(np.max(self.s / np.asarray(eta(self.t))))

    def __len__(self) -> int:
        return int(self.t.size)


@dataclass(frozen=True)
class PowerLawEta:
    """Distortion family eta(t) = C * max(t**alpha, t**(1/alpha))."""

    C: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0) or self.C <= 0.0:
            raise ValueError("need 0 < alpha <= 1 and C > 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.C * np.maximum(t**self.alpha, t ** (1.0 / self.alpha))


def _stride_indices(total: int, cap: int, seed: int) -> np.ndarray:
    if total <= cap:
        return np.arange(total, dtype=np.int64)
    stride = -(-total // cap)
    offset = seed % stride
    return np.arange(offset, total, stride, dtype=np.int64)


def qs_distortion(
    f: PointMap, triple_cap: int = TRIPLE_CAP, seed: int = 0
) -> DistortionProfile:
    """Quasisymmetry profile of f over ordered triples (x, a, b).

    Each sample is t = d(x,a)/d(x,b) against s = d(fx,fa)/d(fx,fb).  All
    n(n-1)(n-2) triples are enumerated when that count fits the cap,
    otherwise a deterministic stride (phased by ``seed``) through the
    lexicographic order.
    """
    n = f.source.n
    if n < 3:
        raise ValueError("quasisymmetry needs at least 3 points")
    total = n * (n - 1) * (n - 2)
    lin = _stride_indices(total, triple_cap, seed)
    t = np.empty(lin.size)
    s = np.empty(lin.size)
    _kernels.qs_samples(f.source.dist, f.target.dist, f.image, lin, t, s)
    return DistortionProfile.from_samples(t, s)


def cross_ratio(space: FiniteMetricSpace, x1: int, x2: int, x3: int, x4: int) -> float:
    """d(x1,x2) d(x3,x4) / (d(x1,x3) d(x2,x4)); the four points must be distinct."""
    if len({x1, x2, x3, x4}) != 4:
        raise ValueError("cross-ratio needs four distinct points")
    d = space.dist
    return float(d[x1, x2] * d[x3, x4] / (d[x1, x3] * d[x2, x4]))


def qm_distortion(
    f: PointMap, quadruple_cap: int = QUADRUPLE_CAP, seed: int = 0
) -> DistortionProfile:
    """Quasi-Mobius profile of f: source vs image cross-ratios over quadruples.

    Enumeration policy as in :func:`qs_distortion`, over the
    n(n-1)(n-2)(n-3) ordered distinct quadruples.
    """
    n = f.source.n
    if n < 4:
        raise ValueError("cross-ratio distortion needs at least 4 points")
    total = n * (n - 1) * (n - 2) * (n - 3)
    lin = _stride_indices(total, quadruple_cap, seed)
    t = np.empty(lin.size)
    s = np.empty(lin.size)
    _kernels.qm_samples(f.source.dist, f.target.dist, f.image, lin, t, s)
    return DistortionProfile.from_samples(t, s)


def _spread_members(space: FiniteMetricSpace, cap: int) -> np.ndarray:
    """Deterministic farthest-point subsample when the space exceeds cap."""
    n = space.n
    if n <= cap:
        return np.arange(n, dtype=np.int64)
    chosen = [0]
    dmin = space.dist[0].copy()
    for _ in range(cap - 1):
        nxt = int(dmin.argmax())
        chosen.append(nxt)
        np.minimum(dmin, space.dist[nxt], out=dmin)
    return np.asarray(sorted(chosen), dtype=np.int64)


@dataclass(frozen=True)
class SeparatedTriple:
    lambda_source: float
    lambda_target: float
    triple: tuple[int, int, int]

    @property
    def lam(self) -> float:
        return max(self.lambda_source, self.lambda_target)


def separated_triple(f: PointMap, member_cap: int = 120) -> SeparatedTriple:
    """Triple maximizing the smaller normalized minimum pairwise distance
    in source and target; lambda = diam / min-pairwise for each space."""
    if f.source.n < 3:
        raise ValueError("need at least 3 points")
    ds, dt = f.source.dist, f.target.dist
    diam_s, diam_t = diam(f.source), diam(f.target)
    members = _spread_members(f.source, member_cap)
    i, j, k = _kernels.best_separated_triple(ds, dt, f.image, members, diam_s, diam_t)
    i, j, k = int(i), int(j), int(k)
    min_s = min(ds[i, j], ds[i, k], ds[j, k])
    fi, fj, fk = f(i), f(j), f(k)
    min_t = min(dt[fi, fj], dt[fi, fk], dt[fj, fk])
    return SeparatedTriple(diam_s / min_s, diam_t / min_t, (i, j, k))


@dataclass(frozen=True)
class DiamDistortionReport:
    lower: float
    ratio: float
    upper: float
    ok: bool
    diam_A: float
    diam_B: float
    diam_fA: float
    diam_fB: float


def diam_distortion_check(
    f: PointMap, eta: Callable, A: Subset, B: Subset
) -> DiamDistortionReport:
    """Two-sided diameter-distortion bracket for an eta-quasisymmetric map.

    Checks 1/(2 eta(diam B / diam A)) <= diam f(A)/diam f(B) <= eta(2 diam A / diam B)
    for A a subset of B.
    """
    if not np.all(np.isin(A.indices, B.indices)):
        raise ValueError("A must be a subset of B")
    if len(A) < 2 or len(B) < 2:
        raise ValueError("subsets need at least 2 points")
    da, db = diam(A), diam(B)
    if da == 0 or db == 0:
        raise ValueError("degenerate subset diameter")
    fa = Subset(f.target, f.image[A.indices])
    fb = Subset(f.target, f.image[B.indices])
    dfa, dfb = diam(fa), diam(fb)
    if dfa == 0 or dfb == 0:
        raise ValueError("degenerate image diameter")
    lower = 1.0 / (2.0 * float(eta(db / da)))
    upper = float(eta(2.0 * da / db))
    ratio = dfa / dfb
    return DiamDistortionReport(
        lower, ratio, upper, bool(lower <= ratio <= upper), da, db, dfa, dfb
    )
