"""Finite metric spaces and the chain-infimum metrization.

The central objects are a dense symmetric distance table
(:class:`FiniteMetricSpace`), a triangle-free variant
(:class:`QuasiMetricTable`), and :func:`chain_metrize`, which turns the
latter into the former by all-pairs shortest paths.  Balls, greedy nets,
epsilon-graphs, and component decompositions live here too; everything
downstream (sewing, sphericalization, certification) is built on these.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels

REL_TOL = 1e-9


class CollapseError(ValueError):
    """Chain metrization drove two distinct points to distance zero."""


def _frozen(a, dtype=np.float64):
    # read-only arrays are adopted as-is, sparing a copy on big internal tables
    if (
        isinstance(a, np.ndarray)
        and a.dtype == dtype
        and a.flags.c_contiguous
        and not a.flags.writeable
    ):
        return a
    out = np.array(a, dtype=dtype, order="C", copy=True)
    out.setflags(write=False)
    return out


def _check_table(t: np.ndarray, kind: str) -> None:
    # cheap O(n^2) structural checks; the O(n^3) triangle scan is validate_metric's job
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError(f"{kind} table must be square, got shape {t.shape}")
    if t.shape[0] < 1:
        raise ValueError(f"{kind} table must have at least one point")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{kind} table contains non-finite entries")
    if np.any(t < 0):
        raise ValueError(f"{kind} table contains negative entries")
    if np.any(np.diagonal(t) != 0):
        raise ValueError(f"{kind} table has a nonzero diagonal entry")
    if not np.array_equal(t, t.T):
        raise ValueError(f"{kind} table is not symmetric")
    n = t.shape[0]
    if n > 1:
        # blocked second-smallest per row; the diagonal holds the unique zero
        step = max(1, (1 << 23) // n)
        for lo in range(0, n, step):
            second = np.partition(t[lo : lo + step], 1, axis=1)[:, 1]
            if second.min() <= 0:
                i = lo + int(second.argmin())
                cols = np.flatnonzero(t[i] == 0)
                j = int(cols[cols != i][0])
                raise ValueError(f"{kind} table has zero off-diagonal entry at ({i}, {j})")


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Point set 0..n-1 with a dense symmetric distance table.

    ``labels`` and ``coords`` are optional payloads carried along by
    generators and serialization; no operation depends on them.
    """

    dist: np.ndarray
    labels: tuple[str, ...] | None = None
    coords: np.ndarray | None = None

    def __post_init__(self):
        d = _frozen(self.dist)
        _check_table(d, "distance")
        object.__setattr__(self, "dist", d)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != d.shape[0]:
                raise ValueError("labels length does not match point count")
            object.__setattr__(self, "labels", labels)
        if self.coords is not None:
            c = _frozen(np.atleast_2d(self.coords))
            if c.shape[0] != d.shape[0]:
                raise ValueError("coords length does not match point count")
            object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.n

    def scaled(self, factor: float) -> "FiniteMetricSpace":
        """Same point set with every distance multiplied by factor > 0."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        return FiniteMetricSpace(self.dist * factor, self.labels, self.coords)


@dataclass(frozen=True, eq=False)
class QuasiMetricTable:
    """Symmetric positive table that need not satisfy the triangle inequality."""

    q: np.ndarray

    def __post_init__(self):
        t = _frozen(self.q)
        _check_table(t, "quasimetric")
        object.__setattr__(self, "q", t)

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple[int, ...]
    values: tuple[float, ...]
    count: int


@dataclass(frozen=True, eq=False)
class ValidationReport:
    violations: tuple[Violation, ...]
    space: FiniteMetricSpace | None

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_metric(table) -> ValidationReport:
    """Check the metric axioms on a square table.

    Returns a report listing each violated axiom with an extremal witness
    and the number of offending entries; when nothing is violated the
    report carries the resulting space.  Non-square, NaN, or negative
    input is rejected outright.
    """
    t = np.array(table, dtype=np.float64, copy=True)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError(f"expected a square table, got shape {t.shape}")
    if np.any(np.isnan(t)) or not np.all(np.isfinite(t)):
        raise ValueError("table contains NaN or infinite entries")
    if np.any(t < 0):
        raise ValueError("table contains negative entries")
    n = t.shape[0]
    violations: list[Violation] = []

    bad = np.flatnonzero(np.diagonal(t) != 0)
    if bad.size:
        i = int(bad[0])
        violations.append(Violation("diagonal", (i,), (float(t[i, i]),), bad.size))

    asym = np.abs(t - t.T)
    if asym.max(initial=0.0) > 0:
        i, j = np.unravel_index(int(asym.argmax()), t.shape)
        violations.append(
            Violation(
                "symmetry",
                (int(i), int(j)),
                (float(t[i, j]), float(t[j, i])),
                int(np.count_nonzero(asym) // 2),
            )
        )

    eye = np.eye(n, dtype=bool)
    zero_off = (t == 0) & ~eye
    if np.any(zero_off):
        i, j = np.unravel_index(int(zero_off.argmax()), t.shape)
        violations.append(
            Violation(
                "positivity",
                (int(i), int(j)),
                (0.0,),
                int(np.count_nonzero(zero_off) // 2),
            )
        )

    # triangle scan, one relay point at a time to keep memory at O(n^2)
    worst = 0.0
    worst_witness = None
    tri_count = 0
    for j in range(n):
        bound = (t[:, j][:, None] + t[j, :][None, :]) * (1.0 + REL_TOL)
        excess = t - bound
        excess[:, j] = -1.0
        excess[j, :] = -1.0
        np.fill_diagonal(excess, -1.0)
        tri_count += int(np.count_nonzero(excess > 0))
        m = excess.max(initial=-1.0)
        if m > worst:
            i, k = np.unravel_index(int(excess.argmax()), t.shape)
            worst = m
            worst_witness = (int(i), int(j), int(k))
    if worst_witness is not None:
        i, j, k = worst_witness
        violations.append(
            Violation(
                "triangle",
                (i, j, k),
                (float(t[i, k]), float(t[i, j]), float(t[j, k])),
                tri_count,
            )
        )

    space = None
    if not violations:
        space = FiniteMetricSpace(t)
    return ValidationReport(tuple(violations), space)


def chain_metrize(q: QuasiMetricTable | np.ndarray) -> FiniteMetricSpace:
    """Largest metric below q: infimum of sums of q over chains joining two points.

    Chains with repeated points never lower the sum (q >= 0), so the infimum
    is attained by simple chains and equals all-pairs shortest paths on the
    complete graph weighted by q.  Each chain's sum is accumulated left to
    right and the two traversal orientations of a pair are reconciled by
    taking the smaller, which pins the result bitwise independent of point
    labeling.  Raises :class:`CollapseError` when two distinct points end up
    at distance zero.
    """
    table = q.q if isinstance(q, QuasiMetricTable) else np.asarray(q, dtype=np.float64)
    _check_table(np.asarray(table), "quasimetric")
    src = np.array(table, dtype=np.float64, copy=True, order="C")
    one_way = np.empty_like(src)
    _kernels.shortest_paths_from(src, one_way)
    d = np.minimum(one_way, one_way.T)
    n = d.shape[0]
    if n > 1:
        off = d + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
        if off.min() <= 0:
            i, j = np.unravel_index(int(off.argmin()), d.shape)
            raise CollapseError(f"points {i} and {j} collapsed to distance zero")
    d.setflags(write=False)
    return FiniteMetricSpace(d)


@dataclass(frozen=True, eq=False)
class Subset:
    """Sorted, duplicate-free point indices within a parent space."""

    space: FiniteMetricSpace
    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if idx.size != np.asarray(self.indices).size:
            raise ValueError("subset indices contain duplicates")
        if idx.size and (idx[0] < 0 or idx[-1] >= self.space.n):
            raise ValueError("subset index out of range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self) -> Iterator[int]:
        return iter(int(i) for i in self.indices)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.space.n, dtype=bool)
        m[self.indices] = True
        return m


@dataclass(frozen=True, eq=False)
class EpsilonGraph:
    """Adjacency at scale epsilon: all pairs at distance <= epsilon, CSR form."""

    space: FiniteMetricSpace
    epsilon: float
    indptr: np.ndarray
    adjacency: np.ndarray

    def edges(self) -> Iterable[tuple[int, int]]:
        for i in range(self.space.n):
            for e in range(self.indptr[i], self.indptr[i + 1]):
                j = int(self.adjacency[e])
                if i < j:
                    yield (i, j)

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])


def epsilon_graph(space: FiniteMetricSpace, epsilon: float) -> EpsilonGraph:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    adj = space.dist <= epsilon
    np.fill_diagonal(adj, False)
    indptr = np.zeros(space.n + 1, dtype=np.int64)
    np.cumsum(adj.sum(axis=1), out=indptr[1:])
    _, cols = np.nonzero(adj)
    indices = np.ascontiguousarray(cols, dtype=np.int64)
    indptr.setflags(write=False)
    indices.setflags(write=False)
    return EpsilonGraph(space, float(epsilon), indptr, indices)


def ball(space: FiniteMetricSpace, center: int, r: float) -> Subset:
    """Closed ball {j : d(center, j) <= r}."""
    if not 0 <= center < space.n:
        raise ValueError("center index out of range")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return Subset(space, np.flatnonzero(space.dist[center] <= r))


def diam(obj: FiniteMetricSpace | Subset) -> float:
    """Largest pairwise distance; 0 for a singleton, error for an empty subset."""
    if isinstance(obj, FiniteMetricSpace):
        return float(obj.dist.max())
    if len(obj) == 0:
        raise ValueError("diameter of an empty subset")
    idx = obj.indices
    return float(obj.space.dist[np.ix_(idx, idx)].max())


def restrict(space: FiniteMetricSpace, subset: Subset | Sequence[int]) -> FiniteMetricSpace:
    """Sub-space on the given indices, keeping labels and coords."""
    idx = subset.indices if isinstance(subset, Subset) else np.unique(
        np.asarray(subset, dtype=np.int64)
    )
    if idx.size == 0:
        raise ValueError("cannot restrict to an empty subset")
    labels = None
    if space.labels is not None:
        labels = tuple(space.labels[int(i)] for i in idx)
    coords = space.coords[idx] if space.coords is not None else None
    return FiniteMetricSpace(space.dist[np.ix_(idx, idx)], labels, coords)


def epsilon_net(space: FiniteMetricSpace, epsilon: float) -> Subset:
    """Greedy maximal epsilon-separated subset, scanning indices in order.

    The result is epsilon-separated (pairwise distances strictly above
    epsilon) and epsilon-covering (every point within epsilon of it).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    nearest = np.full(space.n, np.inf)
    chosen = []
    for i in range(space.n):
        if nearest[i] > epsilon:
            chosen.append(i)
            np.minimum(nearest, space.dist[i], out=nearest)
    return Subset(space, np.asarray(chosen, dtype=np.int64))


def mesh(space: FiniteMetricSpace) -> float:
    """Largest nearest-neighbor distance; 0 for a single point."""
    if space.n < 2:
        return 0.0
    d = space.dist
    n = space.n
    step = max(1, (1 << 23) // n)
    worst = 0.0
    for i0 in range(0, n, step):
        near = np.partition(d[i0:i0 + step], 1, axis=1)[:, 1]
        worst = max(worst, float(near.max()))
    return worst


def default_epsilon(space: FiniteMetricSpace) -> float:
    """Connectivity scale used when a caller does not supply one: 3 * mesh."""
    return 3.0 * mesh(space)


def components(graph: EpsilonGraph, subset: Subset | None = None) -> list[Subset]:
    """Connected components of the epsilon-graph, optionally within a subset.

    Components are returned sorted by their smallest member.
    """
    n = graph.space.n
    if subset is None:
        allowed = np.ones(n, dtype=np.uint8)
    else:
        allowed = subset.mask().astype(np.uint8)
    visited = np.zeros(n, dtype=np.uint8)
    seen = np.zeros(n, dtype=bool)
    out: list[Subset] = []
    for seed in range(n):
        if not allowed[seed] or seen[seed]:
            continue
        _kernels.bfs_cover(graph.indptr, graph.adjacency, allowed, seed, visited)
        member = visited.astype(bool)
        seen |= member
        out.append(Subset(graph.space, np.flatnonzero(member)))
    return out
