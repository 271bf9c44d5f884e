"""Global maps on sewn spaces assembled from base and per-filling pieces.

A glued map is determined by a map on the base, a permutation of the
boundary components, and one map per filling.  The pieces must agree on the
seams at the index level: seam identifications are combinatorial data, so
compatibility is an exact condition, not a tolerance check.  Certification
measures cross-ratio distortion of the assembled map together with the
quantities the patching argument consumes (per-piece profiles, seam angles,
seam perfectness, seam-to-piece diameter ratios).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import angle_report, uniform_perfectness_report
from .maps import DistortionProfile, PointMap, qm_distortion, qs_distortion
from .metric import diam
from .sewing import SewnSpace


class CompatibilityError(ValueError):
    """Seam disagreement between the base map and a filling map.

    ``component`` is the source component index and ``seam_point`` the base
    index of the first seam point where the two sides disagree.
    """

    def __init__(self, msg: str, component: int, seam_point: int):
        super().__init__(msg)
        self.component = component
        self.seam_point = seam_point


@dataclass(frozen=True, eq=False)
class GluedMap:
    """Bijection between sewn spaces split into base and filling pieces.

    ``filling_maps[k]`` sends filling k of the source onto filling
    ``component_map[k]`` of the target; ``assembled`` acts on sewn indices.
    """

    source: SewnSpace
    target: SewnSpace
    base_map: PointMap
    component_map: np.ndarray
    filling_maps: tuple[PointMap, ...]
    assembled: PointMap

    def __call__(self, i: int) -> int:
        return int(self.assembled.image[i])

    def then(self, other: "GluedMap") -> "GluedMap":
        """Composite glued map; first self, then other."""
        if other.source is not self.target and other.source.space.n != self.target.space.n:
            raise ValueError("composition domain mismatch")
        pi = other.component_map[self.component_map]
        fillings = tuple(
            self.filling_maps[k].then(other.filling_maps[int(self.component_map[k])])
            for k in range(len(self.filling_maps))
        )
        return glue_maps(
            self.source, other.target, self.base_map.then(other.base_map), pi, fillings
        )

    def inverse(self) -> "GluedMap":
        pi = self.component_map
        inv_pi = np.empty_like(pi)
        inv_pi[pi] = np.arange(pi.size)
        fillings = tuple(
            self.filling_maps[int(inv_pi[j])].inverse() for j in range(pi.size)
        )
        return glue_maps(self.target, self.source, self.base_map.inverse(), inv_pi, fillings)


def glue_maps(
    source: SewnSpace,
    target: SewnSpace,
    base_map: PointMap,
    component_map,
    filling_maps,
) -> GluedMap:
    """Assemble a glued map, verifying seam compatibility exactly.

    Each seam point z of component k must satisfy
    ``base_map(z) == psi'(component_map[k]) applied back from
    filling_maps[k](psi_k(z))``: the base side and the filling side land on
    the same target seam point.  Violations raise
    :class:`CompatibilityError` with the offending component and seam point.
    """
    fillings = tuple(filling_maps)
    src_comps = source.bundle.components
    tgt_comps = target.bundle.components
    if len(src_comps) != len(tgt_comps):
        raise ValueError("source and target have different component counts")
    pi = np.asarray(component_map, dtype=np.int64)
    if pi.shape != (len(src_comps),) or not np.array_equal(np.sort(pi), np.arange(pi.size)):
        raise ValueError("component_map is not a permutation of the components")
    if len(fillings) != len(src_comps):
        raise ValueError("one filling map per component required")
    if base_map.source is not source.bundle.base and base_map.source.n != source.bundle.base.n:
        raise ValueError("base map domain does not match the source base")
    if base_map.target is not target.bundle.base and base_map.target.n != target.bundle.base.n:
        raise ValueError("base map range does not match the target base")
    if base_map.source.n != base_map.target.n:
        raise ValueError("base map is not a bijection")

    for k, comp in enumerate(src_comps):
        tk = int(pi[k])
        tgt = tgt_comps[tk]
        f = fillings[k]
        if f.source.n != comp.filling.n or f.target.n != tgt.filling.n:
            raise ValueError(f"filling map {k} does not match fillings {k} -> {tk}")
        if f.source.n != f.target.n:
            raise ValueError(f"filling map {k} is not a bijection")
        got = np.sort(base_map.image[comp.boundary.indices])
        if not np.array_equal(got, tgt.boundary.indices):
            raise ValueError(
                f"component_map sends component {k} to {tk}, but the base map"
                f" does not carry its boundary onto that component"
            )
        # exact seam agreement, point by point
        ring_pos = {int(p): t for t, p in enumerate(tgt.psi)}
        for t in range(comp.psi.size):
            z = int(comp.boundary.indices[t])
            u = int(f.image[comp.psi[t]])
            s = ring_pos.get(u)
            if s is None:
                raise CompatibilityError(
                    f"filling map {k} moves seam point {z} off the seam ring",
                    k,
                    z,
                )
            if int(base_map.image[z]) != int(tgt.boundary.indices[s]):
                raise CompatibilityError(
                    f"base and filling maps disagree at seam point {z} of"
                    f" component {k}",
                    k,
                    z,
                )

    src_lay, tgt_lay = source.layout, target.layout
    image = np.full(src_lay.n, -1, dtype=np.int64)
    image[: src_lay.base_size] = base_map.image
    for k in range(len(src_comps)):
        f2s = tgt_lay.fill_to_sewn[int(pi[k])]
        interior = src_lay.interiors[k]
        image[src_lay.fill_to_sewn[k][interior]] = f2s[fillings[k].image[interior]]
    if image.min() < 0 or np.unique(image).size != src_lay.n or src_lay.n != tgt_lay.n:
        raise ValueError("assembly is not a bijection")
    assembled = PointMap(source.space, target.space, image)
    return GluedMap(source, target, base_map, pi, fillings, assembled)


def identity_glued(sewn: SewnSpace) -> GluedMap:
    """Identity on a sewn space as a GluedMap."""
    comps = sewn.bundle.components
    return glue_maps(
        sewn,
        sewn,
        PointMap.identity(sewn.bundle.base),
        np.arange(len(comps)),
        tuple(PointMap.identity(c.filling) for c in comps),
    )


@dataclass(frozen=True, eq=False)
class GlueCertificate:
    """Distortion measurements for a glued map and its patching hypotheses.

    ``angles``, ``perfectness`` and ``diam_ratios`` each hold a (source,
    target) pair of per-component tuples; the patching argument needs the
    angles positive, the seams uniformly perfect, and every seam diameter a
    definite fraction of its piece diameter.
    """

    global_profile: DistortionProfile
    base_qs: DistortionProfile
    base_qm: DistortionProfile
    filling_qs: tuple[DistortionProfile, ...]
    filling_qm: tuple[DistortionProfile, ...]
    angles: tuple[tuple[float, ...], tuple[float, ...]]
    perfectness: tuple[tuple[float, ...], tuple[float, ...]]
    diam_ratios: tuple[tuple[float, ...], tuple[float, ...]]

    @property
    def hypothesis_ok(self) -> bool:
        angle_pos = all(a > 0.0 for side in self.angles for a in side)
        perf_fin = all(np.isfinite(p) for side in self.perfectness for p in side)
        ratio_pos = all(r > 0.0 for side in self.diam_ratios for r in side)
        return angle_pos and perf_fin and ratio_pos

    def piecewise_envelope(self, t) -> np.ndarray:
        """Largest per-piece cross-ratio envelope at ratio t."""
        pieces = [self.base_qm, *self.filling_qm]
        return np.max(np.stack([p.envelope(np.asarray(t)) for p in pieces]), axis=0)


def _seam_constants(sewn: SewnSpace):
    space = sewn.space
    base = sewn.base_subset()
    angles = []
    perf = []
    ratios = []
    for k in range(len(sewn.bundle.components)):
        piece = sewn.piece_subset(k)
        seam = sewn.seam_subset(k)
        angles.append(float(angle_report(space, piece, base).constants["c"]))
        perf.append(float(uniform_perfectness_report(space, seam).constants["lambda"]))
        dp = diam(piece)
        ratios.append(float(diam(seam) / dp) if dp > 0 else 1.0)
    return tuple(angles), tuple(perf), tuple(ratios)


def certify_glued_qm(
    g: GluedMap,
    quadruple_cap: int | None = None,
    triple_cap: int | None = None,
) -> GlueCertificate:
    """Measure the assembled map's cross-ratio distortion and the patching data."""
    qm_kw = {} if quadruple_cap is None else {"quadruple_cap": quadruple_cap}
    qs_kw = {} if triple_cap is None else {"triple_cap": triple_cap}
    global_profile = qm_distortion(g.assembled, **qm_kw)
    base_qs = qs_distortion(g.base_map, **qs_kw)
    base_qm = qm_distortion(g.base_map, **qm_kw)
    f_qs = tuple(qs_distortion(f, **qs_kw) for f in g.filling_maps)
    f_qm = tuple(qm_distortion(f, **qm_kw) for f in g.filling_maps)
    src_angles, src_perf, src_ratios = _seam_constants(g.source)
    tgt_angles, tgt_perf, tgt_ratios = _seam_constants(g.target)
    return GlueCertificate(
        global_profile,
        base_qs,
        base_qm,
        f_qs,
        f_qm,
        (src_angles, tgt_angles),
        (src_perf, tgt_perf),
        (src_ratios, tgt_ratios),
    )
