"""JSON documents for spaces, gluing bundles, sewn spaces, maps, and reports.

Every document is a plain dictionary with ``format_version`` and ``kind``
fields and a fixed canonical rendering: keys sorted, compact separators,
one trailing newline.  Floats are printed as the shortest decimal that
parses back to the identical bit pattern (never more than 17 significant
digits), so encoding the result of a decode reproduces the original bytes.
Digests are taken over the canonical rendering with volatile fields
(``timestamp`` and any embedded ``digest``) removed; distance tables are
stored as the row-major lower triangle, which halves the file.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .generators import GluingComponent, ScenarioBundle, snowflake
from .metric import FiniteMetricSpace, Subset, validate_metric
from .sewing import Certificates, SewnSpace, build_quasimetric

FORMAT_VERSION = 1

_KINDS = ("space", "bundle", "sewn", "map_spec", "glued_map", "report")


class SchemaError(ValueError):
    """Document does not match the expected layout; the message names the path."""


# ---------------------------------------------------------------------------
# field access with path diagnostics


def _field(doc, name, path):
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object")
    if name not in doc:
        raise SchemaError(f"{path}: missing field {name!r}")
    return doc[name]


def _int_field(doc, name, path):
    v = _field(doc, name, path)
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{path}.{name}: expected an integer")
    return v


def _float_value(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}: expected a number")
    return float(v)


def _list_field(doc, name, path):
    v = _field(doc, name, path)
    if not isinstance(v, list):
        raise SchemaError(f"{path}.{name}: expected a list")
    return v


def _index_list(v, where):
    out = []
    for i, e in enumerate(v):
        if isinstance(e, bool) or not isinstance(e, int):
            raise SchemaError(f"{where}[{i}]: expected an integer index")
        out.append(e)
    return np.array(out, dtype=np.int64)


def _check_header(doc, kind, path):
    v = _int_field(doc, "format_version", path)
    if v != FORMAT_VERSION:
        raise SchemaError(
            f"{path}.format_version: expected {FORMAT_VERSION}, found {v}"
        )
    k = _field(doc, "kind", path)
    if k != kind:
        raise SchemaError(f"{path}.kind: expected {kind!r}, found {k!r}")


def document_kind(doc) -> str:
    """Kind tag of a parsed document, after checking the version."""
    v = _int_field(doc, "format_version", "document")
    if v != FORMAT_VERSION:
        raise SchemaError(f"document.format_version: expected {FORMAT_VERSION}, found {v}")
    k = _field(doc, "kind", "document")
    if k not in _KINDS:
        raise SchemaError(f"document.kind: unknown kind {k!r}")
    return k


# ---------------------------------------------------------------------------
# canonical rendering and digests


def dumps(doc) -> str:
    """Canonical text of a document: sorted keys, compact, one trailing newline."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"document: invalid JSON: {e.msg} (line {e.lineno})") from None
    if not isinstance(doc, dict):
        raise SchemaError("document: expected a JSON object")
    return doc


def read_document(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def write_document(doc, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def document_digest(doc) -> str:
    """sha256 over the canonical form, excluding timestamp and digest fields."""
    body = {k: v for k, v in doc.items() if k not in ("timestamp", "digest")}
    return "sha256:" + hashlib.sha256(dumps(body).encode("utf-8")).hexdigest()


def _plain(x):
    """Recursively convert report payloads to JSON-compatible values.

    Infinities have no JSON literal, so they become the strings "inf" and
    "-inf"; everything numeric else stays a number.
    """
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            raise ValueError("cannot serialize NaN")
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(e) for e in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True, eq=False)
class DecodedSpace:
    space: FiniteMetricSpace
    name: str | None
    subsets: dict[str, np.ndarray]


def _lower_triangle(dist: np.ndarray) -> list[float]:
    i, j = np.tril_indices(dist.shape[0], k=-1)
    return [float(v) for v in dist[i, j]]


def _from_lower_triangle(entries, n, where) -> np.ndarray:
    want = n * (n - 1) // 2
    if len(entries) != want:
        raise SchemaError(
            f"{where}: expected {want} entries for {n} points, found {len(entries)}"
        )
    vals = np.array([_float_value(e, f"{where}[{t}]") for t, e in enumerate(entries)])
    d = np.zeros((n, n))
    i, j = np.tril_indices(n, k=-1)
    d[i, j] = vals
    d[j, i] = vals
    return d


def _metric_body(space: FiniteMetricSpace, form: str) -> dict:
    if form == "matrix":
        return {"matrix": _lower_triangle(space.dist)}
    if form == "euclidean":
        if space.coords is None:
            raise ValueError("euclidean form needs coordinates")
        return {"euclidean": [[float(c) for c in row] for row in space.coords]}
    raise ValueError(f"unknown metric form {form!r}")


def encode_space(space, name=None, subsets=None, form="matrix") -> dict:
    """SpaceDocument for a finite metric space.

    ``subsets`` maps names to index arrays (or Subset objects).  The matrix
    form is lossless; the euclidean form stores coordinates and recomputes
    distances on decode.
    """
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "space",
        "points": space.n,
        "metric": _metric_body(space, form),
    }
    if name is not None:
        doc["name"] = str(name)
    if space.labels is not None:
        doc["labels"] = list(space.labels)
    if subsets:
        body = {}
        for key, val in subsets.items():
            idx = val.indices if isinstance(val, Subset) else np.asarray(val)
            body[str(key)] = [int(i) for i in idx]
        doc["subsets"] = body
    return doc


def encode_snowflaked(base_doc: dict, alpha: float, name=None) -> dict:
    """SpaceDocument whose metric is a snowflake of another space document."""
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "space",
        "points": _int_field(base_doc, "points", "space"),
        "metric": {"snowflake": {"alpha": float(alpha), "space": base_doc}},
    }
    if name is not None:
        doc["name"] = str(name)
    if "subsets" in base_doc:
        doc["subsets"] = base_doc["subsets"]
    return doc


def _decode_metric(body, n, labels, path, validate):
    forms = [k for k in ("matrix", "euclidean", "snowflake") if k in body]
    if len(forms) != 1:
        raise SchemaError(
            f"{path}.metric: expected exactly one of 'matrix', 'euclidean', "
            f"'snowflake', found {sorted(body)}"
        )
    form = forms[0]
    if form == "matrix":
        entries = body["matrix"]
        if not isinstance(entries, list):
            raise SchemaError(f"{path}.metric.matrix: expected a list")
        d = _from_lower_triangle(entries, n, f"{path}.metric.matrix")
        if validate:
            rep = validate_metric(d)
            if not rep.ok:
                v = rep.violations[0]
                raise ValueError(
                    f"{path}: {v.axiom} axiom violated at {v.witness} "
                    f"({v.count} offending entries)"
                )
        return FiniteMetricSpace(d, labels=labels)
    if form == "euclidean":
        rows = body["euclidean"]
        if not isinstance(rows, list) or len(rows) != n:
            raise SchemaError(f"{path}.metric.euclidean: expected {n} coordinate rows")
        coords = np.array(
            [[_float_value(c, f"{path}.metric.euclidean[{i}]") for c in row] for i, row in enumerate(rows)]
        )
        if coords.ndim != 2:
            raise SchemaError(f"{path}.metric.euclidean: ragged coordinate rows")
        diff = coords[:, None, :] - coords[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=2))
        np.fill_diagonal(d, 0.0)
        d = np.maximum(d, d.T)
        return FiniteMetricSpace(d, labels=labels, coords=coords)
    inner = body["snowflake"]
    alpha = _float_value(_field(inner, "alpha", f"{path}.metric.snowflake"), f"{path}.metric.snowflake.alpha")
    nested = _field(inner, "space", f"{path}.metric.snowflake")
    base = decode_space(nested, path=f"{path}.metric.snowflake.space", validate=validate)
    if base.space.n != n:
        raise SchemaError(f"{path}.points: does not match the nested space")
    flaked = snowflake(base.space, alpha)
    return FiniteMetricSpace(flaked.dist, labels=labels)


def decode_space(doc, path="space", validate=True) -> DecodedSpace:
    """Rebuild a space from its document; raises SchemaError on layout problems."""
    _check_header(doc, "space", path)
    n = _int_field(doc, "points", path)
    if n < 1:
        raise SchemaError(f"{path}.points: must be positive")
    labels = None
    if "labels" in doc:
        raw = doc["labels"]
        if not isinstance(raw, list) or len(raw) != n:
            raise SchemaError(f"{path}.labels: expected {n} entries")
        labels = tuple(str(s) for s in raw)
    body = _field(doc, "metric", path)
    if not isinstance(body, dict):
        raise SchemaError(f"{path}.metric: expected an object")
    space = _decode_metric(body, n, labels, path, validate)
    subsets = {}
    if "subsets" in doc:
        raw = doc["subsets"]
        if not isinstance(raw, dict):
            raise SchemaError(f"{path}.subsets: expected an object")
        for key, val in raw.items():
            if not isinstance(val, list):
                raise SchemaError(f"{path}.subsets.{key}: expected a list")
            idx = _index_list(val, f"{path}.subsets.{key}")
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise SchemaError(f"{path}.subsets.{key}: index out of range")
            subsets[key] = idx
    name = doc.get("name")
    return DecodedSpace(space, name if name is None else str(name), subsets)


# ---------------------------------------------------------------------------
# bundles


def encode_bundle(bundle: ScenarioBundle, name=None) -> dict:
    comps = []
    for c in bundle.components:
        body = {
            "boundary": [int(i) for i in c.boundary.indices],
            "psi": [int(i) for i in c.psi],
            "L": float(c.L),
            "filling": encode_space(c.filling),
        }
        if c.cycle is not None:
            body["cycle"] = [int(i) for i in c.cycle]
        comps.append(body)
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "bundle",
        "base": encode_space(bundle.base),
        "components": comps,
    }
    if name is not None:
        doc["name"] = str(name)
    return doc


def decode_bundle(doc, path="bundle") -> ScenarioBundle:
    _check_header(doc, "bundle", path)
    base = decode_space(_field(doc, "base", path), path=f"{path}.base").space
    raw = _list_field(doc, "components", path)
    comps = []
    for k, body in enumerate(raw):
        where = f"{path}.components[{k}]"
        bidx = _index_list(_list_field(body, "boundary", where), f"{where}.boundary")
        psi = _index_list(_list_field(body, "psi", where), f"{where}.psi")
        L = _float_value(_field(body, "L", where), f"{where}.L")
        filling = decode_space(_field(body, "filling", where), path=f"{where}.filling").space
        cycle = None
        if "cycle" in body:
            cycle = _index_list(_list_field(body, "cycle", where), f"{where}.cycle")
        if bidx.size and (bidx.min() < 0 or bidx.max() >= base.n):
            raise SchemaError(f"{where}.boundary: index out of range")
        if psi.size and (psi.min() < 0 or psi.max() >= filling.n):
            raise SchemaError(f"{where}.psi: index out of range")
        comps.append(
            GluingComponent(
                boundary=Subset(base, bidx),
                filling=filling,
                boundary_image=Subset(filling, np.sort(psi)),
                psi=psi,
                L=L,
                cycle=cycle,
            )
        )
    bundle = ScenarioBundle(base, tuple(comps))
    bundle.validate()
    return bundle


# ---------------------------------------------------------------------------
# sewn spaces


def encode_sewn(sewn: SewnSpace, name=None) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "sewn",
        "bundle": encode_bundle(sewn.bundle),
        "points": sewn.n,
        "matrix": _lower_triangle(sewn.space.dist),
        "certificates": {
            "L": float(sewn.certificates.L),
            "c_flat": float(sewn.certificates.c_flat),
            "Delta": float(sewn.certificates.Delta),
        },
    }
    if name is not None:
        doc["name"] = str(name)
    return doc


def decode_sewn(doc, path="sewn") -> SewnSpace:
    """Rebuild a sewn space: the distance table is read back bit-exactly and
    the layout and quasimetric are reconstructed from the stored bundle."""
    _check_header(doc, "sewn", path)
    bundle = decode_bundle(_field(doc, "bundle", path), path=f"{path}.bundle")
    n = _int_field(doc, "points", path)
    d = _from_lower_triangle(_list_field(doc, "matrix", path), n, f"{path}.matrix")
    layout, q = build_quasimetric(bundle)
    if layout.n != n:
        raise SchemaError(f"{path}.points: does not match the bundle layout")
    certs = _field(doc, "certificates", path)
    where = f"{path}.certificates"
    cert = Certificates(
        L=_float_value(_field(certs, "L", where), f"{where}.L"),
        c_flat=_float_value(_field(certs, "c_flat", where), f"{where}.c_flat"),
        Delta=_float_value(_field(certs, "Delta", where), f"{where}.Delta"),
    )
    space = FiniteMetricSpace(d)
    return SewnSpace(space=space, layout=layout, bundle=bundle, q=q, certificates=cert)


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True, eq=False)
class MapSpec:
    """Raw integer data of a glued map, independent of any space objects."""

    base_image: np.ndarray
    component_map: np.ndarray
    filling_images: tuple[np.ndarray, ...]


def encode_map_spec(base_image, component_map, filling_images) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "map_spec",
        "base_image": [int(i) for i in base_image],
        "component_map": [int(i) for i in component_map],
        "filling_images": [[int(i) for i in img] for img in filling_images],
    }


def decode_map_spec(doc, path="map_spec") -> MapSpec:
    _check_header(doc, "map_spec", path)
    base = _index_list(_list_field(doc, "base_image", path), f"{path}.base_image")
    comp = _index_list(_list_field(doc, "component_map", path), f"{path}.component_map")
    raw = _list_field(doc, "filling_images", path)
    imgs = []
    for k, entry in enumerate(raw):
        if not isinstance(entry, list):
            raise SchemaError(f"{path}.filling_images[{k}]: expected a list")
        imgs.append(_index_list(entry, f"{path}.filling_images[{k}]"))
    return MapSpec(base, comp, tuple(imgs))


def encode_glued_map(glued) -> dict:
    doc = encode_map_spec(
        glued.base_map.image,
        glued.component_map,
        [f.image for f in glued.filling_maps],
    )
    doc["kind"] = "glued_map"
    doc["assembled"] = [int(i) for i in glued.assembled.image]
    return doc


# ---------------------------------------------------------------------------
# reports


def check_body(report) -> dict:
    """Flatten a property report into the check entry of a ReportDocument."""
    rng = report.scale_range
    return {
        "name": report.name,
        "pass": report.passed,
        "constants": _plain(report.constants),
        "witnesses": _plain(list(report.witnesses)),
        "scale_range": None if rng is None else [float(rng[0]), float(rng[1])],
    }


def encode_report(checks, inputs=None, timestamp=None) -> dict:
    """ReportDocument from check entries (dicts or property reports).

    ``inputs`` maps input names to their document digests; the digest of the
    report itself never covers the timestamp, so reruns match byte-for-byte
    everywhere else.
    """
    body = []
    for c in checks:
        body.append(c if isinstance(c, dict) else check_body(c))
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "report",
        "tool": f"sewkit {__version__}",
        "checks": body,
        "provenance": {"inputs": dict(inputs or {})},
    }
    if timestamp is not None:
        doc["timestamp"] = str(timestamp)
    return doc


def decode_report(doc, path="report") -> dict:
    """Validate the layout of a report document and return it unchanged."""
    _check_header(doc, "report", path)
    checks = _list_field(doc, "checks", path)
    for i, c in enumerate(checks):
        where = f"{path}.checks[{i}]"
        _field(c, "name", where)
        _field(c, "pass", where)
        _field(c, "constants", where)
        _field(c, "witnesses", where)
    _field(doc, "provenance", path)
    return doc


def report_passed(doc) -> bool:
    """True when no check in a report document failed (None counts as pass)."""
    return all(c["pass"] is not False for c in doc["checks"])
