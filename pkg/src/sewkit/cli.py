"""Command line for generating, sewing, and certifying metric documents.

Exit status: 0 when every requested check passes, 1 when a check fails
(reports are still written), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, serialize
from .analysis import (
    CENTER_CAP,
    ahlfors_report,
    angle_report,
    bounded_turning_report,
    certify_sewn,
    doubling_report,
    llc_check_report,
    porosity_report,
    relative_doubling_report,
    relative_porosity_report,
    uniform_perfectness_report,
)
from .generators import carpet_net, carpet_with_disks, circle_net, disk_net, interval_net
from .glue import CompatibilityError, certify_glued_qm, glue_maps
from .maps import QUADRUPLE_CAP, TRIPLE_CAP, PointMap, qm_distortion, qs_distortion
from .metric import CollapseError, Subset, default_epsilon, validate_metric
from .serialize import SchemaError
from .sewing import ComparabilityError, sew
from .sphericalize import sphericalize


class UsageError(Exception):
    """Bad flags or unusable input; maps to exit status 2."""


CHECK_NAMES = (
    "bt",
    "llc",
    "doubling",
    "rel-doubling",
    "porosity",
    "rel-porosity",
    "ahlfors",
    "angle",
    "perfect",
)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _configure_threads() -> None:
    raw = os.environ.get("SEWKIT_THREADS")
    if not raw:
        return
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"SEWKIT_THREADS must be an integer, got {raw!r}")
    if k < 1:
        raise UsageError("SEWKIT_THREADS must be at least 1")
    import numba

    numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def _read(path) -> dict:
    try:
        return serialize.read_document(path)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}")


def _expect_kind(doc, kind, path):
    found = serialize.document_kind(doc)
    if found != kind:
        raise UsageError(f"{path}: expected a {kind!r} document, found {found!r}")


def _print_checks(checks) -> bool:
    """One status line per check; returns True when none failed."""
    ok = True
    for c in checks:
        body = c if isinstance(c, dict) else serialize.check_body(c)
        flag = body["pass"]
        tag = "info" if flag is None else ("pass" if flag else "FAIL")
        consts = " ".join(f"{k}={v}" for k, v in sorted(body["constants"].items()))
        print(f"[{tag}] {body['name']}: {consts}")
        if flag is False:
            ok = False
    return ok


def _emit_report(checks, inputs, out_path) -> bool:
    ok = _print_checks(checks)
    if out_path:
        doc = serialize.encode_report(checks, inputs=inputs, timestamp=_timestamp())
        serialize.write_document(doc, out_path)
    return ok


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    doc = _read(args.input[0])
    _expect_kind(doc, "space", args.input[0])
    dec = serialize.decode_space(doc, validate=False)
    rep = validate_metric(dec.space.dist)
    checks = [
        {
            "name": "metric-axioms",
            "pass": rep.ok,
            "constants": {"points": dec.space.n, "violations": len(rep.violations)},
            "witnesses": serialize._plain(
                [
                    {"axiom": v.axiom, "witness": list(v.witness), "values": list(v.values), "count": v.count}
                    for v in rep.violations
                ]
            ),
            "scale_range": None,
        }
    ]
    inputs = {args.input[0]: serialize.document_digest(doc)}
    return 0 if _emit_report(checks, inputs, args.output) else 1


def _generate_space(args):
    name = args.generator
    if name == "interval":
        return interval_net(args.m or 64), {}, f"interval({args.m or 64})"
    if name == "circle":
        return circle_net(args.m or 32), {}, f"circle({args.m or 32})"
    if name == "disk":
        space, rim = disk_net(args.k or 4, boundary_count=args.m)
        return space, {"rim": rim.indices}, f"disk({args.k or 4})"
    if name == "carpet":
        level = args.level or 2
        space, peripherals = carpet_net(level)
        subsets = {f"hole{i}": p.indices for i, p in enumerate(peripherals[:-1])}
        subsets["outer"] = peripherals[-1].indices
        return space, subsets, f"carpet({level})"
    raise UsageError(f"unknown generator {name!r}")


def _cmd_generate(args) -> int:
    if args.generator == "carpet-with-disks":
        if args.alpha is not None:
            raise UsageError("--alpha applies to space generators only")
        bundle = carpet_with_disks(args.level or 1)
        doc = serialize.encode_bundle(bundle, name=f"carpet-with-disks({args.level or 1})")
    else:
        space, subsets, name = _generate_space(args)
        doc = serialize.encode_space(space, name=name, subsets=subsets)
        if args.alpha is not None:
            doc = serialize.encode_snowflaked(doc, args.alpha, name=f"{name}^{args.alpha}")
    if args.output:
        serialize.write_document(doc, args.output)
        print(f"wrote {doc['kind']} document: {args.output}")
    else:
        sys.stdout.write(serialize.dumps(doc))
    return 0


def _cmd_sew(args) -> int:
    doc = _read(args.input[0])
    _expect_kind(doc, "bundle", args.input[0])
    inputs = {args.input[0]: serialize.document_digest(doc)}
    try:
        bundle = serialize.decode_bundle(doc)
        sewn = sew(bundle)
    except (ComparabilityError, CollapseError, ValueError) as e:
        checks = [
            {
                "name": "sew",
                "pass": False,
                "constants": {},
                "witnesses": [str(e)],
                "scale_range": None,
            }
        ]
        _emit_report(checks, inputs, None)
        return 1
    out = serialize.encode_sewn(sewn, name=doc.get("name"))
    if args.output:
        serialize.write_document(out, args.output)
        print(f"wrote sewn document: {args.output}")
    else:
        sys.stdout.write(serialize.dumps(out))
    c = sewn.certificates
    print(f"[pass] sew: L={c.L} c_flat={c.c_flat} Delta={c.Delta}")
    return 0


def _cmd_sphericalize(args) -> int:
    doc = _read(args.input[0])
    _expect_kind(doc, "space", args.input[0])
    dec = serialize.decode_space(doc)
    if args.basepoint is None:
        raise UsageError("sphericalize requires --basepoint")
    if not 0 <= args.basepoint < dec.space.n:
        raise UsageError(f"--basepoint out of range for {dec.space.n} points")
    inv = sphericalize(dec.space, args.basepoint)
    subsets = {}
    for key, idx in dec.subsets.items():
        if args.basepoint in idx:
            continue
        subsets[key] = np.searchsorted(inv.kept, idx)
    base = dec.name or "space"
    out = serialize.encode_space(inv.space, name=f"{base}@{args.basepoint}", subsets=subsets)
    if args.output:
        serialize.write_document(out, args.output)
        print(f"wrote space document: {args.output}")
    else:
        sys.stdout.write(serialize.dumps(out))
    return 0


def _parse_checks(raw) -> list[str]:
    names = []
    for chunk in raw or []:
        names.extend(s.strip() for s in chunk.split(",") if s.strip())
    if not names:
        raise UsageError("diagnose requires --check")
    for s in names:
        if s not in CHECK_NAMES:
            raise UsageError(f"unknown check {s!r}; choose from {', '.join(CHECK_NAMES)}")
    return names


def _named_subsets(dec):
    return [Subset(dec.space, idx) for _, idx in sorted(dec.subsets.items())]


def _subset_union(dec) -> Subset:
    parts = [idx for _, idx in sorted(dec.subsets.items())]
    if not parts:
        raise UsageError("this check needs named subsets in the input document")
    return Subset(dec.space, np.unique(np.concatenate(parts)))


def _run_check(name, dec, args):
    space = dec.space
    eps = args.epsilon
    thr = args.threshold
    cap = args.max_points if args.max_points else CENTER_CAP
    if name == "bt":
        return bounded_turning_report(space, epsilon=eps, threshold=thr, center_cap=cap)
    if name == "llc":
        return llc_check_report(space, epsilon=eps, threshold=thr, center_cap=cap)
    if name == "doubling":
        return doubling_report(space, threshold=thr, center_cap=cap)
    if name == "rel-doubling":
        subsets = _named_subsets(dec)
        if not subsets:
            raise UsageError("rel-doubling needs named subsets in the input document")
        frac = eps if eps is not None else 0.25
        if not 0 < frac < 1:
            raise UsageError("rel-doubling uses --epsilon as a fraction in (0, 1)")
        return relative_doubling_report(space, subsets, frac, threshold=thr, center_cap=cap)
    if name == "porosity":
        return porosity_report(space, _subset_union(dec), threshold=thr, center_cap=cap)
    if name == "rel-porosity":
        subsets = _named_subsets(dec)
        if not subsets:
            raise UsageError("rel-porosity needs named subsets in the input document")
        link = eps if eps is not None else default_epsilon(space)
        return relative_porosity_report(space, subsets, link, threshold=thr, center_cap=cap)
    if name == "ahlfors":
        return ahlfors_report(space)
    if name == "angle":
        subs = sorted(dec.subsets.items())
        if len(subs) < 2:
            raise UsageError("angle needs two named subsets in the input document")
        A = Subset(space, subs[0][1])
        B = Subset(space, subs[1][1])
        return angle_report(space, A, B, threshold=thr)
    if name == "perfect":
        return uniform_perfectness_report(space, _subset_union(dec), threshold=thr)
    raise UsageError(f"unknown check {name!r}")


def _write_fit_csv(report, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("log_r,log_n\n")
        for r, n in report.witnesses:
            fh.write(f"{math.log(r)!r},{math.log(n)!r}\n")


def _cmd_diagnose(args) -> int:
    doc = _read(args.input[0])
    _expect_kind(doc, "space", args.input[0])
    dec = serialize.decode_space(doc)
    names = _parse_checks(args.check)
    reports = []
    for name in names:
        try:
            reports.append(_run_check(name, dec, args))
        except ValueError as e:
            raise UsageError(f"check {name}: {e}")
    if args.csv:
        fits = [r for r in reports if r.name == "ahlfors-regularity"]
        if not fits:
            raise UsageError("--csv needs the ahlfors check")
        _write_fit_csv(fits[0], args.csv)
    inputs = {args.input[0]: serialize.document_digest(doc)}
    return 0 if _emit_report(reports, inputs, args.output) else 1


def _identity_or_spec(args, src, tgt):
    if len(args.input) > 2:
        doc = _read(args.input[2])
        _expect_kind(doc, "map_spec", args.input[2])
        spec = serialize.decode_map_spec(doc)
        image = spec.base_image
    else:
        if src.n != tgt.n:
            raise UsageError("sizes differ; supply a map_spec document as a third input")
        image = np.arange(src.n, dtype=np.int64)
    return PointMap(src, tgt, image)


def _cmd_distort(args) -> int:
    if len(args.input) < 2:
        raise UsageError("distort needs two space documents (-i source -i target)")
    docs = [_read(p) for p in args.input[:2]]
    for p, d in zip(args.input, docs):
        _expect_kind(d, "space", p)
    src = serialize.decode_space(docs[0]).space
    tgt = serialize.decode_space(docs[1]).space
    f = _identity_or_spec(args, src, tgt)
    triple_cap, quadruple_cap = TRIPLE_CAP, QUADRUPLE_CAP
    if args.max_points:
        m = args.max_points
        triple_cap = min(triple_cap, m * m * m)
        quadruple_cap = min(quadruple_cap, m * m * m * m)
    qs = qs_distortion(f, triple_cap=triple_cap, seed=args.seed)
    qm = qm_distortion(f, quadruple_cap=quadruple_cap, seed=args.seed)
    checks = []
    for label, prof in (("quasisymmetry", qs), ("quasi-moebius", qm)):
        slack = float(np.max(prof.s / prof.t)) if prof.t.size else 1.0
        checks.append(
            {
                "name": label,
                "pass": None if args.threshold is None else bool(slack <= args.threshold),
                "constants": {"samples": int(prof.t.size), "max_s_over_t": slack},
                "witnesses": [],
                "scale_range": [float(prof.t.min()), float(prof.t.max())] if prof.t.size else None,
            }
        )
    inputs = {p: serialize.document_digest(d) for p, d in zip(args.input, docs)}
    return 0 if _emit_report(checks, inputs, args.output) else 1


def _glued_pieces(spec, src, tgt):
    base_map = PointMap(src.bundle.base, tgt.bundle.base, spec.base_image)
    fillings = []
    for k, img in enumerate(spec.filling_images):
        tk = int(spec.component_map[k])
        if not 0 <= tk < len(tgt.bundle.components):
            raise UsageError(f"component_map[{k}] out of range")
        fillings.append(
            PointMap(src.bundle.components[k].filling, tgt.bundle.components[tk].filling, img)
        )
    return base_map, fillings


def _cmd_glue_map(args) -> int:
    if len(args.input) < 3:
        raise UsageError("glue-map needs -i source_sewn -i target_sewn -i map_spec")
    sdoc, tdoc, mdoc = (_read(p) for p in args.input[:3])
    _expect_kind(sdoc, "sewn", args.input[0])
    _expect_kind(tdoc, "sewn", args.input[1])
    _expect_kind(mdoc, "map_spec", args.input[2])
    src = serialize.decode_sewn(sdoc)
    tgt = serialize.decode_sewn(tdoc)
    spec = serialize.decode_map_spec(mdoc)
    inputs = {p: serialize.document_digest(d) for p, d in zip(args.input, (sdoc, tdoc, mdoc))}
    try:
        base_map, fillings = _glued_pieces(spec, src, tgt)
        glued = glue_maps(src, tgt, base_map, spec.component_map, fillings)
    except (CompatibilityError, ValueError) as e:
        witness = []
        if isinstance(e, CompatibilityError):
            witness = [{"component": e.component, "seam_point": e.seam_point}]
        checks = [
            {
                "name": "glue-compatibility",
                "pass": False,
                "constants": {},
                "witnesses": witness + [str(e)],
                "scale_range": None,
            }
        ]
        _emit_report(checks, inputs, args.output)
        return 1
    cert = certify_glued_qm(glued)
    prof = cert.global_profile
    slack = float(np.max(prof.s / prof.t)) if prof.t.size else 1.0
    out = serialize.encode_glued_map(glued)
    out["certification"] = serialize._plain(
        {
            "hypothesis_ok": cert.hypothesis_ok,
            "max_s_over_t": slack,
            "angles_source": cert.angles[0],
            "angles_target": cert.angles[1],
            "perfectness": cert.perfectness,
            "diam_ratios": cert.diam_ratios,
        }
    )
    if args.output:
        serialize.write_document(out, args.output)
        print(f"wrote glued_map document: {args.output}")
    checks = [
        {
            "name": "glue-compatibility",
            "pass": True,
            "constants": {"max_s_over_t": slack, "samples": int(prof.t.size)},
            "witnesses": [],
            "scale_range": None,
        },
        {
            "name": "glue-hypotheses",
            "pass": bool(cert.hypothesis_ok),
            "constants": {
                "min_angle": float(min(cert.angles[0] + cert.angles[1])),
                "max_perfectness": float(max(cert.perfectness[0] + cert.perfectness[1])),
                "min_diam_ratio": float(min(cert.diam_ratios[0] + cert.diam_ratios[1])),
            },
            "witnesses": [],
            "scale_range": None,
        },
    ]
    return 0 if _print_checks(checks) else 1


def _cmd_certify(args) -> int:
    doc = _read(args.input[0])
    _expect_kind(doc, "sewn", args.input[0])
    sewn = serialize.decode_sewn(doc)
    try:
        cert = certify_sewn(sewn)
    except ValueError as e:
        raise UsageError(f"certify: {e}")
    checks = list(cert.reports)
    summary = {
        "name": "certificate",
        "pass": bool(cert.passed),
        "constants": serialize._plain(cert.constants),
        "witnesses": [],
        "scale_range": None,
    }
    inputs = {args.input[0]: serialize.document_digest(doc)}
    return 0 if _emit_report(checks + [summary], inputs, args.output) else 1


# ---------------------------------------------------------------------------
# argument surface


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sewkit",
        description="Sew fillings onto finite metric spaces and certify the result.",
    )
    p.add_argument("--version", action="version", version=f"sewkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inputs=True, output=True):
        if inputs:
            sp.add_argument("-i", "--input", action="append", default=[], metavar="FILE")
        if output:
            sp.add_argument("-o", "--output", metavar="FILE")

    sp = sub.add_parser("validate", help="check the metric axioms of a space document")
    common(sp)

    sp = sub.add_parser("generate", help="emit a generator space or bundle document")
    sp.add_argument(
        "generator",
        choices=["interval", "circle", "disk", "carpet", "carpet-with-disks"],
    )
    sp.add_argument("--level", type=int, help="carpet subdivision level")
    sp.add_argument("--m", type=int, help="point count (interval, circle) or rim count (disk)")
    sp.add_argument("--k", type=int, help="disk ring count")
    sp.add_argument("--alpha", type=float, help="wrap the result in a snowflake metric")
    common(sp, inputs=False)

    sp = sub.add_parser("sew", help="sew a bundle document into a sewn-space document")
    common(sp)

    sp = sub.add_parser("sphericalize", help="invert a space document at a basepoint")
    sp.add_argument("--basepoint", type=int)
    common(sp)

    sp = sub.add_parser("diagnose", help="run geometric estimators on a space document")
    sp.add_argument("--check", action="append", metavar="NAME[,NAME...]")
    sp.add_argument("--epsilon", type=float, help="graph scale (bt, llc, rel-*)")
    sp.add_argument("--threshold", type=float, help="pass/fail cutoff where supported")
    sp.add_argument("--max-points", type=int, help="cap on scanned centers")
    sp.add_argument("--csv", metavar="FILE", help="write the (log r, log N) table")
    common(sp)

    sp = sub.add_parser("distort", help="empirical distortion of a map between spaces")
    sp.add_argument("--max-points", type=int, help="sample as if the spaces had this many points")
    sp.add_argument("--seed", type=int, default=0, help="stride phase for subsampling")
    sp.add_argument("--threshold", type=float, help="bound on max s/t for pass/fail")
    common(sp)

    sp = sub.add_parser("glue-map", help="assemble and certify a glued map between sewn spaces")
    common(sp)

    sp = sub.add_parser("certify", help="certify a sewn-space document")
    common(sp)
    return p


_COMMANDS = {
    "validate": _cmd_validate,
    "generate": _cmd_generate,
    "sew": _cmd_sew,
    "sphericalize": _cmd_sphericalize,
    "diagnose": _cmd_diagnose,
    "distort": _cmd_distort,
    "glue-map": _cmd_glue_map,
    "certify": _cmd_certify,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        _configure_threads()
        if args.command != "generate" and not getattr(args, "input", None):
            raise UsageError(f"{args.command} requires -i/--input")
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
