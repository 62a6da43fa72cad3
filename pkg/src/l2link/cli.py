"""Command line interface: ``l2link <command> [options]``.

Every command reads a JSON file (``-`` for stdin) and writes a JSON report to
stdout; diagnostics go to stderr.  Exit codes: 0 on success, 2 when the report
carries warnings, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import time
from fractions import Fraction

from . import __version__
from . import block_forms as bf
from . import boundary_pairs as bp
from . import circle_example as ce
from .blanchfield_invariants import NORMAL_TRACES, TraceSpec, invariant_report, signature_counts
from .laurent_linalg import LaurentMatrix, homology_presentation, torsion_decompose
from .linking_core import DualityPresentation, class_coordinates, gram_at_point, validate_presentation
from .scalars import ParseError, field, format_laurent, parse_laurent

log = logging.getLogger("l2link")

EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2


class InputError(Exception):
    """Invalid input file; the message names the offending location."""


def default_conductor():
    raw = os.environ.get("L2LINK_CONDUCTOR", "4")
    try:
        N = int(raw)
    except ValueError:
        raise InputError(f"L2LINK_CONDUCTOR must be an integer, got {raw!r}") from None
    return N


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------


class _Source:
    def __init__(self, path):
        self.path = path
        try:
            self.text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
        try:
            self.data = json.loads(self.text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
        if not isinstance(self.data, dict):
            raise InputError(f"{path}: top level must be a JSON object")

    def line_of(self, literal):
        idx = self.text.find(json.dumps(literal))
        return self.text.count("\n", 0, idx) + 1 if idx >= 0 else None

    def where(self, literal):
        line = self.line_of(literal)
        return f"{self.path}:{line}" if line else self.path

    def ctx(self):
        N = self.data.get("conductor", default_conductor())
        if not isinstance(N, int) or N < 4 or N % 4:
            raise InputError(f"{self.path}: conductor must be a positive multiple of 4, got {N!r}")
        return field(N)

    def matrix(self, ctx, key, value=None, ncols=None):
        rows = self.data.get(key) if value is None else value
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise InputError(f"{self.path}: {key} must be a list of rows")
        if rows and len({len(r) for r in rows}) != 1:
            raise InputError(f"{self.path}: rows of {key} have different lengths")
        out = []
        for i, r in enumerate(rows):
            row = []
            for j, entry in enumerate(r):
                text = str(entry)
                try:
                    row.append(parse_laurent(ctx, text))
                except ParseError as exc:
                    raise InputError(f"{self.where(entry)}: {key}[{i}][{j}]: {exc}") from None
            out.append(row)
        return LaurentMatrix.from_rows(ctx, out, ncols if not out else None)

    def vector(self, ctx, key, value):
        if not isinstance(value, list):
            raise InputError(f"{self.path}: {key} must be a list")
        out = []
        for j, entry in enumerate(value):
            try:
                out.append(parse_laurent(ctx, str(entry)))
            except ParseError as exc:
                raise InputError(f"{self.where(entry)}: {key}[{j}]: {exc}") from None
        return out

    def q_parity(self):
        q = self.data.get("q", 0)
        if not isinstance(q, int):
            raise InputError(f"{self.path}: q must be an integer")
        return q % 2


def _presentation(src, ctx):
    if "A" not in src.data or "H" not in src.data:
        raise InputError(f"{src.path}: a presentation needs matrices A and H")
    A = src.matrix(ctx, "A")
    H = src.matrix(ctx, "H", ncols=A.rows)
    if A.rows == 0 and A.cols == 0:
        H = LaurentMatrix.zeros(ctx, 0, 0)
    try:
        p = DualityPresentation(A, H, src.q_parity())
    except ValueError as exc:
        raise InputError(f"{src.path}: {exc}") from None
    rep = validate_presentation(p)
    if not rep:
        raise InputError(f"{src.path}: H A != eps A^dagger H^dagger: {rep.message}")
    return p


def _matrix_strings(M):
    return M.to_strings()


def _decomposition_dict(dec):
    return {
        "free_rank": dec.free_rank,
        "torsion": [{"point": a, "order": m, "count": cnt} for a, m, cnt in dec.blocks],
        "off_support_factor": format_laurent(dec.off_support_factor),
        "warnings": list(dec.warnings),
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_homology(args):
    src = _Source(args.file)
    ctx = src.ctx()
    out = {"command": "homology", "conductor": ctx.N}
    warnings = []
    if "boundaries" in src.data:
        mats = src.data["boundaries"]
        if not isinstance(mats, list) or not mats:
            raise InputError(f"{src.path}: boundaries must be a nonempty list of matrices")
        ds = [src.matrix(ctx, f"boundaries[{k}]", value=m) for k, m in enumerate(mats)]
        degrees = []
        for k in range(len(ds) + 1):
            d_out = ds[k - 1] if k >= 1 else None
            d_in = ds[k] if k < len(ds) else None
            try:
                P = homology_presentation(d_out, d_in)
            except ValueError as exc:
                raise InputError(f"{src.path}: degree {k}: {exc}") from None
            if P.cols == 0:
                entry = {"degree": k, "free_rank": P.rows, "torsion": [], "off_support_factor": "1", "warnings": []}
            else:
                entry = {"degree": k, **_decomposition_dict(torsion_decompose(P))}
            warnings += entry["warnings"]
            degrees.append(entry)
        out["degrees"] = degrees
    elif "A" in src.data:
        A = src.matrix(ctx, "A")
        entry = _decomposition_dict(torsion_decompose(A))
        warnings += entry["warnings"]
        out["presentation"] = entry
    else:
        raise InputError(f"{src.path}: expected boundaries or a presentation matrix A")
    out["warnings"] = warnings
    return out, (EXIT_WARN if warnings else EXIT_OK)


def _trace_summary(report, trace):
    if trace is None:
        return None
    if trace.is_normal:
        return {"trace": trace.value, "capacities": list(report.capacities[trace.value])}
    tsig = report.tsig_plus if trace is TraceSpec.DIXMIER_PLUS else report.tsig_minus
    return {"trace": trace.value, "tsig": tsig}


def cmd_invariants(args):
    src = _Source(args.file)
    ctx = src.ctx()
    p = _presentation(src, ctx)
    trace = TraceSpec.parse(args.trace) if args.trace else None
    dec = torsion_decompose(p.A)
    top, left, right, bottom = ce.square_maps(p)
    out = {
        "command": "invariants",
        "conductor": ctx.N,
        "q": p.q_parity,
        "square": {
            "top": _matrix_strings(top),
            "left": _matrix_strings(left),
            "right": _matrix_strings(right),
            "bottom": _matrix_strings(bottom),
        },
        "homology": _decomposition_dict(dec),
    }
    points = dec.points()
    if args.point is not None:
        if args.point % ctx.N not in points and not args.all_points:
            raise InputError(f"point {args.point} is not in the support {points}")
        points = [args.point % ctx.N]
    reports = []
    for a in points:
        rep = invariant_report(gram_at_point(p, a))
        d = rep.as_dict()
        d["blocks"] = [{"order": m, "count": cnt} for m, cnt in dec.blocks_at(a)]
        sel = _trace_summary(rep, trace)
        if sel is not None:
            d["selected"] = sel
        reports.append(d)
    out["points"] = reports
    out["warnings"] = list(dec.warnings)
    return out, (EXIT_WARN if dec.warnings else EXIT_OK)


def _block_form(src, data=None):
    data = src.data if data is None else data
    try:
        a = int(data.get("point", 0))
        blocks = tuple((int(k), int(s), int(m)) for k, s, m in data.get("blocks", []))
        return bf.BlockForm(a, blocks)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{src.path}: invalid block list: {exc}") from None


def _subobject(src, f, data):
    try:
        ex = {(int(k), int(s)): [None if e is None else Fraction(str(e)) for e in vals] for k, s, vals in data.get("exponents", [])}
        pairs = [tuple(int(x) for x in p) for p in data.get("pairs", [])]
        sub = bf.SubobjectSpec.build(ex, pairs)
        bf.validate_subobject(f, sub)
        return sub
    except (TypeError, ValueError) as exc:
        raise InputError(f"{src.path}: invalid subobject: {exc}") from None


def _blocks_report(f, sub=None):
    parts = bf.split(f)

    def part(d):
        return [{"side": side, "k": k, "count": m} for (side, k), m in sorted(d.items())]

    out = {
        "point": f.a,
        "blocks": [list(b) for b in f.blocks],
        "split": {"positive": part(parts.part(1)), "negative": part(parts.part(-1))},
        "capacities": {t.value: list(bf.capacity(f, t)) for t in NORMAL_TRACES},
        "tdim": {t.value: str(bf.tdim(f, t)) for t in (TraceSpec.DIXMIER_PLUS, TraceSpec.DIXMIER_MINUS)},
        "tsig": {t.value: bf.tsig(f, t) for t in (TraceSpec.DIXMIER_PLUS, TraceSpec.DIXMIER_MINUS)},
        "hyperbolic": bf.hyperbolic_test(f),
    }
    meta = bf.metabolizer(f)
    out["metabolizer"] = meta.as_dict()
    out["metabolizer_excess"] = {
        t.value: bf.excess(f, meta, t).as_dict() for t in (TraceSpec.DIXMIER_PLUS, TraceSpec.DIXMIER_MINUS)
    }
    if sub is not None:
        out["subobject"] = sub.as_dict()
        out["isotropic"] = bf.is_isotropic(f, sub)
        out["excess"] = {t.value: bf.excess(f, sub, t).as_dict() for t in (TraceSpec.DIXMIER_PLUS, TraceSpec.DIXMIER_MINUS)}
        if out["isotropic"]:
            out["induced"] = bf.induced_form(f, sub).as_dict()
    return out


def cmd_blocks(args):
    src = _Source(args.file)
    f = _block_form(src)
    sub = _subobject(src, f, src.data["subobject"]) if "subobject" in src.data else None
    out = {"command": "blocks", **_blocks_report(f, sub)}
    return out, EXIT_OK


def cmd_circle(args):
    src = _Source(args.file)
    items = src.data.get("cells", [])
    try:
        m = ce.SteppedCircleModule.from_spec(items)
        eps = Fraction(str(src.data.get("eps", 1)))
        fp, fm = ce.spectral_densities(m, eps)
        small, large = ce.split_excision(m, eps)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{src.path}: {exc}") from None
    out = {
        "command": "circle",
        "eps": str(eps),
        "excision": {"small": [[str(c.mu), str(c.f)] for c in small], "large": [[str(c.mu), str(c.f)] for c in large]},
        "F_plus": fp.as_dict(),
        "F_minus": fm.as_dict(),
        "capacities": [fp.capacity(), fm.capacity()],
    }
    if not m.profiles:
        out["cell_maps"] = [
            {"f": str(cm.cell.f), "maps": [str(x) for x in (cm.top, cm.left, cm.right, cm.bottom)], "commutes": cm.commutes()}
            for cm in ce.h0_presentation(m)
        ]
    return out, EXIT_OK


def _pair_from_source(src):
    ctx = src.ctx()
    q = src.q_parity()
    I = src.matrix(ctx, "I")
    Ld = src.data.get("L")
    if not isinstance(Ld, dict):
        raise InputError(f"{src.path}: L must be an object")
    if "blocks" in Ld:
        f = _block_form(src, Ld)
        sub = _subobject(src, f, src.data.get("X", {"exponents": [[k, s, [k] * m] for k, s, m in f.blocks]}))
        return bp.PairData(f, sub, I, q)
    A = src.matrix(ctx, "L.A", value=Ld.get("A"))
    H = src.matrix(ctx, "L.H", value=Ld.get("H"), ncols=A.rows)
    p = DualityPresentation(A, H, q + 1)
    rep = validate_presentation(p)
    if not rep:
        raise InputError(f"{src.path}: L: {rep.message}")
    a = int(Ld.get("point", 0))
    form = gram_at_point(p, a)
    X = []
    for j, vec in enumerate(src.data.get("X", [])):
        x = src.vector(ctx, f"X[{j}]", vec)
        try:
            X.append(class_coordinates(p, x, a))
        except ValueError as exc:
            raise InputError(f"{src.path}: X[{j}]: {exc}") from None
    return bp.PairData(form, X, I, q)


def cmd_pair_verify(args):
    src = _Source(args.file)
    pair = _pair_from_source(src)
    rep = bp.verify_theorem_4_2(pair)
    out = {"command": "pair-verify", **rep.as_dict()}
    return out, (EXIT_OK if not rep.errors else EXIT_ERROR)


def _parse_blocks_arg(text, a):
    blocks = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        parts = [x.strip() for x in chunk.split(",")]
        if len(parts) not in (2, 3):
            raise InputError(f"block {chunk!r} should read k,sign[,mult]")
        k = int(parts[0])
        sign = {"+": 1, "-": -1, "1": 1, "-1": -1, "+1": 1}.get(parts[1])
        if sign is None:
            raise InputError(f"block sign must be + or -, got {parts[1]!r}")
        blocks.append((k, sign, int(parts[2]) if len(parts) == 3 else 1))
    return bf.BlockForm(a, tuple(blocks))


def cmd_generate(args):
    N = args.conductor or default_conductor()
    if N < 4 or N % 4:
        raise InputError(f"conductor must be a positive multiple of 4, got {N}")
    ctx = field(N)
    rng = random.Random(args.seed)
    if args.kind == "circle":
        p = ce.circle_presentation(ctx)
        out = {
            "conductor": N,
            "q": 0,
            "boundaries": [p.A.to_strings()],
            "A": p.A.to_strings(),
            "H": p.H.to_strings(),
        }
        return out, EXIT_OK
    if args.kind == "blocks":
        f = _parse_blocks_arg(args.blocks or "1,+", args.point)
        p = bf.synthesize(f, args.q, ctx, rng=rng, scramble=args.scramble)
        out = {
            "conductor": N,
            "q": args.q % 2,
            "A": p.A.to_strings(),
            "H": p.H.to_strings(),
            "expected": f.as_dict(),
        }
        return out, EXIT_OK
    kind = "metabolic" if args.metabolic else ("zero" if args.zero else "mixed")
    inst = bp.random_pair_instance(rng, args.point % N, args.q, kind, ctx=ctx, level="block")
    f, sub = inst.pair.L, inst.pair.X
    p = bf.synthesize(f, (args.q + 1) % 2, ctx)
    out = {
        "conductor": N,
        "q": args.q % 2,
        "I": inst.pair.I.to_strings(),
        "L": {"point": f.a, "A": p.A.to_strings(), "H": p.H.to_strings()},
        "X": [[format_laurent(x) for x in v] for v in bp.subobject_vectors(f, sub, ctx)],
        "expected": inst.expected.as_dict(),
    }
    return out, EXIT_OK


def cmd_selftest(args):
    checks = {}
    ctx = field(4)
    p = ce.circle_presentation(ctx)
    rep = invariant_report(gram_at_point(p, 0))
    checks["circle"] = abs(rep.tsig_plus) == 1 and rep.tsig_plus == -invariant_report(gram_at_point(p.negated(), 0)).tsig_plus
    ok_rt = True
    for f in bf.enumerate_block_forms(1, 3):
        if f.is_empty():
            continue
        for q in (0, 1):
            got = signature_counts(gram_at_point(bf.synthesize(f, q, ctx), 1)).counts()
            ok_rt = ok_rt and got == f.counts()
    checks["round_trip"] = ok_rt
    inst = bp.random_pair_instance(random.Random(0), 0, 0, "mixed", ctx=ctx)
    checks["pair"] = bp.verify_theorem_4_2(inst.pair).congruent
    ok = all(checks.values())
    return {"command": "selftest", "checks": checks, "ok": ok}, (EXIT_OK if ok else EXIT_ERROR)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="l2link", description="Torsion linking forms over Laurent rings.")
    parser.add_argument("--version", action="version", version=f"l2link {__version__}")
    parser.add_argument("--deterministic", action="store_true", help="omit timing data; sort keys")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("homology", help="torsion decomposition of homology")
    p.add_argument("file")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("invariants", help="linking form invariants of a presentation")
    p.add_argument("file")
    p.add_argument("--trace", choices=[t.value for t in TraceSpec])
    p.add_argument("--point", type=int)
    p.add_argument("--all-points", action="store_true")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("blocks", help="block form calculus")
    p.add_argument("file")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("circle", help="circle spectral densities")
    p.add_argument("file")
    p.set_defaults(func=cmd_circle)

    p = sub.add_parser("pair-verify", help="compare induced and discriminant forms")
    p.add_argument("file")
    p.set_defaults(func=cmd_pair_verify)

    p = sub.add_parser("generate", help="emit ready-to-run input files")
    p.add_argument("kind", choices=["circle", "blocks", "pair"])
    p.add_argument("--blocks", help="e.g. '2,+;1,-' (k,sign[,mult] separated by ';')")
    p.add_argument("--point", type=int, default=0)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--conductor", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scramble", type=int, default=0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--metabolic", action="store_true")
    g.add_argument("--zero", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("selftest", help="quick internal consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s: %(message)s", stream=sys.stderr)
    start = time.perf_counter()
    try:
        out, code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.deterministic and args.command != "generate":
        out["elapsed_seconds"] = round(time.perf_counter() - start, 4)
    json.dump(out, sys.stdout, indent=2, sort_keys=args.deterministic)
    sys.stdout.write("\n")
    for w in out.get("warnings", []) or []:
        print(f"warning: {w}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
