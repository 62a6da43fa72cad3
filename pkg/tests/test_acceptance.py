"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
lines interleaved with pytest's own output; they are printed either way).
"""

import itertools
import json
import random
import time
from fractions import Fraction

import pytest

from l2link import block_forms as bf
from l2link.blanchfield_invariants import invariant_report, signature_counts
from l2link.boundary_pairs import PairData, hyperbolic_pair_presentation, random_pair_instance, verify_theorem_4_2
from l2link.circle_example import Profile, SteppedCircleModule, circle_capacities, spectral_densities
from l2link.cli import main
from l2link.laurent_linalg import LaurentMatrix, random_unimodular, smith_normal_form
from l2link.linking_core import (
    DualityPresentation,
    gram_at_point,
    linking_pairing,
    local_solution,
    pairing_from_solution,
    random_congruence,
)
from l2link.scalars import LaurentPoly, field, format_laurent, parse_laurent

from conftest import random_laurent

N = 4
NORMAL = ("interior", "terminal", "initial")
DIXMIER = ("dixmier+", "dixmier-")


def verdict(capsys, number, ok, detail=""):
    with capsys.disabled():
        print(f"\n[criterion {str(number):>3}] {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {number}: {detail}"


# ---------------------------------------------------------------------------
# The instance set shared by criteria 2 to 6 and 8
# ---------------------------------------------------------------------------


class Instance:
    def __init__(self, f, q, form, report):
        self.f = f
        self.q = q
        self.form = form
        self.report = report


def _run(f, q, ctx, rng):
    p = bf.synthesize(f, q, ctx, rng=rng, scramble=2)
    form = gram_at_point(p, f.a)
    return Instance(f, q, form, invariant_report(form))


@pytest.fixture(scope="module")
def roundtrip():
    ctx = field(N)
    rng = random.Random(2026)
    start = time.perf_counter()
    exhaustive = []
    for a in range(N):
        for q in (0, 1):
            for f in bf.enumerate_block_forms(a, 6):
                if not f.is_empty():
                    exhaustive.append(_run(f, q, ctx, rng))
    larger = []
    for _ in range(200):
        a, q = rng.randrange(N), rng.randint(0, 1)
        f = bf.random_block_form(a, rng, max_k=5, max_blocks=4, min_weight=7)
        larger.append(_run(f, q, ctx, rng))
    return exhaustive, larger, time.perf_counter() - start


def everything(roundtrip):
    exhaustive, larger, _ = roundtrip
    return exhaustive + larger


# ---------------------------------------------------------------------------
# 1. circle
# ---------------------------------------------------------------------------


def _cli_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_criterion_01_circle(capsys, tmp_path):
    ctx = field(N)
    start = time.perf_counter()
    code, data = _cli_json(capsys, ["generate", "circle"])
    path = tmp_path / "circle.json"
    path.write_text(json.dumps(data))
    code2, rep = _cli_json(capsys, ["--deterministic", "invariants", str(path), "--trace", "dixmier+"])
    flipped = dict(data, H=[[format_laurent(-parse_laurent(ctx, x)) for x in row] for row in data["H"]])
    fpath = tmp_path / "flipped.json"
    fpath.write_text(json.dumps(flipped))
    code3, frep = _cli_json(capsys, ["--deterministic", "invariants", str(fpath), "--trace", "dixmier+"])
    elapsed = time.perf_counter() - start

    expected = {"top": "t - 1", "left": "-(t + 1)/2", "right": "(t^-1 + 1)/2", "bottom": "t^-1 - 1"}
    maps_ok = all(rep["square"][key] == [[format_laurent(parse_laurent(ctx, text))]] for key, text in expected.items())
    blocks_ok = rep["homology"]["torsion"] == [{"point": 0, "order": 1, "count": 1}]
    (pt,) = rep["points"]
    (fpt,) = frep["points"]
    tsig, ftsig = pt["selected"]["tsig"], fpt["selected"]["tsig"]
    ok = (code, code2, code3) == (0, 0, 0) and maps_ok and blocks_ok and abs(tsig) == 1 and ftsig == -tsig and elapsed < 1
    verdict(capsys, 1, ok, f"maps={maps_ok} single order-1 block={blocks_ok} tsig={tsig} flipped={ftsig} time={elapsed:.2f}s")


def test_circle_map_oracle_strings_parse_equal():
    # the expected maps written in two equivalent ways normalize identically
    ctx = field(N)
    assert parse_laurent(ctx, "-(t + 1)/2") == parse_laurent(ctx, "-1/2*t - 1/2")
    assert parse_laurent(ctx, "(t^-1 + 1)/2") == parse_laurent(ctx, "1/2 + 1/2*t^-1")


# ---------------------------------------------------------------------------
# 2 to 6
# ---------------------------------------------------------------------------


def test_criterion_02_round_trip(capsys, roundtrip):
    exhaustive, larger, elapsed = roundtrip
    bad = [(i.f, i.q) for i in exhaustive + larger if i.report.invariants.counts() != i.f.counts()]
    ok = not bad and len(larger) == 200 and elapsed < 60
    verdict(capsys, 2, ok, f"{len(exhaustive)} exhaustive + {len(larger)} random, mismatches={len(bad)} time={elapsed:.1f}s")


def test_criterion_03_capacities_heights_vs_blocks(capsys, roundtrip):
    bad = 0
    items = everything(roundtrip)
    for inst in items:
        for t in NORMAL:
            if tuple(inst.report.capacities[t]) != bf.capacity(inst.f, t):
                bad += 1
    verdict(capsys, 3, bad == 0, f"{len(items)} instances x {len(NORMAL)} traces, mismatches={bad}")


def test_criterion_04_torsion_signature_identities(capsys, roundtrip):
    bad = 0
    items = everything(roundtrip)
    for inst in items:
        r = inst.report
        # block model tsig is independent of the computed counts
        plus, minus = bf.tsig(inst.f, "dixmier+"), bf.tsig(inst.f, "dixmier-")
        checks = [
            plus == r.sigma_ev + r.sigma_odd == r.tsig_plus,
            minus == r.sigma_ev - r.sigma_odd == r.tsig_minus,
            (plus + minus) % 2 == 0,
            plus + minus == 2 * r.sigma_ev,
        ]
        bad += not all(checks)
    verdict(capsys, 4, bad == 0, f"{len(items)} instances, failures={bad}")


def test_criterion_05_interior_capacity_is_height(capsys, roundtrip):
    bad = 0
    items = everything(roundtrip)
    for inst in items:
        inv = inst.report.invariants
        top = max((j for j in range(1, len(inv.n_plus) + 1) if inv.n(j, 1) + inv.n(j, -1) > 0), default=0)
        if max(inst.report.capacities["interior"]) != top or top != inst.f.height():
            bad += 1
    verdict(capsys, 5, bad == 0, f"{len(items)} instances, failures={bad}")


def test_criterion_06a_hyperbolic_capacities(capsys, roundtrip):
    exhaustive, _, _ = roundtrip
    hyper = [i for i in exhaustive if bf.hyperbolic_test(i.f)]
    bad = sum(1 for i in hyper for t in NORMAL if i.report.capacities[t][0] != i.report.capacities[t][1])
    verdict(capsys, "6a", bad == 0 and len(hyper) > 0, f"{len(hyper)} hyperbolic forms, failures={bad}")


def test_criterion_06b_direct_sums(capsys):
    ctx = field(N)
    rng = random.Random(64)
    bad_cap = bad_sig = 0
    for _ in range(200):
        a, q = rng.randrange(N), rng.randint(0, 1)
        f = bf.random_block_form(a, rng, max_k=4, max_blocks=3)
        g = bf.random_block_form(a, rng, max_k=4, max_blocks=3)
        pf = bf.synthesize(f, q, ctx, rng=rng, scramble=2)
        pg = bf.synthesize(g, q, ctx, rng=rng, scramble=2)
        ps = DualityPresentation(
            LaurentMatrix.block_diagonal(ctx, [pf.A, pg.A]), LaurentMatrix.block_diagonal(ctx, [pf.H, pg.H]), q
        )
        rf, rg, rs = (invariant_report(gram_at_point(p, a)) for p in (pf, pg, ps))
        for t in NORMAL:
            want = tuple(max(x, y) for x, y in zip(rf.capacities[t], rg.capacities[t]))
            if tuple(rs.capacities[t]) != want or want != bf.capacity(bf.perp_sum(f, g), t):
                bad_cap += 1
        if (rs.tsig_plus, rs.tsig_minus) != (rf.tsig_plus + rg.tsig_plus, rf.tsig_minus + rg.tsig_minus):
            bad_sig += 1
    verdict(capsys, "6b", bad_cap == 0 and bad_sig == 0, f"200 direct sums, max-rule failures={bad_cap} tsig additivity failures={bad_sig}")


# ---------------------------------------------------------------------------
# 7. Hermitian symmetry and well-definedness
# ---------------------------------------------------------------------------


def test_criterion_07_hermitian_suite(capsys, roundtrip):
    ctx = field(N)
    items = everything(roundtrip)
    sym_bad = 0
    for inst in items:
        form = inst.form
        sign = 1 if inst.q % 2 == 1 else -1
        for i in range(form.size):
            for j in range(form.size):
                rhs = form.gram[j][i].conj()
                if form.gram[i][j] != (rhs if sign > 0 else -rhs):
                    sym_bad += 1

    rng = random.Random(77)
    infl_bad = checked = 0
    for _ in range(30):
        a, q = rng.randrange(N), rng.randint(0, 1)
        f = bf.random_block_form(a, rng, max_k=3, max_blocks=3)
        p = bf.synthesize(f, q, ctx, rng=rng, scramble=2)
        form = gram_at_point(p, a)
        s = LaurentPoly.linear_root(ctx, a)
        for x in form.generators:
            m, u, den = local_solution(p, x, a)
            for y in form.generators:
                base = linking_pairing(p, x, y, a)
                for extra in (1, 2):
                    u2 = tuple((s ** extra) * v for v in u)
                    checked += 1
                    if pairing_from_solution(p, y, m + extra, u2, den, a) != base:
                        infl_bad += 1

    cong_bad = 0
    for _ in range(100):
        a, q = rng.randrange(N), rng.randint(0, 1)
        f = bf.random_block_form(a, rng, max_k=4, max_blocks=4)
        form = gram_at_point(bf.synthesize(f, q, ctx, rng=rng, scramble=1), a)
        moved = form.congruent_by(random_congruence(form, rng))
        if not moved.is_hermitian() or signature_counts(moved).counts() != f.counts():
            cong_bad += 1
    ok = sym_bad == 0 and infl_bad == 0 and cong_bad == 0 and checked > 0
    verdict(
        capsys,
        7,
        ok,
        f"symmetry failures={sym_bad} on {len(items)} forms; inflation failures={infl_bad}/{checked}; congruence failures={cong_bad}/100",
    )


# ---------------------------------------------------------------------------
# 8. excess
# ---------------------------------------------------------------------------


def _random_subobject(f, rng):
    counts = f.counts()
    ex = {key: [Fraction(rng.randint(0, 2 * key[0]), 2) for _ in range(m)] for key, m in counts.items()}
    pairs = []
    for (k, s), m in counts.items():
        if s > 0 and (k, -1) in counts and rng.random() < 0.5:
            ex[(k, 1)][0] = None
            ex[(k, -1)][0] = None
            pairs.append((k, 0, 0, rng.choice((1, -1))))
    return bf.SubobjectSpec.build(ex, pairs)


def metabolizers(f):
    """Every metabolizer of the block model: per k, some copies paired diagonally."""
    counts = f.counts()
    ks = sorted({k for k, _ in counts})
    options = []
    for k in ks:
        n = min(counts.get((k, 1), 0), counts.get((k, -1), 0))
        options.append([(k, p, ph) for p in range(n + 1) for ph in ((1, -1) if p else (1,))])
    for choice in itertools.product(*options):
        ex = {key: [Fraction(key[0], 2)] * m for key, m in counts.items()}
        pairs = []
        for k, p, ph in choice:
            for i in range(p):
                ex[(k, 1)][i] = None
                ex[(k, -1)][i] = None
                pairs.append((k, i, i, ph))
        yield bf.SubobjectSpec.build(ex, pairs)


def _definite(f, trace):
    parts = bf.split(f)
    return bf.tdim(parts.part(1), trace) == 0 or bf.tdim(parts.part(-1), trace) == 0


def test_criterion_08_excess_suite(capsys, roundtrip):
    rng = random.Random(88)
    bound_bad = 0
    for _ in range(300):
        f = bf.random_block_form(rng.randrange(N), rng, max_k=5, max_blocks=5)
        sub = _random_subobject(f, rng)
        for t in DIXMIER:
            rep = bf.excess(f, sub, t)
            if not 0 <= rep.excess <= min(rep.tdim_sub, rep.tdim_quotient):
                bound_bad += 1

    exhaustive, _, _ = roundtrip
    biconditional_bad = definite_bad = zero_excess_bad = n_meta = n_definite = n_zero = 0
    for inst in exhaustive:
        f = inst.f
        pipeline_tsig = {"dixmier+": inst.report.tsig_plus, "dixmier-": inst.report.tsig_minus}
        for sub in metabolizers(f):
            n_meta += 1
            if not bf.is_metabolizer(f, sub):
                biconditional_bad += 1
                continue
            for t in DIXMIER:
                rep = bf.excess(f, sub, t)
                if (rep.excess == 0) != (2 * rep.tdim_sub == rep.tdim_total):
                    biconditional_bad += 1
                if _definite(f, t):
                    n_definite += 1
                    if rep.excess != bf.tdim(f, t):
                        definite_bad += 1
                if rep.excess == 0:
                    n_zero += 1
                    if pipeline_tsig[t] != 0 or bf.tsig(f, t) != 0:
                        zero_excess_bad += 1
    ok = bound_bad == biconditional_bad == definite_bad == zero_excess_bad == 0 and n_definite and n_zero
    verdict(
        capsys,
        8,
        ok,
        f"bounds failures={bound_bad}/600; {n_meta} metabolizers: biconditional failures={biconditional_bad}, "
        f"definite max-excess failures={definite_bad}/{n_definite}, zero-excess tsig failures={zero_excess_bad}/{n_zero}",
    )


# ---------------------------------------------------------------------------
# 9. intersection form versus induced linking form
# ---------------------------------------------------------------------------


def _extra_discriminant(pair, a, ctx):
    p = hyperbolic_pair_presentation(ctx, a, 1, (pair.q_parity + 1) % 2)
    return PairData(pair.L, pair.X, LaurentMatrix.block_diagonal(ctx, [pair.I, p.H @ p.A]), pair.q_parity)


def test_criterion_09_induced_equals_discriminant(capsys):
    ctx = field(N)
    rng = random.Random(909)
    kinds = ["zero", "metabolic", "mixed"]
    bad = missed = controls = 0
    seen = set()
    for n in range(50):
        a, q, kind = rng.randrange(N), n % 2, kinds[n % 3]
        level = "block" if n % 4 == 3 else "algebraic"
        inst = random_pair_instance(rng, a, q, kind, ctx=ctx, level=level)
        seen.add(kind)
        rep = verify_theorem_4_2(inst.pair)
        want = {a: inst.expected.counts()} if inst.expected.counts() else {}
        if not rep.congruent or rep.induced != want or rep.discriminant != want:
            bad += 1
        # negative control: an extra hyperbolic summand in the intersection form
        controls += 1
        if verify_theorem_4_2(_extra_discriminant(inst.pair, a, ctx)).congruent:
            missed += 1
        # negative control: a generator that pairs nontrivially with itself
        if level == "algebraic" and inst.pair.L.size:
            e0 = [LaurentPoly.const(ctx, 1 if i == 0 else 0) for i in range(len(inst.pair.L.generators[0]))]
            controls += 1
            if verify_theorem_4_2(PairData(inst.pair.L, list(inst.pair.X) + [e0], inst.pair.I, q)).congruent:
                missed += 1
    ok = bad == 0 and missed == 0 and seen == set(kinds)
    verdict(capsys, 9, ok, f"50 instances, mismatches={bad}; negative controls missed={missed}/{controls}")


# ---------------------------------------------------------------------------
# 10. circle spectral densities
# ---------------------------------------------------------------------------


def elementary_pattern(k, sign, trace):
    """Capacities of the elementary block of size k and sign, written out by case."""
    odd = k % 2 == 1
    if trace == "interior":
        same, other = k, (k if odd else 0)
    elif trace == "terminal":
        same, other = (0 if odd else k), (k if odd else 0)
    else:
        same, other = k, 0
    return (same, other) if sign > 0 else (other, same)


def test_criterion_10_circle_densities(capsys):
    bad_profiles = 0
    for k in range(1, 6):
        for sign in (1, -1):
            for side, trace in (("both", "interior"), ("left", "terminal"), ("right", "initial")):
                m = SteppedCircleModule(profiles=(Profile(k, sign, side),))
                want = elementary_pattern(k, sign, trace)
                if circle_capacities(m) != want or bf.capacity(bf.BlockForm(0, ((k, sign, 1),)), trace) != want:
                    bad_profiles += 1

    rng = random.Random(1010)
    bad_steps = 0
    for _ in range(40):
        items = []
        for _ in range(rng.randint(1, 5)):
            mu = Fraction(rng.randint(1, 9), rng.randint(1, 4))
            if rng.random() < 0.6:
                f = f"{rng.choice(['', '-'])}{rng.randint(1, 5)}*pi/{rng.randint(6, 13)}"
            else:
                f = f"{rng.choice(['', '-'])}{rng.randint(1, 9)}/{rng.randint(10, 40)}"
            items.append({"mu": str(mu), "f": f})
        m = SteppedCircleModule.from_spec(items)
        eps = Fraction(rng.randint(1, 3))
        fp, fm = spectral_densities(m, eps)
        gp, gm = spectral_densities(m.negated(), eps)
        for germ in (fp, fm):
            values = [v for _, v in germ.breakpoints()]
            if any(x > y for x, y in zip(values, values[1:])) or any(w <= 0 for _, w in germ.steps):
                bad_steps += 1
        if fp.breakpoints() != gm.breakpoints() or fm.breakpoints() != gp.breakpoints():
            bad_steps += 1
        if circle_capacities(m) != (0, 0):
            bad_steps += 1
    ok = bad_profiles == 0 and bad_steps == 0
    verdict(capsys, 10, ok, f"30 profile cases failures={bad_profiles}; 40 step modules failures={bad_steps}")


# ---------------------------------------------------------------------------
# 11. Smith normal form
# ---------------------------------------------------------------------------


def _structured(ctx, rng, rows, cols):
    """A matrix with repeated factors, so the invariant factors are nontrivial."""
    factors = [parse_laurent(ctx, x) for x in ("t - 1", "t + 1", "t^2 + 1", "t - 2", "2*t - 1")]
    diag = []
    for _ in range(min(rows, cols)):
        d = LaurentPoly.const(ctx, 1)
        for _ in range(rng.randint(0, 2)):
            d = d * rng.choice(factors)
        diag.append(d if rng.random() > 0.15 else LaurentPoly.zero(ctx))
    D = LaurentMatrix.diagonal(ctx, diag, rows, cols)
    P, _ = random_unimodular(ctx, rows, rng, steps=2)
    Q, _ = random_unimodular(ctx, cols, rng, steps=2)
    return P @ D @ Q


def test_criterion_11_smith_normal_form(capsys):
    ctx = field(N)
    rng = random.Random(1111)
    start = time.perf_counter()
    bad = 0
    for n in range(500):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        if n % 2:
            A = _structured(ctx, rng, rows, cols)
        else:
            A = LaurentMatrix.from_rows(ctx, [[random_laurent(ctx, rng, max_deg=4) for _ in range(cols)] for _ in range(rows)])
        snf = smith_normal_form(A)
        diag = snf.diagonal
        chain = all(b.is_zero() if a.is_zero() else a.divides(b) for a, b in zip(diag, diag[1:]))
        units = snf.U.determinant().is_unit() and snf.V.determinant().is_unit()
        if snf.U @ A @ snf.V != snf.D() or not chain or not units:
            bad += 1
    elapsed = time.perf_counter() - start
    verdict(capsys, 11, bad == 0 and elapsed < 120, f"500 matrices, failures={bad} time={elapsed:.1f}s")
