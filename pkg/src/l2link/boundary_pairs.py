"""Boundary pairs: a linking form ``L`` on a torsion module ``T``, an isotropic
submodule ``X`` and an intersection matrix ``I``.

The expected relation is that ``X^perp / X`` with the induced form is
congruent to the discriminant form of ``I``; congruence is decided by
comparing all counts ``n_j^+-(c)``.

Forms can be given algebraically (:class:`TorsionLinkingForm` and generator
vectors, each a list of Laurent coefficients in the generator basis) or at the
block level (:class:`BlockForm` and :class:`SubobjectSpec`).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from . import block_forms as bf
from . import kmat
from .blanchfield_invariants import AdicInvariants, KModel, counts_from_model, signature_counts
from .laurent_linalg import LaurentMatrix, random_unimodular
from .linking_core import DualityPresentation, TorsionLinkingForm, discriminant_form, linking_pairing
from .scalars import LaurentPoly, field

__all__ = [
    "PairData",
    "InducedForm",
    "InducedDiscriminantReport",
    "MetabolizerPairReport",
    "block_linking_form",
    "subobject_vectors",
    "annihilator",
    "isotropy_check",
    "induced_form",
    "verify_theorem_4_2",
    "verify_theorem_5_1",
    "hyperbolic_pair_presentation",
    "unimodular_hermitian",
    "random_pair_instance",
]


# ---------------------------------------------------------------------------
# Block forms as explicit linking forms
# ---------------------------------------------------------------------------


def block_linking_form(f, link_parity, ctx=None):
    """The synthesized form of ``f`` with one generator per copy, in copy order."""
    ctx = ctx or field(4)
    p = bf.synthesize(f, link_parity, ctx)
    n = p.A.rows
    zero, one = LaurentPoly.zero(ctx), LaurentPoly.const(ctx, 1)
    gens = [tuple(one if r == i else zero for r in range(n)) for i in range(n)]
    orders = [k for k, _, m in f.blocks for _ in range(m)]
    gram = tuple(tuple(linking_pairing(p, gi, gj, f.a) for gj in gens) for gi in gens)
    return TorsionLinkingForm(ctx.N, f.a, tuple(gens), tuple(orders), gram, p.q_parity)


def subobject_vectors(f, sub, ctx=None):
    """Generators (in the basis of :func:`block_linking_form`) of a graded subobject.

    Only integral exponents have an algebraic counterpart.
    """
    ctx = ctx or field(4)
    bf.validate_subobject(f, sub)
    offsets, pos = {}, 0
    for k, s, m in f.blocks:
        offsets[(k, s)] = pos
        pos += m
    n = pos
    s_poly = LaurentPoly.linear_root(ctx, f.a)
    zero, one = LaurentPoly.zero(ctx), LaurentPoly.const(ctx, 1)
    out = []
    for key, vals in sub.exponents:
        for idx, e in enumerate(vals):
            if e is None:
                continue
            if e.denominator != 1:
                raise ValueError(f"exponent {e} is not integral; no algebraic counterpart")
            if e == key[0]:
                continue
            v = [zero] * n
            v[offsets[key] + idx] = s_poly ** int(e)
            out.append(v)
    for k, ip, im, phase in sub.pairs:
        v = [zero] * n
        v[offsets[(k, 1)] + ip] = one
        v[offsets[(k, -1)] + im] = LaurentPoly.const(ctx, phase)
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# Algebraic level
# ---------------------------------------------------------------------------


class _Model:
    """A :class:`KModel` with helpers for submodules given by generators."""

    def __init__(self, form):
        self.form = form
        self.km = KModel(form)
        self.ctx = self.km.ctx

    def span(self, gens):
        return self.km.span_of([self.km.vector_of(g) for g in gens])

    def perp(self, basis):
        km = self.km
        rows = []
        for x in basis:
            xc = [v.conjugate() for v in x]
            for j in range(1, km.height + 1):
                F = km.forms[j - 1]
                rows.append([sum((xc[u] * F[u][v] for u in range(km.dim) if not xc[u].is_zero()), self.ctx.zero()) for v in range(km.dim)])
        return kmat.column_basis(kmat.nullspace(rows, km.dim, self.ctx), self.ctx)

    def is_isotropic(self, basis):
        return all(self.km.pairs_to_zero(x, y) for x in basis for y in basis)

    def contains(self, big, small):
        return kmat.rank(big + small) == kmat.rank(big) if small else True

    def quotient_filtration(self, perp, sub):
        """``P_j = {v in perp : s^j v in sub}`` for ``j = 1..height``."""
        km = self.km
        out = []
        for j in range(1, km.height + 1):
            S = km.shift_matrix(j)
            images = [[sum((S[r][c] * v[c] for c in range(km.dim) if not v[c].is_zero()), self.ctx.zero()) for r in range(km.dim)] for v in perp]
            if not perp:
                out.append([])
                continue
            # columns: images of perp vectors, then -sub vectors
            M = [[img[r] for img in images] + [-w[r] for w in sub] for r in range(km.dim)]
            sols = kmat.nullspace(M, len(perp) + len(sub), self.ctx)
            vecs = []
            for sol in sols:
                v = [self.ctx.zero()] * km.dim
                for coef, b in zip(sol[: len(perp)], perp):
                    if not coef.is_zero():
                        v = [x + coef * y for x, y in zip(v, b)]
                vecs.append(v)
            out.append(kmat.column_basis(vecs, self.ctx))
        return out


@dataclass(frozen=True)
class InducedForm:
    """Invariants of the form induced on ``X^perp / X`` at one point."""

    a: int
    dimension: int
    invariants: AdicInvariants

    def counts(self):
        return self.invariants.counts()


def _is_block(L):
    return isinstance(L, bf.BlockForm)


def annihilator(L, X):
    """``X^perp``: a :class:`SubobjectSpec` for block forms, else a K-basis."""
    if _is_block(L):
        return bf.annihilator(L, X)
    m = _Model(L)
    return m.perp(m.span(X))


def isotropy_check(L, X):
    if _is_block(L):
        return bf.is_isotropic(L, X)
    m = _Model(L)
    return m.is_isotropic(m.span(X))


def induced_form(L, X):
    """The form on ``X^perp / X``: a :class:`BlockForm` or an :class:`InducedForm`."""
    if _is_block(L):
        return bf.induced_form(L, X)
    m = _Model(L)
    sub = m.span(X)
    if not m.is_isotropic(sub):
        raise ValueError("X is not isotropic")
    perp = m.perp(sub)
    P = m.quotient_filtration(perp, sub)
    forms, dims, plus, minus = counts_from_model(m.km, P)
    dims = tuple(d - len(sub) for d in dims)
    return InducedForm(L.a, len(perp) - len(sub), AdicInvariants(L.a, forms, dims, plus, minus))


# ---------------------------------------------------------------------------
# Checks relating the linking form and the intersection form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairData:
    """``L`` per point (a form or a dict ``{a: form}``), ``X`` likewise, and ``I``.

    ``I`` satisfies ``I = (-1)^q I^dagger``; the linking forms have parity
    ``q + 1``.
    """

    L: object
    X: object
    I: LaurentMatrix
    q_parity: int

    def forms(self):
        if isinstance(self.L, dict):
            return dict(self.L), dict(self.X)
        a = self.L.a
        return {a: self.L}, {a: self.X}


@dataclass(frozen=True)
class InducedDiscriminantReport:
    congruent: bool
    induced: dict
    discriminant: dict
    witness: tuple | None = None
    errors: tuple = ()

    def as_dict(self):
        def enc(d):
            return {str(a): {f"{k},{'+' if s > 0 else '-'}": n for (k, s), n in sorted(c.items())} for a, c in sorted(d.items())}

        out = {
            "congruent": self.congruent,
            "induced": enc(self.induced),
            "discriminant": enc(self.discriminant),
            "errors": list(self.errors),
        }
        if self.witness is not None:
            a, k, s, ni, nd = self.witness
            out["witness"] = {"point": a, "k": k, "sign": s, "induced": ni, "discriminant": nd}
        return out


def _counts_of(L, X):
    ind = induced_form(L, X)
    return ind.counts()


def verify_theorem_4_2(pair):
    """Compare the induced form on ``X^perp/X`` with the discriminant form of ``I``."""
    errors = []
    Ls, Xs = pair.forms()
    induced = {}
    for a, L in Ls.items():
        if not _is_block(L) and L.q_parity != (pair.q_parity + 1) % 2:
            errors.append(f"linking form at point {a} has parity {L.q_parity}, expected {(pair.q_parity + 1) % 2}")
            continue
        try:
            if not isotropy_check(L, Xs[a]):
                errors.append(f"X is not isotropic at point {a}")
                continue
            induced[a] = _counts_of(L, Xs[a])
        except ValueError as exc:
            errors.append(f"point {a}: {exc}")
    try:
        disc = {a: signature_counts(form).counts() for a, form in discriminant_form(pair.I, pair.q_parity).items()}
    except ValueError as exc:
        errors.append(f"intersection matrix: {exc}")
        disc = {}
    if errors:
        return InducedDiscriminantReport(False, induced, disc, None, tuple(errors))
    witness = None
    for a in sorted(set(induced) | set(disc)):
        ci, cd = induced.get(a, {}), disc.get(a, {})
        for key in sorted(set(ci) | set(cd)):
            if ci.get(key, 0) != cd.get(key, 0):
                witness = (a, key[0], key[1], ci.get(key, 0), cd.get(key, 0))
                break
        if witness:
            break
    induced = {a: c for a, c in induced.items() if c}
    disc = {a: c for a, c in disc.items() if c}
    return InducedDiscriminantReport(witness is None, induced, disc, witness, ())


@dataclass(frozen=True)
class MetabolizerPairReport:
    plus_is_metabolizer: bool
    minus_is_metabolizer: bool
    intersection_zero: bool
    sum_is_whole: bool
    hyperbolic: bool
    messages: tuple = dc_field(default=())

    @property
    def complementary(self):
        return self.plus_is_metabolizer and self.minus_is_metabolizer and self.intersection_zero and self.sum_is_whole

    @property
    def consistent(self):
        """Complementary metabolizers must force a hyperbolic form."""
        return self.hyperbolic or not self.complementary

    def as_dict(self):
        return {
            "plus_is_metabolizer": self.plus_is_metabolizer,
            "minus_is_metabolizer": self.minus_is_metabolizer,
            "intersection_zero": self.intersection_zero,
            "sum_is_whole": self.sum_is_whole,
            "complementary": self.complementary,
            "hyperbolic": self.hyperbolic,
            "consistent": self.consistent,
            "messages": list(self.messages),
        }


def _block_complement(f, xp, xm):
    """``(intersection_zero, sum_is_whole)`` for graded subobjects with equal pairings."""
    pp = {p[:3]: p[3] for p in xp.pairs}
    pm = {p[:3]: p[3] for p in xm.pairs}
    if set(pp) != set(pm):
        return None
    inter = all(pp[key] != pm[key] for key in pp)
    whole = inter
    ep, em = xp.exponent_map(), xm.exponent_map()
    for key in ep:
        k = key[0]
        for a, b in zip(ep[key], em[key]):
            if a is None:
                continue
            inter = inter and max(a, b) == k
            whole = whole and min(a, b) == 0
    return inter, whole


def verify_theorem_5_1(L, X_plus, X_minus):
    """Check that ``X_+-`` are complementary metabolizers and that ``L`` is hyperbolic."""
    if _is_block(L):
        mp_ = bf.is_isotropic(L, X_plus) and bf.is_metabolizer(L, X_plus)
        mm_ = bf.is_isotropic(L, X_minus) and bf.is_metabolizer(L, X_minus)
        hyper = bf.hyperbolic_test(L)
        res = _block_complement(L, X_plus, X_minus)
        if res is not None:
            return MetabolizerPairReport(mp_, mm_, res[0], res[1], hyper)
        form = block_linking_form(L, 0)
        return verify_theorem_5_1(form, subobject_vectors(L, X_plus), subobject_vectors(L, X_minus))
    m = _Model(L)
    sp, sm = m.span(X_plus), m.span(X_minus)
    meta_p = m.is_isotropic(sp) and len(m.perp(sp)) == len(sp)
    meta_m = m.is_isotropic(sm) and len(m.perp(sm)) == len(sm)
    inter = not kmat.intersect(sp, sm, m.km.dim, m.ctx)
    whole = kmat.rank(sp + sm) == m.km.dim if (sp or sm) else m.km.dim == 0
    counts = signature_counts(L).counts()
    hyper = all(counts.get((k, 1), 0) == counts.get((k, -1), 0) for k, _ in counts)
    return MetabolizerPairReport(meta_p, meta_m, inter, whole, hyper)


# ---------------------------------------------------------------------------
# Instance generators
# ---------------------------------------------------------------------------


def hyperbolic_pair_presentation(ctx, a, k, link_parity):
    """``A = diag(s^k, s^k)`` with a unimodular ``H``; the form is ``L_{k,+} + L_{k,-}``.

    The first generator spans a metabolizer.
    """
    s = LaurentPoly.linear_root(ctx, a)
    eps = 1 if link_parity % 2 == 1 else -1
    # x = eps * conj(s)^k / s^k = eps * (-1)^k (t c)^-k
    x = LaurentPoly.monomial(ctx, -k, ctx.zeta(-a * k) * (eps * (-1) ** k))
    zero, one = LaurentPoly.zero(ctx), LaurentPoly.const(ctx, 1)
    A = LaurentMatrix.diagonal(ctx, [s ** k, s ** k])
    H = LaurentMatrix.from_rows(ctx, [[zero, x], [one, zero]])
    return DualityPresentation(A, H, link_parity)


def unimodular_hermitian(ctx, n, q_parity, rng):
    """A random invertible ``(-1)^q``-Hermitian matrix over ``Lambda``."""
    blocks = []
    zero, one = LaurentPoly.zero(ctx), LaurentPoly.const(ctx, 1)
    sign = 1 if q_parity % 2 == 0 else -1
    left = n
    while left:
        if left >= 2 and rng.random() < 0.5:
            blocks.append(LaurentMatrix.from_rows(ctx, [[zero, one], [LaurentPoly.const(ctx, sign), zero]]))
            left -= 2
        else:
            u = rng.choice((1, -1))
            val = LaurentPoly.const(ctx, u) if sign > 0 else LaurentPoly.const(ctx, ctx.i * u)
            blocks.append(LaurentMatrix.from_rows(ctx, [[val]]))
            left -= 1
    return LaurentMatrix.block_diagonal(ctx, blocks)


def _congruence(I, rng, steps):
    P, _ = random_unimodular(I.ctx, I.rows, rng, steps=steps)
    return P.dagger() @ I @ P


@dataclass(frozen=True)
class PairInstance:
    pair: PairData
    expected: bf.BlockForm
    kind: str


def random_pair_instance(rng, a=0, q_parity=0, kind="mixed", ctx=None, level="algebraic", scramble=3):
    """A pair whose discriminant form is known by construction.

    ``kind`` is 'zero' (``X = 0``), 'metabolic' (``I`` unimodular and ``X`` a
    metabolizer) or 'mixed'.  ``level`` selects algebraic or block-level
    ``L``/``X``.
    """
    ctx = ctx or field(4)
    link = (q_parity + 1) % 2
    disc_blocks, i_blocks = [], []
    if kind in ("zero", "mixed"):
        for _ in range(rng.randint(1, 2)):
            k = rng.randint(1, 3)
            if k % 2 == 0 and rng.random() < 0.5:
                sign = rng.choice((1, -1))
                A, h = bf.block_entry(ctx, a, k, sign, link)
                i_blocks.append(LaurentMatrix.from_rows(ctx, [[h * A]]))
                disc_blocks += [(k, sign, 1)]
            else:
                p = hyperbolic_pair_presentation(ctx, a, k, link)
                i_blocks.append(p.H @ p.A)
                disc_blocks += [(k, 1, 1), (k, -1, 1)]
    meta_blocks = []
    if kind in ("metabolic", "mixed"):
        for _ in range(rng.randint(1, 2)):
            k = rng.randint(1, 3)
            if k % 2 == 0 and rng.random() < 0.5:
                meta_blocks.append(("even", k, rng.choice((1, -1))))
            else:
                meta_blocks.append(("pair", k, rng.choice((1, -1))))
        n_uni = rng.randint(1, 2)
        i_blocks.append(unimodular_hermitian(ctx, n_uni, q_parity, rng))
    I = LaurentMatrix.block_diagonal(ctx, i_blocks)
    if scramble:
        I = _congruence(I, rng, scramble)
    blocks = list(disc_blocks)
    for typ, k, s in meta_blocks:
        blocks += [(k, s, 1)] if typ == "even" else [(k, 1, 1), (k, -1, 1)]
    f = bf.BlockForm(a, tuple(blocks))
    # X: the discriminant copies get exponent k (zero), metabolic copies a metabolizer
    counts = f.counts()
    ex = {key: [None] * counts[key] for key in counts}
    used = {key: 0 for key in counts}
    pairs = []
    for k, s, _ in disc_blocks:
        ex[(k, s)][used[(k, s)]] = Fraction(k)
        used[(k, s)] += 1
    for typ, k, s in meta_blocks:
        if typ == "even":
            ex[(k, s)][used[(k, s)]] = Fraction(k, 2)
            used[(k, s)] += 1
        else:
            pairs.append((k, used[(k, 1)], used[(k, -1)], s))
            used[(k, 1)] += 1
            used[(k, -1)] += 1
    sub = bf.SubobjectSpec.build(ex, pairs)
    expected = bf.BlockForm(a, tuple(disc_blocks))
    if level == "block":
        return PairInstance(PairData(f, sub, I, q_parity), expected, kind)
    form = block_linking_form(f, link, ctx)
    X = subobject_vectors(f, sub, ctx)
    return PairInstance(PairData(form, X, I, q_parity), expected, kind)
