"""Orthogonal sums of the elementary torsion forms ``L_{k,+-}`` at one point.

``L_{k,e}`` is the form ``e * tau^k`` on a small interval around ``c``, where
``tau`` is the local coordinate.  On the right of ``c`` (``tau > 0``) it has
sign ``e``; on the left it has sign ``e * (-1)^k``.  Each block therefore
contributes one half-block on each side, and every invariant below is read off
the resulting multisets of half-blocks.

Subobjects are graded: for a copy of ``L_{k,e}`` the exponent ``x`` (a
multiple of 1/2 in ``[0, k]``) stands for ``Y = tau^x X``, so that ``Y`` is of
type ``tau^(k-x)`` and ``X / Y`` of type ``tau^x``.  A copy of ``L_{k,+}`` and
one of ``L_{k,-}`` may instead be joined by a graph subobject
``{(v, phase * v)}``, ``phase = +-1``.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .blanchfield_invariants import TraceSpec
from .laurent_linalg import LaurentMatrix, random_unimodular
from .linking_core import DualityPresentation
from .scalars import LaurentPoly, field

__all__ = [
    "BlockForm",
    "SplitParts",
    "SubobjectSpec",
    "ExcessReport",
    "TraceSpec",
    "perp_sum",
    "mirror",
    "split",
    "capacity",
    "tdim",
    "tsig",
    "hyperbolic_test",
    "metabolizer",
    "annihilator",
    "is_isotropic",
    "is_metabolizer",
    "induced_form",
    "excess",
    "synthesize",
    "block_entry",
    "enumerate_block_forms",
    "random_block_form",
]

RIGHT, LEFT = "right", "left"


@dataclass(frozen=True)
class BlockForm:
    """``blocks`` is a sorted tuple of ``(k, sign, multiplicity)``."""

    a: int
    blocks: tuple = ()

    def __post_init__(self):
        acc = Counter()
        for k, sign, mult in self.blocks:
            if k < 1 or sign not in (1, -1) or mult < 0:
                raise ValueError(f"invalid block {(k, sign, mult)}")
            acc[(int(k), int(sign))] += int(mult)
        norm = tuple(sorted((k, s, m) for (k, s), m in acc.items() if m > 0))
        object.__setattr__(self, "blocks", norm)

    @classmethod
    def from_counts(cls, a, counts):
        return cls(a, tuple((k, s, m) for (k, s), m in counts.items()))

    def counts(self):
        return {(k, s): m for k, s, m in self.blocks}

    def multiplicity(self, k, sign):
        return self.counts().get((k, sign), 0)

    def copies(self):
        """Every copy as ``(k, sign, index)``."""
        return [(k, s, i) for k, s, m in self.blocks for i in range(m)]

    def total(self):
        return sum(m for _, _, m in self.blocks)

    def weight(self):
        return sum(k * m for k, _, m in self.blocks)

    def height(self):
        return max((k for k, _, _ in self.blocks), default=0)

    def is_empty(self):
        return not self.blocks

    def as_dict(self):
        return {"point": self.a, "blocks": [list(b) for b in self.blocks]}


def perp_sum(f, g):
    if f.a != g.a:
        raise ValueError(f"block forms at different points ({f.a} and {g.a})")
    return BlockForm(f.a, f.blocks + g.blocks)


def mirror(f):
    """All signs flipped (the form ``-L``)."""
    return BlockForm(f.a, tuple((k, -s, m) for k, s, m in f.blocks))


@dataclass(frozen=True)
class SplitParts:
    """Half-block multisets ``{(side, k): multiplicity}`` of ``X_+`` and ``X_-``."""

    positive: tuple
    negative: tuple

    def part(self, sign):
        return dict(self.positive if sign > 0 else self.negative)

    def total(self):
        return sum(m for _, m in self.positive) + sum(m for _, m in self.negative)


def _freeze(counter):
    return tuple(sorted((key, m) for key, m in counter.items() if m))


def split(f):
    pos, neg = Counter(), Counter()
    for k, s, m in f.blocks:
        (pos if s > 0 else neg)[(RIGHT, k)] += m
        left_sign = s * (-1) ** k
        (pos if left_sign > 0 else neg)[(LEFT, k)] += m
    return SplitParts(_freeze(pos), _freeze(neg))


def _sides(trace):
    trace = TraceSpec.parse(trace)
    return {
        TraceSpec.INTERIOR: (RIGHT, LEFT),
        TraceSpec.TERMINAL: (LEFT,),
        TraceSpec.INITIAL: (RIGHT,),
        TraceSpec.DIXMIER_PLUS: (RIGHT,),
        TraceSpec.DIXMIER_MINUS: (LEFT,),
    }[trace]


def capacity(f, trace):
    """``(c_plus, c_minus)``: largest ``k`` among visible half-blocks of each part."""
    trace = TraceSpec.parse(trace)
    if not trace.is_normal:
        raise ValueError("capacity is defined here for normal traces only")
    sides = _sides(trace)
    parts = split(f)
    out = []
    for sign in (1, -1):
        out.append(max((k for (side, k), m in parts.part(sign).items() if side in sides and m), default=0))
    return tuple(out)


def tdim(obj, trace):
    """Torsion dimension of a block form or of one part (dict) of a split.

    Normal traces give 0; a Dixmier trace counts the half-blocks on its side.
    """
    trace = TraceSpec.parse(trace)
    if trace.is_normal:
        return Fraction(0)
    side = _sides(trace)[0]
    if isinstance(obj, BlockForm):
        return Fraction(obj.total())
    if isinstance(obj, SplitParts):
        raise TypeError("pass one part of the split, e.g. parts.part(+1)")
    return Fraction(sum(m for (s, _), m in dict(obj).items() if s == side))


def tsig(f, trace):
    trace = TraceSpec.parse(trace)
    if trace.is_normal:
        raise ValueError("torsion signature needs a Dixmier trace")
    parts = split(f)
    return int(tdim(parts.part(1), trace) - tdim(parts.part(-1), trace))


def hyperbolic_test(f):
    counts = f.counts()
    keys = {k for k, _ in counts}
    return all(counts.get((k, 1), 0) == counts.get((k, -1), 0) for k in keys)


# ---------------------------------------------------------------------------
# Subobjects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubobjectSpec:
    """Graded subobject of a :class:`BlockForm`.

    ``exponents[(k, sign)]`` lists one exponent per copy (``None`` for a copy
    used by a pair); ``pairs`` holds ``(k, plus_index, minus_index, phase)``.
    """

    exponents: tuple = ()
    pairs: tuple = ()

    @classmethod
    def build(cls, exponents, pairs=()):
        ex = tuple(sorted((key, tuple(None if e is None else Fraction(e) for e in vals)) for key, vals in dict(exponents).items()))
        return cls(ex, tuple(sorted(tuple(p) for p in pairs)))

    def exponent_map(self):
        return dict(self.exponents)

    def as_dict(self):
        return {
            "exponents": [[k, s, [None if e is None else str(e) for e in vals]] for (k, s), vals in self.exponents],
            "pairs": [list(p) for p in self.pairs],
        }


def whole(f):
    return SubobjectSpec.build({(k, s): [0] * m for k, s, m in f.blocks})


def zero_sub(f):
    return SubobjectSpec.build({(k, s): [k] * m for k, s, m in f.blocks})


def validate_subobject(f, sub):
    ex = sub.exponent_map()
    counts = f.counts()
    if set(ex) != set(counts):
        raise ValueError("subobject keys do not match the block form")
    used = set()
    for k, ip, im, phase in sub.pairs:
        if phase not in (1, -1):
            raise ValueError(f"pair phase must be +-1, got {phase}")
        for key, idx in (((k, 1), ip), ((k, -1), im)):
            if key not in counts or not 0 <= idx < counts[key]:
                raise ValueError(f"pair refers to a missing copy {key}[{idx}]")
            if (key, idx) in used:
                raise ValueError(f"copy {key}[{idx}] used twice")
            used.add((key, idx))
    for key, vals in ex.items():
        if len(vals) != counts[key]:
            raise ValueError(f"expected {counts[key]} exponents for {key}, got {len(vals)}")
        k = key[0]
        for idx, e in enumerate(vals):
            paired = (key, idx) in used
            if e is None and not paired:
                raise ValueError(f"copy {key}[{idx}] has no exponent")
            if e is None:
                continue
            if paired:
                raise ValueError(f"copy {key}[{idx}] is paired and cannot carry an exponent")
            if not 0 <= e <= k or (2 * e).denominator != 1:
                raise ValueError(f"exponent {e} for {key} must be a multiple of 1/2 in [0, {k}]")
    return True


def _unpaired(sub):
    for key, vals in sub.exponents:
        for e in vals:
            if e is not None:
                yield key, e


def annihilator(f, sub):
    validate_subobject(f, sub)
    ex = {key: tuple(None if e is None else key[0] - e for e in vals) for key, vals in sub.exponents}
    return SubobjectSpec.build(ex, sub.pairs)


def is_isotropic(f, sub):
    validate_subobject(f, sub)
    return all(2 * e >= key[0] for key, e in _unpaired(sub))


def is_metabolizer(f, sub):
    return annihilator(f, sub) == sub


def sub_tdim(f, sub, trace):
    """``(tdim Y, tdim X/Y)`` under a trace."""
    trace = TraceSpec.parse(trace)
    validate_subobject(f, sub)
    if trace.is_normal:
        return Fraction(0), Fraction(0)
    ty = tq = Fraction(0)
    for key, e in _unpaired(sub):
        ty += 1 if e < key[0] else 0
        tq += 1 if e > 0 else 0
    ty += len(sub.pairs)
    tq += len(sub.pairs)
    return ty, tq


def induced_form(f, sub):
    """The form induced on ``Y^perp / Y`` for an isotropic ``Y``."""
    if not is_isotropic(f, sub):
        raise ValueError("subobject is not isotropic")
    blocks = []
    for (k, s), e in _unpaired(sub):
        kk = 2 * e - k
        if kk > 0:
            blocks.append((int(kk), s, 1))
    return BlockForm(f.a, tuple(blocks))


def metabolizer(f):
    """The canonical metabolizer ``tau^(k/2) X`` of every copy."""
    return SubobjectSpec.build({(k, s): [Fraction(k, 2)] * m for k, s, m in f.blocks})


@dataclass(frozen=True)
class ExcessReport:
    excess: Fraction
    tdim_sub: Fraction
    tdim_quotient: Fraction
    tdim_total: Fraction
    annihilator: SubobjectSpec
    is_metabolizer: bool
    bounds_ok: bool
    zero_excess_ok: bool = dc_field(default=True)

    def as_dict(self):
        return {
            "excess": str(self.excess),
            "tdim_sub": str(self.tdim_sub),
            "tdim_quotient": str(self.tdim_quotient),
            "tdim_total": str(self.tdim_total),
            "annihilator": self.annihilator.as_dict(),
            "is_metabolizer": self.is_metabolizer,
            "bounds_ok": self.bounds_ok,
            "zero_excess_criterion_ok": self.zero_excess_ok,
        }


def excess(f, sub, trace):
    trace = TraceSpec.parse(trace)
    if trace.is_normal:
        raise ValueError("excess needs a Dixmier trace")
    ty, tq = sub_tdim(f, sub, trace)
    tx = tdim(f, trace)
    ex = ty + tq - tx
    ann = annihilator(f, sub)
    meta = ann == sub
    bounds = 0 <= ex <= min(ty, tq)
    lemma = (ex == 0) == (2 * ty == tx) if meta else True
    return ExcessReport(ex, ty, tq, tx, ann, meta, bounds, lemma)


# ---------------------------------------------------------------------------
# Presentations realizing block forms
# ---------------------------------------------------------------------------


def block_entry(ctx, a, k, sign, q_parity):
    """``(A, H)`` entries of a ``1 x 1`` presentation of ``L_{k,sign}`` at ``zeta^a``.

    ``A = (t - c)^k``; ``H`` is a monomial times ``(1 + c t^-1)/2`` for odd
    ``k``, with the scalar chosen so that the compatibility holds and the
    counts come out as ``n_k^sign = 1``.
    """
    q = q_parity % 2
    s = LaurentPoly.linear_root(ctx, a)
    A = s ** k
    if k % 2:
        j = (k - 1) // 2
        mu = sign * (-1) ** ((k + 1) // 2)
        rho = ctx.zeta(-a * (k + 1) // 2)
        scal = rho * mu
        if q == 1:
            scal = scal * ctx.i
        h = (LaurentPoly.const(ctx, 1) + LaurentPoly.monomial(ctx, -1, ctx.zeta(a))).scale(scal * ctx.scalar(Fraction(1, 2)))
        h = h.shift(-j)
    else:
        j = k // 2
        mu = sign * (-1) ** j if q == 1 else -sign * (-1) ** j
        scal = ctx.zeta(-a * j) * mu
        if q == 0:
            scal = scal * ctx.i
        h = LaurentPoly.monomial(ctx, -j, scal)
    return A, h


def synthesize(f, q_parity, ctx=None, rng=None, scramble=0):
    """Block-diagonal presentation realizing ``f``; optionally scrambled.

    With ``scramble > 0`` the pair ``(A, H)`` is replaced by
    ``(W A V, V^dagger H W^-1)`` for random unimodular ``W, V``, which keeps
    the compatibility and the isomorphism type of the form.
    """
    ctx = ctx or field(4)
    entries = []
    for k, s, m in f.blocks:
        entries.extend([block_entry(ctx, f.a, k, s, q_parity)] * m)
    n = len(entries)
    A = LaurentMatrix.diagonal(ctx, [e[0] for e in entries])
    H = LaurentMatrix.diagonal(ctx, [e[1] for e in entries])
    if scramble and n:
        rng = rng or random.Random(0)
        W, Wi = random_unimodular(ctx, n, rng, steps=scramble)
        V, _ = random_unimodular(ctx, n, rng, steps=scramble)
        A = W @ A @ V
        H = V.dagger() @ H @ Wi
    return DualityPresentation(A, H, q_parity)


# ---------------------------------------------------------------------------
# Enumeration helpers
# ---------------------------------------------------------------------------


def enumerate_block_forms(a, max_weight):
    """All block forms with ``sum k * multiplicity <= max_weight`` (including empty)."""
    keys = [(k, s) for k in range(1, max_weight + 1) for s in (1, -1)]
    out = []

    def rec(idx, remaining, acc):
        if idx == len(keys):
            out.append(BlockForm.from_counts(a, acc))
            return
        k, s = keys[idx]
        for m in range(remaining // k + 1):
            if m:
                acc[(k, s)] = m
            rec(idx + 1, remaining - k * m, acc)
            acc.pop((k, s), None)

    rec(0, max_weight, {})
    return out


def random_block_form(a, rng, max_k=4, max_blocks=4, min_weight=0):
    while True:
        blocks = [(rng.randint(1, max_k), rng.choice((1, -1)), 1) for _ in range(rng.randint(1, max_blocks))]
        f = BlockForm(a, tuple(blocks))
        if f.weight() >= min_weight:
            return f
