"""Counts ``n_j^+-(c)``, height numbers, capacities and torsion signatures.

A germ value ``f`` is expanded as ``sum_j alpha_j g^j`` with
``g = i c (t - c)^-1``; the coefficient forms ``alpha_j`` (multiplied by
``-i`` when ``q`` is even, so that they are Hermitian) are restricted to
``T_j = ker (t - c)^j`` and their positive and negative squares counted.

The computation runs on a finite-dimensional model of the ``c``-primary part:
basis vectors ``s^l b_i`` (``0 <= l < m_i``), where ``s = t - c`` acts as the
shift and the pairing is ``L(s^l b_i, s^l' b_k) = s^l conj(s)^l' L(b_i, b_k)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import kmat
from .local import conj_s_series, series_mul, taylor
from .scalars import field

__all__ = [
    "TraceSpec",
    "AdicInvariants",
    "HeightNumbers",
    "InvariantReport",
    "KModel",
    "g_expand",
    "hermitize",
    "signature_counts",
    "counts_from_model",
    "heights",
    "capacities",
    "torsion_signatures",
    "invariant_report",
]


class TraceSpec(str, enum.Enum):
    INTERIOR = "interior"
    TERMINAL = "terminal"
    INITIAL = "initial"
    DIXMIER_PLUS = "dixmier+"
    DIXMIER_MINUS = "dixmier-"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {
            "normal-interior": "interior",
            "normal-terminal": "terminal",
            "normal-initial": "initial",
            "dixmier-plus": "dixmier+",
            "dixmier-minus": "dixmier-",
        }
        value = aliases.get(value, value)
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown trace {value!r}; expected one of {[t.value for t in cls]}") from None

    @property
    def is_normal(self):
        return self in (TraceSpec.INTERIOR, TraceSpec.TERMINAL, TraceSpec.INITIAL)


NORMAL_TRACES = (TraceSpec.INTERIOR, TraceSpec.TERMINAL, TraceSpec.INITIAL)


def g_expand(v):
    """Coefficients ``alpha_1..alpha_m`` of ``v`` in powers of ``g = ic/(t-c)``."""
    if v.is_zero():
        return ()
    ctx = v.ctx
    ic_inv = (ctx.i * v.c).inverse()
    out = []
    w = ctx.one()
    for b in v.betas:
        w = w * ic_inv
        out.append(b * w)
    return tuple(out)


def hermitize(values, q_parity):
    """Multiply by ``-i`` when ``q`` is even; identity when ``q`` is odd.

    Accepts a scalar, a flat sequence or a nested list of scalars.
    """
    if q_parity % 2 == 1:
        return values
    if isinstance(values, (list, tuple)):
        return type(values)(hermitize(v, q_parity) for v in values)
    return values * (-values.ctx.i)


class KModel:
    """Finite-dimensional model of the ``c``-primary part and its forms.

    ``basis[u] = (i, l)`` stands for ``s^l b_i``.  ``forms[j-1][u][v]`` is the
    Hermitian value of ``alpha_j(e_v, e_u)``, so that a vector pairing reads
    ``alpha_j(x, y) = y^* F_j x``.
    """

    def __init__(self, form):
        self.form = form
        self.ctx = ctx = field(form.N)
        self.a = form.a
        self.orders = tuple(form.orders)
        self.q_parity = form.q_parity
        self.basis = [(i, l) for i, m in enumerate(self.orders) for l in range(m)]
        self.index = {b: u for u, b in enumerate(self.basis)}
        self.dim = len(self.basis)
        self.height = max(self.orders, default=0)
        h = self.height
        cs = conj_s_series(ctx, self.a, h + 1)
        # powers of s and conj(s) as series truncated at order h
        s_pow = [[ctx.one()] + [ctx.zero()] * h]
        c_pow = [[ctx.one()] + [ctx.zero()] * h]
        for _ in range(h):
            s_pow.append([ctx.zero()] + s_pow[-1][:h])
            c_pow.append(series_mul(c_pow[-1], cs, h + 1))
        zero = ctx.zero()
        self.forms = [[[zero] * self.dim for _ in range(self.dim)] for _ in range(h)]
        for u, (i, l) in enumerate(self.basis):
            for v, (k, lp) in enumerate(self.basis):
                # alpha(e_v, e_u) needs L(s^lp b_k, s^l b_i)
                g = form.gram[k][i]
                if g.is_zero():
                    continue
                germ = g.times_series(series_mul(s_pow[lp], c_pow[l], h + 1))
                alphas = hermitize(g_expand(germ), self.q_parity)
                for j, val in enumerate(alphas, start=1):
                    self.forms[j - 1][u][v] = val

    def shift(self, vec):
        """Apply ``s`` to a coordinate vector."""
        out = [self.ctx.zero()] * self.dim
        for u, x in enumerate(vec):
            if x.is_zero():
                continue
            i, l = self.basis[u]
            if l + 1 < self.orders[i]:
                out[self.index[(i, l + 1)]] = x
        return out

    def shift_matrix(self, power=1):
        cols = []
        for u in range(self.dim):
            e = [self.ctx.zero()] * self.dim
            e[u] = self.ctx.one()
            for _ in range(power):
                e = self.shift(e)
            cols.append(e)
        return [[cols[v][u] for v in range(self.dim)] for u in range(self.dim)]

    def unit_vector(self, u):
        e = [self.ctx.zero()] * self.dim
        e[u] = self.ctx.one()
        return e

    def kernel_basis(self, j):
        """K-basis of ``T_j = ker s^j``."""
        return [
            self.unit_vector(u) for u, (i, l) in enumerate(self.basis) if l >= self.orders[i] - j
        ]

    def span_of(self, vectors):
        """K-basis of the ``Lambda``-submodule generated by ``vectors``."""
        out = []
        for v in vectors:
            cur = list(v)
            while any(not x.is_zero() for x in cur):
                out.append(cur)
                cur = self.shift(cur)
        return kmat.column_basis(out, self.ctx)

    def pair(self, j, x, y):
        """``alpha_j(x, y)`` (hermitized) for coordinate vectors."""
        F = self.forms[j - 1]
        acc = self.ctx.zero()
        for u, yu in enumerate(y):
            if yu.is_zero():
                continue
            yc = yu.conjugate()
            row = F[u]
            for v, xv in enumerate(x):
                if not xv.is_zero() and not row[v].is_zero():
                    acc = acc + yc * row[v] * xv
        return acc

    def pairs_to_zero(self, x, y):
        return all(self.pair(j, x, y).is_zero() for j in range(1, self.height + 1))

    def vector_of(self, coeffs):
        """Coordinates of ``sum_i coeffs[i] b_i`` (Laurent coefficients)."""
        out = [self.ctx.zero()] * self.dim
        for i, p in enumerate(coeffs):
            if not p:
                continue
            ser = taylor(p, self.a, self.orders[i])
            for l, x in enumerate(ser):
                out[self.index[(i, l)]] = x
        return out


@dataclass(frozen=True)
class AdicInvariants:
    """Per-point data: ``alpha_forms[j-1]`` is the Gram matrix on ``T_j``."""

    a: int
    alpha_forms: tuple
    filtration: tuple
    n_plus: tuple
    n_minus: tuple

    def counts(self):
        """``{(k, sign): n}`` for the nonzero counts."""
        out = {}
        for k, (p, m) in enumerate(zip(self.n_plus, self.n_minus), start=1):
            if p:
                out[(k, 1)] = p
            if m:
                out[(k, -1)] = m
        return out

    def n(self, j, sign):
        seq = self.n_plus if sign > 0 else self.n_minus
        return seq[j - 1] if 1 <= j <= len(seq) else 0


def counts_from_model(model, subspaces=None):
    """Inertia of ``alpha_j`` on the given subspaces (default ``T_j``)."""
    ctx = model.ctx
    forms, dims, plus, minus = [], [], [], []
    for j in range(1, model.height + 1):
        basis = model.kernel_basis(j) if subspaces is None else subspaces[j - 1]
        G = kmat.restrict_form(model.forms[j - 1], basis, ctx)
        p, m, _ = kmat.hermitian_inertia(G, ctx)
        forms.append(tuple(tuple(r) for r in G))
        dims.append(len(basis))
        plus.append(p)
        minus.append(m)
    while plus and not plus[-1] and not minus[-1]:
        plus.pop()
        minus.pop()
    return tuple(forms), tuple(dims), tuple(plus), tuple(minus)


def signature_counts(form):
    """:class:`AdicInvariants` of a :class:`TorsionLinkingForm`."""
    model = KModel(form)
    forms, dims, plus, minus = counts_from_model(model)
    return AdicInvariants(form.a, forms, dims, plus, minus)


@dataclass(frozen=True)
class HeightNumbers:
    h_odd: int = 0
    h_ev_plus: int = 0
    h_ev_minus: int = 0
    h_odd_plus: int = 0
    h_odd_minus: int = 0


def heights(inv):
    def top(parity, seqs):
        best = 0
        for seq in seqs:
            for j, n in enumerate(seq, start=1):
                if n and j % 2 == parity:
                    best = max(best, j)
        return best

    return HeightNumbers(
        h_odd=top(1, (inv.n_plus, inv.n_minus)),
        h_ev_plus=top(0, (inv.n_plus,)),
        h_ev_minus=top(0, (inv.n_minus,)),
        h_odd_plus=top(1, (inv.n_plus,)),
        h_odd_minus=top(1, (inv.n_minus,)),
    )


def capacities(h, trace):
    """``(c_plus, c_minus)`` for a normal trace positioned relative to ``c``."""
    trace = TraceSpec.parse(trace)
    if trace is TraceSpec.INTERIOR:
        return max(h.h_odd, h.h_ev_plus), max(h.h_odd, h.h_ev_minus)
    if trace is TraceSpec.TERMINAL:
        return max(h.h_ev_plus, h.h_odd_minus), max(h.h_ev_minus, h.h_odd_plus)
    if trace is TraceSpec.INITIAL:
        # mirror image of the terminal case
        return max(h.h_ev_plus, h.h_odd_plus), max(h.h_ev_minus, h.h_odd_minus)
    raise ValueError("capacities are defined for normal traces only")


def torsion_signatures(inv):
    """``(tsig_plus, tsig_minus, sigma_ev, sigma_odd)``."""
    ev = odd = 0
    for j, (p, m) in enumerate(zip(inv.n_plus, inv.n_minus), start=1):
        if j % 2 == 0:
            ev += p - m
        else:
            odd += p - m
    return ev + odd, ev - odd, ev, odd


@dataclass(frozen=True)
class InvariantReport:
    a: int
    invariants: AdicInvariants
    heights: HeightNumbers
    capacities: dict
    sigma_ev: int
    sigma_odd: int
    tsig_plus: int
    tsig_minus: int

    def as_dict(self):
        return {
            "point": self.a,
            "filtration": list(self.invariants.filtration),
            "n_plus": list(self.invariants.n_plus),
            "n_minus": list(self.invariants.n_minus),
            "heights": {
                "h_odd": self.heights.h_odd,
                "h_ev_plus": self.heights.h_ev_plus,
                "h_ev_minus": self.heights.h_ev_minus,
                "h_odd_plus": self.heights.h_odd_plus,
                "h_odd_minus": self.heights.h_odd_minus,
            },
            "capacities": {k: list(v) for k, v in self.capacities.items()},
            "sigma_ev": self.sigma_ev,
            "sigma_odd": self.sigma_odd,
            "tsig_plus": self.tsig_plus,
            "tsig_minus": self.tsig_minus,
        }


def invariant_report(form):
    inv = signature_counts(form)
    h = heights(inv)
    caps = {t.value: capacities(h, t) for t in NORMAL_TRACES}
    tp, tm, ev, odd = torsion_signatures(inv)
    return InvariantReport(form.a, inv, h, caps, ev, odd, tp, tm)
