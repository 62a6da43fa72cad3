"""Matrices over the Laurent ring ``K[t, t^-1]``.

The ring is Euclidean for the span norm ``high - low``, so the usual
elimination algorithm gives a Smith normal form.  On top of it sit the torsion
decomposition at roots of unity and the ``(t - c)``-adic filtration.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field as dc_field

import mpmath

from .scalars import FieldContext, LaurentPoly, parse_laurent, format_laurent

log = logging.getLogger(__name__)

__all__ = [
    "LaurentMatrix",
    "SmithDecomposition",
    "TorsionDecomposition",
    "smith_normal_form",
    "torsion_decompose",
    "adic_filtration",
    "homology_presentation",
    "root_multiplicity",
    "random_unimodular",
    "xgcd",
]


class LaurentMatrix:
    """Dense immutable matrix with :class:`LaurentPoly` entries."""

    __slots__ = ("ctx", "rows", "cols", "entries", "_hash")

    def __init__(self, ctx, rows, cols, entries):
        self.ctx = ctx
        self.rows = rows
        self.cols = cols
        self.entries = tuple(tuple(r) for r in entries)
        self._hash = None
        if len(self.entries) != rows or any(len(r) != cols for r in self.entries):
            raise ValueError(f"entries do not match shape {rows}x{cols}")

    # constructors -------------------------------------------------------

    @classmethod
    def from_rows(cls, ctx, rows, ncols=None):
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        lifted = [[_lift(ctx, x) for x in r] for r in rows]
        return cls(ctx, len(rows), ncols, lifted)

    @classmethod
    def from_strings(cls, ctx, rows, ncols=None):
        return cls.from_rows(ctx, [[parse_laurent(ctx, x) for x in r] for r in rows], ncols)

    @classmethod
    def zeros(cls, ctx, rows, cols):
        z = LaurentPoly.zero(ctx)
        return cls(ctx, rows, cols, [[z] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, ctx, n):
        z = LaurentPoly.zero(ctx)
        one = LaurentPoly.const(ctx, 1)
        return cls(ctx, n, n, [[one if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, ctx, diag, rows=None, cols=None):
        diag = [_lift(ctx, d) for d in diag]
        rows = len(diag) if rows is None else rows
        cols = len(diag) if cols is None else cols
        z = LaurentPoly.zero(ctx)
        ent = [[z] * cols for _ in range(rows)]
        for k, d in enumerate(diag):
            ent[k][k] = d
        return cls(ctx, rows, cols, ent)

    @classmethod
    def block_diagonal(cls, ctx, blocks):
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        z = LaurentPoly.zero(ctx)
        ent = [[z] * cols for _ in range(rows)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    ent[r0 + i][c0 + j] = b.entries[i][j]
            r0 += b.rows
            c0 += b.cols
        return cls(ctx, rows, cols, ent)

    # access ---------------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def col(self, j):
        return tuple(r[j] for r in self.entries)

    def to_strings(self):
        return [[format_laurent(x) for x in r] for r in self.entries]

    def __eq__(self, other):
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx.N, self.rows, self.cols, self.entries))
        return self._hash

    def __repr__(self):
        return f"LaurentMatrix({self.rows}x{self.cols}, {self.to_strings()})"

    def is_zero(self):
        return not any(x for r in self.entries for x in r)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        _same_shape(self, other)
        return LaurentMatrix(
            self.ctx, self.rows, self.cols,
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
        )

    def __sub__(self, other):
        _same_shape(self, other)
        return LaurentMatrix(
            self.ctx, self.rows, self.cols,
            [[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
        )

    def __neg__(self):
        return LaurentMatrix(self.ctx, self.rows, self.cols, [[-a for a in r] for r in self.entries])

    def scale(self, p):
        p = _lift(self.ctx, p)
        return LaurentMatrix(self.ctx, self.rows, self.cols, [[p * a for a in r] for r in self.entries])

    def __matmul__(self, other):
        if isinstance(other, LaurentMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            z = LaurentPoly.zero(self.ctx)
            cols = [other.col(j) for j in range(other.cols)]
            out = []
            for r in self.entries:
                out.append([_dot(r, c, z) for c in cols])
            return LaurentMatrix(self.ctx, self.rows, other.cols, out)
        # column vector
        vec = tuple(other)
        if len(vec) != self.cols:
            raise ValueError(f"vector of length {len(vec)} for {self.shape} matrix")
        z = LaurentPoly.zero(self.ctx)
        return tuple(_dot(r, vec, z) for r in self.entries)

    def transpose(self):
        return LaurentMatrix(self.ctx, self.cols, self.rows, [self.col(j) for j in range(self.cols)])

    def dagger(self):
        """Conjugate transpose under the Laurent involution."""
        return LaurentMatrix(
            self.ctx, self.cols, self.rows, [[x.conj() for x in self.col(j)] for j in range(self.cols)]
        )

    def determinant(self):
        """Fraction-free (Bareiss) determinant."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return LaurentPoly.const(self.ctx, 1)
        M = [list(r) for r in self.entries]
        sign = 1
        prev = LaurentPoly.const(self.ctx, 1)
        for k in range(n - 1):
            if not M[k][k]:
                swap = next((i for i in range(k + 1, n) if M[i][k]), None)
                if swap is None:
                    return LaurentPoly.zero(self.ctx)
                M[k], M[swap] = M[swap], M[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]).exact_div(prev)
            prev = M[k][k]
        det = M[n - 1][n - 1]
        return -det if sign < 0 else det


def _lift(ctx, x):
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, str):
        return parse_laurent(ctx, x)
    return LaurentPoly.const(ctx, x)


def _dot(r, c, zero):
    acc = zero
    for a, b in zip(r, c):
        if a and b:
            acc = acc + a * b
    return acc


def _same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithDecomposition:
    """``U @ A @ V == D`` with ``D`` diagonal.

    ``diagonal`` has length ``min(rows, cols)``; the first ``rank`` entries
    are nonzero, monic polynomials in ``t`` with nonzero constant term, each
    dividing the next.  ``U_inv`` and ``V_inv`` are the inverses.
    """

    U: LaurentMatrix
    V: LaurentMatrix
    U_inv: LaurentMatrix
    V_inv: LaurentMatrix
    diagonal: tuple

    @property
    def rank(self):
        return sum(1 for d in self.diagonal if d)

    def D(self):
        return LaurentMatrix.diagonal(self.U.ctx, self.diagonal, self.U.rows, self.V.rows)


def xgcd(p, x):
    """Return ``(g, a, b)`` with ``a*p + b*x == g``, ``g`` monic in ``t``."""
    ctx = p.ctx
    one, zero = LaurentPoly.const(ctx, 1), LaurentPoly.zero(ctx)
    r0, r1 = p, x
    a0, a1 = one, zero
    b0, b1 = zero, one
    while r1:
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        a0, a1 = a1, a0 - q * a1
        b0, b1 = b1, b0 - q * b1
    unit, g = r0.normalize()
    inv = unit ** -1
    return g, a0 * inv, b0 * inv


def _weight(p):
    size = 0
    for v in p.coeffs:
        for x in v:
            if x:
                size += x.numerator.bit_length() + x.denominator.bit_length()
    return (p.span(), size)


class _Work:
    """Mutable state for the elimination.

    Row operations act on ``D`` and ``U`` from the left and on ``Ui`` from the
    right by the inverse; column operations act on ``D`` and ``V`` from the
    right and on ``Vi`` from the left by the inverse.
    """

    def __init__(self, A):
        ctx = A.ctx
        self.ctx = ctx
        self.r, self.c = A.rows, A.cols
        self.D = [list(row) for row in A.entries]
        self.U = [list(row) for row in LaurentMatrix.identity(ctx, self.r).entries]
        self.Ui = [list(row) for row in LaurentMatrix.identity(ctx, self.r).entries]
        self.V = [list(row) for row in LaurentMatrix.identity(ctx, self.c).entries]
        self.Vi = [list(row) for row in LaurentMatrix.identity(ctx, self.c).entries]

    def row_mix(self, t, i, a, b, c, d):
        """``(row_t, row_i) <- (a row_t + b row_i, c row_t + d row_i)``; ``ad - bc = 1``."""
        for M in (self.D, self.U):
            M[t], M[i] = _mix(M[t], M[i], a, b, c, d)
        # inverse [[d, -b], [-c, a]] applied to columns t, i
        for row in self.Ui:
            x, y = row[t], row[i]
            if x or y:
                row[t] = x * d - y * c
                row[i] = y * a - x * b

    def col_mix(self, t, j, a, b, c, d):
        """``(col_t, col_j) <- (a col_t + b col_j, c col_t + d col_j)``; ``ad - bc = 1``."""
        for M in (self.D, self.V):
            for row in M:
                x, y = row[t], row[j]
                if x or y:
                    row[t] = x * a + y * b
                    row[j] = x * c + y * d
        self.Vi[t], self.Vi[j] = _mix(self.Vi[t], self.Vi[j], d, -c, -b, a)

    def row_swap(self, i, k):
        if i == k:
            return
        for M in (self.D, self.U):
            M[i], M[k] = M[k], M[i]
        for row in self.Ui:
            row[i], row[k] = row[k], row[i]

    def col_swap(self, j, k):
        if j == k:
            return
        for M in (self.D, self.V):
            for row in M:
                row[j], row[k] = row[k], row[j]
        self.Vi[j], self.Vi[k] = self.Vi[k], self.Vi[j]

    def row_scale(self, i, unit):
        inv = unit ** -1
        for M in (self.D, self.U):
            M[i] = [x * unit if x else x for x in M[i]]
        for row in self.Ui:
            if row[i]:
                row[i] = row[i] * inv

    def pivot_search(self, t):
        best = None
        for i in range(t, self.r):
            for j in range(t, self.c):
                x = self.D[i][j]
                if x:
                    w = (x.span(), x.bit_size())
                    if best is None or w < best[0]:
                        best = (w, i, j)
        return best


def _mix(u, v, a, b, c, d):
    out_u, out_v = [], []
    for x, y in zip(u, v):
        if not x and not y:
            out_u.append(x)
            out_v.append(y)
            continue
        out_u.append(a * x + b * y if b else a * x)
        out_v.append(c * x + d * y if c else d * y)
    return out_u, out_v


def _reduce_against(piv, x):
    """Unimodular ``(a, b, c, d)`` sending ``(piv, x)`` to ``(g, 0)``."""
    q, rem = x.divmod(piv)
    one = LaurentPoly.const(piv.ctx, 1)
    zero = LaurentPoly.zero(piv.ctx)
    if not rem:
        return one, zero, -q, one
    g, a, b = xgcd(piv, x)
    return a, b, -x.exact_div(g), piv.exact_div(g)


@functools.lru_cache(maxsize=512)
def smith_normal_form(A):
    """Smith normal form over the Euclidean ring ``K[t, t^-1]``."""
    w = _Work(A)
    ctx = A.ctx
    one = LaurentPoly.const(ctx, 1)
    n = min(w.r, w.c)
    for t in range(n):
        found = w.pivot_search(t)
        if found is None:
            break
        _, pi, pj = found
        w.row_swap(t, pi)
        w.col_swap(t, pj)
        while True:
            # clear column t and row t with 2x2 gcd steps
            while True:
                for i in range(t + 1, w.r):
                    if w.D[i][t]:
                        w.row_mix(t, i, *_reduce_against(w.D[t][t], w.D[i][t]))
                for j in range(t + 1, w.c):
                    if w.D[t][j]:
                        w.col_mix(t, j, *_reduce_against(w.D[t][t], w.D[t][j]))
                if not any(w.D[i][t] for i in range(t + 1, w.r)):
                    break
            piv = w.D[t][t]
            bad = None
            if piv.span() > 0:
                for i in range(t + 1, w.r):
                    for j in range(t + 1, w.c):
                        x = w.D[i][j]
                        if x and x.divmod(piv)[1]:
                            bad = i
                            break
                    if bad is not None:
                        break
            if bad is None:
                break
            w.row_mix(t, bad, one, one, LaurentPoly.zero(ctx), one)
        unit, _ = w.D[t][t].normalize()
        if unit != one:
            w.row_scale(t, unit ** -1)
    zero = LaurentPoly.zero(ctx)
    diag = tuple(w.D[k][k] if k < w.r and k < w.c else zero for k in range(n))
    return SmithDecomposition(
        U=LaurentMatrix(ctx, w.r, w.r, w.U),
        V=LaurentMatrix(ctx, w.c, w.c, w.V),
        U_inv=LaurentMatrix(ctx, w.r, w.r, w.Ui),
        V_inv=LaurentMatrix(ctx, w.c, w.c, w.Vi),
        diagonal=diag,
    )


# ---------------------------------------------------------------------------
# Torsion decomposition
# ---------------------------------------------------------------------------


def root_multiplicity(p, a):
    """Return ``(m, rest)`` with ``p = (t - zeta^a)^m * rest`` and ``rest(zeta^a) != 0``."""
    lin = LaurentPoly.linear_root(p.ctx, a)
    m = 0
    while p and p.span() > 0:
        q, r = p.divmod(lin)
        if r:
            break
        p = q
        m += 1
    return m, p


@dataclass(frozen=True)
class TorsionDecomposition:
    """Cokernel of a presentation matrix split at the roots of unity of ``K``.

    ``blocks`` holds ``(a, m, count)``: ``count`` summands
    ``Lambda / (t - zeta^a)^m``.  ``off_support_factor`` is the monic product
    of what remains after removing all ``(t - zeta^a)`` factors.
    """

    free_rank: int
    blocks: tuple
    off_support_factor: LaurentPoly
    warnings: tuple = ()
    smith: SmithDecomposition | None = dc_field(default=None, compare=False, repr=False)

    def points(self):
        return sorted({a for a, _, _ in self.blocks})

    def blocks_at(self, a):
        return [(m, cnt) for b, m, cnt in self.blocks if b == a]

    def dimension_at(self, a):
        return sum(m * cnt for m, cnt in self.blocks_at(a))


def _unit_circle_roots(p, tol=1e-9):
    """Numerically locate roots of ``p`` on the unit circle (diagnostics only)."""
    if p.span() <= 0:
        return []
    coeffs = [complex(p.coeff(e)) for e in range(p.high, p.low - 1, -1)]
    try:
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=60)
    except mpmath.libmp.libhyper.NoConvergence:  # pragma: no cover - pathological input
        return []
    return [complex(r) for r in roots if abs(abs(complex(r)) - 1) < tol]


def torsion_decompose(A, ctx: FieldContext | None = None):
    """Decompose ``coker(A)`` for ``A : Lambda^cols -> Lambda^rows``."""
    ctx = ctx or A.ctx
    snf = smith_normal_form(A)
    rank = snf.rank
    free_rank = A.rows - rank
    counts = {}
    residual = LaurentPoly.const(ctx, 1)
    for d in snf.diagonal[:rank]:
        rest = d
        for a in range(ctx.N):
            m, rest = root_multiplicity(rest, a)
            if m:
                counts[(a, m)] = counts.get((a, m), 0) + 1
        residual = residual * rest
    _, residual = residual.normalize()
    warnings = []
    for z in _unit_circle_roots(residual):
        msg = f"off-support factor {format_laurent(residual)} has a root {z:.6g} on the unit circle that is not a {ctx.N}-th root of unity"
        log.warning(msg)
        warnings.append(msg)
        break
    blocks = tuple((a, m, cnt) for (a, m), cnt in sorted(counts.items()))
    return TorsionDecomposition(free_rank, blocks, residual, tuple(warnings), snf)


def adic_filtration(dec, a):
    """Dimensions of ``T_j = ker (t - c)^j`` on the ``c``-adic part, ``j = 1..height``."""
    blocks = dec.blocks_at(a)
    if not blocks:
        return []
    height = max(m for m, _ in blocks)
    return [sum(cnt * min(j, m) for m, cnt in blocks) for j in range(1, height + 1)]


def homology_presentation(d_out, d_in):
    """Presentation matrix of ``ker d_out / im d_in``.

    ``d_out : C_k -> C_{k-1}`` and ``d_in : C_{k+1} -> C_k``; either may be
    ``None`` (zero map).  The kernel of ``d_out`` is free, with basis the last
    columns of ``V`` in its Smith form; ``im d_in`` is rewritten in that basis.
    """
    if d_out is None and d_in is None:
        raise ValueError("need at least one boundary map")
    ctx = (d_out or d_in).ctx
    n = d_out.cols if d_out is not None else d_in.rows
    if d_out is not None and d_in is not None:
        if d_in.rows != n:
            raise ValueError("boundary maps are not composable")
        if not (d_out @ d_in).is_zero():
            raise ValueError("boundary maps do not compose to zero")
    if d_out is None:
        rank, Vi = 0, LaurentMatrix.identity(ctx, n)
    else:
        snf = smith_normal_form(d_out)
        rank, Vi = snf.rank, snf.V_inv
    if d_in is None:
        return LaurentMatrix.zeros(ctx, n - rank, 0)
    coords = Vi @ d_in
    return LaurentMatrix(ctx, n - rank, d_in.cols, coords.entries[rank:])


def random_unimodular(ctx, n, rng, steps=None, max_span=1, coeff_range=2):
    """Random ``(W, W_inv)`` built from elementary, swap and monomial factors."""
    steps = 2 * n if steps is None else steps
    W = [list(r) for r in LaurentMatrix.identity(ctx, n).entries]
    Wi = [list(r) for r in LaurentMatrix.identity(ctx, n).entries]
    if n == 0:
        return LaurentMatrix(ctx, 0, 0, []), LaurentMatrix(ctx, 0, 0, [])
    for _ in range(steps):
        kind = rng.random()
        if kind < 0.7 and n > 1:
            i, j = rng.sample(range(n), 2)
            lo = rng.randint(-max_span, 0)
            q = LaurentPoly.from_terms(
                ctx, {e: rng.randint(-coeff_range, coeff_range) for e in range(lo, lo + rng.randint(0, max_span) + 1)}
            )
            if not q:
                continue
            # W <- E W with E = I + q e_i e_j^T ; W_inv <- W_inv E^-1
            W[i] = [x + q * y for x, y in zip(W[i], W[j])]
            for row in Wi:
                row[j] = row[j] - row[i] * q
        elif kind < 0.85 and n > 1:
            i, j = rng.sample(range(n), 2)
            W[i], W[j] = W[j], W[i]
            for row in Wi:
                row[i], row[j] = row[j], row[i]
        else:
            i = rng.randrange(n)
            unit = LaurentPoly.monomial(ctx, rng.randint(-1, 1), ctx.zeta(rng.randrange(ctx.N)))
            inv = unit ** -1
            W[i] = [x * unit for x in W[i]]
            for row in Wi:
                row[i] = row[i] * inv
    return LaurentMatrix(ctx, n, n, W), LaurentMatrix(ctx, n, n, Wi)
