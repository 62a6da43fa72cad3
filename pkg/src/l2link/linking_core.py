"""Torsion linking forms from duality presentations.

A presentation ``(A, H, q)`` consists of ``A : Lambda^n1 -> Lambda^n0`` (the
module is ``coker A``) and ``H : Lambda^n0 -> Lambda^n1`` subject to

    H A = eps * A^dagger H^dagger,   eps = (-1)^(q+1).

For classes ``x, y`` in the ``(t - c)``-primary part, choose ``m`` and ``u``
(over the localization at ``c``) with ``A u = (t - c)^m x``; then

    L(x, y) = y^dagger H^dagger u / (t - c)^m   in  R / Lambda_c.

This is linear in ``x``, antilinear in ``y`` and ``L(y, x) = eps * conj L(x, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .laurent_linalg import LaurentMatrix, root_multiplicity, smith_normal_form, torsion_decompose
from .local import GermValue, series_inv, series_mul, taylor
from .scalars import LaurentPoly, field, format_laurent

__all__ = [
    "DualityPresentation",
    "ValidationReport",
    "TorsionLinkingForm",
    "NotTorsionError",
    "validate_presentation",
    "linking_pairing",
    "local_solution",
    "pairing_from_solution",
    "gram_at_point",
    "discriminant_form",
    "class_coordinates",
    "random_congruence",
]


class NotTorsionError(ValueError):
    """A vector does not represent a torsion class of the presented module."""


@dataclass(frozen=True)
class DualityPresentation:
    A: LaurentMatrix
    H: LaurentMatrix
    q_parity: int

    def __post_init__(self):
        object.__setattr__(self, "q_parity", self.q_parity % 2)
        if self.H.shape != (self.A.cols, self.A.rows):
            raise ValueError(
                f"H must be {self.A.cols}x{self.A.rows} for A of shape {self.A.rows}x{self.A.cols}, got {self.H.rows}x{self.H.cols}"
            )

    @property
    def ctx(self):
        return self.A.ctx

    @property
    def epsilon(self):
        return 1 if self.q_parity == 1 else -1

    def negated(self):
        """The presentation of the oppositely oriented complex."""
        return DualityPresentation(self.A, -self.H, self.q_parity)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    entry: tuple | None = None
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_presentation(p):
    lhs = p.H @ p.A
    rhs = (p.A.dagger() @ p.H.dagger()).scale(p.epsilon)
    for i in range(lhs.rows):
        for j in range(lhs.cols):
            if lhs[i, j] != rhs[i, j]:
                return ValidationReport(
                    False,
                    (i, j),
                    f"(H A)[{i}][{j}] = {format_laurent(lhs[i, j])} but "
                    f"eps (A^+ H^+)[{i}][{j}] = {format_laurent(rhs[i, j])}",
                )
    return ValidationReport(True)


def _s(ctx, a):
    return LaurentPoly.linear_root(ctx, a)


def _local_data(A, a):
    """Per Smith diagonal entry: ``(m_i, r_i)`` with ``d_i = s^m_i r_i``."""
    snf = smith_normal_form(A)
    data = []
    for d in snf.diagonal[: snf.rank]:
        m, r = root_multiplicity(d, a)
        data.append((m, r))
    return snf, data


def _coordinates(p, x, a):
    ctx = p.ctx
    x = tuple(LaurentPoly.const(ctx, 0) + v for v in x)
    if len(x) != p.A.rows:
        raise ValueError(f"vector of length {len(x)}, expected {p.A.rows}")
    snf, data = _local_data(p.A, a)
    z = snf.U @ x
    if any(z[snf.rank:]):
        raise NotTorsionError("vector has a nonzero free component")
    return snf, data, z


def linking_pairing(p, x, y, a):
    """``L(x, y)`` at ``c = zeta^a`` as a :class:`GermValue`."""
    ctx = p.ctx
    snf, data, z = _coordinates(p, x, a)
    _coordinates(p, y, a)
    y = tuple(LaurentPoly.const(ctx, 0) + v for v in y)
    # row vector y^dagger H^dagger V
    HV = p.H.dagger() @ snf.V
    total = GermValue.zero(ctx, a)
    for i, (m, r) in enumerate(data):
        if m == 0 or not z[i]:
            continue
        g = LaurentPoly.zero(ctx)
        for l, yl in enumerate(y):
            if yl and HV[l, i]:
                g = g + yl.conj() * HV[l, i]
        if not g:
            continue
        total = total + GermValue.from_fraction(g * z[i], r, m, a)
    return total


def local_solution(p, x, a):
    """Minimal ``m`` and ``u = u_num / u_den`` with ``A u = s^m x`` near ``c``.

    ``u_den`` is a Laurent polynomial that does not vanish at ``c``.
    """
    ctx = p.ctx
    snf, data, z = _coordinates(p, x, a)
    s = _s(ctx, a)
    need = 0
    vals = []
    for i, (mi, r) in enumerate(data):
        v, _ = root_multiplicity(z[i], a) if z[i] else (None, None)
        vals.append(v)
        if z[i] and mi:
            need = max(need, mi - v)
    den = LaurentPoly.const(ctx, 1)
    for mi, r in data:
        den = den * r
    w = []
    for i, (mi, r) in enumerate(data):
        if not z[i]:
            w.append(LaurentPoly.zero(ctx))
            continue
        # w_i = s^(need - mi) z_i / r_i, written over the common denominator
        other = den.exact_div(r)
        k = need - mi
        if k >= 0:
            w.append(s ** k * z[i] * other)
        else:
            w.append(z[i].exact_div(s ** (-k)) * other)
    w += [LaurentPoly.zero(ctx)] * (p.A.cols - len(w))
    u_num = snf.V @ w
    return need, u_num, den


def pairing_from_solution(p, y, m, u_num, u_den, a):
    """``y^dagger H^dagger u / s^m`` for a given local solution ``u``."""
    ctx = p.ctx
    Hu = p.H.dagger() @ u_num
    num = LaurentPoly.zero(ctx)
    for yl, h in zip(y, Hu):
        yl = LaurentPoly.const(ctx, 0) + yl
        if yl and h:
            num = num + yl.conj() * h
    return GermValue.from_fraction(num, u_den, m, a)


@dataclass(frozen=True)
class TorsionLinkingForm:
    """Gram matrix of a linking form on the ``c``-primary part.

    ``generators[i]`` spans a cyclic summand ``Lambda / s^orders[i]`` and
    ``gram[i][j] = L(generators[i], generators[j])``.
    """

    N: int
    a: int
    generators: tuple
    orders: tuple
    gram: tuple
    q_parity: int

    @property
    def epsilon(self):
        return 1 if self.q_parity % 2 == 1 else -1

    @property
    def ctx(self):
        return field(self.N)

    @property
    def size(self):
        return len(self.orders)

    def dimension(self):
        return sum(self.orders)

    def is_hermitian(self):
        eps = self.epsilon
        for i in range(self.size):
            for j in range(self.size):
                lhs = self.gram[i][j]
                rhs = self.gram[j][i].conj()
                if eps < 0:
                    rhs = -rhs
                if lhs != rhs:
                    return False
        return True

    def congruent_by(self, P):
        """Gram matrix in the basis ``b'_j = sum_i P[i][j] b_i``.

        ``P`` is a square matrix of Laurent polynomials, invertible over the
        local ring, with ``s^(m_i - m_j)`` dividing ``P[i][j]`` whenever
        ``m_i > m_j``, so that ``b'_j`` again has order ``m_j``.
        """
        n = self.size
        ctx = P[0][0].ctx if n else None
        order = max(self.orders, default=0)
        for i in range(n):
            for j in range(n):
                gap = self.orders[i] - self.orders[j]
                if gap > 0 and P[i][j] and root_multiplicity(P[i][j], self.a)[0] < gap:
                    raise ValueError(f"P[{i}][{j}] does not preserve the order of generator {j}")
        ser = [[taylor(P[i][j], self.a, order) for j in range(n)] for i in range(n)]
        cser = [[taylor(P[i][j].conj(), self.a, order) for j in range(n)] for i in range(n)]
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = GermValue.zero(ctx, self.a)
                for k in range(n):
                    for l in range(n):
                        g = self.gram[k][l]
                        if g.is_zero():
                            continue
                        acc = acc + g.times_series(series_mul(ser[k][i], cser[l][j], order))
                row.append(acc)
            out.append(tuple(row))
        return TorsionLinkingForm(self.N, self.a, self.generators, self.orders, tuple(out), self.q_parity)


def random_congruence(form, rng, span=1):
    """A random basis change accepted by :meth:`TorsionLinkingForm.congruent_by`.

    Off-diagonal entries are multiplied by the power of ``s`` the orders
    require; among generators of equal order only entries above the diagonal
    are filled, so ``P`` stays invertible modulo ``s``.
    """
    ctx = form.ctx
    s = _s(ctx, form.a)
    n = form.size
    m = form.orders

    def rand():
        return LaurentPoly.from_terms(ctx, {e: rng.randint(-2, 2) for e in range(-span, span + 1)})

    P = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                unit = LaurentPoly.monomial(ctx, rng.randint(-1, 1), ctx.zeta(rng.randrange(ctx.N)))
                row.append(unit + s * rand())
            elif m[i] > m[j] or (m[i] == m[j] and i > j):
                row.append(s ** max(m[i] - m[j], 1) * rand())
            else:
                row.append(rand())
        P.append(row)
    return P


def gram_at_point(p, a):
    """Gram matrix of ``L`` on the ``zeta^a``-primary part of ``coker A``."""
    ctx = p.ctx
    snf, data = _local_data(p.A, a)
    gens, orders = [], []
    for i, (m, r) in enumerate(data):
        if m == 0:
            continue
        col = snf.U_inv.col(i)
        gens.append(tuple(x * r for x in col))
        orders.append(m)
    gram = tuple(
        tuple(linking_pairing(p, gi, gj, a) for gj in gens) for gi in gens
    )
    return TorsionLinkingForm(ctx.N, a, tuple(gens), tuple(orders), gram, p.q_parity)


def class_coordinates(p, x, a):
    """Coefficients of the class of ``x`` in the generators of :func:`gram_at_point`.

    ``x`` is a vector in the target of ``A``; coefficient ``i`` is a
    polynomial in ``s = t - c`` of degree below the order of generator ``i``.
    """
    ctx = p.ctx
    snf, data, z = _coordinates(p, x, a)
    s = _s(ctx, a)
    out = []
    for i, (m, r) in enumerate(data):
        if m == 0:
            continue
        ser = series_mul(taylor(z[i], a, m), series_inv(taylor(r, a, m), m), m)
        poly = LaurentPoly.zero(ctx)
        for l, c in enumerate(ser):
            if not c.is_zero():
                poly = poly + (s ** l).scale(c)
        out.append(poly)
    return out


def discriminant_form(I, q_parity, points=None):
    """Discriminant forms of the ``(-1)^q``-Hermitian matrix ``I``, per point.

    The torsion of ``coker I`` carries the form presented by ``(I, 1)``; its
    linking parity is ``q + 1`` so that it is ``(-1)^q``-Hermitian like ``I``.
    """
    if I.rows != I.cols:
        raise ValueError("intersection matrix must be square")
    sign = 1 if q_parity % 2 == 0 else -1
    Id = I.dagger()
    if sign < 0:
        Id = -Id
    if Id != I:
        raise ValueError(f"matrix is not {'+' if sign > 0 else '-'}1-Hermitian")
    snf = smith_normal_form(I)
    if snf.rank < I.cols:
        raise ValueError("intersection matrix is singular over the fraction field; cut its kernel first")
    pres = DualityPresentation(I, LaurentMatrix.identity(I.ctx, I.rows), q_parity + 1)
    dec = torsion_decompose(I)
    pts = dec.points() if points is None else points
    return {a: gram_at_point(pres, a) for a in pts}
