"""Truncated power series in ``s = t - c`` and principal parts (germs) at ``c``.

``c = zeta_N^a`` is a root of unity.  A power series is a list of
:class:`CycScalar` coefficients of ``s^0, s^1, ...``; a germ is an element of
``R / Lambda_c`` written as ``sum_j beta_j s^-j``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .scalars import CycScalar, LaurentPoly, field

__all__ = ["taylor", "series_mul", "series_inv", "GermValue", "conj_s_series"]


def _binom(e, k):
    # generalized binomial coefficient, valid for negative e
    num = 1
    den = 1
    for r in range(k):
        num *= e - r
        den *= r + 1
    return num // den if num % den == 0 else None


def taylor(p, a, order):
    """Coefficients of ``s^0 .. s^(order-1)`` of ``p`` expanded at ``zeta^a``."""
    ctx = p.ctx
    out = [ctx.zero()] * order
    if order <= 0 or not p:
        return out
    N = ctx.N
    vecs = [ctx.zero_vec] * order
    for e, c in zip(range(p.low, p.high + 1), p.coeffs):
        if not any(c):
            continue
        for k in range(order):
            b = _binom(e, k)
            if not b:
                continue
            term = ctx.vmul(c, ctx.vpower_of_zeta(a * (e - k) % N))
            vecs[k] = ctx.vadd(vecs[k], ctx.vscale(term, b))
    return [CycScalar(ctx, v) for v in vecs]


def series_mul(f, g, order):
    ctx = (f or g)[0].ctx
    out = [ctx.zero()] * order
    for i, x in enumerate(f[:order]):
        if x.is_zero():
            continue
        for j, y in enumerate(g[: order - i]):
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


def series_inv(f, order):
    if not f or f[0].is_zero():
        raise ZeroDivisionError("series with zero constant term is not invertible")
    inv0 = f[0].inverse()
    out = [inv0]
    for n in range(1, order):
        acc = f[0].ctx.zero()
        for k in range(1, min(n, len(f) - 1) + 1):
            acc = acc + f[k] * out[n - k]
        out.append(-acc * inv0)
    return out


def conj_s_series(ctx, a, order):
    """Series of ``conj(t - c) = t^-1 - c^-1`` at ``c``; it starts at ``s^1``."""
    p = LaurentPoly.monomial(ctx, -1) - LaurentPoly.const(ctx, ctx.zeta(-a))
    return taylor(p, a, order)


@dataclass(frozen=True)
class GermValue:
    """Principal part ``sum_j betas[j-1] * (t - c)^-j`` at ``c = zeta_N^a``."""

    N: int
    a: int
    betas: tuple = ()

    def __post_init__(self):
        betas = list(self.betas)
        while betas and betas[-1].is_zero():
            betas.pop()
        object.__setattr__(self, "betas", tuple(betas))

    @classmethod
    def zero(cls, ctx, a):
        return cls(ctx.N, a, ())

    @classmethod
    def from_series(cls, ctx, a, f, m):
        """Principal part of ``f / s^m`` for a power series ``f``."""
        f = list(f) + [ctx.zero()] * max(0, m - len(f))
        return cls(ctx.N, a, tuple(f[m - j] for j in range(1, m + 1)))

    @classmethod
    def from_fraction(cls, num, den, m, a):
        """Principal part of ``num / (den * s^m)`` with ``den(c) != 0``."""
        ctx = num.ctx
        if m <= 0 or not num:
            return cls.zero(ctx, a)
        f = taylor(num, a, m)
        if not den.is_one():
            f = series_mul(f, series_inv(taylor(den, a, m), m), m)
        return cls.from_series(ctx, a, f, m)

    @property
    def ctx(self):
        return field(self.N)

    @property
    def c(self):
        return self.ctx.zeta(self.a)

    def order(self):
        return len(self.betas)

    def is_zero(self):
        return not self.betas

    def beta(self, j):
        return self.betas[j - 1] if 1 <= j <= len(self.betas) else self.ctx.zero()

    def _check(self, other):
        if (self.N, self.a) != (other.N, other.a):
            raise ValueError("germs at different points")

    def __add__(self, other):
        self._check(other)
        n = max(len(self.betas), len(other.betas))
        return GermValue(self.N, self.a, tuple(self.beta(j) + other.beta(j) for j in range(1, n + 1)))

    def __neg__(self):
        return GermValue(self.N, self.a, tuple(-b for b in self.betas))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, x):
        return GermValue(self.N, self.a, tuple(b * x for b in self.betas))

    def times_series(self, f):
        """Principal part of ``self * f`` for a power series ``f``."""
        m = len(self.betas)
        out = [self.ctx.zero()] * m
        for j, b in enumerate(self.betas, start=1):
            if b.is_zero():
                continue
            for n, x in enumerate(f[: j]):
                if not x.is_zero():
                    out[j - n - 1] = out[j - n - 1] + b * x
        return GermValue(self.N, self.a, tuple(out))

    def conj(self):
        """Image under ``t -> t^-1`` with conjugated coefficients.

        ``conj(s)^-1 = -c (c + s) / s``, so ``conj(s^-j) = (-c)^j (c+s)^j s^-j``.
        """
        ctx = self.ctx
        c = self.c
        m = len(self.betas)
        out = [ctx.zero()] * m
        for j, b in enumerate(self.betas, start=1):
            if b.is_zero():
                continue
            head = b.conjugate() * (-c) ** j
            for k in range(j):
                coef = head * c ** (j - k) * _binom(j, k)
                out[j - k - 1] = out[j - k - 1] + coef
        return GermValue(self.N, self.a, tuple(out))

    def to_laurent_fraction(self):
        """``(num, m)`` with ``self = num / s^m`` and ``num`` a polynomial in ``s``."""
        ctx = self.ctx
        m = len(self.betas)
        s = LaurentPoly.t(ctx) - LaurentPoly.const(ctx, self.c)
        num = LaurentPoly.zero(ctx)
        for j, b in enumerate(self.betas, start=1):
            num = num + (s ** (m - j)).scale(b)
        return num, m

    def __str__(self):
        if not self.betas:
            return "0"
        return " + ".join(f"({b})*s^-{j}" for j, b in enumerate(self.betas, start=1) if not b.is_zero())
