"""Exact arithmetic in cyclotomic fields and Laurent polynomial rings over them.

A :class:`FieldContext` fixes the working field ``Q(zeta_N)`` with ``4 | N``.
Field elements are coefficient vectors in the power basis
``1, zeta, ..., zeta^(phi(N)-1)`` with ``gmpy2.mpq`` entries.  Laurent
polynomials carry the involution ``t -> t^-1`` combined with complex
conjugation of the coefficients.
"""

from __future__ import annotations

import functools
from fractions import Fraction
from numbers import Rational

from gmpy2 import gcd, lcm, mpq, mpz
from mpmath import iv

__all__ = [
    "FieldContext",
    "field",
    "CycScalar",
    "LaurentPoly",
    "ParseError",
    "parse_laurent",
    "parse_scalar",
    "format_laurent",
    "format_scalar",
    "evaluate_at_root",
    "sign_of_real",
    "involution",
]

ZERO = mpq(0)
ONE = mpq(1)


def _poly_divexact_int(num, den):
    """Exact division of integer polynomials (lists, low degree first)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(out) - 1, -1, -1):
        q, r = divmod(num[k + len(den) - 1], lead)
        if r:
            raise ArithmeticError("inexact polynomial division")
        out[k] = q
        if q:
            for j, d in enumerate(den):
                num[k + j] -= q * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@functools.lru_cache(maxsize=None)
def _cyclotomic(n):
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divexact_int(poly, _cyclotomic(d))
    return tuple(poly)


class FieldContext:
    """The cyclotomic field ``Q(zeta_N)``; use :func:`field` to obtain one."""

    def __init__(self, N):
        if not isinstance(N, int) or N < 4 or N % 4:
            raise ValueError(f"conductor must be a positive multiple of 4, got {N!r}")
        self.N = N
        cyc = _cyclotomic(N)
        self.phi = phi = len(cyc) - 1
        self.cyclotomic = cyc
        # reduction of zeta^k for k in [0, 2*phi - 2]
        vecs = []
        cur = [ONE] + [ZERO] * (phi - 1)
        for _ in range(max(2 * phi - 1, N)):
            vecs.append(tuple(cur))
            top = cur[-1]
            cur = [ZERO] + cur[:-1]
            if top:
                for j in range(phi):
                    cur[j] -= top * cyc[j]
        self._reduce = vecs[phi: 2 * phi - 1]
        self._powers = tuple(vecs[k] for k in range(N))
        self.zero_vec = (ZERO,) * phi
        self.one_vec = (ONE,) + (ZERO,) * (phi - 1)
        # conjugation matrix: column k is the vector of zeta^(-k)
        self._conj_cols = tuple(self._powers[(-k) % N] for k in range(phi))
        # integer copies (Phi_N is monic, so reduction stays integral)
        self._ireduce = tuple(
            tuple((j, mpz(x)) for j, x in enumerate(red) if x) for red in self._reduce
        )
        self._iconj = tuple(
            tuple((j, mpz(x)) for j, x in enumerate(col) if x) for col in self._conj_cols
        )
        self.zero_ivec = (mpz(0),) * phi
        self.one_ivec = (mpz(1),) + (mpz(0),) * (phi - 1)

    def __repr__(self):
        return f"FieldContext(N={self.N})"

    def __eq__(self, other):
        return isinstance(other, FieldContext) and other.N == self.N

    def __hash__(self):
        return hash(("FieldContext", self.N))

    def __reduce__(self):
        return (field, (self.N,))

    # raw vector arithmetic -------------------------------------------------

    def vec(self, value):
        """Coerce an int, Fraction, mpq or CycScalar into a coefficient vector."""
        if isinstance(value, CycScalar):
            if value.ctx is not self:
                if value.ctx.N != self.N:
                    raise ValueError("scalars from different fields")
            return value.v
        if isinstance(value, (int, Rational)) or type(value) is type(ONE):
            return (mpq(value),) + (ZERO,) * (self.phi - 1)
        raise TypeError(f"cannot coerce {type(value).__name__} into Q(zeta_{self.N})")

    @staticmethod
    def visrational(v):
        return not any(v[1:])

    def vadd(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def vsub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def vneg(self, a):
        return tuple(-x for x in a)

    def vscale(self, a, r):
        return tuple(x * r for x in a)

    def vmul(self, a, b):
        if not any(a[1:]):
            r = a[0]
            return tuple(x * r for x in b)
        if not any(b[1:]):
            r = b[0]
            return tuple(x * r for x in a)
        phi = self.phi
        prod = [ZERO] * (2 * phi - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        out = prod[:phi]
        for k, red in enumerate(self._reduce):
            top = prod[phi + k]
            if top:
                for j in range(phi):
                    if red[j]:
                        out[j] += top * red[j]
        return tuple(out)

    def vconj(self, a):
        out = [ZERO] * self.phi
        for k, x in enumerate(a):
            if x:
                col = self._conj_cols[k]
                for j in range(self.phi):
                    if col[j]:
                        out[j] += x * col[j]
        return tuple(out)

    def iconj(self, a):
        """Conjugate an integer coefficient vector."""
        if not any(a[1:]):
            return a
        out = [0] * self.phi
        for k, x in enumerate(a):
            if x:
                for j, y in self._iconj[k]:
                    out[j] += x * y
        return tuple(out)

    def ipolymul(self, A, B):
        """Product of polynomials with integer coefficient vectors (no trimming)."""
        phi = self.phi
        if phi == 1:
            out = [0] * (len(A) + len(B) - 1)
            for i, (a,) in enumerate(A):
                if a:
                    for j, (b,) in enumerate(B):
                        if b:
                            out[i + j] += a * b
            return [(x,) for x in out]
        width = 2 * phi - 1
        n = len(A) + len(B) - 1
        acc = [[0] * width for _ in range(n)]
        Bs = [[(k, y) for k, y in enumerate(bv) if y] for bv in B]
        for i, av in enumerate(A):
            nz = [(k, x) for k, x in enumerate(av) if x]
            if not nz:
                continue
            for j, bl in enumerate(Bs):
                if not bl:
                    continue
                row = acc[i + j]
                for k1, x in nz:
                    for k2, y in bl:
                        row[k1 + k2] += x * y
        red = self._ireduce
        out = []
        for row in acc:
            low = row[:phi]
            for k in range(phi - 1):
                top = row[phi + k]
                if top:
                    for j, y in red[k]:
                        low[j] += top * y
            out.append(tuple(low))
        return out

    def vinv(self, a):
        if not any(a):
            raise ZeroDivisionError("inverse of zero in cyclotomic field")
        if not any(a[1:]):
            return (ONE / a[0],) + (ZERO,) * (self.phi - 1)
        # extended Euclid in Q[x] between a(x) and Phi_N(x)
        r0 = [mpq(c) for c in self.cyclotomic]
        r1 = _trim(list(a))
        s0, s1 = [ZERO], [ONE]
        while len(r1) > 1 or r1[0] == 0:
            q, r = _qdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _trim(_qsub(s0, _qmul(q, s1)))
        # r1 is a nonzero constant; s1 * a == r1 (mod Phi_N)
        inv = r1[0]
        s1 = [c / inv for c in s1]
        out = list(s1[: self.phi]) + [ZERO] * (self.phi - len(s1))
        return tuple(out)

    def vpower_of_zeta(self, k):
        return self._powers[k % self.N]

    # convenience constructors ---------------------------------------------

    def scalar(self, value):
        return CycScalar(self, self.vec(value))

    def zeta(self, k=1):
        """The root of unity ``zeta_N^k``."""
        return CycScalar(self, self._powers[k % self.N])

    @property
    def i(self):
        return self.zeta(self.N // 4)

    def zero(self):
        return CycScalar(self, self.zero_vec)

    def one(self):
        return CycScalar(self, self.one_vec)


def _trim(p):
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _qsub(a, b):
    n = max(len(a), len(b))
    return [(a[k] if k < len(a) else ZERO) - (b[k] if k < len(b) else ZERO) for k in range(n)]


def _qmul(a, b):
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _qdivmod(a, b):
    a = list(a)
    b = _trim(list(b))
    if len(a) < len(b):
        return [ZERO], _trim(a)
    q = [ZERO] * (len(a) - len(b) + 1)
    lead = b[-1]
    for k in range(len(q) - 1, -1, -1):
        c = a[k + len(b) - 1] / lead
        q[k] = c
        if c:
            for j, d in enumerate(b):
                a[k + j] -= c * d
    return q, _trim(a[: len(b) - 1] or [ZERO])


@functools.lru_cache(maxsize=None)
def field(N):
    """Cached :class:`FieldContext` for conductor ``N``."""
    return FieldContext(N)


class CycScalar:
    """Immutable element of ``Q(zeta_N)``."""

    __slots__ = ("ctx", "v")

    def __init__(self, ctx, v):
        self.ctx = ctx
        self.v = tuple(v)

    def _coerce(self, other):
        if isinstance(other, CycScalar):
            if other.ctx.N != self.ctx.N:
                raise ValueError("scalars from different fields")
            return other.v
        try:
            return self.ctx.vec(other)
        except TypeError:
            return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycScalar(self.ctx, self.ctx.vadd(self.v, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycScalar(self.ctx, self.ctx.vsub(self.v, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycScalar(self.ctx, self.ctx.vsub(o, self.v))

    def __neg__(self):
        return CycScalar(self.ctx, self.ctx.vneg(self.v))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycScalar(self.ctx, self.ctx.vmul(self.v, o))

    __rmul__ = __mul__

    def inverse(self):
        return CycScalar(self.ctx, self.ctx.vinv(self.v))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycScalar(self.ctx, self.ctx.vmul(self.v, self.ctx.vinv(o)))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycScalar(self.ctx, self.ctx.vmul(o, self.ctx.vinv(self.v)))

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ctx.one_vec
        base = self.v
        while n:
            if n & 1:
                result = self.ctx.vmul(result, base)
            base = self.ctx.vmul(base, base)
            n >>= 1
        return CycScalar(self.ctx, result)

    def conjugate(self):
        return CycScalar(self.ctx, self.ctx.vconj(self.v))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.v == o

    def __hash__(self):
        if self.is_rational():
            return hash(Fraction(int(self.v[0].numerator), int(self.v[0].denominator)))
        return hash((self.ctx.N, self.v))

    def __bool__(self):
        return any(self.v)

    def is_zero(self):
        return not any(self.v)

    def is_rational(self):
        return not any(self.v[1:])

    def is_real(self):
        return self.ctx.vconj(self.v) == self.v

    def rational(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(int(self.v[0].numerator), int(self.v[0].denominator))

    def __complex__(self):
        import cmath

        N = self.ctx.N
        return sum(
            (float(c) * cmath.exp(2j * cmath.pi * k / N) for k, c in enumerate(self.v) if c),
            0j,
        )

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"CycScalar<N={self.ctx.N}>({format_scalar(self)})"


def _fmt_q(c):
    return str(c) if c.denominator != 1 else str(c.numerator)


def format_scalar(x):
    """Render in the input grammar: rational combination of ``z{k}`` terms."""
    terms = [(k, c) for k, c in enumerate(x.v) if c]
    if not terms:
        return "0"
    parts = []
    for k, c in terms:
        if k == 0:
            body = _fmt_q(abs(c))
        elif abs(c) == 1:
            body = f"z{{{k}}}"
        else:
            body = f"{_fmt_q(abs(c))}*z{{{k}}}"
        parts.append(("-" if c < 0 else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sgn, body in parts[1:]:
        out += f" {sgn} {body}"
    return out


# ---------------------------------------------------------------------------
# Laurent polynomials
# ---------------------------------------------------------------------------


class LaurentPoly:
    """Immutable element of ``K[t, t^-1]``.

    Stored densely as ``low`` (lowest exponent), a tuple ``num`` of integer
    coefficient vectors (first and last nonzero) and a positive common
    denominator ``den`` coprime to the content of ``num``.  The zero
    polynomial has ``num == ()``.  ``coeffs`` gives the rational vectors.
    """

    __slots__ = ("ctx", "low", "num", "den", "_hash", "_coeffs")

    def __init__(self, ctx, low, coeffs, _trusted=False):
        # ``coeffs``: rational coefficient vectors, lowest exponent first
        self.ctx = ctx
        coeffs = list(coeffs)
        if not _trusted:
            while coeffs and not any(coeffs[-1]):
                coeffs.pop()
            start = 0
            while start < len(coeffs) and not any(coeffs[start]):
                start += 1
            coeffs = coeffs[start:]
            low = low + start if coeffs else 0
        den = mpz(1)
        for v in coeffs:
            for x in v:
                if x:
                    d = x.denominator
                    if d != 1:
                        den = lcm(den, d)
        if den == 1:
            num = tuple(tuple(mpz(x) for x in v) for v in coeffs)
        else:
            num = tuple(tuple(mpz(x * den) for x in v) for v in coeffs)
        self._set(low, num, den)

    def _set(self, low, num, den):
        self.low = low
        self.num = num
        self.den = den
        self._hash = None
        self._coeffs = None

    @classmethod
    def _raw(cls, ctx, low, num, den, reduced=False):
        """Build from integer data; trims and removes common content."""
        self = object.__new__(cls)
        self.ctx = ctx
        if not reduced:
            num = list(num)
            while num and not any(num[-1]):
                num.pop()
            start = 0
            while start < len(num) and not any(num[start]):
                start += 1
            if start:
                num = num[start:]
                low += start
            if not num:
                self._set(0, (), mpz(1))
                return self
            g = den
            if g != 1:
                for v in num:
                    for x in v:
                        if x:
                            g = gcd(g, x)
                            if g == 1:
                                break
                    if g == 1:
                        break
            if g != 1:
                num = [tuple(x // g for x in v) for v in num]
                den = den // g
            num = tuple(num)
        self._set(low, num, den)
        return self

    @property
    def coeffs(self):
        if self._coeffs is None:
            d = self.den
            if d == 1:
                self._coeffs = tuple(tuple(mpq(x) for x in v) for v in self.num)
            else:
                self._coeffs = tuple(tuple(mpq(x, d) for x in v) for v in self.num)
        return self._coeffs

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, ctx):
        return cls._raw(ctx, 0, (), mpz(1), reduced=True)

    @classmethod
    def const(cls, ctx, value):
        return cls(ctx, 0, (ctx.vec(value),))

    @classmethod
    def monomial(cls, ctx, exponent, value=1):
        return cls(ctx, exponent, (ctx.vec(value),))

    @classmethod
    def t(cls, ctx):
        return cls.monomial(ctx, 1)

    @classmethod
    def from_terms(cls, ctx, terms):
        """Build from a mapping or iterable of ``(exponent, coefficient)``."""
        items = terms.items() if hasattr(terms, "items") else terms
        acc = {}
        for e, c in items:
            v = ctx.vec(c)
            acc[e] = ctx.vadd(acc[e], v) if e in acc else v
        acc = {e: v for e, v in acc.items() if any(v)}
        if not acc:
            return cls.zero(ctx)
        lo, hi = min(acc), max(acc)
        return cls(ctx, lo, [acc.get(e, ctx.zero_vec) for e in range(lo, hi + 1)])

    @classmethod
    def linear_root(cls, ctx, a):
        """``t - zeta_N^a``."""
        return cls(ctx, 0, (ctx.vneg(ctx.vpower_of_zeta(a)), ctx.one_vec))

    # basic queries --------------------------------------------------------

    @property
    def high(self):
        return self.low + len(self.num) - 1

    def span(self):
        """Euclidean norm on the Laurent ring: ``high - low`` (-1 for zero)."""
        return len(self.num) - 1

    def is_zero(self):
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_unit(self):
        return len(self.num) == 1

    def is_constant(self):
        return not self.num or (len(self.num) == 1 and self.low == 0)

    def is_one(self):
        return self.low == 0 and len(self.num) == 1 and self.den == 1 and self.num[0] == self.ctx.one_ivec

    def coeff(self, e):
        k = e - self.low
        if 0 <= k < len(self.num):
            return CycScalar(self.ctx, self.coeffs[k])
        return self.ctx.zero()

    def leading(self):
        return CycScalar(self.ctx, self.coeffs[-1])

    def trailing(self):
        return CycScalar(self.ctx, self.coeffs[0])

    def terms(self):
        """Nonzero ``(exponent, CycScalar)`` pairs in increasing exponent order."""
        return [
            (self.low + k, CycScalar(self.ctx, v)) for k, v in enumerate(self.coeffs) if any(v)
        ]

    def bit_size(self):
        size = self.den.bit_length()
        for v in self.num:
            for x in v:
                if x:
                    size += x.bit_length()
        return size

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.low == other.low and self.den == other.den and self.num == other.num
        if isinstance(other, (int, Rational, CycScalar)):
            return self == LaurentPoly.const(self.ctx, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.low, self.den, self.num))
        return self._hash

    def __reduce__(self):
        return (_rebuild_laurent, (self.ctx.N, self.low, self.num, self.den))

    # arithmetic -----------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Rational, CycScalar)) or type(other) is type(ONE):
            return LaurentPoly.const(self.ctx, other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if not o.num:
            return self
        if not self.num:
            return o
        da, db = self.den, o.den
        if da == db:
            L, fa, fb = da, 1, 1
        else:
            L = lcm(da, db)
            fa, fb = L // da, L // db
        lo = min(self.low, o.low)
        hi = max(self.high, o.high)
        zero = self.ctx.zero_ivec
        out = [zero] * (hi - lo + 1)
        off = self.low - lo
        if fa == 1:
            for k, v in enumerate(self.num):
                out[off + k] = v
        else:
            for k, v in enumerate(self.num):
                out[off + k] = tuple(x * fa for x in v)
        off = o.low - lo
        for k, v in enumerate(o.num):
            w = out[off + k]
            if fb == 1:
                out[off + k] = tuple(x + y for x, y in zip(w, v))
            else:
                out[off + k] = tuple(x + y * fb for x, y in zip(w, v))
        return LaurentPoly._raw(self.ctx, lo, out, L)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw(self.ctx, self.low, tuple(tuple(-x for x in v) for v in self.num), self.den, reduced=True)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            if not self.num or not other.num:
                return LaurentPoly.zero(self.ctx)
            return LaurentPoly._raw(
                self.ctx, self.low + other.low,
                self.ctx.ipolymul(self.num, other.num), self.den * other.den,
            )
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o

    __rmul__ = __mul__

    def scale(self, value):
        return self * LaurentPoly.const(self.ctx, value)

    def shift(self, k):
        """Multiply by ``t^k``."""
        if not self.num:
            return self
        return LaurentPoly._raw(self.ctx, self.low + k, self.num, self.den, reduced=True)

    def __pow__(self, n):
        if n < 0:
            if not self.is_unit():
                raise ValueError("negative power of a non-unit Laurent polynomial")
            inv = LaurentPoly(self.ctx, -self.low, (self.ctx.vinv(self.coeffs[0]),))
            return inv ** (-n)
        result = LaurentPoly.const(self.ctx, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self):
        """The involution ``sum a_e t^e -> sum conj(a_e) t^-e``."""
        if not self.num:
            return self
        ictx = self.ctx.iconj
        return LaurentPoly._raw(
            self.ctx, -self.high, tuple(ictx(v) for v in reversed(self.num)), self.den, reduced=True
        )

    # Euclidean structure ------------------------------------------------

    def normalize(self):
        """Return ``(unit, p0)`` with ``self == unit * p0``.

        ``p0`` is a polynomial in ``t`` with nonzero constant term and leading
        coefficient 1; ``unit`` is a monomial.
        """
        if not self.num:
            return LaurentPoly.const(self.ctx, 1), self
        ctx = self.ctx
        lead = self.coeffs[-1]
        inv = ctx.vinv(lead)
        p0 = LaurentPoly(ctx, 0, [ctx.vmul(v, inv) for v in self.coeffs], _trusted=True)
        unit = LaurentPoly(ctx, self.low, (lead,), _trusted=True)
        return unit, p0

    def divmod(self, other):
        """Euclidean division in ``K[t, t^-1]``: ``self = q*other + r`` with
        ``r.span() < other.span()``."""
        if not other.num:
            raise ZeroDivisionError("Laurent division by zero")
        ctx = self.ctx
        if not self.num:
            return LaurentPoly.zero(ctx), self
        nb = len(other.num)
        if len(self.num) < nb:
            return LaurentPoly.zero(ctx), self
        b = other.coeffs
        a = list(self.coeffs)
        inv_lead = ctx.vinv(b[-1])
        qlen = len(a) - nb + 1
        q = [ctx.zero_vec] * qlen
        vmul, vsub = ctx.vmul, ctx.vsub
        b_is_monic = b[-1] == ctx.one_vec
        for k in range(qlen - 1, -1, -1):
            top = a[k + nb - 1]
            if not any(top):
                continue
            c = top if b_is_monic else vmul(top, inv_lead)
            q[k] = c
            for j in range(nb):
                if any(b[j]):
                    a[k + j] = vsub(a[k + j], vmul(c, b[j]))
        quo = LaurentPoly(ctx, self.low - other.low, q)
        rem = LaurentPoly(ctx, self.low, a[: nb - 1])
        return quo, rem

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other):
        """True if ``self`` divides ``other`` in the Laurent ring."""
        return not other.divmod(self)[1]

    def evaluate(self, x):
        """Evaluate at a nonzero field element ``x``."""
        ctx = self.ctx
        xv = ctx.vec(x)
        acc = ctx.zero_vec
        for v in reversed(self.coeffs):
            acc = ctx.vadd(ctx.vmul(acc, xv), v)
        if self.low:
            acc = ctx.vmul(acc, (CycScalar(ctx, xv) ** self.low).v)
        return CycScalar(ctx, acc)

    def __call__(self, x):
        return self.evaluate(x)

    def __str__(self):
        return format_laurent(self)

    def __repr__(self):
        return f"LaurentPoly<N={self.ctx.N}>({format_laurent(self)})"


def _rebuild_laurent(N, low, num, den):
    return LaurentPoly._raw(field(N), low, num, den, reduced=True)


def format_laurent(p):
    """Canonical text form, exponents in decreasing order."""
    if not p.coeffs:
        return "0"
    pieces = []
    for e, c in reversed(p.terms()):
        if e == 0:
            tpow = ""
        elif e == 1:
            tpow = "t"
        else:
            tpow = f"t^{e}"
        if c.is_rational():
            r = c.v[0]
            sgn = "-" if r < 0 else "+"
            mag = abs(r)
            if not tpow:
                body = _fmt_q(mag)
            elif mag == 1:
                body = tpow
            else:
                body = f"{_fmt_q(mag)}*{tpow}"
        else:
            sgn = "+"
            body = f"({format_scalar(c)})" + (f"*{tpow}" if tpow else "")
        pieces.append((sgn, body))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sgn, body in pieces[1:]:
        out += f" {sgn} {body}"
    return out


# ---------------------------------------------------------------------------
# Operations named in the public contract
# ---------------------------------------------------------------------------


def evaluate_at_root(p, a):
    """``p(zeta_N^a)`` computed exactly."""
    N = p.ctx.N
    if not 0 <= a < N:
        raise ValueError(f"root index must lie in [0, {N}), got {a}")
    ctx = p.ctx
    acc = ctx.zero_vec
    for k, v in enumerate(p.coeffs):
        if any(v):
            acc = ctx.vadd(acc, ctx.vmul(v, ctx.vpower_of_zeta(a * (p.low + k))))
    return CycScalar(ctx, acc)


def involution(p):
    return p.conj()


def _iv_value(x, prec):
    N = x.ctx.N
    saved = iv.prec
    iv.prec = prec
    try:
        total = iv.mpf(0)
        two_pi_over_n = 2 * iv.pi / N
        for k, c in enumerate(x.v):
            if c:
                coef = iv.mpf(int(c.numerator)) / int(c.denominator)
                total += coef * iv.cos(two_pi_over_n * k)
        return total
    finally:
        iv.prec = saved


def sign_of_real(x):
    """Exact sign of a real element under ``zeta_N -> exp(2 pi i / N)``.

    Zero is decided exactly; otherwise interval evaluation is refined until
    the enclosure excludes zero.
    """
    if not x.is_real():
        raise ValueError(f"sign_of_real called on non-real scalar {x}")
    if x.is_zero():
        return 0
    if x.is_rational():
        return 1 if x.v[0] > 0 else -1
    prec = 64
    while True:
        val = _iv_value(x, prec)
        if val.a > 0:
            return 1
        if val.b < 0:
            return -1
        prec *= 2


# ---------------------------------------------------------------------------
# Text grammar
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    """Malformed polynomial text; ``pos`` is the 0-based character offset."""

    def __init__(self, message, text, pos):
        super().__init__(f"{message} at column {pos + 1}: {text!r}")
        self.text = text
        self.pos = pos
        self.reason = message


class _Parser:
    # expr   := term (('+' | '-') term)*
    # term   := unary (('*' | '/') unary)*
    # unary  := ('+' | '-') unary | power
    # power  := atom ('^' ['-' | '+'] INT)?
    # atom   := INT | 't' | 'i' | 'z' ('{' INT '}' | INT) | '(' expr ')'

    def __init__(self, ctx, text):
        self.ctx = ctx
        self.text = text
        self.src = text
        self.pos = 0

    def error(self, message, pos=None):
        raise ParseError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def take(self):
        ch = self.peek()
        self.pos += 1
        return ch

    def parse(self):
        if not self.text.strip():
            self.error("empty polynomial")
        value = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek() in ("+", "-") and self.peek():
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek() in ("*", "/") and self.peek():
            op_pos = self.pos
            op = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if not rhs.is_unit():
                    self.error("division only by nonzero monomials", op_pos)
                value = value * rhs ** -1
        return value

    def unary(self):
        ch = self.peek()
        if ch == "-":
            self.take()
            return -self.unary()
        if ch == "+":
            self.take()
            return self.unary()
        return self.power()

    def integer(self):
        self.skip()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.src[start: self.pos])

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() in ("-", "+") and self.peek():
                sign = -1 if self.take() == "-" else 1
            exp_pos = self.pos
            n = sign * self.integer()
            if n < 0 and not base.is_unit():
                self.error("negative exponent on a non-monomial", exp_pos)
            base = base ** n
        return base

    def atom(self):
        ch = self.peek()
        ctx = self.ctx
        if not ch:
            self.error("unexpected end of input")
        if ch.isdigit():
            return LaurentPoly.const(ctx, self.integer())
        if ch == "t":
            self.take()
            return LaurentPoly.t(ctx)
        if ch == "i":
            self.take()
            return LaurentPoly.const(ctx, ctx.i)
        if ch == "z":
            self.take()
            if self.peek() == "{":
                self.take()
                k = self.integer()
                if self.take() != "}":
                    self.error("expected '}'", self.pos - 1)
            else:
                k = self.integer()
            return LaurentPoly.const(ctx, ctx.zeta(k))
        if ch == "(":
            self.take()
            value = self.expr()
            if self.take() != ")":
                self.error("expected ')'", self.pos - 1)
            return value
        self.error(f"unexpected character {ch!r}")


def parse_laurent(ctx, text):
    """Parse the polynomial grammar, e.g. ``"3/2*t^-2 + (1 - i)*t"``.

    Integers, rationals ``p/q``, ``t`` with integer exponents, ``z{k}`` or
    ``zk`` for ``zeta_N^k``, ``i`` for ``zeta_N^(N/4)``, ``+ - * /``, ``^`` and
    parentheses.  Whitespace is ignored.  Division is allowed only by nonzero
    monomials.
    """
    if isinstance(text, (int, Rational)):
        return LaurentPoly.const(ctx, text)
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}", repr(text), 0)
    return _Parser(ctx, text).parse()


def parse_scalar(ctx, text):
    p = parse_laurent(ctx, text)
    if not p.is_constant():
        raise ParseError("expected a constant", text, 0)
    return p.coeff(0)

