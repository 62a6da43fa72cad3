"""Zero-dimensional homology of the circle with coefficients in ``L^2(Z, mu)``.

The generator ``t`` of the fundamental group acts on ``L^2(Z, mu)`` by
multiplication with ``exp(i f)``.  Two input modes are supported:

* finite step cells ``(mu_i, f_i)``; angles are rational multiples of pi
  (handled exactly inside a cyclotomic field) or rational radians (handled by
  interval arithmetic, which always terminates because ``sin r`` and
  ``cos r`` are transcendental for rational ``r != 0``);
* monomial profiles ``f(s) = sign * s^k`` on an interval of length ``mu``
  around ``s = 0``, restricted to one side or taken on both.

Only profiles accumulate at ``f = 0``, so only they produce nonzero
capacities.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv, mp

from .laurent_linalg import LaurentMatrix
from .linking_core import DualityPresentation
from .scalars import CycScalar, field, sign_of_real

__all__ = [
    "Angle",
    "Cell",
    "Profile",
    "SteppedCircleModule",
    "SpectralDensityGerm",
    "CellMaps",
    "circle_presentation",
    "square_maps",
    "h0_presentation",
    "split_excision",
    "spectral_densities",
    "circle_capacities",
    "parse_angle",
]


# ---------------------------------------------------------------------------
# Exact real numbers of the form sin(angle), 2 - 2 cos(angle), rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Angle:
    """``value * pi`` if ``pi`` else ``value`` radians."""

    value: Fraction
    pi: bool = True

    def __str__(self):
        if not self.pi:
            return str(self.value)
        if self.value == 0:
            return "0"
        num, den = self.value.numerator, self.value.denominator
        head = "pi" if abs(num) == 1 else f"{abs(num)}*pi"
        head = ("-" if num < 0 else "") + head
        return head if den == 1 else f"{head}/{den}"

    def radians(self):
        return float(self.value) * (math.pi if self.pi else 1.0)

    def is_zero(self):
        return self.value == 0

    def __neg__(self):
        return Angle(-self.value, self.pi)


_ANGLE_RE = re.compile(r"^\s*([+-]?)\s*(\d*)\s*\*?\s*pi\s*(?:/\s*(\d+))?\s*$")


def parse_angle(text):
    """``"pi/6"``, ``"-2*pi/5"``, ``"pi"``, ``"0"`` or a rational like ``"1/3"``."""
    if isinstance(text, Angle):
        return text
    if isinstance(text, (int, Fraction)):
        return Angle(Fraction(text), pi=False)
    m = _ANGLE_RE.match(str(text))
    if m:
        sign, num, den = m.groups()
        val = Fraction(int(num) if num else 1, int(den) if den else 1)
        return Angle(-val if sign == "-" else val, pi=True)
    try:
        return Angle(Fraction(str(text).strip()), pi=False)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse angle {text!r}") from None


@dataclass(frozen=True)
class _Real:
    """A real number known exactly: ``kind`` is 'rat', 'sin' or 'chord'.

    'chord' stands for ``|exp(i x) - 1|^2 = 2 - 2 cos x``.
    """

    kind: str
    angle: Angle | None = None
    rat: Fraction | None = None

    def cyclotomic(self):
        """``(ctx, element)`` if the number lives in a cyclotomic field."""
        if self.kind == "rat":
            ctx = field(4)
            return ctx, ctx.scalar(self.rat)
        if not self.angle.pi:
            return None
        # angle = p pi = 2 pi * n / N with n = p N / 2
        p = self.angle.value
        N = 4 * p.denominator
        ctx = field(N)
        n = int(p * N / 2)
        z = ctx.zeta(n)
        zi = ctx.zeta(-n)
        if self.kind == "sin":
            return ctx, (z - zi) * (ctx.i * 2).inverse()
        return ctx, ctx.scalar(2) - z - zi

    def interval(self, prec):
        saved = iv.prec
        iv.prec = prec
        try:
            if self.kind == "rat":
                return iv.mpf(self.rat.numerator) / self.rat.denominator
            x = iv.mpf(self.angle.value.numerator) / self.angle.value.denominator
            if self.angle.pi:
                x = x * iv.pi
            return iv.sin(x) if self.kind == "sin" else 2 - 2 * iv.cos(x)
        finally:
            iv.prec = saved

    def __float__(self):
        if self.kind == "rat":
            return float(self.rat)
        x = self.angle.radians()
        return math.sin(x) if self.kind == "sin" else 2 - 2 * math.cos(x)

    def __str__(self):
        if self.kind == "rat":
            return str(self.rat)
        return f"sin({self.angle})" if self.kind == "sin" else f"2-2cos({self.angle})"


def _rat(x):
    return _Real("rat", rat=Fraction(x))


def _lift(ctx_from, x, ctx_to):
    m = ctx_to.N // ctx_from.N
    acc = ctx_to.zero_vec
    for k, c in enumerate(x.v):
        if c:
            acc = ctx_to.vadd(acc, ctx_to.vscale(ctx_to.vpower_of_zeta(k * m), c))
    return CycScalar(ctx_to, acc)


def _compare(x, y):
    """Exact sign of ``x - y``."""
    if x == y:
        return 0
    cx, cy = x.cyclotomic(), y.cyclotomic()
    if cx is not None and cy is not None:
        N = math.lcm(cx[0].N, cy[0].N)
        ctx = field(N)
        diff = _lift(cx[0], cx[1], ctx) - _lift(cy[0], cy[1], ctx)
        return sign_of_real(diff)
    prec = 64
    while True:
        a, b = x.interval(prec), y.interval(prec)
        if a.a > b.b:
            return 1
        if a.b < b.a:
            return -1
        prec *= 2
        if prec > 1 << 16:  # pragma: no cover - equality of transcendental values
            raise ArithmeticError(f"cannot separate {x} and {y}")


def _sign(x):
    return _compare(x, _rat(0))


# ---------------------------------------------------------------------------
# Modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    mu: Fraction
    f: Angle


@dataclass(frozen=True)
class Profile:
    """``f(s) = sign * s^k`` for ``s`` in an interval of length ``mu``.

    ``side`` is 'right' (``s in (0, mu]``), 'left' (``s in [-mu, 0)``) or
    'both' (``s in [-mu/2, mu/2]``).
    """

    k: int
    sign: int
    side: str = "both"
    mu: Fraction = Fraction(1)

    def __post_init__(self):
        if self.k < 1 or self.sign not in (1, -1) or self.side not in ("left", "right", "both"):
            raise ValueError(f"invalid profile {self}")
        if self.mu <= 0:
            raise ValueError("profile weight must be positive")

    def halves(self):
        """``[(side, sign of f on that side, length)]``."""
        out = []
        if self.side in ("right", "both"):
            out.append(("right", self.sign, self.mu if self.side == "right" else self.mu / 2))
        if self.side in ("left", "both"):
            out.append(("left", self.sign * (-1) ** self.k, self.mu if self.side == "left" else self.mu / 2))
        return out

    def negated(self):
        return Profile(self.k, -self.sign, self.side, self.mu)


@dataclass(frozen=True)
class SteppedCircleModule:
    cells: tuple = ()
    profiles: tuple = ()

    def __post_init__(self):
        cells = tuple(c if isinstance(c, Cell) else Cell(Fraction(c[0]), parse_angle(c[1])) for c in self.cells)
        for c in cells:
            if c.mu <= 0:
                raise ValueError(f"cell weight must be positive, got {c.mu}")
            if c.f.is_zero():
                raise ValueError("a cell with f = 0 violates the density condition (t - 1 must be injective)")
            if abs(c.f.radians()) > math.pi + 1e-12:
                raise ValueError(f"angle {c.f} outside [-pi, pi]")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "profiles", tuple(self.profiles))

    @classmethod
    def from_spec(cls, items):
        cells, profiles = [], []
        for item in items:
            if "profile" in item:
                p = item["profile"]
                profiles.append(Profile(int(p["k"]), int(p.get("sign", 1)), p.get("side", "both"), Fraction(str(p.get("mu", 1)))))
            else:
                cells.append(Cell(Fraction(str(item["mu"])), parse_angle(item["f"])))
        return cls(tuple(cells), tuple(profiles))

    def negated(self):
        """The module with ``f`` replaced by ``-f``."""
        return SteppedCircleModule(
            tuple(Cell(c.mu, -c.f) for c in self.cells), tuple(p.negated() for p in self.profiles)
        )


# ---------------------------------------------------------------------------
# The square of maps
# ---------------------------------------------------------------------------


def circle_presentation(ctx=None):
    """``A = t - 1`` and ``H = (1 + t^-1)/2`` in degree ``q = 0``."""
    ctx = ctx or field(4)
    A = LaurentMatrix.from_strings(ctx, [["t - 1"]])
    H = LaurentMatrix.from_strings(ctx, [["1/2*(1 + t^-1)"]])
    return DualityPresentation(A, H, 0)


def square_maps(p):
    """The commuting square ``(top, left, right, bottom)`` of a presentation.

    ``top = A``, ``right = H``, ``left = eps * H^dagger``, ``bottom = A^dagger``,
    so that ``bottom . left = right . top``.
    """
    return p.A, p.H.dagger().scale(p.epsilon), p.H, p.A.dagger()


@dataclass(frozen=True)
class CellMaps:
    """The four maps evaluated on one cell, where ``t`` acts by ``exp(i f)``."""

    cell: Cell
    top: object
    left: object
    right: object
    bottom: object
    exact: bool

    def commutes(self):
        lhs = self.bottom * self.left
        rhs = self.right * self.top
        if self.exact:
            return lhs == rhs
        return abs(lhs - rhs) < mp.mpf(10) ** (-(mp.dps - 5))


def h0_presentation(m):
    """Per-cell scalars of the square ``t - 1``, ``-(t + 1)/2``, ``(t^-1 + 1)/2``, ``t^-1 - 1``."""
    if m.profiles:
        raise ValueError("h0_presentation needs finite cells; profiles have no per-cell scalars")
    out = []
    for c in m.cells:
        if c.f.pi:
            r = _Real("sin", c.f).cyclotomic()
            ctx = r[0]
            p = c.f.value
            t = ctx.zeta(int(p * ctx.N / 2))
            half = ctx.scalar(Fraction(1, 2))
            one = ctx.one()
            tinv = t.inverse()
            maps = (t - one, -(t + one) * half, (tinv + one) * half, tinv - one)
            out.append(CellMaps(c, *maps, exact=True))
        else:
            t = mp.expj(mp.mpf(c.f.value.numerator) / c.f.value.denominator)
            tinv = 1 / t
            maps = (t - 1, -(t + 1) / 2, (tinv + 1) / 2, tinv - 1)
            out.append(CellMaps(c, *maps, exact=False))
    return out


# ---------------------------------------------------------------------------
# Excision and spectral densities
# ---------------------------------------------------------------------------


def split_excision(m, eps):
    """``(cells of M_eps, cells of Q)`` by ``|exp(i f) - 1|^2 < eps``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    small, large = [], []
    for c in m.cells:
        (small if _compare(_Real("chord", c.f), _rat(eps)) < 0 else large).append(c)
    return tuple(small), tuple(large)


@dataclass(frozen=True)
class SpectralDensityGerm:
    """A non-decreasing function of ``lambda > 0``.

    ``steps`` holds ``(threshold, weight)`` (a jump of ``weight`` at
    ``threshold``, sorted); ``powers`` holds ``(k, length)`` for continuous
    parts ``min(length, arcsin(lambda)^(1/k))``, one per profile half.
    """

    steps: tuple = ()
    powers: tuple = ()

    def value(self, lam):
        """Exact for step parts; ``powers`` are evaluated numerically."""
        lam = Fraction(lam)
        total = Fraction(0)
        for thr, w in self.steps:
            if _compare(thr, _rat(lam)) <= 0:
                total += w
        if not self.powers:
            return total
        x = mp.asin(min(mp.mpf(lam.numerator) / lam.denominator, mp.mpf(1)))
        return mp.mpf(total.numerator) / total.denominator + sum(
            min(mp.mpf(w.numerator) / w.denominator, x ** (mp.mpf(1) / k)) for k, w in self.powers
        )

    def breakpoints(self):
        acc = Fraction(0)
        out = []
        for thr, w in self.steps:
            acc += w
            out.append((thr, acc))
        return out

    def total_weight(self):
        return sum((w for _, w in self.steps), Fraction(0)) + sum((w for _, w in self.powers), Fraction(0))

    def capacity(self):
        """``1 / lim inf log F / log lambda`` as ``lambda -> 0``.

        Step parts are constant near 0 (the density condition keeps jumps
        away from 0) and contribute nothing; a continuous part of exponent
        ``1/k`` has capacity ``k``.
        """
        return max((k for k, w in self.powers if w > 0), default=0)

    def is_zero(self):
        return not self.steps and not self.powers

    def as_dict(self):
        return {
            "breakpoints": [[str(thr), str(v)] for thr, v in self.breakpoints()],
            "powers": [[k, str(w)] for k, w in self.powers],
        }


def _sort_steps(items):
    items = sorted(items, key=lambda tw: float(tw[0]))
    # float order can be wrong only for nearly equal thresholds; fix exactly
    return sorted(items, key=functools.cmp_to_key(lambda x, y: _compare(x[0], y[0])))


def spectral_densities(m, eps):
    """``(F_plus, F_minus)`` of the two definite parts after excision."""
    small, _ = split_excision(m, eps)
    plus, minus = [], []
    for c in small:
        s = _Real("sin", c.f)
        sg = _sign(s)
        if sg > 0:
            plus.append((s, c.mu))
        elif sg < 0:
            minus.append((_Real("sin", -c.f), c.mu))
    pp, pm = [], []
    for prof in m.profiles:
        for _, sign, length in prof.halves():
            (pp if sign > 0 else pm).append((prof.k, length))
    return (
        SpectralDensityGerm(tuple(_sort_steps(plus)), tuple(sorted(pp))),
        SpectralDensityGerm(tuple(_sort_steps(minus)), tuple(sorted(pm))),
    )


def circle_capacities(m, eps=1):
    """``(c_plus, c_minus)``: zero for finite cells, ``k`` per side hit by a profile."""
    fp, fm = spectral_densities(m, eps)
    return fp.capacity(), fm.capacity()
