from fractions import Fraction

import pytest

from l2link import block_forms as bf
from l2link.circle_example import (
    Profile,
    SteppedCircleModule,
    circle_capacities,
    circle_presentation,
    h0_presentation,
    parse_angle,
    spectral_densities,
    split_excision,
    square_maps,
)
from l2link.scalars import format_laurent, parse_laurent


def cells(*items):
    return SteppedCircleModule.from_spec([{"mu": mu, "f": f} for mu, f in items])


def test_parse_angle():
    assert parse_angle("pi/6").value == Fraction(1, 6)
    assert parse_angle("-2*pi/5").value == Fraction(-2, 5)
    assert parse_angle("pi").value == 1
    a = parse_angle("1/3")
    assert not a.pi and a.value == Fraction(1, 3)
    with pytest.raises(ValueError):
        parse_angle("pie")


def test_square_of_the_circle():
    p = circle_presentation()
    top, left, right, bottom = square_maps(p)
    ctx = p.ctx
    expected = ["t - 1", "-1/2*(t+1)", "1/2*(t^-1+1)", "t^-1 - 1"]
    got = [m[0, 0] for m in (top, left, right, bottom)]
    assert [format_laurent(x) for x in got] == [format_laurent(parse_laurent(ctx, e)) for e in expected]
    assert bottom @ left == right @ top


def test_quarter_turn_cell():
    (cm,) = h0_presentation(cells(("1", "pi/2")))
    ctx = cm.top.ctx
    i, one = ctx.i, ctx.one()
    half = ctx.scalar(Fraction(1, 2))
    assert cm.top == i - one
    assert cm.left == -(i + one) * half
    assert cm.right == (-i + one) * half
    assert cm.bottom == -i - one
    assert cm.commutes()


def test_cells_commute_numerically():
    for cm in h0_presentation(cells(("1", "1/3"), ("2", "-5/2"))):
        assert cm.commutes()


def test_density_condition():
    with pytest.raises(ValueError):
        cells(("1", "0"))
    with pytest.raises(ValueError):
        cells(("0", "pi/3"))


def test_excision():
    m = cells(("1", "pi"), ("1", "pi/12"), ("1", "1/10"), ("1", "-pi/2"))
    small, large = split_excision(m, 1)
    assert [str(c.f) for c in large] == ["pi", "-pi/2"]
    assert len(small) + len(large) == 4
    # 2 - 2 cos(pi/3) = 1 exactly, which is not < 1
    small, large = split_excision(cells(("1", "pi/3")), 1)
    assert not small


def test_density_single_cell():
    fp, fm = spectral_densities(cells(("1", "pi/6")), 4)
    assert fp.value(Fraction(1, 3)) == 0
    assert fp.value(Fraction(1, 2)) == 1
    assert fp.value(1) == 1
    assert fm.is_zero()


def test_symmetric_pair():
    fp, fm = spectral_densities(cells(("1", "pi/6"), ("1", "-pi/6")), 4)
    assert fp.breakpoints() == fm.breakpoints()


def test_empty_excision():
    fp, fm = spectral_densities(cells(("1", "pi")), 1)
    assert fp.is_zero() and fm.is_zero()


def test_finite_cells_have_zero_capacity():
    assert circle_capacities(cells(("1", "pi/7"), ("3", "-1/5"))) == (0, 0)


def test_profiles():
    cube = SteppedCircleModule(profiles=(Profile(3, 1, "both"),))
    assert circle_capacities(cube) == (3, 3)
    square = SteppedCircleModule(profiles=(Profile(2, 1, "right"),))
    assert circle_capacities(square) == (2, 0)


@pytest.mark.parametrize("k", range(1, 6))
@pytest.mark.parametrize("sign", [1, -1])
def test_profile_matches_blocks(k, sign):
    block = bf.BlockForm(0, ((k, sign, 1),))
    for side, trace in [("both", "interior"), ("left", "terminal"), ("right", "initial")]:
        m = SteppedCircleModule(profiles=(Profile(k, sign, side),))
        assert circle_capacities(m) == bf.capacity(block, trace)


def test_profile_density_scaling():
    m = SteppedCircleModule(profiles=(Profile(2, 1, "right"),))
    fp, _ = spectral_densities(m, 1)
    # arcsin(lambda)^(1/2) for small lambda
    assert abs(fp.value(Fraction(1, 100)) - 0.10000083) < 1e-7


def test_flip_swaps_densities():
    m = cells(("1", "pi/5"), ("1/2", "-pi/7"), ("2", "1/4"))
    fp, fm = spectral_densities(m, 2)
    gp, gm = spectral_densities(m.negated(), 2)
    assert fp.breakpoints() == gm.breakpoints()
    assert fm.breakpoints() == gp.breakpoints()
