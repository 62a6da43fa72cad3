import random

import pytest

from l2link import block_forms as bf
from l2link.laurent_linalg import LaurentMatrix, random_unimodular
from l2link.linking_core import (
    DualityPresentation,
    NotTorsionError,
    discriminant_form,
    gram_at_point,
    linking_pairing,
    local_solution,
    pairing_from_solution,
    validate_presentation,
)
from l2link.local import GermValue
from l2link.scalars import LaurentPoly, parse_laurent


def circle(ctx, sign=1):
    A = LaurentMatrix.from_strings(ctx, [["t - 1"]])
    H = LaurentMatrix.from_strings(ctx, [["1/2*(1 + t^-1)"]]).scale(sign)
    return DualityPresentation(A, H, 0)


def test_validate_circle(ctx):
    assert validate_presentation(circle(ctx))


def test_validate_detects_violation(ctx):
    p = DualityPresentation(LaurentMatrix.from_strings(ctx, [["t - 1"]]), LaurentMatrix.from_strings(ctx, [["1"]]), 0)
    rep = validate_presentation(p)
    assert not rep
    assert rep.entry == (0, 0)


def test_validate_zero(ctx):
    z = LaurentMatrix.zeros(ctx, 1, 1)
    assert validate_presentation(DualityPresentation(z, z, 0))


def test_shape_check(ctx):
    with pytest.raises(ValueError):
        DualityPresentation(LaurentMatrix.zeros(ctx, 2, 1), LaurentMatrix.zeros(ctx, 2, 1), 0)


def test_circle_pairing_is_order_one(ctx):
    one = LaurentPoly.const(ctx, 1)
    g = linking_pairing(circle(ctx), [one], [one], 0)
    assert g.order() == 1
    assert g.beta(1) == ctx.one()


def test_image_pairs_to_zero(ctx):
    x = [parse_laurent(ctx, "t - 1")]
    y = [LaurentPoly.const(ctx, 1)]
    assert linking_pairing(circle(ctx), x, y, 0).is_zero()


def test_free_component_rejected(ctx):
    A = LaurentMatrix.from_strings(ctx, [["t - 1"], ["0"]])
    H = LaurentMatrix.zeros(ctx, 1, 2)
    one, zero = LaurentPoly.const(ctx, 1), LaurentPoly.zero(ctx)
    with pytest.raises(NotTorsionError):
        linking_pairing(DualityPresentation(A, H, 0), [zero, one], [zero, one], 0)


def test_diagonal_blocks_are_orthogonal(ctx):
    f = bf.BlockForm(0, ((1, 1, 1), (2, 1, 1)))
    p = bf.synthesize(f, 1, ctx)
    one, zero = LaurentPoly.const(ctx, 1), LaurentPoly.zero(ctx)
    assert linking_pairing(p, [one, zero], [zero, one], 0).is_zero()


def test_gram_outside_support_is_empty(ctx):
    assert gram_at_point(circle(ctx), 2).size == 0


def test_gram_hermitian_symmetry(ctx):
    rng = random.Random(7)
    for q in (0, 1):
        f = bf.BlockForm(1, ((1, 1, 1), (2, -1, 1), (3, 1, 1)))
        form = gram_at_point(bf.synthesize(f, q, ctx, rng=rng, scramble=4), 1)
        assert form.is_hermitian()
        eps = form.epsilon
        for i in range(form.size):
            for j in range(form.size):
                rhs = form.gram[j][i].conj()
                assert form.gram[i][j] == (rhs if eps > 0 else -rhs)


def test_gram_entry_orders_bounded(ctx):
    f = bf.BlockForm(0, ((1, 1, 1), (3, -1, 1)))
    form = gram_at_point(bf.synthesize(f, 0, ctx, rng=random.Random(1), scramble=3), 0)
    for i in range(form.size):
        for j in range(form.size):
            assert form.gram[i][j].order() <= min(form.orders[i], form.orders[j])


def test_inflation_invariance(ctx):
    f = bf.BlockForm(0, ((2, 1, 1), (1, -1, 1)))
    p = bf.synthesize(f, 1, ctx, rng=random.Random(2), scramble=3)
    form = gram_at_point(p, 0)
    s = LaurentPoly.linear_root(ctx, 0)
    for x in form.generators:
        m, u, den = local_solution(p, x, 0)
        for y in form.generators:
            base = pairing_from_solution(p, y, m, u, den, 0)
            assert base == linking_pairing(p, x, y, 0)
            inflated = pairing_from_solution(p, y, m + 1, tuple(s * v for v in u), den, 0)
            assert inflated == base


def test_germ_conjugation_involutive(ctx8):
    betas = (ctx8.zeta(1), ctx8.scalar(3), ctx8.zeta(5))
    g = GermValue(8, 3, betas)
    assert g.conj().conj() == g


def test_discriminant_examples(ctx):
    I = LaurentMatrix.from_strings(ctx, [["2 - t - t^-1"]])
    forms = discriminant_form(I, 0)
    assert list(forms) == [0]
    assert forms[0].orders == (2,)
    assert discriminant_form(LaurentMatrix.from_strings(ctx, [["1"]]), 0) == {}
    I2 = LaurentMatrix.from_strings(ctx, [["2 - t - t^-1", "0"], ["0", "1"]])
    assert discriminant_form(I2, 0)[0].orders == (2,)


def test_discriminant_requires_hermitian(ctx):
    with pytest.raises(ValueError):
        discriminant_form(LaurentMatrix.from_strings(ctx, [["t"]]), 0)
    with pytest.raises(ValueError):
        discriminant_form(LaurentMatrix.zeros(ctx, 1, 1), 0)
