import random

import pytest

from l2link.scalars import LaurentPoly, field


@pytest.fixture
def ctx():
    return field(4)


@pytest.fixture
def ctx8():
    return field(8)


def random_laurent(ctx, rng, max_deg=2, coeff=3, low=-1):
    terms = {}
    lo = rng.randint(low, 0)
    for e in range(lo, lo + rng.randint(0, max_deg) + 1):
        c = rng.randint(-coeff, coeff)
        if c:
            terms[e] = c
    return LaurentPoly.from_terms(ctx, terms)


@pytest.fixture
def rng():
    return random.Random(20261019)
