from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
import math

import numpy as np
import pytest

from sphbif.coeff import ONE, PI, ExactCoeff
from sphbif.harmonics import SHExpansion, sh_eval
from sphbif.oracle import SphereGrid, gaunt
from sphbif.products import ProductEngine, RecursionCapExceeded, apply_interaction, default_engine, product
from sphbif.spectrum import ONSAGER

HALF_INV_SQRT_PI = ExactCoeff.sqrt_rational(Fraction(1, 4), -1)
INDICES = [(l, m) for l in range(4) for m in range(-l, l + 1)]


def test_constant_factor():
    for l, m in INDICES:
        e = product((0, 0), (l, m))
        assert dict(e) == {(l, m): HALF_INV_SQRT_PI}


def test_y10_squared():
    e = product((1, 0), (1, 0))
    assert dict(e) == {(0, 0): HALF_INV_SQRT_PI, (2, 0): ExactCoeff.sqrt_rational(Fraction(1, 5), -1)}


def test_y20_squared_constant_term():
    assert product((2, 0), (2, 0))[(0, 0)] == HALF_INV_SQRT_PI


@pytest.mark.parametrize("a", INDICES)
def test_selection_rules(a):
    for b in INDICES:
        for (l, m), c in product(a, b):
            assert c
            assert m == a[1] + b[1]
            assert abs(a[0] - b[0]) <= l <= a[0] + b[0]
            assert (l + a[0] + b[0]) % 2 == 0


def test_matches_gaunt_quadrature():
    grid = SphereGrid(8)
    worst = 0.0
    for a in INDICES:
        for b in INDICES:
            e = product(a, b)
            for l in range(a[0] + b[0] + 1):
                for m in range(-l, l + 1):
                    worst = max(worst, abs(complex(e[(l, m)]) - gaunt(a, b, (l, m), grid)))
    assert worst < 1e-9


def test_pointwise_identity():
    rng = np.random.default_rng(11)
    phi, th = rng.uniform(0, 2 * math.pi, 100), rng.uniform(0, math.pi, 100)
    for a, b in [((3, -2), (4, 1)), ((4, 4), (4, -3)), ((2, 2), (1, -1))]:
        got = product(a, b).evaluate(phi, th)
        want = sh_eval(*a, phi, th) * sh_eval(*b, phi, th)
        assert np.max(np.abs(got - want)) < 1e-10


def test_commutative():
    for a in INDICES:
        for b in INDICES:
            assert product(a, b) == product(b, a)


def test_memo_transparent():
    cold = ProductEngine(memo=False)
    warm = ProductEngine()
    for a, b in [((4, -3), (3, 2)), ((4, 4), (4, 4)), ((3, 0), (2, -1))]:
        assert cold.product(a, b) == warm.product(a, b)
    assert len(warm) > 0


def test_depth_cap_is_enforced():
    eng = ProductEngine(memo=False, depth_cap=1)
    with pytest.raises(RecursionCapExceeded):
        eng.product((4, 1), (4, -2))


def test_concurrent_callers_agree():
    eng = ProductEngine()
    pairs = [(a, b) for a in INDICES[:9] for b in INDICES[:9]]
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda ab: eng.product(*ab), pairs))
    ref = ProductEngine(memo=False)
    assert all(r == ref.product(*ab) for r, ab in zip(results, pairs))


def test_expand_poly_scalar():
    eng = default_engine()
    c = ExactCoeff.rational(3)
    e = SHExpansion.single(2, 0, c)
    assert eng.expand_poly(e, 2) == eng.product((2, 0), (2, 0)).scale(c * c)


def test_expand_poly_cross_terms():
    eng = default_engine()
    e = SHExpansion.single(2, -2) + SHExpansion.single(2, 2)
    sq = eng.expand_poly(e, 2)
    for k in [(4, -4), (4, 0), (4, 4)]:
        assert sq[k]
    cross = eng.product((2, -2), (2, 2)).scale(2)
    direct = eng.product((2, -2), (2, -2)) + eng.product((2, 2), (2, 2)) + cross
    assert sq == direct


def test_expand_poly_zero():
    assert not default_engine().expand_poly(SHExpansion(), 3)


def test_apply_interaction():
    e = SHExpansion.single(2, 1) + SHExpansion.single(3, 0)
    out = apply_interaction(e, ONSAGER.eigenvalue)
    assert dict(out) == {(2, 1): -PI * PI / 8}
    assert not apply_interaction(SHExpansion(), ONSAGER.eigenvalue)
    with pytest.raises(KeyError):
        apply_interaction(e, {2: ONE})
