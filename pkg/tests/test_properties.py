"""Property-based checks across modules."""

import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from sphbif.classify import boundedness_bound, convexity_threshold
from sphbif.coeff import ExactCoeff
from sphbif.harmonics import from_real, sh_eval, to_real
from sphbif.multipoly import MultiPoly
from sphbif.products import default_engine
from sphbif.symmetry import EulerAngles, invariants, orbit_reduce, real_rep_M

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=20)
angles = st.builds(EulerAngles, st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, math.pi))
vec5 = st.lists(st.floats(-3, 3), min_size=5, max_size=5)
index = st.integers(0, 3).flatmap(lambda l: st.tuples(st.just(l), st.integers(-l, l)))


def polys(nvars=2):
    mono = st.tuples(*[st.integers(0, 3)] * nvars)
    return st.dictionaries(mono, fracs.map(ExactCoeff.rational), max_size=4).map(lambda d: MultiPoly(nvars, d))


@given(polys(), polys(), polys())
def test_polynomial_ring_laws(p, q, r):
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert (p - p) == MultiPoly(2)


@given(polys(), st.lists(fracs, min_size=2, max_size=2))
def test_derivative_matches_difference_quotient(p, x):
    x = [float(v) for v in x]
    h = 1e-6
    num = (p.eval_numeric([x[0] + h, x[1]]) - p.eval_numeric([x[0] - h, x[1]])) / (2 * h)
    assert abs(p.diff(0).eval_numeric(x) - num) < 1e-4 * (1 + abs(num))


@given(st.lists(fracs, min_size=5, max_size=5))
def test_real_complex_roundtrip(a):
    exact = [ExactCoeff.rational(v) for v in a]
    assert to_real(from_real(exact)) == exact


@settings(max_examples=30, deadline=None)
@given(index, index, st.floats(0.1, 3.0), st.floats(0, 2 * math.pi))
def test_product_pointwise(a, b, theta, phi):
    prod = default_engine().product(a, b)
    lhs = sh_eval(*a, phi, theta) * sh_eval(*b, phi, theta)
    rhs = sum(complex(c) * sh_eval(l, m, phi, theta) for (l, m), c in prod)
    assert abs(lhs - rhs) < 1e-12


@given(angles, vec5)
def test_rotation_preserves_invariants(g, a):
    b = real_rep_M(g) @ np.array(a)
    i, j = invariants(a), invariants(b)
    assert math.isclose(i[0], j[0], rel_tol=1e-10, abs_tol=1e-10)
    assert math.isclose(i[1], j[1], rel_tol=1e-9, abs_tol=1e-9)


@given(vec5)
def test_orbit_representative_shares_invariants(a):
    x, y = orbit_reduce(a)
    i, j = invariants(a), invariants((0, 0, x, 0, y))
    assert math.isclose(i[0], j[0], rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(i[1], j[1], rel_tol=1e-8, abs_tol=1e-10)


@given(st.floats(0.01, 100), st.floats(0, 10))
def test_bound_monotone_in_m(lam, m):
    assert boundedness_bound(lam, m) <= boundedness_bound(lam, m + 1)


@settings(max_examples=20)
@given(st.floats(0.1, 50))
def test_convexity_threshold_solves_its_equation(m):
    x = convexity_threshold(m)
    assert math.isclose(8 * math.pi * m * math.exp(16 * m / x), x, rel_tol=1e-10)


def test_exact_fraction_input_is_preserved():
    assert to_real(from_real([Fraction(1, 3)] * 5)) == [ExactCoeff.rational(Fraction(1, 3))] * 5
