from fractions import Fraction
import json

import pytest

from sphbif.coeff import ONE, PI, SQRT_PI, ZERO, ExactCoeff
from sphbif.multipoly import MultiPoly
from sphbif.reduction import (
    LAM, NVARS, BifurcationEq, equivariance_residual, make_setup, reduce, residual_part, restrict_to_S,
    taylor_el, to_real_eq,
)

SQRT5PI = ExactCoeff.term(1, 5, 1)


def mono(**kw):
    names = ["um2", "um1", "u0", "u1", "u2", "lam"]
    return tuple(kw.get(n, 0) for n in names)


def test_taylor_has_fifteen_summands():
    el = taylor_el()
    assert el.summands() == 15
    assert el.lambda2 == PI / 32
    assert el.linear_coefficient() == (4 * PI).inverse()


def test_taylor_interaction_coefficients():
    el = taylor_el()
    pure = {t.power: t.coeff for t in el.terms if not t.moments}
    assert pure[2] == -(8 * PI).inverse()
    assert pure[4] == -(96 * PI).inverse()
    assert all(t.order <= 4 for t in el.terms)


def test_expansion_vanishes_at_base_point():
    setup = make_setup()
    assert residual_part(setup, {}, 4) == {}


def test_linear_inverse_refuses_kernel_degree():
    setup = make_setup()
    with pytest.raises(ZeroDivisionError):
        setup.linv(2)
    assert setup.linv(4) == 64 * (7 * PI * PI).inverse() * 4 * PI


def test_vhat_low_cells_vanish(reduction):
    for ij in [(0, 0), (1, 0), (0, 1)]:
        assert not reduction.vhat[ij]


def test_vhat_avoids_kernel_degree(reduction):
    for cell in reduction.vhat.cells.values():
        assert all(l != 2 for l, _ in cell)
        assert all(l <= 8 for l, _ in cell)


def test_vhat20_values(reduction):
    cell = reduction.vhat[(2, 0)]
    assert sorted(cell) == [(4, m) for m in range(-4, 5)]
    assert cell[(4, 0)][mono(u0=2)] == -3 * SQRT_PI.inverse() / 49
    total = sum(len(p) for p in cell.values())
    assert total == 15


def test_vhat20_is_inverse_operator_times_quadratic_part(reduction):
    # v20 = -L^-1 (1-P) R_2 with R_2 = -U(u^2)/(8 pi) at degree four
    from sphbif.products import default_engine
    from sphbif.spectrum import ONSAGER

    eng = default_engine()
    setup = make_setup()
    scale = -setup.linv(4) * (-(8 * PI).inverse()) * ONSAGER.eigenvalue(4) * 2
    cell = reduction.vhat[(2, 0)]
    for m1 in range(-2, 3):
        for m2 in range(m1, 3):
            e = [0] * 6
            e[m1 + 2] += 1
            e[m2 + 2] += 1
            mult = 1 if m1 == m2 else 2
            prod = eng.product((2, m1), (2, m2))
            if prod[(4, m1 + m2)]:
                assert cell[(4, m1 + m2)][tuple(e)] == scale * mult * prod[(4, m1 + m2)]


def test_trivial_solution_persists(reduction):
    for p in reduction.complex_eq.components:
        assert all(sum(e[:LAM]) > 0 for e in p.terms)


def test_linear_terms(reduction):
    for eq in (reduction.complex_eq, reduction.real_eq):
        for m in range(-2, 3):
            e = [0] * 6
            e[m + 2] = 1
            e[LAM] = 1
            assert eq.coefficient(m, e) == ONE
            lin = eq[m].filter(lambda x: sum(x) <= 2 and sum(x[:LAM]) == 1 and x[LAM] <= 1)
            assert len(lin) == 1


def test_quadratic_coefficients(reduction):
    f = reduction.complex_eq
    assert f.coefficient(0, mono(u0=2)) == SQRT5PI / 448
    assert f.coefficient(-2, mono(um1=2)) == ExactCoeff.sqrt_rational(Fraction(15, 2), 1) / 448
    fr = reduction.real_eq
    assert fr.coefficient(2, mono(u0=1, u2=1)) == -SQRT5PI / 224
    assert fr.coefficient(-2, mono(um1=2)) == ZERO


def test_real_equation_is_real(reduction):
    for p in reduction.real_eq.components:
        assert all(c.is_real() for c in p.terms.values())


def test_restriction_constants(reduction):
    red = reduction.reduced
    assert red.c == SQRT5PI / 448
    assert red.d == ExactCoeff.rational(Fraction(31, 43904))
    assert red.f0[(3, 0, 1)] == 36 * PI.inverse() / 2401
    assert red.f0[(1, 0, 1)] == ONE
    assert red.f0[(4, 0, 0)] == -7145 * ExactCoeff.term(1, 5, -1) / 47328512
    assert red.f0[(2, 2, 0)] == 4287 * ExactCoeff.term(1, 5, -1) / 23664256
    assert red.f0[(0, 4, 0)] == 4287 * ExactCoeff.term(1, 5, -1) / 47328512


def test_restriction_rejects_broken_symmetry(reduction):
    comps = list(reduction.real_eq.components)
    comps[0] = comps[0] + MultiPoly(NVARS, {mono(u0=2): ONE})
    with pytest.raises(ArithmeticError):
        restrict_to_S(BifurcationEq("real", comps, 4))


def test_to_real_rejects_real_input(reduction):
    with pytest.raises(ValueError):
        to_real_eq(reduction.real_eq)


def test_equivariance(reduction):
    assert equivariance_residual(reduction.real_eq, trials=20, seed=0) <= 1e-9


def test_lower_order_is_truncation(reduction):
    r3 = reduce(order=3)
    for a, b in zip(reduction.complex_eq.components, r3.complex_eq.components):
        assert a.truncate(3) == b


def test_order_five_leaves_order_four_unchanged(reduction):
    r5 = reduce(order=5)
    for a, b in zip(r5.complex_eq.components, reduction.complex_eq.components):
        assert a.truncate(4) == b


def test_json_export(reduction):
    data = json.loads(reduction.real_eq.to_json())
    assert data["basis"] == "real" and data["order"] == 4
    row = data["terms"][0]
    assert set(row) == {"component", "exponents", "coeff", "coeff_str", "coeff_float"}
    assert len(row["exponents"]) == 6
