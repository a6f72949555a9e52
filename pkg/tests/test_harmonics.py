from fractions import Fraction
import json
import math

import numpy as np
import pytest

from sphbif.coeff import ONE, ZERO, ExactCoeff
from sphbif.harmonics import (
    SHExpansion, SHIndex, alp, basis_matrix, basis_matrix_inverse, from_real, normalization, sh_eval, sh_table,
    to_real,
)
from sphbif.oracle import integrate

RNG = np.random.default_rng(7)


def test_alp_closed_forms():
    x = np.linspace(-0.9, 0.9, 11)
    assert np.allclose(alp(0, 0)(x), 1.0)
    assert alp(2, 0).poly == (Fraction(-1, 2), Fraction(0), Fraction(3, 2))
    assert np.allclose(alp(1, 1)(x), np.sqrt(1 - x * x))


def test_alp_negative_order():
    x = np.linspace(-0.9, 0.9, 7)
    assert np.allclose(alp(3, -2)(x), alp(3, 2)(x) / 120)


def test_alp_index_errors():
    with pytest.raises(ValueError):
        alp(2, 3)
    with pytest.raises(ValueError):
        SHIndex(1, -2)


def test_normalization_values():
    assert normalization(0, 0) == ExactCoeff.sqrt_rational(Fraction(1, 4), -1)
    assert normalization(2, 0) == ExactCoeff.sqrt_rational(Fraction(5, 4), -1)
    assert normalization(1, 1) == -ExactCoeff.sqrt_rational(Fraction(3, 8), -1)


def test_sh_eval_values():
    assert math.isclose(sh_eval(0, 0, 1.3, 0.4).real, 0.28209479177387814, rel_tol=1e-14)
    assert math.isclose(sh_eval(2, 0, 0.7, 0.0).real, 0.6307831305050401, rel_tol=1e-14)
    assert math.isclose(sh_eval(1, 1, 0.0, math.pi / 2).real, -0.3454941494713355, rel_tol=1e-14)


def test_basis_map_examples():
    assert from_real([0, 0, 1, 0, 0]) == [ZERO, ZERO, ONE, ZERO, ZERO]
    r = ExactCoeff.sqrt_rational(Fraction(1, 2))
    assert from_real([0, 0, 0, 0, 1]) == [r, ZERO, ZERO, ZERO, r]


def test_basis_map_round_trip():
    a = [ExactCoeff.rational(Fraction(k, 3)) for k in (1, -2, 5, 7, -4)]
    assert to_real(from_real(a)) == a


def test_basis_matrix_is_unitary():
    T, Ti = basis_matrix(), basis_matrix_inverse()
    for i in range(5):
        for j in range(5):
            s = sum((T[k][i].conjugate() * T[k][j] for k in range(5)), ZERO)
            assert s == (ONE if i == j else ZERO)
            assert Ti[i][j] == T[j][i].conjugate()


def test_real_input_gives_real_field():
    phi, th = RNG.uniform(0, 2 * math.pi, 50), RNG.uniform(0, math.pi, 50)
    a = RNG.normal(size=5)
    T = np.array([[complex(c) for c in row] for row in basis_matrix()])
    u = T @ a
    vals = sum(u[m + 2] * sh_eval(2, m, phi, th) for m in range(-2, 3))
    assert np.max(np.abs(vals.imag)) < 1e-12


def test_conjugation_symmetry():
    phi, th = RNG.uniform(0, 2 * math.pi, 40), RNG.uniform(0, math.pi, 40)
    for l in range(6):
        for m in range(-l, l + 1):
            lhs = np.conj(sh_eval(l, m, phi, th))
            rhs = (-1) ** m * sh_eval(l, -m, phi, th)
            assert np.max(np.abs(lhs - rhs)) < 1e-14


def test_orthonormality(grid16):
    table = sh_table(8, grid16.phi, grid16.theta)
    keys = sorted(table)
    Y = np.array([table[k] for k in keys])
    gram = (Y * grid16.weights) @ np.conj(Y).T
    assert np.max(np.abs(gram - np.eye(len(keys)))) < 1e-12


def test_table_matches_single_evaluation():
    phi, th = RNG.uniform(0, 2 * math.pi, 9), RNG.uniform(0, math.pi, 9)
    table = sh_table(5, phi, th)
    for (l, m), v in table.items():
        assert np.allclose(v, sh_eval(l, m, phi, th), atol=1e-14)


def test_expansion_algebra_and_json():
    a = SHExpansion.single(2, 1, ExactCoeff.rational(Fraction(1, 2)))
    b = SHExpansion.single(2, 1, ExactCoeff.rational(Fraction(-1, 2)))
    assert not (a + b)
    assert (a - b)[(2, 1)] == ONE
    data = a.to_json()
    assert json.loads(json.dumps(data))["basis"] == "complex"
    assert SHExpansion.from_json(data) == a
    with pytest.raises(ValueError):
        a + SHExpansion.single(2, 1, basis="real")


def test_expansion_evaluates(grid16):
    e = SHExpansion.single(2, 0) + SHExpansion.single(4, -3, ExactCoeff.rational(3))
    got = e.evaluate(grid16.phi[:20], grid16.theta[:20])
    want = sh_eval(2, 0, grid16.phi[:20], grid16.theta[:20]) + 3 * sh_eval(4, -3, grid16.phi[:20], grid16.theta[:20])
    assert np.allclose(got, want, atol=1e-14)


def test_orthonormality_by_integrate(grid16):
    y = sh_eval(2, 0, grid16.phi, grid16.theta)
    assert abs(integrate(np.abs(y) ** 2, grid16) - 1) < 1e-12
