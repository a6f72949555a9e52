import dataclasses
import math

import numpy as np
import pytest

from sphbif.harmonics import sh_eval
from sphbif.oracle import (
    DensityField, QuadratureError, SphereGrid, axial_independence_check, branch_residual_fit, convolve,
    el_residual, free_energy, gaunt, integrate, kernel_bound, kernel_eigen_integral, second_variation,
    zonal_eigenvalue,
)
from sphbif.spectrum import MAIER_SAUPE, ONSAGER

RAW_ONSAGER = dataclasses.replace(ONSAGER, normalized=False)
LAM2 = math.pi / 32


def test_grid_basics(grid16):
    assert grid16.size == 16 * 32
    assert grid16.exact_degree == 31
    assert integrate(np.ones(grid16.size), grid16) == pytest.approx(4 * math.pi, rel=1e-14)
    z = np.cos(grid16.theta)
    assert integrate(z**2, grid16) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert integrate(z**30, grid16) == pytest.approx(4 * math.pi / 31, rel=1e-13)
    with pytest.raises(QuadratureError):
        SphereGrid(0)


def test_kinked_integrand_converges_algebraically():
    p = np.array([math.sin(0.7) * math.cos(0.3), math.sin(0.7) * math.sin(0.3), math.cos(0.7)])
    errs = []
    for n in (16, 64):
        g = SphereGrid(n)
        errs.append(abs(integrate(ONSAGER(g.points() @ p), g) - math.pi**2))
    # the kink at p.q = +-1 caps the rate; quadrupling n gains well over 10x but not spectral accuracy
    assert errs[1] < errs[0] / 10
    assert 1e-6 < errs[1] < 1e-4


def test_gaunt(grid16):
    assert gaunt((0, 0), (0, 0), (0, 0), grid16) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert abs(gaunt((2, 1), (2, 1), (2, 0), grid16)) < 1e-15
    assert gaunt((2, 0), (2, 0), (0, 0), grid16) == pytest.approx(1 / math.sqrt(4 * math.pi))
    with pytest.raises(QuadratureError):
        gaunt((10, 0), (10, 0), (12, 0), grid16)


def test_zonal_eigenvalues_match_closed_form():
    for s in range(0, 9):
        assert zonal_eigenvalue(RAW_ONSAGER, s) == pytest.approx(float(RAW_ONSAGER.eigenvalue(s)), abs=1e-12)
    assert zonal_eigenvalue(ONSAGER, 0) == 0.0
    assert zonal_eigenvalue(MAIER_SAUPE, 2) == pytest.approx(float(MAIER_SAUPE.eigenvalue(2)), abs=1e-13)


def test_kernel_eigen_integral_at_probe():
    val = kernel_eigen_integral(ONSAGER, 2, 1, (0.4, 1.1), SphereGrid(48))
    assert val == pytest.approx(-math.pi**2 / 8, rel=1e-4)
    with pytest.raises(QuadratureError):
        kernel_eigen_integral(ONSAGER, 2, 1, (0.4, 0.0), SphereGrid(16))


def test_convolve_is_diagonal(grid16):
    y = sh_eval(4, 2, grid16.phi, grid16.theta).real
    out = convolve(y, ONSAGER, grid16)
    assert np.allclose(out, float(ONSAGER.eigenvalue(4)) * y, atol=1e-13)


def test_free_energy_of_uniform_state(grid16):
    rho = DensityField.uniform(grid16)
    lam = 0.1
    base = lam * math.log(1 / (4 * math.pi))
    assert free_energy(rho, lam, ONSAGER, grid16) == pytest.approx(base, abs=1e-14)
    # the kernel constant pi/4 contributes pi/8 once normalisation is off
    assert free_energy(rho, lam, RAW_ONSAGER, grid16) == pytest.approx(base + math.pi / 8, abs=1e-13)
    direct = free_energy(rho, lam, RAW_ONSAGER, grid16, method="direct")
    assert direct == pytest.approx(base + math.pi / 8, abs=5e-4)
    with pytest.raises(ValueError):
        free_energy(rho, lam, ONSAGER, grid16, method="other")
    with pytest.raises(ValueError):
        free_energy(np.zeros(grid16.size), lam, ONSAGER, grid16)


def test_free_energy_methods_agree_for_polynomial_kernel(grid16):
    rho = DensityField.from_function(grid16, lambda ph, th: (1 + 0.3 * np.cos(th) ** 2) / (4.4 * math.pi))
    rho.validate_density()
    a = free_energy(rho, 0.2, MAIER_SAUPE, grid16)
    b = free_energy(rho, 0.2, MAIER_SAUPE, grid16, method="direct")
    assert a == pytest.approx(b, abs=1e-13)


def test_el_residual(grid16):
    assert el_residual(np.zeros(grid16.size), 0.3, ONSAGER, grid16) < 1e-15
    y = sh_eval(2, 0, grid16.phi, grid16.theta).real
    r1 = el_residual(1e-2 * y, LAM2, ONSAGER, grid16)
    r2 = el_residual(5e-3 * y, LAM2, ONSAGER, grid16)
    # linear part cancels at lambda_2; what remains is quadratic
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)
    off = el_residual(1e-6 * y, LAM2 + 0.01, ONSAGER, grid16)
    assert off == pytest.approx(0.01 * 1e-6 * np.max(np.abs(y)), rel=1e-3)


def test_second_variation(grid16):
    rho = DensityField.uniform(grid16)
    y = sh_eval(2, 0, grid16.phi, grid16.theta).real
    lam = 0.1
    assert second_variation(y, rho, lam, ONSAGER, grid16) == pytest.approx(4 * math.pi * lam - math.pi**2 / 8,
                                                                          abs=1e-14)


def test_kernel_bound(grid16):
    assert 0.99 < kernel_bound(ONSAGER, grid16) <= 1.0


def test_density_validation(grid16):
    with pytest.raises(ValueError):
        DensityField(grid16, np.full(grid16.size, 1.0)).validate_density()
    with pytest.raises(ValueError):
        DensityField(grid16, np.full(grid16.size, -1 / (4 * math.pi))).validate_density()


def test_csv_roundtrip(tmp_path, grid16):
    rho = DensityField.from_function(grid16, lambda ph, th: 1 + np.sin(th) * np.cos(ph))
    path = tmp_path / "rho.csv"
    rho.to_csv(path)
    back = DensityField.from_csv(path, grid16)
    assert np.array_equal(back.values, rho.values)
    with pytest.raises(ValueError):
        DensityField.from_csv(path, SphereGrid(8))
    empty = tmp_path / "empty.csv"
    empty.write_text("theta,phi,value\n")
    with pytest.raises(ValueError):
        DensityField.from_csv(empty, grid16)


@pytest.mark.parametrize("rho", [
    lambda th, ph: np.ones_like(th),
    lambda th, ph: np.exp(0.8 * np.cos(th) ** 2),
    lambda th, ph: 1 + 0.5 * np.cos(th) + np.cos(th) ** 4,
])
def test_axial_independence(rho):
    rep = axial_independence_check(rho, ONSAGER, SphereGrid(24))
    assert rep.variation < 1e-12
    assert len(rep.per_theta) == 5


def test_axial_negative_control():
    rep = axial_independence_check(lambda th, ph: 1 + 0.1 * np.cos(2 * ph) * np.sin(th) ** 2,
                                   ONSAGER, SphereGrid(24))
    assert rep.variation > 0.1


def test_branch_residual_exponent():
    c = math.sqrt(5 * math.pi) / 448
    fit = branch_residual_fit(c)
    assert fit.exponent >= 1.9
    assert fit.amplitudes[0] == pytest.approx(-1e-4 / c)
    # doubling the amplitude leaves an uncancelled lambda^2 term
    bad = branch_residual_fit(c, amplitude=lambda lam: -2 * lam / c)
    assert bad.residuals[0] > 10 * fit.residuals[0]
