"""Independent quadrature oracles on the sphere.

Integrals use a Gauss-Legendre grid in ``cos(theta)`` times a uniform grid in
``phi``.  Kernel convolutions are evaluated through the zonal collapse
``mu_s = 2 pi int k(t) P_s(t) dt``, so the non-smooth Onsager kernel never
meets a fixed-order rule directly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as spi, special

from .harmonics import sh_eval, sh_table
from .spectrum import KernelSpec

FOUR_PI = 4.0 * math.pi


class QuadratureError(ValueError):
    """Grid too coarse or probe point unusable."""


@dataclass(frozen=True)
class SphereGrid:
    """``n`` Gauss-Legendre nodes in ``cos(theta)`` times ``2n`` uniform nodes in ``phi``.

    Exact for spherical-harmonic integrands of total degree ``<= 2n - 1``.
    """

    order: int

    def __post_init__(self):
        if self.order < 1:
            raise QuadratureError("grid order must be positive")

    @property
    def _nodes(self):
        return _grid_nodes(self.order)

    @property
    def phi(self) -> np.ndarray:
        return self._nodes[0]

    @property
    def theta(self) -> np.ndarray:
        return self._nodes[1]

    @property
    def weights(self) -> np.ndarray:
        return self._nodes[2]

    @property
    def size(self) -> int:
        return self.phi.size

    @property
    def exact_degree(self) -> int:
        return 2 * self.order - 1

    def points(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)

    def nodes(self) -> list[tuple[float, float, float]]:
        return list(zip(self.phi.tolist(), self.theta.tolist(), self.weights.tolist()))

    def sample(self, fn: Callable) -> np.ndarray:
        """``fn(phi, theta)`` at every node."""
        return np.asarray(fn(self.phi, self.theta))


@lru_cache(maxsize=16)
def _grid_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    phis = np.arange(2 * n) * (math.pi / n)
    theta = np.repeat(np.arccos(x), 2 * n)
    phi = np.tile(phis, n)
    weights = np.repeat(w * (math.pi / n), 2 * n)
    for a in (theta, phi, weights):
        a.flags.writeable = False
    return phi, theta, weights


def integrate(values, grid: SphereGrid):
    """Weighted node sum."""
    return np.sum(grid.weights * np.asarray(values))


def gaunt(idx1: tuple[int, int], idx2: tuple[int, int], idx3: tuple[int, int], grid: SphereGrid) -> complex:
    """``int Y_1 Y_2 conj(Y_3)`` by quadrature."""
    (l1, m1), (l2, m2), (l3, m3) = idx1, idx2, idx3
    if 2 * grid.order < l1 + l2 + l3 + 1:
        raise QuadratureError(f"grid order {grid.order} too low for degrees {l1}+{l2}+{l3}")
    y1 = sh_eval(l1, m1, grid.phi, grid.theta)
    y2 = sh_eval(l2, m2, grid.phi, grid.theta)
    y3 = sh_eval(l3, m3, grid.phi, grid.theta)
    return complex(integrate(y1 * y2 * np.conj(y3), grid))


# ---------------------------------------------------------------------------
# kernels


def constant_part(kernel: KernelSpec) -> float:
    """Constant ``mu_0 / (4 pi)`` removed from a normalised kernel."""
    return raw_zonal_eigenvalue(kernel, 0) / FOUR_PI


def kernel_values(kernel: KernelSpec, t) -> np.ndarray:
    """Pointwise ``k(t)``, minus its constant part when the kernel is normalised."""
    vals = np.asarray(kernel(t), dtype=float)
    if kernel.normalized:
        vals = vals - constant_part(kernel)
    return vals


@lru_cache(maxsize=512)
def _zonal_cached(kernel: KernelSpec, s: int) -> float:
    # t = cos(gamma) absorbs the square-root endpoint behaviour into a smooth sine factor
    def f(g):
        t = math.cos(g)
        return float(kernel(t)) * special.eval_legendre(s, t) * math.sin(g)

    limit = 200 + 20 * s
    pts = np.linspace(0.0, math.pi, s + 2)[1:-1] if s > 1 else None
    val, _ = spi.quad(f, 0.0, math.pi, points=pts, limit=limit, epsabs=1e-14, epsrel=1e-12)
    return 2 * math.pi * val


def raw_zonal_eigenvalue(kernel: KernelSpec, s: int) -> float:
    """``2 pi int_{-1}^{1} k(t) P_s(t) dt`` before normalisation."""
    return _zonal_cached(kernel, s)


def zonal_eigenvalue(kernel: KernelSpec, s: int) -> float:
    """Quadrature eigenvalue honouring the normalisation flag."""
    if s == 0 and kernel.normalized:
        return 0.0
    return raw_zonal_eigenvalue(kernel, s)


def kernel_eigen_integral(kernel: KernelSpec, s: int, m: int, p: tuple[float, float], grid: SphereGrid,
                          min_abs: float = 1e-3) -> float:
    """``int k(p.q) Y_s^m(q) dq / Y_s^m(p)`` at the probe ``p = (phi, theta)``."""
    phi_p, th_p = p
    yp = complex(sh_eval(s, m, phi_p, th_p))
    if abs(yp) < min_abs:
        raise QuadratureError("probe point is near a zero of the harmonic")
    pv = np.array([math.sin(th_p) * math.cos(phi_p), math.sin(th_p) * math.sin(phi_p), math.cos(th_p)])
    t = np.clip(grid.points() @ pv, -1.0, 1.0)
    yq = sh_eval(s, m, grid.phi, grid.theta)
    val = integrate(kernel_values(kernel, t) * yq, grid) / yp
    return float(val.real)


# ---------------------------------------------------------------------------
# fields


@dataclass
class DensityField:
    """Values of a density or potential at the nodes of ``grid``."""

    grid: SphereGrid
    values: np.ndarray

    @classmethod
    def from_function(cls, grid: SphereGrid, fn: Callable) -> "DensityField":
        return cls(grid, np.asarray(grid.sample(fn), dtype=float) * np.ones(grid.size))

    @classmethod
    def uniform(cls, grid: SphereGrid) -> "DensityField":
        return cls(grid, np.full(grid.size, 1.0 / FOUR_PI))

    def mass(self) -> float:
        return float(integrate(self.values, self.grid))

    def validate_density(self, tol: float = 1e-10) -> None:
        if np.any(self.values < 0):
            raise ValueError("density takes negative values")
        if abs(self.mass() - 1.0) > tol:
            raise ValueError(f"density mass {self.mass():.12g} differs from 1")

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "phi", "value"])
            for th, ph, v in zip(self.grid.theta, self.grid.phi, self.values):
                w.writerow([repr(float(th)), repr(float(ph)), repr(float(v))])

    @classmethod
    def from_csv(cls, path: str | Path, grid: SphereGrid, tol: float = 1e-9) -> "DensityField":
        """Read ``theta,phi,value`` rows; every grid node must be present."""
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append((float(rec["theta"]), float(rec["phi"]), float(rec["value"])))
        if not rows:
            raise ValueError(f"{path}: no rows")
        data = np.array(rows)
        values = np.empty(grid.size)
        for i, (th, ph) in enumerate(zip(grid.theta, grid.phi)):
            dist = np.abs(data[:, 0] - th) + np.abs(np.angle(np.exp(1j * (data[:, 1] - ph))))
            j = int(np.argmin(dist))
            if dist[j] > tol:
                raise ValueError(f"{path}: no value for node theta={th:.6f}, phi={ph:.6f}")
            values[i] = data[j, 2]
        return cls(grid, values)


def _values(field, grid: SphereGrid) -> np.ndarray:
    if isinstance(field, DensityField):
        return np.asarray(field.values, dtype=float)
    if callable(field):
        return np.asarray(grid.sample(field), dtype=float) * np.ones(grid.size)
    return np.asarray(field, dtype=float)


def _analysis(values: np.ndarray, grid: SphereGrid, lmax: int) -> dict[tuple[int, int], complex]:
    table = sh_table(lmax, grid.phi, grid.theta)
    wv = grid.weights * values
    return {k: complex(np.sum(wv * np.conj(y))) for k, y in table.items()}


def convolve(values: np.ndarray, kernel: KernelSpec, grid: SphereGrid, lmax: int | None = None) -> np.ndarray:
    """``int k(p.q) g(q) dq`` at every node via the zonal collapse."""
    lmax = grid.order - 1 if lmax is None else lmax
    table = sh_table(lmax, grid.phi, grid.theta)
    wv = grid.weights * values
    out = np.zeros(grid.size, dtype=complex)
    for (l, m), y in table.items():
        mu = zonal_eigenvalue(kernel, l)
        if mu:
            out += mu * np.sum(wv * np.conj(y)) * y
    return out.real


def free_energy(rho, lam: float, kernel: KernelSpec, grid: SphereGrid, method: str = "spectral") -> float:
    """``lambda int rho ln rho + 1/2 int int k(p.q) rho(p) rho(q)``.

    ``method="direct"`` sums the double integral over all node pairs.
    """
    vals = _values(rho, grid)
    if np.any(vals <= 0):
        raise ValueError("entropy needs strictly positive density values")
    entropy = float(integrate(vals * np.log(vals), grid))
    if method == "spectral":
        inter = float(integrate(vals * convolve(vals, kernel, grid), grid))
    elif method == "direct":
        pts = grid.points()
        t = np.clip(pts @ pts.T, -1.0, 1.0)
        wv = grid.weights * vals
        inter = float(wv @ kernel_values(kernel, t) @ wv)
    else:
        raise ValueError(f"unknown method {method!r}")
    return lam * entropy + 0.5 * inter


def el_operator(phi, lam: float, kernel: KernelSpec, grid: SphereGrid) -> np.ndarray:
    """``lambda phi - Z^-1 int k(p.q) exp(-phi(q)) dq`` at every node."""
    vals = _values(phi, grid)
    e = np.exp(-vals)
    z = float(integrate(e, grid))
    return lam * vals - convolve(e, kernel, grid) / z


def el_residual(phi, lam: float, kernel: KernelSpec, grid: SphereGrid) -> float:
    """Sup norm of the Euler-Lagrange operator over the nodes."""
    return float(np.max(np.abs(el_operator(phi, lam, kernel, grid))))


def second_variation(z, rho, lam: float, kernel: KernelSpec, grid: SphereGrid) -> float:
    """``lambda int z^2 / rho + int int k(p.q) z(p) z(q)``."""
    zv, rv = _values(z, grid), _values(rho, grid)
    return float(lam * integrate(zv * zv / rv, grid) + integrate(zv * convolve(zv, kernel, grid), grid))


def kernel_bound(kernel: KernelSpec, grid: SphereGrid) -> float:
    """Maximum of the un-normalised kernel over all node pairs."""
    pts = grid.points()
    return float(np.max(kernel(np.clip(pts @ pts.T, -1.0, 1.0))))


# ---------------------------------------------------------------------------
# axial independence


@dataclass
class AxialReport:
    variation: float
    per_theta: list[tuple[float, float]]  # (theta_p, spread over the phi_p sweep)


def axial_independence_check(rho_s: Callable, kernel: KernelSpec, grid: SphereGrid,
                             phi_sweep: Sequence[float] | None = None, n_phi: int = 4096) -> AxialReport:
    """Spread over ``phi_p`` of ``int K(p, q) rho_s(q) dq`` for several polar angles of ``p``.

    ``rho_s(theta, phi)`` is sampled on Gauss-Legendre nodes in ``theta`` and
    ``n_phi`` uniform nodes in ``phi``.  Probe polar angles sit midway
    between Gauss nodes so ``q = +-p`` never lands on a node, which keeps the
    periodic ``phi`` sums spectrally accurate.
    """
    x, w = np.polynomial.legendre.leggauss(grid.order)
    th_q = np.arccos(x)[::-1]
    w = w[::-1]
    ph_q = np.arange(n_phi) * (2 * math.pi / n_phi)
    if phi_sweep is None:
        phi_sweep = np.linspace(0.0, 2 * math.pi, 13)[:-1] + 0.123
    mids = 0.5 * (th_q[1:] + th_q[:-1])
    probes = mids[np.linspace(1, len(mids) - 2, 5).astype(int)]
    TQ, PQ = np.meshgrid(th_q, ph_q, indexing="ij")
    rho = np.asarray(rho_s(TQ, PQ), dtype=float) * np.ones_like(TQ)
    weights = w[:, None] * (2 * math.pi / n_phi)
    spreads = []
    for tp in probes:
        vals = []
        for pp in phi_sweep:
            t = np.cos(tp) * np.cos(TQ) + np.sin(tp) * np.sin(TQ) * np.cos(PQ - pp)
            vals.append(float(np.sum(weights * kernel(np.clip(t, -1.0, 1.0)) * rho)))
        spreads.append((float(tp), max(vals) - min(vals)))
    return AxialReport(max(s for _, s in spreads), spreads)


# ---------------------------------------------------------------------------
# branch residual


@dataclass
class BranchResidualFit:
    lams: list[float]
    amplitudes: list[float]
    residuals: list[float]
    exponent: float


def branch_residual_fit(c: float, lams: Sequence[float] = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2),
                        kernel: KernelSpec | None = None, grid: SphereGrid | None = None,
                        amplitude: Callable[[float], float] | None = None) -> BranchResidualFit:
    """Euler-Lagrange residual along the uniaxial branch ``phi = a_0 Y_2^0``.

    ``a_0 = -lambda / c`` unless ``amplitude`` is given; the operator is
    evaluated at ``lambda_2 + lambda``.  Returns the log-log slope of the sup
    residual against ``lambda``.
    """
    from .spectrum import ONSAGER

    kernel = ONSAGER if kernel is None else kernel
    grid = SphereGrid(24) if grid is None else grid
    lam2 = -zonal_eigenvalue(kernel, 2) / FOUR_PI
    y20 = sh_eval(2, 0, grid.phi, grid.theta).real
    amps, res = [], []
    for lam in lams:
        a0 = amplitude(lam) if amplitude is not None else -lam / c
        amps.append(a0)
        res.append(el_residual(a0 * y20, lam2 + lam, kernel, grid))
    slope = float(np.polyfit(np.log(lams), np.log(res), 1)[0])
    return BranchResidualFit(list(lams), amps, res, slope)


# ---------------------------------------------------------------------------
# numerical Lyapunov-Schmidt reduction


@dataclass
class NumericReduction:
    f: np.ndarray  # degree-2 coefficients of the projected residual, m = -2..2
    v: dict[tuple[int, int], complex]  # complement correction
    iterations: int
    complement_residual: float


def ls_reduce_numeric(u: Sequence[complex], lam: float, kernel: KernelSpec, grid: SphereGrid | None = None,
                      lmax: int | None = None, tol: float = 1e-15, max_iter: int = 200) -> NumericReduction:
    """Solve ``(1 - P) R(u + v) = 0`` for ``v`` by fixed-point iteration, return ``P R(u + v)``.

    ``R(phi) = (lambda_2 + lambda) phi - Z^-1 int k exp(-phi)`` with ``P`` the
    projection onto degree-two harmonics and ``u`` the complex degree-two
    coefficients.  The iteration is ``v <- v - L^-1 (1 - P) R(u + v)`` with
    ``L = lambda_2 + U / (4 pi)``.
    """
    grid = SphereGrid(24) if grid is None else grid
    lmax = grid.order - 1 if lmax is None else lmax
    table = sh_table(lmax, grid.phi, grid.theta)
    mu = {l: zonal_eigenvalue(kernel, l) for l in range(lmax + 1)}
    lam2 = -mu[2] / FOUR_PI
    base = sum(u[m + 2] * table[(2, m)] for m in range(-2, 3))
    v = {k: 0j for k in table if k[0] != 2}

    def residual_coeffs(v):
        phi = base + sum(c * table[k] for k, c in v.items() if c)
        phi = phi.real
        r = el_operator(phi, lam2 + lam, kernel, grid)
        return _analysis(r, grid, lmax)

    err = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        rc = residual_coeffs(v)
        step = {k: rc[k] / (lam2 + mu[k[0]] / FOUR_PI) for k in v}
        v = {k: v[k] - step[k] for k in v}
        err = max(abs(s) for s in step.values())
        if err < tol:
            break
    rc = residual_coeffs(v)
    f = np.array([rc[(2, m)] for m in range(-2, 3)])
    return NumericReduction(f, v, it, max(abs(rc[k]) for k in v))
