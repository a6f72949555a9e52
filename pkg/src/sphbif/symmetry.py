"""Rotation representations on degree-2 harmonics, invariants and orbit reduction.

Three 5x5 representations of SO(3) are provided, each from a closed-form
entry table and from a constructive build, so the two can be cross-checked:

* ``D``: complex Wigner matrix acting on coefficients ``u`` of ``Y_2^m``;
* ``M = T^-1 D T`` acting on real coefficients ``a``;
* ``M_C``: conjugation ``X -> S X S^T`` on traceless symmetric 3x3 matrices
  written in the basis ``e_1..e_5``.

Euler angles ``(phi_R, psi_R, theta_R)`` follow the y-convention: rotate by
``phi_R`` about ``z``, by ``theta_R`` about ``y``, by ``psi_R`` about ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from .coeff import ExactCoeff
from .harmonics import basis_matrix_numeric, sh_table

SQ3 = math.sqrt(3.0)
SQ6 = math.sqrt(6.0)


@dataclass(frozen=True)
class EulerAngles:
    """``phi`` and ``psi`` about ``z``, ``theta`` about ``y`` (radians)."""

    phi: float
    psi: float
    theta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.phi, self.psi, self.theta)):
            raise ValueError("Euler angles must be finite")

    def normalized(self) -> "EulerAngles":
        """Reduce into ``phi, psi in [0, 2pi)``, ``theta in [0, 2pi)``."""
        tau = 2 * math.pi
        return EulerAngles(self.phi % tau, self.psi % tau, self.theta % tau)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "EulerAngles":
        return cls(*rng.uniform(0, 2 * math.pi, size=2), rng.uniform(0, math.pi))


def _angles(args) -> tuple[float, float, float]:
    if len(args) == 1 and isinstance(args[0], EulerAngles):
        a = args[0]
        return a.phi, a.psi, a.theta
    return tuple(float(x) for x in args)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# 3x3 rotations


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation(*args) -> np.ndarray:
    """``R = R_z(phi) R_y(theta) R_z(psi)``."""
    phi, psi, theta = _angles(args)
    return rot_z(phi) @ rot_y(theta) @ rot_z(psi)


def euler_from_rotation(R: np.ndarray) -> EulerAngles:
    """Inverse of :func:`rotation` with a gimbal-lock guard."""
    c = max(-1.0, min(1.0, R[2, 2]))
    theta = math.acos(c)
    if abs(c) > 1 - 1e-10:
        # only phi +- psi is determined; put everything into phi
        if c > 0:
            return EulerAngles(math.atan2(R[1, 0], R[0, 0]), 0.0, 0.0)
        return EulerAngles(math.atan2(-R[1, 0], -R[0, 0]), 0.0, math.pi)
    phi = math.atan2(R[1, 2], R[0, 2])
    psi = math.atan2(R[2, 1], -R[2, 0])
    return EulerAngles(phi, psi, theta)


# ---------------------------------------------------------------------------
# complex Wigner matrix


def wigner_D(*args) -> np.ndarray:
    """``D`` with ``(sum u_m Y_2^m)(R p) = sum (D u)_m Y_2^m(p)``, ``R = rotation(phi, psi, theta)``.

    Rows and columns are indexed ``m = -2..2``.  The entry table below is
    written in swapped angles: ``D(phi, psi, theta) = table(psi, phi, -theta)``.
    """
    phi, psi, th = _angles(args)
    return wigner_D_table(psi, phi, -th)


def wigner_D_table(*args) -> np.ndarray:
    """Closed-form entry table ``d_ij`` evaluated at its own angle labels."""
    phi, psi, th = _angles(args)
    c, s = math.cos(th / 2), math.sin(th / 2)
    ct = math.cos(th)
    e = lambda a, b: complex(math.cos(a * phi + b * psi), math.sin(a * phi + b * psi))  # noqa: E731
    return np.array([
        [e(-2, -2) * c**4, 2 * e(-2, -1) * c**3 * s, SQ6 * e(-2, 0) * c**2 * s**2,
         2 * e(-2, 1) * c * s**3, e(-2, 2) * s**4],
        [-2 * e(-1, -2) * c**3 * s, e(-1, -1) * c**2 * (2 * ct - 1), SQ6 * e(-1, 0) * c * ct * s,
         e(-1, 1) * (2 * ct + 1) * s**2, 2 * e(-1, 2) * c * s**3],
        [SQ6 * e(0, -2) * c**2 * s**2, -SQ6 * e(0, -1) * c * ct * s, 1.5 * ct**2 - 0.5,
         SQ6 * e(0, 1) * c * ct * s, SQ6 * e(0, 2) * c**2 * s**2],
        [-2 * e(1, -2) * c * s**3, e(1, -1) * (2 * ct + 1) * s**2, -SQ6 * e(1, 0) * c * ct * s,
         e(1, 1) * c**2 * (2 * ct - 1), 2 * e(1, 2) * c**3 * s],
        [e(2, -2) * s**4, -2 * e(2, -1) * c * s**3, SQ6 * e(2, 0) * c**2 * s**2,
         -2 * e(2, 1) * c**3 * s, e(2, 2) * c**4],
    ], dtype=complex)


def _fibonacci_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(n) + 0.5
    theta = np.arccos(1 - 2 * k / n)
    phi = (math.pi * (1 + 5**0.5) * k) % (2 * math.pi)
    return phi, theta


def _to_angles(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, y, z = xyz
    return np.arctan2(y, x) % (2 * math.pi), np.arccos(np.clip(z, -1, 1))


def wigner_D_constructive(R: np.ndarray, points: int = 60) -> np.ndarray:
    """``D`` with ``(sum u_m Y_2^m)(R p) = sum (D u)_m Y_2^m(p)`` by least squares."""
    phi, theta = _fibonacci_points(points)
    p = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    base = sh_table(2, phi, theta)
    A = np.stack([base[(2, m)] for m in range(-2, 3)], axis=1)
    rphi, rtheta = _to_angles(R @ p)
    rot = sh_table(2, rphi, rtheta)
    B = np.stack([rot[(2, m)] for m in range(-2, 3)], axis=1)
    # A D = B column by column
    D, *_ = np.linalg.lstsq(A, B, rcond=None)
    return D


# ---------------------------------------------------------------------------
# real representation


def real_rep_M(*args) -> np.ndarray:
    """``M = T^-1 D T`` (real orthogonal); equals :func:`real_rep_M_table`."""
    T = basis_matrix_numeric(2)
    M = np.linalg.solve(T, wigner_D(*args) @ T)
    if np.max(np.abs(M.imag)) > 1e-12:
        raise ArithmeticError("real representation has an imaginary part")
    return M.real


def real_rep_M_table(*args) -> np.ndarray:
    """Closed-form entries of ``M``."""
    phi, psi, th = _angles(args)
    cf, sf, c2f, s2f = math.cos(phi), math.sin(phi), math.cos(2 * phi), math.sin(2 * phi)
    cp, sp, c2p, s2p = math.cos(psi), math.sin(psi), math.cos(2 * psi), math.sin(2 * psi)
    ct, st, c2t, s2t = math.cos(th), math.sin(th), math.cos(2 * th), math.sin(2 * th)
    return np.array([
        [ct * c2p * c2f - 0.25 * (c2t + 3) * s2p * s2f,
         st * (ct * s2p * sf - c2p * cf),
         -SQ3 * st**2 * sp * cp,
         st * (ct * s2p * cf + c2p * sf),
         -ct * c2p * s2f - 0.25 * (c2t + 3) * s2p * c2f],
        [st * (cp * c2f - 2 * ct * sp * sf * cf),
         ct * cp * cf - c2t * sp * sf,
         SQ3 * st * ct * sp,
         -ct * cp * sf - c2t * sp * cf,
         -st * cp * s2f - 0.5 * s2t * sp * c2f],
        [SQ3 * st**2 * sf * cf,
         SQ3 * st * ct * sf,
         0.25 * (3 * c2t + 1),
         SQ3 * st * ct * cf,
         0.5 * SQ3 * st**2 * c2f],
        [st * (ct * cp * s2f + sp * c2f),
         c2t * cp * sf + ct * sp * cf,
         -SQ3 * st * ct * cp,
         c2t * cp * cf - ct * sp * sf,
         0.5 * s2t * cp * c2f - st * sp * s2f],
        [0.25 * (c2t + 3) * c2p * s2f + ct * s2p * c2f,
         -0.5 * s2t * c2p * sf - st * s2p * cf,
         0.5 * SQ3 * st**2 * c2p,
         st * s2p * sf - 0.5 * s2t * c2p * cf,
         0.25 * (c2t + 3) * c2p * c2f - ct * s2p * s2f],
    ])


# ---------------------------------------------------------------------------
# Cartan representation

CARTAN_BASIS = (
    np.array([[1.0, 0, 0], [0, 0, 0], [0, 0, -1]]),
    np.array([[0.0, 0, 0], [0, 1, 0], [0, 0, -1]]),
    np.array([[0.0, 1, 0], [1, 0, 0], [0, 0, 0]]),
    np.array([[0.0, 0, 1], [0, 0, 0], [1, 0, 0]]),
    np.array([[0.0, 0, 0], [0, 0, 1], [0, 1, 0]]),
)

PHI = np.array([
    [0, 0, -1 / SQ3, 0, 1],
    [0, 0, -1 / SQ3, 0, -1],
    [1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0],
    [0, 1, 0, 0, 0],
], dtype=float)


def cartan_coords(X: np.ndarray) -> np.ndarray:
    """Coordinates of a traceless symmetric ``X`` in the basis ``e_1..e_5``."""
    return np.array([X[0, 0], X[1, 1], X[0, 1], X[0, 2], X[1, 2]])


def cartan_matrix(x) -> np.ndarray:
    return sum(xi * e for xi, e in zip(x, CARTAN_BASIS))


def cartan_conjugation(S: np.ndarray) -> np.ndarray:
    """Matrix of ``x -> coords(S X(x) S^T)``."""
    return np.stack([cartan_coords(S @ e @ S.T) for e in CARTAN_BASIS], axis=1)


def cartan_rep(*args) -> np.ndarray:
    """``M_C``: conjugation by ``S = R^T`` (``p^T X p`` composed with ``p -> R p``)."""
    return cartan_conjugation(rotation(*args).T)


def cartan_rep_table(*args, uncorrected: bool = False) -> np.ndarray:
    """Closed-form entries of ``M_C``.

    ``uncorrected=True`` keeps the reference ``C_11`` whose closing bracket sits
    one term early (it gives ``C_11 = 5/2`` at the identity).
    """
    phi, psi, th = _angles(args)
    cf, sf, c2f, s2f = math.cos(phi), math.sin(phi), math.cos(2 * phi), math.sin(2 * phi)
    cp, sp, c2p, s2p = math.cos(psi), math.sin(psi), math.cos(2 * psi), math.sin(2 * psi)
    ct, st, c2t = math.cos(th), math.sin(th), math.cos(2 * th)
    C = np.empty((5, 5))
    if uncorrected:
        C[0, 0] = 0.25 * (-4 * cf**2 * cp**2 * st**2 + (c2t + 2 * c2f - 1) * c2p) + 2 * ct * (ct - 4 * cf * cp * sf * sp)
    else:
        C[0, 0] = 0.25 * (-4 * cf**2 * cp**2 * st**2 + (c2t + 2 * c2f - 1) * c2p + 2 * ct * (ct - 4 * cf * cp * sf * sp))
    C[0, 1] = 2 * ct * cp * sf * sp * cf + c2t * cp**2 * sf**2 + (sp**2 - cp**2 * st**2) * cf**2
    C[0, 2] = 0.25 * ((c2t + 3) * c2p - 2 * st**2) * s2f + ct * c2f * s2p
    C[0, 3] = 2 * cp * st * (sf * sp - ct * cf * cp)
    C[0, 4] = -2 * cp * st * (ct * cp * sf + cf * sp)
    C[1, 0] = cp**2 * st**2 * sf**2 + 0.5 * ct * s2f * s2p + 0.5 * (c2t + c2p * (st**2 - ct**2 * c2f))
    C[1, 1] = (-cf * cp * sf * sp * ct**3 + 0.5 * (c2f * c2p + 1) * ct**2
               + 0.125 * (c2t - 3) * s2f * s2p * ct + st**2 * (cf**2 * c2p - sf**2 * sp**2))
    C[1, 2] = -2 * cf * cp**2 * sf * st**2 - ct * (ct * c2p * s2f + c2f * s2p)
    C[1, 3] = -2 * st * sp * (cp * sf + ct * cf * sp)
    C[1, 4] = 2 * st * sp * (cf * cp - ct * sf * sp)
    C[2, 0] = 0.125 * (-4 * ct * c2p * s2f - ((c2t + 3) * c2f - 6 * st**2) * s2p)
    C[2, 1] = 0.125 * (4 * ct * c2p * s2f + (6 * st**2 + (c2t + 3) * c2f) * s2p)
    C[2, 2] = ct * c2f * c2p - 0.25 * (c2t + 3) * s2f * s2p
    C[2, 3] = st * (c2p * sf + ct * cf * s2p)
    C[2, 4] = st * (ct * sf * s2p - cf * c2p)
    C[3, 0] = 0.5 * st * (ct * (c2f + 3) * cp - 2 * cf * sf * sp)
    C[3, 1] = 0.5 * st * (s2f * sp - ct * (c2f - 3) * cp)
    C[3, 2] = st * (ct * cp * s2f + c2f * sp)
    C[3, 3] = c2t * cf * cp - ct * sf * sp
    C[3, 4] = c2t * cp * sf + ct * cf * sp
    C[4, 0] = -0.5 * st * (cp * s2f + ct * (c2f + 3) * sp)
    C[4, 1] = 0.5 * st * (cp * s2f + ct * (c2f - 3) * sp)
    C[4, 2] = st * (c2f * cp - 2 * ct * cf * sf * sp)
    C[4, 3] = -ct * cp * sf - c2t * cf * sp
    C[4, 4] = ct * cf * cp - c2t * sf * sp
    return C


# ---------------------------------------------------------------------------
# invariants


def invariants(a) -> tuple[float, float]:
    """``(I_1, I_2)`` for real coefficients ``a = (a_-2, ..., a_2)``."""
    x1, x2, x3, x4, x5 = (float(v) for v in a)
    i1 = x1**2 + x2**2 + x3**2 + x4**2 + x5**2
    i2 = (-2 * x1**2 * x3 / SQ3 + 2 * x1 * x2 * x4 + x2**2 * x3 / SQ3 - x2**2 * x5
          + 2 * x3**3 / (3 * SQ3) + x3 * x4**2 / SQ3 - 2 * x3 * x5**2 / SQ3 + x4**2 * x5)
    return i1, i2


def cartan_invariants(x) -> tuple[float, float]:
    """Characteristic-polynomial invariants of ``X = sum x_n e_n``."""
    x1, x2, x3, x4, x5 = (float(v) for v in x)
    i1 = x1**2 + x1 * x2 + x2**2 + x3**2 + x4**2 + x5**2
    i2 = (-x1**2 * x2 - x1 * x2**2 + x1 * x3**2 - x1 * x5**2 + x2 * x3**2
          - x2 * x4**2 + 2 * x3 * x4 * x5)
    return i1, i2


def slice_i2(x: float, y: float) -> float:
    """``I_2`` restricted to ``S = {(0, 0, x, 0, y)}``."""
    return 2 * x**3 / (3 * SQ3) - 2 * x * y**2 / SQ3


# ---------------------------------------------------------------------------
# residual S3 action on the slice

def s3_generators() -> tuple[list[list[ExactCoeff]], list[list[ExactCoeff]]]:
    """Exact ``g_2`` and ``g_4`` on ``(a_0, a_2)``."""
    h = ExactCoeff.rational(Fraction(1, 2))
    r = ExactCoeff.sqrt_rational(Fraction(3, 4))
    one = ExactCoeff.one()
    zero = ExactCoeff.zero()
    g2 = [[one, zero], [zero, -one]]
    g4 = [[-h, -r], [r, -h]]
    return g2, g4


def s3_group() -> list[np.ndarray]:
    """All six elements of the residual ``S_3`` as floats."""
    g2 = np.array([[1.0, 0], [0, -1]])
    g4 = 0.5 * np.array([[-1, -SQ3], [SQ3, -1]])
    out = [np.eye(2), g2, g4, g4 @ g4, g2 @ g4, g2 @ g4 @ g4]
    return out


def restrict_to_slice(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """2x2 block of ``M`` on ``(a_0, a_2)``; ``M`` must leave ``S`` invariant."""
    idx = [2, 4]
    other = [0, 1, 3]
    if np.max(np.abs(M[np.ix_(other, idx)])) > tol:
        raise ValueError("matrix does not preserve the slice")
    return M[np.ix_(idx, idx)]


# ---------------------------------------------------------------------------
# orbit reduction


class OrbitReductionError(RuntimeError):
    """No slice representative found within tolerance."""


def orbit_reduce(a, tol: float = 1e-9) -> tuple[float, float]:
    """Representative ``(a_0, a_2)`` in the slice with the same invariants.

    Among the six ``S_3`` images the one with the largest ``a_0`` is returned
    (ties: ``a_2 >= 0``).
    """
    i1, i2 = invariants(a)
    if i1 <= tol**2:
        return 0.0, 0.0
    r = math.sqrt(i1)
    target = i2 / r**3
    # on the unit circle I_2(cos t, sin t) = (2 / (3 sqrt3)) cos 3t
    g = max(-1.0, min(1.0, target * 3 * SQ3 / 2))
    t = math.acos(g) / 3
    cands = []
    for gm in s3_group():
        x, y = gm @ np.array([r * math.cos(t), r * math.sin(t)])
        cands.append((x, y))
    x, y = max(cands, key=lambda p: (round(p[0], 12), p[1] >= 0, p[1]))
    j1, j2 = invariants((0, 0, x, 0, y))
    if abs(j1 - i1) > tol * max(1.0, i1) or abs(j2 - i2) > tol * max(1.0, abs(i2)):
        raise OrbitReductionError(f"representative misses invariants: {(j1, j2)} vs {(i1, i2)}")
    return float(x), float(y)


def max_I2_on_sphere(mode: str = "full", starts: int = 64, seed: int = 0, radius: float = 1.0) -> float:
    """Maximum of ``I_2`` on ``{I_1 = radius}`` in R^5 (``full``) or on the slice."""
    if starts < 1:
        raise ValueError("need at least one start")
    rng = np.random.default_rng(seed)
    r = math.sqrt(radius)
    if mode == "slice":
        best = -math.inf
        for t0 in rng.uniform(0, 2 * math.pi, starts):
            res = optimize.minimize_scalar(lambda t: -slice_i2(r * math.cos(t), r * math.sin(t)),
                                           bounds=(t0 - 0.5, t0 + 0.5), method="bounded",
                                           options={"xatol": 1e-12})
            best = max(best, -res.fun)
        return best
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")

    def neg(v):
        n = np.linalg.norm(v)
        return -invariants(r * v / n)[1]

    best = -math.inf
    for _ in range(starts):
        v0 = rng.normal(size=5)
        res = optimize.minimize(neg, v0, method="BFGS", options={"gtol": 1e-12})
        if not np.isfinite(res.fun):
            continue
        best = max(best, -res.fun)
    if not math.isfinite(best):
        raise RuntimeError("optimizer did not converge from any start")
    return best


@dataclass
class CrossCheck:
    """Largest entry-wise gap between two constructions, with offending entries."""

    name: str
    max_error: float
    entries: list[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return not self.entries


def cross_check(name: str, build_a, build_b, angles: list[EulerAngles], tol: float = 1e-10) -> CrossCheck:
    """Compare two 5x5 builds over a list of angles; report 1-based bad entries."""
    worst = np.zeros((5, 5))
    for a in angles:
        worst = np.maximum(worst, np.abs(np.asarray(build_a(a)) - np.asarray(build_b(a))))
    bad = [(i + 1, j + 1) for i in range(5) for j in range(5) if worst[i, j] > tol]
    return CrossCheck(name, float(worst.max()), bad)


def representation_checks(count: int = 20, seed: int = 0) -> list[CrossCheck]:
    """Table-versus-construction checks for ``D``, ``M`` and ``M_C``."""
    rng = np.random.default_rng(seed)
    angles = [EulerAngles.random(rng) for _ in range(count)]
    phi_inv = np.linalg.inv(PHI)
    return [
        cross_check("D table vs rotated harmonics", wigner_D, lambda a: wigner_D_constructive(rotation(a)), angles),
        cross_check("M conjugation vs M table", real_rep_M, real_rep_M_table, angles),
        cross_check("M_C conjugation vs M_C table", cartan_rep, cartan_rep_table, angles),
        cross_check("M_C vs Phi M Phi^-1", cartan_rep, lambda a: PHI @ real_rep_M(a) @ phi_inv, angles, 1e-12),
    ]


def uncorrected_cartan_check(count: int = 20, seed: int = 0) -> CrossCheck:
    """Conjugation against the uncorrected ``M_C`` table; flags entry (1, 1) only."""
    rng = np.random.default_rng(seed)
    angles = [EulerAngles.random(rng) for _ in range(count)]
    return cross_check("M_C conjugation vs uncorrected M_C table", cartan_rep,
                       lambda a: cartan_rep_table(a, uncorrected=True), angles)
