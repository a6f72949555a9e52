"""Associated Legendre functions, spherical harmonics and the complex/real map.

Conventions
-----------
``Y_l^m(phi, theta) = N_lm * exp(i m phi) * P_l^m(cos theta)`` with ``phi`` the
azimuth and ``theta`` the polar angle.  ``P_l^m`` is the Rodrigues form

    P_l^m(x) = 1/(2^l l!) (1-x^2)^(m/2) d^(l+m)/dx^(l+m) (x^2-1)^l

without a Condon-Shortley factor; the phase ``(-1)^m`` sits in ``N_lm``.
Negative orders use ``P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m``.  The result is
the usual Condon-Shortley harmonic.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .coeff import ONE, ZERO, ExactCoeff, as_coeff

_ALP_CACHE: dict[tuple[int, int], "ALP"] = {}
_ALP_LOCK = threading.Lock()


@dataclass(frozen=True, order=True)
class SHIndex:
    l: int
    m: int

    def __post_init__(self):
        if self.l < 0 or abs(self.m) > self.l:
            raise ValueError(f"invalid spherical harmonic index ({self.l}, {self.m})")

    def __iter__(self) -> Iterator[int]:
        return iter((self.l, self.m))


@dataclass(frozen=True)
class ALP:
    """``P_l^m(x) = (1-x^2)^(half/2) * sum_k poly[k] x^k`` with exact coefficients."""

    l: int
    m: int
    poly: tuple[Fraction, ...]

    @property
    def half(self) -> int:
        return abs(self.m)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        val = np.polynomial.polynomial.polyval(x, [float(c) for c in self.poly])
        return val * (1.0 - x * x) ** (self.half / 2)

    def __str__(self) -> str:
        terms = [f"{c}*x^{k}" for k, c in enumerate(self.poly) if c]
        body = " + ".join(terms) or "0"
        return f"(1-x^2)^({self.half}/2) * ({body})" if self.half else body


def alp(l: int, m: int) -> ALP:
    """Exact associated Legendre function ``P_l^m`` (cached)."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"associated Legendre index out of range: l={l}, m={m}")
    key = (l, m)
    hit = _ALP_CACHE.get(key)
    if hit is not None:
        return hit
    if m >= 0:
        # d^(l+m)/dx^(l+m) of (x^2-1)^l
        base = [Fraction(0)] * (2 * l + 1)
        for j in range(l + 1):
            base[2 * j] = Fraction(math.comb(l, j) * (-1) ** (l - j))
        for _ in range(l + m):
            base = [k * base[k] for k in range(1, len(base))]
        scale = Fraction(1, 2**l * math.factorial(l))
        poly = tuple(c * scale for c in base) or (Fraction(0),)
    else:
        n = -m
        pos = alp(l, n)
        f = Fraction((-1) ** n * math.factorial(l - n), math.factorial(l + n))
        poly = tuple(c * f for c in pos.poly)
    val = ALP(l, m, poly)
    with _ALP_LOCK:
        _ALP_CACHE.setdefault(key, val)
    return _ALP_CACHE[key]


def normalization(l: int, m: int) -> ExactCoeff:
    """``N_lm = (-1)^m sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!)``."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid index ({l}, {m})")
    q = Fraction((2 * l + 1) * math.factorial(l - m), 4 * math.factorial(l + m))
    val = ExactCoeff.sqrt_rational(q, -1)
    return -val if m % 2 else val


def _alp_float(lmax: int, x: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """Rodrigues-form ``P_l^m(x)`` for ``0 <= m <= l <= lmax`` by recurrence."""
    out: dict[tuple[int, int], np.ndarray] = {}
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.ones_like(x)
    for m in range(lmax + 1):
        if m > 0:
            pmm = pmm * (2 * m - 1) * s
        out[(m, m)] = pmm
        if m + 1 <= lmax:
            out[(m + 1, m)] = x * (2 * m + 1) * pmm
        for l in range(m + 2, lmax + 1):
            out[(l, m)] = ((2 * l - 1) * x * out[(l - 1, m)] - (l + m - 1) * out[(l - 2, m)]) / (l - m)
    return out


def sh_eval(l: int, m: int, phi, theta):
    """Evaluate ``Y_l^m`` at azimuth ``phi`` and polar angle ``theta`` (double precision)."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    n = abs(m)
    p = _alp_float(l, np.atleast_1d(x))[(l, n)].reshape(x.shape)
    # N_{l,|m|} carries (-1)^|m|; the negative-order factorial ratio folds into |m|
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - n + 1) - math.lgamma(l + n + 1)))
    val = norm * p * np.exp(1j * n * phi)
    if m >= 0:
        return (-1) ** n * val
    return np.conj(val)


def sh_table(lmax: int, phi, theta) -> dict[tuple[int, int], np.ndarray]:
    """All ``Y_l^m`` for ``l <= lmax`` at the given points."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    p = _alp_float(lmax, x.ravel())
    out = {}
    for l in range(lmax + 1):
        for n in range(l + 1):
            norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - n + 1) - math.lgamma(l + n + 1)))
            val = (norm * p[(l, n)].reshape(x.shape)) * np.exp(1j * n * phi)
            out[(l, n)] = (-1) ** n * val
            if n:
                out[(l, -n)] = np.conj(val)
    return out


# ---------------------------------------------------------------------------
# complex <-> real basis


def basis_matrix(l: int = 2) -> list[list[ExactCoeff]]:
    """Matrix ``T`` with ``u = T a`` (rows and columns indexed ``m = -l..l``).

    Column ``k`` holds the complex coefficients of the real harmonic
    ``Yr_{l,k}``: ``sqrt(2)(-1)^k Im Y_l^k`` for ``k < 0``, ``Y_l^0`` for
    ``k = 0`` and ``sqrt(2)(-1)^k Re Y_l^k`` for ``k > 0``.
    """
    size = 2 * l + 1
    r2 = ExactCoeff.sqrt_rational(Fraction(1, 2))
    i_r2 = ExactCoeff.sqrt_rational(Fraction(-1, 2))
    T = [[ZERO] * size for _ in range(size)]
    T[l][l] = ONE
    for m in range(1, l + 1):
        sign = -1 if m % 2 else 1
        T[l - m][l - m] = i_r2
        T[l - m][l + m] = r2
        T[l + m][l - m] = -sign * i_r2
        T[l + m][l + m] = sign * r2
    return T


def basis_matrix_inverse(l: int = 2) -> list[list[ExactCoeff]]:
    """``T^{-1}``, equal to the conjugate transpose of ``T``."""
    T = basis_matrix(l)
    size = len(T)
    return [[T[j][i].conjugate() for j in range(size)] for i in range(size)]


def _matvec(A, v):
    return [sum((A[i][j] * as_coeff(v[j]) for j in range(len(v))), ZERO) for i in range(len(A))]


def from_real(a, l: int = 2) -> list:
    """Complex coefficients ``u = T a``.  Accepts exact or float vectors."""
    if all(isinstance(x, (int, Fraction, ExactCoeff)) for x in a):
        return _matvec(basis_matrix(l), a)
    return list(basis_matrix_numeric(l) @ np.asarray(a, dtype=complex))


def to_real(u, l: int = 2) -> list:
    """Real coefficients ``a = T^{-1} u``."""
    if all(isinstance(x, (int, Fraction, ExactCoeff)) for x in u):
        return _matvec(basis_matrix_inverse(l), u)
    a = np.linalg.solve(basis_matrix_numeric(l), np.asarray(u, dtype=complex))
    return list(a)


def basis_matrix_numeric(l: int = 2) -> np.ndarray:
    return np.array([[c.to_complex() for c in row] for row in basis_matrix(l)])


# ---------------------------------------------------------------------------


class SHExpansion:
    """Finite linear combination of spherical harmonics with exact coefficients."""

    __slots__ = ("terms", "basis")

    def __init__(self, terms: Mapping[tuple[int, int], ExactCoeff] | None = None, basis: str = "complex"):
        if basis not in ("complex", "real"):
            raise ValueError(f"unknown basis {basis!r}")
        self.basis = basis
        self.terms: dict[tuple[int, int], ExactCoeff] = {}
        for (l, m), c in (terms or {}).items():
            SHIndex(l, m)
            c = as_coeff(c)
            if c:
                self.terms[(l, m)] = c

    @classmethod
    def single(cls, l: int, m: int, coeff=ONE, basis: str = "complex") -> "SHExpansion":
        return cls({(l, m): coeff}, basis)

    def _check(self, other: "SHExpansion") -> None:
        if self.basis != other.basis:
            raise ValueError(f"basis mismatch: {self.basis} vs {other.basis}")

    def __add__(self, other: "SHExpansion") -> "SHExpansion":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, ZERO) + c
        return SHExpansion(out, self.basis)

    def __sub__(self, other: "SHExpansion") -> "SHExpansion":
        return self + other.scale(-1)

    def scale(self, c) -> "SHExpansion":
        c = as_coeff(c)
        return SHExpansion({k: v * c for k, v in self.terms.items()}, self.basis)

    def __eq__(self, other) -> bool:
        return isinstance(other, SHExpansion) and self.basis == other.basis and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __getitem__(self, key: tuple[int, int]) -> ExactCoeff:
        return self.terms.get(tuple(key), ZERO)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def degrees(self) -> set[int]:
        return {l for l, _ in self.terms}

    def evaluate(self, phi, theta):
        """Pointwise value (complex basis only)."""
        if self.basis != "complex":
            raise ValueError("evaluate() needs the complex basis")
        lmax = max(self.degrees(), default=0)
        table = sh_table(lmax, phi, theta)
        out = np.zeros(np.shape(phi), dtype=complex)
        for (l, m), c in self.terms.items():
            out = out + c.to_complex() * table[(l, m)]
        return out

    def to_json(self) -> dict:
        return {
            "basis": self.basis,
            "terms": [{"l": l, "m": m, "coeff": c.to_json()} for (l, m), c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SHExpansion":
        terms = {(int(t["l"]), int(t["m"])): ExactCoeff.from_json(t["coeff"]) for t in data["terms"]}
        return cls(terms, data.get("basis", "complex"))

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*Y[{l},{m}]" for (l, m), c in sorted(self.terms.items()))
        return f"SHExpansion<{self.basis}>({body or '0'})"
