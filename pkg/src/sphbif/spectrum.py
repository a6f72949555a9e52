"""Spectrum of rotationally symmetric interaction operators.

For a kernel ``k(p.q) = sum_r a_r (p.q)^r`` every spherical harmonic of
degree ``s`` is an eigenfunction of ``U phi(p) = int k(p.q) phi(q) dq`` with

    mu_s = sum_r 4 pi a_{s+2r} (s+2r)! / (2^r r! (2s+2r+1)!!).

The associated bifurcation value is ``lambda_s = -mu_s / (4 pi)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import mpmath

from .coeff import PI, ZERO, ExactCoeff


def double_factorial(n: int) -> int:
    """``n!!`` with ``(-1)!! = 0!! = 1``."""
    if n <= 0:
        return 1
    out = 1
    for k in range(n, 0, -2):
        out *= k
    return out


def legendre_power_expand(r: int) -> dict[int, Fraction]:
    """Coefficients ``c_l`` of ``x^r = sum_l c_l P_l(x)`` (``l = r, r-2, ...``)."""
    if r < 0:
        raise ValueError("r must be non-negative")
    out = {}
    for l in range(r, -1, -2):
        j = (r - l) // 2
        out[l] = Fraction((2 * l + 1) * math.factorial(r), 2**j * math.factorial(j) * double_factorial(l + r + 1))
    return out


def series_weight(s: int, r: int) -> Fraction:
    """``(s+2r)! / (2^r r! (2s+2r+1)!!)``, the rational factor of the r-th term."""
    return Fraction(math.factorial(s + 2 * r), 2**r * math.factorial(r) * double_factorial(2 * s + 2 * r + 1))


# ---------------------------------------------------------------------------
# kernels


def onsager_taylor(n: int) -> Fraction:
    """Taylor coefficient of ``sqrt(1 - x^2)`` at ``x^n``."""
    if n % 2:
        return Fraction(0)
    r = n // 2
    return Fraction(math.factorial(2 * r), (1 - 2 * r) * math.factorial(r) ** 2 * 4**r)


def _gamma_half(n2: int) -> tuple[Fraction, int]:
    """``Gamma(n2/2)`` for odd ``n2`` as ``(q, 1)`` meaning ``q * sqrt(pi)``."""
    # Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!), Gamma(-1/2) = -2 sqrt(pi)
    if n2 == -1:
        return Fraction(-2), 1
    n = (n2 - 1) // 2
    return Fraction(math.factorial(2 * n), 4**n * math.factorial(n)), 1


@lru_cache(maxsize=None)
def onsager_eigenvalue(s: int) -> ExactCoeff:
    """Exact ``mu_s`` of the Onsager kernel ``|p x q|`` (raw, ``mu_0 = pi^2``).

    ``mu_s = -pi Gamma(s/2+1/2) Gamma(s/2-1/2) / (2 Gamma(s/2+1) Gamma(s/2+2))``
    for even ``s`` and 0 for odd ``s``.
    """
    if s < 0:
        raise ValueError("degree must be non-negative")
    if s % 2:
        return ZERO
    n = s // 2
    g1, _ = _gamma_half(s + 1)
    g2, _ = _gamma_half(s - 1)
    q = -g1 * g2 / (2 * math.factorial(n) * math.factorial(n + 1))
    return ExactCoeff.term(q, 1, 4)


@dataclass(frozen=True)
class KernelSpec:
    """Rotationally symmetric kernel ``k(p.q) = sum_r a_r (p.q)^r``.

    ``degree`` is the polynomial degree for finite Taylor series and ``None``
    otherwise.  ``bound`` is ``M = max_{p,q} k``.  With ``normalized`` the
    constant part of the kernel is removed, which zeroes ``mu_0``.
    """

    name: str
    taylor: Callable[[int], Fraction]
    bound: float
    degree: Optional[int] = None
    normalized: bool = True
    closed_form: Optional[Callable[[int], ExactCoeff]] = field(default=None, compare=False)
    function: Optional[Callable] = field(default=None, compare=False)

    def raw_eigenvalue(self, s: int) -> ExactCoeff:
        """Exact ``mu_s`` before normalisation (finite series or closed form)."""
        if self.closed_form is not None:
            return self.closed_form(s)
        if self.degree is None:
            raise ValueError(f"kernel {self.name!r} has no exact spectrum; use eigenvalue_series")
        total = Fraction(0)
        r = 0
        while s + 2 * r <= self.degree:
            total += 4 * Fraction(self.taylor(s + 2 * r)) * series_weight(s, r)
            r += 1
        return ExactCoeff.term(total, 1, 2)

    def eigenvalue(self, s: int) -> ExactCoeff:
        """Exact ``mu_s`` honouring the normalisation flag."""
        if s == 0 and self.normalized:
            return ZERO
        return self.raw_eigenvalue(s)

    def eigenvalue_float(self, s: int) -> float:
        if s == 0 and self.normalized:
            return 0.0
        if self.closed_form is not None or self.degree is not None:
            return float(self.raw_eigenvalue(s))
        return float(eigenvalue_series(self, s).value)

    def has_exact_spectrum(self) -> bool:
        return self.closed_form is not None or self.degree is not None

    def __call__(self, t):
        """Pointwise kernel value at ``t = p.q`` (numpy aware)."""
        if self.function is not None:
            return self.function(t)
        import numpy as np

        t = np.asarray(t, dtype=float)
        if self.degree is None:
            raise ValueError(f"kernel {self.name!r} has no pointwise form")
        return sum(float(self.taylor(r)) * t**r for r in range(self.degree + 1))


def _onsager_fn(t):
    import numpy as np

    t = np.asarray(t, dtype=float)
    return np.sqrt(np.clip(1.0 - t * t, 0.0, None))


ONSAGER = KernelSpec("onsager", onsager_taylor, 1.0, None, True, onsager_eigenvalue, _onsager_fn)
MAIER_SAUPE = KernelSpec(
    "maier-saupe", lambda r: {0: Fraction(1, 3), 2: Fraction(-1)}.get(r, Fraction(0)), 1.0 / 3.0, 2, True
)
DIPOLAR = KernelSpec("dipolar", lambda r: Fraction(-1) if r == 1 else Fraction(0), 1.0, 1, True)

BUILTIN_KERNELS = {k.name: k for k in (ONSAGER, MAIER_SAUPE, DIPOLAR)}


def custom_kernel(name: str, coeffs: dict[int, Fraction], bound: float | None = None, normalized: bool = True) -> KernelSpec:
    """Polynomial kernel from explicit Taylor coefficients ``{r: a_r}``."""
    coeffs = {int(r): Fraction(a) for r, a in coeffs.items() if Fraction(a)}
    degree = max(coeffs, default=0)
    if bound is None:
        import numpy as np

        t = np.linspace(-1.0, 1.0, 4001)
        bound = float(max(sum(float(a) * t**r for r, a in coeffs.items()) if coeffs else np.zeros_like(t)))
    return KernelSpec(name, lambda r: coeffs.get(r, Fraction(0)), bound, degree, normalized)


# ---------------------------------------------------------------------------
# series evaluation


@dataclass(frozen=True)
class SeriesResult:
    """Numerical value of the eigenvalue series.

    ``value`` is the accelerated limit (Levin transform for infinite series,
    the exact finite sum otherwise).  ``partial`` is the plain partial sum
    through ``terms`` terms and ``tail`` an estimate of what it misses.
    """

    value: mpmath.mpf
    partial: mpmath.mpf
    tail: mpmath.mpf
    terms: int


def _weights(s: int, n: int) -> list:
    """``(s+2r)! / (2^r r! (2s+2r+1)!!)`` for ``r < n`` by the term-ratio recurrence."""
    w = mpmath.factorial(s) / mpmath.mpf(double_factorial(2 * s + 1))
    out = []
    for r in range(n):
        out.append(w)
        w = w * (s + 2 * r + 2) * (s + 2 * r + 1) / (2 * (r + 1) * (2 * s + 2 * r + 3))
    return out


def _terms(spec: KernelSpec, s: int, n: int) -> list:
    out = []
    for r, w in enumerate(_weights(s, n)):
        a = Fraction(spec.taylor(s + 2 * r))
        out.append(4 * mpmath.pi * mpmath.mpf(a.numerator) / a.denominator * w if a else mpmath.mpf(0))
    return out


LEVIN_TERMS = 40
ADAPTIVE_CAP = 64


def eigenvalue_series(spec: KernelSpec, s: int, R: int | None = None, dps: int = 30) -> SeriesResult:
    """Evaluate ``mu_s`` from the Taylor series of the kernel.

    With ``R`` given, the partial sum uses terms ``0..R``; otherwise terms are
    added until ten consecutive ones fall below ``1e-16`` relative to the
    running sum (capped at ``ADAPTIVE_CAP``).  For infinite series the
    reported ``value`` is the Levin u-transform of the first ``LEVIN_TERMS``
    partial sums, computed at doubled working precision; the plain partial
    sum and a power-law tail estimate are returned alongside.
    """
    if s < 0:
        raise ValueError("degree must be non-negative")
    with mpmath.workdps(dps):
        if spec.degree is not None:
            rmax = max((spec.degree - s) // 2, -1)
            total = mpmath.fsum(_terms(spec, s, rmax + 1))
            return SeriesResult(total, total, mpmath.mpf(0), rmax + 1)
        limit = R if R is not None else ADAPTIVE_CAP
        terms = _terms(spec, s, limit + 1)
        partial = mpmath.mpf(0)
        small = 0
        n = 0
        for n, t in enumerate(terms):
            partial += t
            if R is None:
                small = small + 1 if abs(t) < 1e-16 * max(abs(partial), 1e-300) else 0
                if small >= 10:
                    break
        tail = mpmath.mpf(0)
        last, prev = terms[n], terms[n - 1] if n else 0
        if n > 1 and prev and last:
            # terms ~ C r^-p; tail ~ |t_n| n / (p - 1)
            p = -mpmath.log(abs(last / prev)) / mpmath.log(mpmath.mpf(n) / (n - 1))
            if p > 1:
                tail = abs(last) * n / (p - 1)
    with mpmath.workdps(2 * dps + 10):
        terms = _terms(spec, s, LEVIN_TERMS)
        sums = []
        acc = mpmath.mpf(0)
        for t in terms:
            acc += t
            sums.append(acc)
        if not any(terms[LEVIN_TERMS // 2:]):
            value = acc  # the series terminates
        else:
            value, _ = mpmath.levin(method="levin", variant="u").update_psum(sums)
    with mpmath.workdps(dps):
        return SeriesResult(+value, partial, tail, n + 1)


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class SpectrumEntry:
    s: int
    mu: object  # ExactCoeff or mpf
    multiplicity: int

    @property
    def mu_float(self) -> float:
        return float(self.mu) if not isinstance(self.mu, ExactCoeff) else float(self.mu)

    @property
    def lam(self) -> object:
        """``lambda_s = -mu_s / (4 pi)``."""
        if isinstance(self.mu, ExactCoeff):
            return -self.mu * (4 * PI).inverse()
        return -self.mu / (4 * mpmath.pi)

    @property
    def lam_float(self) -> float:
        return float(self.lam)


@dataclass
class SpectrumTable:
    kernel: str
    entries: list[SpectrumEntry]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def by_degree(self) -> dict[int, SpectrumEntry]:
        return {e.s: e for e in self.entries}

    def rows(self) -> list[dict]:
        out = []
        for e in self.entries:
            exact = str(e.mu) if isinstance(e.mu, ExactCoeff) else None
            out.append(
                {
                    "s": e.s,
                    "mu_exact": exact,
                    "mu_float": e.mu_float,
                    "lambda_float": e.lam_float,
                    "multiplicity": e.multiplicity,
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps({"kernel": self.kernel, "entries": self.rows()}, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["s", "mu_exact", "mu_float", "lambda_float", "multiplicity"])
        w.writeheader()
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()


def spectrum_table(spec: KernelSpec, s_max: int) -> SpectrumTable:
    """``mu_s`` for every ``0 <= s <= s_max``."""
    entries = []
    for s in range(s_max + 1):
        mu = spec.eigenvalue(s) if spec.has_exact_spectrum() else (
            mpmath.mpf(0) if (s == 0 and spec.normalized) else eigenvalue_series(spec, s).value
        )
        entries.append(SpectrumEntry(s, mu, 2 * s + 1))
    return SpectrumTable(spec.name, entries)


def bifurcation_points(spec: KernelSpec, s_max: int) -> SpectrumTable:
    """Degrees with ``lambda_s != 0``, sorted by ``lambda_s`` descending."""
    table = spectrum_table(spec, s_max)
    kept = [e for e in table if abs(e.mu_float) > 1e-14]
    kept.sort(key=lambda e: (-e.lam_float, e.s))
    return SpectrumTable(spec.name, kept)


@dataclass(frozen=True)
class DecayReport:
    l_max: int
    rows: list[tuple[int, float, float]]  # (l, |mu(2l)|, pi / (2 l^3))
    majorant_partial: list[tuple[int, float]]

    @property
    def ok(self) -> bool:
        return all(mu < bound for _, mu, bound in self.rows)

    def first_violation(self) -> int | None:
        for l, mu, bound in self.rows:
            if not mu < bound:
                return l
        return None


def decay_check(l_max: int, majorant_checkpoints: tuple[int, ...] = (10, 100, 1000, 10000, 20000)) -> DecayReport:
    """Check ``|mu_O(2l)| < pi / (2 l^3)`` for ``1 <= l <= l_max``.

    Also returns partial sums of the summability majorant
    ``pi/2 sum (4l+1)^(3/2) / l^3 + (8 pi - pi^2)`` at the checkpoints.
    """
    if l_max < 1:
        raise ValueError("l_max must be at least 1")
    rows = []
    for l in range(1, l_max + 1):
        mu = abs(onsager_eigenvalue(2 * l).numeric(30))
        rows.append((l, float(mu), math.pi / (2 * l**3)))
    partial = []
    acc = 0.0
    stop = max(majorant_checkpoints)
    checks = set(majorant_checkpoints)
    for l in range(1, stop + 1):
        acc += (4 * l + 1) ** 1.5 / l**3
        if l in checks:
            partial.append((l, math.pi / 2 * acc + 8 * math.pi - math.pi**2))
    return DecayReport(l_max, rows, partial)
