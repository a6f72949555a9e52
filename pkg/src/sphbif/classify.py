"""Recognition of the S_3 normal form, branches, uniaxial check, stability, global bounds."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from scipy import optimize

from .coeff import ONE, ZERO, ExactCoeff, as_coeff
from .multipoly import MultiPoly
from .reduction import ReducedS
from .spectrum import ONSAGER, KernelSpec, bifurcation_points

# variables of the slice equation: (a_0, a_2, lambda)
A0, A2, LAMBDA = 0, 1, 2


def _mono(a0: int, a2: int, lam: int) -> tuple[int, int, int]:
    return (a0, a2, lam)


def _solve_exact(rows: list[list[ExactCoeff]], rhs: list[ExactCoeff]) -> list[ExactCoeff]:
    """Exact least-squares-free solve: Gaussian elimination, consistency asserted."""
    n = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(aug)) if aug[i][c]), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = aug[r][c].inverse()
        aug[r] = [v * inv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [vi - f * vr for vi, vr in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, len(aug)):
        if aug[i][n]:
            raise ArithmeticError("equation is not of the equivariant form at this order")
    if len(piv_cols) != n:
        raise ArithmeticError("equivariant generators are not independent at this order")
    return [aug[i][n] for i in range(n)]


@dataclass
class EquivariantForm:
    """``f = a (a_0, a_2) + b (a_0^2 - a_2^2, -2 a_0 a_2)`` with ``a, b`` in ``(h_1, h_2, lambda)``.

    ``a`` and ``b`` map exponent triples ``(i, j, k)`` of ``h_1^i h_2^j lambda^k``
    to coefficients.
    """

    a: dict[tuple[int, int, int], ExactCoeff]
    b: dict[tuple[int, int, int], ExactCoeff]
    order: int

    def rebuild(self) -> tuple[MultiPoly, MultiPoly]:
        h1 = MultiPoly(3, {_mono(2, 0, 0): ONE, _mono(0, 2, 0): ONE})
        h2 = MultiPoly(3, {_mono(3, 0, 0): ONE, _mono(1, 2, 0): as_coeff(-3)})
        lam = MultiPoly.variable(3, LAMBDA)
        x = MultiPoly.variable(3, A0)
        y = MultiPoly.variable(3, A2)
        one = MultiPoly.constant(3, ONE)

        def scalar(coeffs):
            out = MultiPoly(3)
            for (i, j, k), c in coeffs.items():
                t = one
                for _ in range(i):
                    t = t * h1
                for _ in range(j):
                    t = t * h2
                for _ in range(k):
                    t = t * lam
                out = out + t.scale(c)
            return out

        a, b = scalar(self.a), scalar(self.b)
        f0 = (a * x + b * (x * x - y * y)).truncate(self.order)
        f2 = (a * y + b * (x * y).scale(-2)).truncate(self.order)
        return f0, f2


def _generators(order: int) -> list[tuple[str, tuple[int, int, int]]]:
    out = []
    for i in range(order):
        for j in range(order):
            for k in range(order):
                deg = 2 * i + 3 * j + k
                if deg + 1 <= order:
                    out.append(("a", (i, j, k)))
                if deg + 2 <= order:
                    out.append(("b", (i, j, k)))
    return out


def equivariant_form(f0: MultiPoly, f2: MultiPoly, order: int = 4) -> EquivariantForm:
    """Match ``(f0, f2)`` against the equivariant generators up to ``order``."""
    gens = _generators(order)
    probe = EquivariantForm({}, {}, order)
    cols = []
    for kind, e in gens:
        probe.a, probe.b = ({e: ONE}, {}) if kind == "a" else ({}, {e: ONE})
        cols.append(probe.rebuild())
    monos = sorted({m for g0, g2 in cols for m in list(g0.terms) + list(g2.terms)}
                   | set(f0.truncate(order).terms) | set(f2.truncate(order).terms))
    rows, rhs = [], []
    for comp, target in ((0, f0), (1, f2)):
        for m in monos:
            rows.append([(c[comp][m]) for c in cols])
            rhs.append(target[m] if sum(m) <= order else ZERO)
    sol = _solve_exact(rows, rhs)
    a = {e: v for (kind, e), v in zip(gens, sol) if kind == "a" and v}
    b = {e: v for (kind, e), v in zip(gens, sol) if kind == "b" and v}
    return EquivariantForm(a, b, order)


@dataclass
class RecognitionReport:
    a000: ExactCoeff
    b000: ExactCoeff
    da_dlambda: ExactCoeff
    verdict: bool
    epsilon: int
    form: EquivariantForm | None = None

    def as_tuple(self) -> tuple:
        return (self.a000, self.b000, self.da_dlambda, self.verdict)

    def to_dict(self) -> dict:
        return {
            "a000": str(self.a000),
            "b000": str(self.b000),
            "b000_float": float(self.b000),
            "da_dlambda": str(self.da_dlambda),
            "verdict": self.verdict,
            "epsilon": self.epsilon,
        }


def recognition(reduced: ReducedS | tuple[MultiPoly, MultiPoly], order: int = 4) -> RecognitionReport:
    """Evaluate ``a(0,0,0) = 0``, ``b(0,0,0) != 0`` and ``da/dlambda(0,0,0) != 0``."""
    f0, f2 = (reduced.f0, reduced.f2) if isinstance(reduced, ReducedS) else reduced
    form = equivariant_form(f0, f2, order)
    a000 = form.a.get((0, 0, 0), ZERO)
    b000 = form.b.get((0, 0, 0), ZERO)
    da = form.a.get((0, 0, 1), ZERO)
    verdict = not a000 and bool(b000) and bool(da)
    eps = 0 if not da else (1 if float(da) > 0 else -1)
    return RecognitionReport(a000, b000, da, verdict, eps, form)


# ---------------------------------------------------------------------------
# branches


@dataclass
class BranchSet:
    """Zero set of ``G = lambda (a_0, a_2) + (a_0^2 - a_2^2, -2 a_0 a_2)``."""

    directions: list[tuple[ExactCoeff, ExactCoeff]]
    canonical: tuple[ExactCoeff, ExactCoeff]

    def points(self, lam: float) -> list[tuple[float, float]]:
        return [(lam * float(x), lam * float(y)) for x, y in self.directions]


def normal_form_G(a0, a2, lam):
    return (lam * a0 + a0 * a0 - a2 * a2, lam * a2 - 2 * a0 * a2)


def branches() -> BranchSet:
    half = ExactCoeff.rational(Fraction(1, 2))
    r3h = ExactCoeff.sqrt_rational(Fraction(3, 4))
    dirs = [(-ONE, ZERO), (half, r3h), (half, -r3h)]
    return BranchSet(dirs, dirs[0])


def branch_invariants() -> list[tuple[ExactCoeff, ExactCoeff]]:
    """``(h_1, h_2)`` of each branch direction; equal values mean one rotation orbit."""
    return [(x * x + y * y, x * x * x - 3 * x * y * y) for x, y in branches().directions]


def branch_residuals() -> list[tuple[ExactCoeff, ExactCoeff]]:
    """``G`` on each branch, as coefficients of ``lambda^2`` (all must be zero)."""
    out = []
    for x, y in branches().directions:
        g0, g2 = normal_form_G(x, y, ONE)
        out.append((g0, g2))
    return out


# ---------------------------------------------------------------------------
# uniaxial restriction


@dataclass
class UniaxialReport:
    f: ExactCoeff
    f_a: ExactCoeff
    f_lambda: ExactCoeff
    f_a_lambda: ExactCoeff
    f_aa: ExactCoeff

    @property
    def transcritical(self) -> bool:
        return not self.f and not self.f_a and not self.f_lambda and bool(self.f_a_lambda) and bool(self.f_aa)

    def to_dict(self) -> dict:
        d = {k: str(v) for k, v in asdict(self).items()}
        d["transcritical"] = self.transcritical
        return d


def uniaxial_equation(reduced: ReducedS) -> MultiPoly:
    """``f_0`` on ``a_2 = 0`` in variables ``(a_0, lambda)``."""
    return MultiPoly(2, {(e[0], e[2]): c for e, c in reduced.f0.terms.items() if e[1] == 0})


def uniaxial_check(fs: MultiPoly | ReducedS) -> UniaxialReport:
    """Transcritical conditions at the origin for a one-variable equation in ``(a_0, lambda)``."""
    if isinstance(fs, ReducedS):
        fs = uniaxial_equation(fs)
    return UniaxialReport(
        fs[(0, 0)], fs[(1, 0)], fs[(0, 1)], fs[(1, 1)], fs[(2, 0)] * 2,
    )


def branch_point(reduced: ReducedS, lam: float) -> float:
    """Nontrivial root ``a_0`` of the uniaxial equation near ``-lambda / c``."""
    fs = uniaxial_equation(reduced)
    g = fs.compile()
    guess = -lam / float(fs[(2, 0)])

    def h(a):  # divide out the trivial root
        return (g([a, lam]).real) / a

    lo, hi = sorted((0.5 * guess, 1.5 * guess))
    return optimize.brentq(h, lo, hi, xtol=1e-15)


# ---------------------------------------------------------------------------
# stability and global bounds


@dataclass
class StabilityReport:
    lam: float
    coefficients: dict[int, float]
    classification: str

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "classification": self.classification,
                "min_degree": min(self.coefficients, key=self.coefficients.get),
                "min_coefficient": min(self.coefficients.values())}


def stability(lam: float, l_max: int = 64, kernel: KernelSpec = ONSAGER, rtol: float = 1e-12) -> StabilityReport:
    """Second-variation coefficients ``4 pi lambda + mu_l`` for even ``l`` in ``[2, l_max]``.

    A coefficient within ``rtol`` of ``4 pi lambda`` counts as zero (marginal).
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    coeffs = {l: 4 * math.pi * lam + kernel.eigenvalue_float(l) for l in range(2, l_max + 1, 2)}
    low = min(coeffs.values())
    if abs(low) <= rtol * 4 * math.pi * lam:
        cls = "marginal"
    elif low > 0:
        cls = "local minimum"
    else:
        cls = "not a local minimum"
    return StabilityReport(lam, coeffs, cls)


def stability_sweep(lams: Sequence[float], l_max: int = 64) -> list[StabilityReport]:
    return [stability(x, l_max) for x in lams]


def boundedness_bound(lam: float, M: float) -> float:
    """``C* = exp(16 M / lambda)``; ``inf`` once it exceeds the float range."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if M < 0:
        raise ValueError("M must be non-negative")
    try:
        return math.exp(16 * M / lam)
    except OverflowError:
        return math.inf


def convexity_threshold(M: float = 1.0) -> float:
    """Unique root of ``8 pi M exp(16 M / lambda) = lambda``.

    With ``lambda = M x`` the equation becomes ``8 pi exp(16 / x) = x``, so the
    root scales exactly linearly in ``M``.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    g = lambda x: math.log(8 * math.pi) + 16 / x - math.log(x)  # noqa: E731
    x = optimize.brentq(g, 1.0, 1e6, xtol=1e-14, rtol=1e-15)
    return M * x


# ---------------------------------------------------------------------------
# report


RABINOWITZ_NOTE = (
    "every listed lambda_s has odd multiplicity 2s+1, so each is a genuine bifurcation point; "
    "each global branch is unbounded or meets another bifurcation point"
)


@dataclass
class ClassificationReport:
    recognition: RecognitionReport
    branches: BranchSet
    uniaxial: UniaxialReport
    stability: list[StabilityReport]
    c_star: float
    lambda_star: float
    bifurcation_points: list[dict] = field(default_factory=list)
    rabinowitz: str = RABINOWITZ_NOTE

    @property
    def verdict(self) -> str:
        kinds = []
        if self.recognition.verdict:
            kinds.append("transcritical")
        if self.uniaxial.transcritical:
            kinds.append("uniaxial")
        return ", ".join(kinds) or "undetermined"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "recognition": self.recognition.to_dict(),
            "branches": [[str(x), str(y)] for x, y in self.branches.directions],
            "uniaxial": self.uniaxial.to_dict(),
            "stability": [s.to_dict() for s in self.stability],
            "global": {"c_star": self.c_star, "lambda_star": self.lambda_star},
            "bifurcation_points": self.bifurcation_points,
            "rabinowitz": self.rabinowitz,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def classify(reduced: ReducedS, sweep: Sequence[float] = (0.05, 0.1, 0.15), lam_bound: float = 16.0,
             M: float = 1.0, kernel: KernelSpec = ONSAGER, smax: int = 8) -> ClassificationReport:
    """Full report for the reduced equation at ``lambda_2``."""
    rec = recognition(reduced)
    pts = [
        {"s": e.s, "lambda": str(e.lam), "lambda_float": e.lam_float, "multiplicity": e.multiplicity,
         "odd_multiplicity": e.multiplicity % 2 == 1}
        for e in bifurcation_points(kernel, smax)
    ]
    return ClassificationReport(
        rec, branches(), uniaxial_check(reduced), stability_sweep(sweep),
        boundedness_bound(lam_bound, M), convexity_threshold(M), pts,
    )
