"""Lyapunov-Schmidt reduction of the Euler-Lagrange operator at ``lambda_2``.

The Euler-Lagrange operator in the potential ``phi`` (density ``e^-phi/Z``) is

    E(phi, lambda) = (lambda_2 + lambda) phi - Z^-1 U(e^-phi),   Z = int e^-phi,

for a normalised kernel (``U 1 = 0``).  Its linear part at ``phi = 0`` is
``L phi = lambda_2 phi + U phi / (4 pi)``, diagonal on spherical harmonics with
value ``lambda_2 + mu_l / (4 pi)`` at degree ``l`` and kernel ``span{Y_2^m}``.
Writing ``phi = u + v`` with ``u`` in the kernel and ``v`` in its complement,
the complement equation ``L v + (1-P) R(u+v, lambda) = 0`` is solved order by
order for ``v(u, lambda)`` and the reduced equation is
``f(u, lambda) = P R(u + v(u, lambda), lambda)``.

Polynomial variables are ``u_-2, ..., u_2, lambda`` (indices 0..5).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .coeff import PI, SQRT_PI, ExactCoeff
from .harmonics import basis_matrix, basis_matrix_inverse
from .multipoly import MultiPoly
from .products import ProductEngine, default_engine
from .spectrum import ONSAGER, KernelSpec

NVARS = 6
LAM = 5
DEGREE_CAP = 16

Field = dict  # (l, m) -> MultiPoly


# ---------------------------------------------------------------------------
# Taylor expansion of the Euler-Lagrange operator


@dataclass(frozen=True)
class ELTerm:
    """``coeff * prod_j (int phi^j) * U(phi^power)``; ``moments`` lists the ``j``."""

    coeff: ExactCoeff
    moments: tuple[int, ...]
    power: int

    @property
    def order(self) -> int:
        return sum(self.moments) + self.power

    def __str__(self) -> str:
        mom = "".join(f"(int phi^{j})" for j in self.moments)
        return f"{self.coeff} {mom} U(phi^{self.power})"


@dataclass(frozen=True)
class ELExpansion:
    """Taylor polynomial of ``E`` to a given order.

    The operator is ``lambda_2 phi + lambda phi + sum(terms)``; the linear
    part ``L = lambda_2 + U/(4 pi)`` is the first entry of ``terms`` (power 1,
    no moments) together with ``lambda_2``.
    """

    kernel: KernelSpec
    lambda2: ExactCoeff
    order: int
    terms: tuple[ELTerm, ...]

    def nonlinear(self) -> tuple[ELTerm, ...]:
        return tuple(t for t in self.terms if t.order > 1)

    def linear_coefficient(self) -> ExactCoeff:
        return next(t.coeff for t in self.terms if t.order == 1)

    def summands(self) -> int:
        """Number of summands counting ``(lambda_2 + lambda) phi`` once."""
        return len(self.terms) + 1


def _partitions(total: int, max_part: int | None = None):
    """Multisets of positive integers (non-increasing tuples) summing to ``total``."""
    if total == 0:
        yield ()
        return
    top = total if max_part is None else min(total, max_part)
    for first in range(top, 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


def taylor_el(kernel: KernelSpec = ONSAGER, order: int = 4, lambda2: ExactCoeff | None = None) -> ELExpansion:
    """Expand ``E`` to ``order`` in ``phi``.

    ``1/Z = (1/4pi) sum_n eps^n`` with ``eps = sum_j (-1)^(j+1) A_j / (j! 4pi)``,
    ``A_j = int phi^j``, and ``-U(e^-phi) = sum_p (-1)^(p+1) U(phi^p) / p!``.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if lambda2 is None:
        lambda2 = -kernel.eigenvalue(2) * (4 * PI).inverse()
    terms = []
    for n in range(1, order + 1):
        for p in range(n, 0, -1):
            for moments in _partitions(n - p):
                counts = {j: moments.count(j) for j in set(moments)}
                k = len(moments)
                multinom = math.factorial(k)
                c = Fraction(1)
                for j, kj in counts.items():
                    multinom //= math.factorial(kj)
                    c *= Fraction((-1) ** (j + 1), math.factorial(j)) ** kj
                c *= multinom * Fraction((-1) ** (p + 1), math.factorial(p))
                coeff = ExactCoeff.term(c / 4 ** (k + 1), 1, -2 * (k + 1))
                terms.append(ELTerm(coeff, tuple(sorted(moments)), p))
    return ELExpansion(kernel, lambda2, order, tuple(terms))


# ---------------------------------------------------------------------------
# fields with polynomial coefficients


def _fadd(a: Field, b: Field, scale: ExactCoeff | None = None) -> Field:
    out = dict(a)
    for k, p in b.items():
        q = p if scale is None else p.scale(scale)
        s = out[k] + q if k in out else q
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _fmul(a: Field, b: Field, engine: ProductEngine, max_order: int) -> Field:
    """Product of two fields, truncated at joint order ``max_order``."""
    out: dict = {}
    mins_b = {k: q.min_order() for k, q in b.items()}
    for ka, pa in a.items():
        ma = pa.min_order()
        for kb, pb in b.items():
            if ma + mins_b[kb] > max_order:
                continue
            prod = pa.mul(pb, max_order)
            if not prod:
                continue
            for kc, c in engine.product_terms(ka, kb).items():
                if kc[0] > DEGREE_CAP:
                    raise AssertionError(f"degree {kc[0]} exceeds cap {DEGREE_CAP}")
                acc = out.get(kc)
                term = prod.scale(c)
                out[kc] = term if acc is None else acc + term
    return {k: p for k, p in out.items() if p}


def _homogeneous(a: Field, order: int) -> Field:
    out = {}
    for k, p in a.items():
        h = p.homogeneous(order)
        if h:
            out[k] = h
    return out


def _truncate(a: Field, order: int) -> Field:
    out = {}
    for k, p in a.items():
        h = p.truncate(order)
        if h:
            out[k] = h
    return out


@dataclass
class ReductionSetup:
    """Operators used by the solver; defaults derive from the kernel."""

    el: ELExpansion
    eigen: Callable[[int], ExactCoeff]
    engine: ProductEngine

    def linv(self, l: int) -> ExactCoeff:
        """Inverse of ``L`` on degree ``l`` (``4 pi / (4 pi lambda_2 + mu_l)``)."""
        if l == 2:
            raise ZeroDivisionError("L is not invertible on degree 2 (projection bug)")
        val = self.el.lambda2 + self.eigen(l) * (4 * PI).inverse()
        return val.inverse()


def _apply_u(a: Field, eigen) -> Field:
    out = {}
    for (l, m), p in a.items():
        mu = eigen(l)
        if mu:
            out[(l, m)] = p.scale(mu)
    return out


def _moment(a: Field) -> MultiPoly:
    """``int phi`` from the ``Y_0^0`` coefficient."""
    p = a.get((0, 0))
    if p is None:
        return MultiPoly(NVARS)
    return p.scale(2 * SQRT_PI)


def _lam_field(a: Field, max_order: int) -> Field:
    lam = MultiPoly.variable(NVARS, LAM)
    out = {k: p.mul(lam, max_order) for k, p in a.items()}
    return {k: p for k, p in out.items() if p}


def residual_part(setup: ReductionSetup, phi: Field, order: int) -> Field:
    """``R(phi, lambda) = E - L phi`` truncated at ``order``."""
    el = setup.el
    powers: dict[int, Field] = {1: _truncate(phi, order)}
    for k in range(2, order + 1):
        powers[k] = _fmul(powers[k - 1], powers[1], setup.engine, order)
    moments = {j: _moment(powers[j]) for j in powers}
    out: Field = _lam_field(powers[1], order)
    for t in el.nonlinear():
        if t.order > order:
            continue
        up = _apply_u(powers[t.power], setup.eigen)
        if not up:
            continue
        factor = MultiPoly.constant(NVARS, t.coeff)
        for j in t.moments:
            factor = factor.mul(moments[j], order)
            if not factor:
                break
        if not factor:
            continue
        contrib = {}
        for k, p in up.items():
            q = p.mul(factor, order)
            if q:
                contrib[k] = q
        out = _fadd(out, contrib)
    return out


def kernel_field() -> Field:
    """``u = sum u_m Y_2^m``."""
    return {(2, m): MultiPoly.variable(NVARS, m + 2) for m in range(-2, 3)}


@dataclass
class VHatTable:
    """``v`` split by bidegree: ``cells[(i, j)]`` is ``vhat_{i,j}``.

    ``v = sum vhat_{i,j} / (i! j!)`` where ``vhat_{i,j}`` collects the
    monomials of degree ``i`` in ``u`` and ``j`` in ``lambda`` (times ``i! j!``).
    """

    order: int
    v: Field
    cells: dict[tuple[int, int], Field] = field(default_factory=dict)

    def __getitem__(self, ij: tuple[int, int]) -> Field:
        return self.cells.get(tuple(ij), {})


def _split_bidegree(v: Field, order: int) -> dict[tuple[int, int], Field]:
    cells: dict[tuple[int, int], Field] = {}
    for i in range(order + 1):
        for j in range(order + 1 - i):
            fact = math.factorial(i) * math.factorial(j)
            cell = {}
            for k, p in v.items():
                q = p.filter(lambda e: e[LAM] == j and sum(e[:LAM]) == i)
                if q:
                    cell[k] = q.scale(fact)
            cells[(i, j)] = cell
    return cells


def make_setup(kernel: KernelSpec = ONSAGER, order: int = 4, engine: ProductEngine | None = None,
               eigen: Callable[[int], ExactCoeff] | None = None) -> ReductionSetup:
    if not kernel.has_exact_spectrum():
        raise ValueError("symbolic reduction needs an exact spectrum")
    el = taylor_el(kernel, order)
    return ReductionSetup(el, eigen or kernel.eigenvalue, engine or default_engine())


def solve_vhat(setup: ReductionSetup) -> VHatTable:
    """Solve the complement equation order by order up to ``setup.el.order``."""
    order = setup.el.order
    u = kernel_field()
    v: Field = {}
    for n in range(2, order + 1):
        r = _homogeneous(residual_part(setup, _fadd(u, v), n), n)
        vn = {}
        for (l, m), p in r.items():
            if l == 2:
                continue
            vn[(l, m)] = p.scale(-setup.linv(l))
        assert all(l != 2 for l, _ in vn)
        v = _fadd(v, vn)
    return VHatTable(order, v, _split_bidegree(v, order))


@dataclass
class BifurcationEq:
    """Five components ``f_m`` (``m = -2..2``) in the complex or real basis."""

    basis: str
    components: list[MultiPoly]
    order: int

    def __getitem__(self, m: int) -> MultiPoly:
        return self.components[m + 2]

    def coefficient(self, m: int, exps: Sequence[int]) -> ExactCoeff:
        return self.components[m + 2][tuple(exps)]

    def evaluate(self, x: Sequence[complex], lam: float) -> list[complex]:
        pt = list(x) + [lam]
        return [p.eval_numeric(pt) for p in self.components]

    def compile(self):
        fns = [p.compile() for p in self.components]

        def f(x, lam):
            pt = list(x) + [lam]
            return [g(pt) for g in fns]

        return f

    def rows(self) -> list[dict]:
        out = []
        for m, p in enumerate(self.components, start=-2):
            for e, c in sorted(p.terms.items()):
                z = c.to_complex()
                out.append({
                    "component": m,
                    "exponents": list(e),
                    "coeff": c.to_json(),
                    "coeff_str": str(c),
                    "coeff_float": z.real if z.imag == 0 else [z.real, z.imag],
                })
        return out

    def to_json(self) -> str:
        return json.dumps({"basis": self.basis, "order": self.order, "terms": self.rows()}, indent=2)


def assemble(setup: ReductionSetup, vhat: VHatTable) -> BifurcationEq:
    """``f = P R(u + v, lambda)`` truncated at the expansion order."""
    order = setup.el.order
    r = residual_part(setup, _fadd(kernel_field(), vhat.v), order)
    comps = [r.get((2, m), MultiPoly(NVARS)) for m in range(-2, 3)]
    return BifurcationEq("complex", comps, order)


def to_real_eq(f: BifurcationEq) -> BifurcationEq:
    """``f_real(a, lambda) = T^-1 f(T a, lambda)``; all coefficients must be real."""
    if f.basis != "complex":
        raise ValueError("expected a complex-basis equation")
    T = basis_matrix(2)
    Tinv = basis_matrix_inverse(2)
    subs = {}
    for m in range(5):
        p = MultiPoly(NVARS)
        for k in range(5):
            if T[m][k]:
                p = p + MultiPoly.variable(NVARS, k, T[m][k])
        subs[m] = p
    fu = [c.substitute(subs, f.order) for c in f.components]
    comps = []
    for m in range(5):
        acc = MultiPoly(NVARS)
        for k in range(5):
            if Tinv[m][k]:
                acc = acc + fu[k].scale(Tinv[m][k])
        bad = [c for c in acc.terms.values() if not c.is_real()]
        if bad:
            raise ArithmeticError(f"imaginary residue in real component {m - 2}: {bad[0]}")
        comps.append(acc)
    return BifurcationEq("real", comps, f.order)


@dataclass
class ReducedS:
    """Restriction to ``S = {a_-2 = a_-1 = a_1 = 0}`` in variables ``(a_0, a_2, lambda)``."""

    f0: MultiPoly
    f2: MultiPoly
    c: ExactCoeff
    d: ExactCoeff


def restrict_to_S(f: BifurcationEq) -> ReducedS:
    """Set ``a_-2 = a_-1 = a_1 = 0``; the other three components must vanish."""
    if f.basis != "real":
        raise ValueError("expected a real-basis equation")

    def restrict(p: MultiPoly) -> MultiPoly:
        out = {}
        for e, c in p.terms.items():
            if e[0] or e[1] or e[3]:
                continue
            out[(e[2], e[4], e[5])] = c
        return MultiPoly(3, out)

    for m in (-2, -1, 1):
        left = restrict(f[m])
        if left:
            raise ArithmeticError(f"component {m} does not vanish on S")
    f0, f2 = restrict(f[0]), restrict(f[2])
    return ReducedS(f0, f2, f0[(2, 0, 0)], f0[(3, 0, 0)])


@dataclass
class Reduction:
    setup: ReductionSetup
    vhat: VHatTable
    complex_eq: BifurcationEq
    real_eq: BifurcationEq
    reduced: ReducedS


def reduce(kernel: KernelSpec = ONSAGER, order: int = 4, engine: ProductEngine | None = None) -> Reduction:
    """Full pipeline: Taylor expansion, ``v``, ``f`` in both bases, restriction."""
    setup = make_setup(kernel, order, engine)
    vhat = solve_vhat(setup)
    fc = assemble(setup, vhat)
    fr = to_real_eq(fc)
    return Reduction(setup, vhat, fc, fr, restrict_to_S(fr))


def equivariance_residual(f: BifurcationEq, trials: int = 20, seed: int = 0, radius: float = 0.5) -> float:
    """Max of ``|f(M a, lambda) - M f(a, lambda)|`` over random rotations and points."""
    import numpy as np

    from .symmetry import EulerAngles, real_rep_M

    if f.basis != "real":
        raise ValueError("expected a real-basis equation")
    g = f.compile()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        M = real_rep_M(EulerAngles.random(rng))
        a = rng.uniform(-radius, radius, 5)
        lam = float(rng.uniform(-radius, radius))
        lhs = np.real_if_close(np.array(g(list(M @ a), lam)))
        rhs = M @ np.real_if_close(np.array(g(list(a), lam)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
