"""Sparse multivariate polynomials over :class:`~.coeff.ExactCoeff`."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .coeff import ONE, ZERO, ExactCoeff, as_coeff

Exps = tuple[int, ...]


class MultiPoly:
    """Polynomial ``sum c_e x^e`` with exponent tuples of fixed length ``nvars``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exps, ExactCoeff] | None = None):
        self.nvars = nvars
        self.terms: dict[Exps, ExactCoeff] = {}
        for e, c in (terms or {}).items():
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has wrong length for {nvars} variables")
            if c:
                self.terms[tuple(e)] = c

    @classmethod
    def constant(cls, nvars: int, c) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: as_coeff(c)})

    @classmethod
    def variable(cls, nvars: int, i: int, c=ONE) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): as_coeff(c)})

    # -- structure ----------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __getitem__(self, e: Sequence[int]) -> ExactCoeff:
        return self.terms.get(tuple(e), ZERO)

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiPoly) and self.nvars == other.nvars and self.terms == other.terms

    def min_order(self, weights: Sequence[int] | None = None) -> int:
        if not self.terms:
            return 10**9
        w = weights or (1,) * self.nvars
        return min(sum(a * b for a, b in zip(e, w)) for e in self.terms)

    def max_order(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, ZERO) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MultiPoly(self.nvars, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def scale(self, c) -> "MultiPoly":
        c = as_coeff(c)
        if not c:
            return MultiPoly(self.nvars)
        return MultiPoly(self.nvars, {e: v * c for e, v in self.terms.items()})

    def mul(self, other: "MultiPoly", max_order: int | None = None) -> "MultiPoly":
        """Product, dropping monomials of total degree above ``max_order``."""
        out: dict[Exps, ExactCoeff] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if max_order is not None and d1 + sum(e2) > max_order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, ZERO) + c1 * c2
        return MultiPoly(self.nvars, {e: c for e, c in out.items() if c})

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def truncate(self, max_order: int) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= max_order})

    def homogeneous(self, order: int) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == order})

    def filter(self, pred) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: c for e, c in self.terms.items() if pred(e)})

    def map_coeffs(self, fn) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: fn(c) for e, c in self.terms.items()})

    # -- calculus & evaluation ----------------------------------------------

    def diff(self, i: int) -> "MultiPoly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return MultiPoly(self.nvars, out)

    def substitute(self, values: Mapping[int, "MultiPoly"], max_order: int | None = None) -> "MultiPoly":
        """Replace variable ``i`` by the polynomial ``values[i]`` (others kept)."""
        cache: dict[tuple[int, int], MultiPoly] = {}

        def power(i: int, k: int) -> MultiPoly:
            if (i, k) not in cache:
                cache[(i, k)] = MultiPoly.constant(self.nvars, ONE) if k == 0 else power(i, k - 1).mul(values[i], max_order)
            return cache[(i, k)]

        out = MultiPoly(self.nvars)
        for e, c in self.terms.items():
            kept = [0] * self.nvars
            term = MultiPoly.constant(self.nvars, c)
            for i, k in enumerate(e):
                if i in values:
                    if k:
                        term = term.mul(power(i, k), max_order)
                else:
                    kept[i] = k
            mono = MultiPoly(self.nvars, {tuple(kept): ONE})
            out = out + term.mul(mono, max_order)
        return out

    def eval_numeric(self, x: Sequence) -> complex:
        x = np.asarray(x, dtype=complex)
        total = 0j
        for e, c in self.terms.items():
            total += c.to_complex() * np.prod(x ** np.asarray(e))
        return total

    def compile(self):
        """Fast numeric evaluator ``f(x) -> complex`` for repeated calls."""
        exps = np.array(list(self.terms.keys()), dtype=int).reshape(-1, self.nvars)
        coeffs = np.array([c.to_complex() for c in self.terms.values()], dtype=complex)

        def f(x):
            x = np.asarray(x, dtype=complex)
            if not len(coeffs):
                return 0j
            return complex(np.sum(coeffs * np.prod(x[None, :] ** exps, axis=1)))

        return f

    def __repr__(self) -> str:
        parts = [f"({c})*x^{list(e)}" for e, c in sorted(self.terms.items())]
        return "MultiPoly(" + (" + ".join(parts) or "0") + ")"
