"""Products of spherical harmonics by rewriting with memoisation.

The engine never evaluates Wigner symbols.  It rewrites ``Y_a * Y_b`` with
four rule families, all stated for the conventions of :mod:`.harmonics`:

* degree lowering (``l - |m| >= 2``)::

      Y_l^m = A x Y_{l-1}^m - B Y_{l-2}^m

  and the factor ``x`` is moved onto the other harmonic;
* ``x * Y_p^q`` as a combination of ``Y_{p+1}^q`` and ``Y_{p-1}^q``;
* base shapes ``Y_l^m = K x^(l-|m|) (e^{+-i phi} sqrt(1-x^2))^|m|`` when
  ``l - |m|`` is 0 or 1;
* raising and lowering by one factor ``e^{+-i phi} sqrt(1-x^2)``, which moves
  ``(p, q)`` to ``(p +- 1, q +- 1)``.

Intermediate shapes ``x * Y`` and ``(e^{+-i phi} sqrt(1-x^2))^n * Y`` carry
their own memo keys.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .coeff import ONE, ZERO, ExactCoeff, as_coeff
from .harmonics import SHExpansion, SHIndex, alp, normalization

Terms = dict  # (l, m) -> ExactCoeff


class RecursionCapExceeded(RuntimeError):
    """The rewriting recursion went deeper than the configured cap."""


@lru_cache(maxsize=None)
def _nratio(l1: int, m1: int, l2: int, m2: int) -> ExactCoeff:
    return normalization(l1, m1) * normalization(l2, m2).inverse()


@lru_cache(maxsize=None)
def _base_constant(l: int, m: int) -> ExactCoeff:
    """``K`` with ``Y_l^m = K x^(l-|m|) (e^{+-i phi} sqrt(1-x^2))^|m|``."""
    poly = alp(l, m).poly
    return normalization(l, m) * poly[l - abs(m)]


def _acc(out: Terms, terms: Mapping, c: ExactCoeff) -> None:
    for key, v in terms.items():
        w = out.get(key, ZERO) + v * c
        if w:
            out[key] = w
        else:
            out.pop(key, None)


class ProductEngine:
    """Memoised rewriting engine for products of spherical harmonics.

    ``memo=False`` disables the table (used to test that memoisation does not
    change results).  ``depth_cap`` overrides the default recursion cap of
    ``10*(l_a+l_b)+64``.
    """

    def __init__(self, memo: bool = True, depth_cap: int | None = None):
        self.memo = memo
        self.depth_cap = depth_cap
        self._table: dict[tuple, Terms] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    # -- memo helpers -------------------------------------------------------

    def _lookup(self, key):
        if not self.memo:
            return None
        hit = self._table.get(key)
        if hit is not None:
            self.hits += 1
        return hit

    def _store(self, key, value: Terms) -> Terms:
        if not self.memo:
            return value
        self.misses += 1
        with self._lock:
            # insert once: concurrent duplicates are equal by construction
            return self._table.setdefault(key, value)

    def __len__(self) -> int:
        return len(self._table)

    # -- elementary rules ---------------------------------------------------

    def x_times(self, p: int, q: int) -> Terms:
        """``x * Y_p^q``."""
        key = ("x", p, q)
        hit = self._lookup(key)
        if hit is not None:
            return hit
        out: Terms = {}
        c_up = _nratio(p, q, p + 1, q) * Fraction(p - q + 1, 2 * p + 1)
        out[(p + 1, q)] = c_up
        if abs(q) <= p - 1:
            out[(p - 1, q)] = _nratio(p, q, p - 1, q) * Fraction(p + q, 2 * p + 1)
        return self._store(key, out)

    def _step(self, sign: int, p: int, q: int) -> Terms:
        """``e^{sign i phi} sqrt(1-x^2) * Y_p^q``."""
        out: Terms = {}
        if sign > 0:
            out[(p + 1, q + 1)] = _nratio(p, q, p + 1, q + 1) * Fraction(1, 2 * p + 1)
            if abs(q + 1) <= p - 1:
                out[(p - 1, q + 1)] = -_nratio(p, q, p - 1, q + 1) * Fraction(1, 2 * p + 1)
        else:
            out[(p + 1, q - 1)] = -_nratio(p, q, p + 1, q - 1) * Fraction((p - q + 1) * (p - q + 2), 2 * p + 1)
            if abs(q - 1) <= p - 1:
                out[(p - 1, q - 1)] = _nratio(p, q, p - 1, q - 1) * Fraction((p + q - 1) * (p + q), 2 * p + 1)
        return out

    def shift(self, n: int, sign: int, p: int, q: int, depth: int = 0, cap: int = 10**6) -> Terms:
        """``(e^{sign i phi} sqrt(1-x^2))^n * Y_p^q``."""
        if n == 0:
            return {(p, q): ONE}
        if depth > cap:
            raise RecursionCapExceeded(f"rewrite depth {depth} exceeds cap {cap}")
        key = ("s", n, sign, p, q)
        hit = self._lookup(key)
        if hit is not None:
            return hit
        out: Terms = {}
        for (p1, q1), c in self._step(sign, p, q).items():
            _acc(out, self.shift(n - 1, sign, p1, q1, depth + 1, cap), c)
        return self._store(key, out)

    def _prod(self, l: int, m: int, p: int, q: int, depth: int, cap: int) -> Terms:
        """``Y_l^m * Y_p^q`` reducing the first factor."""
        if depth > cap:
            raise RecursionCapExceeded(f"rewrite depth {depth} exceeds cap {cap}")
        key = ("p", l, m, p, q)
        hit = self._lookup(key)
        if hit is not None:
            return hit
        out: Terms = {}
        if l - abs(m) >= 2:
            a = _nratio(l, m, l - 1, m) * Fraction(2 * l - 1, l - m)
            b = _nratio(l, m, l - 2, m) * Fraction(l + m - 1, l - m)
            for (p1, q1), c in self.x_times(p, q).items():
                _acc(out, self._prod(l - 1, m, p1, q1, depth + 1, cap), a * c)
            _acc(out, self._prod(l - 2, m, p, q, depth + 1, cap), -b)
        else:
            k = _base_constant(l, m)
            start = {(p, q): ONE} if l == abs(m) else self.x_times(p, q)
            sign = 1 if m >= 0 else -1
            for (p1, q1), c in start.items():
                _acc(out, self.shift(abs(m), sign, p1, q1, depth + 1, cap), k * c)
        return self._store(key, out)

    # -- public -------------------------------------------------------------

    def product_terms(self, a: tuple[int, int], b: tuple[int, int]) -> Terms:
        """Raw ``{(l, m): coeff}`` of ``Y_a * Y_b`` (shared; do not mutate)."""
        SHIndex(*a)
        SHIndex(*b)
        (la, ma), (lb, mb) = a, b
        # reduce the factor with larger l-|m|; ties go to the first argument
        if lb - abs(mb) > la - abs(ma):
            (la, ma), (lb, mb) = (lb, mb), (la, ma)
        cap = self.depth_cap if self.depth_cap is not None else 10 * (la + lb) + 64
        return self._prod(la, ma, lb, mb, 0, cap)

    def product(self, a, b) -> SHExpansion:
        """Expansion of ``Y_a * Y_b`` in spherical harmonics."""
        return SHExpansion(self.product_terms(tuple(a), tuple(b)))

    def multiply(self, e1: SHExpansion, e2: SHExpansion) -> SHExpansion:
        """Product of two finite expansions."""
        if e1.basis != "complex" or e2.basis != "complex":
            raise ValueError("products are computed in the complex basis")
        out: Terms = {}
        for a, ca in e1.terms.items():
            for b, cb in e2.terms.items():
                _acc(out, self.product_terms(a, b), ca * cb)
        return SHExpansion(out)

    def expand_poly(self, e: SHExpansion, exponent: int) -> SHExpansion:
        """``e ** exponent`` routed through :meth:`product`."""
        if exponent < 1:
            raise ValueError("exponent must be positive")
        out = e
        for _ in range(exponent - 1):
            out = self.multiply(out, e)
        return out


def apply_interaction(e: SHExpansion, eigenvalues) -> SHExpansion:
    """Multiply each degree-``l`` coefficient by ``eigenvalues[l]``.

    ``eigenvalues`` is a mapping or a callable ``l -> ExactCoeff``.
    """
    out = {}
    for (l, m), c in e.terms.items():
        try:
            mu = eigenvalues(l) if callable(eigenvalues) else eigenvalues[l]
        except (KeyError, IndexError) as exc:
            raise KeyError(f"no eigenvalue for degree {l}") from exc
        out[(l, m)] = c * as_coeff(mu)
    return SHExpansion(out, e.basis)


_DEFAULT = ProductEngine()


def product(a, b) -> SHExpansion:
    """``Y_a * Y_b`` using the shared module-level engine."""
    return _DEFAULT.product(a, b)


def default_engine() -> ProductEngine:
    return _DEFAULT
