"""Exact arithmetic in Q(sqrt(d) : d squarefree)(sqrt(pi)).

An element is stored as ``num / den`` where

* ``num`` is a finite sum of terms ``q * sqrt(s) * pi**(k/2)`` with ``q``
  rational, ``s`` a squarefree integer (``s < 0`` carries the imaginary
  unit, ``sqrt(-1) = i``) and ``k`` any integer;
* ``den`` is a product of powers of irreducible integer polynomials in
  ``t = sqrt(pi)``, each with nonzero constant term.

Because pi is transcendental the radicals ``sqrt(s)`` are linearly
independent over Q(t), so the normal form below is unique and equality is
structural.  The normal form keeps ``den`` minimal: every factor that divides
all radical components of ``num`` is cancelled.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import mpmath

Rational = Union[int, Fraction]
Poly = tuple  # ascending integer coefficients in t = sqrt(pi)

_SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# integer helpers


@lru_cache(maxsize=None)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(a, s)`` with ``n == a*a*s``, ``a > 0`` and ``s`` squarefree."""
    if n == 0:
        raise ValueError("zero has no squarefree part")
    sign = -1 if n < 0 else 1
    n = abs(n)
    a, s = 1, 1
    p = 2
    while p * p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        a *= p ** (e // 2)
        if e % 2:
            s *= p
        p += 1 if p == 2 else 2
    # remaining cofactor has at most two prime factors
    if n > 1:
        r = math.isqrt(n)
        if r * r == n:
            a *= r
        else:
            s *= n
    return a, sign * s


@lru_cache(maxsize=None)
def _radical_product(s1: int, s2: int) -> tuple[int, int]:
    """``sqrt(s1)*sqrt(s2) == f*sqrt(s)``; returns ``(f, s)``."""
    a, b = abs(s1), abs(s2)
    g = math.gcd(a, b)
    s = (a // g) * (b // g)
    neg1, neg2 = s1 < 0, s2 < 0
    if neg1 and neg2:
        return -g, s
    if neg1 or neg2:
        return g, -s
    return g, s


def _primes_of(s: int) -> set[int]:
    out = set()
    if s < 0:
        out.add(-1)
    n = abs(s)
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.add(p)
            n //= p
        p += 1
    if n > 1:
        out.add(n)
    return out


# ---------------------------------------------------------------------------
# univariate polynomials in t with Fraction coefficients (ascending lists)


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_pow(a: Poly, e: int) -> list:
    out = [Fraction(1)]
    base = [Fraction(c) for c in a]
    for _ in range(e):
        out = _poly_mul(out, base)
    return out


def _exact_div(c: list, f: Poly) -> list | None:
    """Quotient ``c / f`` if exact, else ``None``.  ``f[0] != 0``."""
    n, d = len(c) - 1, len(f) - 1
    if n < d:
        return None
    q = [Fraction(0)] * (n - d + 1)
    f0 = f[0]
    for i in range(n - d + 1):
        acc = c[i]
        for j in range(1, min(i, d) + 1):
            acc -= f[j] * q[i - j]
        q[i] = acc / f0
    # verify the high coefficients
    for i in range(n - d + 1, n + 1):
        acc = Fraction(0)
        for j in range(max(0, i - (n - d)), min(i, d) + 1):
            acc += f[j] * q[i - j]
        if acc != c[i]:
            return None
    return q


def _normalize_factor(coeffs: Iterable) -> tuple[Fraction, Poly]:
    """Split a rational polynomial into ``content * primitive`` (lead > 0)."""
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    den = 1
    for c in cs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in cs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    if ints[-1] < 0:
        g = -g
    return Fraction(g, den), tuple(c // g for c in ints)


@lru_cache(maxsize=None)
def _factor_rational_poly(coeffs: tuple) -> tuple[Fraction, tuple]:
    """Factor a polynomial in t (Fraction coefficients, ``coeffs[0] != 0``)."""
    import sympy

    t = sympy.Symbol("t")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * t**i for i, c in enumerate(coeffs))
    content, factors = sympy.factor_list(sympy.Poly(expr, t, domain="QQ"))
    content = Fraction(int(sympy.numer(content)), int(sympy.denom(content)))
    out = []
    for fac, e in factors:
        cs = [Fraction(int(sympy.numer(c)), int(sympy.denom(c))) for c in reversed(fac.all_coeffs())]
        k, prim = _normalize_factor(cs)
        content *= k**e
        out.append((prim, e))
    return content, tuple(sorted(out))


# ---------------------------------------------------------------------------


def _coerce(x) -> "ExactCoeff":
    if isinstance(x, ExactCoeff):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactCoeff.rational(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to ExactCoeff")


class ExactCoeff:
    """Element of Q(sqrt(d) : d squarefree)(sqrt(pi)) in normal form."""

    __slots__ = ("num", "den", "_hash", "_float")

    def __init__(self, num: Mapping[tuple[int, int], Fraction] | None = None, den: tuple = (), *, _normal: bool = False):
        self.num: dict[tuple[int, int], Fraction] = {k: v for k, v in (num or {}).items() if v}
        self.den: tuple = tuple(den)
        self._hash = None
        self._float = None
        if not _normal:
            self._cancel()

    # -- constructors -------------------------------------------------------

    @classmethod
    def rational(cls, q: Rational) -> "ExactCoeff":
        q = Fraction(q)
        return cls({(1, 0): q} if q else {}, _normal=True)

    @classmethod
    def term(cls, q: Rational, s: int = 1, k: int = 0) -> "ExactCoeff":
        """``q * sqrt(s) * pi**(k/2)``; ``s`` need not be squarefree."""
        q = Fraction(q)
        if q == 0:
            return cls({}, _normal=True)
        a, s = squarefree_split(s)
        return cls({(s, k): q * a}, _normal=True)

    @classmethod
    def sqrt_rational(cls, q: Rational, k: int = 0) -> "ExactCoeff":
        """``sqrt(q) * pi**(k/2)`` for rational ``q`` (negative gives ``i``)."""
        q = Fraction(q)
        if q == 0:
            return cls({}, _normal=True)
        a, s = squarefree_split(q.numerator * q.denominator)
        return cls({(s, k): Fraction(a, q.denominator)}, _normal=True)

    @classmethod
    def pi_power(cls, k: int) -> "ExactCoeff":
        """``pi**(k/2)``."""
        return cls({(1, k): Fraction(1)}, _normal=True)

    @classmethod
    def zero(cls) -> "ExactCoeff":
        return cls({}, _normal=True)

    @classmethod
    def one(cls) -> "ExactCoeff":
        return cls({(1, 0): Fraction(1)}, _normal=True)

    @classmethod
    def imag_unit(cls) -> "ExactCoeff":
        return cls({(-1, 0): Fraction(1)}, _normal=True)

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_monomial(self) -> bool:
        return not self.den and len(self.num) == 1

    def is_rational(self) -> bool:
        return not self.den and (not self.num or set(self.num) == {(1, 0)})

    def is_real(self) -> bool:
        return all(s > 0 for s, _ in self.num)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.num.get((1, 0), Fraction(0))

    # -- normal form --------------------------------------------------------

    def _components(self) -> dict[int, dict[int, Fraction]]:
        comp: dict[int, dict[int, Fraction]] = {}
        for (s, k), q in self.num.items():
            comp.setdefault(s, {})[k] = q
        return comp

    def _cancel(self) -> None:
        if not self.num:
            self.den = ()
            return
        if not self.den:
            return
        new_den = []
        for f, e in self.den:
            while e > 0:
                divided = self._divide_num(f)
                if divided is None:
                    break
                self.num = divided
                e -= 1
            if e:
                new_den.append((f, e))
        self.den = tuple(new_den)

    def _divide_num(self, f: Poly) -> dict | None:
        out = {}
        for s, terms in self._components().items():
            kmin, kmax = min(terms), max(terms)
            c = [terms.get(k, Fraction(0)) for k in range(kmin, kmax + 1)]
            q = _exact_div(c, f)
            if q is None:
                return None
            for i, v in enumerate(q):
                if v:
                    out[(s, kmin + i)] = v
        return out

    @staticmethod
    def _num_times_poly(num: dict, poly: list) -> dict:
        out: dict = {}
        for (s, k), q in num.items():
            for i, c in enumerate(poly):
                if c:
                    key = (s, k + i)
                    out[key] = out.get(key, 0) + q * c
        return {k: v for k, v in out.items() if v}

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "ExactCoeff":
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            num = dict(self.num)
            for key, q in other.num.items():
                num[key] = num.get(key, 0) + q
            return ExactCoeff(num, self.den, _normal=not self.den)
        da, db = dict(self.den), dict(other.den)
        common = {f: max(da.get(f, 0), db.get(f, 0)) for f in set(da) | set(db)}
        na, nb = self.num, other.num
        for f, e in common.items():
            if e > da.get(f, 0):
                na = self._num_times_poly(na, _poly_pow(f, e - da.get(f, 0)))
            if e > db.get(f, 0):
                nb = self._num_times_poly(nb, _poly_pow(f, e - db.get(f, 0)))
        num = dict(na)
        for key, q in nb.items():
            num[key] = num.get(key, 0) + q
        return ExactCoeff(num, tuple(sorted(common.items())))

    __radd__ = __add__

    def __neg__(self) -> "ExactCoeff":
        return ExactCoeff({k: -v for k, v in self.num.items()}, self.den, _normal=True)

    def __sub__(self, other) -> "ExactCoeff":
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "ExactCoeff":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "ExactCoeff":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return ExactCoeff.zero()
            return ExactCoeff({k: v * other for k, v in self.num.items()}, self.den, _normal=True)
        if not isinstance(other, ExactCoeff):
            return NotImplemented
        if not self.num or not other.num:
            return ExactCoeff.zero()
        num: dict = {}
        for (s1, k1), q1 in self.num.items():
            for (s2, k2), q2 in other.num.items():
                f, s = _radical_product(s1, s2)
                key = (s, k1 + k2)
                num[key] = num.get(key, 0) + q1 * q2 * f
        if not self.den and not other.den:
            return ExactCoeff(num, (), _normal=True)
        den = dict(self.den)
        for f, e in other.den:
            den[f] = den.get(f, 0) + e
        return ExactCoeff(num, tuple(sorted(den.items())))

    __rmul__ = __mul__

    def inverse(self) -> "ExactCoeff":
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        if self.is_monomial():
            (s, k), q = next(iter(self.num.items()))
            # 1/sqrt(s) = sqrt(s)/s
            return ExactCoeff({(s, -k): 1 / (q * s)}, _normal=True)
        # multiply by Galois conjugates until the numerator is radical free
        a = ExactCoeff(self.num, _normal=True)
        conj_acc = ExactCoeff.one()
        primes = set()
        for s, _ in a.num:
            primes |= _primes_of(s)
        for p in sorted(primes):
            c = a._conjugate(p)
            conj_acc = conj_acc * c
            a = a * c
        assert all(s == 1 for s, _ in a.num)
        terms = {k: q for (_, k), q in a.num.items()}
        kmin, kmax = min(terms), max(terms)
        coeffs = tuple(terms.get(k, Fraction(0)) for k in range(kmin, kmax + 1))
        content, factors = _factor_rational_poly(coeffs)
        num = {(s, k - kmin): q / content for (s, k), q in conj_acc.num.items()}
        for f, e in self.den:
            num = self._num_times_poly(num, _poly_pow(f, e))
        return ExactCoeff(num, factors)

    def _conjugate(self, p: int) -> "ExactCoeff":
        def flips(s: int) -> bool:
            return s < 0 if p == -1 else s % p == 0

        return ExactCoeff({(s, k): (-q if flips(s) else q) for (s, k), q in self.num.items()}, self.den, _normal=True)

    def __truediv__(self, other) -> "ExactCoeff":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        if not isinstance(other, ExactCoeff):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "ExactCoeff":
        return _coerce(other) * self.inverse()

    def __pow__(self, e: int) -> "ExactCoeff":
        if e < 0:
            return self.inverse() ** (-e)
        out = ExactCoeff.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "ExactCoeff":
        """Complex conjugate (flips the sign of terms carrying ``i``)."""
        return self._conjugate(-1)

    def sqrt(self) -> "ExactCoeff":
        """Square root of ``q * pi**k`` (a rational multiple of an integer power of pi)."""
        if not self.num:
            return self
        if not self.is_monomial():
            raise ValueError("sqrt only supported for monomials")
        (s, k), q = next(iter(self.num.items()))
        if s != 1 or k % 2:
            raise ValueError("sqrt only supported for rational multiples of integer powers of pi")
        return ExactCoeff.sqrt_rational(q, k // 2)

    # -- comparison ---------------------------------------------------------

    def _key(self):
        return (frozenset(self.num.items()), self.den)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ExactCoeff.rational(other)
        if not isinstance(other, ExactCoeff):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.num)

    # -- numerics -----------------------------------------------------------

    def to_complex(self) -> complex:
        if self._float is None:
            num = 0j
            for (s, k), q in self.num.items():
                r = math.sqrt(abs(s)) * _SQRT_PI**k * float(q)
                num += complex(0, r) if s < 0 else r
            den = 1.0
            for f, e in self.den:
                den *= sum(c * _SQRT_PI**i for i, c in enumerate(f)) ** e
            self._float = num / den
        return self._float

    def __float__(self) -> float:
        z = self.to_complex()
        if z.imag != 0:
            raise ValueError(f"{self} is not real")
        return z.real

    def __complex__(self) -> complex:
        return self.to_complex()

    def numeric(self, digits: int = 30):
        """High precision value (``mpf`` or ``mpc``) correct to ``digits`` digits."""
        with mpmath.workdps(digits + 10):
            t = mpmath.sqrt(mpmath.pi)
            num = mpmath.mpf(0)
            for (s, k), q in self.num.items():
                num += mpmath.sqrt(s) * t**k * mpmath.mpf(q.numerator) / q.denominator
            den = mpmath.mpf(1)
            for f, e in self.den:
                den *= mpmath.polyval(list(reversed(f)), t) ** e
            val = num / den
        with mpmath.workdps(digits):
            return +val

    # -- text & serialisation -----------------------------------------------

    @staticmethod
    def _term_str(q: Fraction, s: int, k: int, lead: bool) -> str:
        sign = "-" if q < 0 else ("" if lead else "+")
        q = abs(q)
        parts = []
        if q.numerator != 1 or (s == 1 and k == 0):
            parts.append(str(q.numerator))
        if s == -1:
            parts.append("I")
        elif s < -1:
            parts.append(f"I*sqrt({-s})")
        elif s > 1:
            parts.append(f"sqrt({s})")
        if k == 2:
            parts.append("pi")
        elif k % 2 == 0 and k:
            parts.append(f"pi^{k // 2}")
        elif k:
            parts.append(f"pi^({k}/2)")
        body = "*".join(parts) if parts else "1"
        if q.denominator != 1:
            body += f"/{q.denominator}"
        return sign + body

    @staticmethod
    def _poly_str(f: Poly) -> str:
        out = []
        for i, c in enumerate(f):
            if not c:
                continue
            t = ExactCoeff._term_str(Fraction(c), 1, i, not out)
            out.append(t)
        return "".join(out)

    def __str__(self) -> str:
        if not self.num:
            return "0"
        items = sorted(self.num.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        num = "".join(self._term_str(q, s, k, i == 0) for i, ((s, k), q) in enumerate(items))
        if not self.den:
            return num
        den = "*".join(f"({self._poly_str(f)})" + (f"^{e}" if e > 1 else "") for f, e in self.den)
        if len(items) > 1:
            num = f"({num})"
        return f"{num}/({den})"

    def __repr__(self) -> str:
        return f"ExactCoeff({self})"

    def to_json(self) -> dict:
        num = [{"q": str(q), "s": s, "k": k} for (s, k), q in sorted(self.num.items(), key=lambda kv: (kv[0][1], kv[0][0]))]
        poly = [Fraction(1)]
        for f, e in self.den:
            poly = _poly_mul(poly, _poly_pow(f, e))
        den = [{"q": str(c), "s": 1, "k": i} for i, c in enumerate(poly) if c]
        z = self.to_complex()
        return {"num": num, "den": den, "float": z.real if z.imag == 0 else [z.real, z.imag]}

    @classmethod
    def from_json(cls, data: Mapping) -> "ExactCoeff":
        def total(terms):
            out = cls.zero()
            for t in terms:
                out = out + cls.term(Fraction(t["q"]), int(t["s"]), int(t["k"]))
            return out

        num = total(data["num"])
        den_terms = data.get("den") or [{"q": "1", "s": 1, "k": 0}]
        return num / total(den_terms)


ZERO = ExactCoeff.zero()
ONE = ExactCoeff.one()
PI = ExactCoeff.pi_power(2)
SQRT_PI = ExactCoeff.pi_power(1)
I_UNIT = ExactCoeff.imag_unit()


def as_coeff(x) -> ExactCoeff:
    """Coerce ints, Fractions and ``ExactCoeff`` to ``ExactCoeff``."""
    return _coerce(x)
