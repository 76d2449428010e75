"""Exact real numbers of the form sum_p c_p * log(p) over primes p.

Logarithms of distinct primes are linearly independent over the rationals
(a product of prime powers equals 1 only when all exponents vanish), so a
value sum_p c_p*log(p) with rational c_p is zero exactly when every
coefficient is zero.  This makes the zero test structural, and every other
sign decision reduces to interval arithmetic at a precision that is doubled
until the enclosure excludes zero, which must happen for a provably nonzero
number.

All entropies of uniform distributions on finite supports live in this
ring of values: logs of integer counts and rational probabilities.
Exactness is what allows equalities like D(A:B) = log q - log(q-1) to be
decided rather than approximated.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import mpmath

from .errors import DomainError

#: Trial division gives up past this bound (desk-scale inputs only).
DEFAULT_FACTOR_CAP = 10**12

_SIGN_START_PREC = 64
_SIGN_MAX_PREC = 1 << 20


def factorize(n: int, cap: int = DEFAULT_FACTOR_CAP) -> dict[int, int]:
    """Prime factorization of a positive integer by trial division."""
    if n <= 0:
        raise DomainError(f"cannot factor non-positive integer {n}")
    if n > cap:
        raise DomainError(f"{n} exceeds the factorization cap {cap}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 5
    while d * d <= n:
        for p in (d, d + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        d += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    d = 5
    while d * d <= n:
        if n % d == 0 or n % (d + 2) == 0:
            return False
        d += 6
    return True


class Approx(NamedTuple):
    """A certified numeric evaluation: |value - truth| <= bound.

    The value is an arbitrary-precision mpmath float when more than double
    precision was requested (so the bound stays meaningful); float() it for
    display.
    """

    value: object
    bound: float


def _iv_eval(items, prec):
    """Interval enclosure of sum c*log(p) at the given binary precision."""
    iv = mpmath.iv
    old = iv.prec
    iv.prec = prec
    try:
        total = iv.mpf(0)
        for p, c in items:
            total += (iv.mpf(c.numerator) / iv.mpf(c.denominator)) * iv.log(p)
        return total
    finally:
        iv.prec = old


class LogValue:
    """An exact rational linear combination of logarithms of primes.

    Canonical form: the term map never stores a zero coefficient and the
    empty map is the real number 0.  Values are immutable and hashable;
    arithmetic returns new values.  Comparisons are exact (decided by the
    certified sign of the difference).
    """

    __slots__ = ("_terms", "_sign")

    def __init__(self, terms=None, *, _validated=False):
        canon: dict[int, Fraction] = {}
        if terms:
            for p, c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                if not _validated and (p < 2 or not is_prime(p)):
                    raise DomainError(f"term key {p} is not prime")
                canon[int(p)] = c
        object.__setattr__(self, "_terms", canon)
        object.__setattr__(self, "_sign", None)

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls) -> "LogValue":
        return cls()

    @classmethod
    def _raw(cls, canon: dict[int, Fraction]) -> "LogValue":
        v = cls.__new__(cls)
        object.__setattr__(v, "_terms", canon)
        object.__setattr__(v, "_sign", None)
        return v

    # -- accessors ---------------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        canon = dict(self._terms)
        for p, c in other._terms.items():
            s = canon.get(p, 0) + c
            if s:
                canon[p] = s
            else:
                canon.pop(p, None)
        return LogValue._raw(canon)

    def __sub__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return LogValue._raw({p: -c for p, c in self._terms.items()})

    def scale(self, c) -> "LogValue":
        c = Fraction(c)
        if c == 0:
            return LogValue.zero()
        return LogValue._raw({p: c * v for p, v in self._terms.items()})

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    # -- sign, comparison --------------------------------------------------

    def sign(self) -> int:
        """Certified sign in {-1, 0, +1}.

        Zero is structural (empty term map); otherwise interval arithmetic
        at doubling precision until the enclosure excludes zero.
        """
        if not self._terms:
            return 0
        if self._sign is not None:
            return self._sign
        items = list(self._terms.items())
        prec = _SIGN_START_PREC
        while prec <= _SIGN_MAX_PREC:
            box = _iv_eval(items, prec)
            if box.a > 0:
                object.__setattr__(self, "_sign", 1)
                return 1
            if box.b < 0:
                object.__setattr__(self, "_sign", -1)
                return -1
            prec *= 2
        raise RuntimeError(f"sign undecided at precision {_SIGN_MAX_PREC}: {self!r}")

    def __eq__(self, other):
        if isinstance(other, LogValue):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # -- numeric evaluation --------------------------------------------------

    def to_float(self, bits: int = 53) -> Approx:
        """Certified numeric evaluation with an absolute error bound.

        The bound satisfies bound <= 2^(1-bits) * (1 + sum |c_p| log p).
        For bits <= 53 the value is a plain float; beyond that it is an
        mpmath float carrying the requested precision.
        """
        if bits < 1:
            raise DomainError("bits must be >= 1")
        if not self._terms:
            return Approx(0.0, 0.0)
        prec = max(bits + 16, 64)
        box = _iv_eval(list(self._terms.items()), prec)
        with mpmath.workprec(prec + 8):
            mid = (mpmath.mpf(box.a) + mpmath.mpf(box.b)) / 2
            rad = (mpmath.mpf(box.b) - mpmath.mpf(box.a)) / 2
            rad += abs(mid) * mpmath.mpf(2) ** (-(prec + 4))
        bound = float(rad) * (1 + 1e-12) + 5e-324
        if bits <= 53:
            value = float(mid)
            return Approx(value, bound + abs(value) * 2.3e-16)
        return Approx(mid, bound)

    def normalize_base(self, base: int, bits: int = 53):
        """Divide by log(base); exact Fraction when possible, else Approx.

        The value is an exact rational multiple of log(base) precisely when
        the term map is proportional to the prime factorization of base.
        """
        if base < 2:
            raise DomainError("base must be an integer >= 2")
        bfact = factorize(base)
        if not self._terms:
            return Fraction(0)
        if set(self._terms) == set(bfact):
            p0, e0 = next(iter(bfact.items()))
            c = self._terms[p0] / e0
            if all(self._terms[p] == c * e for p, e in bfact.items()):
                return c
        items = list(self._terms.items())
        bitems = [(p, Fraction(e)) for p, e in bfact.items()]
        prec = max(bits + 16, 64)
        while True:
            num = _iv_eval(items, prec)
            den = _iv_eval(bitems, prec)
            box = num / den
            rad = (mpmath.mpf(box.b) - mpmath.mpf(box.a)) / 2
            mid = (mpmath.mpf(box.a) + mpmath.mpf(box.b)) / 2
            if rad <= mpmath.mpf(2) ** (-bits) * (abs(mid) + 1):
                value = float(mid)
                return Approx(value, float(rad) + abs(value) * 2.3e-16 + 5e-324)
            prec *= 2

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "terms": {
                str(p): f"{c.numerator}/{c.denominator}"
                for p, c in sorted(self._terms.items())
            }
        }

    @classmethod
    def from_json(cls, obj) -> "LogValue":
        if not isinstance(obj, dict) or "terms" not in obj:
            raise DomainError("LogValue JSON must be an object with a 'terms' key")
        terms = {}
        for k, v in obj["terms"].items():
            terms[int(k)] = Fraction(v)
        return cls(terms)

    def __repr__(self):
        if not self._terms:
            return "LogValue(0)"
        parts = [f"{c}*log({p})" for p, c in sorted(self._terms.items())]
        return "LogValue(" + " + ".join(parts) + ")"


def log_of_rat(r, cap: int = DEFAULT_FACTOR_CAP) -> LogValue:
    """log of a positive rational, as the exact prime-exponent combination."""
    r = Fraction(r)
    if r <= 0:
        raise DomainError(f"log of non-positive rational {r}")
    terms: dict[int, Fraction] = {}
    for p, e in factorize(r.numerator, cap).items():
        terms[p] = Fraction(e)
    for p, e in factorize(r.denominator, cap).items():
        terms[p] = terms.get(p, Fraction(0)) - e
    return LogValue._raw({p: c for p, c in terms.items() if c})


#: log 2, handy in several closed forms
LOG2 = log_of_rat(2)
