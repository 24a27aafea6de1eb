"""Exact integer-coefficient polynomials in the interaction strength beta.

Every enumerated quantity in this package is a polynomial in beta with
integer coefficients, because each walk contributes a weight (1-beta)^m
where m counts its coinciding time pairs.  Storing these polynomials
exactly (arbitrary-precision integers, no floats) lets every identity be
checked with zero tolerance.

Coefficients are stored lowest degree first: coeffs[k] is the coefficient
of beta^k.  The canonical form has no trailing zeros; the zero polynomial
has an empty coefficient tuple.
"""

from functools import lru_cache
from math import comb


def _trim(coeffs):
    n = len(coeffs)
    while n and coeffs[n - 1] == 0:
        n -= 1
    return tuple(coeffs[:n])


class BetaPolynomial:
    """Integer-coefficient polynomial in beta, canonical (no trailing zeros)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        self.coeffs = _trim(tuple(coeffs))

    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def one(cls):
        return cls((1,))

    @classmethod
    def constant(cls, c: int):
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1):
        return cls((0,) * degree + (coeff,))

    @classmethod
    def from_q_power(cls, m: int, count: int = 1):
        """count * (1-beta)^m expanded into powers of beta."""
        return cls(tuple(count * c for c in _q_power_coeffs(m)))

    @classmethod
    def from_q_histogram(cls, histogram):
        """Sum over m of histogram[m] * (1-beta)^m.

        The histogram maps an intersection-pair count m to the number of
        walks carrying weight (1-beta)^m; this is the natural accumulator
        for exact enumeration.
        """
        if not histogram:
            return cls.zero()
        deg = max(histogram)
        out = [0] * (deg + 1)
        for m, count in histogram.items():
            if count == 0:
                continue
            for k, c in enumerate(_q_power_coeffs(m)):
                out[k] += count * c
        return cls(out)

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = BetaPolynomial.constant(other)
        if not isinstance(other, BetaPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        if isinstance(other, int):
            other = BetaPolynomial.constant(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return BetaPolynomial(out)

    def __neg__(self):
        return BetaPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = BetaPolynomial.constant(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return BetaPolynomial(tuple(other * c for c in self.coeffs))
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return BetaPolynomial.zero()
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return BetaPolynomial(out)

    __rmul__ = __mul__
    __radd__ = __add__

    def shift(self, k: int):
        """Multiply by beta^k."""
        if not self.coeffs:
            return self
        return BetaPolynomial((0,) * k + self.coeffs)

    def __call__(self, beta):
        """Evaluate at a numeric beta (Horner)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * beta + c
        return acc

    def q_coefficients(self) -> tuple:
        """Rewrite in powers of q = 1-beta; returns coefficients of q^k.

        Substituting beta = 1-q is an involution with the same triangular
        binomial matrix as q = 1-beta, so this reuses _q_power_coeffs.
        """
        if not self.coeffs:
            return ()
        deg = self.degree
        out = [0] * (deg + 1)
        for m, c in enumerate(self.coeffs):
            if c:
                for k, b in enumerate(_q_power_coeffs(m)):
                    out[k] += c * b
        return _trim(out)

    def to_strings(self) -> list:
        """Coefficients as decimal strings (bit-exact JSON round trip)."""
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, strings):
        return cls(tuple(int(s) for s in strings))

    def __repr__(self):
        if not self.coeffs:
            return "BetaPolynomial(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"{c}*b")
            else:
                terms.append(f"{c}*b^{k}")
        return "BetaPolynomial(" + " + ".join(terms) + ")"


@lru_cache(maxsize=4096)
def _q_power_coeffs(m: int) -> tuple:
    """Coefficients of (1-beta)^m in powers of beta."""
    return tuple((-1) ** k * comb(m, k) for k in range(m + 1))


ZERO = BetaPolynomial.zero()
ONE = BetaPolynomial.one()
