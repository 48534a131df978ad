"""Truncated Laurent series in one variable with explicit order tracking.

A :class:`Laurent` holds ``sum_{k=low}^{high} c_k z^k``.  Series obtained by
expanding around ``z = infinity`` (such as ``1 / x(z)``) are only known down
to some exponent; ``prec`` records the lowest exponent that is exact, and
arithmetic propagates it.  ``prec = None`` marks an exact Laurent
polynomial.  Coefficients may be floats, complex numbers or any numeric
type that numpy object arrays support (for example ``fractions.Fraction``).
"""

from __future__ import annotations

import numpy as np

__all__ = ["Laurent"]


def _merge_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


class Laurent:
    """Laurent series ``sum c[i] z^(low + i)`` known exactly for exponents ``>= prec``."""

    __slots__ = ("c", "low", "prec")

    def __init__(self, coeffs, low: int = 0, prec: int | None = None):
        c = np.array(coeffs)
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        if c.dtype.kind in "iub":
            c = c.astype(float)
        self.c = c
        self.low = int(low)
        self.prec = prec
        self._trim()

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_dict(cls, terms: dict, prec: int | None = None) -> "Laurent":
        if not terms:
            return cls([0.0], 0, prec)
        lo, hi = min(terms), max(terms)
        vals = list(terms.values())
        dtype = complex if any(isinstance(v, complex) for v in vals) else None
        c = np.zeros(hi - lo + 1, dtype=dtype or np.result_type(*[np.asarray(v) for v in vals]))
        for k, v in terms.items():
            c[k - lo] = v
        return cls(c, lo, prec)

    @classmethod
    def monomial(cls, k: int, coeff=1.0) -> "Laurent":
        return cls([coeff], k)

    def _trim(self):
        if self.prec is not None and self.low < self.prec:
            cut = self.prec - self.low
            self.c = self.c[cut:] if cut < len(self.c) else self.c[:0]
            self.low = self.prec
        nz = np.nonzero(self.c != 0)[0]
        if len(nz) == 0:
            self.c = self.c[:1] * 0 if len(self.c) else np.zeros(1)
            self.low = self.low if self.prec is None else self.prec
            return
        self.c = self.c[nz[0]:nz[-1] + 1]
        self.low += int(nz[0])

    # -- queries --------------------------------------------------------------
    @property
    def high(self) -> int:
        return self.low + len(self.c) - 1

    def is_exact(self) -> bool:
        return self.prec is None

    def coef(self, k: int):
        """Coefficient of ``z^k`` (raises if below the known precision)."""
        if self.prec is not None and k < self.prec:
            raise ValueError(f"coefficient z^{k} is below the series precision {self.prec}")
        i = k - self.low
        if 0 <= i < len(self.c):
            return self.c[i]
        return self.c.dtype.type(0) if self.c.dtype != object else 0

    def terms(self) -> dict:
        return {self.low + i: v for i, v in enumerate(self.c) if v != 0}

    def __call__(self, z):
        """Evaluate the stored terms (exact only for exact polynomials)."""
        z = np.asarray(z)
        acc = np.zeros_like(z, dtype=np.result_type(self.c.dtype, z.dtype, float))
        for v in self.c[::-1]:
            acc = acc * z + v
        return acc * z ** float(self.low) if self.low < 0 else acc * z ** self.low

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "Laurent":
        if isinstance(other, Laurent):
            return other
        return Laurent([other], 0)

    def __add__(self, other):
        o = self._coerce(other)
        lo = min(self.low, o.low)
        hi = max(self.high, o.high)
        c = np.zeros(hi - lo + 1, dtype=np.result_type(self.c.dtype, o.c.dtype))
        c[self.low - lo:self.low - lo + len(self.c)] += self.c
        c[o.low - lo:o.low - lo + len(o.c)] += o.c
        return Laurent(c, lo, _merge_prec(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return Laurent(-self.c, self.low, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Laurent):
            return Laurent(self.c * other, self.low, self.prec)
        c = np.convolve(self.c, other.c)
        # an unknown tail of one factor contaminates the product from
        # (its precision + the other factor's top exponent) downward
        p = None
        if self.prec is not None:
            p = self.prec + other.high
        if other.prec is not None:
            q = other.prec + self.high
            p = q if p is None else max(p, q)
        return Laurent(c, self.low + other.low, p)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Laurent(self.c / scalar, self.low, self.prec)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("use inverse_at_infinity for negative powers")
        out = Laurent(self.c[:1] * 0 + 1, 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def deriv(self) -> "Laurent":
        k = np.arange(self.low, self.high + 1)
        p = None if self.prec is None else self.prec - 1
        return Laurent(self.c * k, self.low - 1, p)

    def truncate(self, prec: int) -> "Laurent":
        return Laurent(self.c.copy(), self.low, _merge_prec(self.prec, prec))

    def inverse_at_infinity(self, prec: int) -> "Laurent":
        """Reciprocal as a series in ``1/z``, exact for exponents ``>= prec``."""
        h = self.high
        lead = self.c[-1]
        # F(w) = sum_i F_i w^i with F_i = coef(h - i), w = 1/z
        n_terms = -h - prec + 1
        if n_terms <= 0:
            return Laurent([0.0], prec, prec)
        F = [self.c[len(self.c) - 1 - i] if i < len(self.c) else 0 for i in range(n_terms)]
        G = [1 / lead]
        for n in range(1, n_terms):
            G.append(-sum(F[i] * G[n - i] for i in range(1, n + 1)) / lead)
        out_prec = prec
        if self.prec is not None:
            out_prec = max(prec, -2 * h + self.prec)
        coeffs = np.array(G[::-1])
        return Laurent(coeffs, -h - n_terms + 1, out_prec)

    def compose_poly(self, coeffs) -> "Laurent":
        """``p(self)`` for a polynomial with ascending ``coeffs``."""
        out = Laurent([coeffs[-1]], 0)
        for v in coeffs[-2::-1]:
            out = out * self + v
        return out

    def residue_at_infinity(self):
        """``Res_{z=inf} f(z) dz = -[z^-1] f``."""
        return -self.coef(-1)

    def residue_at_zero(self):
        """``Res_{z=0} f(z) dz = [z^-1] f`` (exact polynomials only)."""
        if self.prec is not None:
            raise ValueError("residue at zero needs an exact Laurent polynomial")
        return self.coef(-1)

    def __repr__(self):
        t = ", ".join(f"z^{k}: {v}" for k, v in self.terms().items())
        tail = "" if self.prec is None else f" + O(z^{self.prec - 1})"
        return f"Laurent({t}{tail})"
