"""Exact arithmetic in Q(t)[s] with s^2 = (9-t)/(1-t).

Every generating function attached to the growth chain lives in this quadratic
extension: s itself, F = (3/4)(s-3), the offspring function phi, and (because
the Abel equation gives s(phi(t)) = s(t) + 2) also F'(phi), F''(phi).  Field
elements are (P + Q*s)/D with polynomials P, Q, D over Q, and coefficient
extraction at order n costs O(n * deg) via the linear recurrence of s and
polynomial long division, which is what makes exact moments at m ~ 5000 cheap.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

FQ = Fraction

Poly = tuple  # tuple[Fraction, ...], ascending powers, trimmed


def _trim(c: list) -> Poly:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def p_const(v) -> Poly:
    return (FQ(v),)


def p_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def p_neg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def p_mul(a: Poly, b: Poly) -> Poly:
    if a == (FQ(0),) or b == (FQ(0),):
        return (FQ(0),)
    out = [FQ(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y != 0:
                out[i + j] += x * y
    return _trim(out)


def p_scale(a: Poly, f: Fraction) -> Poly:
    return _trim([x * f for x in a])


def p_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    if len(a) - 1 < db:
        return (FQ(0),), _trim(a)
    q = [FQ(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] / lb
        q[i - db] = c
        if c != 0:
            for j in range(db + 1):
                a[i - db + j] -= c * b[j]
    return _trim(q), _trim(a)


def p_gcd(a: Poly, b: Poly) -> Poly:
    while b != (FQ(0),):
        a, b = b, p_divmod(a, b)[1]
    if a == (FQ(0),):
        return (FQ(1),)
    return p_scale(a, 1 / a[-1])  # monic


_ONE_MINUS_T: Poly = (FQ(1), FQ(-1))
_NINE_MINUS_T: Poly = (FQ(9), FQ(-1))


class QuadExt:
    """(P + Q s)/D with s = sqrt((9-t)/(1-t)); immutable, reduced."""

    __slots__ = ("p", "q", "d")

    def __init__(self, p: Poly, q: Poly, d: Poly, reduce: bool = True):
        if d == (FQ(0),):
            raise ZeroDivisionError("zero denominator in QuadExt")
        if reduce:
            g = p_gcd(p_gcd(p, q), d)
            if len(g) > 1:
                p = p_divmod(p, g)[0]
                q = p_divmod(q, g)[0]
                d = p_divmod(d, g)[0]
            lead = d[-1]
            if lead != 1:
                p = p_scale(p, 1 / lead)
                q = p_scale(q, 1 / lead)
                d = p_scale(d, 1 / lead)
        self.p, self.q, self.d = p, q, d

    # -- constructors -----------------------------------------------------

    @classmethod
    def const(cls, v) -> "QuadExt":
        return cls(p_const(v), p_const(0), p_const(1), reduce=False)

    @classmethod
    def t(cls) -> "QuadExt":
        return cls((FQ(0), FQ(1)), p_const(0), p_const(1), reduce=False)

    @classmethod
    def s(cls) -> "QuadExt":
        return cls(p_const(0), p_const(1), p_const(1), reduce=False)

    @classmethod
    def from_poly(cls, coeffs: Sequence) -> "QuadExt":
        return cls(_trim([FQ(c) for c in coeffs]), p_const(0), p_const(1), reduce=False)

    # -- field operations ---------------------------------------------------

    def _coerce(self, other) -> "QuadExt":
        if isinstance(other, QuadExt):
            return other
        return QuadExt.const(other)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadExt(
            p_add(p_mul(self.p, o.d), p_mul(o.p, self.d)),
            p_add(p_mul(self.q, o.d), p_mul(o.q, self.d)),
            p_mul(self.d, o.d),
        )

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(p_neg(self.p), p_neg(self.q), self.d, reduce=False)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        # (p1+q1 s)(p2+q2 s) = p1p2 + q1q2 (9-t)/(1-t) + (p1q2+p2q1) s
        pp = p_add(
            p_mul(p_mul(self.p, o.p), _ONE_MINUS_T),
            p_mul(p_mul(self.q, o.q), _NINE_MINUS_T),
        )
        qq = p_mul(p_add(p_mul(self.p, o.q), p_mul(self.q, o.p)), _ONE_MINUS_T)
        return QuadExt(pp, qq, p_mul(p_mul(self.d, o.d), _ONE_MINUS_T))

    __rmul__ = __mul__

    def inverse(self) -> "QuadExt":
        # 1/((p+qs)/d) = d (p - q s)(1-t) / (p^2 (1-t) - q^2 (9-t))
        den = p_add(
            p_mul(p_mul(self.p, self.p), _ONE_MINUS_T),
            p_neg(p_mul(p_mul(self.q, self.q), _NINE_MINUS_T)),
        )
        num_p = p_mul(p_mul(self.d, self.p), _ONE_MINUS_T)
        num_q = p_neg(p_mul(p_mul(self.d, self.q), _ONE_MINUS_T))
        return QuadExt(num_p, num_q, den)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadExt.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- coefficient extraction ---------------------------------------------

    def series(self, order: int, s_coeffs: Sequence[Fraction]) -> list[Fraction]:
        """Taylor coefficients 0..order; s_coeffs must reach order + t-valuation
        of the denominator."""
        v = 0
        while v < len(self.d) and self.d[v] == 0:
            v += 1
        n = order + v
        if len(s_coeffs) < n + 1:
            raise ValueError(f"need s-series to order {n}, got {len(s_coeffs) - 1}")
        num = [FQ(0)] * (n + 1)
        for i, c in enumerate(self.p[: n + 1]):
            num[i] += c
        for i, c in enumerate(self.q):
            if c == 0:
                continue
            for k in range(i, n + 1):
                num[k] += c * s_coeffs[k - i]
        if any(num[i] != 0 for i in range(v)):
            raise ArithmeticError("element has a pole at t = 0")
        num = num[v:]
        dd = self.d[v:]
        out = [FQ(0)] * (order + 1)
        for k in range(order + 1):
            acc = num[k]
            for j in range(1, min(len(dd) - 1, k) + 1):
                if dd[j] != 0:
                    acc -= dd[j] * out[k - j]
            out[k] = acc / dd[0]
        return out

    def coefficient(self, m: int, s_coeffs: Sequence[Fraction]) -> Fraction:
        return self.series(m, s_coeffs)[m]

    def __repr__(self):
        return f"QuadExt(p={self.p}, q={self.q}, d={self.d})"
