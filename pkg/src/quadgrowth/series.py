"""Truncated formal power series with exact rational coefficients.

Two series types live here: univariate ``Series`` (in t or x) and bivariate
``BiSeries`` (powers of x with polynomial-in-y coefficients).  Coefficients
are ``fractions.Fraction`` throughout; nothing in this module touches floats.
Truncation order is explicit state: coefficients above the order are unknown,
not zero, and operations refuse to mix orders.

Square roots are restricted to arguments whose constant term is the square of
a rational (resp. of a y-polynomial); callers normalize first when needed.
Closed-form expressions (``CF*`` nodes, evaluated by ``compose_closed``) allow
composition g(f) with f(0) != 0, which plain Taylor recomposition cannot do.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence, Union

Q = Fraction

__all__ = [
    "Series",
    "BiSeries",
    "SeriesOrderError",
    "NonInvertibleSeriesError",
    "IrrationalConstantError",
    "sqrt_fraction",
    "CFConst",
    "CFArg",
    "CFAdd",
    "CFSub",
    "CFMul",
    "CFDiv",
    "CFSqrt",
    "compose_closed",
]


class SeriesOrderError(ValueError):
    """Operands have different truncation orders."""


class NonInvertibleSeriesError(ZeroDivisionError):
    """Division by a series whose constant term is zero (non-invertible series)."""


class IrrationalConstantError(ValueError):
    """Square root of a series whose constant term is not a perfect square."""


def sqrt_fraction(x: Fraction) -> Fraction:
    """Exact square root of a non-negative rational, or IrrationalConstantError."""
    if x < 0:
        raise IrrationalConstantError(f"irrational constant term: sqrt of negative {x}")
    pn, pd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if pn * pn != x.numerator or pd * pd != x.denominator:
        raise IrrationalConstantError(f"irrational constant term: {x} is not a perfect square")
    return Q(pn, pd)


def _as_frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Q(v)
    raise TypeError(f"expected int or Fraction, got {type(v)!r}")


class Series:
    """Univariate truncated power series over Q, immutable.

    ``coeffs`` has length ``order + 1``.  Arithmetic never reads beyond the
    stored order, and both operands must carry the same order.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Union[int, Fraction]]):
        if len(coeffs) == 0:
            raise ValueError("a series needs at least the constant coefficient")
        self.coeffs: tuple[Fraction, ...] = tuple(_as_frac(c) for c in coeffs)

    # -- constructors ----------------------------------------------------

    @classmethod
    def constant(cls, value, order: int) -> "Series":
        return cls([_as_frac(value)] + [Q(0)] * order)

    @classmethod
    def identity(cls, order: int) -> "Series":
        """The series t, to the given order."""
        c = [Q(0)] * (order + 1)
        if order >= 1:
            c[1] = Q(1)
        return cls(c)

    @classmethod
    def from_poly(cls, coeffs: Sequence[Union[int, Fraction]], order: int) -> "Series":
        c = [_as_frac(v) for v in coeffs[: order + 1]]
        c += [Q(0)] * (order + 1 - len(c))
        return cls(c)

    # -- basics ----------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        if not 0 <= n <= self.order:
            raise IndexError(f"coefficient {n} beyond truncation order {self.order}")
        return self.coeffs[n]

    def __eq__(self, other) -> bool:
        return isinstance(other, Series) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        shown = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if self.order >= 6 else ""
        return f"Series([{shown}{more}]; order={self.order})"

    def _check(self, other: "Series") -> None:
        if self.order != other.order:
            raise SeriesOrderError(f"order mismatch: {self.order} vs {other.order}")

    def truncate(self, order: int) -> "Series":
        if order > self.order:
            raise SeriesOrderError(f"cannot extend order {self.order} to {order}")
        return Series(self.coeffs[: order + 1])

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Series.constant(other, self.order)
        self._check(other)
        return Series([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Series([-a for a in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Series.constant(other, self.order)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = _as_frac(other)
            return Series([a * f for a in self.coeffs])
        self._check(other)
        n = self.order
        a, b = self.coeffs, other.coeffs
        out = [Q(0)] * (n + 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j in range(n + 1 - i):
                bj = b[j]
                if bj != 0:
                    out[i + j] += ai * bj
        return Series(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            f = _as_frac(other)
            if f == 0:
                raise NonInvertibleSeriesError("division by zero")
            return Series([a / f for a in self.coeffs])
        self._check(other)
        b0 = other.coeffs[0]
        if b0 == 0:
            raise NonInvertibleSeriesError("non-invertible series: zero constant term")
        n = self.order
        b = other.coeffs
        out = [Q(0)] * (n + 1)
        for k in range(n + 1):
            acc = self.coeffs[k]
            for j in range(1, k + 1):
                if b[j] != 0:
                    acc -= b[j] * out[k - j]
            out[k] = acc / b0
        return Series(out)

    def __rtruediv__(self, other):
        return Series.constant(other, self.order) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = Series.constant(1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus / roots --------------------------------------------------

    def sqrt(self) -> "Series":
        """Square root with the branch fixed by the positive rational root
        of the constant term."""
        c0 = sqrt_fraction(self.coeffs[0])
        if c0 == 0:
            raise IrrationalConstantError(
                "irrational constant term: sqrt needs an invertible constant term"
            )
        n = self.order
        out = [Q(0)] * (n + 1)
        out[0] = c0
        inv2c0 = 1 / (2 * c0)
        for k in range(1, n + 1):
            acc = self.coeffs[k]
            for j in range(1, k):
                acc -= out[j] * out[k - j]
            out[k] = acc * inv2c0
        return Series(out)

    def derivative(self) -> "Series":
        """Termwise derivative; the result is one order shorter."""
        if self.order == 0:
            return Series([Q(0)])
        return Series([(k + 1) * self.coeffs[k + 1] for k in range(self.order)])

    def compose(self, inner: "Series") -> "Series":
        """Taylor composition self(inner); requires inner(0) = 0."""
        self._check(inner)
        if inner.coeffs[0] != 0:
            raise ValueError("Taylor composition needs inner(0) = 0; use compose_closed")
        n = self.order
        out = Series.constant(self.coeffs[n], n)
        for k in range(n - 1, -1, -1):  # Horner
            out = out * inner + self.coeffs[k]
        return out

    def reversion(self) -> "Series":
        """Compositional inverse g with g(self(t)) = t; needs [t^0]=0, [t^1] != 0."""
        if self.coeffs[0] != 0:
            raise ValueError("reversion needs zero constant term")
        if self.order < 1 or self.coeffs[1] == 0:
            raise NonInvertibleSeriesError("reversion needs an invertible linear term")
        n = self.order
        g = [Q(0)] * (n + 1)
        g[1] = 1 / self.coeffs[1]
        for k in range(2, n + 1):
            # impose [t^k] g(f(t)) = 0 given g_1..g_{k-1}
            partial = Series(g[: k + 1] + [Q(0)] * 0)
            comp = Series(list(partial.coeffs) + [Q(0)] * (n - k)).compose(self)
            g[k] = -comp.coeffs[k] / (self.coeffs[1] ** k)
        return Series(g)

    def eval_fraction(self, x: Fraction) -> Fraction:
        """Evaluate the truncated polynomial at a rational point."""
        acc = Q(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __float__(self) -> float:
        return float(self.coeffs[0])


# ---------------------------------------------------------------------------
# bivariate series: x-powers with y-polynomial coefficients
# ---------------------------------------------------------------------------

YPoly = tuple  # tuple[Fraction, ...] of fixed length order_y + 1


def _ypoly(vals, order_y: int) -> YPoly:
    c = [_as_frac(v) for v in vals[: order_y + 1]]
    c += [Q(0)] * (order_y + 1 - len(c))
    return tuple(c)


def _yp_add(a: YPoly, b: YPoly) -> YPoly:
    return tuple(x + y for x, y in zip(a, b))


def _yp_neg(a: YPoly) -> YPoly:
    return tuple(-x for x in a)


def _yp_scale(a: YPoly, f: Fraction) -> YPoly:
    return tuple(x * f for x in a)


def _yp_mul(a: YPoly, b: YPoly) -> YPoly:
    n = len(a)
    out = [Q(0)] * n
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(n - i):
            if b[j] != 0:
                out[i + j] += ai * b[j]
    return tuple(out)


def _yp_div(a: YPoly, b: YPoly) -> YPoly:
    """a/b as truncated y-series; b must have nonzero constant term."""
    if b[0] == 0:
        raise NonInvertibleSeriesError(
            "non-invertible series: y-polynomial with zero constant term"
        )
    n = len(a)
    out = [Q(0)] * n
    for k in range(n):
        acc = a[k]
        for j in range(1, k + 1):
            if b[j] != 0:
                acc -= b[j] * out[k - j]
        out[k] = acc / b[0]
    return tuple(out)


def _yp_sqrt(a: YPoly) -> YPoly:
    """Square root of a y-polynomial as a truncated y-series.

    The branch takes the positive rational root of a[0]; a[0] = 0 is allowed
    only when the whole polynomial is an exact square with vanishing root
    constant term, which we do not need, so it is rejected.
    """
    c0 = sqrt_fraction(a[0])
    if c0 == 0 and any(x != 0 for x in a[1:]):
        raise IrrationalConstantError("irrational constant term in y-polynomial sqrt")
    if c0 == 0:
        return tuple(Q(0) for _ in a)
    n = len(a)
    out = [Q(0)] * n
    out[0] = c0
    inv2 = 1 / (2 * c0)
    for k in range(1, n):
        acc = a[k]
        for j in range(1, k):
            acc -= out[j] * out[k - j]
        out[k] = acc * inv2
    return tuple(out)


class BiSeries:
    """Series in x whose coefficients are y-polynomials, both truncated.

    ``coeffs[i][j]`` is the coefficient of x^i y^j; every y-polynomial is
    stored to degree order_y exactly.
    """

    __slots__ = ("coeffs", "order_y")

    def __init__(self, coeffs, order_y: int):
        self.order_y = order_y
        self.coeffs: tuple[YPoly, ...] = tuple(_ypoly(row, order_y) for row in coeffs)

    @classmethod
    def constant(cls, value, order_x: int, order_y: int) -> "BiSeries":
        rows = [[value]] + [[0]] * order_x
        return cls(rows, order_y)

    @classmethod
    def var_x(cls, order_x: int, order_y: int) -> "BiSeries":
        rows = [[0], [1]] + [[0]] * (order_x - 1)
        return cls(rows, order_y)

    @classmethod
    def var_y(cls, order_x: int, order_y: int) -> "BiSeries":
        rows = [[0, 1]] + [[0]] * order_x
        return cls(rows, order_y)

    @property
    def order_x(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int, j: int) -> Fraction:
        if not (0 <= i <= self.order_x and 0 <= j <= self.order_y):
            raise IndexError(f"coefficient ({i},{j}) beyond orders ({self.order_x},{self.order_y})")
        return self.coeffs[i][j]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BiSeries)
            and self.order_y == other.order_y
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.coeffs, self.order_y))

    def __repr__(self) -> str:
        return f"BiSeries(order_x={self.order_x}, order_y={self.order_y})"

    def _check(self, other: "BiSeries") -> None:
        if self.order_x != other.order_x or self.order_y != other.order_y:
            raise SeriesOrderError(
                f"order mismatch: ({self.order_x},{self.order_y}) vs "
                f"({other.order_x},{other.order_y})"
            )

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return BiSeries.constant(other, self.order_x, self.order_y)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        return BiSeries(
            [_yp_add(a, b) for a, b in zip(self.coeffs, other.coeffs)], self.order_y
        )

    __radd__ = __add__

    def __neg__(self):
        return BiSeries([_yp_neg(a) for a in self.coeffs], self.order_y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + self._coerce(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = _as_frac(other)
            return BiSeries([_yp_scale(a, f) for a in self.coeffs], self.order_y)
        self._check(other)
        n = self.order_x
        zero = _ypoly([0], self.order_y)
        out = [zero] * (n + 1)
        for i, ai in enumerate(self.coeffs):
            if all(c == 0 for c in ai):
                continue
            for j in range(n + 1 - i):
                bj = other.coeffs[j]
                out[i + j] = _yp_add(out[i + j], _yp_mul(ai, bj))
        return BiSeries(out, self.order_y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        self._check(other)
        b0 = other.coeffs[0]
        if b0[0] == 0:
            raise NonInvertibleSeriesError(
                "non-invertible series: constant y-polynomial has zero constant term"
            )
        n = self.order_x
        out = []
        for k in range(n + 1):
            acc = self.coeffs[k]
            for j in range(1, k + 1):
                acc = _yp_add(acc, _yp_neg(_yp_mul(other.coeffs[j], out[k - j])))
            out.append(_yp_div(acc, b0))
        return BiSeries(out, self.order_y)

    def sqrt(self) -> "BiSeries":
        """Square root; the constant-in-x coefficient must be the square of a
        y-polynomial (e.g. (1-y)^2 for the boundary generating function)."""
        b0 = _yp_sqrt(self.coeffs[0])
        if b0[0] == 0:
            raise IrrationalConstantError(
                "irrational constant term: bivariate sqrt needs invertible root constant"
            )
        n = self.order_x
        out = [b0]
        for k in range(1, n + 1):
            acc = self.coeffs[k]
            for j in range(1, k):
                acc = _yp_add(acc, _yp_neg(_yp_mul(out[j], out[k - j])))
            out.append(_yp_div(acc, _yp_scale(b0, Q(2))))
        return BiSeries(out, self.order_y)

    # -- evaluation and reshaping -----------------------------------------

    def eval_y(self, y: Fraction) -> Series:
        """Substitute a rational constant for y; exact on the stored truncation."""
        y = _as_frac(y)
        out = []
        for row in self.coeffs:
            acc = Q(0)
            for c in reversed(row):
                acc = acc * y + c
            out.append(acc)
        return Series(out)

    def eval_y_one_exact(self) -> Series:
        """Substitute y = 1, asserting the top y-coefficients vanish so the
        truncation in y loses nothing."""
        for i, row in enumerate(self.coeffs):
            if row[-1] != 0:
                raise SeriesOrderError(
                    f"y-degree of x^{i} coefficient reaches the truncation; "
                    "evaluation at y=1 would be inexact"
                )
        return self.eval_y(Q(1))

    def y_row(self, j: int) -> Series:
        """The coefficient series of y^j, as a univariate series in x."""
        return Series([row[j] for row in self.coeffs])

    def substitute(self, x_sub: Series, y_factor: Series) -> "BiSeries":
        """Exact substitution x := x_sub(x'), y := y * y_factor(x').

        ``x_sub`` must vanish at 0.  The result keeps the same orders; the
        substitution is exact to those truncations.
        """
        if x_sub.coeffs[0] != 0:
            raise ValueError("x-substitution must have zero constant term")
        ox, oy = self.order_x, self.order_y
        if x_sub.order != ox or y_factor.order != ox:
            raise SeriesOrderError("substitution series must carry order_x")
        zero_row = _ypoly([0], oy)
        out = [zero_row] * (ox + 1)
        # powers of the substituted series
        xpow = [Series.constant(1, ox)]
        for _ in range(ox):
            xpow.append(xpow[-1] * x_sub)
        ypow = [Series.constant(1, ox)]
        for _ in range(oy):
            ypow.append(ypow[-1] * y_factor)
        for i, row in enumerate(self.coeffs):
            for j, c in enumerate(row):
                if c == 0:
                    continue
                prod = xpow[i] * ypow[j]
                for k in range(ox + 1):
                    if prod.coeffs[k] != 0:
                        r = list(out[k])
                        r[j] += c * prod.coeffs[k]
                        out[k] = tuple(r)
        return BiSeries(out, oy)


# ---------------------------------------------------------------------------
# closed-form expression DAG, for composition at series with nonzero constant
# ---------------------------------------------------------------------------


class _CFNode:
    __slots__ = ("name",)

    def __init__(self, name=None):
        self.name = name or type(self).__name__

    def _eval(self, arg):
        raise NotImplementedError


class CFConst(_CFNode):
    __slots__ = ("value",)

    def __init__(self, value, name=None):
        super().__init__(name)
        self.value = _as_frac(value)

    def _eval(self, arg):
        return Series.constant(self.value, arg.order)


class CFArg(_CFNode):
    def _eval(self, arg):
        return arg


class _CFBinary(_CFNode):
    __slots__ = ("left", "right")

    def __init__(self, left, right, name=None):
        super().__init__(name)
        self.left, self.right = left, right


class CFAdd(_CFBinary):
    def _eval(self, arg):
        return self.left._eval(arg) + self.right._eval(arg)


class CFSub(_CFBinary):
    def _eval(self, arg):
        return self.left._eval(arg) - self.right._eval(arg)


class CFMul(_CFBinary):
    def _eval(self, arg):
        return self.left._eval(arg) * self.right._eval(arg)


class CFDiv(_CFBinary):
    def _eval(self, arg):
        try:
            return self.left._eval(arg) / self.right._eval(arg)
        except NonInvertibleSeriesError as e:
            raise NonInvertibleSeriesError(f"{e} (at DAG node {self.name})") from None


class CFSqrt(_CFNode):
    __slots__ = ("child",)

    def __init__(self, child, name=None):
        super().__init__(name)
        self.child = child

    def _eval(self, arg):
        try:
            return self.child._eval(arg).sqrt()
        except IrrationalConstantError as e:
            raise IrrationalConstantError(f"{e} (at DAG node {self.name})") from None


def compose_closed(expr: _CFNode, arg: Series) -> Series:
    """Evaluate a closed-form DAG at a series argument.

    Composition with arg(0) != 0 is legal because evaluation goes through the
    closed form; every intermediate sqrt must have a perfect-square rational
    constant term at this argument.
    """
    return expr._eval(arg)
