"""Generating functions for quadrangulation counting and hull growth.

Everything exact lives over Q: the face-counting series q(x), the bivariate
boundary series U(x, y), the singular-expansion coefficients A, A1, B/b(1),
the offspring generating function phi(t) with its closed-form iterates, and
the stationary-measure series F(t).  Floats appear only in the asymptotic
evaluators, never as a source of truth.

Conventions fixed here and relied on downstream:
  * x0 = 1/12 (critical face weight), y0 = 2 (boundary normalization);
  * the square-root branches are pinned by q(0)=1, U(0,y)=0, phi(0)=2/3,
    F(0)=0;
  * irrational constants never enter series arithmetic: b(1) = 16*sqrt(3)/3
    is carried as its square 768/9, and every exposed exact quantity is a
    ratio b(m)/b(1).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .series import (
    BiSeries,
    CFAdd,
    CFArg,
    CFConst,
    CFDiv,
    CFMul,
    CFSqrt,
    CFSub,
    Series,
    compose_closed,
)

Q = Fraction

X0 = Q(1, 12)
Y0 = Q(2)

# b(1) = 16*sqrt(3)/3, stored squared to stay rational
B1_SQUARED = Q(768, 9)


class OrderShortfallError(ValueError):
    """A precomputed series is too short; carries the required order."""

    def __init__(self, what: str, have: int, need: int):
        self.required_order = need
        super().__init__(f"{what} needs order {need}, only {have} available")


# ---------------------------------------------------------------------------
# primitive series
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def s_coeffs(order: int) -> tuple[Fraction, ...]:
    """Coefficients of s(t) = sqrt((9-t)/(1-t)).

    s solves (9-t)(1-t) s' = 4 s, giving the three-term recurrence
    9(k+1) c_{k+1} = (10k+4) c_k - (k-1) c_{k-1}; denominators stay powers
    of 3, so this is fast enough for orders in the thousands.
    """
    c = [Q(3), Q(4, 3)]
    for k in range(1, order):
        c.append(((10 * k + 4) * c[k] - (k - 1) * c[k - 1]) / (9 * (k + 1)))
    return tuple(c[: order + 1])


def s_series(order: int) -> Series:
    return Series(s_coeffs(order))


@lru_cache(maxsize=None)
def q_series(order: int) -> Series:
    """q(x) = (4/3)(2 sqrt(1-12x) + 1)/(sqrt(1-12x) + 1)^2 = sum C(N) x^N."""
    s = Series.from_poly([1, -12], order).sqrt()
    return Q(4, 3) * (2 * s + 1) / ((s + 1) * (s + 1))


def count_C(N: int, order: int | None = None) -> int:
    """Number of rooted quadrangulations with N faces."""
    if N < 0:
        raise ValueError("N must be non-negative")
    if order is not None and N > order:
        raise OrderShortfallError("count_C", order, N)
    c = q_series(N if order is None else order)[N]
    if c.denominator != 1 or c < 0:
        raise AssertionError(f"C({N}) not a non-negative integer: {c}")
    return int(c)


@lru_cache(maxsize=None)
def U_series(order_x: int, order_y: int) -> BiSeries:
    """U(x,y) = sum C(N,m) x^N y^m, boundary quadrangulation counts."""
    if order_x < 1 or order_y < 1:
        raise ValueError("orders must be at least 1")
    q = q_series(order_x)
    qb = BiSeries([[c] for c in q.coeffs], order_y)
    x = BiSeries.var_x(order_x, order_y)
    y = BiSeries.var_y(order_x, order_y)
    rad = y * y - 2 * (x * y * y * y) - 2 * y + 4 * (x * y * qb) + (x * y * y - 1) * (x * y * y - 1)
    return Q(1, 2) * (y - x * y * y - 1 + rad.sqrt())


def count_C2(N: int, m: int, orders: tuple[int, int] | None = None) -> int:
    """C(N, m): rooted quadrangulations, N faces, simple boundary 2m."""
    if N < 0 or m < 0:
        raise ValueError("N and m must be non-negative")
    if orders is not None and (N > orders[0] or m > orders[1]):
        raise OrderShortfallError("count_C2", min(orders), max(N, m))
    ox, oy = orders if orders is not None else (max(N, 1), max(m, 1))
    c = U_series(ox, oy).coeff(N, m)
    if c.denominator != 1 or c < 0:
        raise AssertionError(f"C({N},{m}) not a non-negative integer: {c}")
    return int(c)


# ---------------------------------------------------------------------------
# expansion at the singularity x0
# ---------------------------------------------------------------------------


def _sqrt_18_2_pow(order_y: int, cube: bool) -> Series:
    """sqrt((1-y/18)(1-y/2)^p) for p = 3 (cube) or p = 1, exact in y."""
    a = Series.from_poly([1, Q(-1, 18)], order_y)
    b = Series.from_poly([1, Q(-1, 2)], order_y)
    rad = a * b * b * b if cube else a * b
    return rad.sqrt()


@dataclass(frozen=True)
class ExpansionCoeffs:
    """Coefficients of U(x0 - t, y) = A(y) + A1(y) t + B(y) t^{3/2} + O(t^2).

    B is stored as B(y)/b(1), whose coefficients are rational (the sqrt(3)
    and the sqrt(144) = 12 prefactor cancel); b1_squared = (16 sqrt(3)/3)^2.
    """

    A: Series
    A1: Series
    B_over_b1: Series
    b1_squared: Fraction = B1_SQUARED


@lru_cache(maxsize=None)
def expansion_coeffs(order_y: int) -> ExpansionCoeffs:
    y = Series.identity(order_y)
    # A(y) = (1/24) sqrt((y-18)(y-2)^3) - 1/2 + y/2 - y^2/24, and
    # (y-18)(y-2)^3 = 144 (1-y/18)(1-y/2)^3
    root3 = _sqrt_18_2_pow(order_y, cube=True)
    A = Q(1, 2) * root3 - Q(1, 2) + Q(1, 2) * y - Q(1, 24) * y * y
    # A1(y) = y^2/2 + (y/2)(y^2 - 10y - 32)/sqrt((18-y)(2-y)), sqrt = 6*root1
    root1 = _sqrt_18_2_pow(order_y, cube=False)
    A1 = Q(1, 2) * y * y + (Q(1, 2) * y * Series.from_poly([-32, -10, 1], order_y)) / (6 * root1)
    # B(y)/b(1) = y / sqrt((1-y/18)(1-y/2)^3)
    B_over_b1 = y / root3
    return ExpansionCoeffs(A=A, A1=A1, B_over_b1=B_over_b1)


def b_ratio(m: int, order_y: int | None = None) -> Fraction:
    """b(m)/b(1), exactly."""
    if m < 1:
        raise ValueError("b(0) = 0: b_ratio needs m >= 1")
    oy = m if order_y is None else order_y
    if m > oy:
        raise OrderShortfallError("b_ratio", oy, m)
    return expansion_coeffs(oy).B_over_b1[m]


@lru_cache(maxsize=None)
def boundary_weight_series(order_y: int) -> Series:
    """S(y) = B(y)/(b(1) y) = 1/sqrt((1-y/18)(1-y/2)^3); F'(t) = S(2t)."""
    return 1 / _sqrt_18_2_pow(order_y, cube=True)


# ---------------------------------------------------------------------------
# asymptotics (floats only here)
# ---------------------------------------------------------------------------

# Transfer theorem applied to B(y) (x0 - x)^{3/2}:
#   C(N, m) ~ b(m) x0^{3/2} * (3/(4 sqrt(pi))) * N^{-5/2} x0^{-N},
# and b(1) x0^{3/2} = (16 sqrt(3)/3) / (24 sqrt(3)) = 2/9, so the m-dependence
# enters only through the rational ratio b(m)/b(1).


def asympt_CNm(N: int, m: int) -> float:
    """Leading asymptotic of C(N, m) for large N, in double precision."""
    if N < 1 or m < 1:
        raise ValueError("asympt_CNm needs N >= 1, m >= 1")
    if N > 270:
        raise OverflowError(
            "x0^-N exceeds float range; use log_asympt_CNm for large N"
        )
    const = float(b_ratio(m)) * (2.0 / 9.0) * 3.0 / (4.0 * math.sqrt(math.pi))
    return const * N ** (-2.5) * 12.0 ** N


def log_asympt_CNm(N: int, m: int) -> float:
    """Natural log of asympt_CNm, safe for any N."""
    if N < 1 or m < 1:
        raise ValueError("log_asympt_CNm needs N >= 1, m >= 1")
    return (
        math.log(float(b_ratio(m)))
        + math.log(2.0 / 9.0)
        + math.log(3.0 / (4.0 * math.sqrt(math.pi)))
        - 2.5 * math.log(N)
        + N * math.log(12.0)
    )


# ---------------------------------------------------------------------------
# limiting and finite-N neighbourhood probabilities
# ---------------------------------------------------------------------------


def mu_hull_prob(n: int, m: int) -> Fraction:
    """Limit probability (up to the b(m)/b(1) unit already folded in) that the
    hull equals a fixed map with n faces and simple boundary 2m:
    b_ratio(m) * x0^(n-m+1), exact."""
    if m < 1 or n < m:
        raise ValueError("need n >= m >= 1 (a hull with boundary 2m has at least m faces)")
    return b_ratio(m) * X0 ** (n - m + 1)


def finite_ball_prob(
    n: int,
    holes: Sequence[int],
    N: int,
    max_order_x: int | None = None,
) -> Fraction:
    """Exact P{ball of a uniform N-face quadrangulation equals a fixed map K}.

    K has n faces and holes of half-lengths m_j; the probability is
    (1/C(N)) * sum over fillings prod_j C(N_j + m_j, m_j) with sum N_j = N-n,
    evaluated by exact convolution.
    """
    if N < n:
        raise ValueError("N must be at least the face count n")
    if any(m < 1 for m in holes):
        raise ValueError(f"hole half-lengths must be >= 1: {list(holes)}")
    budget = N - n
    if not holes:
        return Q(1, count_C(N)) if budget == 0 else Q(0)
    need_x = budget + max(holes)
    if max_order_x is not None and need_x > max_order_x:
        raise OrderShortfallError("finite_ball_prob", max_order_x, need_x)
    U = U_series(need_x, max(holes))
    total = [Q(1)] + [Q(0)] * budget
    for m in holes:
        g = [U.coeff(Nj + m, m) for Nj in range(budget + 1)]
        new = [Q(0)] * (budget + 1)
        for i, ti in enumerate(total):
            if ti == 0:
                continue
            for j in range(budget + 1 - i):
                if g[j] != 0:
                    new[i + j] += ti * g[j]
        total = new
    return total[budget] / count_C(N)


# ---------------------------------------------------------------------------
# branching-process generating functions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def phi_series(order: int) -> Series:
    """Offspring generating function phi(t), exact series."""
    return phi_iter(Q(1), order)


@lru_cache(maxsize=None)
def F_series(order: int) -> Series:
    """Stationary-measure generating function F(t) = (3/4)(sqrt((9-t)/(1-t)) - 3)."""
    return Q(3, 4) * (s_series(order) - 3)


def f_coeff(m: int) -> Fraction:
    """[t^m] F(t), exactly."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        return Q(0)
    return Q(3, 4) * s_coeffs(m)[m]


def offspring_p(k: int, order: int | None = None) -> Fraction:
    """p_k = [t^k] phi(t), exactly."""
    if k < 0:
        raise ValueError("k must be non-negative")
    o = k if order is None else order
    if k > o:
        raise OrderShortfallError("offspring_p", o, k)
    return phi_series(max(o, 1))[k]


@lru_cache(maxsize=None)
def phi_iter(R: Fraction, order: int) -> Series:
    """Closed-form iterate phi_R(t) = 1 - 8/((sqrt((9-t)/(1-t)) + 2R)^2 - 1).

    Rational R keeps the coefficients rational; for integer R this equals the
    R-fold composition of phi, and phi_0 is the identity.
    """
    R = Q(R)
    if R < 0:
        raise ValueError("R must be non-negative")
    s = s_series(order)
    den = (s + 2 * R) * (s + 2 * R) - 1
    return 1 - 8 / den


def phi_iter_at_zero(R: Fraction) -> Fraction:
    """phi_R(0) = 1 - 2/((R+1)(R+2)), the R-step extinction probability."""
    R = Q(R)
    return 1 - Q(2) / ((R + 1) * (R + 2))


def coeff_t_phi_pow(R: Fraction, m: int) -> Fraction:
    """[t] phi_R^m(t) = (4/3) m (2R+3) (R^2+3R)^(m-1) / (R^2+3R+2)^(m+1).

    Exact closed form; the R = 0, m = 1 case uses the 0^0 = 1 convention.
    """
    R = Q(R)
    if m < 1:
        return Q(0)
    P = R * R + 3 * R
    Qq = P + 2
    return Q(4, 3) * m * (2 * R + 3) * P ** (m - 1) / Qq ** (m + 1)


# F as a closed-form DAG, reusable for composition at arbitrary series
def F_closed_form():
    a = CFArg()
    ratio = CFDiv(CFSub(CFConst(9), a), CFSub(CFConst(1), a), name="(9-t)/(1-t)")
    return CFMul(CFConst(Q(3, 4)), CFSub(CFSqrt(ratio, name="sqrt((9-t)/(1-t))"), CFConst(3)))


def phi_closed_form():
    # 1 - 8/((sqrt((9-t)/(1-t)) + 2)^2 - 1), as a DAG for composition
    a = CFArg()
    ratio = CFDiv(CFSub(CFConst(9), a), CFSub(CFConst(1), a), name="(9-t)/(1-t)")
    s = CFSqrt(ratio, name="sqrt((9-t)/(1-t))")
    splus = CFAdd(s, CFConst(2))
    den = CFSub(CFMul(splus, splus), CFConst(1), name="(s+2)^2-1")
    return CFSub(CFConst(1), CFDiv(CFConst(8), den, name="8/((s+2)^2-1)"))


def compose_F(arg: Series) -> Series:
    """F evaluated at a series argument through the closed form."""
    return compose_closed(F_closed_form(), arg)


def compose_phi(arg: Series) -> Series:
    """phi evaluated at a series argument through the closed form."""
    return compose_closed(phi_closed_form(), arg)


def mass_identity_coeff(R: int, order: int = 4) -> Fraction:
    """[t] F(phi_R(t)); equals 1 exactly for every R >= 0."""
    return compose_F(phi_iter(Q(R), order))[1]


# ---------------------------------------------------------------------------
# catalog and identity verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenFunCatalog:
    """All paper-level generating functions at configured truncation orders."""

    q: Series
    U: BiSeries
    phi: Series
    F: Series

    @classmethod
    def build(cls, order_x: int = 64, order_t: int = 64, order_y: int = 32) -> "GenFunCatalog":
        return cls(
            q=q_series(order_x),
            U=U_series(order_x, order_y),
            phi=phi_series(order_t),
            F=F_series(order_t),
        )


@dataclass
class IdentityCheck:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class IdentityReport:
    checks: list[IdentityCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(IdentityCheck(name, ok, detail))

    def first_failure(self) -> IdentityCheck | None:
        return next((c for c in self.checks if not c.ok), None)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            mark = "PASS" if c.ok else "FAIL"
            extra = f"  [{c.detail}]" if c.detail and not c.ok else ""
            lines.append(f"{mark}  {c.name}{extra}")
        return "\n".join(lines)


def _first_diff(a: Series, b: Series) -> str:
    for k, (x, y) in enumerate(zip(a.coeffs, b.coeffs)):
        if x != y:
            return f"first offending coefficient t^{k}: {x} != {y}"
    return ""


def _first_diff_bi(a: BiSeries, b: BiSeries) -> str:
    for i, (ra, rb) in enumerate(zip(a.coeffs, b.coeffs)):
        for j, (x, y) in enumerate(zip(ra, rb)):
            if x != y:
                return f"first offending coefficient x^{i} y^{j}: {x} != {y}"
    return ""


def _truncate_bi(b: BiSeries, ox: int, oy: int) -> BiSeries:
    return BiSeries([row[: oy + 1] for row in b.coeffs[: ox + 1]], oy)


def substitution_series(order_x: int, order_y: int) -> BiSeries:
    """The no-double-edge series u(x, y) recovered from U by inverting the
    extension substitution u(q^2 x, y/q) = U(x, y) - x y q."""
    q = q_series(order_x)
    X_of_x = Series.identity(order_x) * q * q
    x_of_X = X_of_x.reversion()
    h = q.compose(x_of_X)  # q(x(X))
    U = U_series(order_x, order_y)
    qb = BiSeries([[c] for c in q.coeffs], order_y)
    W = U - BiSeries.var_x(order_x, order_y) * BiSeries.var_y(order_x, order_y) * qb
    return W.substitute(x_of_X, h)


def _divide_xy(b: BiSeries) -> BiSeries:
    """Divide a BiSeries by the monomial x*y (every term must carry x y)."""
    ox, oy = b.order_x, b.order_y
    if any(c != 0 for c in b.coeffs[0]) or any(row[0] != 0 for row in b.coeffs):
        raise ValueError("series is not divisible by x*y")
    return BiSeries([row[1:] for row in b.coeffs[1:]], oy - 1)


def verify_identities(
    order_abel: int = 30,
    orders_quad: tuple[int, int] = (10, 10),
    order_sub: int = 8,
    order_yu: int = 10,
    order_flink: int = 20,
    mass_R: int = 20,
) -> IdentityReport:
    """Exact identity suite; every check is a coefficientwise equality over Q."""
    rep = IdentityReport()

    # (i) Abel equation F(phi(t)) - 3/2 = F(t)
    F = F_series(order_abel)
    Fphi = compose_F(phi_series(order_abel))
    rep.add(
        "abel: F(phi(t)) - 3/2 = F(t), order %d" % order_abel,
        Fphi - Q(3, 2) == F,
        _first_diff(Fphi - Q(3, 2), F),
    )
    rep.add("abel constant: F(phi(0)) = 3/2", Fphi[0] - F[0] == Q(3, 2))

    # (ii) quadratic equation for U
    ox, oy = orders_quad
    U = U_series(ox, oy)
    x = BiSeries.var_x(ox, oy)
    y = BiSeries.var_y(ox, oy)
    qb = BiSeries([[c] for c in q_series(ox).coeffs], oy)
    lhs = 2 * U - (y - x * y * y - 1)
    lhs = lhs * lhs
    rhs = y * y - 2 * (x * y * y * y) - 2 * y + 4 * (x * y * qb) + (x * y * y - 1) * (x * y * y - 1)
    rep.add(
        f"quadratic for U, orders {orders_quad}",
        lhs == rhs,
        _first_diff_bi(lhs, rhs),
    )

    # (iii) substitution chain: recover u and check both functional equations
    oyu = order_sub + 2
    u = substitution_series(order_sub, oyu)
    xb = BiSeries.var_x(order_sub, oyu)
    yb = BiSeries.var_y(order_sub, oyu)
    xy = xb * yb
    v = _divide_xy(u + xy)  # (u + xy)/(xy), constant term 1
    ox2, oy2 = order_sub - 1, oyu - 1
    lhs3 = _truncate_bi(1 - xy, ox2, oy2) - 1 / v
    u_at_1 = u.eval_y_one_exact()
    u1b = BiSeries([[c] for c in u_at_1.coeffs], oyu)
    rhs3_num = yb * u1b - u
    one_minus_y = BiSeries([[1, -1]] + [[0]] * order_sub, oyu)
    rhs3 = _truncate_bi(rhs3_num / one_minus_y, ox2, oy2)
    rep.add(
        f"root decomposition: 1 - xy - xy/(u+xy) = (y u(x,1) - u(x,y))/(1-y), order {order_sub}",
        lhs3 == rhs3,
        _first_diff_bi(lhs3, rhs3),
    )
    q = q_series(order_sub)
    X_of_x = Series.identity(order_sub) * q * q
    closure = u_at_1.compose(X_of_x) + 2 * Series.identity(order_sub) * q * q + 1
    rep.add(
        f"closure: u(q^2 x, 1) + 2x q^2 + 1 = q, order {order_sub}",
        closure == q,
        _first_diff(closure, q),
    )

    # boundary row: [y] U(x, y) = x q(x)
    Urow = U_series(order_yu, 1).y_row(1)
    xq = Series.identity(order_yu) * q_series(order_yu)
    rep.add(f"[y] U = x q, order {order_yu}", Urow == xq, _first_diff(Urow, xq))

    # F'(t) = S(2t) with S(y) = B(y)/(b(1) y)
    Fp = F_series(order_flink + 1).derivative()
    S = boundary_weight_series(order_flink)
    S2t = Series([S[k] * Q(2) ** k for k in range(order_flink + 1)])
    rep.add(f"F' = S(2t), order {order_flink}", Fp == S2t, _first_diff(Fp, S2t))

    # mass identity [t] F(phi_R(t)) = 1
    bad = [R for R in range(1, mass_R + 1) if mass_identity_coeff(R) != 1]
    rep.add(
        f"mass identity [t] F(phi_R) = 1, R = 1..{mass_R}",
        not bad,
        f"fails at R = {bad}" if bad else "",
    )
    return rep


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def write_coeff_csv(fh, rows: Iterable[tuple]) -> None:
    """Rows of (index..., Fraction) become (index..., numerator, denominator, float)."""
    w = csv.writer(fh)
    for row in rows:
        *idx, val = row
        val = Q(val)
        w.writerow([*idx, val.numerator, val.denominator, float(val)])
