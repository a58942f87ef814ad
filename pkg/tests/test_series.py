import random
from fractions import Fraction as Q

import pytest

from quadgrowth.series import (
    BiSeries,
    CFAdd,
    CFArg,
    CFConst,
    CFDiv,
    CFMul,
    CFSqrt,
    CFSub,
    IrrationalConstantError,
    NonInvertibleSeriesError,
    Series,
    SeriesOrderError,
    compose_closed,
    sqrt_fraction,
)


def poly(*cs):
    return Series(list(cs))


def test_difference_of_squares():
    one_plus = Series.from_poly([1, 1], 2)
    one_minus = Series.from_poly([1, -1], 2)
    assert one_plus * one_minus == Series.from_poly([1, 0, -1], 2)


def test_geometric_series():
    one = Series.constant(1, 3)
    denom = Series.from_poly([1, -1], 3)
    assert one / denom == Series([1, 1, 1, 1])


def test_order_mixing_is_an_error():
    with pytest.raises(SeriesOrderError):
        Series.constant(1, 3) + Series.constant(1, 4)


def test_division_by_noninvertible():
    with pytest.raises(NonInvertibleSeriesError):
        Series.constant(1, 2) / Series.identity(2)


def test_mul_div_roundtrip_randomized():
    rnd = random.Random(20240817)
    for _ in range(200):
        n = rnd.randint(1, 8)
        a = Series([Q(rnd.randint(-9, 9), rnd.randint(1, 9)) for _ in range(n + 1)])
        b = Series(
            [Q(rnd.choice([x for x in range(-9, 10) if x]), rnd.randint(1, 9))]
            + [Q(rnd.randint(-9, 9), rnd.randint(1, 9)) for _ in range(n)]
        )
        assert (a * b) / b == a


def test_sqrt_of_one_minus_12x():
    s = Series.from_poly([1, -12], 3).sqrt()
    assert s == Series([1, -6, -18, -108])


def test_sqrt_phi_radicand():
    # radicand (9-t)(1-t)^3 = 9 - 28t + 30t^2 - 12t^3 + t^4
    r = Series.from_poly([9, -28, 30, -12, 1], 2).sqrt()
    assert r == Series([3, Q(-14, 3), Q(37, 27)])


def test_sqrt_identity():
    assert Series.constant(1, 5).sqrt() == Series.constant(1, 5)


def test_sqrt_squares_back_randomized():
    rnd = random.Random(7)
    for _ in range(200):
        n = rnd.randint(1, 8)
        c0 = Q(rnd.randint(1, 12)) ** 2 / Q(rnd.randint(1, 6)) ** 2
        a = Series([c0] + [Q(rnd.randint(-9, 9), rnd.randint(1, 9)) for _ in range(n)])
        r = a.sqrt()
        assert r * r == a


def test_sqrt_rejects_non_square_constant():
    with pytest.raises(IrrationalConstantError):
        Series.from_poly([2, 1], 3).sqrt()


def test_sqrt_fraction():
    assert sqrt_fraction(Q(25)) == 5
    assert sqrt_fraction(Q(9, 4)) == Q(3, 2)
    with pytest.raises(IrrationalConstantError):
        sqrt_fraction(Q(2))


def test_pow_and_compose():
    t = Series.identity(5)
    f = (1 + t) ** 3
    assert f == Series([1, 3, 3, 1, 0, 0])
    g = t + t * t
    comp = f.compose(g)
    brute = (1 + g) * (1 + g) * (1 + g)
    assert comp == brute


def test_reversion_roundtrip():
    t = Series.identity(8)
    f = t + 3 * t * t + t ** 3
    g = f.reversion()
    assert g.compose(f) == t
    assert f.compose(g) == t


def test_derivative():
    assert poly(1, 2, 3, 4).derivative() == poly(2, 6, 12)


# ---------------------------------------------------------------------------
# closed-form DAG
# ---------------------------------------------------------------------------


def F_closed():
    # (3/4) * (sqrt((9 - a)/(1 - a)) - 3)
    a = CFArg()
    root = CFSqrt(CFDiv(CFSub(CFConst(9), a), CFSub(CFConst(1), a), name="ratio"), name="root")
    return CFMul(CFConst(Q(3, 4)), CFSub(root, CFConst(3)))


def test_cf_identity():
    t = Series.identity(6)
    assert compose_closed(CFArg(), t) == t


def test_cf_F_at_t():
    f = compose_closed(F_closed(), Series.identity(4))
    assert f[0] == 0
    assert f[1] == 1
    assert f[2] == Q(7, 9)


def test_cf_F_at_constant_two_thirds():
    # F(2/3) = (3/4) (sqrt(25) - 3) = 3/2
    f = compose_closed(F_closed(), Series.constant(Q(2, 3), 3))
    assert f[0] == Q(3, 2)
    assert all(c == 0 for c in f.coeffs[1:])


def test_cf_error_names_node():
    expr = CFSqrt(CFArg(), name="badroot")
    with pytest.raises(IrrationalConstantError) as ei:
        compose_closed(expr, Series.constant(2, 3))
    assert "badroot" in str(ei.value)
    with pytest.raises(NonInvertibleSeriesError) as ei:
        compose_closed(CFDiv(CFConst(1), CFArg(), name="baddiv"), Series.identity(3))
    assert "baddiv" in str(ei.value)


def test_cf_add():
    t = Series.identity(3)
    assert compose_closed(CFAdd(CFArg(), CFConst(1)), t) == t + 1


# ---------------------------------------------------------------------------
# BiSeries
# ---------------------------------------------------------------------------


def test_biseries_mul_matches_eval():
    # commutation with y := const is exact when the product's y-degree fits
    # inside the truncation, so factors carry y-degree at most order_y // 2
    rnd = random.Random(99)
    for _ in range(100):
        ox, oy = rnd.randint(1, 4), rnd.randint(2, 6)
        deg = oy // 2
        mk = lambda: BiSeries(
            [
                [Q(rnd.randint(-5, 5)) for _ in range(deg + 1)]
                for _ in range(ox + 1)
            ],
            oy,
        )
        a, b = mk(), mk()
        y0 = Q(rnd.randint(-3, 3), rnd.randint(1, 4))
        lhs = (a * b).eval_y(y0)
        rhs = a.eval_y(y0) * b.eval_y(y0)
        assert lhs == rhs


def test_biseries_div_roundtrip():
    a = BiSeries([[1, 2], [3, 4], [5, 6]], 1)
    b = BiSeries([[2, 1], [0, 1], [1, 0]], 1)
    assert (a * b) / b == a


def test_biseries_sqrt_one_minus_y_squared():
    ox, oy = 3, 3
    one = BiSeries.constant(1, ox, oy)
    y = BiSeries.var_y(ox, oy)
    sq = (one - y) * (one - y)
    r = sq.sqrt()
    assert r == one - y


def test_biseries_div_noninvertible():
    with pytest.raises(NonInvertibleSeriesError):
        BiSeries.constant(1, 2, 2) / BiSeries.var_x(2, 2)


def test_biseries_substitute_simple():
    # W(x, y) = x * y; substitute x := x^2, y := y * (1+x)
    ox, oy = 4, 2
    w = BiSeries.var_x(ox, oy) * BiSeries.var_y(ox, oy)
    xs = Series.identity(ox) * Series.identity(ox)
    yf = Series.from_poly([1, 1], ox)
    out = w.substitute(xs, yf)
    # x^2 (1 + x) y = x^2 y + x^3 y
    assert out.coeff(2, 1) == 1
    assert out.coeff(3, 1) == 1
    assert out.coeff(2, 0) == 0
    assert out.coeff(4, 1) == 0
