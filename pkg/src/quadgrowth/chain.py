"""The critical branching process and the reversed growth chain.

Exact kernels and distributions for the process governing hull boundary
lengths: the inward branching transition [t^l] phi_n(t)^k, the stationary
h-transform (reversed) kernel, the law of the boundary half-length at radius
R, offspring splitting under a conditioned total, and the exact moment
computations used by the scaling checks.

Every distribution here is a ``Dist``: finitely many exact rational masses
plus an exact tail remainder.  The remainders are not estimates: row sums of
the reversed kernel and the total mass of the boundary law equal 1 exactly
(consequences of the Abel identity), so a truncated tail is 1 minus an exact
partial sum.

Convention: the boundary law adopts the extended-root form, masses[m] =
[t^m]F * [t] phi_{R+1}^m.  Sampling is reproducible: every operation draws
from an explicit ``numpy.random.Generator`` (PCG64 streams are spawnable, so
parallel Monte Carlo just spawns child seeds).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath as mp
import numpy as np

from . import genfun
from ._quadfield import QuadExt
from .series import Series, sqrt_fraction

Q = Fraction

TAIL_DEFAULT = Q(1, 2**40)


# ---------------------------------------------------------------------------
# exact finite distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dist:
    """Probability masses on 0..K with an exact bound on the truncated tail."""

    masses: tuple[Fraction, ...]
    tail_bound: Fraction

    def __post_init__(self):
        if any(m < 0 for m in self.masses) or self.tail_bound < 0:
            raise ValueError("negative mass")
        s = sum(self.masses)
        if not (s <= 1 <= s + self.tail_bound):
            raise ValueError(f"mass accounting violated: sum={s}, tail={self.tail_bound}")

    @property
    def k_max(self) -> int:
        return len(self.masses) - 1

    def total(self) -> Fraction:
        return sum(self.masses)

    def cumulative_float(self) -> list[float]:
        out, acc = [], 0.0
        for m in self.masses:
            acc += float(m)
            out.append(acc)
        return out

    def sample(self, rng: np.random.Generator, _cum=None) -> int:
        """Inverse-CDF draw; a draw landing in the truncated tail (probability
        at most tail_bound) is redrawn, i.e. the sample is conditioned on the
        stored support."""
        cum = self.cumulative_float() if _cum is None else _cum
        while True:
            u = rng.random()
            if u < cum[-1]:
                return bisect.bisect_right(cum, u)

    def mean_float(self) -> float:
        return sum(k * float(m) for k, m in enumerate(self.masses))


# ---------------------------------------------------------------------------
# phi powers and transition probabilities
# ---------------------------------------------------------------------------

_PHI_POW_CACHE: dict[tuple[int, int | None], list[Series]] = {}


def _phi_powers(order: int, k: int, cap: int | None = None) -> list[Series]:
    """Series of phi^j for j = 0..k at the given order; cap truncates the
    offspring law to degree <= cap (weights kept, not renormalized)."""
    key = (order, cap)
    pows = _PHI_POW_CACHE.setdefault(key, [Series.constant(1, order)])
    if len(pows) == 1:
        base = genfun.phi_series(order)
        if cap is not None:
            base = Series([c if i <= cap else Q(0) for i, c in enumerate(base.coeffs)])
        pows.append(base)
    while len(pows) <= k:
        pows.append(pows[-1] * pows[1])
    return pows


def xi_transition(k: int, l: int, n: int) -> Fraction:
    """P{xi_n = l | xi_0 = k} = [t^l] phi_n(t)^k, exactly."""
    if k < 1 or l < 0 or n < 1:
        raise ValueError("need k >= 1, l >= 0, n >= 1")
    if n == 1:
        return _phi_powers(l, k)[k][l]
    return (genfun.phi_iter(Q(n), l) ** k)[l]


def reversed_transition(l: int, k: int, n: int) -> Fraction:
    """Outward chain kernel ([t^k]F/[t^l]F) * P{xi_n = l | xi_0 = k}."""
    if l < 1 or k < 1:
        raise ValueError("need l, k >= 1")
    return genfun.f_coeff(k) / genfun.f_coeff(l) * xi_transition(k, l, n)


_OUTWARD_CACHE: dict[tuple[int, Fraction], Dist] = {}


def outward_dist(l: int, tail: Fraction = TAIL_DEFAULT, k_max_limit: int = 20000) -> Dist:
    """Exact one-step law of the outward chain from state l (n = 1 kernel).

    The support grows adaptively until the exact remainder 1 - sum drops
    below ``tail`` (the row sum is exactly 1 by the Abel identity).
    """
    key = (l, tail)
    if key in _OUTWARD_CACHE:
        return _OUTWARD_CACHE[key]
    Fl = genfun.f_coeff(l)
    masses = [Q(0)]
    partial = Q(0)
    k = 0
    while 1 - partial > tail:
        k += 1
        if k > k_max_limit:
            raise RuntimeError(
                f"outward tail still {1 - partial} > {tail} at k = {k_max_limit}"
            )
        mk = genfun.f_coeff(k) / Fl * _phi_powers(l, k)[k][l]
        masses.append(mk)
        partial += mk
    d = Dist(tuple(masses), 1 - partial)
    _OUTWARD_CACHE[key] = d
    return d


def sample_outward(l: int, rng: np.random.Generator) -> int:
    """Draw the next outward state from l (kernel rows are exact; draws are
    conditioned on the stored support, which misses < 2^-40 of mass)."""
    return outward_dist(l).sample(rng)


# ---------------------------------------------------------------------------
# boundary-length law
# ---------------------------------------------------------------------------


def gamma_dist(R: int, m_max: int) -> Dist:
    """Law of the hull boundary half-length at radius R.

    masses[m] = [t^m]F * [t] phi_{R+1}^m for 1 <= m <= m_max, exactly; the
    tail bound is the exact remainder (total mass is 1 by the mass identity).
    """
    if R < 0:
        raise ValueError("R must be non-negative")
    Rp = R + 1
    P = Rp * Rp + 3 * Rp
    Qd = P + 2
    genfun.s_coeffs(max(m_max, 1))
    base = Q(4 * (2 * Rp + 3), 3)
    masses = [Q(0)]
    ppow = Q(1)            # P^(m-1)
    qpow = Q(1, Qd * Qd)   # Q^-(m+1)
    partial = Q(0)
    for m in range(1, m_max + 1):
        mk = genfun.f_coeff(m) * base * m * ppow * qpow
        masses.append(mk)
        partial += mk
        ppow *= P
        qpow /= Qd
    return Dist(tuple(masses), 1 - partial)


def gamma_dist_auto(R: int, tail: Fraction = TAIL_DEFAULT, m_start: int = 64) -> Dist:
    """gamma_dist with the support extended until the exact tail is below ``tail``."""
    m = m_start
    while True:
        d = gamma_dist(R, m)
        if d.tail_bound < tail:
            return d
        m *= 2


@dataclass(frozen=True)
class ChainPath:
    """Outward trajectory of the boundary chain, levels 0..R+1 of the skeleton.

    values[0] = 1 is the extended root cycle; values[r] is the half-length of
    the cycle at level r, so values[-1] has the law gamma_dist(R).
    """

    values: tuple[int, ...]
    seed: int

    def __post_init__(self):
        if self.values[0] != 1 or any(v < 1 for v in self.values):
            raise ValueError("chain paths start at 1 and stay >= 1")


def sample_path(R: int, seed: int) -> ChainPath:
    """Outward chain from the extended root cycle: R+1 steps of the n=1 kernel."""
    rng = np.random.default_rng(seed)
    vals = [1]
    for _ in range(R + 1):
        vals.append(sample_outward(vals[-1], rng))
    return ChainPath(tuple(vals), seed)


# ---------------------------------------------------------------------------
# conditioned offspring splitting
# ---------------------------------------------------------------------------


def conditional_split(
    k: int,
    l: int,
    rng: np.random.Generator,
    outdeg_cap: int | None = None,
) -> list[int]:
    """Offspring numbers (l_1..l_k) of k particles conditioned on total l.

    Sequential conditioning: l_1 ~ p_{l_1} [t^{l-l_1}] phi^{k-1} / [t^l] phi^k
    and so on; the joint law is prod p_{l_i} / [t^l] phi^k.  With
    ``outdeg_cap``, the same conditioning is applied to the offspring law
    truncated at the cap (catalog-limited sampling mode).
    """
    if k < 1 or l < 0:
        raise ValueError("need k >= 1, l >= 0")
    pows = _phi_powers(l, k, cap=outdeg_cap)
    if pows[k][l] == 0:
        raise ValueError(f"impossible split: [t^{l}] phi^{k} = 0 under cap {outdeg_cap}")
    p = pows[1]
    out = []
    remaining = l
    for i in range(k - 1, 0, -1):
        denom = pows[i + 1][remaining]
        u = rng.random()
        acc = 0.0
        j_pick = remaining
        for j in range(remaining + 1):
            w = p[j] * pows[i][remaining - j] / denom
            acc += float(w)
            if u < acc:
                j_pick = j
                break
        out.append(j_pick)
        remaining -= j_pick
    out.append(remaining)
    if outdeg_cap is not None and out[-1] > outdeg_cap:
        # the last particle takes the remainder; the capped powers make this
        # state unreachable, so hitting it means a float rounding fluke
        raise RuntimeError("capped split overflowed; cumulative rounding bug")
    return out


# ---------------------------------------------------------------------------
# theta moments (linear separating cycle device)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaMoments:
    """Moments of the number of level-2R lines surviving to level R.

    Derived from E y^theta = y g F'(c + y d) with c = phi_R(0),
    d = phi_2R(0) - c, g = [t] phi_2R; all four fields are exact rationals
    and ``normalization`` equals 1 identically (mass identity).
    """

    R: int
    normalization: Fraction
    mean: Fraction
    second_factorial: Fraction
    second_raw: Fraction


def theta_moments(R: int) -> ThetaMoments:
    if R < 1:
        raise ValueError("R must be >= 1")
    c = genfun.phi_iter_at_zero(Q(R))
    u = genfun.phi_iter_at_zero(Q(2 * R))
    d = u - c
    g = genfun.coeff_t_phi_pow(Q(2 * R), 1)
    one_u, nine_u = 1 - u, 9 - u
    # (1-u)(9-u) is a perfect rational square at u = phi_2R(0), so the odd
    # half-powers below pair up and every moment stays in Q
    w = sqrt_fraction(one_u * nine_u)
    Fp = 3 / (one_u * w)
    Fpp = Q(9, 2) / (one_u**2 * w) + Q(3, 2) / w**3
    Fppp = (
        Q(45, 4) / (one_u**3 * w)
        + Q(9, 2) / (one_u * w**3)
        + Q(9, 4) / (nine_u * w**3)
    )
    mean = g * (Fp + d * Fpp)
    fac = 2 * g * d * Fpp + g * d * d * Fppp
    return ThetaMoments(
        R=R,
        normalization=g * Fp,
        mean=mean,
        second_factorial=fac,
        second_raw=fac + mean,
    )


def theta_gf(R: int, y: float) -> float:
    """E y^theta_R = y g F'(c + y d), in floats (the exact moments above are
    the source of truth; this is for report tables)."""
    c = float(genfun.phi_iter_at_zero(Q(R)))
    u = float(genfun.phi_iter_at_zero(Q(2 * R)))
    g = float(genfun.coeff_t_phi_pow(Q(2 * R), 1))
    z = c + y * (u - c)
    return y * g * 3.0 * (1 - z) ** -1.5 * (9 - z) ** -0.5


# ---------------------------------------------------------------------------
# one-step moments of the outward chain (tightness surrogates)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EximMoments:
    """Exact one-step moments of the outward chain from state m.

    mean_shift = E(xi-hat_1 - m | m), second_central = E((xi-hat_1 - m)^2 | m).
    Computed from [t^m]{phi F'(phi)} and [t^m]{phi F'(phi) + phi^2 F''(phi)}
    over [t^m]F; these closed forms equal the full kernel sums (no truncated
    tail at all), using s(phi(t)) = s(t) + 2 from the Abel equation.
    """

    m: int
    mean: Fraction
    mean_shift: Fraction
    second_central: Fraction


def _exim_elements() -> tuple[QuadExt, QuadExt]:
    s = QuadExt.s()
    phi = 1 - 8 / ((s + 2) * (s + 2) - 1)
    sphi = s + 2
    one_m = 1 - phi
    nine_m = 9 - phi
    Fp_phi = 3 * sphi / (one_m * nine_m)
    Fpp_phi = 6 * (7 - phi) * sphi / (one_m * one_m * nine_m * nine_m)
    mean_el = phi * Fp_phi
    sec_el = mean_el + phi * phi * Fpp_phi
    return mean_el, sec_el


_EXIM_ELEMENTS: tuple[QuadExt, QuadExt] | None = None


def exim_moments(m: int) -> EximMoments:
    global _EXIM_ELEMENTS
    if m < 1:
        raise ValueError("m must be >= 1")
    if _EXIM_ELEMENTS is None:
        _EXIM_ELEMENTS = _exim_elements()
    mean_el, sec_el = _EXIM_ELEMENTS
    sc = genfun.s_coeffs(m + 8)
    Fm = genfun.f_coeff(m)
    mean = mean_el.coefficient(m, sc) / Fm
    esq = sec_el.coefficient(m, sc) / Fm
    return EximMoments(
        m=m,
        mean=mean,
        mean_shift=mean - m,
        second_central=esq - 2 * m * mean + m * m,
    )


# ---------------------------------------------------------------------------
# chi-square goodness of fit (shared by the sampler test suites)
# ---------------------------------------------------------------------------


def chi_square_pvalue(
    observed: Sequence[int],
    expected_probs: Sequence[float],
    n_samples: int,
    min_expected: float = 5.0,
) -> float:
    """Pearson chi-square p-value, pooling bins with small expectation.

    ``observed`` and ``expected_probs`` are aligned by index; anything not
    covered (including mass beyond the listed bins) is pooled into one
    remainder bin.
    """
    obs_rem = n_samples - sum(observed)
    p_rem = max(0.0, 1.0 - sum(expected_probs))
    bins: list[tuple[float, float]] = []
    pool_o, pool_e = float(obs_rem), p_rem * n_samples
    for o, p in zip(observed, expected_probs):
        e = p * n_samples
        if e >= min_expected:
            bins.append((float(o), e))
        else:
            pool_o += o
            pool_e += e
    if pool_e > 0:
        bins.append((pool_o, pool_e))
    if len(bins) < 2:
        raise ValueError("not enough bins for a chi-square test")
    stat = sum((o - e) ** 2 / e for o, e in bins)
    dof = len(bins) - 1
    return float(mp.gammainc(dof / 2, a=stat / 2, regularized=True))
