"""Certified truncation-tail bounds used by the series and field layers.

All bounds derive from the crude counting facts c_n(x) <= (2d)^n and
c_n(x) = 0 for n < |x|_1, so a truncated sum of nonnegative
walk-generated coefficients misses at most a computable geometric
quantity.  Everything here returns a rigorous upper bound (possibly
infinity), never an estimate.
"""

import math
from functools import lru_cache


@lru_cache(maxsize=None)
def l1_shell_count(d: int, m: int) -> int:
    """Number of sites of Z^d with |x|_1 = m."""
    if m == 0:
        return 1
    return sum(2 ** k * math.comb(d, k) * math.comb(m - 1, k - 1)
               for k in range(1, min(d, m) + 1))


@lru_cache(maxsize=None)
def l1_ball_count(d: int, m: int) -> int:
    """Number of sites of Z^d with |x|_1 <= m."""
    if m < 0:
        return 0
    return l1_ball_count(d, m - 1) + l1_shell_count(d, m)


def geometric_tail(t: float, order: int) -> float:
    """sum_{n > order} t^n for 0 <= t; infinity when t >= 1."""
    if t < 0:
        raise ValueError("tail base must be >= 0")
    if t >= 1.0:
        return math.inf
    return t ** (order + 1) / (1.0 - t)


def geometric_weighted_tail(t: float, order: int) -> float:
    """sum_{n > order} n t^n, closed form; infinity when t >= 1."""
    if t >= 1.0:
        return math.inf
    m = order
    return t ** (m + 1) * ((m + 1) - m * t) / (1.0 - t) ** 2


def ball_weighted_tail(d: int, t: float, order: int) -> float:
    """Upper bound on sum_{n > order} (number of sites with |x|_1 <= n) t^n.

    Bounds the l1 mass of the part of a two-point function lost to
    truncation at the given order.  Sums terms until the remainder is
    dominated by a convergent geometric series via the crude ball bound
    (2n+1)^d.
    """
    if t >= 1.0:
        return math.inf
    if t == 0.0:
        return 0.0
    total = 0.0
    n = order + 1
    while True:
        term = l1_ball_count(d, n) * t ** n
        total += term
        # ratio of successive crude terms: t * ((2n+3)/(2n+1))^d
        ratio = t * ((2 * n + 3) / (2 * n + 1)) ** d
        if ratio < 1.0 and term / (1.0 - ratio) < 1e-18 * max(total, 1e-300) + 1e-300:
            total += term * ratio / (1.0 - ratio)
            return total
        if ratio < 1.0 and n > order + 10_000:
            return total + term * ratio / (1.0 - ratio)
        n += 1


def copy_sum_tail(d: int, r: int, two_d_z: float, u_max: int) -> float:
    """Upper bound on sum over |u|_inf > u_max of G_z(x + r u), any x.

    Uses G_z(y) <= t^{|y|_1} / (1-t) with t = 2dz and |x + ru|_1 >=
    |x+ru|_inf >= r(|u|_inf - 1/2) for x in the fundamental domain.
    Meaningful only for t bounded away from 1.
    """
    t = two_d_z
    if t >= 1.0:
        return math.inf
    if t == 0.0:
        return 0.0
    total = 0.0
    j = u_max + 1
    while True:
        shell = (2 * j + 1) ** d - (2 * j - 1) ** d
        term = shell * t ** (r * (j - 0.5)) / (1.0 - t)
        total += term
        ratio = (t ** r) * ((2 * j + 3) ** d / (2 * j + 1) ** d)
        if ratio < 1.0 and term / (1.0 - ratio) < 1e-18 * max(total, 1e-300) + 1e-300:
            return total + term * ratio / (1.0 - ratio)
        if j > u_max + 10_000:
            return math.inf
        j += 1
