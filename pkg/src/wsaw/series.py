"""Generating-function layer with certified truncation tails.

A truncated series built from walk counts always satisfies
|a_n| <= (2d)^n, so its evaluation error is bounded by an explicit
geometric tail: every evaluation here returns an interval (value +-
certified tail), never a bare point.  Reciprocals (inverse
susceptibilities) and ratios (expected length) propagate those
intervals; bound checkers are one-sided and can only fail on genuine
theorem violations.
"""

import math
from dataclasses import dataclass, field

from .laces import count_laces
from .polynomial import BetaPolynomial
from .tails import geometric_tail, geometric_weighted_tail
from .walks import CoefficientTable

__all__ = [
    "PowerSeries", "EvalResult", "DerivedSeries", "GrowthEstimate",
    "derived_series", "estimate_growth", "tauberian_check",
    "hutchcroft_bound_check", "expected_length", "delta_consistency_report",
]


@dataclass
class EvalResult:
    value: complex
    tail: float
    certified: bool

    @property
    def real(self) -> float:
        return self.value.real

    def interval(self) -> tuple:
        """Real enclosure [lo, hi]; meaningful for real evaluations."""
        return self.value.real - self.tail, self.value.real + self.tail


@dataclass
class PowerSeries:
    """Truncated power series with a geometric coefficient bound.

    growth bounds |a_n| <= growth^n (2d for walk-generated series); the
    certified tail of an evaluation at z is sum_{n>order} (growth |z|)^n.
    """

    coeffs: list
    growth: float
    label: str = ""

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def tail_bound(self, z) -> float:
        return geometric_tail(self.growth * abs(z), self.order)

    def evaluate(self, z) -> EvalResult:
        acc = 0.0 + 0.0j
        for a in reversed(self.coeffs):
            acc = acc * z + a
        tail = self.tail_bound(z)
        return EvalResult(acc, tail, math.isfinite(tail))

    def derivative_weighted(self, z) -> EvalResult:
        """z d/dz of the series, with its own certified tail."""
        acc = 0.0 + 0.0j
        for n in range(self.order, 0, -1):
            acc = acc * z + n * self.coeffs[n]
        acc *= z
        t = self.growth * abs(z)
        tail = geometric_weighted_tail(t, self.order)
        return EvalResult(acc, tail, math.isfinite(tail))


class PoleFlag(ArithmeticError):
    """Reciprocal requested where the enclosure allows a zero."""


def _reciprocal(res: EvalResult, tol: float = 1e-300) -> EvalResult:
    mag = abs(res.value)
    if mag <= res.tail or mag <= tol:
        raise PoleFlag(f"denominator enclosure touches zero (|value|={mag}, "
                       f"tail={res.tail})")
    inv = 1.0 / res.value
    # |1/v - 1/v'| <= tail / (|v| (|v| - tail)) for |v - v'| <= tail
    err = res.tail / (mag * (mag - res.tail))
    return EvalResult(inv, err, res.certified)


@dataclass
class DerivedSeries:
    """Susceptibilities and their derived evaluators at a fixed beta."""

    beta: float
    r: int | None
    chi: PowerSeries
    chi_torus: PowerSeries
    h: PowerSeries  # torus minus infinite, coefficientwise

    def F(self, z) -> EvalResult:
        return _reciprocal(self.chi.evaluate(z))

    def phi(self, z) -> EvalResult:
        return _reciprocal(self.chi_torus.evaluate(z))

    def delta(self, z) -> EvalResult:
        a, b = self.phi(z), self.F(z)
        return EvalResult(a.value - b.value, a.tail + b.tail,
                          a.certified and b.certified)


def derived_series(tbl_z: CoefficientTable, tbl_t: CoefficientTable,
                   beta: float) -> DerivedSeries:
    """chi, torus chi, and their difference series at one beta.

    The difference coefficients vanish below the torus side (walks that
    short cannot wrap), which is asserted here since it is exact.
    """
    if tbl_z.config.d != tbl_t.config.d or not tbl_t.config.is_torus:
        raise ValueError("need a Z^d table and a torus table of equal d")
    n_max = min(tbl_z.n_max, tbl_t.n_max)
    growth = 2.0 * tbl_z.config.d
    cz = [float(tbl_z.total(n)(beta)) for n in range(n_max + 1)]
    ct = [float(tbl_t.total(n)(beta)) for n in range(n_max + 1)]
    h = [t - z for z, t in zip(cz, ct)]
    for n in range(min(tbl_t.config.r, n_max + 1)):
        if tbl_z.total(n) != tbl_t.total(n):
            raise AssertionError(f"difference coefficient nonzero at n={n} "
                                 f"< r={tbl_t.config.r}")
    return DerivedSeries(beta, tbl_t.config.r,
                         PowerSeries(cz, growth, "chi"),
                         PowerSeries(ct, growth, "chi_torus"),
                         PowerSeries(h, growth, "h"))


@dataclass
class GrowthEstimate:
    mu_hat: float
    a_hat: float
    window: tuple
    residual: float
    ratios: list = field(default_factory=list)


def estimate_growth(seq, model: str = "ratio") -> GrowthEstimate:
    """Growth constant and amplitude from consecutive ratios.

    Ratios r_n = a_n / a_{n-1} are extrapolated by the first-order
    Richardson combination n r_n - (n-1) r_{n-1}, which is exact for
    r_n = mu (1 + const/n); the estimate averages the top half of the
    available range and reports the spread as a residual.  No accuracy
    is claimed beyond exactness on exactly-exponential input.
    """
    if model not in ("ratio", "fit"):
        raise ValueError(f"unknown model {model!r}")
    seq = [float(v) for v in seq]
    if len(seq) < 6:
        raise ValueError("need at least 6 terms")
    if any(v <= 0 for v in seq[1:]) or seq[0] <= 0:
        raise ValueError("growth estimation needs positive terms")
    n_top = len(seq) - 1
    ratios = [seq[n] / seq[n - 1] for n in range(1, len(seq))]
    lo = max(2, n_top // 2)
    extrap = []
    for n in range(lo, n_top + 1):
        r_n, r_nm1 = ratios[n - 1], ratios[n - 2]
        extrap.append(n * r_n - (n - 1) * r_nm1)
    mu = sum(extrap) / len(extrap)
    residual = max(abs(e - mu) for e in extrap)
    amps = [seq[n] / mu ** n for n in range(lo, n_top + 1)]
    a_hat = math.exp(sum(math.log(a) for a in amps) / len(amps))
    return GrowthEstimate(mu, a_hat, (lo, n_top), residual, ratios)


def tauberian_check(a, R: float, b: float, c: float, K1: float) -> dict:
    """Smallest K2 with |a_n| <= K1 K2 n^{b+c-1} R^{-n} over the data.

    Reporting operation: for a generating function bounded by
    K1 / (|1 - z/R|^b (1 - |z|/R)^c) the coefficients obey the above for
    some finite K2 depending only on b, c; this measures it and flags
    whether the running maximum has stabilised (not attained in the
    final quarter of the range).
    """
    if b <= 1 or c < 0:
        raise ValueError("need b > 1 and c >= 0")
    per_n = []
    for n in range(1, len(a)):
        bound_unit = K1 * n ** (b + c - 1) * R ** (-n)
        per_n.append({"n": n, "k2_needed": abs(a[n]) / bound_unit})
    k2 = max(row["k2_needed"] for row in per_n)
    argmax = max(per_n, key=lambda row: row["k2_needed"])["n"]
    n_hi = per_n[-1]["n"]
    stable = argmax <= n_hi - max(1, (n_hi - 1) // 4)
    return {"k2": k2, "argmax_n": argmax, "stable": stable,
            "finite": math.isfinite(k2), "per_n": per_n}


def hutchcroft_bound_check(a, z: float, w: float,
                           growth: float | None = None) -> dict:
    """Submultiplicative-sequence bound a_n <= (z/w^2)^n (A(w)/(n+1))^2.

    Verifies the input is submultiplicative over the available range
    (refusing otherwise), forms a certified upper enclosure of A(w)
    (exact when growth is None and the sequence is finite, otherwise
    partial sum plus geometric tail from a_n <= growth^n), and asserts
    the bound for every available n >= 1.  One-sided: a failure implies
    a bug, not a sharp constant.
    """
    if not (z >= w > 0):
        raise ValueError("need z >= w > 0")
    a = [float(v) for v in a]
    for i in range(len(a)):
        for j in range(len(a) - i):
            if a[i + j] > a[i] * a[j] * (1 + 1e-9):
                raise ValueError(
                    f"input not submultiplicative at ({i}, {j}): "
                    f"{a[i + j]} > {a[i] * a[j]}")
    a_w = sum(v * w ** n for n, v in enumerate(a))
    tail = 0.0
    if growth is not None:
        tail = geometric_tail(growth * w, len(a) - 1)
        if not math.isfinite(tail):
            raise ValueError("cannot certify A(w): growth * w >= 1")
    a_upper = a_w + tail
    rows = []
    worst = math.inf
    for n in range(1, len(a)):
        bound = (z ** n / w ** (2 * n)) * (a_upper / (n + 1)) ** 2
        margin = bound - a[n]
        worst = min(worst, margin / max(bound, 1e-300))
        rows.append({"n": n, "a_n": a[n], "bound": bound, "ok": a[n] <= bound * (1 + 1e-12)})
        if not rows[-1]["ok"]:
            raise AssertionError(
                f"submultiplicative bound violated at n={n}: "
                f"{a[n]} > {bound}; this indicates a bug")
    return {"z": z, "w": w, "a_w_upper": a_upper, "rows": rows,
            "min_relative_margin": worst, "ok": True}


def expected_length(tbl_t: CoefficientTable, beta: float, z: float) -> EvalResult:
    """Mean walk length under the variable-length torus measure.

    Ratio of z d/dz of the torus susceptibility to the susceptibility
    itself, with both truncation tails propagated into the returned
    enclosure.  Flags a pole when the denominator enclosure reaches
    zero (cannot happen for real z in the certified region since the
    coefficients are nonnegative and the constant term is 1).
    """
    if z < 0:
        raise ValueError("z must be >= 0")
    growth = 2.0 * tbl_t.config.d
    ct = [float(tbl_t.total(n)(beta)) for n in range(tbl_t.n_max + 1)]
    ps = PowerSeries(ct, growth, "chi_torus")
    num = ps.derivative_weighted(z)
    den = ps.evaluate(z)
    if den.value.real - den.tail <= 0:
        raise PoleFlag("susceptibility enclosure reaches zero")
    if not (num.certified and den.certified):
        return EvalResult(num.value.real / den.value.real, math.inf, False)
    lo = (num.value.real - num.tail) / (den.value.real + den.tail)
    hi = (num.value.real + num.tail) / (den.value.real - den.tail)
    lo = max(lo, 0.0)
    return EvalResult(0.5 * (lo + hi), 0.5 * (hi - lo), True)


def alternating_delta_tail(d: int, beta: float, z: float, order: int,
                           horizon: int = 30) -> float:
    """Certified tail for the alternating sum of difference terms.

    Each order-n coefficient of any single term is bounded in absolute
    value by 2 (2d)^n sum_N L_N(n) beta^N with L_N(n) the number of
    N-edge laces on [0, n]; the sum over n > order is evaluated
    explicitly over a horizon and closed geometrically using the
    observed term ratio (infinite when no safe ratio emerges).
    """
    t = 2 * d * abs(z)
    if t >= 1:
        return math.inf
    total = 0.0
    prev = None
    ratio_cap = 0.0
    for n in range(order + 1, order + horizon + 1):
        lace_weight = 0.0
        for k in range(1, n):
            cnt = count_laces(0, n, k)
            if cnt == 0 and k > 1:
                break
            lace_weight += cnt * beta ** k
        term = 2.0 * t ** n * lace_weight
        total += term
        if prev is not None and prev > 0:
            ratio_cap = max(ratio_cap, term / prev)
        prev = term
    if prev is None or prev == 0.0:
        return total
    if ratio_cap >= 1.0:
        return math.inf
    return total + prev * ratio_cap / (1.0 - ratio_cap)


def delta_consistency_report(derived: DerivedSeries, decomps, z_grid,
                             d: int) -> dict:
    """Compare the reciprocal-difference route with the expansion route.

    The difference of inverse susceptibilities must agree with the
    alternating sum over lace sizes of the decomposition series; both
    routes carry certified tails, and agreement is asserted within their
    sum.  Reports both aggregations at every grid point.
    """
    beta = derived.beta
    rows = []
    for z in z_grid:
        lhs = derived.delta(z)
        val = 0.0
        order = 0
        for dec in decomps:
            sign = 1.0 if dec.n_loops % 2 == 1 else -1.0
            for n, poly in dec.delta_coeffs.items():
                val += sign * float(poly(beta)) * z ** n
                order = max(order, n)
        tail = alternating_delta_tail(d, beta, z, order)
        allowed = lhs.tail + tail
        diff = abs(lhs.value.real - val)
        ok = diff <= allowed
        rows.append({"z": z, "reciprocal_route": lhs.value.real,
                     "expansion_route": val, "diff": diff,
                     "allowed": allowed, "ok": bool(ok)})
        if not ok:
            raise AssertionError(
                f"difference-route mismatch at z={z}: {diff} > {allowed}")
    return {"beta": beta, "rows": rows, "ok": True}
