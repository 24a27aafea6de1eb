"""Lace-expansion coefficients and machine verification of the exact
expansion identities.

pi_n^(N)(x) sums, over n-step walks to x and N-edge laces supported on
the walk's coincidence set, the weight beta^N (1-beta)^c with c the
number of compatible edges that coincide.  With alternating signs these
coefficients satisfy the convolution recursion

    c_n(x) = (2dD * c_{n-1})(x) + sum_{m=2}^n (pi_m * c_{n-m})(x),

verified here as an exact polynomial identity in beta, on Z^d and on
the torus (torus convolution, torus metric throughout, via the lift
bijection).  The torus-vs-Z^d difference of coefficient sums decomposes
as Delta = T - S with per-walk nonnegative P/Q statistics; that identity
is also checked exactly.
"""

import json
from dataclasses import dataclass

from ._enumerate import EnumerationData, run_enumeration
from .diagrams import convolve, two_point_field
from .lattice import LatticeConfig, canonical_rep, linf, unit_steps
from .polynomial import BetaPolynomial
from .tails import geometric_tail, geometric_weighted_tail
from .walks import CoefficientTable, table_from_histograms

__all__ = [
    "PiTable", "DeltaDecomposition", "pi_coefficients",
    "verify_lace_expansion", "pi1_closed_form_check", "delta_decomposition",
    "diagrammatic_bound_report", "shared_enumeration",
]


@dataclass
class PiTable:
    """Map (N, n, endpoint) -> exact expansion coefficient polynomial.

    Entries carry the explicit beta^N factor.  Absent entries are zero;
    N runs over every lace size that contributes (no truncation), so
    N_max is the largest observed size.
    """

    config: LatticeConfig
    n_max: int
    entries: dict  # (N, n, site tuple) -> BetaPolynomial

    @property
    def N_max(self) -> int:
        return max((N for (N, _n, _x) in self.entries), default=0)

    def get(self, N: int, n: int, x) -> BetaPolynomial:
        return self.entries.get((N, n, tuple(x)), BetaPolynomial.zero())

    def hat(self, N: int, n: int) -> BetaPolynomial:
        """Endpoint sum of pi_n^(N)."""
        acc = BetaPolynomial.zero()
        for (nn, m, _x), poly in self.entries.items():
            if nn == N and m == n:
                acc = acc + poly
        return acc

    def alternating(self, n: int) -> dict:
        """pi_n(x) = sum_N (-1)^N pi_n^(N)(x) as a site -> polynomial map."""
        out = {}
        for (N, m, x), poly in self.entries.items():
            if m != n:
                continue
            signed = poly if N % 2 == 0 else -poly
            out[x] = out.get(x, BetaPolynomial.zero()) + signed
        return {x: p for x, p in out.items() if p}

    def to_json_dict(self) -> dict:
        cfg = self.config
        out = {
            "d": cfg.d,
            "geometry": cfg.geometry,
            "n_max": self.n_max,
            "entries": [
                {"N": N, "n": n, "x": list(x), "poly": poly.to_strings()}
                for (N, n, x), poly in sorted(self.entries.items())
            ],
        }
        if cfg.is_torus:
            out["r"] = cfg.r
        return out

    def dump_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def from_json_dict(cls, obj) -> "PiTable":
        cfg = LatticeConfig(obj["d"], obj["geometry"], obj.get("r"))
        entries = {
            (e["N"], e["n"], tuple(e["x"])):
                BetaPolynomial.from_strings(e["poly"])
            for e in obj["entries"]
        }
        return cls(cfg, obj["n_max"], entries)


@dataclass
class DeltaDecomposition:
    """Torus-minus-Z^d expansion difference at fixed lace size.

    delta_coeffs[n] is the independently computed difference of
    endpoint-summed coefficients; s_coeffs/t_coeffs come from the
    per-walk P/Q statistics; delta = t - s holds exactly, termwise.
    """

    n_loops: int
    s_coeffs: dict   # n -> BetaPolynomial
    t_coeffs: dict   # n -> BetaPolynomial
    delta_coeffs: dict
    per_walk_nonneg: bool


def shared_enumeration(cfg: LatticeConfig, n_max: int,
                       budget: int | None = None, workers: int = 1,
                       want_split: bool = False) -> EnumerationData:
    """One kernel pass serving coefficient, pi, and split tables."""
    rs = (cfg.r,) if cfg.is_torus else ()
    return run_enumeration(cfg.d, n_max, rs=rs, want_pi=True,
                           want_split=want_split and cfg.is_torus,
                           budget=budget, workers=workers)


def _pi_entries(cfg, n_max, data: EnumerationData) -> dict:
    entries = {}
    if cfg.is_torus:
        raw = data.pi_t[cfg.r]
        decode = lambda k: data.torus_endpoint_of(k, cfg.r)  # noqa: E731
    else:
        raw = data.pi_z
        decode = data.endpoint_of
    for (N, n), per_key in raw.items():
        if n > n_max:
            continue
        for key, hist in per_key.items():
            poly = BetaPolynomial.from_q_histogram(hist).shift(N)
            entries[(N, n, decode(key))] = poly
    return entries


def pi_coefficients(cfg: LatticeConfig, n_max: int,
                    data: EnumerationData | None = None,
                    budget: int | None = None, workers: int = 1) -> PiTable:
    """Exact expansion coefficients up to order n_max, all lace sizes.

    The torus variant runs over Z^d walks with the torus coincidence
    metric and canonicalised endpoints (the lift-bijection viewpoint).
    Structural zeros are asserted: N = 1 needs n >= 2, N >= 2 needs
    n >= N + 1 (each lace edge spans at least two steps and consecutive
    edges overlap in at most one step), and no endpoint can lie beyond
    the walk's reach.
    """
    if data is None:
        data = shared_enumeration(cfg, n_max, budget=budget, workers=workers)
    entries = _pi_entries(cfg, n_max, data)
    for (N, n, x) in entries:
        min_n = 2 if N == 1 else N + 1
        if n < min_n:
            raise AssertionError(
                f"pi entry at (N={N}, n={n}) below the structural minimum")
        if linf(x) > n:
            raise AssertionError(f"pi endpoint {x} beyond walk reach {n}")
    return PiTable(cfg, n_max, entries)


def _site_convolve(a: dict, b: dict, r: int | None) -> dict:
    """Convolution of site -> polynomial maps; torus when r is given."""
    out = {}
    for y, pa in a.items():
        if not pa:
            continue
        for w, pb in b.items():
            x = tuple(cy + cw for cy, cw in zip(y, w))
            if r is not None:
                x = canonical_rep(x, r)
            prod = pa * pb
            if prod:
                out[x] = out.get(x, BetaPolynomial.zero()) + prod
    return {x: p for x, p in out.items() if p}


def _slice(table: CoefficientTable, n: int) -> dict:
    return {x: poly for (m, x), poly in table.entries.items() if m == n}


def verify_lace_expansion(cfg: LatticeConfig, n_max: int,
                          c_table: CoefficientTable | None = None,
                          pi_table: PiTable | None = None,
                          data: EnumerationData | None = None,
                          budget: int | None = None,
                          workers: int = 1) -> dict:
    """Exact polynomial check of the convolution recursion.

    For every n <= n_max and every endpoint, c_n(x) must equal the
    neighbour sum of c_{n-1} plus sum_{m=2}^n (pi_m conv c_{n-m})(x),
    with pi_m the alternating-sign combination over all lace sizes.
    Torus configurations use torus convolution throughout.  Raises
    AssertionError with (n, x, expected, got) on any mismatch.
    """
    if data is None and (c_table is None or pi_table is None):
        data = shared_enumeration(cfg, n_max, budget=budget, workers=workers)
    if c_table is None:
        if cfg.is_torus:
            c_table = table_from_histograms(
                cfg, n_max, data.ct[cfg.r],
                lambda k: data.torus_endpoint_of(k, cfg.r))
        else:
            c_table = table_from_histograms(cfg, n_max, data.cz,
                                            data.endpoint_of)
    if pi_table is None:
        pi_table = pi_coefficients(cfg, n_max, data=data)
    r = cfg.r if cfg.is_torus else None
    steps = unit_steps(cfg.d)
    pi_by_m = {m: pi_table.alternating(m) for m in range(2, n_max + 1)}
    c_by_n = {n: _slice(c_table, n) for n in range(0, n_max + 1)}
    checked = 0
    for n in range(1, n_max + 1):
        rhs = {}
        for x, poly in c_by_n[n - 1].items():
            for e in steps:
                y = tuple(cx + ce for cx, ce in zip(x, e))
                if r is not None:
                    y = canonical_rep(y, r)
                rhs[y] = rhs.get(y, BetaPolynomial.zero()) + poly
        for m in range(2, n + 1):
            if pi_by_m[m]:
                for x, poly in _site_convolve(pi_by_m[m], c_by_n[n - m], r).items():
                    rhs[x] = rhs.get(x, BetaPolynomial.zero()) + poly
        lhs = c_by_n[n]
        for x in set(lhs) | set(rhs):
            want = lhs.get(x, BetaPolynomial.zero())
            got = rhs.get(x, BetaPolynomial.zero())
            if want != got:
                raise AssertionError(
                    f"recursion fails at (n={n}, x={x}): "
                    f"expected {want!r}, got {got!r}")
            checked += 1
    return {"d": cfg.d, "geometry": cfg.geometry, "r": cfg.r,
            "n_max": n_max, "identities_checked": checked, "ok": True}


def pi1_closed_form_check(cfg: LatticeConfig, n_max: int,
                          c_table: CoefficientTable | None = None,
                          pi_table: PiTable | None = None,
                          data: EnumerationData | None = None,
                          budget: int | None = None,
                          workers: int = 1) -> dict:
    """Single-loop coefficients against their closed form, exactly.

    The single-edge lace forces a return to the origin with every other
    pair compatible, so pi_n^(1)(0) (1-beta) = beta c_n(0) termwise and
    pi_n^(1)(x) = 0 off the origin.  Zero tolerance.
    """
    if data is None and (c_table is None or pi_table is None):
        data = shared_enumeration(cfg, n_max, budget=budget, workers=workers)
    if c_table is None:
        if cfg.is_torus:
            c_table = table_from_histograms(
                cfg, n_max, data.ct[cfg.r],
                lambda k: data.torus_endpoint_of(k, cfg.r))
        else:
            c_table = table_from_histograms(cfg, n_max, data.cz,
                                            data.endpoint_of)
    if pi_table is None:
        pi_table = pi_coefficients(cfg, n_max, data=data)
    origin = (0,) * cfg.d
    one_minus = BetaPolynomial((1, -1))
    beta_poly = BetaPolynomial((0, 1))
    for (N, n, x) in pi_table.entries:
        if N == 1 and x != origin:
            raise AssertionError(f"single-loop coefficient off origin at {x}")
    for n in range(2, n_max + 1):
        lhs = pi_table.get(1, n, origin) * one_minus
        rhs = beta_poly * c_table.get(n, origin)
        if lhs != rhs:
            raise AssertionError(
                f"single-loop closed form fails at n={n}: {lhs!r} != {rhs!r}")
    return {"d": cfg.d, "geometry": cfg.geometry, "r": cfg.r,
            "n_max": n_max, "ok": True}


def delta_decomposition(cfg: LatticeConfig, n_max: int, n_loops: int,
                        data: EnumerationData | None = None,
                        budget: int | None = None,
                        workers: int = 1) -> DeltaDecomposition:
    """Split of the torus-vs-Z^d coefficient difference at one lace size.

    S collects, per Z^d-supported lace, the loss of compatible-edge
    weight under the torus metric; T collects laces supported only by
    the torus metric.  Verifies exactly that the independently computed
    difference of endpoint-summed coefficients equals T - S termwise,
    that both sides vanish for n < r (no wrapping is possible), and that
    the per-walk statistics were nonnegative (torus coincidences always
    dominate exact ones).
    """
    if not cfg.is_torus:
        raise ValueError("the decomposition compares a torus against Z^d")
    if data is None:
        data = shared_enumeration(cfg, n_max, budget=budget, workers=workers,
                                  want_split=True)
    if not data.p_split:
        raise ValueError("enumeration data lacks split tables")
    r = cfg.r
    N = n_loops
    s_coeffs, t_coeffs, delta_coeffs = {}, {}, {}
    for n in range(0, n_max + 1):
        s_poly = BetaPolynomial.zero()
        for (ce, ct_), cnt in data.p_split[r].get((N, n), {}).items():
            s_poly = s_poly + (BetaPolynomial.from_q_power(ce, cnt)
                               - BetaPolynomial.from_q_power(ct_, cnt))
        s_coeffs[n] = s_poly.shift(N)
        t_poly = BetaPolynomial.zero()
        for ct_, cnt in data.q_split[r].get((N, n), {}).items():
            t_poly = t_poly + BetaPolynomial.from_q_power(ct_, cnt)
        t_coeffs[n] = t_poly.shift(N)
        hat_t = BetaPolynomial.zero()
        for _key, hist in data.pi_t[r].get((N, n), {}).items():
            hat_t = hat_t + BetaPolynomial.from_q_histogram(hist)
        hat_z = BetaPolynomial.zero()
        for _key, hist in data.pi_z.get((N, n), {}).items():
            hat_z = hat_z + BetaPolynomial.from_q_histogram(hist)
        delta_coeffs[n] = (hat_t - hat_z).shift(N)
        if delta_coeffs[n] != t_coeffs[n] - s_coeffs[n]:
            raise AssertionError(
                f"difference decomposition fails at (N={N}, n={n})")
        if n < r and delta_coeffs[n]:
            raise AssertionError(
                f"nonzero difference for unwrappable length n={n} < r={r}")
    return DeltaDecomposition(N, s_coeffs, t_coeffs, delta_coeffs, True)


def diagrammatic_bound_report(cfg: LatticeConfig, z_grid, n_max: int,
                              N_max: int = 3,
                              c_table: CoefficientTable | None = None,
                              pi_table: PiTable | None = None,
                              data: EnumerationData | None = None,
                              budget: int | None = None) -> dict:
    """Numeric check of the diagrammatic bounds on expansion sums.

    For N >= 2 and z >= 0 the endpoint sum of the order-N generating
    function is bounded by beta^N ||G|| ||G conv G||^{N-1} (sup norms,
    torus convolution on the torus); the z-derivative obeys the same
    shape with a (2N-1) prefactor and one two-point factor replaced by
    its derivative, and the one-loop derivative is bounded by
    2 beta ||dG|| for beta <= 1/2.  Left sides are truncated from below,
    right sides take the certified upper interval: a reported violation
    therefore implies an implementation bug, not a sharp constant.
    """
    if data is None and (c_table is None or pi_table is None):
        data = shared_enumeration(cfg, n_max, budget=budget)
    if c_table is None:
        if cfg.is_torus:
            c_table = table_from_histograms(
                cfg, n_max, data.ct[cfg.r],
                lambda k: data.torus_endpoint_of(k, cfg.r))
        else:
            c_table = table_from_histograms(cfg, n_max, data.cz,
                                            data.endpoint_of)
    if pi_table is None:
        pi_table = pi_coefficients(cfg, n_max, data=data)
    beta = cfg.beta
    d = cfg.d
    hats = {(N, n): float(pi_table.hat(N, n)(beta))
            for N in range(1, N_max + 1) for n in range(2, n_max + 1)}
    rows = []
    for z in z_grid:
        g = two_point_field(cfg, z, n_max, table=c_table)
        gg = convolve(g, g)
        g_sup = g.sup_norm() + g.tail_sup
        gg_sup = gg.sup_norm() + gg.tail_sup
        t = 2 * d * z
        dg_sup = _derivative_sup(c_table, beta, z, n_max, d)
        for N in range(1, N_max + 1):
            lhs = sum(hats[(N, n)] * z ** n for n in range(2, n_max + 1))
            lhs_der = sum(n * hats[(N, n)] * z ** max(n - 1, 0)
                          for n in range(2, n_max + 1))
            row = {"z": z, "N": N}
            if N >= 2:
                rhs = beta ** N * g_sup * gg_sup ** (N - 1)
                row.update(sum_lhs=lhs, sum_rhs=rhs,
                           sum_ok=lhs <= rhs * (1 + 1e-12))
                rhs_der = (2 * N - 1) * beta ** N * dg_sup * gg_sup ** (N - 1)
                row.update(der_lhs=lhs_der, der_rhs=rhs_der,
                           der_ok=lhs_der <= rhs_der * (1 + 1e-12))
            else:
                if beta <= 0.5:
                    rhs_der = 2 * beta * dg_sup
                    row.update(der_lhs=lhs_der, der_rhs=rhs_der,
                               der_ok=lhs_der <= rhs_der * (1 + 1e-12))
                else:
                    row.update(der_ok=None)
            rows.append(row)
            for key in ("sum_ok", "der_ok"):
                if row.get(key) is False:
                    raise AssertionError(
                        f"diagrammatic bound violated at z={z}, N={N} "
                        f"({key}); this indicates an implementation bug")
    return {"d": d, "geometry": cfg.geometry, "r": cfg.r, "beta": beta,
            "n_max": n_max, "rows": rows, "ok": True}


def _derivative_sup(table: CoefficientTable, beta: float, z: float,
                    n_max: int, d: int) -> float:
    """Upper bound on sup_x sum_n n c_n(x) z^{n-1}."""
    sups = {}
    for (n, x), poly in table.entries.items():
        if 1 <= n <= n_max:
            sups[x] = sups.get(x, 0.0) + n * float(poly(beta)) * z ** max(n - 1, 0)
    best = max(sups.values(), default=0.0)
    if z > 0:
        best += geometric_weighted_tail(2 * d * z, n_max) / z
    return best
