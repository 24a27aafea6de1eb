"""Exact enumeration of interaction-weighted walks.

The partition function of an n-step walk to x is the sum over walks of
prod_{s<t} (1 + beta*U_st), i.e. a factor (1-beta) per coinciding time
pair.  Enumeration therefore stores, per (n, endpoint), the histogram of
coincidence counts and converts it once into an exact integer polynomial
in beta.  Torus tables are produced from the same Z^d walk enumeration
through the lift bijection, counting coincidences modulo r and
canonicalising endpoints.
"""

import json
import math
from dataclasses import dataclass

from ._enumerate import (DEFAULT_BUDGET, WorkBudgetError, run_enumeration,
                         work_estimate)
from .lattice import LatticeConfig, WalkPath, canonical_rep
from .polynomial import BetaPolynomial

__all__ = [
    "PairCounts", "CoefficientTable", "pair_counts", "enumerate_walks",
    "verify_basic_bounds", "WorkBudgetError", "work_estimate",
    "DEFAULT_BUDGET",
]


@dataclass(frozen=True)
class PairCounts:
    """Counts of coinciding time pairs of one Z^d walk.

    m_exact counts pairs s < t with equal Z^d positions, m_plus pairs
    with equal torus projection but distinct Z^d positions; the torus
    metric sees the disjoint union of both.
    """

    m_exact: int
    m_plus: int

    @property
    def m_torus(self) -> int:
        return self.m_exact + self.m_plus


def pair_counts(walk: WalkPath, cfg: LatticeConfig) -> PairCounts:
    """Coincidence pair counts of a walk under cfg's metric split."""
    pos = walk.positions()
    m_exact = 0
    m_torus = 0
    seen = {}
    for p in pos:
        k = seen.get(p, 0)
        m_exact += k
        seen[p] = k + 1
    if cfg.is_torus:
        seen_t = {}
        for p in pos:
            c = canonical_rep(p, cfg.r)
            k = seen_t.get(c, 0)
            m_torus += k
            seen_t[c] = k + 1
    else:
        m_torus = m_exact
    return PairCounts(m_exact, m_torus - m_exact)


@dataclass
class CoefficientTable:
    """Map (n, endpoint) -> exact polynomial c_n(x) in beta."""

    config: LatticeConfig
    n_max: int
    entries: dict  # (n, site tuple) -> BetaPolynomial

    def get(self, n: int, x) -> BetaPolynomial:
        return self.entries.get((n, tuple(x)), BetaPolynomial.zero())

    def endpoints(self, n: int) -> list:
        return sorted(x for (m, x) in self.entries if m == n)

    def total(self, n: int) -> BetaPolynomial:
        """c_n = sum_x c_n(x), still an exact polynomial."""
        acc = BetaPolynomial.zero()
        for (m, _x), poly in self.entries.items():
            if m == n:
                acc = acc + poly
        return acc

    def totals(self) -> list:
        return [self.total(n) for n in range(self.n_max + 1)]

    def sequence(self, beta: float) -> list:
        """[c_0, ..., c_n_max] evaluated at one beta."""
        return [float(t(beta)) for t in self.totals()]

    def __eq__(self, other):
        return (isinstance(other, CoefficientTable)
                and self.config == other.config
                and self.n_max == other.n_max
                and self.entries == other.entries)

    # -- JSON interchange ---------------------------------------------------

    def to_json_dict(self) -> dict:
        cfg = self.config
        out = {
            "d": cfg.d,
            "geometry": cfg.geometry,
            "n_max": self.n_max,
            "entries": [
                {"n": n, "x": list(x), "poly": poly.to_strings()}
                for (n, x), poly in sorted(self.entries.items())
            ],
        }
        if cfg.is_torus:
            out["r"] = cfg.r
        return out

    def dump_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def from_json_dict(cls, obj) -> "CoefficientTable":
        cfg = LatticeConfig(obj["d"], obj["geometry"], obj.get("r"))
        entries = {
            (e["n"], tuple(e["x"])): BetaPolynomial.from_strings(e["poly"])
            for e in obj["entries"]
        }
        return cls(cfg, obj["n_max"], entries)

    @classmethod
    def load_json(cls, path) -> "CoefficientTable":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def table_from_histograms(cfg: LatticeConfig, n_max: int, raw: dict,
                          decode) -> CoefficientTable:
    entries = {}
    for n, per_key in raw.items():
        for key, hist in per_key.items():
            entries[(n, decode(key))] = BetaPolynomial.from_q_histogram(hist)
    return CoefficientTable(cfg, n_max, entries)


def enumerate_walks(cfg: LatticeConfig, n_max: int,
                    budget: int | None = None,
                    workers: int = 1) -> CoefficientTable:
    """Exact coefficient table for cfg's geometry up to order n_max.

    Refuses when the walk-extension count exceeds the budget (default
    2^34), raising WorkBudgetError with the required estimate.  Output
    is deterministic for any worker count: branches merge by exact
    polynomial addition.
    """
    rs = (cfg.r,) if cfg.is_torus else ()
    data = run_enumeration(cfg.d, n_max, rs=rs, budget=budget,
                           workers=workers)
    if cfg.is_torus:
        return table_from_histograms(
            cfg, n_max, data.ct[cfg.r],
            lambda k: data.torus_endpoint_of(k, cfg.r))
    return table_from_histograms(cfg, n_max, data.cz, data.endpoint_of)


def verify_basic_bounds(tbl_z: CoefficientTable, tbl_t: CoefficientTable,
                        beta_grid) -> dict:
    """Check the elementary torus-vs-Z^d relations on enumerated tables.

    (i) the total polynomials agree exactly for n < r (walks shorter
    than the side cannot wrap); (ii) the torus total never exceeds the
    Z^d total at any beta in the grid; (iii) the torus total obeys the
    crude bound (2d)^n exp(-beta (n^2/V - n)/2).  Returns a report with
    margins; raises AssertionError naming (n, beta, bound) on violation.
    """
    if tbl_z.config.d != tbl_t.config.d or not tbl_t.config.is_torus:
        raise ValueError("need a Z^d table and a torus table of equal d")
    if tbl_z.n_max != tbl_t.n_max:
        raise ValueError("tables must share n_max")
    d = tbl_z.config.d
    r = tbl_t.config.r
    vol = tbl_t.config.volume
    report = {"d": d, "r": r, "n_max": tbl_z.n_max, "checks": [],
              "min_margin_ii": None, "min_margin_iii": None}
    totals_z = tbl_z.totals()
    totals_t = tbl_t.totals()
    for n in range(tbl_z.n_max + 1):
        if n < r and totals_z[n] != totals_t[n]:
            raise AssertionError(
                f"(n={n}, bound=short-walk equality): torus total differs "
                f"from Z^d total below the side length")
    m2, m3 = math.inf, math.inf
    for beta in beta_grid:
        for n in range(tbl_z.n_max + 1):
            cz = float(totals_z[n](beta))
            ct = float(totals_t[n](beta))
            if ct > cz + 1e-9 * max(1.0, abs(cz)):
                raise AssertionError(
                    f"(n={n}, beta={beta}, bound=c_t<=c_z): {ct} > {cz}")
            rough = (2 * d) ** n * math.exp(-0.5 * beta * (n * n / vol - n))
            if ct > rough * (1 + 1e-12):
                raise AssertionError(
                    f"(n={n}, beta={beta}, bound=rough): {ct} > {rough}")
            m2 = min(m2, cz - ct)
            m3 = min(m3, rough - ct)
            report["checks"].append(
                {"n": n, "beta": beta, "c_z": cz, "c_t": ct, "rough": rough})
    report["min_margin_ii"] = m2
    report["min_margin_iii"] = m3
    report["ok"] = True
    return report
