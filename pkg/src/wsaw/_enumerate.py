"""Shared exact-enumeration kernel.

One depth-first pass over all nearest-neighbour step sequences up to
n_max collects, per geometry (Z^d and any number of torus sides at
once):

  * walk tables: count of walks by (length, endpoint, number of
    coinciding time pairs m), so every c_n(x) is the exact polynomial
    sum_m count * (1-beta)^m;
  * lace-expansion tables: for each walk and each lace L supported on
    its coincidence set, a contribution counted by (lace size N, length,
    endpoint, number of compatible edges that coincide), giving
    pi_n^(N)(x) = beta^N * sum count * (1-beta)^c;
  * torus-vs-Z^d split tables: for laces supported on the torus
    coincidence set of a Z^d walk, the per-walk statistics behind the
    P/Q decomposition of the difference of expansion coefficients.

Torus quantities are accumulated over Z^d walks via the lift bijection:
the torus coincidence set of a walk is the set of time pairs whose
positions agree modulo r, and endpoints are canonicalised at the end.

Enumeration splits deterministically on the first steps (at most 2);
branch tables merge by exact addition, so output is independent of
traversal order and worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .laces import _compatible_cached, laces_within
from .lattice import canonical_coord

DEFAULT_BUDGET = 2 ** 34
SPLIT_DEPTH = 2


class WorkBudgetError(RuntimeError):
    """Requested enumeration exceeds the configured work budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration needs ~{required} walk extensions, budget is {budget}; "
            f"raise the budget explicitly to proceed")


def work_estimate(d: int, n_max: int) -> int:
    """Total number of walk extensions (tree nodes below the root)."""
    w = 2 * d
    return sum(w ** k for k in range(1, n_max + 1))


@dataclass
class EnumerationData:
    """Raw histogram tables from one enumeration pass.

    Endpoint keys are integer-encoded; decode with endpoint_of /
    torus_endpoint_of.  Histograms map m (or compatible-coincidence
    count c) to walk counts; everything is exact integers.
    """

    d: int
    n_max: int
    rs: tuple
    # cz[n][key][m] = count ; ct[r][n][key][m] = count
    cz: dict = field(default_factory=dict)
    ct: dict = field(default_factory=dict)
    # pi_z[(N, n)][key][c] = count ; pi_t[r][(N, n)][key][c] = count
    pi_z: dict = field(default_factory=dict)
    pi_t: dict = field(default_factory=dict)
    # p_split[r][(N, n)][(c_exact, c_torus)] = count (laces in both sets)
    # q_split[r][(N, n)][c_torus] = count (laces only in the torus set)
    p_split: dict = field(default_factory=dict)
    q_split: dict = field(default_factory=dict)
    nodes: int = 0

    def endpoint_of(self, key: int) -> tuple:
        base = 2 * self.n_max + 1
        out = []
        for _ in range(self.d):
            key, digit = divmod(key, base)
            out.append(digit - self.n_max)
        return tuple(out)

    def torus_endpoint_of(self, key: int, r: int) -> tuple:
        out = []
        for _ in range(self.d):
            key, digit = divmod(key, r)
            out.append(canonical_coord(digit, r))
        return tuple(out)


def run_enumeration(d: int, n_max: int, rs=(), want_pi: bool = False,
                    want_split: bool = False, budget: int | None = None,
                    workers: int = 1) -> EnumerationData:
    """Enumerate all walks up to n_max and collect the requested tables.

    rs lists torus sides tracked alongside the exact metric.  want_pi
    adds the lace-expansion tables (for Z^d and every r), want_split
    additionally collects the P/Q torus-difference statistics (requires
    torus sides).  budget defaults to 2^34 extensions.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if budget is None:
        budget = DEFAULT_BUDGET
    required = work_estimate(d, n_max)
    if required > budget:
        raise WorkBudgetError(required, budget)
    rs = tuple(sorted(set(rs)))
    if want_split and not rs:
        raise ValueError("split tables require at least one torus side")

    split = min(SPLIT_DEPTH, n_max)
    if split == 0:
        return _run_task((d, n_max, n_max, rs, want_pi, want_split, ()))

    tasks = [(d, n_max, n_max, rs, want_pi, want_split, p)
             for p in _prefixes(d, split)]
    # depths below the split are enumerated once, serially
    shallow = _run_task((d, n_max, split - 1, rs, want_pi, want_split, ()))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_task, tasks))
    else:
        parts = [_run_task(t) for t in tasks]

    out = shallow
    for part in parts:
        _merge(out, part)
    return out


def _prefixes(d: int, depth: int) -> list:
    moves = list(range(2 * d))
    out = [()]
    for _ in range(depth):
        out = [p + (m,) for p in out for m in moves]
    return sorted(out)


def _merge(dst: EnumerationData, src: EnumerationData):
    _merge_nested(dst.cz, src.cz, 3)
    _merge_nested(dst.ct, src.ct, 4)
    _merge_nested(dst.pi_z, src.pi_z, 3)
    _merge_nested(dst.pi_t, src.pi_t, 4)
    _merge_nested(dst.p_split, src.p_split, 3)
    _merge_nested(dst.q_split, src.q_split, 3)
    dst.nodes += src.nodes


def _merge_nested(dst: dict, src: dict, depth: int):
    for k, v in src.items():
        if depth == 1:
            dst[k] = dst.get(k, 0) + v
        else:
            _merge_nested(dst.setdefault(k, {}), v, depth - 1)


class _Geometry:
    """Per-metric DFS state: position keys, occurrences, coincidences."""

    __slots__ = ("occ", "by_s", "pairs", "pairs_set", "m", "key", "track_set")

    def __init__(self, origin_key: int, track_set: bool):
        self.occ = {origin_key: [0]}
        self.by_s = {}
        self.pairs = []
        self.pairs_set = set() if track_set else None
        self.m = 0
        self.key = origin_key
        self.track_set = track_set

    def push(self, key: int, t: int) -> tuple:
        """Move to position key at time t; returns (old_key, n_new_pairs)."""
        old = self.key
        self.key = key
        prev = self.occ.get(key)
        if prev:
            by_s = self.by_s
            pairs = self.pairs
            for s in prev:
                lst = by_s.get(s)
                if lst is None:
                    by_s[s] = [t]
                else:
                    lst.append(t)
                pairs.append((s, t))
            k_new = len(prev)
            if self.track_set:
                self.pairs_set.update(pairs[-k_new:])
            self.m += k_new
            prev.append(t)
        else:
            self.occ[key] = [t]
            k_new = 0
        return old, k_new

    def pop(self, old_key: int, k_new: int):
        key = self.key
        lst = self.occ[key]
        lst.pop()
        if not lst:
            del self.occ[key]
        if k_new:
            self.m -= k_new
            by_s = self.by_s
            tail = self.pairs[-k_new:]
            if self.track_set:
                for p in tail:
                    self.pairs_set.discard(p)
            for s, _t in tail:
                by_s[s].pop()
            del self.pairs[-k_new:]
        self.key = old_key


def _run_task(args) -> EnumerationData:
    d, n_max, depth_max, rs, want_pi, want_split, prefix = args
    data = EnumerationData(d, n_max, rs)
    base = 2 * n_max + 1

    coords = [0] * d
    origin_z = sum(n_max * base ** j for j in range(d))
    exact = _Geometry(origin_z, want_split or want_pi)
    tori = {r: _Geometry(0, False) for r in rs}
    rpow = {r: [r ** j for j in range(d)] for r in rs}
    bpow = [base ** j for j in range(d)]
    # fixed deterministic move order: (+e1, -e1, +e2, -e2, ...)
    moves = [(j, s) for j in range(d) for s in (1, -1)]

    cz = data.cz
    ct = {r: data.ct.setdefault(r, {}) for r in rs}
    pi_z, pi_t = data.pi_z, data.pi_t
    for r in rs:
        pi_t.setdefault(r, {})
        data.p_split.setdefault(r, {})
        data.q_split.setdefault(r, {})
    record_from = len(prefix)

    def record(t):
        data.nodes += 1
        hist = cz.setdefault(t, {}).setdefault(exact.key, {})
        hist[exact.m] = hist.get(exact.m, 0) + 1
        for r in rs:
            g = tori[r]
            h = ct[r].setdefault(t, {}).setdefault(g.key, {})
            h[g.m] = h.get(g.m, 0) + 1
        if want_pi and exact.by_s.get(0):
            _lace_contrib(pi_z, exact, exact, t, None, None)
        for r in rs:
            g = tori[r]
            if (want_pi or want_split) and g.by_s.get(0):
                _lace_contrib(
                    pi_t[r] if want_pi else None, g, exact, t,
                    data.p_split[r] if want_split else None,
                    data.q_split[r] if want_split else None)

    def descend(t):
        if t >= record_from:
            record(t)
        if t == depth_max:
            return
        move_list = [moves[prefix[t]]] if t < record_from else moves
        for j, s in move_list:
            old_c = coords[j]
            new_c = old_c + s
            coords[j] = new_c
            stz = exact.push(exact.key + s * bpow[j], t + 1)
            sts = []
            for r in rs:
                g = tori[r]
                dk = ((new_c % r) - (old_c % r)) * rpow[r][j]
                sts.append(g.push(g.key + dk, t + 1))
            descend(t + 1)
            for r, st in zip(rs, sts):
                tori[r].pop(st[0], st[1])
            exact.pop(stz[0], stz[1])
            coords[j] = old_c

    descend(0)
    return data


def _lace_contrib(pi_table, geom, exact_geom, n, p_table, q_table):
    """Accumulate every lace supported on geom's coincidence set.

    pi_table gains the (c = compatible coincidences) histogram at this
    walk's endpoint.  When p/q tables are given, geom must be a torus
    metric paired with the exact metric of the same walk: a lace also
    supported on the exact set contributes to P with both coincidence
    counts, otherwise to Q.
    """
    found = laces_within(geom.by_s, n)
    if not found:
        return
    pairs = geom.pairs
    key = geom.key
    for edges in found:
        compat = _compatible_cached(0, n, edges)
        c_here = sum(1 for p in pairs if p in compat)
        nn = (len(edges), n)
        if pi_table is not None:
            hist = pi_table.setdefault(nn, {}).setdefault(key, {})
            hist[c_here] = hist.get(c_here, 0) + 1
        if p_table is None:
            continue
        if all(p in exact_geom.pairs_set for p in edges):
            c_exact = sum(1 for p in exact_geom.pairs if p in compat)
            if c_exact > c_here:
                raise AssertionError(
                    "exact coincidences exceed torus coincidences; "
                    "metric bookkeeping is broken")
            hist = p_table.setdefault(nn, {})
            hist[(c_exact, c_here)] = hist.get((c_exact, c_here), 0) + 1
        else:
            hist = q_table.setdefault(nn, {})
            hist[c_here] = hist.get(c_here, 0) + 1
