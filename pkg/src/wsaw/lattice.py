"""Geometry of Z^d and the discrete torus of side r.

Sites are integer tuples.  A torus site is always stored by its unique
representative with every coordinate in the half-open window [-r/2, r/2);
for odd r the window is symmetric, for even r the coordinate -r/2 is
included and +r/2 excluded.

Also provides the simple-random-walk (beta = 0) Green function, computed
by an exact Fourier mode sum on the torus.  The Z^d value is obtained by
embedding in a larger torus whose side is a multiple of the requested
one, so that copy sums fold exactly (see srw_green).
"""

from dataclasses import dataclass

import numpy as np


class DivergenceError(ValueError):
    """A Fourier mode denominator is not positive: the series diverges."""


@dataclass(frozen=True)
class LatticeConfig:
    """Lattice parameters shared by the whole toolkit.

    geometry is "infinite" for Z^d or "torus" for side r; beta in [0, 1]
    is the interaction strength (0 = simple random walk, 1 = strict
    self-avoidance).
    """

    d: int
    geometry: str = "infinite"
    r: int | None = None
    beta: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.geometry not in ("infinite", "torus"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "torus":
            if self.r is None or self.r < 3:
                raise ValueError("torus side must be an integer >= 3 "
                                 "(the walk lift is a bijection only then)")
        elif self.r is not None:
            raise ValueError("r is only meaningful for torus geometry")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def is_torus(self) -> bool:
        return self.geometry == "torus"

    @property
    def volume(self) -> int:
        """Number of torus sites r^d."""
        if not self.is_torus:
            raise ValueError("volume is defined only for torus geometry")
        return self.r ** self.d

    def with_beta(self, beta: float) -> "LatticeConfig":
        return LatticeConfig(self.d, self.geometry, self.r, beta)


def canonical_coord(c: int, r: int) -> int:
    """Representative of c mod r in [-r/2, r/2)."""
    v = c % r
    return v - r if v >= (r + 1) // 2 else v


def canonical_rep(x, r: int):
    """Componentwise canonical representative of a site modulo r."""
    if r < 3:
        raise ValueError("torus side must be >= 3")
    return tuple(canonical_coord(c, r) for c in x)


def l1(x) -> int:
    return sum(abs(c) for c in x)


def linf(x) -> int:
    return max(abs(c) for c in x) if x else 0


def unit_steps(d: int) -> tuple:
    """The 2d signed unit vectors, in a fixed deterministic order."""
    steps = []
    for j in range(d):
        for s in (1, -1):
            e = [0] * d
            e[j] = s
            steps.append(tuple(e))
    return tuple(steps)


@dataclass(frozen=True)
class WalkPath:
    """A nearest-neighbour walk anchored at the origin, stored as steps."""

    d: int
    steps: tuple

    def __post_init__(self):
        for s in self.steps:
            if len(s) != self.d or sum(abs(c) for c in s) != 1:
                raise ValueError(f"step {s} is not a signed unit vector")

    def __len__(self):
        return len(self.steps)

    def positions(self) -> list:
        """Z^d positions visited, starting from the origin."""
        pos = [(0,) * self.d]
        cur = [0] * self.d
        for s in self.steps:
            for j, c in enumerate(s):
                cur[j] += c
            pos.append(tuple(cur))
        return pos

    def torus_positions(self, r: int) -> list:
        """Canonical torus representatives of the visited positions."""
        return [canonical_rep(x, r) for x in self.positions()]


def lift_walk(walk: WalkPath, cfg: LatticeConfig) -> WalkPath:
    """Unwrap a torus walk to Z^d.

    The lifted walk starts at the origin and each of its increments is the
    canonical representative of the corresponding torus increment.  For
    nearest-neighbour steps and r >= 3 this is a bijection between n-step
    torus walks and n-step Z^d walks.
    """
    if not cfg.is_torus:
        raise ValueError("lift_walk requires a torus configuration")
    r = cfg.r
    tpos = walk.torus_positions(r)
    steps = []
    for k in range(1, len(tpos)):
        inc = canonical_rep(tuple(a - b for a, b in zip(tpos[k], tpos[k - 1])), r)
        steps.append(inc)
    return WalkPath(cfg.d, tuple(steps))


def project_walk(walk: WalkPath, cfg: LatticeConfig) -> list:
    """Torus position sequence of a Z^d walk (componentwise mod r)."""
    if not cfg.is_torus:
        raise ValueError("project_walk requires a torus configuration")
    return walk.torus_positions(cfg.r)


# ---------------------------------------------------------------------------
# beta = 0 Green function oracle
# ---------------------------------------------------------------------------

# Mode-sum arrays larger than this are refused; the embedding side is
# reduced (in multiples of r) to fit.
EMBED_MODE_BUDGET = 2 ** 24


def srw_green_spectrum(d: int, side: int, z: float) -> np.ndarray:
    """Array 1/(1 - 2dz*Dhat(k)) over the side^d mode grid.

    Dhat(k) = (1/d) sum_j cos(2 pi k_j / side) is the step transform of
    the uniform nearest-neighbour distribution.
    """
    if z < 0:
        raise ValueError("activity z must be >= 0")
    k = 2.0 * np.pi * np.arange(side) / side
    cos1 = np.cos(k)
    dhat_sum = cos1
    for _ in range(d - 1):
        dhat_sum = dhat_sum[..., None] + cos1
    denom = 1.0 - 2.0 * z * dhat_sum
    if np.min(denom) <= 0.0:
        raise DivergenceError(
            f"mode denominator <= 0 at z={z} (need 2dz < 1 for the torus sum)")
    return 1.0 / denom


def srw_green_torus_field(d: int, r: int, z: float) -> np.ndarray:
    """beta = 0 torus two-point function on the full r^d grid.

    Index [x1 mod r, ..., xd mod r] gives the value at that torus site.
    Equals (1/V) sum_k e^{2 pi i k.x / r} / (1 - 2dz Dhat(k)) exactly
    (up to FFT roundoff); real by symmetry.
    """
    spec = srw_green_spectrum(d, r, z)
    return np.fft.ifftn(spec).real


def embedding_side(d: int, r: int, budget: int = EMBED_MODE_BUDGET) -> int:
    """Side of the embedding torus used for Z^d values.

    Prefers max(8r, 64) rounded up to a multiple of r; reduced toward 2r
    when side^d would exceed the mode budget (relevant for d >= 4).
    Always a multiple of r so that copy sums over the embedding fold
    exactly onto the requested torus.
    """
    want = max(8 * r, 64)
    k = -(-want // r)  # ceil division
    while k > 2 and (k * r) ** d > budget:
        k -= 1
    if (k * r) ** d > budget and k > 2:
        k = 2
    return k * r


def srw_green_zd_field(d: int, r: int, z: float,
                       embed_side: int | None = None) -> np.ndarray:
    """beta = 0 Z^d two-point function, tabulated on an embedding torus.

    Returns the Green function of the torus of side embed_side (default
    from embedding_side), which equals the Z^d value plus the sum of its
    copies at distance >= embed_side/2.  For 2dz bounded away from 1 the
    copy error is at most (2dz)^{embed_side/2} / (1 - 2dz) per the crude
    bound G_z(x) <= (2dz)^{|x|_1} / (1 - 2dz); near criticality it is of
    the order of chi(z)/embed_side^d and the caller must treat the value
    as biased at that scale.
    """
    side = embed_side if embed_side is not None else embedding_side(d, r)
    if side % r != 0 or side < 2 * r:
        raise ValueError("embedding side must be a multiple of r, >= 2r")
    return srw_green_torus_field(d, side, z)


def srw_green(cfg: LatticeConfig, z: float, x,
              embed_side: int | None = None) -> float:
    """beta = 0 Green function at site x for the configured geometry.

    Torus geometry: exact mode sum over the r^d grid.  Infinite geometry:
    value on an embedding torus (see srw_green_zd_field for the copy
    bound); pass embed_side to control the truncation.
    """
    if cfg.beta != 0.0:
        raise ValueError("srw_green is the beta = 0 oracle only")
    if cfg.is_torus:
        field = srw_green_torus_field(cfg.d, cfg.r, z)
        return float(field[tuple(c % cfg.r for c in x)])
    if embed_side is None:
        embed_side = max(64, 8 * (2 * linf(x) + 2))
        while embed_side ** cfg.d > EMBED_MODE_BUDGET and embed_side > 2 * linf(x) + 2:
            embed_side //= 2
    field = srw_green_torus_field(cfg.d, embed_side, z)
    return float(field[tuple(c % embed_side for c in x)])
