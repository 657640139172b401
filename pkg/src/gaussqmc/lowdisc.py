"""Low-discrepancy point sets in [0,1)^d and their quality checks.

Generators produce points in *generation order*: prefixes of length 2^m of
the Sobol' sequence are (t,m,d)-nets in base 2, so order matters and is
part of the contract.  Points are bit-reproducible functions of
(generator, parameters, seed).

Randomizations:

* ``owen_scramble`` -- nested uniform scrambling, 53 binary digits deep.
  In base 2 a uniformly random permutation of {0,1} is a fair coin flip,
  so the scramble XORs each digit with a random bit drawn per (coordinate,
  digit level, digit prefix).  Bits come from a keyed counter hash, which
  keeps the whole permutation tree virtual and the output a pure function
  of (points, seed).
* ``digital_shift`` -- one random 53-digit XOR per coordinate.

Both preserve the (lambda,t,m,d)-net property of the input.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import rng
from ._directions import JOE_KUO_6, MAX_DIMENSION
from .errors import (
    BudgetExceededError,
    UnsupportedDimensionError,
    ValidationError,
)

GENERATOR_BITS = 32   # resolution of generated Sobol' integers
SCRAMBLE_DEPTH = 53   # digits kept by randomizations; deeper digits are
                      # invisible in a float64 mantissa

_U = np.uint64


@dataclass(frozen=True)
class NetParams:
    """Parameters of a (lambda, t, m, d)-net in base b."""

    b: int
    lam: int
    t: int
    m: int
    d: int

    def __post_init__(self):
        if self.b < 2:
            raise ValidationError(f"base must be >= 2, got {self.b}")
        if not 1 <= self.lam < self.b:
            raise ValidationError(f"lambda must satisfy 1 <= lambda < b, got {self.lam}")
        if not 0 <= self.t <= self.m:
            raise ValidationError(f"quality t must satisfy 0 <= t <= m, got t={self.t} m={self.m}")
        if self.d < 1:
            raise ValidationError(f"dimension must be >= 1, got {self.d}")

    @property
    def n(self) -> int:
        return self.lam * self.b**self.m


@dataclass(frozen=True)
class PointSet:
    """An ordered point set in [0,1)^d with provenance metadata."""

    points: np.ndarray
    generator: str
    seed: int | None = None
    randomization: str = "none"
    net: NetParams | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValidationError(f"points must be a non-empty n x d matrix, got shape {pts.shape}")
        if np.any(pts < 0.0) or np.any(pts >= 1.0):
            raise ValidationError("point coordinates must lie in [0, 1)")
        if self.randomization not in ("none", "digital-shift", "owen-scramble"):
            raise ValidationError(f"unknown randomization {self.randomization!r}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


# ---------------------------------------------------------------------------
# Sobol' generation (natural order)
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=8)
def _direction_integers(d: int) -> np.ndarray:
    """Direction integers V[k, j], k-th binary digit column for coordinate j.

    Coordinate 0 is the van der Corput sequence; coordinates 1..d-1 follow
    the classic recurrence m_k = 2 a_1 m_(k-1) ^ ... ^ 2^s m_(k-s) ^ m_(k-s)
    on the bundled initial values.
    """
    V = np.zeros((GENERATOR_BITS, d), dtype=np.uint64)
    for k in range(GENERATOR_BITS):
        V[k, 0] = 1 << (GENERATOR_BITS - 1 - k)
    for j in range(1, d):
        poly, m_init = JOE_KUO_6[j - 1]
        s = poly.bit_length() - 1
        a = [(poly >> (s - 1 - i)) & 1 for i in range(s - 1)]
        m = list(m_init)
        for k in range(s, GENERATOR_BITS):
            new = m[k - s] ^ (m[k - s] << s)
            for i in range(1, s):
                if a[i - 1]:
                    new ^= m[k - i] << i
            m.append(new)
        for k in range(GENERATOR_BITS):
            V[k, j] = m[k] << (GENERATOR_BITS - 1 - k)
    return V


def _sobol_integers(m: int, d: int) -> np.ndarray:
    """First 2^m Sobol' points as GENERATOR_BITS-bit integers, natural order."""
    n = 1 << m
    V = _direction_integers(d)
    x = np.zeros((n, d), dtype=np.uint64)
    idx = np.arange(n, dtype=np.uint64)
    for k in range(m):
        sel = ((idx >> _U(k)) & _U(1)).astype(bool)
        x[sel] ^= V[k]
    return x


def sobol_points(m: int, d: int) -> PointSet:
    """First 2^m points of the base-2 Sobol' sequence, in generation order.

    The sequence starts at the origin, so downstream users must tolerate
    the boundary point (plain estimators reject it, projected ones
    saturate it).

    Parameters
    ----------
    m : int
        Resolution; returns n = 2^m points.  0 <= m <= 26.
    d : int
        Dimension, limited to MAX_DIMENSION (64) by the bundled
        direction-number table.
    """
    if not 1 <= d <= MAX_DIMENSION:
        raise UnsupportedDimensionError(
            f"sobol_points supports 1 <= d <= {MAX_DIMENSION} "
            f"(bundled direction-number table), got d={d}"
        )
    if not 0 <= m <= 26:
        raise ValidationError(f"resolution m must be in [0, 26], got {m}")
    pts = _sobol_integers(m, d).astype(np.float64) * 2.0**-GENERATOR_BITS
    # t = 0 is exact for d <= 2 with this table; higher-dimensional quality
    # parameters are not recorded (check_net is the authority).
    net = NetParams(b=2, lam=1, t=0, m=m, d=d) if d <= 2 else None
    return PointSet(pts, generator="sobol", randomization="none", net=net)


# ---------------------------------------------------------------------------
# Randomizations
# ---------------------------------------------------------------------------

def _points_to_ints(points: np.ndarray) -> np.ndarray:
    """Truncate coordinates to SCRAMBLE_DEPTH binary digits."""
    return np.floor(points * 2.0**SCRAMBLE_DEPTH).astype(np.uint64)


def _ints_to_points(ints: np.ndarray) -> np.ndarray:
    return ints.astype(np.float64) * 2.0**-SCRAMBLE_DEPTH


class _ScramblePlan:
    """Per-coordinate prefix structure shared by every scramble seed.

    For each digit level l the flip bit depends only on the l-digit prefix
    of the original coordinate.  Levels where all prefixes are distinct can
    be served by one hash per point (its remaining digits are independent
    fair coins), so the plan stores per-level unique prefixes and inverse
    indices up to the first all-distinct level.
    """

    def __init__(self, ints: np.ndarray):
        self.n = ints.shape[0]
        self.ints = ints
        self.levels: list[tuple[np.ndarray, np.ndarray]] = []
        level = 0
        while level < SCRAMBLE_DEPTH:
            if level == 0:
                prefix = np.zeros_like(ints)
            else:
                prefix = ints >> _U(SCRAMBLE_DEPTH - level)
            uniq, inv = np.unique(prefix, return_inverse=True)
            if len(uniq) == self.n and level >= 1:
                break
            self.levels.append((uniq, inv.astype(np.intp)))
            level += 1
        self.tail_start = level


def _scramble_ints(plan: _ScramblePlan, seeds: list[int], coord: int) -> np.ndarray:
    """Nested-uniform-scramble one coordinate for several seeds at once.

    Returns a (len(seeds), n) uint64 array of SCRAMBLE_DEPTH-bit values.
    Output for a given seed does not depend on the batch composition.
    """
    coord_key = rng.mix_int((coord + 1) * 0xA24BAED4963EE407)
    rep_keys = np.array(
        [rng.mix_int(int(s) ^ coord_key) for s in seeds], dtype=np.uint64
    )[:, None]
    step = _U(0x632BE59BD9B4E019)
    flip = np.zeros((len(seeds), plan.n), dtype=np.uint64)
    for level, (uniq, inv) in enumerate(plan.levels):
        level_key = _U(rng.mix_int((level + 1) * rng.GOLDEN))
        table = rng.mix_u64((uniq[None, :] ^ level_key) + rep_keys * step)
        flip |= ((table & _U(1)) << _U(SCRAMBLE_DEPTH - 1 - level))[:, inv]
    # all prefixes distinct from tail_start on: one hash per point delivers
    # the remaining digits as independent bits
    tail_key = _U(rng.mix_int(0xD6E8FEB86659FD93))
    h = rng.mix_u64((plan.ints[None, :] ^ tail_key) + rep_keys * step)
    n_tail = SCRAMBLE_DEPTH - plan.tail_start
    flip |= h & ((_U(1) << _U(n_tail)) - _U(1))
    return plan.ints[None, :] ^ flip


def _require_unrandomized(p: PointSet, op: str) -> None:
    if p.randomization != "none":
        raise ValidationError(
            f"{op} requires an unrandomized point set (no double randomization); "
            f"got randomization={p.randomization!r}"
        )


def owen_scramble(p: PointSet, seed: int) -> PointSet:
    """Nested uniform scrambling, applied independently per coordinate."""
    _require_unrandomized(p, "owen_scramble")
    out = owen_scramble_batch(p, [seed])[0]
    return PointSet(out, generator=p.generator, seed=seed,
                    randomization="owen-scramble", net=p.net)


def owen_scramble_batch(p: PointSet, seeds: list[int]) -> np.ndarray:
    """Scramble with many seeds at once; returns float array (len(seeds), n, d).

    The per-coordinate prefix analysis is shared across seeds, which makes
    repetition sweeps much cheaper than calling owen_scramble in a loop.
    """
    _require_unrandomized(p, "owen_scramble")
    ints = _points_to_ints(p.points)
    cols = []
    for j in range(p.d):
        plan = _ScramblePlan(np.ascontiguousarray(ints[:, j]))
        cols.append(_ints_to_points(_scramble_ints(plan, seeds, j)))
    return np.stack(cols, axis=-1)


def _shift_vector(seed: int, d: int) -> np.ndarray:
    ints = np.array(
        [rng.derive_seed(seed, "digital-shift", j) for j in range(d)], dtype=np.uint64
    )
    return ints >> _U(64 - SCRAMBLE_DEPTH)


def _apply_digital_shift(points: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    ints = _points_to_ints(points)
    return _ints_to_points(ints ^ shifts[None, :].astype(np.uint64))


def digital_shift(p: PointSet, seed: int) -> PointSet:
    """XOR one random base-2 digital shift into every point."""
    _require_unrandomized(p, "digital_shift")
    out = _apply_digital_shift(p.points, _shift_vector(seed, p.d))
    return PointSet(out, generator=p.generator, seed=seed,
                    randomization="digital-shift", net=p.net)


# ---------------------------------------------------------------------------
# Quality checks
# ---------------------------------------------------------------------------

def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def check_net(p: PointSet, params: NetParams, budget: int = 50_000_000) -> bool:
    """Exhaustively verify the (lambda, t, m, d)-net property.

    True iff every elementary interval of volume b^(t-m) holds exactly
    lambda*b^t points and no interval of volume b^(t-m-1) holds more than
    b^t.  Intended for small cases (b=2, m <= 12, d <= 3); the enumeration
    cost is capped by `budget` point-cell operations.
    """
    if p.d != params.d:
        raise ValidationError(f"point set dimension {p.d} != params dimension {params.d}")
    if p.n != params.n:
        return False  # wrong cardinality can never satisfy the counting property
    b, t, m, d = params.b, params.t, params.m, params.d

    def shapes(digit_sum):
        return list(_compositions(digit_sum, d))

    coarse = shapes(m - t)
    fine = shapes(m - t + 1) if t <= m else []
    cost = (len(coarse) + len(fine)) * p.n
    if cost > budget:
        raise BudgetExceededError(
            f"check_net enumeration needs {cost} point-cell operations > budget {budget}"
        )

    def cell_counts(ks):
        idx = np.zeros(p.n, dtype=np.int64)
        ncells = 1
        for j, k in enumerate(ks):
            cells_j = b**k
            idx = idx * cells_j + np.floor(p.points[:, j] * cells_j).astype(np.int64)
            ncells *= cells_j
        return np.bincount(idx, minlength=ncells)

    want = params.lam * b**t
    for ks in coarse:
        if not np.all(cell_counts(ks) == want):
            return False
    cap = b**t
    for ks in fine:
        if np.max(cell_counts(ks)) > cap:
            return False
    return True


def star_discrepancy(p: PointSet) -> float:
    """Exact star discrepancy for d in {1, 2}.

    d=1 uses the order-statistic formula; d=2 enumerates the critical grid
    of anchored-box corners (coordinate values and 1), O(n^2) boxes.
    """
    if p.d == 1:
        x = np.sort(p.points[:, 0])
        n = p.n
        i = np.arange(1, n + 1)
        return float(np.max(np.maximum(x - (i - 1) / n, i / n - x)))
    if p.d == 2:
        return _star_discrepancy_2d(p.points)
    raise UnsupportedDimensionError(
        f"exact star discrepancy implemented for d <= 2 only, got d={p.d}"
    )


def _star_discrepancy_2d(pts: np.ndarray) -> float:
    n = pts.shape[0]
    xs = np.concatenate([np.unique(pts[:, 0]), [1.0]])
    ys = np.concatenate([np.unique(pts[:, 1]), [1.0]])
    # histogram over grid cells; every coordinate equals some xs/ys entry
    ix = np.searchsorted(xs, pts[:, 0])
    iy = np.searchsorted(ys, pts[:, 1])
    hist = np.zeros((len(xs), len(ys)), dtype=np.int64)
    np.add.at(hist, (ix, iy), 1)
    padded = np.zeros((len(xs) + 1, len(ys) + 1), dtype=np.int64)
    padded[1:, 1:] = hist.cumsum(axis=0).cumsum(axis=1)
    # box corner (xs[i], ys[j]):
    #   open count  #{p < corner}  = padded[i, j]
    #   closed count #{p <= corner} = padded[i+1, j+1]
    vol = xs[:, None] * ys[None, :]
    over = padded[1:, 1:] / n - vol
    under = vol - padded[:-1, :-1] / n
    return float(max(over.max(), under.max()))


# ---------------------------------------------------------------------------
# Dumps
# ---------------------------------------------------------------------------

def dump_points_csv(p: PointSet, path) -> None:
    """Write one row per point, header dim0,...,dim{d-1}, 17 significant digits."""
    header = ",".join(f"dim{j}" for j in range(p.d))
    np.savetxt(path, p.points, fmt="%.17g", delimiter=",",
               header=header, comments="")
