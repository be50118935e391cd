"""Trajectories, the integer-part cocycle and jump probabilities.

Orbits are carried in skew-product form ``(F_r^n(x), phi_F(x, n))``. Positions
are reported as ``fractional + cocycle``; iterating ``F`` on the real line
directly would discard low-order bits of the fractional part every time the
integer part grows, so the skew form is the numerically faithful one.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ConfigError, NumericalError
from .maps import eval_restricted, evaluate, jump, require_integer_spikes

DEFAULT_SINGULAR_M = 10 ** 6


@dataclass(frozen=True)
class WalkRecord:
    """One orbit: positions ``x_n``, ``F_r^n(x0)`` and ``phi_F(x0, n)``."""

    x0: float
    positions: np.ndarray
    fractional: np.ndarray
    cocycle: np.ndarray
    singular_hit: object = None

    @property
    def increments(self):
        return np.diff(self.cocycle)

    def to_csv(self, path):
        rows = np.column_stack([np.arange(self.positions.size), self.positions, self.fractional, self.cocycle])
        with open(path, "w") as fh:
            fh.write("step,position,fractional,cocycle\n")
            for k, p, f, c in rows.tolist():
                fh.write(f"{int(k)},{p!r},{f!r},{int(c)}\n")


class SkewState(tuple):
    """``(x, m)`` pair returned by :func:`skew_step`; ``singular`` flags an infinite value."""

    def __new__(cls, x, m, singular=False):
        obj = super().__new__(cls, (x, m))
        obj.singular = singular
        return obj


def skew_step(fmap, x, m):
    """One step of ``F_s(x, m) = (F_r(x), m + floor(F(x)))``."""
    v = evaluate(fmap, x)
    if not math.isfinite(v):
        return SkewState(0.0, int(m), True)
    j = math.floor(v)
    return SkewState(v - j, int(m) + j, False)


def iterate(fmap, x0, n):
    """Iterate ``n`` steps from ``x0``.

    After a singular value the cocycle is 0 from that step on, the fractional
    orbit continues from ``F_r = 0`` and ``singular_hit`` records the index of
    the step whose evaluation was infinite.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    x0 = float(x0)
    frac = np.empty(n + 1)
    coc = np.zeros(n + 1, dtype=np.int64)
    pos = np.empty(n + 1)
    frac[0], pos[0] = x0, x0
    hit = None
    x, m = x0, 0
    inf_val = None
    for k in range(n):
        st = skew_step(fmap, x, m)
        x, m = st
        if st.singular and hit is None:
            hit = k
            inf_val = evaluate(fmap, frac[k])
        frac[k + 1] = x
        coc[k + 1] = 0 if hit is not None else m
        pos[k + 1] = inf_val if hit is not None else x + m
    return WalkRecord(x0, pos, frac, coc, hit)


def orbit_increments(fmap, x0, n_steps):
    """Increments ``Z_1..Z_n`` for many starting points at once.

    Returns ``(Z, singular)`` where ``Z`` has shape ``(len(x0), n_steps)`` and
    ``singular`` marks orbits that met an infinite value.
    """
    x = np.array(x0, dtype=float, copy=True).ravel()
    z = np.zeros((x.size, n_steps), dtype=np.int64)
    sing = np.zeros(x.size, dtype=bool)
    for k in range(n_steps):
        m, s = jump(fmap, x)
        z[:, k] = m
        sing |= s
        x = eval_restricted(fmap, x)
    z[sing] = 0
    return z, sing


# -------------------------------------------------------------- partitions

@dataclass(frozen=True)
class PartitionCells:
    """Intervals of constant ``floor(F)`` obtained from level-set preimages.

    Endpoints are stored as ``(side, offset)`` pairs relative to the branch
    (see :meth:`MonotoneBranch.level_points`), so lengths near singular
    endpoints are exact differences of small numbers.
    """

    branch: np.ndarray
    left_side: np.ndarray
    left_off: np.ndarray
    right_side: np.ndarray
    right_off: np.ndarray
    jump: np.ndarray
    length: np.ndarray
    tail_plus: float
    tail_minus: float
    bound: int

    def positions(self, fmap):
        lo = np.array([fmap.branches[b].lo for b in self.branch])
        hi = np.array([fmap.branches[b].hi for b in self.branch])
        a = np.where(self.left_side == 0, lo + self.left_off, hi - self.left_off)
        b = np.where(self.right_side == 0, lo + self.right_off, hi - self.right_off)
        return a, b


def _span(width, s0, d0, s1, d1):
    """Lengths between points given as (side, offset) within one branch."""
    return np.where(s0 == s1, np.abs(d1 - d0), width - d0 - d1)


def _branch_cells(br, M):
    """Cells of one branch as arrays; ``tail`` is 0 (none), +1 or -1."""
    lo_v, hi_v = br.image
    first = math.floor(lo_v) + 1 if math.isfinite(lo_v) else -M
    last = math.ceil(hi_v) - 1 if math.isfinite(hi_v) else M + 1
    first_clamped = first < -M or not math.isfinite(lo_v)
    last_clamped = last > M + 1 or not math.isfinite(hi_v)
    first = max(first, -M)
    last = min(last, M + 1)
    levels = np.arange(first, last + 1, dtype=np.int64) if last >= first else np.empty(0, np.int64)
    if levels.size:
        side, off = br.level_points(levels.astype(float))
    else:
        side, off = np.empty(0, np.int64), np.empty(0)
    ok = np.isfinite(off)
    if levels.size and not ok.all():
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            raise NumericalError(f"no integer level resolvable on branch ({br.lo}, {br.hi})")
        if not np.all(np.diff(idx) == 1):
            raise NumericalError(f"level preimages failed inside branch ({br.lo}, {br.hi})")
        first_clamped |= idx[0] > 0
        last_clamped |= idx[-1] < levels.size - 1
        levels, side, off = levels[idx], side[idx], off[idx]
    n = levels.size
    if n == 0:
        v = float(br.func(np.array([br.lo + 0.5 * br.width]))[0])
        one = np.array
        return (one([0]), one([0.0]), one([1]), one([0.0]), one([math.floor(v)]),
                one([br.width]), one([0]))
    if not br.increasing:
        levels, side, off = levels[::-1], side[::-1], off[::-1]
    bs = np.concatenate([[0], side, [1]]).astype(np.int64)
    bo = np.concatenate([[0.0], off, [0.0]])
    length = _span(br.width, bs[:-1], bo[:-1], bs[1:], bo[1:])
    tail = np.zeros(n + 1, dtype=np.int64)
    if br.increasing:
        jumps = np.concatenate([[levels[0] - 1], levels])
        if first_clamped:
            tail[0] = -1
        if last_clamped:
            tail[-1] = 1
    else:
        jumps = np.concatenate([levels, [levels[-1] - 1]])
        if last_clamped:
            tail[0] = 1
        if first_clamped:
            tail[-1] = -1
    return bs[:-1], bo[:-1], bs[1:], bo[1:], jumps, length, tail


def partition_cells(fmap, M=None):
    """Split every branch at the preimages of the integers it crosses.

    Cells whose jump exceeds ``M`` in absolute value (or whose levels cannot
    be resolved in double precision) are not enumerated; their total lengths
    are returned as ``tail_plus`` / ``tail_minus``.
    """
    if M is None:
        M = default_bound(fmap)
    M = int(M)
    if M < 1:
        raise ConfigError("truncation bound M must be >= 1")
    parts = []
    tail_plus = tail_minus = 0.0
    for b, br in enumerate(fmap.branches):
        ls, lo_, rs, ro, m, length, tail = _branch_cells(br, M)
        tail = np.where((tail == 0) & (m > M), 1, np.where((tail == 0) & (m < -M), -1, tail))
        tail_plus += math.fsum(length[tail == 1])
        tail_minus += math.fsum(length[tail == -1])
        keep = tail == 0
        parts.append((np.full(int(keep.sum()), b, dtype=np.int64), ls[keep], lo_[keep],
                      rs[keep], ro[keep], m[keep], length[keep]))
    cols = [np.concatenate([p[i] for p in parts]) for i in range(7)]
    return PartitionCells(
        branch=cols[0], left_side=cols[1].astype(np.int64), left_off=cols[2].astype(float),
        right_side=cols[3].astype(np.int64), right_off=cols[4].astype(float),
        jump=cols[5].astype(np.int64), length=cols[6].astype(float),
        tail_plus=tail_plus, tail_minus=tail_minus, bound=M,
    )


def default_bound(fmap):
    """Truncation bound: everything for bounded maps, 10^6 for singular ones."""
    lo, hi = (min(b.image[0] for b in fmap.branches), max(b.image[1] for b in fmap.branches))
    if math.isfinite(lo) and math.isfinite(hi):
        return max(1, int(max(abs(math.floor(lo)), abs(math.ceil(hi)))) + 1)
    return DEFAULT_SINGULAR_M


# -------------------------------------------------------- transition tables

@dataclass(frozen=True)
class TransitionTable:
    """Jump probabilities ``p_m`` with the mass beyond ``|m| > truncation_bound``."""

    entries: dict
    truncation_bound: int
    tail_mass: float
    tail_plus: float = 0.0
    tail_minus: float = 0.0
    n_samples: object = None
    extra: dict = field(default_factory=dict)

    def __getitem__(self, m):
        return self.entries.get(int(m), 0.0)

    @property
    def total(self):
        return math.fsum(self.entries.values()) + self.tail_mass

    def arrays(self):
        ms = np.array(sorted(self.entries), dtype=np.int64)
        return ms, np.array([self.entries[int(m)] for m in ms])

    def mean(self):
        ms, ps = self.arrays()
        return float(np.dot(ms, ps))

    def variance(self):
        ms, ps = self.arrays()
        mu = np.dot(ms, ps)
        return float(np.dot((ms - mu) ** 2, ps))

    def standard_errors(self):
        if not self.n_samples:
            raise ConfigError("standard errors need an empirical table")
        return {m: math.sqrt(p * (1 - p) / self.n_samples) for m, p in self.entries.items()}


def transition_table(fmap, M=None, check=True):
    """Exact ``p_m = lambda{x in [0,1]: floor(F(x)) = m}`` for ``|m| <= M``.

    The map must have integer spikes. Mass of jumps beyond ``M`` (and of
    level sets too close to a singularity to resolve) is kept in ``tail_mass``.
    """
    if check:
        require_integer_spikes(fmap)
    cells = partition_cells(fmap, M)
    sums = {}
    if cells.jump.size:
        uniq, inv = np.unique(cells.jump, return_inverse=True)
        tot = np.bincount(inv, weights=cells.length, minlength=uniq.size)
        sums = dict(zip(uniq.tolist(), tot.tolist()))
    tail = cells.tail_plus + cells.tail_minus
    return TransitionTable(sums, cells.bound, tail, cells.tail_plus, cells.tail_minus)


def _resolve_sampler(sampler):
    if sampler is None or sampler == "uniform":
        return lambda rng, n: rng.random(n)
    if callable(sampler):
        return sampler
    raise ConfigError(f"unknown sampler {sampler!r}")


def empirical_transitions(fmap, sampler="uniform", n_samples=10 ** 6, rng_seed=0):
    """Monte Carlo frequencies of ``floor(F(x))`` for ``x`` drawn from ``sampler``.

    ``sampler`` is ``"uniform"`` or a callable ``(rng, n) -> points``. Draws
    that land on a singular value are excluded and counted in ``extra``.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    x = _resolve_sampler(sampler)(rng, int(n_samples))
    m, sing = jump(fmap, x)
    m = m[~sing]
    vals, counts = np.unique(m, return_counts=True)
    n = m.size
    entries = {int(v): c / n for v, c in zip(vals, counts)}
    bound = int(np.abs(vals).max()) if vals.size else 0
    return TransitionTable(entries, bound, 0.0, n_samples=n, extra={"singular": int(sing.sum())})


# ------------------------------------------------------------ independence

BIN_LABELS = ("<=-2", "-1", "0", "1", ">=2")


@dataclass(frozen=True)
class IndependenceReport:
    """Test of ``Z_{n+1}`` independent of ``Z_n`` on binned consecutive increments.

    ``statistic`` is the likelihood-ratio (G) chi-square statistic, the
    standard test of Markov order 0 against order 1; the Pearson statistic is
    reported alongside. ``quantile_999`` is the 0.999 quantile of the
    chi-square reference with ``df`` degrees of freedom.
    """

    statistic: float
    pearson: float
    df: int
    pvalue: float
    quantile_999: float
    n_pairs: int
    table: np.ndarray
    sparse_cells: int
    note: str = ""

    @property
    def independent(self):
        return self.statistic < self.quantile_999

    def as_dict(self):
        return {
            "statistic": self.statistic, "pearson": self.pearson, "df": self.df,
            "pvalue": self.pvalue, "quantile_999": self.quantile_999,
            "n_pairs": self.n_pairs, "independent": self.independent,
            "bins": list(BIN_LABELS), "table": self.table.tolist(),
            "sparse_cells": self.sparse_cells, "note": self.note,
        }


def _bin(z):
    return np.clip(z, -2, 2) + 2


def independence_from_increments(z):
    """Independence test on an ``(n_paths, n_steps)`` array of increments."""
    z = np.asarray(z)
    if z.ndim != 2 or z.shape[1] < 2:
        raise ConfigError("need at least two steps per path")
    a = _bin(z[:, :-1]).ravel()
    b = _bin(z[:, 1:]).ravel()
    table = np.zeros((5, 5), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    rows = table.sum(1) > 0
    cols = table.sum(0) > 0
    sub = table[np.ix_(rows, cols)]
    n = int(table.sum())
    if sub.shape[0] < 2 or sub.shape[1] < 2:
        return IndependenceReport(0.0, 0.0, 0, 1.0, 0.0, n, table, 0,
                                  note="a single increment class; independence holds trivially")
    g, p, df, expected = stats.chi2_contingency(sub, correction=False, lambda_="log-likelihood")
    pearson = stats.chi2_contingency(sub, correction=False)[0]
    sparse = int((expected < 5).sum())
    note = f"{sparse} cells with expected count below 5" if sparse else ""
    return IndependenceReport(float(g), float(pearson), int(df), float(p),
                              float(stats.chi2.ppf(0.999, df)), n, table, sparse, note)


def increment_independence_test(fmap, sampler="uniform", n_steps=10, n_paths=10 ** 5, rng_seed=0):
    """Draw ``n_paths`` initial points, iterate ``n_steps`` and test independence."""
    if n_steps < 2:
        raise ConfigError("n_steps must be >= 2")
    rng = np.random.default_rng(rng_seed)
    x0 = _resolve_sampler(sampler)(rng, int(n_paths))
    z, sing = orbit_increments(fmap, x0, n_steps)
    return independence_from_increments(z[~sing])
