"""Conjugacy of a map with integer spikes to its full-branch linearization.

The full-branch partition splits ``[0, 1]`` into intervals ``(a_i, b_i)``
that ``F_r`` maps monotonically onto ``(0, 1)`` with a constant jump. The
linearization ``g`` is affine on the same intervals, with the same
orientation. The homeomorphism ``h`` with ``g = h^-1 o f o h`` sends each
``g``-cylinder (points sharing the first ``n`` interval symbols) onto the
``f``-cylinder with the same itinerary; ``h_n`` interpolates linearly inside
depth-``n`` cylinders.

For maps with singularities the partition is infinite. Intervals with
``|jump| > M``, or too narrow to place in double precision, are kept as
unrefined residual gaps, identical for ``f`` and ``g``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .maps import eval_restricted, require_integer_spikes
from .walk import default_bound, partition_cells

MIN_WIDTH = 1e-13
SINGULAR_M = 1000
MAX_KNOTS = 2_000_000


@dataclass(frozen=True, eq=False)
class FullBranchPartition:
    """Full-branch intervals of ``F_r`` plus the unrefined residual gaps.

    ``a``, ``b``, ``jump``, ``orientation`` and ``branch`` describe the
    intervals in increasing order. ``gaps`` lists the residual intervals and
    ``residual`` their exact total length (from level-set offsets).
    """

    a: np.ndarray
    b: np.ndarray
    jump: np.ndarray
    orientation: np.ndarray
    branch: np.ndarray
    length: np.ndarray
    gaps: np.ndarray
    residual: float
    bound: int

    @property
    def intervals(self):
        return [(float(a), float(b), int(m), int(o))
                for a, b, m, o in zip(self.a, self.b, self.jump, self.orientation)]

    @property
    def lambda_points(self):
        return [tuple(g) for g in self.gaps]

    def __len__(self):
        return self.a.size

    @property
    def total(self):
        return math.fsum(self.length) + self.residual

    def locate(self, x):
        """Interval index containing ``x``; ``-1`` inside a residual gap."""
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.a, x, side="right") - 1, 0, self.a.size - 1)
        inside = (x >= self.a[i]) & (x <= self.b[i])
        return np.where(inside, i, -1)

    def g(self, x, i):
        """The linearization restricted to interval ``i``, as a value in ``[0, 1]``."""
        t = (x - self.a[i]) / (self.b[i] - self.a[i])
        return np.where(self.orientation[i] > 0, t, 1.0 - t)

    def g_inv(self, y, i):
        w = self.b[i] - self.a[i]
        return np.where(self.orientation[i] > 0, self.a[i] + y * w, self.b[i] - y * w)

    def f_inv(self, fmap, y, i):
        """Preimage of ``y`` in interval ``i`` under ``F_r``, vectorised over ``y``."""
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        for k in np.unique(i):
            sel = i == k
            br = fmap.branches[self.branch[k]]
            x = br.invert(y[sel] + self.jump[k])
            out[sel] = np.clip(x, self.a[k], self.b[k])
        # interval endpoints map to themselves exactly
        ends = (y == 0.0) | (y == 1.0)
        if ends.any():
            lo_end = (y == 0.0) == (self.orientation[i] > 0)
            out[ends] = np.where(lo_end, self.a[i], self.b[i])[ends]
        return out


def full_branch_partition(fmap, M=None, min_width=MIN_WIDTH):
    """Full-branch partition of ``F_r`` with jumps bounded by ``M``."""
    require_integer_spikes(fmap)
    finite = default_bound(fmap) < 10 ** 6
    if M is None:
        M = default_bound(fmap) if finite else SINGULAR_M
    cells = partition_cells(fmap, M)
    a, b = cells.positions(fmap)
    keep = (cells.length >= min_width) & (b > a)
    order = np.argsort(a[keep], kind="stable")
    a_k, b_k = a[keep][order], b[keep][order]
    # snap neighbours to share endpoints so the tiling has no rounding slivers
    close = np.abs(a_k[1:] - b_k[:-1]) < 1e-15
    a_k[1:][close] = b_k[:-1][close]
    edges_lo = np.concatenate([[0.0], b_k])
    edges_hi = np.concatenate([a_k, [1.0]])
    gap = edges_hi - edges_lo > 0
    gaps = np.column_stack([edges_lo[gap], edges_hi[gap]])
    residual = cells.tail_plus + cells.tail_minus + math.fsum(cells.length[~keep])
    orient = np.array([1 if fmap.branches[k].increasing else -1 for k in cells.branch[keep][order]],
                      dtype=np.int64)
    return FullBranchPartition(a_k, b_k, cells.jump[keep][order], orient, cells.branch[keep][order],
                               cells.length[keep][order], gaps, residual, int(M))


@dataclass(frozen=True, eq=False)
class HomeomorphismApprox:
    """``h_depth``: linear on depth-``depth`` cylinders, ``h(0)=0``, ``h(1)=1``.

    ``knots`` holds the cylinder endpoints ``(u, h(u))`` up to ``knot_depth``
    (the deepest level whose knot count stays below ``MAX_KNOTS``); calling
    the object evaluates ``h_depth`` exactly at any point.
    """

    fmap: object
    partition: FullBranchPartition
    depth: int
    knots: np.ndarray
    knot_depth: int
    gpartition: FullBranchPartition = None

    def __post_init__(self):
        if self.gpartition is None:
            object.__setattr__(self, "gpartition", self.partition)

    def __call__(self, u):
        return _evaluate_h(self, np.asarray(u, dtype=float))

    @property
    def max_cylinder_width(self):
        """Widest depth-``knot_depth`` ``f``-cylinder, an accuracy proxy for ``h``."""
        return float(np.max(np.diff(self.knots[:, 1])))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("u,h,h_minus_u\n")
            for u, v in self.knots.tolist():
                fh.write(f"{u!r},{v!r},{v - u!r}\n")


def _knot_pairs(fmap, part, gpart, depth):
    gends = np.unique(np.concatenate([[0.0, 1.0], gpart.a, gpart.b, gpart.gaps.ravel()]))
    fends = np.unique(np.concatenate([[0.0, 1.0], part.a, part.b, part.gaps.ravel()]))
    pairs = np.column_stack([gends, fends])
    level = 1
    n = part.a.size
    while level < depth and pairs.shape[0] * n <= MAX_KNOTS:
        inner = pairs[(pairs[:, 0] > 0) & (pairs[:, 0] < 1)]
        u = np.tile(inner[:, 0], n)
        v = np.tile(inner[:, 1], n)
        idx = np.repeat(np.arange(n), inner.shape[0])
        new = np.column_stack([gpart.g_inv(u, idx), part.f_inv(fmap, v, idx)])
        pairs = np.concatenate([pairs, new])
        pairs = pairs[np.argsort(pairs[:, 0], kind="stable")]
        keep = np.concatenate([[True], np.diff(pairs[:, 0]) > 0])
        pairs = pairs[keep]
        level += 1
    return pairs, level


def _same_symbols(part, gpart):
    return (part.a.size == gpart.a.size and part.gaps.shape == gpart.gaps.shape
            and np.array_equal(part.jump, gpart.jump)
            and np.array_equal(part.orientation, gpart.orientation))


def build_h(fmap, depth, M=None, linear=None):
    """Approximate the conjugating homeomorphism by cylinder matching.

    By default the linear side is the affine map on ``fmap``'s own full-branch
    intervals. ``linear`` may instead name a piecewise-linear map with the
    same symbolic structure (same jumps and orientations in the same order),
    giving the conjugacy from that map to ``fmap``.
    """
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    part = full_branch_partition(fmap, M)
    if part.a.size == 0:
        raise NumericalError("empty full-branch partition")
    gpart = part
    if linear is not None:
        if not linear.is_piecewise_linear:
            raise ConfigError("the linear reference map must be piecewise linear")
        gpart = full_branch_partition(linear, part.bound)
        if not _same_symbols(part, gpart):
            raise ConfigError("the linear reference map has a different full-branch structure")
        if not np.allclose(gpart.length, gpart.b - gpart.a, rtol=0, atol=1e-15) or gpart.gaps.size:
            raise ConfigError("the linear reference map must have a finite partition")
    knots, knot_depth = _knot_pairs(fmap, part, gpart, depth)
    if np.any(np.diff(knots[:, 1]) <= 0):
        raise NumericalError("cylinder images are not strictly increasing; depth too large "
                             "for double precision")
    return HomeomorphismApprox(fmap, part, int(depth), knots, knot_depth, gpart)


def _to_f_side(gpart, part, gl, gr, last, has, stopped, gi):
    """Base intervals on the ``f`` side matching the ``g`` side bases."""
    if gpart is part:
        return gl.copy(), gr.copy()
    fl, fr = np.zeros_like(gl), np.ones_like(gr)
    fl[has], fr[has] = part.a[last[has]], part.b[last[has]]
    if gi is not None:
        fl[stopped], fr[stopped] = part.gaps[gi, 0], part.gaps[gi, 1]
    return fl, fr


def _evaluate_h(h, u):
    part, gpart, fmap = h.partition, h.gpartition, h.fmap
    shape = u.shape
    u = u.ravel()
    n = u.size
    symbols = np.full((h.depth, n), -1, dtype=np.int64)
    x = u.copy()
    alive = np.ones(n, dtype=bool)
    for k in range(h.depth):
        idx = gpart.locate(x)
        alive &= idx >= 0
        symbols[k] = np.where(alive, idx, -1)
        if k + 1 < h.depth:
            x = np.where(alive, gpart.g(x, np.maximum(idx, 0)), x)
    # deepest resolved symbol and its interval (or the gap that stopped refinement)
    length = (symbols >= 0).sum(axis=0)
    gl, gr = np.zeros(n), np.ones(n)
    last = symbols[np.maximum(length - 1, 0), np.arange(n)]
    has = length > 0
    gl[has], gr[has] = gpart.a[last[has]], gpart.b[last[has]]
    stopped = (length < h.depth)
    if stopped.any() and gpart.gaps.size:
        # the point at depth ``length`` lies in a gap: use that gap as the cylinder base
        xs = u[stopped].copy()
        for k in range(h.depth):
            active = k < length[stopped]
            idx = symbols[k, stopped]
            xs = np.where(active, gpart.g(xs, np.maximum(idx, 0)), xs)
        gi = np.clip(np.searchsorted(gpart.gaps[:, 0], xs, side="right") - 1, 0, len(gpart.gaps) - 1)
        gl[stopped], gr[stopped] = gpart.gaps[gi, 0], gpart.gaps[gi, 1]
    fl, fr = _to_f_side(gpart, part, gl, gr, last, has, stopped, gi if stopped.any() and part.gaps.size else None)
    for k in range(h.depth - 1, -1, -1):
        step = (k < length - 1) | ((k < length) & stopped)
        if not step.any():
            continue
        idx = symbols[k, step]
        ga, gb = gpart.g_inv(gl[step], idx), gpart.g_inv(gr[step], idx)
        fa, fb = part.f_inv(fmap, fl[step], idx), part.f_inv(fmap, fr[step], idx)
        gl[step], gr[step] = np.minimum(ga, gb), np.maximum(ga, gb)
        fl[step], fr[step] = np.minimum(fa, fb), np.maximum(fa, fb)
    w = gr - gl
    t = np.where(w > 0, (u - gl) / np.where(w > 0, w, 1.0), 0.0)
    out = fl + np.clip(t, 0.0, 1.0) * (fr - fl)
    return out.reshape(shape) if shape else float(out[0])


def linearization(part, u):
    """``G_r(u)`` for the affine full-branch map; ``nan`` inside residual gaps."""
    u = np.asarray(u, dtype=float)
    idx = part.locate(u)
    return np.where(idx >= 0, part.g(u, np.maximum(idx, 0)), np.nan)


def _probes(n_probe):
    # stratified points with an irrational offset stay off dyadic and affine knots
    return (np.arange(n_probe) + 0.5 * (math.sqrt(5) - 1)) / n_probe


def conjugacy_residual(h, fmap, n_probe=10_000):
    """``max |h(G_r(u)) - F_r(h(u))|`` over probe points ``u``."""
    if n_probe < 1:
        raise ConfigError("n_probe must be >= 1")
    u = _probes(n_probe)
    gu = linearization(h.gpartition, u)
    ok = np.isfinite(gu)
    lhs = h(gu[ok])
    rhs = eval_restricted(fmap, h(u[ok]))
    d = np.abs(lhs - rhs)
    return float(np.max(d)) if d.size else 0.0


def itinerary(part, x, n, fmap=None):
    """First ``n`` interval symbols of ``x`` under ``F_r`` (or under ``g`` when ``fmap`` is None)."""
    x = np.asarray(x, dtype=float).copy()
    out = np.full((n,) + x.shape, -1, dtype=np.int64)
    for k in range(n):
        idx = part.locate(x)
        out[k] = idx
        if fmap is None:
            x = np.where(idx >= 0, part.g(x, np.maximum(idx, 0)), x)
        else:
            x = eval_restricted(fmap, x)
    return out


def sample_invariant(h, n, rng):
    """``n`` draws of ``h(U)`` with ``U`` uniform."""
    return h(rng.random(n))


def invariant_sampler(h, rng_seed=None, chunk=65536):
    """Endless stream of ``h(U)`` draws."""
    rng = np.random.default_rng(rng_seed)
    while True:
        yield from sample_invariant(h, chunk, rng)


def mass_concentration(h, n=4096):
    """Length of the shortest union of ``h``-image cells carrying 90% of ``h(U)``.

    About 0.9 when ``h(U)`` has a bounded density; close to 0 when the
    invariant distribution concentrates on a small set.
    """
    u = np.linspace(0.0, 1.0, n + 1)
    spacing = np.sort(np.diff(h(u)))
    return float(spacing[: int(0.9 * n)].sum())
