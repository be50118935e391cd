"""Transfer operators for the piecewise-linear family and Ulam estimates.

Two kinds of objects live here.

* Exact piecewise-constant calculus for ``example1(eps, delta)``: the
  Frobenius-Perron operator conditioned on not jumping (``fp_step``), its
  fixed point (``cond_invariant_density``) and the ``K_S`` functional ``psi``.
  Densities stay piecewise constant under these operators, so every quantity
  is computed on the exact breakpoint list, without sampling.
* Numerical invariant densities of ``F_r`` for arbitrary maps via Ulam's
  method, and the critical-orbit series for ``example1`` (``gora_density``).
"""
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, NumericalError, ValidationError
from .maps import eval_restricted, example1

_SNAP = 1e-13
_MERGE_TOL = 1e-14


# ------------------------------------------------------------------ densities

@dataclass(frozen=True, eq=False)
class PiecewiseConstantDensity:
    """Density taking ``values[i]`` on ``(breaks[i], breaks[i+1])``."""

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or b.size != v.size + 1:
            raise ConfigError("need len(breaks) == len(values) + 1")
        if b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ConfigError("breaks must increase strictly from 0 to 1")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ConfigError("density values must be finite and nonnegative")
        mass = float(np.dot(v, np.diff(b)))
        if abs(mass - 1.0) > 1e-10:
            raise ConfigError(f"density integrates to {mass!r}, not 1")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls):
        return cls(np.array([0.0, 1.0]), np.array([1.0]))

    @classmethod
    def two_piece(cls, x):
        """``x`` on ``(0, 1/2)`` and ``2 - x`` on ``(1/2, 1)``."""
        if not 0.0 <= x <= 2.0:
            raise ConfigError("x must lie in [0, 2]")
        return cls(np.array([0.0, 0.5, 1.0]), np.array([x, 2.0 - x]))

    @classmethod
    def from_unnormalized(cls, breaks, values):
        b = np.asarray(breaks, dtype=float)
        v = np.asarray(values, dtype=float)
        mass = float(np.dot(v, np.diff(b)))
        if not mass > 0:
            raise NumericalError("cannot normalise a density with zero mass")
        return cls(b, v / mass)

    @property
    def widths(self):
        return np.diff(self.breaks)

    @property
    def mass(self):
        return float(np.dot(self.values, self.widths))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, self.values.size - 1)
        out = self.values[idx]
        return out if out.ndim else float(out)

    def merged(self, tol=_MERGE_TOL):
        """Drop breakpoints between cells whose values agree within ``tol``."""
        v = self.values
        keep = np.abs(np.diff(v)) > tol * np.maximum(1.0, np.abs(v[1:]))
        b = np.concatenate([[0.0], self.breaks[1:-1][keep], [1.0]])
        starts = np.concatenate([[0], np.flatnonzero(keep) + 1])
        return PiecewiseConstantDensity(b, v[starts])

    def sup_distance(self, other):
        """Exact sup-norm distance: max over the cells of the common refinement."""
        b = np.union1d(self.breaks, other.breaks)
        mid = 0.5 * (b[:-1] + b[1:])
        return float(np.max(np.abs(self(mid) - other(mid))))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("break,value\n")
            for b, v in zip(self.breaks[:-1].tolist(), self.values.tolist()):
                fh.write(f"{b!r},{v!r}\n")
            fh.write(f"{float(self.breaks[-1])!r},\n")


def _snap(points):
    """Sorted unique points, collapsing clusters closer than ``_SNAP``."""
    p = np.sort(np.asarray(points, dtype=float))
    keep = np.concatenate([[True], np.diff(p) > _SNAP])
    return p[keep]


# ------------------------------------------------------------- hole operator

def _example1_pieces(eps, delta):
    e, d = float(eps), float(delta)
    return (
        (0.0, 0.25, 4.0 + e, 0.0),
        (0.25, 0.5, -(2.0 + e), (3.0 + e) / 2.0),
        (0.5, 0.75, -(2.0 + d), (3.0 + d) / 2.0),
        (0.75, 1.0, 4.0 + d, -(3.0 + d)),
    )


def _check_params(eps, delta, strict):
    for name, v in (("eps", eps), ("delta", delta)):
        if not math.isfinite(v) or v < 0 or (strict and v == 0):
            bound = "> 0" if strict else ">= 0"
            raise ConfigError(f"{name} must be {bound}, got {v!r}")


def fp_step(eps, delta, k):
    """One step of the operator conditioned on staying in ``[0, 1]``.

    Returns ``(k', C)`` where ``C`` is the mass of ``k`` that does not jump and
    ``k'`` is the normalised image density.
    """
    _check_params(eps, delta, strict=False)
    pieces = _example1_pieces(eps, delta)
    pts = [0.0, 1.0]
    for lo, hi, s, c in pieces:
        xs = np.concatenate([[lo, hi], k.breaks[(k.breaks > lo) & (k.breaks < hi)]])
        ys = s * xs + c
        pts.extend(ys[(ys > 0.0) & (ys < 1.0)])
    new_b = _snap(pts)
    new_b[0], new_b[-1] = 0.0, 1.0
    mid = 0.5 * (new_b[:-1] + new_b[1:])
    val = np.zeros_like(mid)
    for lo, hi, s, c in pieces:
        x = (mid - c) / s
        inside = (x > lo) & (x < hi)
        val[inside] += k(x[inside]) / abs(s)
    C = float(np.dot(val, np.diff(new_b)))
    if not C > 0:
        raise NumericalError("all mass escaped through the hole")
    out = PiecewiseConstantDensity(new_b, val / C).merged()
    return out, C


def hole_length(x):
    """Length of the part of one spike that is mapped outside ``[0, 1]``."""
    return x * (3.0 + x) / (2.0 * (x + 2.0) * (x + 4.0))


@dataclass(frozen=True)
class CondInvariantDensity:
    """``nu`` on ``(0, 1/2)`` and ``2 - nu`` on ``(1/2, 1)``."""

    nu: float
    epsilon: float
    delta: float
    residual: float = 0.0
    escape_mass: float = 0.0

    @property
    def density(self):
        return PiecewiseConstantDensity.two_piece(self.nu)

    def __call__(self, x):
        return self.density(x)


def cond_invariant_density(eps, delta):
    """Fixed point of :func:`fp_step` among two-piece densities.

    With ``k = (nu, 2 - nu)`` the image is again two-piece, and matching the
    value on ``(0, 1/2)`` gives ``nu (A + B) / 2 = A`` where ``A`` and ``B``
    are the unnormalised image values on the two halves. Both are affine in
    ``nu``, so this is a quadratic.
    """
    _check_params(eps, delta, strict=True)
    e, d = float(eps), float(delta)
    a1 = 1 / (4 + e) - 1 / (2 + d) - 1 / (4 + d)
    a0 = 2 / (2 + d) + 2 / (4 + d)
    b1 = 1 / (4 + e) + 1 / (2 + e) - 1 / (4 + d)
    b0 = 2 / (4 + d)
    qa = 0.5 * (a1 + b1)
    qb = 0.5 * (a0 + b0) - a1
    qc = -a0
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        raise NumericalError("no real root for the two-piece fixed point")
    q = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
    roots = [qc / q] + ([q / qa] if qa != 0 else [])
    admissible = [r for r in roots if -1e-12 <= r <= 2 + 1e-12]
    if not admissible:
        raise NumericalError(f"no root of the fixed-point quadratic in [0, 2]: {roots}")
    nu = min(max(admissible[0], 0.0), 2.0)
    k = PiecewiseConstantDensity.two_piece(nu)
    k1, C = fp_step(e, d, k)
    res = k1.sup_distance(k)
    if res > 1e-12:
        raise NumericalError(f"fixed-point check failed: residual {res:.3e}")
    return CondInvariantDensity(nu, e, d, res, 1.0 - C)


def _ks_split(k):
    """Return ``(b, k1, k2, k3)`` of a three-piece density, or None if two-piece."""
    v, inner = k.values, k.breaks[1:-1]
    changes = np.abs(np.diff(v)) > _MERGE_TOL * np.maximum(1.0, np.abs(v[1:]))
    extra = inner[(inner != 0.5) & changes]
    if extra.size == 0:
        return None
    if extra.size > 1:
        raise ValidationError("density is not of three-piece K_S form")
    b = float(extra[0])
    if b < 0.5:
        t = (b / 2, (b + 0.5) / 2, 0.75)
    else:
        t = (0.25, (0.5 + b) / 2, (b + 1) / 2)
    return (b,) + tuple(float(k(x)) for x in t)


def psi(k):
    """Gap between the two values inside the half that carries the extra break."""
    parts = _ks_split(k)
    if parts is None:
        return 0.0
    b, k1, k2, k3 = parts
    return abs(k1 - k2) if b < 0.5 else abs(k2 - k3)


def in_ks(k, S):
    """Whether ``k`` is a three-piece density with ``psi(k) <= S``."""
    try:
        return psi(k) <= S
    except ValidationError:
        return False


def convergence_check(eps, delta, x, n_max):
    """Sup-norm distances ``||P^n k - f_c||`` for ``n = 1..n_max`` from ``k = (x, 2-x)``."""
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    fc = cond_invariant_density(eps, delta).density
    k = PiecewiseConstantDensity.two_piece(x)
    out = np.empty(n_max)
    for n in range(n_max):
        k, _ = fp_step(eps, delta, k)
        out[n] = k.sup_distance(fc)
    return out


# ----------------------------------------------------------------------- Ulam

@dataclass(frozen=True, eq=False)
class UlamApproximation:
    """Cell-to-cell transition matrix and its stationary density."""

    grid: np.ndarray
    matrix: sp.csr_matrix
    stationary: np.ndarray
    iterations: int
    residual: float

    @property
    def grid_n(self):
        return self.stationary.size

    @property
    def widths(self):
        return np.diff(self.grid)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0, self.grid_n - 1)
        return self.stationary[idx]

    def as_density(self):
        return PiecewiseConstantDensity.from_unnormalized(self.grid, self.stationary)

    def average(self, a, b):
        """Mean density over ``(a, b)``, with partial cells weighted by overlap."""
        lo = np.clip(self.grid[:-1], a, b)
        hi = np.clip(self.grid[1:], a, b)
        return float(np.dot(self.stationary, hi - lo) / (b - a))

    def sample(self, n, rng):
        """``n`` draws from the stationary density by inverse-CDF sampling."""
        mass = self.stationary * self.widths
        cdf = np.concatenate([[0.0], np.cumsum(mass)])
        cdf /= cdf[-1]
        u = rng.random(n)
        idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, self.grid_n - 1)
        frac = (u - cdf[idx]) / np.where(mass[idx] > 0, cdf[idx + 1] - cdf[idx], 1.0)
        return self.grid[idx] + np.clip(frac, 0.0, 1.0) * self.widths[idx]

    def sampler(self, rng_seed=None, chunk=4096):
        rng = np.random.default_rng(rng_seed)
        while True:
            yield from self.sample(chunk, rng)


def critical_orbits(fmap, depth):
    """Forward ``F_r``-orbits of the one-sided limits at every breakpoint."""
    pts = []
    for br in fmap.branches:
        for v in (br.left_limit, br.right_limit):
            if not math.isfinite(v):
                continue
            x = v - math.floor(v)
            for _ in range(depth):
                pts.append(x)
                x = float(eval_restricted(fmap, x))
    return np.array(pts)


def ulam_grid(fmap, grid_n, orbit_depth=20, extra_points=()):
    """Uniform grid refined by breakpoints, critical orbits and ``extra_points``."""
    base = np.linspace(0.0, 1.0, grid_n + 1)
    add = np.concatenate([fmap.breakpoints, critical_orbits(fmap, orbit_depth) if orbit_depth else [],
                          np.asarray(extra_points, dtype=float)])
    add = add[(add > 0) & (add < 1)]
    # exact extra points win over nearby uniform points
    near = np.abs(base[:, None] - add[None, :]).min(axis=1) < 1e-12 if add.size else np.zeros(base.size, bool)
    near[[0, -1]] = False
    g = _snap(np.concatenate([base[~near], add]))
    g[0], g[-1] = 0.0, 1.0
    return g


def _branch_overlaps(br, grid, max_jump):
    """Source cell, target cell and overlap length for one branch."""
    lo_v, hi_v = br.image
    y_lo = lo_v if math.isfinite(lo_v) else -float(max_jump)
    y_hi = hi_v if math.isfinite(hi_v) else float(max_jump) + 1.0
    ks = np.arange(math.floor(y_lo), math.ceil(y_hi) + 1)
    ys = (ks[:, None] + grid[None, :]).ravel()
    ys = ys[(ys > y_lo) & (ys < y_hi)]
    if br.pieces:
        xs = []
        for a, b, s, c in br.pieces:
            x = (ys - c) / s
            xs.append(x[(x > a) & (x < b)])
        xs = np.concatenate(xs + [np.array([p[0] for p in br.pieces[1:]])])
    else:
        xs = br.invert(ys) if ys.size else np.empty(0)
    # points where the truncated image ends (singular endpoints only)
    cut = [br.invert(np.array([v]))[0] for v, lim in ((y_lo, lo_v), (y_hi, hi_v)) if not math.isfinite(lim)]
    src = grid[(grid > br.lo) & (grid < br.hi)]
    pts = _snap(np.concatenate([[br.lo, br.hi], xs[np.isfinite(xs)], src, cut]))
    pts = pts[(pts >= br.lo) & (pts <= br.hi)]
    a, b = pts[:-1], pts[1:]
    mid = 0.5 * (a + b)
    w = b - a
    with np.errstate(all="ignore"):
        v = br.func(mid)
    fin = np.isfinite(v) & (v >= y_lo) & (v <= y_hi)
    nc = grid.size - 1
    i = np.clip(np.searchsorted(grid, mid, side="right") - 1, 0, nc - 1)
    y = v[fin] - np.floor(v[fin])
    j = np.clip(np.searchsorted(grid, y, side="right") - 1, 0, nc - 1)
    rows, cols, vals = [i[fin]], [j], [w[fin]]
    # pieces beyond the truncation cover [0, 1) many times: spread uniformly
    if (~fin).any():
        cw = np.diff(grid)
        for src_i, wt in zip(i[~fin], w[~fin]):
            rows.append(np.full(nc, src_i))
            cols.append(np.arange(nc))
            vals.append(wt * cw)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def ulam_invariant_density(fmap, grid_n=4000, orbit_depth=20, extra_points=(), tol=1e-12,
                           max_iter=100_000, max_jump=64, grid=None):
    """Ulam approximation of the invariant density of ``F_r``.

    Entry ``(i, j)`` of the matrix is the fraction of cell ``i`` mapped into
    cell ``j``, computed from exact preimages of the cell edges (closed-form
    on linear pieces, root finding otherwise). The grid is uniform with
    ``grid_n`` cells, refined by the forward orbits of the one-sided limits at
    the breakpoints, where the density has its jumps.
    """
    if grid_n < 16:
        raise ConfigError("grid_n must be >= 16")
    g = ulam_grid(fmap, grid_n, orbit_depth, extra_points) if grid is None else np.asarray(grid, float)
    nc = g.size - 1
    parts = [_branch_overlaps(br, g, max_jump) for br in fmap.branches]
    i, j, w = (np.concatenate([p[k] for p in parts]) for k in range(3))
    P = sp.csr_matrix((w, (i, j)), shape=(nc, nc))
    P.sum_duplicates()
    rs = np.asarray(P.sum(axis=1)).ravel()
    if np.any(rs <= 0):
        raise NumericalError("a grid cell has no image")
    P = sp.diags(1.0 / rs) @ P
    P = sp.csr_matrix(P)
    PT = P.T.tocsr()
    v = np.diff(g).copy()
    res = math.inf
    for it in range(1, max_iter + 1):
        v2 = PT @ v
        v2 /= v2.sum()
        res = float(np.abs(v2 - v).sum())
        v = v2
        if res < tol:
            break
    else:
        raise NumericalError(f"power iteration did not converge in {max_iter} steps (residual {res:.2e})")
    return UlamApproximation(g, P, v / np.diff(g), it, res)


# ------------------------------------------------------- critical-orbit series

@dataclass(frozen=True, eq=False)
class GoraDensity:
    """Truncated critical-orbit series for the invariant density of ``example1``.

    Each term is a window ``[0, A]`` or ``[A, 1]`` with weight
    ``D / |beta|``; ``K`` normalises the total to 1.
    """

    epsilon: float
    delta: float
    D: tuple
    n_terms: int
    anchors: np.ndarray
    lower: np.ndarray
    weights: np.ndarray
    betas: np.ndarray
    K: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        inside = np.where(self.lower[None, :], flat[:, None] <= self.anchors[None, :],
                          flat[:, None] >= self.anchors[None, :])
        out = (1.0 + inside.astype(float) @ self.weights) / self.K
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def as_density(self):
        b = _snap(np.concatenate([[0.0, 1.0], self.anchors]))
        b[0], b[-1] = 0.0, 1.0
        return PiecewiseConstantDensity.from_unnormalized(b, self(0.5 * (b[:-1] + b[1:])))


def _slope(pieces, x, side):
    """Slope of the piece containing ``x``; ``side`` picks the piece at a boundary."""
    for lo, hi, s, _ in pieces:
        if lo < x < hi or (side > 0 and x == lo) or (side < 0 and x == hi):
            return s
    return pieces[-1][2] if x >= 1.0 else pieces[0][2]


def gora_density(eps, delta, D=(1.0, 1.0, 1.0, 1.0), n_terms=20):
    """Evaluate the critical-orbit series with constants ``D = (D1L, D1R, D2L, D2R)``.

    ``L`` terms follow the right-hand neighbourhood of ``c_j`` and ``R`` terms
    the left-hand one. A neighbourhood mapped onto the left of its orbit point
    contributes on ``[0, A]``, otherwise on ``[A, 1]``.
    """
    _check_params(eps, delta, strict=True)
    if n_terms < 1:
        raise ConfigError("n_terms must be >= 1")
    D = tuple(float(v) for v in D)
    if len(D) != 4:
        raise ConfigError("D must have four entries (D1L, D1R, D2L, D2R)")
    fmap = example1(eps, delta)
    pieces = _example1_pieces(eps, delta)
    inner = (0.25, 0.5, 0.75)
    anchors, lower, weights, betas = [], [], [], []
    for j, c in enumerate((0.25, 0.75)):
        for side, dconst in ((+1, D[2 * j]), (-1, D[2 * j + 1])):
            lo, hi, sl, ic = next(p for p in pieces if (p[0] if side > 0 else p[1]) == c)
            v = sl * c + ic
            x = v - math.floor(v)
            beta = _slope(pieces, c, side)
            for n in range(1, n_terms + 1):
                if n > 1:
                    s = _slope(pieces, x, +1)
                    beta *= s
                    x = float(eval_restricted(fmap, x))
                if x in inner or x <= 0.0 or x >= 1.0:
                    warnings.warn(f"critical orbit hit the breakpoint {x!r}; perturbed by 1e-15",
                                  RuntimeWarning, stacklevel=2)
                    x = min(max(x + 1e-15, 1e-15), 1 - 1e-15)
                # right neighbourhood: the image lies left of x when beta < 0
                lies_left = beta < 0 if side > 0 else beta > 0
                anchors.append(x)
                lower.append(lies_left)
                weights.append(dconst / abs(beta))
                betas.append(beta)
    anchors = np.array(anchors)
    lower = np.array(lower)
    weights = np.array(weights)
    lengths = np.where(lower, anchors, 1.0 - anchors)
    K = 1.0 + float(np.dot(weights, lengths))
    return GoraDensity(float(eps), float(delta), D, int(n_terms), anchors, lower, weights,
                       np.array(betas), K)


# ------------------------------------------------------ reference comparisons

#: Published three-decimal values of the invariant density of
#: ``example1(0.01, 0.01)``, keyed by ``(start, end)`` of each interval as
#: (orbit side, index) pairs; ``None`` stands for the end point 0 or 1.
REFERENCE_DENSITY_001 = (
    ((None, 0), ("0", 0), "(0, eps/4)", 1.959),
    (("0", 0), ("0", 1), "(0.0025, 0.01)", 1.224),
    (("0", 1), ("0", 2), "(0.01, 0.04)", 1.041),
    (("0", 2), ("0", 3), "(0.04, 0.161)", 0.995),
    (("0", 3), ("0", 5), "(0.161, 0.206)", 0.984),
    (("0", 5), ("1", 4), "(0.206, 0.354)", 0.986),
    (("1", 4), ("0", 4), "(0.354, 0.646)", 0.988),
    (("0", 4), ("1", 5), "(0.646, 0.794)", 0.986),
    (("1", 5), ("1", 3), "(0.794, 0.839)", 0.984),
    (("1", 3), ("1", 2), "(0.839, 0.96)", 0.995),
    (("1", 2), ("1", 1), "(0.96, 0.99)", 1.041),
    (("1", 1), ("1", 0), "(0.99, 0.9975)", 1.224),
    (("1", 0), (None, 1), "(1-eps/4, 1)", 1.959),
)


def spike_orbits(eps, delta, n):
    """Orbits of ``{F(1/4)}`` and ``{F(3/4)}`` under ``F_r``, ``n`` points each."""
    fmap = example1(eps, delta)
    out = []
    for x in (eps / 4.0, 1.0 - delta / 4.0):
        o = []
        for _ in range(n):
            o.append(x)
            x = float(eval_restricted(fmap, x))
        out.append(np.array(o))
    return out


def reference_table(grid_n=4000, eps=0.01):
    """Ulam averages over the reference intervals, with exact orbit endpoints."""
    o = spike_orbits(eps, eps, 8)
    ends = {"0": o[0], "1": o[1]}

    def point(p):
        tag, k = p
        return float(k) if tag is None else float(ends[tag][k])

    intervals = [(point(a), point(b), label, val) for a, b, label, val in REFERENCE_DENSITY_001]
    approx = ulam_invariant_density(example1(eps, eps), grid_n,
                                    extra_points=[x for a, b, _, _ in intervals for x in (a, b)])
    rows = []
    for a, b, label, val in intervals:
        got = approx.average(a, b)
        rows.append({"interval": label, "start": a, "end": b, "reference_value": val,
                     "computed_value": got, "abs_error": abs(got - val)})
    return rows


def reference_table_json(rows, path=None):
    text = json.dumps(rows, indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def small_parameter_intervals(eps, n_max):
    """Intervals on which the density is ``1 + 4^-n`` for small ``eps = delta``.

    ``n = 0`` is ``(0, eps/4)``; for ``n >= 1`` the interval runs between
    consecutive points of the orbit of ``{F(1/4)}``. Each comes with its
    mirror image about ``1/2``.
    """
    o = spike_orbits(eps, eps, n_max + 1)[0]
    out = []
    for n in range(n_max + 1):
        a = 0.0 if n == 0 else float(o[n - 1])
        b = float(o[n])
        out.append((n, (a, b), (1.0 - b, 1.0 - a), 1.0 + 4.0 ** -n))
    return out
