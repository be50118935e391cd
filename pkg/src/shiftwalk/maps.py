"""Shift-periodic interval maps.

A shift-periodic map satisfies ``F(x + 1) = F(x) + 1`` and is described by
its restriction to ``[0, 1]``, given as an ordered list of monotone branches.
Values may be infinite at branch endpoints; IEEE ``inf`` plays the role of
the symbolic infinities and is only ever passed through, never combined
with finite numbers except through the shift rule.
"""
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .errors import ConfigError

#: distance to a singular point below which the value is reported infinite
SINGULAR_EPS = 1e-300

#: smallest offset tried when resolving level sets near an endpoint
_MIN_OFFSET = 1e-300
_BISECT_ITERS = 72
_GRID_POINTS = 4096
_ILLINOIS_ITERS = 60
_T_TOL = 2e-15


def _as_array(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class MonotoneBranch:
    """Continuous strictly monotone piece of a map on ``(lo, hi)``.

    Parameters
    ----------
    lo, hi : float
        Endpoints, ``0 <= lo < hi <= 1``.
    func : callable
        Vectorised evaluation on points of ``(lo, hi)``.
    increasing : bool
        Orientation of the branch.
    left_limit, right_limit : float
        One-sided limits at ``lo`` and ``hi`` (may be ``+-inf``).
    inverse : callable, optional
        Vectorised inverse on the open image. Bisection is used otherwise.
    offset_func : callable, optional
        ``offset_func(side, d)`` returns ``F(lo + d)`` for ``side == 0`` and
        ``F(hi - d)`` for ``side == 1``. Supplying it lets level sets be
        resolved closer to an endpoint than floating point positions allow.
    pieces : tuple
        ``(a, b, slope, intercept)`` tuples when the branch is piecewise linear.
    """

    lo: float
    hi: float
    func: object
    increasing: bool
    left_limit: float
    right_limit: float
    inverse: object = None
    offset_func: object = None
    pieces: tuple = ()

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ConfigError(f"branch endpoints must satisfy 0 <= lo < hi <= 1, got ({self.lo}, {self.hi})")

    def __call__(self, x):
        return self.func(_as_array(x))

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def image(self):
        """Open image interval ``(inf F, sup F)`` of the branch."""
        a, b = self.left_limit, self.right_limit
        return (a, b) if a < b else (b, a)

    def at_offset(self, side, d):
        """Evaluate at ``lo + d`` (side 0) or ``hi - d`` (side 1)."""
        d = _as_array(d)
        if self.offset_func is not None:
            return self.offset_func(side, d)
        x = self.lo + d if side == 0 else self.hi - d
        return self.func(x)

    def level_points(self, levels):
        """Locate preimages of ``levels`` inside the branch.

        Returns ``(side, offset)`` arrays: the preimage is ``lo + offset`` for
        ``side == 0`` and ``hi - offset`` for ``side == 1``. Levels outside the
        open image, or too close to an infinite limit to be resolved, give
        ``nan`` offsets.
        """
        y = np.atleast_1d(_as_array(levels))
        half = 0.5 * self.width
        fmid = float(self.func(np.array([self.lo + half]))[0])
        if self.increasing:
            side = np.where(y < fmid, 0, 1)
        else:
            side = np.where(y > fmid, 0, 1)
        offset = np.full(y.shape, np.nan)
        for s in (0, 1):
            sel = side == s
            if sel.any():
                offset[sel] = self._bisect_offset(s, y[sel], half)
        exact = y == fmid
        offset[exact] = half
        return side, offset

    def _bisect_offset(self, side, y, half):
        """Solve ``F(offset) = y`` in ``t = log(offset)``.

        A log-spaced grid brackets every level, then Illinois regula falsi on
        ``asinh(F)`` (close to linear in ``t`` near power-law singularities)
        shrinks the brackets; leftovers are finished by plain bisection.
        """
        sgn = 1.0 if (self.increasing if side == 0 else not self.increasing) else -1.0
        t_grid = np.linspace(math.log(_MIN_OFFSET), math.log(half), _GRID_POINTS)
        with np.errstate(all="ignore"):
            g_grid = sgn * np.arcsinh(self.at_offset(side, np.exp(t_grid)))
        g_grid = np.where(np.isnan(g_grid), -np.inf, g_grid)
        g_grid = np.maximum.accumulate(g_grid)
        target = sgn * np.arcsinh(y)
        k = np.searchsorted(g_grid, target, side="left")
        ok = (k > 0) & (k < t_grid.size) & np.isfinite(target)
        k = np.clip(k, 1, t_grid.size - 1)
        a, b = t_grid[k - 1], t_grid[k]
        ga, gb = g_grid[k - 1] - target, g_grid[k] - target

        def g(t):
            with np.errstate(all="ignore"):
                return sgn * np.arcsinh(self.at_offset(side, np.exp(t))) - target_act

        act = ok & (b - a > _T_TOL)
        for _ in range(_ILLINOIS_ITERS):
            if not act.any():
                break
            idx = np.flatnonzero(act)
            a_, b_, ga_, gb_ = a[idx], b[idx], ga[idx], gb[idx]
            target_act = target[idx]
            with np.errstate(all="ignore"):
                c = b_ - gb_ * (b_ - a_) / (gb_ - ga_)
            bad = ~np.isfinite(c) | (c <= np.minimum(a_, b_)) | (c >= np.maximum(a_, b_))
            c = np.where(bad, 0.5 * (a_ + b_), c)
            gc = g(c)
            flip = np.sign(gc) != np.sign(gb_)
            # Illinois: keep the bracket, halve the stale endpoint's value
            new_a = np.where(flip, b_, a_)
            new_ga = np.where(flip, gb_, 0.5 * ga_)
            hit = gc == 0
            new_a = np.where(hit, c, new_a)
            a[idx], ga[idx], b[idx], gb[idx] = new_a, new_ga, c, gc
            done = (np.abs(b[idx] - a[idx]) <= _T_TOL) | hit
            act[idx[done]] = False
        lo_t, hi_t = np.minimum(a, b), np.maximum(a, b)
        rest = ok & (hi_t - lo_t > _T_TOL)
        if rest.any():
            idx = np.flatnonzero(rest)
            lo_, hi_ = lo_t[idx], hi_t[idx]
            target_act = target[idx]
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo_ + hi_)
                below = g(mid) < 0
                lo_ = np.where(below, mid, lo_)
                hi_ = np.where(below, hi_, mid)
            lo_t[idx], hi_t[idx] = lo_, hi_
        out = np.exp(0.5 * (lo_t + hi_t))
        out[~ok] = np.nan
        return out

    def invert(self, y):
        """Position of the preimage of ``y`` (vectorised)."""
        y = _as_array(y)
        if self.inverse is not None:
            return self.inverse(y)
        side, off = self.level_points(y)
        x = np.where(side == 0, self.lo + off, self.hi - off)
        return x.reshape(y.shape)


def _piecewise_linear(pieces):
    pieces = tuple((float(a), float(b), float(s), float(c)) for a, b, s, c in pieces)

    def func(x):
        x = _as_array(x)
        out = np.empty_like(x)
        for k, (a, b, s, c) in enumerate(pieces):
            if len(pieces) == 1:
                sel = np.ones(x.shape, dtype=bool)
            elif k == 0:
                sel = x < b
            elif k == len(pieces) - 1:
                sel = x >= a
            else:
                sel = (x >= a) & (x < b)
            out = np.where(sel, s * x + c, out)
        return out

    ends = [(s * a + c, s * b + c) for a, b, s, c in pieces]

    def inverse(y):
        y = _as_array(y)
        out = np.full(y.shape, np.nan)
        for (a, b, s, c), (ya, yb) in zip(pieces, ends):
            lo_, hi_ = min(ya, yb), max(ya, yb)
            sel = (y >= lo_) & (y <= hi_) & np.isnan(out)
            out = np.where(sel, (y - c) / s, out)
        return out

    return pieces, func, inverse


def linear_branch(pieces):
    """Monotone branch made of consecutive linear pieces ``(a, b, slope, intercept)``."""
    pieces, func, inverse = _piecewise_linear(pieces)
    slopes = [p[2] for p in pieces]
    if not (all(s > 0 for s in slopes) or all(s < 0 for s in slopes)):
        raise ConfigError("linear pieces of one branch must share the sign of their slope")
    a0, _, s0, c0 = pieces[0]
    _, b1, s1, c1 = pieces[-1]
    return MonotoneBranch(
        lo=a0, hi=b1, func=func, increasing=slopes[0] > 0,
        left_limit=s0 * a0 + c0, right_limit=s1 * b1 + c1,
        inverse=inverse, pieces=pieces,
    )


@dataclass(frozen=True, eq=False)
class ShiftPeriodicMap:
    """A shift-periodic map given by its monotone branches on ``[0, 1]``."""

    branches: tuple
    name: str = "custom"
    params: object = field(default_factory=dict)

    def __post_init__(self):
        br = tuple(self.branches)
        if not br:
            raise ConfigError("a map needs at least one branch")
        if br[0].lo != 0.0 or br[-1].hi != 1.0:
            raise ConfigError("branches must start at 0 and end at 1")
        for a, b in zip(br[:-1], br[1:]):
            if a.hi != b.lo:
                raise ConfigError(f"branches must be contiguous, gap or overlap at {a.hi} / {b.lo}")
        object.__setattr__(self, "branches", br)
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @property
    def breakpoints(self):
        return np.array([b.lo for b in self.branches] + [1.0])

    @property
    def is_piecewise_linear(self):
        return all(b.pieces for b in self.branches)

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"ShiftPeriodicMap({self.name}({args}), {len(self.branches)} branches)"


def _eval_unit(fmap, y):
    """Evaluate on fractional parts ``y`` in ``[0, 1]``."""
    bp = fmap.breakpoints
    nb = len(fmap.branches)
    idx = np.clip(np.searchsorted(bp, y, side="right") - 1, 0, nb - 1)
    out = np.empty_like(y)
    for i, br in enumerate(fmap.branches):
        sel = idx == i
        if not sel.any():
            continue
        ys = y[sel]
        at_lo = ys == br.lo
        vals = np.empty_like(ys)
        inner = ~at_lo
        if inner.any():
            with np.errstate(all="ignore"):
                vals[inner] = br.func(ys[inner])
        # breakpoint convention: closure value of the right-hand branch
        vals[at_lo] = br.left_limit
        out[sel] = vals
    return out


def evaluate(fmap, x):
    """``F(x) = F({x}) + floor(x)``; infinite values are returned unchanged."""
    x = _as_array(x)
    flat = np.atleast_1d(x).ravel()
    fl = np.floor(flat)
    v = _eval_unit(fmap, flat - fl)
    out = np.where(np.isfinite(v), v + fl, v)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def eval_restricted(fmap, x):
    """Fractional part ``{F(x)}``, with 0 wherever ``F(x)`` is infinite."""
    v = _as_array(evaluate(fmap, x))
    with np.errstate(invalid="ignore"):
        out = np.where(np.isfinite(v), v - np.floor(v), 0.0)
    return out if out.ndim else float(out)


def jump(fmap, x):
    """Integer part ``floor(F(x))`` and a singular flag for infinite values."""
    v = _as_array(evaluate(fmap, x))
    fin = np.isfinite(v)
    with np.errstate(invalid="ignore"):
        m = np.where(fin, np.floor(v), 0.0).astype(np.int64)
    return m, ~fin


def image_bounds(fmap):
    """Infimum and supremum of ``F`` over ``[0, 1]`` (exact from branch limits)."""
    vals = [v for b in fmap.branches for v in (b.left_limit, b.right_limit)]
    return min(vals), max(vals)


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class Violation:
    condition: str
    witness: float
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    is_shift_periodic: bool
    has_integer_spikes: bool
    violations: tuple

    def by_condition(self, cond):
        return [v for v in self.violations if v.condition == cond]


def _check_limit(br, side, declared):
    """Compare a declared one-sided limit with values just inside the branch."""
    w = br.width
    with np.errstate(all="ignore"):
        near = float(br.at_offset(side, np.array([1e-10 * w]))[0])
        far = float(br.at_offset(side, np.array([1e-4 * w]))[0])
    if math.isinf(declared):
        if not math.isinf(near) and not (np.sign(near) == np.sign(declared) and abs(near) > abs(far)):
            return f"declared limit {declared} but F approaches {near}"
        return None
    if not math.isfinite(near) or abs(near - declared) > 1e-6 * max(1.0, abs(declared)):
        return f"declared limit {declared} but F approaches {near}"
    return None


def validate(fmap, grid_n=1000, tol=1e-9):
    """Check monotonicity (ii), expansion (iii) and integer limits (iv).

    The checks are sampled on a grid of ``grid_n`` points per branch, so a
    clean report is evidence rather than proof.
    """
    if grid_n < 2:
        raise ConfigError("grid_n must be at least 2")
    if tol <= 0:
        raise ConfigError("tol must be positive")
    out = []
    for br in fmap.branches:
        x = br.lo + br.width * (np.arange(grid_n) + 0.5) / grid_n
        with np.errstate(all="ignore"):
            y = br.func(x)
        bad = ~np.isfinite(y)
        if bad.any():
            k = int(np.argmax(bad))
            out.append(Violation("ii", float(x[k]), f"non-finite value inside branch ({br.lo}, {br.hi})"))
            continue
        dy = np.diff(y)
        wrong = dy <= 0 if br.increasing else dy >= 0
        if wrong.any():
            k = int(np.argmax(wrong))
            out.append(Violation("ii", float(x[k]), f"branch ({br.lo}, {br.hi}) not strictly monotone"))
        for side, lim, pt in ((0, br.left_limit, br.lo), (1, br.right_limit, br.hi)):
            msg = _check_limit(br, side, lim)
            if msg:
                out.append(Violation("ii", pt, msg))
        # expansion on adjacent pairs and on the widest pair
        dx = np.diff(x)
        shrink = np.abs(dy) <= dx
        if shrink.any():
            k = int(np.argmax(shrink))
            out.append(Violation("iii", float(x[k]),
                                 f"|F(x)-F(y)| <= |x-y| near x={x[k]:.6g} in ({br.lo}, {br.hi})"))
        elif abs(y[-1] - y[0]) <= x[-1] - x[0]:
            out.append(Violation("iii", float(x[0]), "branch image shorter than branch"))
        for pt, lim in ((br.lo, br.left_limit), (br.hi, br.right_limit)):
            if math.isfinite(lim) and abs(lim - round(lim)) > tol:
                out.append(Violation("iv", pt, f"one-sided limit {lim:.12g} at t={pt:.12g} is not an integer"))
    viol = tuple(out)
    periodic = not any(v.condition == "ii" for v in viol)
    spikes = periodic and not viol
    return ValidationReport(periodic, spikes, viol)


def require_integer_spikes(fmap, grid_n=1000):
    """Raise :class:`ValidationError` unless ``fmap`` has integer spikes."""
    from .errors import ValidationError

    rep = validate(fmap, grid_n)
    if not rep.has_integer_spikes:
        v = rep.violations[0]
        raise ValidationError(f"{fmap.name} lacks integer spikes: ({v.condition}) at {v.witness:.6g}: {v.detail}")
    return rep


# ------------------------------------------------------------------ families

def _param(params, key, default=None, positive=False, nonneg=False):
    if key in params:
        val = params[key]
    elif default is not None:
        val = default
    else:
        raise ConfigError(f"missing parameter {key!r}")
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be a number, got {val!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"parameter {key!r} must be finite")
    if positive and val <= 0:
        raise ConfigError(f"parameter {key!r} must be > 0, got {val}")
    if nonneg and val < 0:
        raise ConfigError(f"parameter {key!r} must be >= 0, got {val}")
    return val


def example1(eps, delta):
    """Piecewise-linear family with slopes ``4+eps``, ``-(2+eps)``, ``-(2+delta)``, ``4+delta``."""
    e = _param({"eps": eps}, "eps", nonneg=True)
    d = _param({"delta": delta}, "delta", nonneg=True)
    b0 = linear_branch([(0.0, 0.25, 4 + e, 0.0)])
    b1 = linear_branch([(0.25, 0.5, -(2 + e), (3 + e) / 2), (0.5, 0.75, -(2 + d), (3 + d) / 2)])
    b2 = linear_branch([(0.75, 1.0, 4 + d, -(3 + d))])
    return ShiftPeriodicMap((b0, b1, b2), "example1", {"eps": e, "delta": d})


def example2_constant(kappa):
    return 4.0 ** (-1.0 / kappa) / (2.0 * (1.0 - 3.0 ** (-1.0 / kappa)))


def _example2_branches(kappa, lo_cut=0.0, hi_cut=1.0):
    c = example2_constant(kappa)
    p = -1.0 / kappa

    def core(d1, d3):
        with np.errstate(all="ignore"):
            v = c * (np.power(d3, p) - np.power(d1, p)) + 0.5
        sing = (d1 < SINGULAR_EPS) | (d3 < SINGULAR_EPS)
        v = np.where(sing & (d1 <= d3), -np.inf, v)
        v = np.where(sing & (d3 < d1), np.inf, v)
        return v

    def func(x):
        x = _as_array(x)
        return core(np.abs(x - 0.25), np.abs(x - 0.75))

    def make_offset(lo, hi):
        def dist(q, side, d):
            if side == 0:
                return (lo - q) + d if q <= lo else (q - lo) - d
            return (q - hi) + d if q >= hi else (hi - q) - d

        def offset_func(side, d):
            d = _as_array(d)
            return core(dist(0.25, side, d), dist(0.75, side, d))
        return offset_func

    pieces = [
        (0.0, 0.25, False, 0.0, -np.inf),
        (0.25, 0.75, True, -np.inf, np.inf),
        (0.75, 1.0, False, np.inf, 1.0),
    ]
    out = []
    for lo, hi, inc, ll, rl in pieces:
        a, b = max(lo, lo_cut), min(hi, hi_cut)
        if a >= b:
            continue
        if a != lo:
            ll = float(func(np.array([a]))[0])
        if b != hi:
            rl = float(func(np.array([b]))[0])
        out.append(MonotoneBranch(a, b, func, inc, ll, rl, offset_func=make_offset(a, b)))
    return out


def example2(kappa):
    """Map with singularities at 1/4 and 3/4 and power-law tails of exponent ``kappa``."""
    k = _param({"kappa": kappa}, "kappa", positive=True)
    return ShiftPeriodicMap(tuple(_example2_branches(k)), "example2", {"kappa": k})


def climbing_sine(a):
    """``F(x) = x + a sin(2 pi x)``."""
    a = _param({"a": a}, "a", nonneg=True)

    def func(x):
        x = _as_array(x)
        return x + a * np.sin(2 * np.pi * x)

    def val(x):
        return float(x + a * math.sin(2 * math.pi * x))

    if 2 * math.pi * a <= 1.0:
        br = (MonotoneBranch(0.0, 1.0, func, True, 0.0, 1.0),)
    else:
        x1 = math.acos(-1.0 / (2 * math.pi * a)) / (2 * math.pi)
        x2 = 1.0 - x1
        br = (
            MonotoneBranch(0.0, x1, func, True, 0.0, val(x1)),
            MonotoneBranch(x1, x2, func, False, val(x1), val(x2)),
            MonotoneBranch(x2, 1.0, func, True, val(x2), 1.0),
        )
    return ShiftPeriodicMap(br, "climbing_sine", {"a": a})


def climbing_tangent():
    """``F(x) = x + tan(2 pi x)``, singular at 1/4 and 3/4."""
    def func(x):
        x = _as_array(x)
        return x + np.tan(2 * np.pi * x)

    def make_offset(lo, hi):
        def near(anchor, s, d):
            t = 2 * np.pi * d
            with np.errstate(divide="ignore"):
                if anchor in (0.25, 0.75):
                    return anchor + s * d - 1.0 / np.tan(s * t)
                return anchor + s * d + np.tan(s * t)

        def offset_func(side, d):
            d = _as_array(d)
            return near(lo, 1.0, d) if side == 0 else near(hi, -1.0, d)
        return offset_func

    pieces = [(0.0, 0.25, 0.0, np.inf), (0.25, 0.75, -np.inf, np.inf), (0.75, 1.0, -np.inf, 1.0)]
    br = tuple(MonotoneBranch(lo, hi, func, True, ll, rl, offset_func=make_offset(lo, hi))
               for lo, hi, ll, rl in pieces)
    return ShiftPeriodicMap(br, "climbing_tangent", {})


def pomeau_manneville(a=6.0, b=2.0, eps=0.0):
    """``F(x) = (1+eps) x + a x^b`` on ``[0, 1/2)``, extended as an odd map."""
    a = _param({"a": a}, "a", positive=True)
    b = _param({"b": b}, "b", positive=True)
    e = _param({"eps": eps}, "eps", nonneg=True)
    if a < 1 or b < 1:
        raise ConfigError("pomeau_manneville needs a >= 1 and b >= 1")

    def left(x):
        x = _as_array(x)
        return (1 + e) * x + a * np.power(x, b)

    def right(x):
        x = _as_array(x)
        return 1.0 - left(1.0 - x)

    top = (1 + e) / 2 + a / 2 ** b

    def left_off(side, d):
        return left(d) if side == 0 else left(0.5 - d)

    def right_off(side, d):
        return 1.0 - left(0.5 - d) if side == 0 else 1.0 - left(d)

    br = (
        MonotoneBranch(0.0, 0.5, left, True, 0.0, top, offset_func=left_off),
        MonotoneBranch(0.5, 1.0, right, True, 1.0 - top, 1.0, offset_func=right_off),
    )
    return ShiftPeriodicMap(br, "pomeau_manneville", {"a": a, "b": b, "eps": e})


def nonint_example(kappa=1.0):
    """Tent-like left half glued to the right half of :func:`example2`."""
    k = _param({"kappa": kappa}, "kappa", positive=True)
    tent = (
        linear_branch([(0.0, 0.25, 2.0, 0.0)]),
        linear_branch([(0.25, 0.5, -2.0, 1.0)]),
    )
    br = tent + tuple(_example2_branches(k, lo_cut=0.5))
    return ShiftPeriodicMap(br, "nonint_example", {"kappa": k})


def h_quadratic(x):
    """The homeomorphism ``x (1 + x) / 2`` of ``[0, 1]``."""
    x = _as_array(x)
    return 0.5 * x * (1.0 + x)


def h_quadratic_inv(y):
    y = _as_array(y)
    return 0.5 * (np.sqrt(1.0 + 8.0 * y) - 1.0)


def _shift_ext(f, y):
    fl = np.floor(y)
    return f(y - fl) + fl


def conjugated_example1():
    """``H o G o h^{-1}`` with ``G = example1(4, 4)`` and ``h(x) = x(1+x)/2``."""
    g = example1(4.0, 4.0)
    out = []
    for gb in g.branches:
        def func(x, gb=gb):
            return _shift_ext(h_quadratic, gb.func(h_quadratic_inv(x)))

        def inverse(y, gb=gb):
            return h_quadratic(gb.inverse(_shift_ext(h_quadratic_inv, _as_array(y))))

        lo = float(h_quadratic(gb.lo))
        hi = float(h_quadratic(gb.hi))
        out.append(MonotoneBranch(lo, hi, func, gb.increasing, gb.left_limit, gb.right_limit, inverse=inverse))
    return ShiftPeriodicMap(tuple(out), "conjugated_example1", {})


def piecewise_linear_map(pieces, name="piecewise_linear"):
    """Map whose branches are the given linear pieces ``(a, b, slope, intercept)``."""
    return ShiftPeriodicMap(tuple(linear_branch([p]) for p in pieces), name, {})


BUILTINS = {
    "climbing_sine": (climbing_sine, ("a",)),
    "climbing_tangent": (climbing_tangent, ()),
    "example1": (example1, ("eps", "delta")),
    "example2": (example2, ("kappa",)),
    "pomeau_manneville": (pomeau_manneville, ("a", "b", "eps")),
    "nonint_example": (nonint_example, ("kappa",)),
    "conjugated_example1": (conjugated_example1, ()),
}

_DEFAULTS = {
    "pomeau_manneville": {"a": 6.0, "b": 2.0, "eps": 0.0},
    "nonint_example": {"kappa": 1.0},
}


def builtin(name, params=None, **kwargs):
    """Construct one of the named map families.

    >>> builtin("example1", eps=4, delta=4).breakpoints.tolist()
    [0.0, 0.25, 0.75, 1.0]
    """
    if name not in BUILTINS:
        raise ConfigError(f"unknown map {name!r}; choose from {sorted(BUILTINS)}")
    factory, keys = BUILTINS[name]
    given = dict(params or {})
    given.update(kwargs)
    unknown = set(given) - set(keys)
    if unknown:
        raise ConfigError(f"unexpected parameters for {name}: {sorted(unknown)}")
    vals = dict(_DEFAULTS.get(name, {}))
    vals.update(given)
    missing = [k for k in keys if k not in vals]
    if missing:
        raise ConfigError(f"missing parameters for {name}: {missing}")
    return factory(**{k: vals[k] for k in keys})


# the operation is called ``eval`` in the public vocabulary
eval = evaluate  # noqa: A001
