"""Scaling limits of the cocycle walk.

Two limits are covered. For maps with power-law jump tails the rescaled walk
``V^(n)(t) = (Y_floor(nt) - a_n t) / b_n`` converges to an alpha-stable Levy
motion; the stable law ``S(alpha, beta)`` has characteristic function
``exp(-|t|^alpha (1 - i beta sgn(t) tan(pi alpha / 2)))``. For
``example1(eps/m, delta/m)`` the jump times of ``floor(F^floor(mt))`` become
a Poisson process with rate ``gamma = 3 (eps + delta) / 16`` as ``m`` grows.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from . import _kernels
from ._accel import set_threads
from .errors import ConfigError, NumericalError, ValidationError
from .maps import example1, example2_constant, image_bounds, jump, require_integer_spikes
from .transfer import cond_invariant_density, hole_length, ulam_invariant_density
from .walk import orbit_increments

# ------------------------------------------------------------- stable laws


@dataclass(frozen=True)
class StableParams:
    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not 0.0 < a <= 2.0:
            raise ConfigError(f"alpha must lie in (0, 2], got {a!r}")
        if not -1.0 <= b <= 1.0:
            raise ConfigError(f"beta must lie in [-1, 1], got {b!r}")
        if a == 1.0 and b != 0.0:
            raise ConfigError("beta must be 0 when alpha = 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", 0.0 if a == 2.0 else b)

    @property
    def skew(self):
        """``beta tan(pi alpha / 2)``, zero for ``alpha`` in {1, 2}."""
        if self.alpha in (1.0, 2.0):
            return 0.0
        return self.beta * math.tan(0.5 * math.pi * self.alpha)

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t) ** self.alpha
        return np.exp(-a * (1.0 - 1j * np.sign(t) * self.skew))


def stable_sample(p, rng, size=None):
    """Chambers-Mallows-Stuck draws from ``S(alpha, beta)``.

    With ``V`` uniform on ``(-pi/2, pi/2)`` and ``W`` standard exponential,
    the construction's native output for ``alpha != 1`` already has the
    characteristic function above once its skew angle is
    ``B = arctan(beta tan(pi alpha/2)) / alpha`` and its scale factor is
    ``S = (1 + beta^2 tan^2(pi alpha/2))^(1/(2 alpha))``. For ``alpha = 1``
    only ``beta = 0`` is admissible and the draw is ``tan(V)``.
    """
    n = 1 if size is None else size
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, n)
    if p.alpha == 1.0:
        out = np.tan(v)
    else:
        w = rng.standard_exponential(n)
        a = p.alpha
        T = p.skew
        B = math.atan(T) / a
        S = (1.0 + T * T) ** (0.5 / a)
        out = (S * np.sin(a * (v + B)) / np.cos(v) ** (1.0 / a)
               * (np.cos(v - a * (v + B)) / w) ** ((1.0 - a) / a))
    return float(out[0]) if size is None else out


def _cdf_one(p, x, tol):
    a, T = p.alpha, p.skew

    def full(t):
        return math.exp(-t ** a) * math.sin(T * t ** a - t * x) / t

    opts = dict(limit=500, epsabs=tol / 10, epsrel=1e-10)
    if x == 0.0:
        val, err = integrate.quad(full, 0.0, math.inf, **opts)
    else:
        w = abs(x)
        t0 = min(1.0, math.pi / w)
        v0, e0 = integrate.quad(full, 0.0, t0, **opts)
        # sin(T t^a - t x) = sin(T t^a) cos(t|x|) - sgn(x) cos(T t^a) sin(t|x|)
        v1, e1 = integrate.quad(lambda t: math.exp(-t ** a) * math.sin(T * t ** a) / t,
                                t0, math.inf, weight="cos", wvar=w, limlst=200) if T else (0.0, 0.0)
        v2, e2 = integrate.quad(lambda t: math.exp(-t ** a) * math.cos(T * t ** a) / t,
                                t0, math.inf, weight="sin", wvar=w, limlst=200)
        val = v0 + v1 - math.copysign(1.0, x) * v2
        err = e0 + e1 + e2
    if not err <= tol * math.pi:
        raise NumericalError(f"stable_cdf quadrature error {err / math.pi:.2e} exceeds {tol:.0e} at x={x!r}")
    return min(1.0, max(0.0, 0.5 - val / math.pi))


def stable_cdf(p, x, tol=1e-6):
    """CDF of ``S(alpha, beta)`` by Gil-Pelaez inversion of the characteristic function."""
    xs = np.asarray(x, dtype=float)
    out = np.array([_cdf_one(p, float(v), tol) for v in xs.ravel()])
    return out.reshape(xs.shape) if xs.ndim else float(out[0])


def stable_cdf_interpolant(p, scale=1.0, n_grid=2001):
    """Vectorised CDF of ``scale * S(alpha, beta)`` tabulated on an arctan grid."""
    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_grid + 2)[1:-1]
    xs = np.tan(theta)
    xs = xs[np.abs(xs) < 1e6]
    vals = stable_cdf(p, xs)
    vals = np.maximum.accumulate(vals)

    def cdf(y):
        z = np.asarray(y, dtype=float) / scale
        return np.interp(z, xs, vals, left=0.0, right=1.0)

    return cdf


def ecf_check(p, samples, ts=(0.5, 1.0, 2.0)):
    """Empirical characteristic function against ``p.cf`` with Monte Carlo standard errors."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    rows = []
    for t in ts:
        c, s = np.cos(t * x), np.sin(t * x)
        target = complex(p.cf(t))
        se_re, se_im = c.std(ddof=1) / math.sqrt(n), s.std(ddof=1) / math.sqrt(n)
        z_re = (c.mean() - target.real) / se_re
        z_im = (s.mean() - target.imag) / se_im if se_im > 0 else 0.0
        rows.append({"t": t, "re": c.mean(), "im": s.mean(), "target": target,
                     "z_re": z_re, "z_im": z_im, "ok": abs(z_re) < 3 and abs(z_im) < 3})
    return rows


# ---------------------------------------------------------- scaling plans

REGIMES = ("0<kappa<1", "kappa=1", "1<kappa<2", "kappa=2", "kappa>2")


def regime_of(kappa):
    if kappa <= 0:
        raise ConfigError("kappa must be > 0")
    if kappa < 1:
        return REGIMES[0]
    if kappa == 1:
        return REGIMES[1]
    if kappa < 2:
        return REGIMES[2]
    if kappa == 2:
        return REGIMES[3]
    return REGIMES[4]


@dataclass(frozen=True)
class ScalingPlan:
    """Centering ``a_n`` and scaling ``b_n`` for one tail regime."""

    kappa: float
    c_plus: float
    c_minus: float
    mean: object = None
    variance: object = None
    regime: str = ""

    @property
    def alpha(self):
        return min(self.kappa, 2.0)

    @property
    def beta(self):
        return (self.c_plus - self.c_minus) / (self.c_plus + self.c_minus)

    @property
    def stable(self):
        return StableParams(self.alpha, self.beta)

    def _stable_scale(self, n):
        a = self.alpha
        return (math.pi * (self.c_plus + self.c_minus)
                / (2.0 * special.gamma(a) * math.sin(a * math.pi / 2.0)) * n) ** (1.0 / a)

    def a_n(self, n):
        r = self.regime
        if r == "0<kappa<1":
            return 0.0
        if r == "kappa=1":
            return self.beta * (self.c_plus + self.c_minus) * n * math.log(n) if n > 1 else 0.0
        return n * self.mean

    def b_n(self, n):
        r = self.regime
        if r in ("0<kappa<1", "1<kappa<2"):
            return self._stable_scale(n)
        if r == "kappa=1":
            return 0.5 * math.pi * (self.c_plus + self.c_minus) * n
        if r == "kappa=2":
            return math.sqrt((self.c_plus + self.c_minus) * n * math.log(n))
        return math.sqrt(self.variance / 2.0 * n)


def scaling_plan(kappa, c_plus, c_minus, mean=None, variance=None):
    """Choose ``a_n`` and ``b_n`` for the tail exponent ``kappa``."""
    kappa, c_plus, c_minus = float(kappa), float(c_plus), float(c_minus)
    regime = regime_of(kappa)
    if c_plus < 0 or c_minus < 0 or c_plus + c_minus == 0:
        raise ConfigError("c_plus and c_minus must be >= 0 and not both 0")
    if kappa == 1 and c_plus != c_minus:
        raise ConfigError("kappa = 1 requires c_plus == c_minus")
    if kappa > 1 and mean is None:
        raise ConfigError("kappa > 1 requires the mean")
    if kappa > 2 and variance is None:
        raise ConfigError("kappa > 2 requires the variance")
    if kappa > 2 and not variance > 0:
        raise ConfigError("variance must be > 0")
    return ScalingPlan(kappa, c_plus, c_minus,
                       None if mean is None else float(mean),
                       None if variance is None else float(variance), regime)


# ------------------------------------------------------------ tail fitting

@dataclass(frozen=True)
class TailFit:
    kappa: object
    c_plus: object
    c_minus: object
    light_tailed: bool
    levels: np.ndarray = field(default_factory=lambda: np.empty(0))
    tail_plus: np.ndarray = field(default_factory=lambda: np.empty(0))
    tail_minus: np.ndarray = field(default_factory=lambda: np.empty(0))

    def as_dict(self):
        if self.light_tailed:
            return {"light_tailed": True}
        return {"light_tailed": False, "kappa": self.kappa, "c_plus": self.c_plus, "c_minus": self.c_minus}


def tail_measures(fmap, levels):
    """Exact ``lambda{floor F > M}`` and ``lambda{floor F < -M}`` for each ``M``.

    Both are lengths of superlevel (sublevel) sets of monotone branches,
    measured from the branch end where ``F`` is largest (smallest) using the
    level-set offsets, so they stay accurate when the sets are tiny.
    """
    M = np.asarray(levels, dtype=float)
    plus = np.zeros(M.size)
    minus = np.zeros(M.size)
    for br in fmap.branches:
        lo_v, hi_v = br.image
        # F >= M + 1 and F < -M
        for target, acc, upper in ((M + 1.0, plus, True), (-M, minus, False)):
            if upper:
                whole, none = target <= lo_v, target >= hi_v
            else:
                whole, none = target >= hi_v, target <= lo_v
            acc[whole] += br.width
            mid = ~whole & ~none
            if not mid.any():
                continue
            side, off = br.level_points(target[mid])
            # end of the branch where the extreme value is attained
            far = 1 if br.increasing == upper else 0
            length = np.where(side == far, off, br.width - off)
            if np.any(~np.isfinite(length)):
                raise NumericalError("tail level could not be resolved")
            acc[mid] += length
    return plus, minus


def _fit(levels, tail):
    ok = tail > 0
    if ok.sum() < 3:
        return None, None
    slope, icpt = np.polyfit(np.log(levels[ok]), np.log(tail[ok]), 1)
    return -slope, math.exp(icpt)


def tail_constants(fmap, M_max=10 ** 6, n_levels=21):
    """Fit ``lambda{floor F > M} ~ c_plus M^-kappa`` (and ``c_minus``) over the top two decades."""
    lo, hi = image_bounds(fmap)
    if math.isfinite(lo) and math.isfinite(hi):
        return TailFit(None, None, None, True)
    if M_max < 100:
        raise ConfigError("M_max must be >= 100")
    levels = np.unique(np.round(np.geomspace(M_max / 100.0, M_max, n_levels)))
    plus, minus = tail_measures(fmap, levels)
    kp, cp = _fit(levels, plus)
    km, cm = _fit(levels, minus)
    ks = [k for k in (kp, km) if k is not None]
    if not ks or any(not (0 < k < 1e3) for k in ks):
        return TailFit(None, None, None, True, levels, plus, minus)
    if kp is not None and km is not None and abs(kp - km) > 0.05 * max(kp, km):
        raise NumericalError(f"tails decay with different exponents ({kp:.3f}, {km:.3f})")
    kappa = float(np.mean(ks))
    # constants refitted with the common exponent
    cp = float(np.exp(np.mean(np.log(plus[plus > 0]) + kappa * np.log(levels[plus > 0])))) if kp else 0.0
    cm = float(np.exp(np.mean(np.log(minus[minus > 0]) + kappa * np.log(levels[minus > 0])))) if km else 0.0
    return TailFit(kappa, cp, cm, False, levels, plus, minus)


def plan_for_map(fmap, kappa=None, M=None):
    """Scaling plan from the exact jump law of ``fmap``.

    ``kappa`` defaults to the map's ``kappa`` parameter when it has one,
    otherwise to the fitted tail exponent. Constants ``c_plus``, ``c_minus``
    come from the tail fit; mean and variance from the exact transition table.
    """
    from .walk import transition_table

    fit = tail_constants(fmap)
    if fit.light_tailed:
        tab = transition_table(fmap, M)
        return scaling_plan(3.0, 1.0, 1.0, tab.mean(), tab.variance())
    if kappa is None:
        kappa = float(fmap.params.get("kappa", fit.kappa))
    cp, cm = fit.c_plus, fit.c_minus
    if kappa == 1.0:
        if abs(cp - cm) > 0.02 * max(cp, cm):
            raise ValidationError("kappa = 1 needs symmetric tails")
        cp = cm = 0.5 * (cp + cm)
    mean = variance = None
    if kappa > 1:
        tab = transition_table(fmap, M)
        mean = tab.mean()
        if kappa > 2:
            variance = tab.variance()
    return scaling_plan(kappa, cp, cm, mean, variance)


# ---------------------------------------------------------- FCLT simulation

@dataclass(frozen=True, eq=False)
class VnResult:
    """Rescaled walk values, one row per path and one column per time."""

    t_grid: np.ndarray
    values: np.ndarray
    n: int
    plan: ScalingPlan
    route: str
    discarded: int = 0

    def at(self, t):
        k = int(np.flatnonzero(np.isclose(self.t_grid, t))[0])
        return self.values[:, k]

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("path,t,V\n")
            for i, row in enumerate(self.values):
                for t, v in zip(self.t_grid.tolist(), row.tolist()):
                    fh.write(f"{i},{t!r},{v!r}\n")


def _path_streams(seed, n_paths):
    return np.random.SeedSequence(seed).spawn(n_paths)


def _conjugacy_sums(fmap, streams, n_max, cps):
    """Partial sums of the linearized walk: iid increments ``floor(F(V))``, ``V`` uniform."""
    out = np.zeros((len(streams), cps.size))
    if n_max == 0:
        return out, 0
    u = np.stack([np.random.default_rng(s).random(n_max) for s in streams])
    if fmap.name == "example2":
        kappa = float(fmap.params["kappa"])
        return _kernels.example2_increment_sums(u, kappa, example2_constant(kappa), cps), 0
    m, sing = jump(fmap, u)
    bad = 0
    for i in np.flatnonzero(sing.any(axis=1)):
        # resample the whole path from a child stream
        rng = np.random.default_rng(streams[i].spawn(1)[0])
        while True:
            bad += 1
            mi, si = jump(fmap, rng.random(n_max))
            if not si.any():
                m[i] = mi
                break
    cs = np.cumsum(m, axis=1)
    return cs[:, cps - 1].astype(float), bad


def _direct_sums(fmap, streams, n_max, cps, init_sampler):
    out = np.zeros((len(streams), cps.size))
    if n_max == 0:
        return out, 0
    rngs = [np.random.default_rng(s) for s in streams]
    x0 = np.array([init_sampler(r, 1)[0] for r in rngs])
    z, sing = orbit_increments(fmap, x0, n_max)
    bad = 0
    for i in np.flatnonzero(sing):
        while True:
            bad += 1
            zi, si = orbit_increments(fmap, init_sampler(rngs[i], 1), n_max)
            if not si[0]:
                z[i] = zi[0]
                break
    cs = np.cumsum(z, axis=1)
    return cs[:, cps - 1].astype(float), bad


def _uniform(rng, n):
    return rng.random(n)


def simulate_vn(fmap, init_sampler=None, n=10 ** 4, t_grid=(1.0,), plan=None, rng_seed=0,
                n_paths=10 ** 4, route="conjugacy", chunk=250, threads=None):
    """Sample ``V^(n)(t) = (Y_floor(nt) - a_n t) / b_n`` on ``t_grid``.

    ``route="conjugacy"`` samples the walk started from the invariant
    distribution ``h(U)``, whose cocycle equals the linearized map's cocycle
    at ``U``; the latter has independent increments with law
    ``p_m = lambda{floor F = m}``, drawn as ``floor(F(V))`` with ``V``
    uniform. ``route="direct"`` iterates ``F`` from ``init_sampler`` (uniform
    by default) and is kept as a diagnostic.
    """
    require_integer_spikes(fmap)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ConfigError("t_grid must be a nonempty increasing list of times >= 0")
    if n < 1 or n_paths < 1:
        raise ConfigError("n and n_paths must be >= 1")
    if route not in ("conjugacy", "direct"):
        raise ConfigError(f"unknown route {route!r}")
    if plan is None:
        plan = plan_for_map(fmap)
    set_threads(threads)
    steps = np.floor(n * t + 1e-9).astype(np.int64)
    pos = steps > 0
    cps = np.unique(steps[pos])
    n_max = int(cps[-1]) if cps.size else 0
    streams = _path_streams(rng_seed, n_paths)
    init = init_sampler or _uniform
    Y = np.zeros((n_paths, cps.size))
    discarded = 0
    for s in range(0, n_paths, chunk):
        part = streams[s:s + chunk]
        if route == "conjugacy":
            y, bad = _conjugacy_sums(fmap, part, n_max, cps)
        else:
            y, bad = _direct_sums(fmap, part, n_max, cps, init)
        Y[s:s + len(part)] = y
        discarded += bad
    full = np.zeros((n_paths, t.size))
    if cps.size:
        full[:, pos] = Y[:, np.searchsorted(cps, steps[pos])]
    V = (full - plan.a_n(n) * t[None, :]) / plan.b_n(n)
    return VnResult(t, V, int(n), plan, route, discarded)


# ------------------------------------------------------------------ CTRW

def gamma(eps, delta):
    """Limiting jump rate ``3 (eps + delta) / 16``."""
    if eps < 0 or delta < 0:
        raise ConfigError("eps and delta must be >= 0")
    return 3.0 * (eps + delta) / 16.0


def hole_measure(eps, delta):
    """Length of the part of ``[0, 1]`` that ``example1(eps, delta)`` maps outside it."""
    if eps < 0 or delta < 0:
        raise ConfigError("eps and delta must be >= 0")
    return hole_length(eps) + hole_length(delta)


@dataclass(frozen=True, eq=False)
class JumpRecord:
    """Jump times ``k/m`` and signs of one path of ``Y_m``."""

    m: int
    jump_times: np.ndarray
    jump_signs: np.ndarray
    horizon: float

    def waiting_times(self):
        return np.diff(np.concatenate([[0.0], self.jump_times]))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,Y\n0.0,0\n")
            for t, y in zip(self.jump_times.tolist(), np.cumsum(self.jump_signs).tolist()):
                fh.write(f"{t!r},{int(y)}\n")


CTRW_INITS = ("invariant", "conditionally-invariant", "uniform")


def ctrw_initial_points(eps, delta, m, init, u):
    """Map uniforms ``u`` to initial points for ``example1(eps/m, delta/m)``."""
    e, d = eps / m, delta / m
    if init == "uniform":
        return np.asarray(u, dtype=float)
    if init == "invariant":
        approx = ulam_invariant_density(example1(e, d), 4000)
        mass = approx.stationary * approx.widths
        cdf = np.concatenate([[0.0], np.cumsum(mass)])
        cdf /= cdf[-1]
        idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, mass.size - 1)
        frac = (u - cdf[idx]) / np.maximum(cdf[idx + 1] - cdf[idx], 1e-300)
        return approx.grid[idx] + np.clip(frac, 0, 1) * approx.widths[idx]
    if init == "conditionally-invariant":
        nu = cond_invariant_density(e, d).nu if e > 0 and d > 0 else 1.0
        left = nu / 2.0
        return np.where(u < left, 0.5 * u / left, 0.5 + 0.5 * (u - left) / (1.0 - left))
    raise ConfigError(f"init must be one of {CTRW_INITS}")


def simulate_ctrw(eps, delta, m, horizon, init="invariant", rng_seed=0, n_paths=1, threads=None):
    """Jump records of ``Y_m(t) = floor(F^floor(mt)(X_m; eps/m, delta/m))``.

    Path ``i`` starts from the ``i``-th uniform of the seeded stream, so the
    records do not depend on the thread count.
    """
    if m < 1 or n_paths < 1:
        raise ConfigError("m and n_paths must be >= 1")
    if horizon < 0 or eps < 0 or delta < 0:
        raise ConfigError("horizon, eps and delta must be >= 0")
    set_threads(threads)
    n_steps = int(math.floor(m * horizon + 1e-9))
    u = np.random.default_rng(rng_seed).random(n_paths)
    x0 = ctrw_initial_points(eps, delta, m, init, u)
    rate = max(hole_measure(eps / m, delta / m) * n_steps, 1.0)
    cap = int(rate + 10 * math.sqrt(rate) + 16)
    steps, signs, counts = _kernels.ctrw_jumps(x0, eps / m, delta / m, n_steps, cap)
    over = np.flatnonzero(counts > cap)
    if over.size:
        s2, g2, c2 = _kernels.ctrw_jumps(x0[over], eps / m, delta / m, n_steps, int(counts.max()))
        big = {int(i): (s2[k], g2[k], c2[k]) for k, i in enumerate(over)}
    records = []
    for i in range(n_paths):
        if counts[i] > cap:
            st, sg, c = big[i]
        else:
            st, sg, c = steps[i], signs[i], counts[i]
        records.append(JumpRecord(int(m), st[:c] / m, sg[:c].copy(), float(horizon)))
    return records


@dataclass(frozen=True)
class KSReport:
    statistic: float
    pvalue: float
    n: int
    critical_05: float
    critical_01: float
    label: str = ""

    @property
    def passes_05(self):
        return self.statistic < self.critical_05

    @property
    def passes_01(self):
        return self.statistic < self.critical_01

    def as_dict(self):
        return {"label": self.label, "statistic": self.statistic, "pvalue": self.pvalue,
                "n": self.n, "critical_05": self.critical_05, "critical_01": self.critical_01,
                "passes_05": self.passes_05, "passes_01": self.passes_01}

    def to_json(self, path=None):
        text = json.dumps(self.as_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def ks_report(samples, cdf, label=""):
    """One-sample KS test with exact finite-sample critical values."""
    x = np.asarray(samples, dtype=float)
    if x.size < 1:
        raise ValidationError("no samples")
    res = stats.kstest(x, cdf)
    n = x.size
    return KSReport(float(res.statistic), float(res.pvalue), int(n),
                    float(stats.kstwo.ppf(0.95, n)), float(stats.kstwo.ppf(0.99, n)), label)


def pooled_waiting_times(records, gamma_value, pooling="censored", margin=None):
    """Waiting times ``T_j - T_{j-1}`` (with ``T_0 = 0``) pooled over records.

    ``"censored"`` keeps every wait that starts at least ``margin`` before the
    horizon (default: the ``1e-4`` tail quantile ``log(1e4)/gamma``), so waits
    cut off by the horizon bias the pool by less than ``1e-4``.
    ``"first"`` keeps only ``T_1``; ``"second"`` only ``T_2 - T_1``.
    """
    if pooling == "first":
        return np.array([r.jump_times[0] for r in records if r.jump_times.size])
    if pooling == "second":
        return np.array([r.jump_times[1] - r.jump_times[0] for r in records if r.jump_times.size > 1])
    if pooling != "censored":
        raise ConfigError(f"unknown pooling {pooling!r}")
    if margin is None:
        margin = math.log(1e4) / gamma_value
    out = []
    for r in records:
        starts = np.concatenate([[0.0], r.jump_times[:-1]])
        w = r.waiting_times()
        out.append(w[starts <= r.horizon - margin])
    return np.concatenate(out) if out else np.empty(0)


def waiting_time_test(records, gamma_value, pooling="censored", margin=None):
    """KS distance between pooled waiting times and ``Exp(gamma)``."""
    if not gamma_value > 0:
        raise ConfigError("gamma must be > 0")
    w = pooled_waiting_times(records, gamma_value, pooling, margin)
    if w.size < 100:
        raise ValidationError(f"only {w.size} pooled waiting times; at least 100 are needed")
    return ks_report(w, stats.expon(scale=1.0 / gamma_value).cdf, f"waiting times ({pooling}) vs Exp({gamma_value:g})")


def fclt_marginal_test(result, t=1.0):
    """KS test of ``V^(n)(t)`` against ``t^(1/alpha) S(alpha, beta)``."""
    p = result.plan.stable
    cdf = stable_cdf_interpolant(p, scale=t ** (1.0 / p.alpha))
    return ks_report(result.at(t), cdf, f"V(t={t:g}) vs S({p.alpha:g},{p.beta:g})")
