"""Monte Carlo oracle for hyper-exponential jump-diffusions.

Paths are advanced on a time grid of step ``dt``.  Within a step the
Poisson jump epochs are sampled exactly; the Brownian part is filled in at
those epochs by Brownian-bridge interpolation, so every step splits into
jump-free segments.  Consumers then act on segments:

* occupation times use the trapezoid rule on the indicator at segment ends;
* barrier crossings inside a segment use the Brownian-bridge crossing
  probability ``exp(-2 (c - u)(c - v) / (sigma^2 h))``; with sigma = 0 a
  segment is a straight line and crossings are exact.

Randomness is organised in blocks of ``SimConfig.block_size`` paths, each with
its own stream spawned from ``numpy.random.SeedSequence(seed)``.  Results
are therefore a deterministic function of the seed and configuration,
independent of the number of worker threads.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .levy_model import HyperExpModel
from .occupation import Finite, HalfLineBelow, Interval


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo configuration.

    Parameters
    ----------
    n_paths : int
        Number of simulated paths (rounded up to an even number with antithetics).
    dt : float
        Grid step.
    horizon : float
        Maximal simulated time for first-passage problems; paths still inside
        at the horizon contribute zero.
    seed : int
        Root seed (64-bit).
    antithetic : bool
        Pair every path with its Brownian mirror image (same jumps); each pair
        counts as one sample.
    block_size : int
        Paths per random substream.
    workers : int
        Threads used to evaluate blocks; results do not depend on it.
    """

    n_paths: int = 100_000
    dt: float = 1e-3
    horizon: float = 10.0
    seed: int = 0
    antithetic: bool = False
    block_size: int = 1 << 15
    workers: int = 1

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise DomainError("n_paths must be >= 1")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError("dt must be positive and finite")
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit non-negative integer")
        if int(self.block_size) < 2 or int(self.workers) < 1:
            raise DomainError("block_size must be >= 2 and workers >= 1")


@dataclass(frozen=True)
class PathFunctionalEstimate:
    """Sample mean of a path functional with its standard error."""

    mean: float
    std_error: float
    n_effective: int

    def z_score(self, target: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.std_error

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.z_score(target)) <= k


@dataclass(frozen=True, eq=False)
class HistogramEstimate:
    """Per-bin estimates of a density on the bins defined by ``edges``."""

    edges: np.ndarray
    bins: tuple
    total_mass: PathFunctionalEstimate

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def means(self) -> np.ndarray:
        return np.array([b.mean for b in self.bins])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([b.std_error for b in self.bins])


@dataclass(frozen=True)
class ExitEstimates:
    """Discounted probabilities of leaving [a, c] upwards and downwards."""

    up: PathFunctionalEstimate
    down: PathFunctionalEstimate


# ---------------------------------------------------------------------------
# Dynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Dynamics:
    """drift t + sigma B_t - (compound Poisson with the given jump law)."""

    drift: float
    sigma: float
    jump_rate: float
    weights: tuple = ()
    rates: tuple = ()
    atom_rate: float = 0.0
    atom_size: float = 0.0
    min_jump: float = 0.0

    @classmethod
    def of(cls, model: HyperExpModel) -> "_Dynamics":
        return cls(model.drift_c, model.sigma, model.eta if model.n else 0.0, model.weights, model.rates)

    @property
    def total_rate(self) -> float:
        return self.jump_rate + self.atom_rate

    def sample_jumps(self, rng: np.random.Generator, shape) -> np.ndarray:
        size = int(np.prod(shape))
        out = np.empty(size)
        if self.atom_rate > 0:
            is_atom = rng.random(size) < self.atom_rate / self.total_rate
        else:
            is_atom = np.zeros(size, dtype=bool)
        k = int(np.count_nonzero(~is_atom))
        if k:
            comp = rng.choice(len(self.weights), size=k, p=np.asarray(self.weights) / sum(self.weights))
            sizes = rng.exponential(1.0, size=k) / np.asarray(self.rates)[comp]
            # truncated Levy measure: jumps below min_jump are removed
            out[~is_atom] = np.where(sizes >= self.min_jump, sizes, 0.0)
        out[is_atom] = self.atom_size
        return out.reshape(shape)


def bounded_variation_approximant(model: HyperExpModel, n: int) -> _Dynamics:
    """Bounded-variation approximation of a model with sigma > 0.

    The Gaussian part is replaced by jumps of size 1/n at rate sigma^2 n^2,
    jumps below 1/n are removed, and the drift becomes
    c - int_0^{1/n} theta Pi(d theta) + sigma^2 n, so the exponent converges
    to psi as n grows.

    Raises
    ------
    DomainError
        If sigma = 0 or the resulting drift is not positive (n too small).
    """
    if model.sigma <= 0:
        raise DomainError("the approximant is only defined for sigma > 0")
    n = int(n)
    eps = 1.0 / n
    small = sum(model.eta * a * (1.0 - math.exp(-al * eps) * (1.0 + al * eps)) / al
                for a, al in zip(model.weights, model.rates))
    drift = model.drift_c - small + model.sigma**2 * n
    if not drift > 0:
        raise DomainError(f"approximant drift {drift} is not positive; increase n")
    return _Dynamics(drift, 0.0, model.eta if model.n else 0.0, model.weights, model.rates,
                     atom_rate=model.sigma**2 * n * n, atom_size=eps, min_jump=eps)


def simulate_increment(model: HyperExpModel, dt: float, rng: np.random.Generator, size=None):
    """One increment c dt + sigma sqrt(dt) Z - (sum of Poisson(eta dt) jumps)."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    dyn = _Dynamics.of(model)
    shape = () if size is None else (size if isinstance(size, tuple) else (int(size),))
    m = int(np.prod(shape)) if shape else 1
    inc = dyn.drift * dt + dyn.sigma * math.sqrt(dt) * rng.standard_normal(m)
    if dyn.total_rate > 0:
        counts = rng.poisson(dyn.total_rate * dt, m)
        total = int(counts.sum())
        if total:
            sizes = dyn.sample_jumps(rng, (total,))
            owner = np.repeat(np.arange(m), counts)
            inc -= np.bincount(owner, weights=sizes, minlength=m)
    return float(inc[0]) if size is None else inc.reshape(shape)


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------

@dataclass
class _Segment:
    cols: Optional[np.ndarray]  # None: every column
    v0: np.ndarray              # (r, k) value at segment start (after any jump there)
    v1: np.ndarray              # (r, k) value at segment end (before any jump there)
    t0: np.ndarray              # (k,) offset within the step
    dur: np.ndarray             # (k,)
    after_jump: bool


def _step(dyn: _Dynamics, X: np.ndarray, h: np.ndarray, rng: np.random.Generator, signs: np.ndarray):
    """Advance every column of X (shape (r, m)) by its own step h; return (X_new, segments).

    Row 1 (when present) is the antithetic mirror of row 0: same jumps,
    Brownian increments of opposite sign.
    """
    m = X.shape[1]
    Z = rng.standard_normal(m)
    dBt = np.sqrt(h) * Z
    if dyn.total_rate > 0:
        N = rng.poisson(dyn.total_rate * h)
    else:
        N = np.zeros(m, dtype=np.int64)
    quiet = N == 0
    inc = dyn.drift * h + dyn.sigma * signs * dBt
    X1 = X + inc
    if quiet.all():
        return X1, [_Segment(None, X, X1, np.zeros(m), h, False)]
    segs = [_Segment(None, X, np.where(quiet, X1, X), np.zeros(m), np.where(quiet, h, 0.0), False)]
    for n in np.unique(N[~quiet]):
        cols = np.flatnonzero(N == n)
        k = cols.size
        hc, dbc = h[cols], dBt[cols]
        u = np.sort(rng.random((k, n)), axis=1) * hc[:, None]
        jumps = dyn.sample_jumps(rng, (k, n))
        G = rng.standard_normal((k, n))
        base = X[:, cols]
        b_prev = np.zeros(k)
        u_prev = np.zeros(k)
        level = np.zeros(k)
        for j in range(n + 1):
            if j < n:
                uj = u[:, j]
                rem = hc - u_prev
                with np.errstate(divide="ignore", invalid="ignore"):
                    frac = np.where(rem > 0, (uj - u_prev) / rem, 0.0)
                sd = np.sqrt(np.maximum((uj - u_prev) * (hc - uj), 0.0) / np.where(rem > 0, rem, 1.0))
                bj = b_prev + frac * (dbc - b_prev) + sd * G[:, j]
            else:
                uj, bj = hc, dbc
            v0 = base + dyn.drift * u_prev + dyn.sigma * signs * b_prev - level
            v1 = base + dyn.drift * uj + dyn.sigma * signs * bj - level
            segs.append(_Segment(cols, v0, v1, u_prev, uj - u_prev, j > 0))
            if j < n:
                level = level + jumps[:, j]
            b_prev, u_prev = bj, uj
        X1[:, cols] = base + dyn.drift * hc + dyn.sigma * signs * dbc - level
    return X1, segs


def _indicator(interval: Interval):
    if isinstance(interval, Finite):
        a, b = interval.a, interval.b
        return lambda v: ((v > a) & (v < b)).astype(float)
    if isinstance(interval, HalfLineBelow):
        b = interval.b
        return lambda v: (v < b).astype(float)
    raise DomainError(f"unsupported interval {interval!r}")


def _occupation_update(occ, segs, ind):
    for s in segs:
        inc = 0.5 * s.dur * (ind(s.v0) + ind(s.v1))
        if s.cols is None:
            occ += inc
        else:
            occ[:, s.cols] += inc


def _signs(antithetic: bool) -> np.ndarray:
    return np.array([[1.0], [-1.0]]) if antithetic else np.array([[1.0]])


def _simulate_to(dyn, x, t_end, rng, dt, antithetic, ind=None, stops=None):
    """Simulate columns to per-column end times; return (X_end, occupation).

    With ``stops`` (increasing common times, last equal to max t_end), the
    state and occupation are also recorded at each stop: returns lists.
    """
    signs = _signs(antithetic)
    m = t_end.size
    X = np.full((signs.shape[0], m), float(x))
    occ = np.zeros_like(X)
    t = np.zeros(m)
    rec_x, rec_o = [], []
    stop_list = list(stops) if stops is not None else []
    active = np.arange(m)
    Xa, Oa, ta, te = X, occ, t, t_end
    while active.size:
        nxt = stop_list[0] if stop_list else math.inf
        h = np.minimum(np.minimum(dt, te - ta), nxt - ta)
        h = np.maximum(h, 0.0)
        Xa, segs = _step(dyn, Xa, h, rng, signs)
        if ind is not None:
            _occupation_update(Oa, segs, ind)
        ta = ta + h
        if stop_list and np.all(np.abs(ta - nxt) <= 1e-12 * max(1.0, nxt)):
            ta = np.full_like(ta, nxt)
            rec_x.append(Xa.copy())
            rec_o.append(Oa.copy())
            stop_list.pop(0)
            if not stop_list:
                break
            continue
        done = ta >= te
        if done.any() and stops is None:
            X[:, active[done]] = Xa[:, done]
            occ[:, active[done]] = Oa[:, done]
            keep = ~done
            active, Xa, Oa, ta, te = active[keep], Xa[:, keep], Oa[:, keep], ta[keep], te[keep]
    if stops is not None:
        return rec_x, rec_o
    return X, occ


# ---------------------------------------------------------------------------
# Block driver
# ---------------------------------------------------------------------------

def _block_sizes(cfg: SimConfig):
    n = int(cfg.n_paths)
    if cfg.antithetic:
        n += n % 2
    bs = int(cfg.block_size)
    if cfg.antithetic:
        bs += bs % 2
    sizes = [bs] * (n // bs)
    if n % bs:
        sizes.append(n % bs)
    return sizes


def _run(cfg: SimConfig, block_fn: Callable[[np.random.Generator, int], np.ndarray]):
    """Evaluate per-sample values block by block; return (sum, sum of squares, count)."""
    sizes = _block_sizes(cfg)
    children = np.random.SeedSequence(int(cfg.seed)).spawn(len(sizes))

    def one(i):
        rng = np.random.Generator(np.random.PCG64(children[i]))
        vals = np.asarray(block_fn(rng, sizes[i] // 2 if cfg.antithetic else sizes[i]), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        return vals.sum(axis=0), (vals * vals).sum(axis=0), vals.shape[0]

    if int(cfg.workers) > 1:
        with ThreadPoolExecutor(max_workers=int(cfg.workers)) as ex:
            parts = list(ex.map(one, range(len(sizes))))
    else:
        parts = [one(i) for i in range(len(sizes))]
    s = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    return s, s2, n


def _estimates(s, s2, n):
    mean = s / n
    var = np.maximum(s2 - n * mean * mean, 0.0) / max(n - 1, 1)
    se = np.sqrt(var / n)
    return [PathFunctionalEstimate(float(mu), float(e), int(n)) for mu, e in zip(np.atleast_1d(mean), np.atleast_1d(se))]


def _pair_mean(vals: np.ndarray) -> np.ndarray:
    """Average the rows of a (r, k, ...) array over antithetic copies."""
    return vals.mean(axis=0)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def estimate_joint(model: HyperExpModel, x: float, p: float, q: float, interval: Interval,
                   y_bins, cfg: SimConfig) -> HistogramEstimate:
    """Histogram estimate of y -> v(x, y) on the bins ``y_bins`` (edges).

    Each path runs to an independent exponential time of rate p; the weight
    exp(-q * occupation) is binned by the terminal value and scaled by
    1/(p * bin width).
    """
    if not p > 0 or not q >= 0:
        raise DomainError("need p > 0 and q >= 0")
    edges = np.asarray(y_bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("y_bins must be increasing edges")
    width = np.diff(edges)
    if model.sigma > 0 and cfg.dt > float(width.min()) ** 2 / model.sigma**2:
        warnings.warn("dt exceeds (bin width)^2 / sigma^2; expect discretization bias", RuntimeWarning)
    dyn = _Dynamics.of(model)
    ind = _indicator(interval)
    nb = width.size

    def block(rng, m):
        t_end = rng.exponential(1.0 / p, m)
        X, occ = _simulate_to(dyn, x, t_end, rng, cfg.dt, cfg.antithetic, ind)
        w = np.exp(-q * occ)
        k = np.searchsorted(edges, X, side="right") - 1
        inside = (k >= 0) & (k < nb)
        vals = np.zeros(X.shape + (nb + 1,))
        r_idx, c_idx = np.nonzero(inside)
        vals[r_idx, c_idx, k[inside]] = w[inside] / (p * width[k[inside]])
        vals[..., nb] = w / p
        return _pair_mean(vals)

    s, s2, n = _run(cfg, block)
    est = _estimates(s, s2, n)
    return HistogramEstimate(edges, tuple(est[:nb]), est[nb])


def _exit_block(dyn, x, lo, hi, discount, cfg, rng, m, value_fn=None):
    """Simulate until leaving (lo, hi) or the horizon.

    Returns per-sample (up, down) discounted indicators, or the discounted
    ``value_fn(X_tau)`` on the down side when ``value_fn`` is given.
    """
    signs = _signs(cfg.antithetic)
    r = signs.shape[0]
    X = np.full((r, m), float(x))
    done = np.zeros((r, m), dtype=bool)
    tau = np.full((r, m), np.inf)
    side = np.zeros((r, m), dtype=np.int8)  # +1 up, -1 down
    x_tau = np.full((r, m), np.nan)
    if x >= hi:
        done[:], side[:], tau[:], x_tau[:] = True, 1, 0.0, x
    elif x < lo:
        done[:], side[:], tau[:], x_tau[:] = True, -1, 0.0, x
    t = 0.0
    sig2 = dyn.sigma**2
    while t < cfg.horizon and not done.all():
        h = min(cfg.dt, cfg.horizon - t)
        live = np.flatnonzero(~done.all(axis=0))
        hh = np.full(live.size, h)
        Xl, segs = _step(dyn, X[:, live], hh, rng, signs)
        d_l, tau_l, side_l, xt_l = done[:, live], tau[:, live], side[:, live], x_tau[:, live]
        for sg in segs:
            cols = slice(None) if sg.cols is None else sg.cols
            alive = ~d_l[:, cols]
            v0, v1, t0, dur = sg.v0, sg.v1, sg.t0, sg.dur
            if sg.after_jump:
                jd = alive & (v0 < lo)
                _mark(d_l, tau_l, side_l, xt_l, cols, jd, t + t0, -1, v0)
                alive &= ~jd
            if sig2 > 0:
                u1, u2, u3 = rng.random((3,) + v0.shape)
                with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                    pos = dur > 0
                    pu = np.where(v1 >= hi, 1.0,
                                  np.where(pos, np.exp(-2.0 * (hi - v0) * (hi - v1) / (sig2 * dur)), 0.0))
                    pd = np.where(v1 <= lo, 1.0,
                                  np.where(pos, np.exp(-2.0 * (v0 - lo) * (v1 - lo) / (sig2 * dur)), 0.0))
                if math.isinf(hi):
                    pu = np.zeros_like(pd)
                up = alive & (u1 < pu)
                dn = alive & (u2 < pd)
                both = up & dn
                pick_up = u3 < pu / np.where(pu + pd > 0, pu + pd, 1.0)
                up = up & (~both | pick_up)
                dn = dn & (~both | ~pick_up)
                with np.errstate(divide="ignore", invalid="ignore"):
                    t_up = np.where(v1 >= hi, t0 + dur * (hi - v0) / np.where(v1 != v0, v1 - v0, 1.0), t0 + 0.5 * dur)
                    t_dn = np.where(v1 <= lo, t0 + dur * (v0 - lo) / np.where(v1 != v0, v0 - v1, 1.0), t0 + 0.5 * dur)
            else:
                up = alive & (v1 >= hi)
                dn = alive & (v1 <= lo) & ~up
                with np.errstate(divide="ignore", invalid="ignore"):
                    t_up = t0 + dur * (hi - v0) / np.where(v1 != v0, v1 - v0, 1.0)
                    t_dn = t0 + dur * (v0 - lo) / np.where(v1 != v0, v0 - v1, 1.0)
            _mark(d_l, tau_l, side_l, xt_l, cols, up, t + t_up, 1, np.full_like(v0, hi))
            _mark(d_l, tau_l, side_l, xt_l, cols, dn, t + t_dn, -1, np.full_like(v0, lo))
        X[:, live] = Xl
        done[:, live], tau[:, live], side[:, live], x_tau[:, live] = d_l, tau_l, side_l, xt_l
        t += h
    disc = np.where(done, np.exp(-discount * np.where(np.isfinite(tau), tau, 0.0)), 0.0)
    if value_fn is None:
        up = np.where(side == 1, disc, 0.0)
        dn = np.where(side == -1, disc, 0.0)
        return np.stack([_pair_mean(up), _pair_mean(dn)], axis=1)
    vals = np.zeros((r, m))
    hit = side == -1
    if hit.any():
        vals[hit] = disc[hit] * np.asarray(value_fn(x_tau[hit]), dtype=float)
    return _pair_mean(vals)


def _mark(done, tau, side, x_tau, cols, mask, when, s, value):
    if not mask.any():
        return
    sub_d = done[:, cols]
    sub_t = tau[:, cols]
    sub_s = side[:, cols]
    sub_x = x_tau[:, cols]
    when = np.broadcast_to(when, mask.shape)
    sub_d[mask] = True
    sub_t[mask] = when[mask]
    sub_s[mask] = s
    sub_x[mask] = np.broadcast_to(value, mask.shape)[mask]
    done[:, cols], tau[:, cols], side[:, cols], x_tau[:, cols] = sub_d, sub_t, sub_s, sub_x


def estimate_exit(model: HyperExpModel, x: float, a: float, c: float, q: float, cfg: SimConfig,
                  dynamics: Optional[_Dynamics] = None) -> ExitEstimates:
    """E_x[exp(-q tau_c^+); tau_c^+ < tau_a^-] and E_x[exp(-q tau_a^-); tau_a^- < tau_c^+]."""
    if not a <= x <= c or not a < c:
        raise DomainError(f"need a <= x <= c with a < c, got a={a}, x={x}, c={c}")
    if q < 0:
        raise DomainError("q must be >= 0")
    dyn = dynamics or _Dynamics.of(model)
    if x == c:
        one = PathFunctionalEstimate(1.0, 0.0, int(cfg.n_paths))
        return ExitEstimates(one, PathFunctionalEstimate(0.0, 0.0, int(cfg.n_paths)))
    s, s2, n = _run(cfg, lambda rng, m: _exit_block(dyn, x, a, c, q, cfg, rng, m))
    up, down = _estimates(s, s2, n)
    return ExitEstimates(up, down)


def estimate_first_passage(model: HyperExpModel, x: float, a: float, b: float, p: float,
                           value_fn: Callable[[np.ndarray], np.ndarray], cfg: SimConfig) -> PathFunctionalEstimate:
    """E_x[exp(-p tau_a^-) f(X_{tau_a^-}); tau_a^- < tau_b^+] (b may be +inf).

    ``X_{tau_a^-}`` is a when the path creeps across a, and the post-jump
    value when a jump carries it below a.
    """
    if not a < b or not x >= a:
        raise DomainError("need a < b and x >= a")
    dyn = _Dynamics.of(model)
    s, s2, n = _run(cfg, lambda rng, m: _exit_block(dyn, x, a, b, p, cfg, rng, m, value_fn))
    return _estimates(s, s2, n)[0]


def estimate_option_curve(model: HyperExpModel, contract, maturities: Sequence[float],
                          cfg: SimConfig) -> list:
    """MC step-option prices at several maturities from one set of paths."""
    Ts = sorted(float(t) for t in maturities)
    if not Ts or Ts[0] <= 0:
        raise DomainError("maturities must be positive")
    dyn = _Dynamics.of(model)
    ind = _indicator(HalfLineBelow(math.log(contract.barrier / contract.spot)))
    # the region is {X <= ln(L/S0)}: closed and open versions differ on a null set
    S0, K, r, rho = contract.spot, contract.strike, contract.rate, contract.knock_out_rate

    def block(rng, m):
        xs, occs = _simulate_to(dyn, 0.0, np.full(m, Ts[-1]), rng, cfg.dt, cfg.antithetic, ind, stops=Ts)
        cols = []
        for T, X, occ in zip(Ts, xs, occs):
            pay = math.exp(-r * T) * np.exp(-rho * occ) * np.maximum(S0 * np.exp(X) - K, 0.0)
            cols.append(_pair_mean(pay))
        return np.stack(cols, axis=1)

    s, s2, n = _run(cfg, block)
    return _estimates(s, s2, n)


def estimate_option(model: HyperExpModel, contract, cfg: SimConfig) -> PathFunctionalEstimate:
    """MC price of the step option at ``contract.maturity``."""
    return estimate_option_curve(model, contract, [contract.maturity], cfg)[0]


def appendix_spot_check(model: HyperExpModel, x: float, a: float, c: float, q: float, cfg: SimConfig,
                        n: int = 200):
    """Exit estimates for a sigma > 0 model and for its bounded-variation approximant.

    Returns (exact_model_estimates, approximant_estimates); both use the same
    configuration but independent random streams.
    """
    approx = bounded_variation_approximant(model, n)
    exact = estimate_exit(model, x, a, c, q, cfg)
    other = SimConfig(cfg.n_paths, cfg.dt, cfg.horizon, (int(cfg.seed) + 1) % 2**64, False,
                      cfg.block_size, cfg.workers)
    return exact, estimate_exit(model, x, a, c, q, other, dynamics=approx)
