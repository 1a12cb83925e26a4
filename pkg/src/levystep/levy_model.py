"""Hyper-exponential jump-diffusion: Laplace exponent, right inverse, root sets.

The model is

    X_t = c t + sigma B_t - sum_{k <= N_t} xi_k,

with xi_k drawn from the mixture density sum_i a_i alpha_i exp(-alpha_i y).
Its Laplace exponent

    psi(lam) = c lam + sigma^2 lam^2 / 2 + eta (sum_i a_i alpha_i / (lam + alpha_i) - 1)

is a rational function, so psi(lam) = q has exactly N = n + 1 + [sigma > 0]
real roots, one per gap between consecutive poles -alpha_i.  Every scale
function of the model is a finite exponential sum over those roots.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .errors import BracketFailure, ConvergenceError, DegenerateRoots, DomainError, ModelError

TOL_ROOT = 1e-12
MAX_ITER = 200
POLE_GUARD = 1e-9
DEGENERATE_MEAN = 1e-12


@dataclass(frozen=True)
class HyperExpModel:
    """Spectrally negative jump-diffusion with hyper-exponential jumps.

    Parameters
    ----------
    drift_c : float
        Drift ``c`` per unit time.
    sigma : float
        Brownian volatility, >= 0.
    eta : float
        Jump intensity; must be 0 when there are no jumps and > 0 otherwise.
    weights, rates : sequence of float
        Mixture weights ``a_i`` (positive, summing to one) and exponential
        rates ``alpha_i`` (strictly increasing, positive).
    """

    drift_c: float
    sigma: float
    eta: float = 0.0
    weights: tuple = ()
    rates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "drift_c", float(self.drift_c))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        self._validate()

    def _validate(self):
        vals = (self.drift_c, self.sigma, self.eta) + self.weights + self.rates
        if not all(math.isfinite(v) for v in vals):
            raise ModelError("model parameters must be finite")
        if self.sigma < 0:
            raise ModelError(f"sigma must be >= 0, got {self.sigma}")
        if len(self.weights) != len(self.rates):
            raise ModelError("weights and rates must have the same length")
        n = len(self.rates)
        if n == 0:
            if self.eta != 0.0:
                raise ModelError("eta must be 0 when the model has no jumps")
            if self.sigma == 0.0:
                raise ModelError("a model without jumps needs sigma > 0")
            return
        if self.eta <= 0:
            raise ModelError(f"eta must be > 0 when jumps are present, got {self.eta}")
        if any(w <= 0 for w in self.weights):
            raise ModelError(f"jump weights must be positive, got {self.weights}")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ModelError(f"jump weights must sum to 1 (sum = {math.fsum(self.weights)!r})")
        if self.rates[0] <= 0 or any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise ModelError(f"jump rates must be positive and strictly increasing, got {self.rates}")
        if self.sigma == 0.0 and self.drift_c <= 0:
            raise ModelError("a model with sigma = 0 needs drift_c > 0 (otherwise paths are monotone)")

    # -- shape --------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.rates)

    @property
    def n_roots(self) -> int:
        return self.n + 1 + (self.sigma > 0)

    @property
    def mean(self) -> float:
        """E[X_1] = psi'(0+)."""
        return self.drift_c - self.eta * math.fsum(a / al for a, al in zip(self.weights, self.rates))

    @property
    def variance_rate(self) -> float:
        """Var[X_1]."""
        return self.sigma**2 + self.eta * math.fsum(2 * a / al**2 for a, al in zip(self.weights, self.rates))

    # -- convenience methods (duck-typed interface shared with GenericModel) --
    def psi(self, lam):
        return laplace_exponent(self, lam, extended=True)

    def dpsi(self, lam):
        return laplace_exponent_deriv(self, lam, extended=True)

    def phi(self, q):
        return phi(self, q)

    def scale(self, q):
        from .scale_fn import ScaleEvaluator

        return ScaleEvaluator(self, q).w

    def tilt(self, c: float) -> "HyperExpModel":
        """Model under the Esscher change of measure with parameter ``c``.

        The tilted exponent psi(theta + c) - psi(c) is again hyper-exponential,
        with rates alpha_i + c.
        """
        if self.n and c <= -self.rates[0]:
            raise DomainError(f"tilt parameter must exceed -alpha_1 = {-self.rates[0]}")
        drift = self.drift_c + self.sigma**2 * c
        if self.n == 0:
            return HyperExpModel(drift, self.sigma)
        rates = tuple(al + c for al in self.rates)
        mass = [self.eta * a * al / (al + c) for a, al in zip(self.weights, self.rates)]
        eta = math.fsum(mass)
        weights = [m / eta for m in mass]
        # renormalise the last weight so the sum is 1 to machine precision
        weights[-1] = 1.0 - math.fsum(weights[:-1])
        return HyperExpModel(drift, self.sigma, eta, tuple(weights), rates)

    # -- serialisation --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "drift": self.drift_c,
            "sigma": self.sigma,
            "eta": self.eta,
            "jumps": [{"weight": w, "rate": r} for w, r in zip(self.weights, self.rates)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HyperExpModel":
        if not isinstance(data, dict):
            raise ModelError("model must be a JSON object")
        unknown = set(data) - {"drift", "sigma", "eta", "jumps"}
        if unknown:
            raise ModelError(f"unknown model keys: {sorted(unknown)}")
        for key in ("drift", "sigma"):
            if key not in data:
                raise ModelError(f"missing model key {key!r}")
        jumps = data.get("jumps", [])
        if not isinstance(jumps, list):
            raise ModelError("'jumps' must be a list of {weight, rate} objects")
        weights, rates = [], []
        for j in jumps:
            if not isinstance(j, dict) or set(j) != {"weight", "rate"}:
                raise ModelError(f"each jump must be an object with keys 'weight' and 'rate', got {j!r}")
            weights.append(j["weight"])
            rates.append(j["rate"])
        try:
            return cls(data["drift"], data["sigma"], data.get("eta", 0.0), tuple(weights), tuple(rates))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"invalid model parameter: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HyperExpModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"malformed model JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "HyperExpModel":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class RootSet:
    """Roots of psi(lam) = q, ordered theta_1 > theta_2 > ... > theta_N.

    For real ``q`` the roots interlace with the poles -alpha_i; for complex
    ``q`` they are ordered by decreasing real part and ``theta_1`` is the
    analytic continuation of Phi.
    """

    q: object
    roots: np.ndarray
    psi_prime: np.ndarray = field(repr=False)

    @property
    def phi(self):
        return self.roots[0]

    @property
    def weights(self) -> np.ndarray:
        """Residues 1/psi'(theta_i) of 1/(psi - q)."""
        return 1.0 / self.psi_prime

    def __len__(self):
        return len(self.roots)


# ---------------------------------------------------------------------------
# Laplace exponent
# ---------------------------------------------------------------------------

def _check_domain(model: HyperExpModel, lam, extended: bool):
    if model.n == 0:
        return
    if isinstance(lam, (mpmath.mpf, mpmath.mpc)):
        arr = np.array([complex(lam)])
    else:
        arr = np.asarray(lam)
    if not extended and not np.iscomplexobj(arr):
        if np.any(arr <= -model.rates[0]):
            raise DomainError(f"psi is only defined for lam > -alpha_1 = {-model.rates[0]}")
    for al in model.rates:
        if np.any(np.abs(arr + al) < POLE_GUARD):
            raise DomainError(f"lam within {POLE_GUARD} of the pole {-al}")


def _psi(model, lam):
    val = model.drift_c * lam + 0.5 * model.sigma**2 * lam * lam - model.eta
    for a, al in zip(model.weights, model.rates):
        val = val + model.eta * a * al / (lam + al)
    return val


def _dpsi(model, lam):
    val = model.drift_c + model.sigma**2 * lam
    for a, al in zip(model.weights, model.rates):
        val = val - model.eta * a * al / (lam + al) ** 2
    return val


def _d2psi(model, lam):
    val = model.sigma**2 + 0 * lam
    for a, al in zip(model.weights, model.rates):
        val = val + 2 * model.eta * a * al / (lam + al) ** 3
    return val


def laplace_exponent(model: HyperExpModel, lam, extended: bool = False):
    """psi(lam).  Accepts floats, complex numbers, numpy arrays and mpmath numbers.

    With ``extended=False`` real arguments must satisfy lam > -alpha_1.  With
    ``extended=True`` the rational continuation is evaluated anywhere except
    within ``POLE_GUARD`` of a pole.
    """
    _check_domain(model, lam, extended)
    return _psi(model, lam)


def laplace_exponent_deriv(model: HyperExpModel, lam, extended: bool = False):
    """psi'(lam) = c + sigma^2 lam - eta sum a_i alpha_i / (lam + alpha_i)^2."""
    _check_domain(model, lam, extended)
    return _dpsi(model, lam)


def laplace_exponent_deriv2(model: HyperExpModel, lam, extended: bool = False):
    _check_domain(model, lam, extended)
    return _d2psi(model, lam)


def psi_divdiff(model: HyperExpModel, a, b):
    """Divided difference (psi(a) - psi(b))/(a - b), evaluated without cancellation.

    Equals psi'(a) when a == b.  Whenever psi(a) - psi(b) = q is known, this
    gives q/(a - b) stably, which is how every 1/(theta_i - theta_j) factor
    of the closed forms is computed.
    """
    val = model.drift_c + 0.5 * model.sigma**2 * (a + b)
    for w, al in zip(model.weights, model.rates):
        val = val - model.eta * w * al / ((a + al) * (b + al))
    return val


# ---------------------------------------------------------------------------
# Real roots
# ---------------------------------------------------------------------------

def _safe_newton(f, fp, lo, hi, guess=None):
    """Root of f in [lo, hi] given a sign change; Newton with bisection fallback."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketFailure("no sign change", (lo, hi))
    x = 0.5 * (lo + hi) if guess is None or not lo < guess < hi else guess
    for _ in range(MAX_ITER):
        fx = f(x)
        if fx == 0:
            return x
        if np.sign(fx) == np.sign(flo):
            lo, flo = x, fx
        else:
            hi = x
        d = fp(x)
        step = fx / d if d != 0 else np.inf
        x_new = x - step
        if not (lo < x_new < hi) or not np.isfinite(x_new):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= TOL_ROOT * 1e-3 * max(abs(x_new), 1e-3) or hi - lo <= 4e-16 * max(abs(x), 1e-300):
            # one polishing Newton step keeps the result at full precision
            fxn = f(x_new)
            dn = fp(x_new)
            if dn != 0 and fxn != 0:
                cand = x_new - fxn / dn
                if lo <= cand <= hi and abs(f(cand)) <= abs(fxn):
                    x_new = cand
            return x_new
        x = x_new
    raise ConvergenceError(f"root refinement did not converge in {MAX_ITER} iterations on [{lo}, {hi}]")


def _pole_side(model, f, pole, side, scale):
    """Point next to ``pole`` on ``side`` (+1 right, -1 left) where f has the pole's sign."""
    want = 1.0 if side > 0 else -1.0
    delta = 1e-3 * scale
    while delta > 1e-15 * max(1.0, abs(pole)):
        x = pole + side * delta
        if abs(x - pole) > POLE_GUARD * 1e-3:
            fx = f(x)
            if np.sign(fx) == want:
                return x
        delta *= 0.1
    raise BracketFailure("root too close to a pole to bracket", (pole - scale, pole + scale))


def _expand(f, start, direction, target_sign):
    x, step = start, 1.0
    for _ in range(200):
        x = start + direction * step
        if np.sign(f(x)) == target_sign:
            return x
        step *= 2.0
    raise BracketFailure("geometric expansion failed", (start, x))


def _argmin_psi(model) -> float:
    """Minimiser of psi on its convex branch (-alpha_1, inf)."""
    if model.n == 0:
        return -model.drift_c / model.sigma**2
    fp = lambda x: _dpsi(model, x)
    f2 = lambda x: _d2psi(model, x)
    # psi' -> -inf at the pole from the right: step towards it until psi' < 0
    pole, delta = -model.rates[0], 0.5 * model.rates[0]
    lo = pole + delta
    while fp(lo) >= 0:
        delta *= 0.1
        if delta < 1e-15 * model.rates[0]:
            raise BracketFailure("could not bracket the minimiser of psi", (pole, pole + model.rates[0]))
        lo = pole + delta
    hi = _expand(fp, max(lo, 0.0), +1, 1.0) if fp(max(lo, 0.0)) <= 0 else max(lo, 0.0)
    if hi == lo:
        hi = _expand(fp, lo, +1, 1.0)
    return _safe_newton(fp, f2, lo, hi)


def _real_roots(model: HyperExpModel, q: float) -> np.ndarray:
    f = lambda x: _psi(model, x) - q
    fp = lambda x: _dpsi(model, x)
    alphas = model.rates
    out = []

    if q > 0:
        split, left_hi, right_lo = 0.0, 0.0, 0.0
    else:
        m = model.mean
        if abs(m) < DEGENERATE_MEAN:
            raise DegenerateRoots("q = 0 with psi'(0+) = 0 gives a double root at 0")
        split = _argmin_psi(model)
        left_hi = right_lo = split

    # theta_1 = Phi(q): largest root, right of the split
    if q == 0 and model.mean >= 0:
        theta1 = 0.0
    else:
        hi = _expand(f, max(right_lo, 0.0), +1, 1.0) if f(max(right_lo, 0.0)) <= 0 else max(right_lo, 0.0)
        theta1 = _safe_newton(f, fp, right_lo, hi)
    out.append(theta1)

    # theta_2 in (-alpha_1, split]
    if q == 0 and model.mean < 0:
        out.append(0.0)
    else:
        if model.n == 0:
            lo = _expand(f, left_hi, -1, 1.0)
        else:
            lo = _pole_side(model, f, -alphas[0], +1, (alphas[0] + left_hi) if left_hi > -alphas[0] else alphas[0])
        out.append(_safe_newton(f, fp, lo, left_hi))

    # one root in each gap (-alpha_{i+1}, -alpha_i)
    for i in range(model.n - 1):
        gap = alphas[i + 1] - alphas[i]
        lo = _pole_side(model, f, -alphas[i + 1], +1, gap)
        hi = _pole_side(model, f, -alphas[i], -1, gap)
        out.append(_safe_newton(f, fp, lo, hi))

    # leftmost root below -alpha_n when sigma > 0
    if model.sigma > 0 and model.n > 0:
        hi = _pole_side(model, f, -alphas[-1], -1, alphas[-1])
        lo = _expand(f, hi, -1, 1.0)
        out.append(_safe_newton(f, fp, lo, hi))

    return np.array(out, dtype=float)


@lru_cache(maxsize=4096)
def _roots_cached(model: HyperExpModel, q: float) -> RootSet:
    r = _real_roots(model, q)
    d = np.array([_dpsi(model, t) for t in r])
    r.setflags(write=False)
    d.setflags(write=False)
    return RootSet(q=q, roots=r, psi_prime=d)


def roots(model: HyperExpModel, q: float) -> RootSet:
    """All N real roots of psi(lam) = q, bracketed by the pole interlacing.

    Raises
    ------
    DegenerateRoots
        If q = 0 and psi'(0+) vanishes (double root at 0).
    BracketFailure
        If a sign change cannot be located.
    """
    q = float(q)
    if not math.isfinite(q) or q < 0:
        raise DomainError(f"q must be a finite number >= 0, got {q}")
    return _roots_cached(model, q)


def phi(model: HyperExpModel, q: float) -> float:
    """Right inverse Phi(q) = sup{lam >= 0 : psi(lam) = q}."""
    q = float(q)
    if not math.isfinite(q) or q < 0:
        raise DomainError(f"q must be a finite number >= 0, got {q}")
    if q == 0 and model.mean >= 0:
        return 0.0
    f = lambda x: _psi(model, x) - q
    fp = lambda x: _dpsi(model, x)
    lo = 0.0 if q > 0 else _argmin_psi(model)
    hi = _expand(f, max(lo, 0.0), +1, 1.0) if f(max(lo, 0.0)) <= 0 else max(lo, 0.0)
    return float(_safe_newton(f, fp, lo, hi))


# ---------------------------------------------------------------------------
# Complex and extended-precision roots (used by Laplace inversion)
# ---------------------------------------------------------------------------

def _q_polynomial(model: HyperExpModel, q) -> np.ndarray:
    """Coefficients (ascending) of (psi(lam) - q) prod_i (lam + alpha_i)."""
    P = np.polynomial.polynomial
    prod = np.array([1.0 + 0j])
    for al in model.rates:
        prod = P.polymul(prod, [al, 1.0])
    base = np.array([-model.eta - q, model.drift_c, 0.5 * model.sigma**2], dtype=complex)
    out = P.polymul(base, prod)
    for i, (a, al) in enumerate(zip(model.weights, model.rates)):
        rest = np.array([1.0 + 0j])
        for j, be in enumerate(model.rates):
            if j != i:
                rest = P.polymul(rest, [be, 1.0])
        out = P.polyadd(out, model.eta * a * al * rest)
    return np.trim_zeros(out, "b")


def complex_roots(model: HyperExpModel, q: complex) -> RootSet:
    """Roots of psi(lam) = q for complex q, ordered by decreasing real part.

    Uses the companion-matrix eigenvalues of the numerator polynomial, then
    polishes each root with Newton's method on psi itself.
    """
    q = complex(q)
    coeffs = _q_polynomial(model, q)
    r = np.roots(coeffs[::-1]).astype(complex)
    for k in range(len(r)):
        z = r[k]
        for _ in range(8):
            step = (_psi(model, z) - q) / _dpsi(model, z)
            z = z - step
            if abs(step) <= 1e-15 * max(abs(z), 1.0):
                break
        r[k] = z
    r = r[np.argsort(-r.real, kind="stable")]
    d = np.array([_dpsi(model, z) for z in r])
    return RootSet(q=q, roots=r, psi_prime=d)


def roots_mp(model: HyperExpModel, q) -> RootSet:
    """Real roots at mpmath working precision (Newton-polished double roots)."""
    base = roots(model, float(q))
    q = mpmath.mpf(q)
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec + 4)
    out = []
    for t in base.roots:
        z = mpmath.mpf(float(t))
        for _ in range(12):
            step = (_psi(model, z) - q) / _dpsi(model, z)
            z -= step
            if abs(step) <= eps * max(abs(z), 1):
                break
        out.append(z)
    r = np.array(out, dtype=object)
    d = np.array([_dpsi(model, z) for z in out], dtype=object)
    return RootSet(q=q, roots=r, psi_prime=d)


def root_set(model: HyperExpModel, q) -> RootSet:
    """Dispatch on the numeric type of ``q``: float, complex or mpmath."""
    if isinstance(q, mpmath.mpf):
        return roots_mp(model, q)
    if isinstance(q, (complex, mpmath.mpc)) or np.iscomplexobj(q):
        if complex(q).imag == 0.0 and not isinstance(q, mpmath.mpc):
            return roots(model, complex(q).real)
        return complex_roots(model, complex(q))
    return roots(model, float(q))


def check_interlacing(model: HyperExpModel, rs: RootSet) -> bool:
    """Strict interlacing theta_N < -alpha_n < ... < -alpha_1 < theta_2 <= 0 <= theta_1."""
    r = list(rs.roots)
    if len(r) != model.n_roots:
        return False
    if not (r[1] <= 0 <= r[0]) or not r[1] < r[0]:
        return False
    poles = [-al for al in model.rates]
    for i, pole in enumerate(poles):
        if not (r[i + 2] < pole < r[i + 1]) if i + 2 < len(r) else not (pole < r[i + 1]):
            return False
    return True


def model_from_params(drift: float, sigma: float, eta: float = 0.0,
                      weights: Sequence[float] = (), rates: Sequence[float] = ()) -> HyperExpModel:
    return HyperExpModel(drift, sigma, eta, tuple(weights), tuple(rates))
