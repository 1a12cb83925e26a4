"""Piecewise exponential sums and their closed-form convolutions.

Every kernel of a hyper-exponential model is, on each piece of its domain, a
finite sum ``sum_k c_k exp(r_k X + s_k)``.  Integrals of products of such
sums are again closed-form.  They are evaluated here by anchoring each
segment integral at its larger endpoint, so only ``E0(t) = (e^t - 1)/t`` with
``t <= 0`` is needed: no overflow, and no cancellation when two rates nearly
coincide (E0 is smooth through t = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError


def e0(t):
    """(exp(t) - 1)/t with the removable singularity at 0 filled in."""
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    nz = t != 0
    out[nz] = np.expm1(t[nz]) / t[nz]
    return out


def segment_integral(coef, e_lo, e_hi, length):
    """Integral of ``coef * exp(e(z))`` over a segment of given length.

    ``e`` is affine in z with endpoint values ``e_lo`` and ``e_hi``.
    """
    e_lo = np.asarray(e_lo, dtype=float)
    e_hi = np.asarray(e_hi, dtype=float)
    top = np.maximum(e_lo, e_hi)
    return coef * length * np.exp(top) * e0(-np.abs(e_hi - e_lo))


@dataclass(frozen=True)
class ExpTerms:
    """sum_k coef_k exp(rate_k X + shift_k)."""

    coef: np.ndarray
    rate: np.ndarray
    shift: np.ndarray

    @classmethod
    def make(cls, coef, rate, shift=None):
        coef = np.atleast_1d(np.asarray(coef, dtype=float)).ravel()
        rate = np.atleast_1d(np.asarray(rate, dtype=float)).ravel()
        shift = np.zeros_like(rate) if shift is None else np.atleast_1d(np.asarray(shift, dtype=float)).ravel()
        coef, rate, shift = np.broadcast_arrays(coef, rate, shift)
        return cls(coef.copy(), rate.copy(), shift.copy())

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        e = np.multiply.outer(X, self.rate) + self.shift
        with np.errstate(over="ignore"):
            return np.sum(self.coef * np.exp(e), axis=-1)


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    terms: ExpTerms


@dataclass(frozen=True)
class PiecewiseExp:
    """Function equal to an exponential sum on each half-open piece [lo, hi), zero elsewhere."""

    pieces: tuple

    @classmethod
    def single(cls, lo, hi, coef, rate, shift=None):
        return cls((Piece(float(lo), float(hi), ExpTerms.make(coef, rate, shift)),))

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape)
        for pc in self.pieces:
            mask = (X >= pc.lo) & (X < pc.hi)
            if np.any(mask):
                out[mask] = pc.terms(X[mask])
        return out if out.ndim else float(out)


def _segment_terms(coef, e_lo, e_hi, length):
    """Coefficients and exponents of :func:`segment_integral` before exponentiation."""
    e_lo = np.asarray(e_lo, dtype=float)
    e_hi = np.asarray(e_hi, dtype=float)
    c = coef * length * e0(-np.abs(e_hi - e_lo))
    return np.ravel(c), np.ravel(np.maximum(e_lo, e_hi))


def _empty():
    return np.zeros(0), np.zeros(0)


def integrate_terms(f: PiecewiseExp, lo: float, hi: float, rate: float = 0.0, shift: float = 0.0):
    """(coef, exponent) arrays whose sum of coef * exp(exponent) is
    the integral over [lo, hi] of f(z) exp(rate z + shift)."""
    cs, es = [], []
    for pc in f.pieces:
        z0, z1 = max(lo, pc.lo), min(hi, pc.hi)
        if not z1 > z0:
            continue
        t = pc.terms
        r = t.rate + rate
        s = t.shift + shift
        c, e = _segment_terms(t.coef, r * z0 + s, r * z1 + s, z1 - z0)
        cs.append(c)
        es.append(e)
    return (np.concatenate(cs), np.concatenate(es)) if cs else _empty()


def conv_terms(f: PiecewiseExp, g: PiecewiseExp, x: float, lo: float, hi: float):
    """(coef, exponent) arrays for the integral over z in [lo, hi] of f(x - z) g(z)."""
    cs, es = [], []
    for pf in f.pieces:
        for pg in g.pieces:
            z0 = max(lo, x - pf.hi, pg.lo)
            z1 = min(hi, x - pf.lo, pg.hi)
            if not z1 > z0:
                continue
            tf, tg = pf.terms, pg.terms
            # exponent rf (x - z) + sf + rg z + sg at both segment ends
            base = tf.rate[:, None] * x + tf.shift[:, None] + tg.shift[None, :]
            slope = tg.rate[None, :] - tf.rate[:, None]
            c0 = tf.coef[:, None] * tg.coef[None, :]
            c, e = _segment_terms(c0, base + slope * z0, base + slope * z1, z1 - z0)
            cs.append(c)
            es.append(e)
    return (np.concatenate(cs), np.concatenate(es)) if cs else _empty()


def total(coef, expo) -> float:
    """sum coef * exp(expo)."""
    return float(np.sum(np.asarray(coef) * np.exp(np.asarray(expo)))) if np.size(coef) else 0.0


def log_total(coef, expo) -> float:
    """log of sum coef * exp(expo) for a positive total, without overflow."""
    coef = np.asarray(coef, dtype=float)
    expo = np.asarray(expo, dtype=float)
    keep = coef != 0
    coef, expo = coef[keep], expo[keep]
    if coef.size == 0:
        return -np.inf
    top = float(np.max(expo))
    s = float(np.sum(coef * np.exp(expo - top)))
    if not s > 0:
        raise NumericalError(f"log_total of a non-positive sum ({s})")
    return top + math.log(s)


def integrate(f: PiecewiseExp, lo: float, hi: float, rate: float = 0.0, shift: float = 0.0) -> float:
    """Integral over [lo, hi] of f(z) exp(rate z + shift)."""
    return total(*integrate_terms(f, lo, hi, rate, shift))


def conv(f: PiecewiseExp, g: PiecewiseExp, x: float, lo: float, hi: float) -> float:
    """Integral over z in [lo, hi] of f(x - z) g(z), in closed form."""
    return total(*conv_terms(f, g, x, lo, hi))
