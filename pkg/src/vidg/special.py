"""Series-based special functions: Mittag-Leffler and the Example 1 source series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class SeriesError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SeriesEvalPolicy:
    rtol: float = 1e-15
    max_terms: int = 200
    compensated: bool = True

    def __post_init__(self):
        if not 0 < self.rtol <= 1e-6:
            raise ValueError(f"series tolerance must lie in (0, 1e-6], got {self.rtol}")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")


DEFAULT_POLICY = SeriesEvalPolicy()


class _Sum:
    """Elementwise Neumaier summation."""

    def __init__(self, shape, compensated=True):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)
        self.compensated = compensated

    def add(self, x):
        if not self.compensated:
            self.s = self.s + x
            return
        t = self.s + x
        big = np.abs(self.s) >= np.abs(x)
        self.c = self.c + np.where(big, (self.s - t) + x, (x - t) + self.s)
        self.s = t

    @property
    def value(self):
        return self.s + self.c


def _series(log_mag_fn, sign_fn, shape, start, policy, what):
    """Sum sign_fn(p) exp(log_mag_fn(p)) from p = start until terms are negligible."""
    acc = _Sum(shape, policy.compensated)
    prev = np.full(shape, np.inf)
    for p in range(start, start + policy.max_terms):
        mag = np.exp(log_mag_fn(p))
        acc.add(sign_fn(p) * mag)
        val = np.abs(acc.value)
        done = (mag <= policy.rtol * val) | (mag == 0)
        # the terms must also have started to decrease
        if p > start and np.all(done & (mag <= prev)):
            return acc.value
        prev = mag
    raise SeriesError(f"{what} did not converge within {policy.max_terms} terms")


def mittag_leffler(mu: float, x, beta: float = 1.0, policy: SeriesEvalPolicy = DEFAULT_POLICY):
    """E_{mu,beta}(x) = sum_p x^p / Gamma(beta + p mu) for |x| <= 10."""
    if not (mu > 0 and beta > 0):
        raise ValueError(f"need mu > 0 and beta > 0, got ({mu}, {beta})")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 10):
        raise ValueError("series evaluation is restricted to |x| <= 10")
    with np.errstate(divide="ignore"):
        logx = np.log(np.abs(xa))
    neg = xa < 0

    def logmag(p):
        if p == 0:
            return np.full(xa.shape, -math.lgamma(beta))
        return p * logx - math.lgamma(beta + p * mu)

    def sign(p):
        return np.where(neg & (p % 2 == 1), -1.0, 1.0)

    out = _series(logmag, sign, xa.shape, 0, policy, "Mittag-Leffler series")
    return out if out.ndim else float(out)


def mittag_leffler_tail(mu: float, x, policy: SeriesEvalPolicy = DEFAULT_POLICY):
    """E_mu(x) - 1, summed from p = 1 so that small |x| keeps full relative accuracy."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 10):
        raise ValueError("series evaluation is restricted to |x| <= 10")
    with np.errstate(divide="ignore"):
        logx = np.log(np.abs(xa))
    neg = xa < 0
    out = _series(lambda p: p * logx - math.lgamma(1 + p * mu),
                  lambda p: np.where(neg & (p % 2 == 1), -1.0, 1.0),
                  xa.shape, 1, policy, "Mittag-Leffler series")
    return out if out.ndim else float(out)


def source_series(t, alpha: float, policy: SeriesEvalPolicy = DEFAULT_POLICY):
    """S(t) = sum_i (-t)^i / i! * Gamma(2+alpha+i) / Gamma(2+2alpha+i).

    t^(2alpha+1) S(t) is the memory term of t^(alpha+1) e^(-t) for the kernel
    (t-s)^(alpha-1)/Gamma(alpha).
    """
    ta = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        logt = np.log(np.abs(ta))
    neg = ta < 0

    def logmag(i):
        ratio = math.lgamma(2 + alpha + i) - math.lgamma(2 + 2 * alpha + i)
        if i == 0:
            return np.full(ta.shape, ratio)
        return i * logt - math.lgamma(i + 1) + ratio

    def sign(i):
        return np.where((i % 2 == 1) ^ neg, -1.0, 1.0) if i % 2 else np.ones(ta.shape)

    out = _series(logmag, sign, ta.shape, 0, policy, "source series")
    return out if out.ndim else float(out)
