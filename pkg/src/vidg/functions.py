"""Vectorized coefficient/source functions with explicit t^e singular factors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


def constant(c: float) -> Callable:
    c = float(c)

    def f(t):
        return np.full(np.shape(t), c)

    f.constant_value = c
    return f


def zero(t):
    return np.zeros(np.shape(t))


zero.constant_value = 0.0


def constant_value(g: Callable):
    """The value of a function built by :func:`constant`, else None."""
    return getattr(g, "constant_value", None)


@dataclass(frozen=True)
class FactoredFunction:
    """F(t) = sum_i t^{e_i} g_i(t), each g_i smooth on [0, T].

    Quadrature puts the t^{e_i} factor into the weight on the first interval,
    so f(t) ~ t^alpha sources do not spoil the nodal accuracy.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(e), g) for e, g in self.terms)
        for e, _ in terms:
            if e < 0:
                raise ValueError(f"singular exponents must be >= 0, got {e}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def smooth(cls, g: Callable) -> "FactoredFunction":
        return cls(((0.0, g),))

    @classmethod
    def of(cls, terms: Sequence) -> "FactoredFunction":
        return cls(tuple(terms))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for e, g in self.terms:
            out = out + (t**e if e else 1.0) * g(t)
        return out

    @property
    def is_zero(self) -> bool:
        return all(constant_value(g) == 0.0 for _, g in self.terms)

    @property
    def leading_exponent(self) -> float:
        return min(e for e, _ in self.terms) if self.terms else 0.0

    def reflected(self, T: float) -> "FactoredFunction":
        """t -> F(T - t), lumped into a single smooth term."""
        c = self.constant_value()
        if c is not None:
            return FactoredFunction.smooth(constant(c))
        return FactoredFunction.smooth(lambda t: self(T - np.asarray(t, dtype=float)))

    def constant_value(self):
        if len(self.terms) == 1 and self.terms[0][0] == 0:
            return constant_value(self.terms[0][1])
        if self.is_zero:
            return 0.0
        return None
