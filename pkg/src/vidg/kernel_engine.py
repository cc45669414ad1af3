"""Memory-term integrals of the DG weak form.

Every block entry has the form

    int_{I_n} phi_l(t) c(t) int_J (t - s)^(alpha-1) b(s) phi_m(s) ds dt

for a source interval J.  Three geometries occur:

* local (J = I_n, inner limit s < t): Duffy substitution s = t0 + (t - t0) u,
  Gauss-Jacobi in u with weight (1-u)^(alpha-1) and in t with weight tau^alpha;
* adjacent (J = I_{n-1}): the square is split along its diagonal and each
  triangle is collapsed onto the shared corner, leaving a tau^alpha weight and a
  smooth (k + h v)^(alpha-1) factor;
* far (J = I_j, j <= n-2): tensor Gauss-Legendre, sized from the distance to
  the kernel singularity.

b and c are evaluated directly, so the rules are exact for polynomial weights
of moderate degree and spectrally accurate for analytic ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc

from .functions import constant, constant_value
from .polyspace import (MAX_POINTS, LocalBasis, gauss_legendre, legendre_values,
                        points_for_ratio, unit_rule)


@dataclass(frozen=True)
class KernelWeight:
    """Separable factor of beta(t, s) = (t-s)^(alpha-1) c(t) b(s).

    The forward problem has c = 1; the time-reversed dual has b = 1 and
    c(t) = b(T - t).
    """

    alpha: float
    s_weight: Callable = field(default_factory=lambda: constant(1.0))
    t_weight: Optional[Callable] = None
    s_weight_degree_hint: Optional[int] = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def integer_alpha(self) -> bool:
        return float(self.alpha).is_integer()

    @property
    def is_zero(self) -> bool:
        return constant_value(self.s_weight) == 0.0 or (
            self.t_weight is not None and constant_value(self.t_weight) == 0.0)

    def b(self, s):
        return self.s_weight(s)

    def c(self, t):
        if self.t_weight is None:
            return np.ones(np.shape(t))
        return self.t_weight(t)

    def scaled(self, lam: float) -> "KernelWeight":
        b = self.s_weight
        return KernelWeight(self.alpha, lambda s: lam * b(s), self.t_weight,
                            self.s_weight_degree_hint)


def default_points(p: int) -> int:
    return p + 4


def frac_moment(alpha: float, m: int, s0: float, s1: float, t: float) -> float:
    """int_{s0}^{s1} (t - s)^(alpha-1) (s - s0)^m ds in closed form."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if m < 0 or int(m) != m:
        raise ValueError("m must be a non-negative integer")
    if not s0 < s1 <= t:
        raise ValueError(f"need s0 < s1 <= t, got ({s0}, {s1}, {t})")
    d0 = t - s0
    if s1 == t:
        return float(beta_fn(alpha, m + 1) * d0 ** (alpha + m))
    # incomplete beta in y = (s - s0)/(t - s0); avoids the cancellation of a binomial expansion
    x = (s1 - s0) / d0
    return float(beta_fn(m + 1, alpha) * betainc(m + 1, alpha, x) * d0 ** (alpha + m))


def _sizes(kw: KernelWeight, p: int, n_q: Optional[int]) -> int:
    n = n_q or default_points(p)
    hint = kw.s_weight_degree_hint
    if hint is not None:
        n = max(n, math.ceil((2 * p + hint + 2) / 2) + 1)
    return min(n, MAX_POINTS)


def local_memory_block(kw: KernelWeight, basis: LocalBasis, n_q: Optional[int] = None) -> np.ndarray:
    """Self-interval block: inner integral over [t_{n-1}, t]."""
    p, t0, k = basis.degree, basis.t0, basis.length
    if kw.is_zero:
        return np.zeros((p + 1, p + 1))
    a = kw.alpha
    n = _sizes(kw, p, n_q)
    tau, w_tau = unit_rule(n, a, 0.0)
    u, w_u = unit_rule(n, 0.0, a - 1.0)
    t = t0 + k * tau
    s = t0 + k * tau[:, None] * u[None, :]
    phi_t = legendre_values(2 * tau - 1, p)
    phi_s = legendre_values(2 * tau[:, None] * u[None, :] - 1, p)
    inner = np.einsum("k,qk,qkm->qm", w_u, kw.b(s), phi_s)
    return k ** (a + 1) * np.einsum("q,q,ql,qm->lm", w_tau, kw.c(t), phi_t, inner)


def _adjacent_block(kw, p, s0, s1, t1, n):
    a = kw.alpha
    h, k = s1 - s0, t1 - s1
    sigma_rule = unit_rule(n, a, 0.0)
    out = np.zeros((p + 1, p + 1))
    # triangle A (sigma <= tau): sigma = tau v;  triangle B (tau <= sigma): tau = sigma v
    for upper, near, far_ in ((True, k, h), (False, h, k)):
        x, w_x = sigma_rule
        nv = n if kw.integer_alpha else points_for_ratio(near / far_, n)
        v, w_v = unit_rule(nv)
        if upper:
            tau = np.broadcast_to(x[:, None], (n, nv))
            sig = x[:, None] * v[None, :]
        else:
            tau = x[:, None] * v[None, :]
            sig = np.broadcast_to(x[:, None], (n, nv))
        ker = (near + far_ * v) ** (a - 1)
        t = s1 + k * tau
        s = s1 - h * sig
        phi_t = legendre_values(2 * tau - 1, p)
        phi_s = legendre_values(1 - 2 * sig, p)
        wts = w_x[:, None] * (w_v * ker)[None, :] * kw.c(t) * kw.b(s)
        out += np.einsum("qr,qrl,qrm->lm", wts, phi_t, phi_s)
    return k * h * out


def _far_sizes(kw: KernelWeight, gap: float, h: float, k: float, n: int):
    if kw.integer_alpha:
        return n, n
    return points_for_ratio(gap / k, n), points_for_ratio(gap / h, n)


def _far_block(kw, p, s0, s1, t0, t1, n):
    a = kw.alpha
    h, k = s1 - s0, t1 - t0
    nt, ns = _far_sizes(kw, t0 - s1, h, k, n)
    gt, gs = gauss_legendre(nt), gauss_legendre(ns)
    t = t0 + k * (gt.nodes + 1) / 2
    s = s0 + h * (gs.nodes + 1) / 2
    ker = (t[:, None] - s[None, :]) ** (a - 1)
    left = (gt.weights * kw.c(t))[:, None] * legendre_values(gt.nodes, p)
    right = (gs.weights * kw.b(s))[:, None] * legendre_values(gs.nodes, p)
    return (k / 2) * (h / 2) * left.T @ ker @ right


def history_memory_block(kw: KernelWeight, source: LocalBasis, target: LocalBasis,
                         n_q: Optional[int] = None) -> np.ndarray:
    """Block coupling an earlier interval I_j to the current I_n (j < n)."""
    p = target.degree
    if source.degree != p:
        raise ValueError("source and target bases must share the degree")
    if source.t1 > target.t0:
        raise ValueError("source interval must precede the target interval")
    if kw.is_zero:
        return np.zeros((p + 1, p + 1))
    n = _sizes(kw, p, n_q)
    if source.t1 == target.t0:
        return _adjacent_block(kw, p, source.t0, source.t1, target.t1, n)
    return _far_block(kw, p, source.t0, source.t1, target.t0, target.t1, n)


def tensor_gauss_block(kw: KernelWeight, source: LocalBasis, target: LocalBasis, n: int) -> np.ndarray:
    """Nested Gauss-Legendre with the inner range cut at s = t.

    Only exact when the kernel is polynomial (integer alpha); used as an
    independent reference path.
    """
    p, a = target.degree, kw.alpha
    g = gauss_legendre(n)
    t = target.t0 + target.length * (g.nodes + 1) / 2
    out = np.zeros((p + 1, p + 1))
    for tq, wq, phil in zip(t, g.weights, legendre_values(g.nodes, p)):
        hi = min(tq, source.t1)
        if hi <= source.t0:
            continue
        s = source.t0 + (hi - source.t0) * (g.nodes + 1) / 2
        ws = g.weights * (hi - source.t0) / 2
        inner = (ws * (tq - s) ** (a - 1) * kw.b(s)) @ source(s)
        out += wq * target.length / 2 * kw.c(np.array([tq]))[0] * np.outer(phil, inner)
    return out


def _ladder(base: int) -> np.ndarray:
    steps = [0, 2, 4, 6, 8, 12, 16, 24, 32, 40, 48, 56]
    return np.unique(np.clip([base + s for s in steps] + [MAX_POINTS], base, MAX_POINTS))


class HistoryAccumulator:
    """Far-field history (j <= n-2) for a forward sweep, batched per step.

    Each completed interval contributes samples b(s) U(s) at Gauss points of
    a few fixed sizes; sizes are picked per (j, n) from the distance to the
    singularity and cached per interval.
    """

    def __init__(self, kw: KernelWeight, mesh, p: int, n_q: Optional[int] = None):
        self.kw, self.mesh, self.p = kw, mesh, p
        self.base = _sizes(kw, p, n_q)
        self.ladder = _ladder(self.base)
        self.coeffs = np.zeros((mesh.N, p + 1))
        self._cache = {}

    def record(self, n: int, c: np.ndarray):
        """Store the coefficients of the solved interval I_n (1-based)."""
        self.coeffs[n - 1] = c

    def _round(self, n):
        idx = np.searchsorted(self.ladder, n, side="left")
        return self.ladder[np.minimum(idx, self.ladder.size - 1)]

    def _sizes_for(self, ratios):
        if self.kw.integer_alpha:
            return np.full(ratios.shape, self.base)
        r = 1 + 2 * np.maximum(ratios, 1e-12)
        rho = r + np.sqrt(r * r - 1)
        n = np.ceil(17 * math.log(10) / (2 * np.log(rho))) + 2
        return self._round(np.clip(n, self.base, MAX_POINTS).astype(int))

    def _samples(self, v: int, rows: np.ndarray):
        N = self.mesh.N
        if v not in self._cache:
            self._cache[v] = (np.zeros((N, v)), np.zeros((N, v)), np.zeros(N, dtype=bool))
        S, Y, filled = self._cache[v]
        need = rows[~filled[rows]]
        if need.size:
            g = gauss_legendre(int(v))
            a = self.mesh.points[need][:, None]
            h = self.mesh.steps[need][:, None]
            s = a + h * (g.nodes + 1) / 2
            U = legendre_values(g.nodes, self.p) @ self.coeffs[need].T
            S[need] = s
            Y[need] = (h / 2) * g.weights * self.kw.b(s) * U.T
            filled[need] = True
        return S[rows], Y[rows]

    def far_vector(self, n: int) -> np.ndarray:
        """int_{I_n} phi_l c(t) int_0^{t_{n-2}} (t-s)^(alpha-1) b(s) U(s) ds dt."""
        p = self.p
        if n < 3 or self.kw.is_zero:
            return np.zeros(p + 1)
        pts, k = self.mesh.points, self.mesh.steps
        rows = np.arange(n - 2)  # 0-based intervals I_1..I_{n-2}
        t0 = pts[n - 1]
        kn = k[n - 1]
        nt = int(self._sizes_for(np.array([k[n - 2] / kn]))[0])
        g = gauss_legendre(nt)
        t = t0 + kn * (g.nodes + 1) / 2
        sizes = self._sizes_for((t0 - pts[rows + 1]) / k[rows])
        inner = np.zeros(nt)
        for v in np.unique(sizes):
            S, Y = self._samples(int(v), rows[sizes == v])
            D = t[:, None] - S.ravel()[None, :]
            inner += np.power(D, self.kw.alpha - 1) @ Y.ravel()
        weighted = g.weights * self.kw.c(t) * inner * (kn / 2)
        return legendre_values(g.nodes, p).T @ weighted
