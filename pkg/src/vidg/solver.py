"""DG time stepping for u' + a u + int_0^t (t-s)^(alpha-1) b(s) u(s) ds = f."""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .functions import FactoredFunction, constant, constant_value, zero
from .kernel_engine import (HistoryAccumulator, KernelWeight, default_points,
                            history_memory_block, local_memory_block)
from .mesh import Mesh
from .polyspace import (DgSolution, LocalBasis, gauss_legendre, interval_nodes,
                        legendre_values, points_for_ratio, stiffness_matrix, unit_rule)

MAX_DEGREE = 10


class NumericalError(ArithmeticError):
    """Singular local system or non-finite values at a time step."""

    def __init__(self, message: str, interval: Optional[int] = None):
        super().__init__(message)
        self.interval = interval


@dataclass(frozen=True)
class ProblemSpec:
    """Data of u' + a(t) u + B u = f on (0, T), u(0) = u0.

    ``a`` and ``f`` may be plain vectorized callables (treated as smooth) or
    :class:`FactoredFunction` instances exposing t^e singular factors.
    ``sigma`` is the regularity exponent of the exact solution,
    |u^(j)(t)| <= C t^(sigma - j).
    """

    alpha: float
    a: FactoredFunction
    kernel: KernelWeight
    f: FactoredFunction
    u0: float = 0.0
    T: float = 1.0
    exact: Optional[Callable] = None
    exact_derivative: Optional[Callable] = None
    mu_bounds: Optional[tuple] = None
    sigma: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        a = float(self.alpha)
        if not (0 < a < 1 or (a >= 1 and a.is_integer())):
            raise ValueError(f"alpha must lie in (0,1) or be a positive integer, got {a}")
        if self.kernel.alpha != a:
            raise ValueError("kernel exponent does not match alpha")
        if not self.T > 0:
            raise ValueError("T must be positive")
        for name in ("a", "f"):
            v = getattr(self, name)
            if not isinstance(v, FactoredFunction):
                object.__setattr__(self, name, FactoredFunction.smooth(v))
        if self.mu_bounds is not None:
            self.check_mu_bounds()

    @property
    def a_sing_exp(self) -> Optional[float]:
        exps = [e for e, _ in self.a.terms if not float(e).is_integer()]
        return min(exps) if exps else None

    @property
    def sigma0(self) -> float:
        return self.f.leading_exponent

    def check_mu_bounds(self, samples: int = 1000) -> bool:
        """Warn (not raise) when a leaves [mu_*, mu^*] or |b| exceeds mu^*."""
        lo, hi = self.mu_bounds
        if not 0 < lo <= hi:
            raise ValueError(f"need 0 < mu_* <= mu^*, got {self.mu_bounds}")
        t = np.linspace(0.0, self.T, samples)
        at = self.a(t)
        ok = bool(np.all(at >= lo * (1 - 1e-14)) and np.all(at <= hi * (1 + 1e-14))
                  and np.all(np.abs(self.kernel.b(t)) <= hi * (1 + 1e-14)))
        if not ok:
            warnings.warn(f"{self.name}: coefficient bounds {self.mu_bounds} are violated",
                          stacklevel=3)
        return ok


@dataclass(frozen=True)
class SolveOptions:
    degree: int = 1
    quad_order: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 0..{MAX_DEGREE}, got {self.degree}")

    def points(self) -> int:
        if self.quad_order is not None:
            return int(self.quad_order)
        env = os.environ.get("VIDG_QUAD_ORDER")
        if env:
            return int(env)
        return default_points(self.degree)


@dataclass
class StepRecord:
    interval: int
    matrix: np.ndarray
    rhs: np.ndarray
    coeffs: np.ndarray


def _term_rule(e: float, t0: float, k: float, n: int):
    """Nodes t and weights W with sum W g(t) ~ int_{t0}^{t0+k} t^e g(t) dt."""
    if e == 0:
        g = gauss_legendre(n)
        return t0 + k * (g.nodes + 1) / 2, k * g.weights / 2
    if float(e).is_integer():
        g = gauss_legendre(min(n + math.ceil(e / 2), 64))
        t = t0 + k * (g.nodes + 1) / 2
        return t, k * g.weights / 2 * t**e
    if t0 == 0:
        tau, w = unit_rule(n, e, 0.0)
        return k * tau, k ** (e + 1) * w
    g = gauss_legendre(points_for_ratio(t0 / k, n))
    t = t0 + k * (g.nodes + 1) / 2
    return t, k * g.weights / 2 * t**e


def load_vector(F: FactoredFunction, t0: float, k: float, p: int, n: int) -> np.ndarray:
    """int_{t0}^{t0+k} F(t) phi_l(t) dt for l = 0..p."""
    out = np.zeros(p + 1)
    for e, g in F.terms:
        if constant_value(g) == 0.0:
            continue
        t, W = _term_rule(e, t0, k, n)
        out += legendre_values(2 * (t - t0) / k - 1, p).T @ (W * g(t))
    return out


def mass_matrix(F: FactoredFunction, t0: float, k: float, p: int, n: int) -> np.ndarray:
    """int_{t0}^{t0+k} F(t) phi_l(t) phi_m(t) dt."""
    out = np.zeros((p + 1, p + 1))
    for e, g in F.terms:
        if constant_value(g) == 0.0:
            continue
        t, W = _term_rule(e, t0, k, n)
        P = legendre_values(2 * (t - t0) / k - 1, p)
        out += (P * (W * g(t))[:, None]).T @ P
    return out


def _solve_local(M: np.ndarray, rhs: np.ndarray, n: int) -> np.ndarray:
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(rhs))):
        raise NumericalError(f"non-finite entries assembled on interval {n}", n)
    lu, piv = lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= np.finfo(float).eps * max(np.abs(M).max(), 1e-300):
        raise NumericalError(f"singular local system on interval {n}", n)
    c = lu_solve((lu, piv), rhs, check_finite=False)
    if not np.all(np.isfinite(c)):
        raise NumericalError(f"non-finite solution on interval {n}", n)
    return c


def dg_sweep(prob: ProblemSpec, m: Mesh, p: int, n_q: Optional[int] = None,
             trace: Optional[list] = None) -> DgSolution:
    """Forward sweep of the DG scheme for any degree p >= 0."""
    n_q = n_q or default_points(p)
    kw = prob.kernel
    signs = (-1.0) ** np.arange(p + 1)
    base = np.outer(signs, signs) + stiffness_matrix(p)
    hist = HistoryAccumulator(kw, m, p, n_q)
    coeffs = np.zeros((m.N, p + 1))
    prev_left = float(prob.u0)
    pts = m.points
    for n in range(1, m.N + 1):
        t0, t1 = float(pts[n - 1]), float(pts[n])
        k = t1 - t0
        target = LocalBasis(p, t0, t1)
        reaction = mass_matrix(prob.a, t0, k, p, n_q) + local_memory_block(kw, target, n_q)
        M = base + reaction
        known = load_vector(prob.f, t0, k, p, n_q)
        if n >= 2:
            source = LocalBasis(p, float(pts[n - 2]), t0)
            known -= history_memory_block(kw, source, target, n_q) @ coeffs[n - 2]
            known -= hist.far_vector(n)
        # solve for the increment d = U - U_-^{n-1}: the jump and stiffness terms
        # annihilate the constant, so rounding acts on a small quantity only
        d = _solve_local(M, known - reaction[:, 0] * prev_left, n)
        c = d.copy()
        c[0] += prev_left
        coeffs[n - 1] = c
        hist.record(n, c)
        if trace is not None:
            trace.append(StepRecord(n, M, signs * prev_left + known, c))
        prev_left = math.fsum([prev_left, *d])
    return DgSolution(m, p, coeffs)


def dg_solve(prob: ProblemSpec, m: Mesh, opts: SolveOptions = SolveOptions(),
             trace: Optional[list] = None) -> DgSolution:
    """DG solution of degree opts.degree; p = 0 uses the backward-Euler recursion."""
    if abs(m.T - prob.T) > 1e-12 * prob.T:
        raise ValueError(f"mesh ends at {m.T}, problem at T={prob.T}")
    if opts.degree == 0 and trace is None:
        return backward_euler_solve(prob, m, opts.points())
    return dg_sweep(prob, m, opts.degree, opts.points(), trace)


def backward_euler_solve(prob: ProblemSpec, m: Mesh, n_q: Optional[int] = None) -> DgSolution:
    """Piecewise-constant DG written as a scalar recursion.

    U^n (1 + int_{I_n} a + w_nn) = U^{n-1} + int_{I_n} f - sum_{j<n} U^j H_nj
    where w_nn and H_nj are the p = 0 memory blocks.
    """
    n_q = n_q or default_points(0)
    kw = prob.kernel
    pts = m.points
    U = np.zeros(m.N)
    prev = float(prob.u0)
    bases = [LocalBasis(0, float(pts[j]), float(pts[j + 1])) for j in range(m.N)]
    for n in range(1, m.N + 1):
        t0, t1 = bases[n - 1].t0, bases[n - 1].t1
        k = t1 - t0
        int_a = load_vector(prob.a, t0, k, 0, n_q)[0]
        int_f = load_vector(prob.f, t0, k, 0, n_q)[0]
        w_nn = local_memory_block(kw, bases[n - 1], n_q)[0, 0]
        history = 0.0
        if not kw.is_zero:
            for j in range(1, n):
                history += U[j - 1] * history_memory_block(kw, bases[j - 1], bases[n - 1], n_q)[0, 0]
        pivot = 1.0 + int_a + w_nn
        scale = 1.0 + abs(int_a) + abs(w_nn)
        if not math.isfinite(pivot) or abs(pivot) <= 4 * np.finfo(float).eps * scale:
            raise NumericalError(f"zero pivot in backward Euler step {n}", n)
        U[n - 1] = prev + (int_f - history - (int_a + w_nn) * prev) / pivot
        if not math.isfinite(U[n - 1]):
            raise NumericalError(f"non-finite value at step {n}", n)
        prev = U[n - 1]
    return DgSolution(m, 0, U[:, None])


def reverse_problem(prob: ProblemSpec, zT: float) -> ProblemSpec:
    """Forward form of the dual problem -z' + a z + B* z = 0, z(T) = zT."""
    T = prob.T
    kw = prob.kernel
    b, c = kw.s_weight, kw.t_weight

    def reflect(g):
        if g is None:
            return constant(1.0)
        cv = constant_value(g)
        if cv is not None:
            return constant(cv)
        return lambda t: g(T - np.asarray(t, dtype=float))

    rev_kernel = KernelWeight(kw.alpha, s_weight=reflect(c), t_weight=reflect(b),
                              s_weight_degree_hint=None)
    return ProblemSpec(alpha=prob.alpha, a=prob.a.reflected(T), kernel=rev_kernel,
                       f=FactoredFunction.smooth(zero), u0=float(zT), T=T,
                       name=f"{prob.name}-dual")


def dual_solve(prob: ProblemSpec, m: Mesh, zT: float, opts: SolveOptions = SolveOptions()) -> DgSolution:
    """Discrete dual Z, obtained as the forward DG solve on the mirrored mesh."""
    rev = dg_solve(reverse_problem(prob, zT), m.reversed(), opts)
    signs = (-1.0) ** np.arange(opts.degree + 1)
    return DgSolution(m, opts.degree, rev.coeffs[::-1] * signs)


def nodal_error(sol: DgSolution, exact: Callable):
    """|U_-^n - u(t_n)| for n = 1..N and their maximum."""
    errs = np.abs(sol.left_traces() - np.asarray(exact(sol.mesh.points[1:]), dtype=float))
    return errs, float(errs.max())


def l2_error(sol: DgSolution, exact, n_q: Optional[int] = None) -> float:
    """L2(0, T) norm of U - u; ``exact`` may itself be a DgSolution."""
    n_q = n_q or sol.degree + 6
    if isinstance(exact, DgSolution):
        n_q = max(n_q, exact.degree + 6)
        pts = np.union1d(sol.mesh.points, exact.mesh.points)
        g = gauss_legendre(n_q)
        a, k = pts[:-1, None], np.diff(pts)[:, None]
        t = a + k * (g.nodes + 1) / 2
        diff = sol(t) - exact(t)
        return float(math.sqrt(np.sum(k / 2 * g.weights * diff**2)))
    t, x, w = interval_nodes(sol.mesh, n_q)
    U = sol.coeffs @ legendre_values(x, sol.degree).T
    diff = U - np.asarray(exact(t), dtype=float)
    return float(math.sqrt(np.sum(sol.mesh.steps[:, None] / 2 * w * diff**2)))
