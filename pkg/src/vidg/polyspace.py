"""Legendre bases, Gauss rules and piecewise polynomial (DG) functions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre as L
from scipy.linalg import eigh_tridiagonal

from .mesh import Mesh

MAX_POINTS = 64


@dataclass(frozen=True)
class QuadRule:
    """Gauss rule on [-1, 1] for the weight (1-x)^a_exp (1+x)^b_exp."""

    nodes: np.ndarray
    weights: np.ndarray
    a_exp: float = 0.0
    b_exp: float = 0.0

    @property
    def kind(self) -> str:
        return "legendre" if self.a_exp == 0 and self.b_exp == 0 else "jacobi"

    def __call__(self, g: Callable) -> float:
        return float(np.dot(self.weights, g(self.nodes)))


def _check_n(n: int):
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= MAX_POINTS):
        raise ValueError(f"number of quadrature points must be in 1..{MAX_POINTS}, got {n!r}")


def _frozen(*arrays):
    for a in arrays:
        a.flags.writeable = False
    return arrays


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadRule:
    _check_n(n)
    x, w = L.leggauss(n)
    _frozen(x, w)
    return QuadRule(x, w)


@lru_cache(maxsize=None)
def gauss_jacobi(n: int, a_exp: float, b_exp: float) -> QuadRule:
    """Golub-Welsch rule for (1-x)^a_exp (1+x)^b_exp on [-1, 1]."""
    _check_n(n)
    a, b = float(a_exp), float(b_exp)
    if a <= -1 or b <= -1:
        raise ValueError(f"Jacobi exponents must exceed -1, got ({a}, {b})")
    if a == 0 and b == 0:
        return gauss_legendre(n)
    k = np.arange(1, n, dtype=float)
    s = 2 * k + a + b
    diag = np.empty(n)
    diag[0] = (b - a) / (a + b + 2)
    diag[1:] = (b * b - a * a) / (s * (s + 2))
    beta = np.empty(n - 1)
    if n > 1:
        # k = 1 written with (1 + a + b) cancelled, valid for a + b = -1
        beta[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
        kk, ss = k[1:], s[1:]
        beta[1:] = 4 * kk * (kk + a) * (kk + b) * (kk + a + b) / (ss**2 * (ss + 1) * (ss - 1))
    mu0 = math.exp((a + b + 1) * math.log(2) + math.lgamma(a + 1) + math.lgamma(b + 1)
                   - math.lgamma(a + b + 2))
    x, v = eigh_tridiagonal(diag, np.sqrt(beta))
    w = mu0 * v[0, :] ** 2
    _frozen(x, w)
    return QuadRule(x, w, a, b)


@lru_cache(maxsize=None)
def unit_rule(n: int, left_exp: float = 0.0, right_exp: float = 0.0):
    """Nodes and weights for int_0^1 tau^left_exp (1-tau)^right_exp g(tau) dtau."""
    rule = gauss_jacobi(n, right_exp, left_exp)
    tau = (rule.nodes + 1) / 2
    w = rule.weights / 2 ** (left_exp + right_exp + 1)
    return _frozen(tau, w)


def points_for_ratio(ratio: float, base: int, digits: float = 17.0) -> int:
    """Gauss-Legendre size for an integrand with an algebraic singularity
    at distance ``ratio`` (in interval lengths) beyond an endpoint.

    Uses the Bernstein-ellipse convergence factor rho^(-2n).
    """
    if not math.isfinite(ratio):
        return base
    r = 1 + 2 * max(ratio, 1e-12)
    rho = r + math.sqrt(r * r - 1)
    n = math.ceil(digits * math.log(10) / (2 * math.log(rho))) + 2
    return int(min(MAX_POINTS, max(base, n)))


def legendre_values(x: np.ndarray, p: int) -> np.ndarray:
    """P_0..P_p at reference points x; shape x.shape + (p+1,)."""
    x = np.asarray(x, dtype=float)
    return L.legvander(x.ravel(), p).reshape(x.shape + (p + 1,))


def stiffness_matrix(p: int) -> np.ndarray:
    """S[l, m] = int_{-1}^{1} P_m'(x) P_l(x) dx (2 when m > l, m + l odd)."""
    l, m = np.meshgrid(np.arange(p + 1), np.arange(p + 1), indexing="ij")
    return np.where((m > l) & ((m + l) % 2 == 1), 2.0, 0.0)


@dataclass(frozen=True)
class LocalBasis:
    """Legendre polynomials P_0..P_p mapped affinely onto [t0, t1]."""

    degree: int
    t0: float
    t1: float

    @property
    def length(self) -> float:
        return self.t1 - self.t0

    def to_reference(self, t):
        return (2 * np.asarray(t, dtype=float) - self.t0 - self.t1) / self.length

    def __call__(self, t) -> np.ndarray:
        return legendre_values(self.to_reference(t), self.degree)


class SolutionError(ValueError):
    pass


@dataclass(frozen=True)
class DgSolution:
    """Piecewise polynomial U with Legendre coefficients per interval.

    ``coeffs[n-1, r]`` multiplies P_r on I_n.
    """

    mesh: Mesh
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.mesh.N, self.degree + 1):
            raise SolutionError(f"coefficient array has shape {c.shape}, expected "
                                f"{(self.mesh.N, self.degree + 1)}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def left_traces(self) -> np.ndarray:
        """U_-^n for n = 1..N (P_r(1) = 1)."""
        return self.coeffs.sum(axis=1)

    def right_traces(self) -> np.ndarray:
        """U_+^{n-1} for n = 1..N (P_r(-1) = (-1)^r)."""
        signs = (-1.0) ** np.arange(self.degree + 1)
        return self.coeffs @ signs

    def jumps(self) -> np.ndarray:
        """[U]^n = U_+^n - U_-^n at interior nodes n = 1..N-1."""
        return self.right_traces()[1:] - self.left_traces()[:-1]

    def locate(self, t) -> np.ndarray:
        """1-based owning interval, with t in (t_{n-1}, t_n] and t = 0 in I_1."""
        n = np.searchsorted(self.mesh.points, t, side="left")
        return np.clip(n, 1, self.mesh.N)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        n = self.locate(t)
        a = self.mesh.points[n - 1]
        b = self.mesh.points[n]
        x = (2 * t - a - b) / (b - a)
        V = legendre_values(x, self.degree)
        return np.einsum("...r,...r->...", V, self.coeffs[n - 1])

    def eval(self, t: float, side: str = "left") -> float:
        T = self.mesh.T
        if not 0 <= t <= T:
            raise SolutionError(f"t={t!r} outside [0, {T}]")
        if side not in ("left", "right"):
            raise SolutionError(f"side must be 'left' or 'right', got {side!r}")
        pts = self.mesh.points
        if t == 0:
            side = "right"
        elif t == T:
            side = "left"
        idx = int(np.searchsorted(pts, t, side="left"))
        if idx <= self.mesh.N and pts[idx] == t:
            # at node t_idx: left trace lives on I_idx, right trace on I_{idx+1}
            n = idx if side == "left" else idx + 1
            x = 1.0 if side == "left" else -1.0
        else:
            n = idx
            a, b = pts[n - 1], pts[n]
            x = (2 * t - a - b) / (b - a)
        return float(legendre_values(x, self.degree) @ self.coeffs[n - 1])

    def reversed(self) -> "DgSolution":
        """V(t) = U(T - t) on the mirrored mesh."""
        signs = (-1.0) ** np.arange(self.degree + 1)
        return DgSolution(self.mesh.reversed(), self.degree, self.coeffs[::-1] * signs)

    def __add__(self, other: "DgSolution") -> "DgSolution":
        if other.mesh != self.mesh or other.degree != self.degree:
            raise SolutionError("solutions live on different spaces")
        return DgSolution(self.mesh, self.degree, self.coeffs + other.coeffs)

    def scale(self, lam: float) -> "DgSolution":
        return DgSolution(self.mesh, self.degree, lam * self.coeffs)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "mesh": self.mesh.to_dict(), "coeffs": self.coeffs.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "DgSolution":
        mesh = Mesh.from_dict(d["mesh"])
        return cls(mesh, int(d["degree"]), np.asarray(d["coeffs"], dtype=float).reshape(mesh.N, -1))

    @classmethod
    def from_json(cls, text: str) -> "DgSolution":
        return cls.from_dict(json.loads(text))


def interval_nodes(mesh: Mesh, n_q: int):
    """GL nodes on every interval: (t of shape (N, n_q), x_ref, w_ref)."""
    rule = gauss_legendre(n_q)
    a = mesh.points[:-1, None]
    k = mesh.steps[:, None]
    t = a + k * (rule.nodes + 1) / 2
    return t, rule.nodes, rule.weights


def pi_minus_project(u: Callable, m: Mesh, p: int, n_q: Optional[int] = None) -> DgSolution:
    """Right-endpoint interpolant, L2-orthogonal to degree p-1 on each interval."""
    if p < 0:
        raise ValueError("degree must be non-negative")
    n_q = n_q or p + 6
    coeffs = np.zeros((m.N, p + 1))
    if p > 0:
        t, x, w = interval_nodes(m, n_q)
        ut = np.asarray(u(t), dtype=float)
        P = legendre_values(x, p - 1)
        scale = (2 * np.arange(p) + 1) / 2
        coeffs[:, :p] = (ut * w) @ P * scale
    right = np.asarray(u(m.points[1:]), dtype=float)
    coeffs[:, p] = right - coeffs[:, :p].sum(axis=1)
    return DgSolution(m, p, coeffs)
