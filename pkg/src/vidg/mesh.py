"""Time partitions of [0, T], uniform or graded towards t = 0."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class MeshError(ValueError):
    """Raised for invalid mesh parameters or point lists."""


@dataclass(frozen=True)
class Mesh:
    """Ordered partition 0 = t_0 < t_1 < ... < t_N = T.

    ``gamma`` is the grading exponent when the mesh came from
    :func:`build_graded`, and ``None`` for arbitrary point lists.
    """

    points: np.ndarray
    gamma: Optional[float] = None
    T: float = field(init=False)
    N: int = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise MeshError("a mesh needs at least two points")
        if pts[0] != 0.0:
            raise MeshError(f"mesh must start at 0, got {pts[0]!r}")
        if not np.all(np.isfinite(pts)):
            raise MeshError("mesh points must be finite")
        if np.any(np.diff(pts) <= 0.0):
            bad = int(np.argmin(np.diff(pts))) + 1
            raise MeshError(f"mesh points must be strictly increasing (violated at n={bad})")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "T", float(pts[-1]))
        object.__setattr__(self, "N", pts.size - 1)

    @classmethod
    def from_points(cls, points: Sequence[float]) -> "Mesh":
        """Arbitrary partition; grading assumptions are checked, not enforced."""
        return cls(np.asarray(points, dtype=float), gamma=None)

    @property
    def steps(self) -> np.ndarray:
        """Step sizes k_1 ... k_N."""
        return np.diff(self.points)

    @property
    def k(self) -> float:
        return float(self.steps.max())

    def interval(self, n: int) -> tuple[float, float]:
        """Endpoints of I_n for 1 <= n <= N."""
        if not 1 <= n <= self.N:
            raise IndexError(f"interval index {n} outside 1..{self.N}")
        return float(self.points[n - 1]), float(self.points[n])

    def reversed(self) -> "Mesh":
        """The mirrored mesh with steps k_N, ..., k_1."""
        pts = self.T - self.points[::-1]
        pts[0] = 0.0
        pts[-1] = self.T
        return Mesh(pts, gamma=None)

    def to_dict(self) -> dict:
        return {"T": self.T, "N": self.N, "gamma": self.gamma, "points": self.points.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Mesh":
        mesh = cls(np.asarray(d["points"], dtype=float), gamma=d.get("gamma"))
        if "N" in d and d["N"] != mesh.N:
            raise MeshError(f"N={d['N']} does not match {mesh.N} intervals")
        return mesh

    @classmethod
    def from_json(cls, text: str) -> "Mesh":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return self.gamma == other.gamma and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.gamma, self.points.tobytes()))


def build_graded(T: float, N: int, gamma: float = 1.0) -> Mesh:
    """Standard graded mesh t_n = (n/N)^gamma * T.

    n/N is exact for power-of-two N, so the even nodes of level N coincide
    bitwise with the nodes of level N/2.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 1):
        raise MeshError(f"N must be a positive integer, got {N!r}")
    if not (math.isfinite(T) and T > 0):
        raise MeshError(f"T must be positive, got {T!r}")
    if not (math.isfinite(gamma) and gamma >= 1):
        raise MeshError(f"grading exponent must satisfy gamma >= 1, got {gamma!r}")
    n = np.arange(N + 1, dtype=float)
    pts = T * (n / N) ** gamma
    pts[0] = 0.0
    pts[-1] = T
    return Mesh(pts, gamma=float(gamma))


@dataclass(frozen=True)
class GradingReport:
    """Realized constants of the grading assumptions.

    step_constant:   smallest C with k_n <= C k t_n^(1 - 1/gamma), n >= 2
    ratio_constant:  smallest C with t_n <= C t_{n-1}, n >= 2
    first_step_lower / first_step_upper: k_1 / k^gamma (the tightest c and C)
    """

    gamma: float
    step_constant: float
    ratio_constant: float
    first_step_lower: float
    first_step_upper: float
    monotone: bool
    first_violation: Optional[int]

    @property
    def C_gamma(self) -> float:
        return max(self.step_constant, self.ratio_constant, self.first_step_upper)

    @property
    def c_gamma(self) -> float:
        return self.first_step_lower


def check_grading_assumptions(m: Mesh, gamma: Optional[float] = None) -> GradingReport:
    if gamma is None:
        gamma = m.gamma if m.gamma is not None else 1.0
    k_n = m.steps
    k = k_n.max()
    t = m.points
    if m.N >= 2:
        step_c = float(np.max(k_n[1:] / (k * t[2:] ** (1.0 - 1.0 / gamma))))
        ratio_c = float(np.max(t[2:] / t[1:-1]))
    else:
        step_c = ratio_c = 1.0
    first = float(k_n[0] / k**gamma)
    # relative slack so that rounding in uniform meshes is not flagged
    dec = np.nonzero(k_n[1:] < k_n[:-1] * (1 - 8 * np.finfo(float).eps))[0]
    return GradingReport(
        gamma=float(gamma),
        step_constant=step_c,
        ratio_constant=ratio_c,
        first_step_lower=first,
        first_step_upper=first,
        monotone=dec.size == 0,
        first_violation=int(dec[0]) + 2 if dec.size else None,
    )


def step_size_condition(m: Mesh, alpha: float, mu_lo: float, mu_hi: float) -> float:
    """Left side of 4 T^alpha (mu^*/(alpha mu_*))^2 k^alpha < 1.

    The solver does not need it; analysis assumes the value is below one.
    """
    return 4.0 * m.T**alpha * (mu_hi / (alpha * mu_lo)) ** 2 * m.k**alpha
