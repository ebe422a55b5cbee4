"""Spatial, Sobolev, weighted and mixed space-time norms on radial grids.

All L^r norms are grid quadratures with the surface factor built into the
weights; the sup norm is the maximum over nodes, a lower bound of the true
supremum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .radial_transform import RadialField, RadialGrid, Side, to_frequency, to_space


def lebesgue_values(grid: RadialGrid, values: np.ndarray, r: float) -> np.ndarray:
    """L^r norms of physical samples; ``values`` may be (N,) or (k, N)."""
    if not r >= 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {r}")
    mod = np.abs(values)
    if math.isinf(r):
        return mod.max(axis=-1)
    if r == 2:
        powered = mod * mod
    else:
        powered = mod**r
    return np.sum(grid.quad_weights_space * powered, axis=-1) ** (1.0 / r)


def lebesgue_norm(f: RadialField, r: float) -> float:
    """||f||_{L^r(R^d)} of a physical-side field; r = inf gives the node max."""
    if f.side is not Side.PHYSICAL:
        raise ValueError("lebesgue_norm expects a physical-side field")
    return float(lebesgue_values(f.grid, f.values, r))


def _check_order(grid: RadialGrid, s: float) -> None:
    if not s > -grid.dim / 2:
        raise ValueError(f"multiplier order s must exceed -d/2 = {-grid.dim / 2}, got {s}")


def apply_fractional(f: RadialField, s: float) -> RadialField:
    """|grad|^s f, i.e. multiplication by rho^s; result on f's side."""
    _check_order(f.grid, s)
    if s == 0:
        return f
    freq = f if f.side is Side.FREQUENCY else to_frequency(f)
    out = freq.with_values(freq.values * f.grid.rho_nodes**s)
    return out if f.side is Side.FREQUENCY else to_space(out)


def sobolev_norm(f: RadialField, s: float) -> float:
    """Homogeneous norm ||f||_{H^s-dot}, evaluated on the frequency side."""
    _check_order(f.grid, s)
    freq = f if f.side is Side.FREQUENCY else to_frequency(f)
    w = f.grid.quad_weights_freq
    return float(np.sqrt(np.sum(w * f.grid.rho_nodes ** (2 * s) * np.abs(freq.values) ** 2)))


@dataclass(frozen=True)
class WeightSpec:
    """Weight <t^alpha |grad|>^beta = (1 + t^(2 alpha) |grad|^2)^(beta/2)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError(f"weight alpha must be >= 1, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"weight beta must be >= 0, got {self.beta}")

    @property
    def product(self) -> float:
        return self.alpha * self.beta

    def multiplier(self, rho: np.ndarray, t: float) -> np.ndarray:
        return (1.0 + abs(t) ** (2 * self.alpha) * rho**2) ** (self.beta / 2)


def apply_weight(f: RadialField, t: float, w: WeightSpec) -> RadialField:
    if t == 0 or w.beta == 0:
        return f
    freq = f if f.side is Side.FREQUENCY else to_frequency(f)
    out = freq.with_values(freq.values * w.multiplier(f.grid.rho_nodes, t))
    return out if f.side is Side.FREQUENCY else to_space(out)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered physical snapshots on one grid."""

    times: np.ndarray
    snapshots: tuple
    params: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        snaps = tuple(self.snapshots)
        if times.ndim != 1 or len(times) != len(snaps):
            raise ValueError("times and snapshots must have equal lengths")
        if len(times) == 0:
            raise ValueError("trajectory is empty")
        if np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        grid = snaps[0].grid
        for s in snaps:
            if s.grid is not grid or s.side is not Side.PHYSICAL:
                raise ValueError("snapshots must be physical-side fields on one grid")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "snapshots", snaps)

    @property
    def grid(self) -> RadialGrid:
        return self.snapshots[0].grid

    def __len__(self) -> int:
        return len(self.times)

    def values(self) -> np.ndarray:
        return np.stack([s.values for s in self.snapshots])

    @classmethod
    def from_values(cls, grid: RadialGrid, times, values: np.ndarray, params=None) -> Trajectory:
        snaps = tuple(RadialField(grid, Side.PHYSICAL, v) for v in values)
        return cls(np.asarray(times, dtype=float), snaps, params)


def time_norm(times: np.ndarray, values: np.ndarray, q: float) -> float:
    """L^q in time of sampled nonnegative values (trapezoid; q = inf is max)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("no samples")
    if not q >= 1:
        raise ValueError(f"time exponent must be >= 1, got {q}")
    if math.isinf(q):
        return float(values.max())
    if values.size < 2:
        raise ValueError("a finite time exponent needs at least two samples")
    return float(trapezoid(values**q, times) ** (1.0 / q))


def mixed_norm(traj: Trajectory, q: float, r: float) -> float:
    """||u||_{L^q_t L^r_x} over the trajectory's time span."""
    spatial = lebesgue_values(traj.grid, traj.values(), r)
    return time_norm(traj.times, spatial, q)


class Verdict(str, enum.Enum):
    ADMISSIBLE = "admissible"
    Q_BELOW_TWO = "q >= 2 fails"
    R_NOT_ABOVE_TWO = "r > 2 fails"
    RADIAL_GAP = "2/q + (2d-1)/r < (2d-1)/2 fails"
    SCALING = "2/q + d/r = d/2 + gamma fails"


@dataclass(frozen=True)
class StrichartzTriple:
    q: float
    r: float
    gamma: float = 0.0


def validate_triple(tr: StrichartzTriple, d: int, tol: float = 1e-12) -> Verdict:
    """Check the radial Strichartz conditions in order; report the first failure."""
    inv_q = 0.0 if math.isinf(tr.q) else 1.0 / tr.q
    inv_r = 0.0 if math.isinf(tr.r) else 1.0 / tr.r
    if not tr.q >= 2:
        return Verdict.Q_BELOW_TWO
    if not tr.r > 2:
        return Verdict.R_NOT_ABOVE_TWO
    if not 2 * inv_q + (2 * d - 1) * inv_r < (2 * d - 1) / 2:
        return Verdict.RADIAL_GAP
    if abs(2 * inv_q + d * inv_r - (d / 2 + tr.gamma)) > tol:
        return Verdict.SCALING
    return Verdict.ADMISSIBLE


# radial Sobolev embedding ||x|^a u||_{L^q} <~ ||grad|^s u||_{L^p}


@dataclass(frozen=True)
class EmbeddingParams:
    alpha: float
    q: float
    p: float
    s: float


def embedding_violations(e: EmbeddingParams, d: int, tol: float = 1e-12) -> list[str]:
    """Conditions of the weighted radial embedding that fail; empty if usable."""
    inv_p = 0.0 if math.isinf(e.p) else 1.0 / e.p
    inv_q = 0.0 if math.isinf(e.q) else 1.0 / e.q
    bad = []
    if not e.alpha > -d * inv_q:
        bad.append("alpha > -d/q")
    if not (inv_q <= inv_p + tol and inv_p <= inv_q + e.s + tol):
        bad.append("1/q <= 1/p <= 1/q + s")
    if not (1 <= e.p and 1 <= e.q):
        bad.append("1 <= p, q <= inf")
    if not 0 < e.s < d:
        bad.append("0 < s < d")
    if abs(e.alpha + e.s - d * (inv_p - inv_q)) > 1e-9:
        bad.append("alpha + s = d(1/p - 1/q)")
    edges = [e.p == 1, math.isinf(e.p), e.q == 1, math.isinf(e.q), abs(inv_p - inv_q - e.s) <= tol]
    if sum(edges) > 1:
        bad.append("at most one endpoint equality")
    return bad


def embedding_ratio(f: RadialField, e: EmbeddingParams) -> float:
    """||x|^alpha f||_{L^q} / ||grad|^s f||_{L^p} on the grid."""
    phys = f if f.side is Side.PHYSICAL else to_space(f)
    num = lebesgue_norm(phys.with_values(phys.values * phys.grid.r_nodes**e.alpha), e.q)
    den = lebesgue_norm(apply_fractional(phys, e.s), e.p)
    if den == 0:
        raise ValueError("embedding ratio undefined for the zero field")
    return num / den


def sobolev_norms_many(grid: RadialGrid, freq_values: np.ndarray, s: float) -> np.ndarray:
    """Sobolev norms of a stack of frequency samples, shape (k, N) -> (k,)."""
    _check_order(grid, s)
    w = grid.quad_weights_freq * grid.rho_nodes ** (2 * s)
    return np.sqrt(np.sum(w * np.abs(freq_values) ** 2, axis=-1))

