"""Smooth cutoffs and Littlewood-Paley projectors.

``chi_le(x, a)`` equals 1 for |x| <= a and 0 for |x| >= 1.1 a, with a
C-infinity monotone transition in between.  Frequency projectors are the
corresponding multipliers on the frequency side of a radial grid:

    P_{<=N}: chi_le(rho, N)
    P_{>N} = P_{>=N}: 1 - chi_le(rho, N)
    P_N: chi_le(rho, 2N) - chi_le(rho, N)   (supported in [N, 2.2N])
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .radial_transform import RadialField, Side, to_frequency, to_space

TRANSITION = 0.1


def smooth_step(s):
    """exp-based partition bump: 0 for s <= 0, 1 for s >= 1, smooth between."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def chi_le(x, a: float):
    """Smooth indicator of |x| <= a (zero beyond 1.1 a)."""
    if a <= 0:
        raise ValueError(f"cutoff threshold must be positive, got {a}")
    return 1.0 - smooth_step((np.abs(x) - a) / (TRANSITION * a))


def chi_ge(x, a: float):
    return 1.0 - chi_le(x, a)


def chi_annulus(x, a: float):
    """chi_a = chi_le(., 2a) - chi_le(., a)."""
    return chi_le(x, 2 * a) - chi_le(x, a)


def chi_band(x, a: float, b: float):
    """chi_{a <= . <= b} = chi_le(., b) - chi_le(., a)."""
    if not b > a:
        raise ValueError(f"band needs b > a, got a={a}, b={b}")
    return chi_le(x, b) - chi_le(x, a)


class CutoffKind(str, enum.Enum):
    BELOW = "below"
    ABOVE = "above"
    ANNULUS = "annulus"
    BAND = "band"


@dataclass(frozen=True)
class CutoffSpec:
    threshold: float
    kind: CutoffKind = CutoffKind.BELOW
    upper: float | None = None

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError(f"cutoff threshold must be positive, got {self.threshold}")
        object.__setattr__(self, "kind", CutoffKind(self.kind))
        if self.kind is CutoffKind.BAND and (self.upper is None or self.upper <= self.threshold):
            raise ValueError("band cutoff needs an upper threshold above the lower one")

    def profile(self, x):
        a = self.threshold
        if self.kind is CutoffKind.BELOW:
            return chi_le(x, a)
        if self.kind is CutoffKind.ABOVE:
            return chi_ge(x, a)
        if self.kind is CutoffKind.ANNULUS:
            return chi_annulus(x, a)
        return chi_band(x, a, self.upper)


class BandKind(str, enum.Enum):
    LOW = "low"
    HIGH = "high"
    BAND = "band"


@dataclass(frozen=True)
class BandSpec:
    cutoff_freq: float
    kind: BandKind = BandKind.BAND

    def __post_init__(self):
        if not self.cutoff_freq > 0:
            raise ValueError(f"projector frequency must be positive, got {self.cutoff_freq}")
        object.__setattr__(self, "kind", BandKind(self.kind))

    def multiplier(self, rho):
        n = self.cutoff_freq
        if self.kind is BandKind.LOW:
            return chi_le(rho, n)
        if self.kind is BandKind.HIGH:
            return chi_ge(rho, n)
        return chi_annulus(rho, n)


def apply_cutoff(f: RadialField, spec: CutoffSpec) -> RadialField:
    """Multiply a physical-side field by the cutoff profile at the r-nodes."""
    if f.side is not Side.PHYSICAL:
        raise ValueError("spatial cutoffs act on physical-side fields")
    return f.with_values(f.values * spec.profile(f.grid.r_nodes))


def apply_time_cutoff(t: float, threshold: float) -> float:
    """chi_le(|t|, threshold) as a scalar."""
    return float(chi_le(t, threshold))


def project(f: RadialField, spec: BandSpec) -> RadialField:
    """Apply a Littlewood-Paley multiplier; the result stays on f's side."""
    freq = f if f.side is Side.FREQUENCY else to_frequency(f)
    out = freq.with_values(freq.values * spec.multiplier(f.grid.rho_nodes))
    return out if f.side is Side.FREQUENCY else to_space(out)


def low(n: float) -> BandSpec:
    return BandSpec(n, BandKind.LOW)


def high(n: float) -> BandSpec:
    return BandSpec(n, BandKind.HIGH)


def band(n: float) -> BandSpec:
    return BandSpec(n, BandKind.BAND)


def dyadic_range(lo: float, hi: float) -> list[float]:
    """Powers of two 2^k with lo <= 2^k <= hi."""
    if lo <= 0 or hi < lo:
        raise ValueError(f"invalid dyadic range [{lo}, {hi}]")
    k0 = math.ceil(math.log2(lo) - 1e-12)
    k1 = math.floor(math.log2(hi) + 1e-12)
    return [2.0**k for k in range(k0, k1 + 1)]
