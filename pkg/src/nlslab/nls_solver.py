"""Radial NLS  i u_t + Lap u = mu c(t) |u|^p u  by Strang splitting.

The nonlinear substep is an exact phase rotation (|u| is invariant), the
linear substep is the exact free flow on the grid, so the discrete mass is
preserved up to transform round-off.  c(t) is 1, or the smooth time cutoff
chi_le(t, threshold) for the high-frequency v-equation.

Data splitting for u0 and a dyadic frequency N:

    v0 = chi_le(r, 10) P_{>=N} u0,     w0 = u0 - v0,

and w(t) is diagnosed as u(t) - v(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .localization import CutoffSpec, apply_cutoff, chi_annulus, chi_le, high, project
from .norms import Trajectory, lebesgue_values, sobolev_norm, time_norm
from .radial_transform import RadialField, RadialGrid, Side, to_frequency

# the local lifespan is normalized to 2 and the v-nonlinearity switched off at t = 1
LIFESPAN = 2.0
V_CUTOFF = LIFESPAN / 2
SPLIT_RADIUS = 10.0
GUARD_FRACTION = 0.9
GUARD_LEVEL = 1e-6


class GuardError(RuntimeError):
    """Mass reached the outer shell of the grid, where the ball boundary reflects."""


class BlowUpError(RuntimeError):
    """The numerical solution stopped being finite."""


class DivergenceError(RuntimeError):
    """Picard iterates grew instead of contracting."""


@dataclass(frozen=True)
class EquationParams:
    dim: int = 4
    p: float = 0.9
    mu: int = 1
    time_cutoff: float | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise ValueError(f"dimension must be an integer >= 3, got {self.dim}")
        if not 0 < self.p < 4 / self.dim:
            raise ValueError(
                f"p = {self.p} is not mass-subcritical: need 0 < p < 4/d = {4 / self.dim:.6g}"
            )
        if self.mu not in (1, -1):
            raise ValueError(f"mu must be +1 or -1, got {self.mu}")
        if self.time_cutoff is not None and not self.time_cutoff > 0:
            raise ValueError(f"time cutoff must be positive, got {self.time_cutoff}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def s_c(self) -> float:
        return self.dim / 2 - 2 / self.p

    def coefficient(self, t: float) -> float:
        """c(t): 1 without a cutoff, otherwise chi_le(t, threshold)."""
        if self.time_cutoff is None:
            return 1.0
        return float(chi_le(t, self.time_cutoff))

    def with_cutoff(self, threshold: float | None = V_CUTOFF) -> EquationParams:
        return EquationParams(self.dim, self.p, self.mu, threshold)


@dataclass(frozen=True)
class ConservedQuantities:
    mass: float
    energy: float
    momentum: float = 0.0
    momentum_residual: float = 0.0


def _power(values: np.ndarray, p: float) -> np.ndarray:
    # |u|^p as (|u|^2)^(p/2)
    return (values.real**2 + values.imag**2) ** (p / 2)


def conserved_quantities(f: RadialField, params: EquationParams) -> ConservedQuantities:
    """Mass ||u||^2, energy ||grad u||^2 + 2 mu/(p+2) ||u||_{p+2}^{p+2}.

    Radial symmetry makes the momentum vector vanish identically; the
    residual reported is int |Im(conj(u) u_r)| dx, which bounds every
    component and is zero for real fields.
    """
    if f.side is not Side.PHYSICAL:
        raise ValueError("conserved_quantities expects a physical-side field")
    grid = f.grid
    w = grid.quad_weights_space
    u = f.values
    mass = float(np.sum(w * np.abs(u) ** 2))
    if mass == 0:
        return ConservedQuantities(0.0, 0.0, 0.0, 0.0)
    kinetic = sobolev_norm(f, 1.0) ** 2
    potential = float(np.sum(w * _power(u, params.p + 2)))
    energy = kinetic + 2 * params.mu / (params.p + 2) * potential
    du = np.gradient(u, grid.r_nodes)
    residual = float(np.sum(w * np.abs(np.imag(np.conj(u) * du))))
    return ConservedQuantities(mass, energy, 0.0, residual)


def _nonlinear_phase(values: np.ndarray, coeff: float, dt: float, params: EquationParams) -> np.ndarray:
    if coeff == 0:
        return values
    return values * np.exp(-1j * params.mu * coeff * dt * _power(values, params.p))


def step(f: RadialField, t: float, dt: float, params: EquationParams) -> RadialField:
    """One Strang step from t to t + dt; returns on f's side."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    grid = f.grid
    half = np.exp(-0.5j * dt * grid.rho_nodes**2)
    freq = f.values if f.side is Side.FREQUENCY else grid.forward_values(f.values)
    phys = grid.inverse_values(freq * half)
    phys = _nonlinear_phase(phys, params.coefficient(t + dt / 2), dt, params)
    out = grid.forward_values(phys) * half
    if not np.all(np.isfinite(out)):
        raise BlowUpError(f"non-finite values after the step at t = {t + dt:.6g}")
    if f.side is Side.FREQUENCY:
        return f.with_values(out)
    return f.with_values(grid.inverse_values(out))


def _outer_fraction(grid: RadialGrid, values: np.ndarray) -> float:
    w = grid.quad_weights_space * np.abs(values) ** 2
    total = w.sum()
    return float(w[grid.r_nodes > GUARD_FRACTION * grid.radius_max].sum() / total) if total else 0.0


def _advance(grid, freq, t, t_end, dt, params):
    """Strang steps on frequency samples from t to t_end, consecutive half flows fused."""
    n = max(1, math.ceil((t_end - t) / dt - 1e-9))
    h = (t_end - t) / n
    half = np.exp(-0.5j * h * grid.rho_nodes**2)
    full = half * half
    freq = freq * half
    for k in range(n):
        phys = grid.inverse_values(freq)
        phys = _nonlinear_phase(phys, params.coefficient(t + (k + 0.5) * h), h, params)
        freq = grid.forward_values(phys)
        freq = freq * (full if k < n - 1 else half)
        if not np.all(np.isfinite(freq)):
            raise BlowUpError(f"non-finite values at t = {t + (k + 1) * h:.6g}")
    return freq


def simulate(
    f0: RadialField,
    params: EquationParams,
    horizon: float,
    schedule=None,
    *,
    dt: float = 1e-3,
    guard: float | None = GUARD_LEVEL,
) -> Trajectory:
    """Integrate from t = 0 and record physical snapshots at ``schedule``.

    Each interval between scheduled times is split into equal steps no
    longer than ``dt``.  The boundary guard is checked at every snapshot.
    """
    if not horizon >= 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    times = np.asarray([0.0, horizon] if schedule is None else schedule, dtype=float)
    if times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0 or times[-1] > horizon:
        raise ValueError("schedule must be increasing and inside [0, horizon]")
    grid = f0.grid
    phys0 = f0.values if f0.side is Side.PHYSICAL else grid.inverse_values(f0.values)
    freq = grid.forward_values(phys0)
    t = 0.0
    snaps = []
    for target in times:
        if target > t:
            freq = _advance(grid, freq, t, target, dt, params)
            t = target
            phys = grid.inverse_values(freq)
        else:
            phys = phys0
        if guard is not None:
            outer = _outer_fraction(grid, phys)
            if outer > guard:
                raise GuardError(
                    f"boundary guard tripped at t = {t:.6g}: mass fraction {outer:.3g} beyond "
                    f"r = {GUARD_FRACTION * grid.radius_max:.4g} exceeds {guard:g}"
                )
        snaps.append(RadialField(grid, Side.PHYSICAL, phys))
    return Trajectory(times, tuple(snaps), params)


# data splitting


@dataclass(frozen=True)
class SplitData:
    u0: RadialField
    v0: RadialField
    w0: RadialField
    N: float
    delta0: float


def choose_cutoff_frequency(u0: RadialField, s_c: float, delta0: float) -> float:
    """Smallest dyadic N >= 1 with ||P_{>=N} u0||_{H^{s_c}} <= delta0."""
    if not delta0 > 0:
        raise ValueError("delta0 must be positive; the target is otherwise unreachable")
    grid = u0.grid
    freq = u0 if u0.side is Side.FREQUENCY else to_frequency(u0)
    n = 1.0
    while 1.1 * n < grid.freq_max:
        tail = freq.with_values(freq.values * high(n).multiplier(grid.rho_nodes))
        if sobolev_norm(tail, s_c) <= delta0:
            return n
        n *= 2
    raise ValueError(
        f"no dyadic N below the grid frequency limit {grid.freq_max:.4g} reaches delta0 = {delta0:g}"
    )


def split_initial_data(u0: RadialField, N: float, delta0: float, s_c: float) -> SplitData:
    """v0 = chi_le(r, 10) P_{>=N} u0 and w0 = u0 - v0."""
    if not delta0 > 0:
        raise ValueError("delta0 must be positive")
    if u0.side is not Side.PHYSICAL:
        raise ValueError("split_initial_data expects physical-side data")
    tail = project(u0, high(N))
    size = sobolev_norm(tail, s_c)
    if size > delta0:
        raise ValueError(
            f"||P_>=N u0||_(H^s_c) = {size:.4g} exceeds delta0 = {delta0:g} at N = {N:g}; choose a larger N"
        )
    v0 = apply_cutoff(tail, CutoffSpec(SPLIT_RADIUS))
    w0 = u0 - v0
    return SplitData(u0, v0, w0, float(N), float(delta0))


def rough_data(
    grid: RadialGrid,
    s_c: float,
    freqs,
    seed: int,
    *,
    truncation: float = 1.0,
) -> RadialField:
    """Random-sign dyadic sum with each band of H^{s_c} size about one.

    g_hat = sum_M eps_M M^(-s_c - d/2) chi_M(rho), then cut off by
    chi_le(r, truncation) in space.  Signs come from a seeded generator.
    """
    rng = np.random.default_rng(seed)
    freqs = list(freqs)
    signs = rng.choice([-1.0, 1.0], size=len(freqs))
    rho = grid.rho_nodes
    d = grid.dim
    spectrum = np.zeros(grid.node_count)
    for eps, m in zip(signs, freqs):
        spectrum += eps * m ** (-s_c - d / 2) * chi_annulus(rho, m)
    phys = grid.inverse_values(spectrum.astype(complex)).real
    return RadialField(grid, Side.PHYSICAL, phys * chi_le(grid.r_nodes, truncation))


# Picard iteration of the Duhamel formula


@dataclass(frozen=True, eq=False)
class DuhamelResult:
    distances: list
    times: np.ndarray
    iterate: np.ndarray  # physical samples, shape (len(times), N)


def duhamel_iterate(
    f0: RadialField,
    params: EquationParams,
    T: float,
    iterations: int,
    *,
    time_points: int = 201,
    q: float = math.inf,
    r: float = 2.0,
    blowup_factor: float = 1e3,
) -> DuhamelResult:
    """Picard iterates of u = S(t) f0 - i mu int_0^t S(t-s) c(s) |u|^p u ds.

    The time integral is a cumulative trapezoid of exp(i s rho^2) F_hat(s)
    on a uniform grid; distances are L^q_t L^r_x norms of successive
    differences.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if iterations < 2:
        raise ValueError("need at least two iterations")
    grid = f0.grid
    times = np.linspace(0.0, T, time_points)
    phys0 = f0.values if f0.side is Side.PHYSICAL else grid.inverse_values(f0.values)
    freq0 = grid.forward_values(phys0)
    back = np.exp(-1j * np.outer(grid.rho_nodes**2, times))  # (N, nt)
    linear_freq = freq0[:, None] * back
    current = grid.inverse_values(linear_freq).T  # (nt, N)
    coeffs = np.array([params.coefficient(t) for t in times])
    h = times[1] - times[0]
    distances = []
    for _ in range(iterations):
        forcing = coeffs[:, None] * _power(current, params.p) * current
        g = grid.forward_values(forcing.T) * np.conj(back)  # exp(+i s rho^2) F_hat(s)
        acc = np.zeros_like(g)
        acc[:, 1:] = np.cumsum(0.5 * h * (g[:, 1:] + g[:, :-1]), axis=1)
        nxt = grid.inverse_values(linear_freq - 1j * params.mu * back * acc).T
        dist = time_norm(times, lebesgue_values(grid, nxt - current, r), q)
        distances.append(dist)
        if not np.all(np.isfinite(nxt)) or (
            distances[0] > 0 and dist > blowup_factor * distances[0]
        ):
            raise DivergenceError(
                f"Picard iteration diverged after {len(distances)} steps "
                f"(distance {dist:.3g} vs first {distances[0]:.3g})"
            )
        current = nxt
    return DuhamelResult(distances, times, current)
