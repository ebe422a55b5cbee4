"""Free-flow L^4 decay of a smooth bump in d = 4.

The L^4 norm of S(t)phi should fall like t^(-d(1/2 - 1/4)) = t^(-1) once
the bump has spread.  The ball is large enough that nothing reaches the
wall over the sampled times.

    python demos/dispersive_decay.py
"""

import numpy as np

from nlslab import build_grid, sample_radial
from nlslab.experiments import fit_power_law, smooth_bump
from nlslab.norms import lebesgue_norm
from nlslab.propagator import evolve_free
from nlslab.radial_transform import outer_mass_fraction

grid = build_grid(4, 8192, 1000.0)
phi = sample_radial(grid, smooth_bump(3.0))

samples = []
for t in 2.0 ** (np.arange(10) / 2):
    u = evolve_free(phi, t)
    samples.append((t, lebesgue_norm(u, 4)))
    print(f"t = {t:7.3f}   ||S(t)phi||_L4 = {samples[-1][1]:.4e}   "
          f"mass beyond 0.9R = {outer_mass_fraction(u):.1e}")

fit = fit_power_law(samples)
print(f"fitted slope {fit.slope:.4f} (expected -1), R^2 {fit.r_squared:.5f}")
