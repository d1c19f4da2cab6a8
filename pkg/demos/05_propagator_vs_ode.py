#!/usr/bin/env python3
"""Cross-validation: path-integral recurrence vs direct RK4 integration.

Runs both propagators on the same three-pulse 14N2 configuration and shows
per-level agreement, then demonstrates first-order convergence by doubling
the slice count. Also reports the size of the V_ll = 0 approximation the
slice kernel relies on (the direct integrator can keep the diagonal).

Run: python demos/05_propagator_vs_ode.py   (~30 s)
"""

import numpy as np

from rotorpath.constants import HBAR
from rotorpath.field import field_squared, simulation_window
from rotorpath.oracle import OdeConfig, integrate_all
from rotorpath.propagator import QuantumSystem, thermal_average
from rotorpath.rotor import MOLECULES, boltzmann_populations, geometry_matrix, rotor_energies
from rotorpath.scan import ScanConfig, convergence_ladder, max_phase_rate, run_period

config = ScanConfig(
    period_min=7.98e-12,
    period_max=9.38e-12,
    period_step=0.02e-12,
    molecule=MOLECULES["n14"],
    index_range=(-1, 1),  # three pulses keep the direct integration quick
)
period = 8.38e-12

system = QuantumSystem(energies=rotor_energies(8, config.molecule))
g = geometry_matrix(8).elements.copy()
coef = -0.25 * config.molecule.delta_alpha * g / HBAR
coef_nodiag = coef.copy()
np.fill_diagonal(coef_nodiag, 0.0)
train = config.make_train(period)
window = simulation_window(train)
f2 = lambda t: field_squared(t, train)
weights = boltzmann_populations(config.temperature, system.energies).populations
rate = max_phase_rate(system, coef_nodiag, train)

amps = integrate_all(system, coef_nodiag, f2, window, OdeConfig.for_rate(rate))
reference = thermal_average((np.abs(amps) ** 2).T, weights)
production = run_period(config, period)

print("three-pulse 14N2 at 8.38 ps, thermally averaged populations:")
print(" l   path integral   RK4 reference   |dP|")
for l in range(8):
    print(f" {l}   {production[l]:.8f}      {reference[l]:.8f}      {abs(production[l] - reference[l]):.1e}")
print(f"max |dP| = {np.max(np.abs(production - reference)):.2e}")

print()
print("slice-count ladder (change of populations per doubling):")
ladder = convergence_ladder(config, period, n_rungs=3)
for (k_prev, p_prev), (k_next, p_next) in zip(ladder, ladder[1:]):
    print(f"  K {k_prev:>7d} -> {k_next:>7d}: max change {np.max(np.abs(p_next - p_prev)):.2e}")

print()
amps_diag = integrate_all(
    system, coef, f2, window, OdeConfig.for_rate(rate, include_diagonal=True)
)
with_diag = thermal_average((np.abs(amps_diag) ** 2).T, weights)
print(
    "size of the V_ll = 0 approximation (RK4 with vs without the diagonal): "
    f"max |dP| = {np.max(np.abs(with_diag - reference)):.2e}"
)
