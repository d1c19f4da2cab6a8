#!/usr/bin/env python3
"""One resonant kick sequence: thermal start vs final rotational populations.

Propagates the 14N2 model through the 7-pulse train at the resonant period
(8.38 ps) and compares the final thermally averaged populations with the
initial Boltzmann distribution at 6.3 K: most of the l = 0..2 population
climbs to l = 3..5.

Run: python demos/03_single_period_populations.py   (~5 s)
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rotorpath.rotor import MOLECULES, boltzmann_populations, rotor_energies
from rotorpath.scan import ScanConfig, run_period

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

config = ScanConfig(
    period_min=7.98e-12,
    period_max=9.38e-12,
    period_step=0.02e-12,
    molecule=MOLECULES["n14"],
)
period = 8.38e-12

initial = boltzmann_populations(config.temperature, rotor_energies(8, config.molecule)).populations
final = run_period(config, period)

print(f"14N2, tau_per = {period * 1e12:.2f} ps, T = {config.temperature} K")
print(" l   initial        final")
for l in range(8):
    print(f" {l}   {initial[l]:.6e}   {final[l]:.6e}")
print(f"population in l >= 3:  initial {initial[3:].sum():.4f} -> final {final[3:].sum():.4f}")

x = np.arange(8)
fig, ax = plt.subplots(figsize=(7, 4))
ax.bar(x - 0.2, initial, width=0.4, label="thermal start (6.3 K)")
ax.bar(x + 0.2, final, width=0.4, label="after 7 pulses at 8.38 ps")
ax.set_xlabel("rotational level l")
ax.set_ylabel("population")
ax.set_yscale("log")
ax.set_ylim(1e-8, 1.5)
ax.legend()
fig.tight_layout()
path = OUT / "single_period_populations.png"
fig.savefig(path, dpi=150)
print(f"saved {path}")
