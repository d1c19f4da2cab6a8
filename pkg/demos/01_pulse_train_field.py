#!/usr/bin/env python3
"""Shape of the Bessel-weighted pulse train.

The electric field is a periodic sequence of Gaussian envelopes whose
amplitudes follow J_n(A): with A = 2.5 the central pulse is nearly
suppressed (J_0 is small and negative) and the strongest kicks sit at
n = +-1. This script prints the pulse weights and plots E(tau) and
E^2(tau) over the full simulation window.

Run: python demos/01_pulse_train_field.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rotorpath.field import PulseTrain, bessel_j, field_amplitude, simulation_window

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

train = PulseTrain(
    modulation_amplitude=2.5,
    peak_field=6.0e9,
    pulse_duration=500e-15,
    train_period=8.38e-12,
)

print("pulse weights J_n(2.5):")
for n, w in zip(train.pulse_indices, train.pulse_weights):
    print(f"  n = {n:+d}: {w:+.6f}   (peak {w * train.peak_field:+.3e} V/m)")
print(f"check: J_3(2.5) = {bessel_j(3, 2.5):.12f}")

t0, t1 = simulation_window(train)
tau = np.linspace(t0, t1, 6001)
e = field_amplitude(tau, train)

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
ax1.plot(tau * 1e12, e / 1e9, lw=0.8)
ax1.set_ylabel("E  (GV/m)")
ax1.set_title("pulse train, A = 2.5, tau_per = 8.38 ps, tau_pul = 500 fs")
ax2.plot(tau * 1e12, (e / 1e9) ** 2, lw=0.8, color="tab:red")
ax2.set_ylabel("E$^2$  (GV/m)$^2$")
ax2.set_xlabel("tau  (ps)")
fig.tight_layout()
path = OUT / "pulse_train.png"
fig.savefig(path, dpi=150)
print(f"saved {path}")
