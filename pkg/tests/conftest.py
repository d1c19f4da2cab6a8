import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rotorpath.propagator import Discretization, QuantumSystem
from rotorpath.rotor import MOLECULES
from rotorpath.scan import ScanConfig


@pytest.fixture
def toy_system() -> QuantumSystem:
    """Four levels with rotor-like spacing, scaled to O(1e12 rad/s) frequencies."""
    scale = 1.0e-22
    return QuantumSystem(energies=scale * np.array([0.0, 1.0, 3.0, 6.0]))


@pytest.fixture
def toy_coupling() -> np.ndarray:
    coef = np.zeros((4, 4))
    for l in range(2):
        coef[l, l + 2] = coef[l + 2, l] = -0.8e12  # rad/s at E^2 = 1
    return coef


def gaussian_envelope(center: float = 0.5e-12, width: float = 0.2e-12):
    def f(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-(((t - center) / width) ** 2))

    return f


def make_scan_config(preset: str = "n14", **overrides) -> ScanConfig:
    defaults = dict(
        period_min=7.98e-12,
        period_max=9.38e-12,
        period_step=0.02e-12,
        molecule=MOLECULES[preset],
    )
    defaults.update(overrides)
    return ScanConfig(**defaults)


def cheap_discretization(n_slices: int = 600) -> Discretization:
    """Fixed slice count for tests where physics accuracy is not the point."""
    return Discretization(n_slices=n_slices)
