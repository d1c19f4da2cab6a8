"""Rigid-rotor physics for diatomic molecules.

Energy ladder E_l = (hbar^2 / 2I) l(l+1), cos^2(theta) matrix elements
between m = 0 spherical harmonics, the polarizability coupling matrix
V_{l'l} = -(1/4) dalpha E^2 <l'|cos^2|l>,), and thermal (Boltzmann) initial
populations.

Conventions
-----------
- Levels are indexed l = 0 .. N-1, m = 0 throughout.
- SI units everywhere: energies in J, moments of inertia in kg*m^2,
  polarizability anisotropy in C*m^2/V, fields in V/m.
- The partition sum runs over the N modeled levels only and carries no
  (2l+1) degeneracy factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import HBAR, K_B
from .errors import ConfigurationError

__all__ = [
    "MoleculeSpec",
    "GeometryMatrix",
    "ThermalState",
    "MOLECULES",
    "rotor_energy",
    "rotor_energies",
    "cos2_matrix_element",
    "geometry_matrix",
    "interaction_matrix",
    "boltzmann_populations",
]


@dataclass(frozen=True)
class MoleculeSpec:
    """Rigid-rotor parameters of one diatomic species.

    Attributes
    ----------
    name : str
        Label, e.g. ``"14N2"``.
    moment_of_inertia : float
        I in kg*m^2.
    delta_alpha : float
        Polarizability anisotropy in C*m^2/V.
    reduced_mass, bond_length : float or None
        Optional; when both are given, I must equal mu*R^2 to 1e-12
        relative.
    """

    name: str
    moment_of_inertia: float
    delta_alpha: float
    reduced_mass: float | None = None
    bond_length: float | None = None

    def __post_init__(self):
        if not self.moment_of_inertia > 0:
            raise ConfigurationError(
                f"moment_of_inertia must be positive, got {self.moment_of_inertia}"
            )
        if not self.delta_alpha > 0:
            raise ConfigurationError(
                f"delta_alpha must be positive, got {self.delta_alpha}"
            )
        if self.reduced_mass is not None and self.bond_length is not None:
            derived = self.reduced_mass * self.bond_length**2
            if abs(self.moment_of_inertia - derived) > 1e-12 * self.moment_of_inertia:
                raise ConfigurationError(
                    "moment_of_inertia inconsistent with reduced_mass * bond_length^2: "
                    f"{self.moment_of_inertia} vs {derived}"
                )


@dataclass(frozen=True)
class GeometryMatrix:
    """Dimensionless <l'|cos^2(theta)|l> between m = 0 spherical harmonics."""

    elements: np.ndarray

    def __post_init__(self):
        e = self.elements
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ConfigurationError("geometry matrix must be square")
        if not np.allclose(e, e.T, atol=1e-14):
            raise ConfigurationError("geometry matrix must be symmetric")
        e.setflags(write=False)

    @property
    def n_levels(self) -> int:
        return self.elements.shape[0]


@dataclass(frozen=True)
class ThermalState:
    """Boltzmann populations over the modeled levels at temperature T."""

    temperature: float
    populations: np.ndarray
    partition_value: float

    def __post_init__(self):
        self.populations.setflags(write=False)


# Parameters of the two nitrogen isotopologues. Moments of inertia in
# kg*m^2, shared polarizability anisotropy in C*m^2/V.
MOLECULES: dict[str, MoleculeSpec] = {
    "n14": MoleculeSpec(name="14N2", moment_of_inertia=1.4e-46, delta_alpha=1.97e-40),
    "n15": MoleculeSpec(name="15N2", moment_of_inertia=1.5e-46, delta_alpha=1.97e-40),
}


def rotor_energy(l: int, spec: MoleculeSpec) -> float:
    """Rotational energy E_l = (hbar^2 / 2I) l(l+1) in J."""
    if l < 0:
        raise ConfigurationError(f"level index must be >= 0, got {l}")
    return HBAR**2 / (2.0 * spec.moment_of_inertia) * l * (l + 1)


def rotor_energies(n_levels: int, spec: MoleculeSpec) -> np.ndarray:
    """Energy ladder for levels 0 .. n_levels-1, shape (N,), in J."""
    l = np.arange(n_levels, dtype=float)
    return HBAR**2 / (2.0 * spec.moment_of_inertia) * l * (l + 1)


@lru_cache(maxsize=None)
def _legendre_quadrature(order: int):
    # Nodes/weights for integration over x = cos(theta) in [-1, 1].
    return np.polynomial.legendre.leggauss(order)


def _normalized_legendre_table(l_max: int, x: np.ndarray) -> np.ndarray:
    """P~_l(x) = sqrt((2l+1)/2) P_l(x) for l = 0..l_max, shape (l_max+1, len(x)).

    These are the theta parts of the m = 0 spherical harmonics up to the
    2*pi azimuthal normalization, so <l'|f(cos theta)|l> reduces to
    int P~_l' f P~_l dx.
    """
    table = np.empty((l_max + 1, x.size))
    p_prev = np.ones_like(x)
    table[0] = p_prev
    if l_max >= 1:
        p_cur = x.copy()
        table[1] = p_cur
        for l in range(1, l_max):
            p_next = ((2 * l + 1) * x * p_cur - l * p_prev) / (l + 1)
            table[l + 1] = p_next
            p_prev, p_cur = p_cur, p_next
    norm = np.sqrt((2 * np.arange(l_max + 1) + 1) / 2.0)
    return table * norm[:, None]


def cos2_matrix_element(l_to: int, l_from: int, quad_order: int | None = None) -> float:
    """<l_to|cos^2(theta)|l_from> for m = 0 spherical harmonics.

    Evaluated by Gauss-Legendre quadrature in cos(theta) over [-1, 1];
    the integrand is a polynomial of degree l_to + l_from + 2, so the
    default order (l_to + l_from + 4 nodes) integrates it exactly.
    Returns exact 0.0 whenever |l_to - l_from| is not 0 or 2 (parity and
    the degree-2 character of cos^2 forbid all other couplings).
    """
    if l_to < 0 or l_from < 0:
        raise ConfigurationError("level indices must be >= 0")
    if abs(l_to - l_from) not in (0, 2):
        return 0.0
    l_max = max(l_to, l_from)
    order = quad_order if quad_order is not None else 2 * (l_max + 2)
    x, w = _legendre_quadrature(order)
    table = _normalized_legendre_table(l_max, x)
    return float(np.sum(w * table[l_to] * x**2 * table[l_from]))


@lru_cache(maxsize=None)
def _geometry_elements(n_levels: int, quad_order: int | None) -> np.ndarray:
    g = np.zeros((n_levels, n_levels))
    for l_to in range(n_levels):
        for l_from in range(l_to, n_levels):
            v = cos2_matrix_element(l_to, l_from, quad_order)
            g[l_to, l_from] = v
            g[l_from, l_to] = v
    g.setflags(write=False)
    return g


def geometry_matrix(n_levels: int, quad_order: int | None = None) -> GeometryMatrix:
    """Full N x N matrix of <l'|cos^2(theta)|l>, computed once and cached."""
    if n_levels < 1:
        raise ConfigurationError("n_levels must be >= 1")
    return GeometryMatrix(elements=_geometry_elements(n_levels, quad_order).copy())


def interaction_matrix(
    field_squared: np.ndarray | float,
    spec: MoleculeSpec,
    geometry: GeometryMatrix,
) -> np.ndarray:
    """Coupling V_{l'l} = -(1/4) dalpha E^2 <l'|cos^2|l> with zeroed diagonal.

    Parameters
    ----------
    field_squared : scalar or array of E^2 samples, V^2/m^2.
    spec : molecule supplying delta_alpha.
    geometry : precomputed cos^2 matrix.

    Returns
    -------
    np.ndarray
        V in J, shape ``field_squared.shape + (N, N)``. The diagonal is
        zeroed: the propagator's slice-kernel derivation assumes
        V_ll = 0, and the direct integrator exposes a flag to restore it.
    """
    e2 = np.asarray(field_squared, dtype=float)
    if np.any(e2 < 0):
        raise ConfigurationError("field_squared must be non-negative")
    g = geometry.elements.copy()
    np.fill_diagonal(g, 0.0)
    return -0.25 * spec.delta_alpha * e2[..., None, None] * g


def boltzmann_populations(
    temperature: float, energies: np.ndarray
) -> ThermalState:
    """Thermal populations P_l = exp(-E_l / k_B T) / Z over the modeled levels.

    Z sums over the N levels only (no degeneracy factor).
    """
    if not temperature > 0:
        raise ConfigurationError(f"temperature must be positive, got {temperature}")
    energies = np.asarray(energies, dtype=float)
    # Shifted exponents keep the sum well scaled; populations are unchanged.
    shifted = np.exp(-(energies - energies[0]) / (K_B * temperature))
    z = float(np.exp(-energies[0] / (K_B * temperature)) * np.sum(shifted))
    return ThermalState(
        temperature=temperature,
        populations=shifted / np.sum(shifted),
        partition_value=z,
    )
