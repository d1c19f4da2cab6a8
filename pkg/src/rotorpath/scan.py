"""Pulse-train period sweep: thermally averaged populations vs tau_per.

For every period on the grid the engine builds the pulse train, propagates
each initial level of the thermal mixture through the full window, mixes the
conditional probabilities with the Boltzmann weights, and finally normalizes
each level's populations by their maximum over the scan (the map
normalization used for the resonance figures).

Scan points are independent tasks. The grid is split into contiguous blocks,
one per worker, and results land in a buffer indexed by grid position, so
output is bit-identical for any worker count.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .constants import HBAR
from .errors import ConfigurationError, NumericalAbortError
from .field import PulseTrain, field_squared, simulation_window
from .propagator import (
    Discretization,
    QuantumSystem,
    TimeGrid,
    propagate_window,
    thermal_average,
)
from .rotor import (
    MoleculeSpec,
    boltzmann_populations,
    geometry_matrix,
    rotor_energies,
)

__all__ = [
    "ScanConfig",
    "ScanResult",
    "period_grid",
    "run_period",
    "run_scan",
    "find_resonance",
    "convergence_ladder",
    "write_scan_csv",
    "write_scan_pgm",
    "write_metadata",
]


@dataclass(frozen=True)
class ScanConfig:
    """Everything one period sweep needs.

    Periods are in seconds; the train's tau_per is the swept quantity, all
    other pulse parameters are fixed across the grid.
    """

    period_min: float
    period_max: float
    period_step: float
    molecule: MoleculeSpec
    n_levels: int = 8
    temperature: float = 6.3
    modulation_amplitude: float = 2.5
    peak_field: float = 6.0e9
    pulse_duration: float = 500e-15
    index_range: tuple[int, int] = (-3, 3)
    tail_widths: float = 5.0
    discretization: Discretization = Discretization()
    worker_count: int = 1
    apply_thermal_average: bool = True
    top_level_guard: float = 1e-3

    def __post_init__(self):
        if not self.period_min < self.period_max:
            raise ConfigurationError("scan.period_min_s must be below scan.period_max_s")
        if not self.period_step > 0:
            raise ConfigurationError("scan.period_step_s must be positive")
        if self.n_levels < 2:
            raise ConfigurationError("molecule.n_levels must be >= 2")
        if not self.temperature > 0:
            raise ConfigurationError("molecule.temperature_k must be positive")
        if self.worker_count < 1:
            raise ConfigurationError("workers must be >= 1")
        if period_grid_size(self.period_min, self.period_max, self.period_step) < 2:
            raise ConfigurationError("scan grid must contain at least 2 points")

    def make_train(self, period: float) -> PulseTrain:
        return PulseTrain(
            modulation_amplitude=self.modulation_amplitude,
            peak_field=self.peak_field,
            pulse_duration=self.pulse_duration,
            train_period=period,
            index_range=self.index_range,
        )


@dataclass(frozen=True)
class ScanResult:
    """Raw and per-level-normalized populations over the period grid."""

    periods: np.ndarray
    raw: np.ndarray
    normalized: np.ndarray
    metadata: dict[str, str]

    def __post_init__(self):
        for name in ("periods", "raw", "normalized"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)


def period_grid_size(period_min: float, period_max: float, period_step: float) -> int:
    return int(np.floor((period_max - period_min) / period_step + 1e-9)) + 1


def period_grid(config: ScanConfig) -> np.ndarray:
    """tau_per grid: period_min + i * period_step, inclusive of period_max."""
    n = period_grid_size(config.period_min, config.period_max, config.period_step)
    return config.period_min + config.period_step * np.arange(n)


def _system_and_coupling(config: ScanConfig) -> tuple[QuantumSystem, np.ndarray]:
    system = QuantumSystem(energies=rotor_energies(config.n_levels, config.molecule))
    g = geometry_matrix(config.n_levels).elements.copy()
    np.fill_diagonal(g, 0.0)
    # V/hbar = coupling_coef * E^2(tau), rad/s per (V/m)^2
    coupling_coef = -0.25 * config.molecule.delta_alpha * g / HBAR
    return system, coupling_coef


def peak_field_squared(train: PulseTrain) -> float:
    """Deterministic estimate of max E^2 over the window.

    Samples the pulse centers plus a fixed number of points between
    neighbors, which brackets the maximum for any overlap of the
    Gaussian envelopes.
    """
    centers = train.pulse_indices.astype(float) * train.train_period
    taus = [centers]
    for a, b in zip(centers[:-1], centers[1:]):
        taus.append(np.linspace(a, b, 33))
    e2 = field_squared(np.concatenate(taus), train)
    return float(np.max(e2))


def max_phase_rate(system: QuantumSystem, coupling_coef: np.ndarray, train: PulseTrain) -> float:
    """max(|V|/hbar, |omega|) over the window, rad/s."""
    v_peak = float(np.max(np.abs(coupling_coef))) * peak_field_squared(train)
    return max(system.max_frequency, v_peak)


def _final_amplitudes(
    config: ScanConfig,
    period: float,
    initial_levels=None,
    disc: Discretization | None = None,
) -> np.ndarray:
    disc = disc if disc is not None else config.discretization
    system, coupling_coef = _system_and_coupling(config)
    train = config.make_train(period)
    t_start, t_end = simulation_window(train, config.tail_widths)
    rate = max_phase_rate(system, coupling_coef, train)
    grid = TimeGrid.uniform(
        t_start, t_end, disc.resolve_n_slices(t_end - t_start, rate)
    )
    return propagate_window(
        system,
        coupling_coef,
        lambda t: field_squared(t, train),
        grid,
        disc,
        initial_levels=initial_levels,
    )


def run_period(
    config: ScanConfig, period: float, disc: Discretization | None = None
) -> np.ndarray:
    """Population vector after the full train at one period.

    Thermal averaging follows the initial Boltzmann mixture; with
    ``apply_thermal_average`` off the run starts from the pure ground
    state instead (sensitivity analysis).
    """
    try:
        if config.apply_thermal_average:
            amps = _final_amplitudes(config, period, disc=disc)
            conditional = (np.abs(amps) ** 2).T  # rows: l_in
            weights = boltzmann_populations(
                config.temperature, rotor_energies(config.n_levels, config.molecule)
            ).populations
            return thermal_average(conditional, weights)
        amps = _final_amplitudes(config, period, initial_levels=[0], disc=disc)
        return np.abs(amps[:, 0]) ** 2
    except NumericalAbortError as exc:
        raise NumericalAbortError(
            f"trajectory aborted at tau_per = {period * 1e12:.6g} ps: {exc}"
        ) from exc


def _run_block(config: ScanConfig, periods: np.ndarray) -> np.ndarray:
    return np.array([run_period(config, p) for p in periods])


def run_scan(config: ScanConfig) -> ScanResult:
    """Sweep the period grid and normalize each level by its scan maximum."""
    periods = period_grid(config)
    n_points = periods.size

    if config.worker_count == 1:
        raw = _run_block(config, periods)
    else:
        # Static block partition; the result buffer is indexed by grid
        # position, so arrival order cannot influence the output.
        blocks = np.array_split(np.arange(n_points), min(config.worker_count, n_points))
        raw = np.empty((n_points, config.n_levels))
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=config.worker_count
        ) as pool:
            futures = {
                pool.submit(_run_block, config, periods[idx]): idx
                for idx in blocks
                if idx.size
            }
            for fut in concurrent.futures.as_completed(futures):
                raw[futures[fut]] = fut.result()

    warnings = []
    top = raw[:, -1]
    if np.any(top > config.top_level_guard):
        worst = int(np.argmax(top))
        warnings.append(
            f"truncation guard: P(l={config.n_levels - 1}) reached "
            f"{top[worst]:.3e} at tau_per = {periods[worst] * 1e12:.6g} ps "
            f"(threshold {config.top_level_guard:.1e})"
        )

    col_max = raw.max(axis=0)
    if np.any(col_max <= 0):
        raise NumericalAbortError("a level stayed at zero population over the whole scan")
    normalized = raw / col_max

    metadata = scan_metadata(config)
    if warnings:
        metadata["warnings"] = "; ".join(warnings)
    return ScanResult(periods=periods, raw=raw, normalized=normalized, metadata=metadata)


def find_resonance(result: ScanResult, level_set) -> float:
    """Period maximizing the summed population of `level_set` (first on ties)."""
    levels = sorted(set(int(l) for l in level_set))
    if not levels:
        raise ConfigurationError("level set must be non-empty")
    if levels[0] < 0 or levels[-1] >= result.raw.shape[1]:
        raise ConfigurationError(f"level set {levels} outside the modeled range")
    score = result.raw[:, levels].sum(axis=1)
    return float(result.periods[int(np.argmax(score))])


def convergence_ladder(
    config: ScanConfig, period: float, n_rungs: int = 4
) -> list[tuple[int, np.ndarray]]:
    """Populations at one period for K, 2K, 4K, ... slice counts.

    Returns (n_slices, populations) per rung, n_rungs + 1 entries; useful
    for verifying Cauchy behavior of the discretization.
    """
    system, coupling_coef = _system_and_coupling(config)
    train = config.make_train(period)
    t_start, t_end = simulation_window(train, config.tail_widths)
    rate = max_phase_rate(system, coupling_coef, train)
    base = config.discretization.resolve_n_slices(t_end - t_start, rate)
    out = []
    for rung in range(n_rungs + 1):
        disc = replace(config.discretization, n_slices=base * 2**rung)
        out.append((base * 2**rung, run_period(config, period, disc=disc)))
    return out


# ---------------------------------------------------------------------------
# Persistence


def _fmt(value: float) -> str:
    return format(value, ".9g")


def scan_metadata(config: ScanConfig) -> dict[str, str]:
    """Flat config echo in the CLI key=value vocabulary."""
    d = config.discretization
    return {
        "code_version": __version__,
        "molecule.name": config.molecule.name,
        "molecule.moment_of_inertia_kg_m2": repr(config.molecule.moment_of_inertia),
        "molecule.delta_alpha_c_m2_per_v": repr(config.molecule.delta_alpha),
        "molecule.n_levels": str(config.n_levels),
        "molecule.temperature_k": repr(config.temperature),
        "field.modulation_amplitude": repr(config.modulation_amplitude),
        "field.peak_field_v_per_m": repr(config.peak_field),
        "field.pulse_duration_s": repr(config.pulse_duration),
        "field.index_min": str(config.index_range[0]),
        "field.index_max": str(config.index_range[1]),
        "field.tail_widths": repr(config.tail_widths),
        "scan.period_min_s": repr(config.period_min),
        "scan.period_max_s": repr(config.period_max),
        "scan.period_step_s": repr(config.period_step),
        "scan.thermal_average": str(config.apply_thermal_average).lower(),
        "scan.top_level_guard": repr(config.top_level_guard),
        "discretization.max_phase_per_slice": repr(d.max_phase_per_slice),
        "discretization.xi_nodes": str(d.xi_nodes),
        "discretization.time_nodes_per_slice": str(d.time_nodes_per_slice),
        "discretization.n_slices": str(d.n_slices or 0),
        "workers": str(config.worker_count),
    }


def write_scan_csv(result: ScanResult, path) -> None:
    """UTF-8 CSV: tau_per_ps,l,probability,normalized_probability.

    Rows ordered by (tau_per ascending, l ascending); floats carry 9
    significant digits.
    """
    lines = ["tau_per_ps,l,probability,normalized_probability"]
    for i, period in enumerate(result.periods):
        tau_ps = period / 1e-12
        for l in range(result.raw.shape[1]):
            lines.append(
                f"{_fmt(tau_ps)},{l},{_fmt(result.raw[i, l])},{_fmt(result.normalized[i, l])}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scan_pgm(result: ScanResult, path) -> None:
    """Plain PGM (P2) heatmap of the normalized map.

    Rows are levels l = 0..N-1 top to bottom, columns are periods
    ascending, gray = round(255 * normalized probability).
    """
    gray = np.rint(255.0 * result.normalized.T).astype(int)
    n_levels, n_periods = gray.shape
    lines = ["P2", f"{n_periods} {n_levels}", "255"]
    for row in gray:
        lines.append(" ".join(str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_metadata(metadata: dict[str, str], path) -> None:
    """Sidecar echoing the resolved configuration, one key = value per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in metadata.items():
            fh.write(f"{key} = {value}\n")
