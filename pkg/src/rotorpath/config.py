"""Run configuration: flat key=value files, presets, typed assembly.

Every physical key carries its SI unit as a suffix so a config file can be
read without consulting the docs. Precedence when assembling a run:
built-in defaults, then the preset (if any), then the config file, then
command-line flags.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError
from .field import PulseTrain
from .propagator import Discretization
from .rotor import MoleculeSpec
from .scan import ScanConfig

__all__ = [
    "RunConfig",
    "CONFIG_HELP",
    "PRESETS",
    "parse_config_text",
    "preset_values",
    "preset_text",
    "build_run_config",
]

# key -> (parser, description with units)
_BOOL_TRUE = {"true", "yes", "1", "on"}
_BOOL_FALSE = {"false", "no", "0", "off"}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in _BOOL_TRUE:
        return True
    if t in _BOOL_FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


CONFIG_HELP: dict[str, tuple] = {
    "molecule.name": (str, "label of the species (free text)"),
    "molecule.moment_of_inertia_kg_m2": (float, "moment of inertia I, kg*m^2"),
    "molecule.delta_alpha_c_m2_per_v": (float, "polarizability anisotropy, C*m^2/V"),
    "molecule.n_levels": (int, "number of rotational levels in the model"),
    "molecule.temperature_k": (float, "initial thermal temperature, K"),
    "field.modulation_amplitude": (float, "Bessel modulation amplitude A, dimensionless"),
    "field.peak_field_v_per_m": (float, "peak field E0, V/m"),
    "field.pulse_duration_s": (float, "pulse duration tau_pul, s"),
    "field.index_min": (int, "first pulse index n_min"),
    "field.index_max": (int, "last pulse index n_max"),
    "field.tail_widths": (float, "window margin in units of tau_pul"),
    "scan.period_min_s": (float, "first train period of the sweep, s"),
    "scan.period_max_s": (float, "last train period of the sweep, s"),
    "scan.period_step_s": (float, "sweep step, s"),
    "scan.thermal_average": (_parse_bool, "mix initial states thermally (true) or start from l=0 (false)"),
    "scan.top_level_guard": (float, "warn when P(l = N-1) exceeds this"),
    "simulate.period_s": (float, "train period for simulate/validate, s"),
    "discretization.max_phase_per_slice": (float, "bound on max(|V|/hbar, |omega|) * dt, dimensionless"),
    "discretization.xi_nodes": (int, "Gauss-Legendre order of the xi integral"),
    "discretization.time_nodes_per_slice": (int, "quadrature nodes of the per-slice time integral"),
    "discretization.n_slices": (int, "explicit slice count; 0 = derive from the phase bound"),
    "oracle.max_phase_per_step": (float, "RK4 bound on max(|V|/hbar, |omega|) * dt"),
    "oracle.include_diagonal": (_parse_bool, "keep V_ll terms in the direct integrator"),
    "validate.tolerance": (float, "max per-level |dP| accepted by validate"),
    "workers": (int, "parallel workers for scan (env ROTORPATH_WORKERS)"),
}

_DEFAULTS: dict[str, str] = {
    "molecule.n_levels": "8",
    "molecule.temperature_k": "6.3",
    "field.modulation_amplitude": "2.5",
    "field.peak_field_v_per_m": "6e9",
    "field.pulse_duration_s": "500e-15",
    "field.index_min": "-3",
    "field.index_max": "3",
    "field.tail_widths": "5",
    "scan.period_min_s": "7.98e-12",
    "scan.period_max_s": "9.38e-12",
    "scan.period_step_s": "0.02e-12",
    "scan.thermal_average": "true",
    "scan.top_level_guard": "1e-3",
    "discretization.max_phase_per_slice": "0.05",
    "discretization.xi_nodes": "32",
    "discretization.time_nodes_per_slice": "3",
    "discretization.n_slices": "0",
    "oracle.max_phase_per_step": "0.01",
    "oracle.include_diagonal": "false",
    "validate.tolerance": "1e-2",
    "workers": "1",
}

# Molecule parameter registry, expressed in the config vocabulary so that
# `preset_text` is a valid config file.
PRESETS: dict[str, dict[str, str]] = {
    "n14": {
        "molecule.name": "14N2",
        "molecule.moment_of_inertia_kg_m2": "1.4e-46",
        "molecule.delta_alpha_c_m2_per_v": "1.97e-40",
        "simulate.period_s": "8.38e-12",
    },
    "n15": {
        "molecule.name": "15N2",
        "molecule.moment_of_inertia_kg_m2": "1.5e-46",
        "molecule.delta_alpha_c_m2_per_v": "1.97e-40",
        "simulate.period_s": "8.98e-12",
    },
}


def preset_values(name: str) -> dict[str, str]:
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    return dict(PRESETS[name])


def preset_text(name: str) -> str:
    """The preset serialized in the config file format."""
    lines = [f"# preset {name}"]
    lines += [f"{k} = {v}" for k, v in preset_values(name).items()]
    return "\n".join(lines) + "\n"


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    values: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw_line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_HELP:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if not value:
            raise ConfigurationError(f"{source}:{lineno}: empty value for {key!r}")
        values[key] = value
    return values


@dataclass(frozen=True)
class RunConfig:
    """Typed union of molecule, field, scan, discretization and oracle settings."""

    molecule_name: str
    moment_of_inertia: float
    delta_alpha: float
    n_levels: int
    temperature: float
    modulation_amplitude: float
    peak_field: float
    pulse_duration: float
    index_min: int
    index_max: int
    tail_widths: float
    period_min: float
    period_max: float
    period_step: float
    thermal_average: bool
    top_level_guard: float
    simulate_period: float | None
    max_phase_per_slice: float
    xi_nodes: int
    time_nodes_per_slice: int
    n_slices: int
    oracle_max_phase: float
    oracle_include_diagonal: bool
    validate_tolerance: float
    workers: int

    def molecule_spec(self) -> MoleculeSpec:
        return MoleculeSpec(
            name=self.molecule_name,
            moment_of_inertia=self.moment_of_inertia,
            delta_alpha=self.delta_alpha,
        )

    def discretization(self) -> Discretization:
        return Discretization(
            max_phase_per_slice=self.max_phase_per_slice,
            xi_nodes=self.xi_nodes,
            time_nodes_per_slice=self.time_nodes_per_slice,
            n_slices=self.n_slices if self.n_slices > 0 else None,
        )

    def scan_config(self) -> ScanConfig:
        return ScanConfig(
            period_min=self.period_min,
            period_max=self.period_max,
            period_step=self.period_step,
            molecule=self.molecule_spec(),
            n_levels=self.n_levels,
            temperature=self.temperature,
            modulation_amplitude=self.modulation_amplitude,
            peak_field=self.peak_field,
            pulse_duration=self.pulse_duration,
            index_range=(self.index_min, self.index_max),
            tail_widths=self.tail_widths,
            discretization=self.discretization(),
            worker_count=self.workers,
            apply_thermal_average=self.thermal_average,
            top_level_guard=self.top_level_guard,
        )

    def pulse_train(self, period: float) -> PulseTrain:
        return PulseTrain(
            modulation_amplitude=self.modulation_amplitude,
            peak_field=self.peak_field,
            pulse_duration=self.pulse_duration,
            train_period=period,
            index_range=(self.index_min, self.index_max),
        )


def _require(values: dict[str, str], key: str) -> str:
    if key not in values:
        raise ConfigurationError(
            f"missing {key!r}: pass --preset n14|n15 or set it in the config file"
        )
    return values[key]


def _typed(values: dict[str, str], key: str):
    parser = CONFIG_HELP[key][0]
    raw = _require(values, key)
    try:
        return parser(raw)
    except (ValueError, ConfigurationError) as exc:
        raise ConfigurationError(f"invalid value for {key!r}: {exc}") from exc


def build_run_config(values: dict[str, str]) -> RunConfig:
    """Validate merged key/value strings into a RunConfig.

    Raises ConfigurationError naming the offending key on any violation.
    """
    merged = dict(_DEFAULTS)
    merged.update(values)

    def positive(key: str) -> float:
        v = _typed(merged, key)
        if not v > 0:
            raise ConfigurationError(f"{key} must be positive, got {v}")
        return v

    n_levels = _typed(merged, "molecule.n_levels")
    if n_levels < 2:
        raise ConfigurationError(f"molecule.n_levels must be >= 2, got {n_levels}")
    index_min = _typed(merged, "field.index_min")
    index_max = _typed(merged, "field.index_max")
    if index_min > index_max:
        raise ConfigurationError(
            f"field.index_min must not exceed field.index_max ({index_min} > {index_max})"
        )
    period_min = positive("scan.period_min_s")
    period_max = positive("scan.period_max_s")
    if not period_min < period_max:
        raise ConfigurationError("scan.period_min_s must be below scan.period_max_s")
    xi_nodes = _typed(merged, "discretization.xi_nodes")
    if xi_nodes < 2:
        raise ConfigurationError(f"discretization.xi_nodes must be >= 2, got {xi_nodes}")
    time_nodes = _typed(merged, "discretization.time_nodes_per_slice")
    if time_nodes < 1:
        raise ConfigurationError(
            f"discretization.time_nodes_per_slice must be >= 1, got {time_nodes}"
        )
    n_slices = _typed(merged, "discretization.n_slices")
    if n_slices < 0:
        raise ConfigurationError(f"discretization.n_slices must be >= 0, got {n_slices}")
    workers = _typed(merged, "workers")
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")

    simulate_period = None
    if "simulate.period_s" in merged:
        simulate_period = positive("simulate.period_s")

    return RunConfig(
        molecule_name=str(_require(merged, "molecule.name")),
        moment_of_inertia=positive("molecule.moment_of_inertia_kg_m2"),
        delta_alpha=positive("molecule.delta_alpha_c_m2_per_v"),
        n_levels=n_levels,
        temperature=positive("molecule.temperature_k"),
        modulation_amplitude=_typed(merged, "field.modulation_amplitude"),
        peak_field=_typed(merged, "field.peak_field_v_per_m"),
        pulse_duration=positive("field.pulse_duration_s"),
        index_min=index_min,
        index_max=index_max,
        tail_widths=positive("field.tail_widths"),
        period_min=period_min,
        period_max=period_max,
        period_step=positive("scan.period_step_s"),
        thermal_average=_typed(merged, "scan.thermal_average"),
        top_level_guard=positive("scan.top_level_guard"),
        simulate_period=simulate_period,
        max_phase_per_slice=positive("discretization.max_phase_per_slice"),
        xi_nodes=xi_nodes,
        time_nodes_per_slice=time_nodes,
        n_slices=n_slices,
        oracle_max_phase=positive("oracle.max_phase_per_step"),
        oracle_include_diagonal=_typed(merged, "oracle.include_diagonal"),
        validate_tolerance=positive("validate.tolerance"),
        workers=workers,
    )
