"""Command-line front end.

Subcommands: simulate (one period), scan (period sweep), matrix-elements
(geometry dump), validate (path integral vs direct RK4 integration).
Exit codes: 0 success, 2 configuration error, 3 validation tolerance
breach, 4 numerical abort.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import (
    CONFIG_HELP,
    PRESETS,
    RunConfig,
    build_run_config,
    parse_config_text,
    preset_values,
)
from .constants import HBAR
from .errors import ConfigurationError, NumericalAbortError
from .field import field_squared, simulation_window
from .oracle import OdeConfig, integrate_all
from .propagator import QuantumSystem, thermal_average
from .rotor import boltzmann_populations, geometry_matrix, rotor_energies
from .scan import (
    find_resonance,
    max_phase_rate,
    run_period,
    run_scan,
    write_metadata,
    write_scan_csv,
    write_scan_pgm,
)

_FMT = ".9g"


def _epilog() -> str:
    lines = ["configuration keys (key = value per line, '#' comments):"]
    for key, (_, description) in CONFIG_HELP.items():
        lines.append(f"  {key:<42} {description}")
    lines.append("")
    lines.append("environment: ROTORPATH_WORKERS sets the default worker count.")
    return "\n".join(lines)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotorpath",
        description=__doc__,
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, help="path to a key = value config file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in parameter set")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--workers", type=int, help="parallel workers for the scan grid")

    p_sim = sub.add_parser("simulate", help="single-period run, writes the population vector")
    add_common(p_sim)
    p_sim.add_argument("--period-ps", type=float, help="train period in ps (overrides simulate.period_s)")

    p_scan = sub.add_parser("scan", help="sweep the train period, writes CSV/PGM/metadata")
    add_common(p_scan)

    p_mat = sub.add_parser("matrix-elements", help="dump the cos^2 geometry matrix as CSV")
    add_common(p_mat)

    p_val = sub.add_parser("validate", help="compare the propagator against the RK4 integrator")
    add_common(p_val)
    p_val.add_argument("--tolerance", type=float, help="max per-level |dP| accepted (overrides validate.tolerance)")

    return parser


def _merged_values(args) -> dict[str, str]:
    values: dict[str, str] = {}
    if args.preset:
        values.update(preset_values(args.preset))
    if args.config is not None:
        if not args.config.is_file():
            raise ConfigurationError(f"config file not found: {args.config}")
        values.update(parse_config_text(args.config.read_text(), source=str(args.config)))
    if "workers" not in values and os.environ.get("ROTORPATH_WORKERS"):
        values["workers"] = os.environ["ROTORPATH_WORKERS"]
    if args.workers is not None:
        values["workers"] = str(args.workers)
    if getattr(args, "period_ps", None) is not None:
        values["simulate.period_s"] = repr(args.period_ps * 1e-12)
    if getattr(args, "tolerance", None) is not None:
        values["validate.tolerance"] = repr(args.tolerance)
    return values


def _require_period(cfg: RunConfig) -> float:
    if cfg.simulate_period is None:
        raise ConfigurationError(
            "no period configured: set simulate.period_s, use --period-ps, or pick a preset"
        )
    return cfg.simulate_period


def _print_populations(header: str, populations: np.ndarray) -> None:
    print(header)
    print("  l   probability")
    for l, p in enumerate(populations):
        print(f"  {l}   {p:{_FMT}}")


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    period = _require_period(cfg)
    populations = run_period(cfg.scan_config(), period)
    path = out / "populations.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("l,probability\n")
        for l, p in enumerate(populations):
            fh.write(f"{l},{p:{_FMT}}\n")
    _print_populations(
        f"final populations at tau_per = {period * 1e12:{_FMT}} ps "
        f"({cfg.molecule_name}):",
        populations,
    )
    print(f"wrote {path}")
    return 0


def cmd_scan(cfg: RunConfig, out: Path) -> int:
    result = run_scan(cfg.scan_config())
    stem = f"scan_{cfg.molecule_name}"
    csv_path = out / f"{stem}.csv"
    pgm_path = out / f"{stem}.pgm"
    meta_path = out / f"{stem}_metadata.txt"
    write_scan_csv(result, csv_path)
    write_scan_pgm(result, pgm_path)
    write_metadata(result.metadata, meta_path)

    high_levels = list(range(3, cfg.n_levels)) or [cfg.n_levels - 1]
    resonance = find_resonance(result, high_levels)
    print(
        f"{cfg.molecule_name}: {result.periods.size} periods, "
        f"resonance of levels {high_levels[0]}..{high_levels[-1]} "
        f"at {resonance * 1e12:{_FMT}} ps"
    )
    if "warnings" in result.metadata:
        print(f"warning: {result.metadata['warnings']}")
    for path in (csv_path, pgm_path, meta_path):
        print(f"wrote {path}")
    return 0


def cmd_matrix_elements(cfg: RunConfig, out: Path) -> int:
    g = geometry_matrix(cfg.n_levels).elements
    path = out / "matrix_elements.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("l_to,l_from,value\n")
        for l_to in range(cfg.n_levels):
            for l_from in range(cfg.n_levels):
                fh.write(f"{l_to},{l_from},{g[l_to, l_from]:{_FMT}}\n")
    print(f"wrote {path}")
    return 0


def cmd_validate(cfg: RunConfig, out: Path) -> int:
    period = _require_period(cfg)
    scan_cfg = cfg.scan_config()
    pops_pi = run_period(scan_cfg, period)

    spec = cfg.molecule_spec()
    system = QuantumSystem(energies=rotor_energies(cfg.n_levels, spec))
    g = geometry_matrix(cfg.n_levels).elements
    coef = -0.25 * spec.delta_alpha * g / HBAR  # diagonal intact; OdeConfig decides
    train = cfg.pulse_train(period)
    window = simulation_window(train, cfg.tail_widths)

    coef_used = coef.copy()
    if not cfg.oracle_include_diagonal:
        np.fill_diagonal(coef_used, 0.0)
    rate = max_phase_rate(system, coef_used, train)
    ode_cfg = OdeConfig.for_rate(
        rate, cfg.oracle_max_phase, include_diagonal=cfg.oracle_include_diagonal
    )

    if cfg.thermal_average:
        amps = integrate_all(system, coef, lambda t: field_squared(t, train), window, ode_cfg)
        weights = boltzmann_populations(cfg.temperature, system.energies).populations
        pops_ode = thermal_average((np.abs(amps) ** 2).T, weights)
    else:
        amps = integrate_all(
            system, coef, lambda t: field_squared(t, train), window, ode_cfg, [0]
        )
        pops_ode = np.abs(amps[:, 0]) ** 2

    deltas = np.abs(pops_pi - pops_ode)
    path = out / "validate.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("l,p_path_integral,p_ode,abs_delta\n")
        for l in range(cfg.n_levels):
            fh.write(f"{l},{pops_pi[l]:{_FMT}},{pops_ode[l]:{_FMT}},{deltas[l]:{_FMT}}\n")

    max_delta = float(np.max(deltas))
    print(
        f"{cfg.molecule_name} at tau_per = {period * 1e12:{_FMT}} ps: "
        f"max per-level |dP| = {max_delta:{_FMT}} "
        f"(tolerance {cfg.validate_tolerance:{_FMT}})"
    )
    print(f"wrote {path}")
    if max_delta > cfg.validate_tolerance:
        print("validation FAILED: tolerance exceeded", file=sys.stderr)
        return 3
    print("validation passed")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "matrix-elements": cmd_matrix_elements,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = build_run_config(_merged_values(args))
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbortError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
