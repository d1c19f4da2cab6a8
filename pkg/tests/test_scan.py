import os
import time

import numpy as np
import pytest

from conftest import cheap_discretization, make_scan_config
from rotorpath.errors import ConfigurationError, NumericalAbortError
from rotorpath.rotor import boltzmann_populations, rotor_energies
from rotorpath.scan import (
    ScanConfig,
    ScanResult,
    convergence_ladder,
    find_resonance,
    period_grid,
    run_period,
    run_scan,
    write_metadata,
    write_scan_csv,
    write_scan_pgm,
)


def small_scan_config(**overrides):
    defaults = dict(
        period_min=8.30e-12,
        period_max=8.40e-12,
        period_step=0.05e-12,
        discretization=cheap_discretization(400),
    )
    defaults.update(overrides)
    return make_scan_config(**defaults)


# --- grid ----------------------------------------------------------------


def test_period_grid_production_range():
    grid = period_grid(make_scan_config())
    assert grid.size == 71
    assert grid[0] == 7.98e-12
    assert grid[-1] == pytest.approx(9.38e-12, rel=1e-12)
    assert np.all(np.diff(grid) > 0)


def test_scan_config_validation():
    with pytest.raises(ConfigurationError):
        make_scan_config(period_min=9.0e-12, period_max=8.0e-12)
    with pytest.raises(ConfigurationError):
        make_scan_config(period_step=0.0)
    with pytest.raises(ConfigurationError):
        make_scan_config(period_max=7.99e-12, period_step=1e-12)  # single point
    with pytest.raises(ConfigurationError):
        make_scan_config(worker_count=0)
    with pytest.raises(ConfigurationError):
        make_scan_config(temperature=-1.0)


# --- scan behavior --------------------------------------------------------


def test_degenerate_grid_repeated_point_identical_vectors():
    # step below the ulp of period_min repeats the same double in the grid
    period = 8.38e-12
    step = 8.0e-28
    config = small_scan_config(
        period_min=period,
        period_max=np.nextafter(period, 1.0),
        period_step=step,
        discretization=cheap_discretization(200),
    )
    grid = period_grid(config)
    assert grid.size >= 2
    assert grid[0] == grid[1]
    result = run_scan(config)
    np.testing.assert_array_equal(result.raw[0], result.raw[1])


def test_zero_field_scan_returns_thermal_distribution():
    config = small_scan_config(peak_field=0.0, discretization=cheap_discretization(50))
    result = run_scan(config)
    thermal = boltzmann_populations(
        config.temperature, rotor_energies(config.n_levels, config.molecule)
    ).populations
    for row in result.raw:
        np.testing.assert_allclose(row, thermal, atol=1e-12)


def test_scan_result_invariants():
    result = run_scan(small_scan_config())
    sums = result.raw.sum(axis=1)
    np.testing.assert_allclose(sums, 1.0, atol=1e-6)
    assert np.all(result.raw >= 0.0) and np.all(result.raw <= 1.0)
    assert np.all(result.normalized >= 0.0) and np.all(result.normalized <= 1.0)
    for l in range(result.normalized.shape[1]):
        column = result.normalized[:, l]
        assert np.count_nonzero(column == 1.0) == 1


def test_run_period_deterministic():
    config = small_scan_config()
    a = run_period(config, 8.38e-12)
    b = run_period(config, 8.38e-12)
    np.testing.assert_array_equal(a, b)


def test_thermal_average_flag_switches_to_ground_state():
    config = small_scan_config(apply_thermal_average=False)
    pops = run_period(config, 8.38e-12)
    assert abs(pops.sum() - 1.0) < 1e-9
    thermal = run_period(small_scan_config(), 8.38e-12)
    assert not np.allclose(pops, thermal, atol=1e-6)


def test_truncation_guard_warning_recorded():
    config = small_scan_config(top_level_guard=1e-16)
    result = run_scan(config)
    assert "warnings" in result.metadata
    assert "truncation guard" in result.metadata["warnings"]


def test_trajectory_abort_names_period(monkeypatch):
    import rotorpath.scan as scan_module

    def boom(*args, **kwargs):
        raise NumericalAbortError("synthetic failure")

    monkeypatch.setattr(scan_module, "propagate_window", boom)
    with pytest.raises(NumericalAbortError, match="8.38 ps"):
        run_period(small_scan_config(), 8.38e-12)


# --- resonance ------------------------------------------------------------


def synthetic_result(periods, raw):
    periods = np.asarray(periods, dtype=float)
    raw = np.asarray(raw, dtype=float)
    normalized = raw / raw.max(axis=0)
    return ScanResult(periods=periods, raw=raw, normalized=normalized, metadata={})


def test_find_resonance_single_point():
    result = synthetic_result([8.0e-12], [[0.4, 0.6]])
    assert find_resonance(result, {1}) == 8.0e-12


def test_find_resonance_tie_breaks_to_smaller_period():
    result = synthetic_result(
        [8.0e-12, 8.5e-12, 9.0e-12],
        [[0.5, 0.5], [0.3, 0.7], [0.3, 0.7]],
    )
    assert find_resonance(result, {1}) == 8.5e-12


def test_find_resonance_validates_level_set():
    result = synthetic_result([8.0e-12], [[0.9, 0.1]])
    with pytest.raises(ConfigurationError):
        find_resonance(result, set())
    with pytest.raises(ConfigurationError):
        find_resonance(result, {5})


def test_convergence_ladder_shapes():
    config = small_scan_config(discretization=cheap_discretization(64))
    ladder = convergence_ladder(config, 8.38e-12, n_rungs=2)
    assert [k for k, _ in ladder] == [64, 128, 256]
    for _, pops in ladder:
        assert abs(pops.sum() - 1.0) < 1e-9


# --- parallel execution ----------------------------------------------------


def test_worker_count_does_not_change_results():
    kwargs = dict(
        period_max=8.45e-12, period_step=0.03e-12, discretization=cheap_discretization(300)
    )
    serial = run_scan(small_scan_config(**kwargs, worker_count=1))
    parallel = run_scan(small_scan_config(**kwargs, worker_count=2))
    np.testing.assert_array_equal(serial.raw, parallel.raw)
    np.testing.assert_array_equal(serial.normalized, parallel.normalized)


@pytest.mark.skipif(os.cpu_count() < 2, reason="needs at least 2 cores")
def test_parallel_speedup_smoke():
    kwargs = dict(
        period_min=8.0e-12,
        period_max=8.7e-12,
        period_step=0.1e-12,  # 8 points
        discretization=cheap_discretization(20000),
    )
    t0 = time.perf_counter()
    run_scan(make_scan_config(**kwargs, worker_count=1))
    serial = time.perf_counter() - t0
    t0 = time.perf_counter()
    run_scan(make_scan_config(**kwargs, worker_count=2))
    parallel = time.perf_counter() - t0
    assert parallel < serial


# --- persistence ------------------------------------------------------------


def test_csv_format(tmp_path):
    result = run_scan(small_scan_config(discretization=cheap_discretization(50)))
    path = tmp_path / "scan.csv"
    write_scan_csv(result, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "tau_per_ps,l,probability,normalized_probability"
    n_levels = result.raw.shape[1]
    assert len(lines) == 1 + result.periods.size * n_levels
    first = lines[1].split(",")
    assert first[0] == "8.3" and first[1] == "0"
    # row order: period-major, level-minor
    assert [line.split(",")[1] for line in lines[1 : 1 + n_levels]] == [
        str(l) for l in range(n_levels)
    ]
    for cell in lines[1].split(",")[2:]:
        assert len(cell.replace(".", "").replace("-", "").lstrip("0")) <= 10


def test_pgm_format(tmp_path):
    result = run_scan(small_scan_config(discretization=cheap_discretization(50)))
    path = tmp_path / "scan.pgm"
    write_scan_pgm(result, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "P2"
    width, height = map(int, lines[1].split())
    assert (width, height) == (result.periods.size, result.raw.shape[1])
    assert lines[2] == "255"
    rows = [list(map(int, line.split())) for line in lines[3:]]
    assert len(rows) == height and all(len(r) == width for r in rows)
    flat = [v for row in rows for v in row]
    assert min(flat) >= 0 and max(flat) <= 255
    assert max(flat) == 255  # every level attains its own maximum


def test_metadata_echo(tmp_path):
    config = small_scan_config()
    result = run_scan(config)
    assert result.metadata["molecule.name"] == "14N2"
    assert result.metadata["code_version"]
    assert result.metadata["scan.period_step_s"] == repr(config.period_step)
    path = tmp_path / "meta.txt"
    write_metadata(result.metadata, path)
    text = path.read_text(encoding="utf-8")
    assert "molecule.moment_of_inertia_kg_m2 = 1.4e-46" in text
    assert "workers = 1" in text
