"""Direct integrator of the interaction-picture Schroedinger equation.

Solves i hbar dc_{l'}/dt = sum_l V_{l'l}(t) exp(i omega_{l'l} t) c_l with a
fixed-step classical Runge-Kutta (RK4) scheme. This is the independent
reference the path-integral propagator is validated against: deterministic,
no renormalization, norm conservation checked rather than enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalAbortError
from .propagator import AmplitudeVector, QuantumSystem

__all__ = ["OdeConfig", "integrate", "integrate_all"]

# Sampling phase bound: step_size * max(|V|/hbar, |omega|) must stay below this.
PHASE_BOUND = 0.01

# Acceptable |1 - sum |c|^2| at the end of the window.
NORM_DRIFT_LIMIT = 1e-8


@dataclass(frozen=True)
class OdeConfig:
    """Fixed-step RK4 configuration.

    ``include_diagonal`` restores the V_ll coupling terms that the
    path-integral kernel assumes away; keep it False for parity with the
    propagator, True to measure the size of that approximation.

    The phase bound step_size * max(|V|/hbar, |omega|) <= 0.01 is enforced
    when `integrate` sees the actual system and field samples.
    """

    step_size: float
    include_diagonal: bool = False

    def __post_init__(self):
        if not self.step_size > 0:
            raise ConfigurationError(f"step_size must be positive, got {self.step_size}")

    @classmethod
    def for_rate(
        cls,
        max_rate: float,
        phase_bound: float = PHASE_BOUND,
        include_diagonal: bool = False,
    ) -> "OdeConfig":
        """Largest step compatible with the phase bound for a given peak rate."""
        if not max_rate > 0:
            raise ConfigurationError("max_rate must be positive")
        return cls(step_size=phase_bound / max_rate, include_diagonal=include_diagonal)


def integrate_all(
    system: QuantumSystem,
    v_coef_over_hbar: np.ndarray,
    field_squared_fn,
    window: tuple[float, float],
    config: OdeConfig,
    initial_levels: np.ndarray | list[int] | None = None,
) -> np.ndarray:
    """RK4-propagate several basis states at once.

    Returns the (N, n_initial) matrix of final complex amplitudes, one
    column per initial level. Norm drift beyond 1e-8 on any column aborts.
    """
    n = system.n_levels
    if initial_levels is None:
        initial_levels = np.arange(n)
    initial_levels = np.asarray(initial_levels, dtype=int)
    if initial_levels.size == 0 or np.any((initial_levels < 0) | (initial_levels >= n)):
        raise ConfigurationError("initial levels must be a non-empty subset of 0..N-1")

    t_start, t_end = window
    if not t_end > t_start:
        raise ConfigurationError("window end must exceed its start")

    coef = np.array(v_coef_over_hbar, dtype=float)
    if coef.shape != (n, n):
        raise ConfigurationError("coupling coefficient shape must match the system")
    if not config.include_diagonal:
        np.fill_diagonal(coef, 0.0)

    n_steps = max(1, int(np.ceil((t_end - t_start) / config.step_size)))
    dt = (t_end - t_start) / n_steps

    # E^2 on the half-step grid used by RK4 (t_k, t_k + dt/2, t_k + dt).
    half_times = t_start + 0.5 * dt * np.arange(2 * n_steps + 1)
    e2 = np.asarray(field_squared_fn(half_times), dtype=float)
    if not np.all(np.isfinite(e2)) or np.any(e2 < 0):
        raise ConfigurationError("field samples must be finite and non-negative")

    max_rate = max(system.max_frequency, float(np.max(np.abs(coef)) * np.max(e2)))
    if dt * max_rate > PHASE_BOUND * (1.0 + 1e-9):
        raise ConfigurationError(
            f"step size {dt:.3e} s rejected: dt * max(|V|/hbar, |omega|) = "
            f"{dt * max_rate:.3e} exceeds {PHASE_BOUND}"
        )

    omega = system.frequencies

    def deriv(c: np.ndarray, t: float, e2_sample: float) -> np.ndarray:
        m = (coef * e2_sample) * np.exp(1j * omega * t)
        return -1j * (m @ c)

    c = np.zeros((n, initial_levels.size), dtype=complex)
    c[initial_levels, np.arange(initial_levels.size)] = 1.0

    t = t_start
    for k in range(n_steps):
        e2_0, e2_h, e2_1 = e2[2 * k], e2[2 * k + 1], e2[2 * k + 2]
        k1 = deriv(c, t, e2_0)
        k2 = deriv(c + 0.5 * dt * k1, t + 0.5 * dt, e2_h)
        k3 = deriv(c + 0.5 * dt * k2, t + 0.5 * dt, e2_h)
        k4 = deriv(c + dt * k3, t + dt, e2_1)
        c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t_start + (k + 1) * dt

    norms = np.sum(np.abs(c) ** 2, axis=0)
    drift = float(np.max(np.abs(1.0 - norms)))
    if not np.isfinite(drift) or drift > NORM_DRIFT_LIMIT:
        raise NumericalAbortError(
            f"RK4 norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:.1e}; "
            f"step size {dt:.3e} s rejected"
        )
    return c


def integrate(
    system: QuantumSystem,
    v_coef_over_hbar: np.ndarray,
    field_squared_fn,
    window: tuple[float, float],
    initial_level: int,
    config: OdeConfig,
) -> AmplitudeVector:
    """Propagate a single basis state; see `integrate_all`."""
    c = integrate_all(
        system, v_coef_over_hbar, field_squared_fn, window, config, [initial_level]
    )
    n_steps = max(1, int(np.ceil((window[1] - window[0]) / config.step_size)))
    return AmplitudeVector(amplitudes=c[:, 0], step_index=n_steps)
