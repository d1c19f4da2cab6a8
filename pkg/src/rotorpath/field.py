"""Pulse-train electric field: Bessel-weighted Gaussian envelopes.

E(tau) = sum_n J_n(A) E0 exp[-(tau - n*tau_per)^2 / tau_pul^2]

J_n is evaluated in-repo by Miller's downward recurrence so that the
test-suite series oracle and this production path stay independent.
The Gaussian carries no factor 2 in the denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = ["PulseTrain", "bessel_j", "field_amplitude", "field_squared", "simulation_window"]

# Validated argument domain for bessel_j.
_MAX_ORDER = 64
_MAX_ARG = 100.0

# Rescale threshold inside the downward recurrence (values grow toward J_0).
_RESCALE = 1e250


def _bessel_j_series_small(n: int, x: float) -> float:
    # Ascending series; safe and fast for small arguments where the Miller
    # recurrence ratios 2k/x would overflow.
    half = 0.5 * x
    try:
        term = half**n / math.factorial(n)
    except OverflowError:
        return 0.0
    total = term
    for k in range(1, 30):
        term *= -(half * half) / (k * (n + k))
        total += term
        if abs(term) <= 1e-18 * abs(total):
            break
    return total


def _bessel_j_all(n_max: int, x: float) -> np.ndarray:
    """J_0(x) .. J_n_max(x) for 0 < x, by downward Miller recurrence.

    The recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is run from a start
    order well above both n_max and x, seeded with (0, tiny), then
    normalized with J_0 + 2 sum_{k>=1} J_2k = 1.
    """
    start = max(n_max, int(math.ceil(x))) + 16
    start += int(math.ceil(math.sqrt(40.0 * start)))
    if start % 2:
        start += 1  # even start keeps the normalization sum aligned

    out = np.zeros(n_max + 1)
    j_up = 0.0
    j_cur = 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        j_down = (2.0 * k / x) * j_cur - j_up
        j_up = j_cur
        j_cur = j_down
        if k % 2 == 0:
            norm += 2.0 * j_up
        if k - 1 <= n_max:
            out[k - 1] = j_cur
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_up /= _RESCALE
            norm /= _RESCALE
            out /= _RESCALE
    norm += j_cur  # J_0 term
    return out / norm


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x).

    Valid for |n| <= 64 and |x| <= 100 (the accuracy-validated domain);
    arguments outside it raise. Negative orders and arguments use
    J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
    """
    if abs(n) > _MAX_ORDER:
        raise ConfigurationError(f"bessel_j order out of validated domain: |{n}| > {_MAX_ORDER}")
    if not math.isfinite(x) or abs(x) > _MAX_ARG:
        raise ConfigurationError(f"bessel_j argument out of validated domain: |{x}| > {_MAX_ARG}")
    sign = 1.0
    if n < 0:
        n = -n
        sign *= -1.0 if n % 2 else 1.0
    if x < 0:
        x = -x
        sign *= -1.0 if n % 2 else 1.0
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < 1e-4:
        return sign * _bessel_j_series_small(n, x)
    return sign * float(_bessel_j_all(n, x)[n])


@dataclass(frozen=True)
class PulseTrain:
    """Field parameters of one Gaussian pulse train.

    Attributes
    ----------
    modulation_amplitude : float
        Dimensionless spectral-phase modulation amplitude A in J_n(A).
    peak_field : float
        E0 in V/m.
    pulse_duration : float
        tau_pul in s.
    train_period : float
        tau_per in s.
    index_range : tuple[int, int]
        Inclusive pulse index range (n_min, n_max).
    """

    modulation_amplitude: float
    peak_field: float
    pulse_duration: float
    train_period: float
    index_range: tuple[int, int] = (-3, 3)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.pulse_duration > 0:
            raise ConfigurationError(
                f"pulse_duration must be positive, got {self.pulse_duration}"
            )
        if not self.train_period > 0:
            raise ConfigurationError(
                f"train_period must be positive, got {self.train_period}"
            )
        n_min, n_max = self.index_range
        if n_min > n_max:
            raise ConfigurationError(f"index_range must satisfy n_min <= n_max, got {self.index_range}")
        weights = np.array(
            [bessel_j(n, self.modulation_amplitude) for n in range(n_min, n_max + 1)]
        )
        object.__setattr__(self, "_weights", weights)
        weights.setflags(write=False)

    @property
    def pulse_indices(self) -> np.ndarray:
        n_min, n_max = self.index_range
        return np.arange(n_min, n_max + 1)

    @property
    def pulse_weights(self) -> np.ndarray:
        """J_n(A) for n over index_range."""
        return self._weights

    def peak_field_bound(self) -> float:
        """Upper bound on |E(tau)|: E0 * sum_n |J_n(A)|."""
        return float(np.sum(np.abs(self._weights))) * abs(self.peak_field)


def field_amplitude(tau, train: PulseTrain):
    """E(tau) in V/m; tau may be a scalar or array (s)."""
    tau = np.asarray(tau, dtype=float)
    centers = train.pulse_indices * train.train_period
    arg = (tau[..., None] - centers) / train.pulse_duration
    e = np.sum(train.pulse_weights * train.peak_field * np.exp(-(arg**2)), axis=-1)
    if not np.all(np.isfinite(e)):
        raise ConfigurationError("non-finite field sample")
    return e if e.ndim else float(e)


def field_squared(tau, train: PulseTrain):
    """E^2(tau) in V^2/m^2, the quantity the polarizability coupling needs."""
    e = field_amplitude(tau, train)
    return e * e


def simulation_window(train: PulseTrain, tail_widths: float = 5.0) -> tuple[float, float]:
    """Integration window covering all pulses plus tail_widths * tau_pul.

    With the default 5 pulse widths the boundary field is below
    exp(-25) ~ 1.4e-11 of the central peak.
    """
    n_min, n_max = train.index_range
    return (
        n_min * train.train_period - tail_widths * train.pulse_duration,
        n_max * train.train_period + tail_widths * train.pulse_duration,
    )
