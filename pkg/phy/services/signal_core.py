"""
Signal Core Service

Pulse definitions (RRC, RC, sinc), dense-grid waveform synthesis, receiver
filtering, band-limited reconstruction from half-baud samples and noise
calibration. Every other phy service builds on these.

Conventions:
- The RRC pulse has unit energy, so RRC convolved with itself is the RC pulse.
- A DenseSignal lives on the lattice k*dt; it stores the lattice index of its
  first sample so baud and half-baud instants are exact reads.
"""

import enum
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.signal import fftconvolve

from phy.exceptions import GridMismatchError, PulseConfigError, SupportError, FrameError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Abscissae closer than this (in units of T) to a removable singularity use the limit value
SINGULARITY_GUARD = 1e-9


class Pulse(enum.Enum):
    """Pulse selector for synthesis and filtering."""

    RRC = 'rrc'
    RC = 'rc'
    SINC2 = 'sinc2'  # unit-gain low-pass (2/T) sinc(2t/T)


@dataclass(frozen=True)
class PulseConfig:
    """Pulse and dense-grid parameters."""

    beta: float
    T: float = 1.0
    span: int = 16
    M: int = 16
    sinc_half_width: int = 32
    front_end_span: int = 64

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise PulseConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if self.T <= 0:
            raise PulseConfigError(f"T must be positive, got {self.T}")
        if self.span < 8:
            raise PulseConfigError(f"span must be at least 8 symbols, got {self.span}")
        if self.M < 8 or self.M % 2:
            raise PulseConfigError(f"M must be an even integer >= 8, got {self.M}")
        if self.sinc_half_width < 1:
            raise PulseConfigError(f"sinc_half_width must be positive, got {self.sinc_half_width}")
        if self.front_end_span < self.span:
            raise PulseConfigError(
                f"front_end_span ({self.front_end_span}) must not be shorter than span ({self.span})"
            )

    @property
    def dt(self) -> float:
        return self.T / self.M

    @classmethod
    def from_settings(cls, beta: float) -> 'PulseConfig':
        """Build a config for roll-off `beta` from SIMULATION_CONFIG['PULSE']."""
        from django.conf import settings

        pulse = settings.SIMULATION_CONFIG['PULSE']
        return cls(
            beta=beta,
            T=pulse['SYMBOL_DURATION'],
            span=pulse['SPAN'],
            M=pulse['OVERSAMPLING'],
            sinc_half_width=pulse['SINC_HALF_WIDTH'],
            front_end_span=pulse['FRONT_END_SPAN'],
        )


@dataclass(frozen=True)
class DenseSignal:
    """
    Complex baseband waveform sampled on the lattice k*dt.

    Sample j sits at time (start_index + j) * dt.
    """

    start_index: int
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        if self.dt <= 0:
            raise GridMismatchError(f"dt must be positive, got {self.dt}")
        if len(self.samples) < 1:
            raise FrameError("empty frame")

    @property
    def start_time(self) -> float:
        return self.start_index * self.dt

    @property
    def stop_index(self) -> int:
        """Lattice index one past the last sample."""
        return self.start_index + len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return (self.start_index + np.arange(len(self.samples))) * self.dt

    def __len__(self) -> int:
        return len(self.samples)

    def at_index(self, k: int) -> complex:
        """Value at lattice index k; zero outside the stored support."""
        j = k - self.start_index
        if 0 <= j < len(self.samples):
            return complex(self.samples[j])
        return 0j

    def at_time(self, t: float) -> complex:
        """Value at a time that must fall on the lattice."""
        k = t / self.dt
        k_round = int(round(k))
        if abs(k - k_round) > 1e-6:
            raise GridMismatchError(f"t={t} is not a multiple of dt={self.dt}")
        return self.at_index(k_round)

    def aligned_with(self, other: 'DenseSignal', start_index: int, stop_index: int) -> np.ndarray:
        """Samples of `other` placed on [start_index, stop_index), zero-padded."""
        if not np.isclose(self.dt, other.dt, rtol=0, atol=1e-12 * self.dt):
            raise GridMismatchError(f"grid step {other.dt} does not match {self.dt}")
        out = np.zeros(stop_index - start_index, dtype=complex)
        lo = other.start_index - start_index
        out[lo:lo + len(other.samples)] = other.samples
        return out


def _snap_integer_zeros(x: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Force exact 1 at x == 0 and exact 0 at other integers."""
    nearest = np.rint(x)
    on_integer = np.abs(x - nearest) < SINGULARITY_GUARD
    values = np.where(on_integer, np.where(nearest == 0, 1.0, 0.0), values)
    return values


def rrc_pulse(t: ArrayLike, cfg: PulseConfig) -> ArrayLike:
    """
    Unit-energy root-raised-cosine pulse p'(t), truncated to |t| <= span*T.

    Accepts scalars or arrays; returns the same shape.
    """
    scalar = np.isscalar(t)
    x = np.atleast_1d(np.asarray(t, dtype=float)) / cfg.T
    beta = cfg.beta
    scale = 1.0 / np.sqrt(cfg.T)

    out = np.empty_like(x)
    at_zero = np.abs(x) < SINGULARITY_GUARD
    if beta > 0:
        at_edge = np.abs(np.abs(x) - 1.0 / (4.0 * beta)) < SINGULARITY_GUARD
    else:
        at_edge = np.zeros_like(x, dtype=bool)
    regular = ~(at_zero | at_edge)

    out[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    if at_edge.any():
        arg = np.pi / (4.0 * beta)
        out[at_edge] = beta / np.sqrt(2.0) * (
            (1.0 + 2.0 / np.pi) * np.sin(arg) + (1.0 - 2.0 / np.pi) * np.cos(arg)
        )
    xr = x[regular]
    num = np.sin(np.pi * xr * (1.0 - beta)) + 4.0 * beta * xr * np.cos(np.pi * xr * (1.0 + beta))
    den = np.pi * xr * (1.0 - (4.0 * beta * xr) ** 2)
    out[regular] = num / den

    if beta == 0:
        out = _snap_integer_zeros(x, out)
    out = np.where(np.abs(x) > cfg.span, 0.0, out) * scale
    return float(out[0]) if scalar else out.reshape(np.shape(t))


def rc_pulse(t: ArrayLike, cfg: PulseConfig) -> ArrayLike:
    """Raised-cosine pulse p(t) with p(0) = 1 and exact zeros at nonzero multiples of T."""
    scalar = np.isscalar(t)
    x = np.atleast_1d(np.asarray(t, dtype=float)) / cfg.T
    beta = cfg.beta

    if beta > 0:
        at_edge = np.abs(np.abs(x) - 1.0 / (2.0 * beta)) < SINGULARITY_GUARD
    else:
        at_edge = np.zeros_like(x, dtype=bool)

    with np.errstate(divide='ignore', invalid='ignore'):
        out = np.sinc(x) * np.cos(np.pi * beta * x) / (1.0 - (2.0 * beta * x) ** 2)
    if at_edge.any():
        out[at_edge] = np.pi / 4.0 * np.sinc(1.0 / (2.0 * beta))

    out = _snap_integer_zeros(x, out)
    return float(out[0]) if scalar else out.reshape(np.shape(t))


def sinc_kernel(t: ArrayLike, rate: int, T: float = 1.0) -> ArrayLike:
    """sinc(rate*t/T) for rate 1 or 2, exact at its zero crossings."""
    if rate not in (1, 2):
        raise PulseConfigError(f"rate must be 1 or 2, got {rate}")
    scalar = np.isscalar(t)
    x = rate * np.atleast_1d(np.asarray(t, dtype=float)) / T
    out = _snap_integer_zeros(x, np.sinc(x))
    return float(out[0]) if scalar else out.reshape(np.shape(t))


def pulse_values(t: ArrayLike, pulse: Pulse, cfg: PulseConfig) -> ArrayLike:
    """Evaluate the selected pulse. SINC2 is the unit-gain front-end low-pass."""
    if pulse is Pulse.RRC:
        return rrc_pulse(t, cfg)
    if pulse is Pulse.RC:
        return rc_pulse(t, cfg)
    if pulse is Pulse.SINC2:
        t_arr = np.asarray(t, dtype=float)
        values = (2.0 / cfg.T) * sinc_kernel(t_arr, 2, cfg.T)
        return np.where(np.abs(t_arr) > cfg.front_end_span * cfg.T, 0.0, values)
    raise PulseConfigError(f"unknown pulse {pulse!r}")


def _pulse_span(pulse: Pulse, cfg: PulseConfig) -> int:
    return cfg.front_end_span if pulse is Pulse.SINC2 else cfg.span


def shape_symbols(symbols, delay: float, pulse: Pulse, cfg: PulseConfig) -> DenseSignal:
    """
    Dense-grid superposition sum_i s[i] * pulse(t - i*T - delay).

    The grid is the global lattice k*dt; the fractional part of the delay is
    folded into the taps so every lattice value is exact.
    """
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.size == 0:
        raise FrameError("empty frame")
    if abs(delay) >= cfg.T:
        raise FrameError(f"delay must satisfy |delay| < T, got {delay}")

    q = int(np.floor(delay / cfg.dt))
    frac = delay - q * cfg.dt
    half = _pulse_span(pulse, cfg) * cfg.M
    k = np.arange(-half, half + 2)
    taps = pulse_values(k * cfg.dt - frac, pulse, cfg)

    upsampled = np.zeros((len(symbols) - 1) * cfg.M + 1, dtype=complex)
    upsampled[::cfg.M] = symbols
    samples = fftconvolve(upsampled, taps)
    return DenseSignal(start_index=int(k[0]) + q, dt=cfg.dt, samples=samples)


def convolve_filter(sig: DenseSignal, pulse: Pulse, cfg: PulseConfig) -> DenseSignal:
    """Linear filtering approximating continuous convolution (discrete sum times dt)."""
    if not np.isclose(sig.dt, cfg.dt, rtol=0, atol=1e-12 * cfg.dt):
        raise GridMismatchError(f"signal grid step {sig.dt} does not match filter grid step {cfg.dt}")
    half = _pulse_span(pulse, cfg) * cfg.M
    taps = pulse_values(np.arange(-half, half + 1) * cfg.dt, pulse, cfg)
    samples = fftconvolve(sig.samples, taps) * cfg.dt
    return DenseSignal(start_index=sig.start_index - half, dt=sig.dt, samples=samples)


def sinc2_reconstruct(samples, t: ArrayLike, cfg: PulseConfig, origin: int = 0) -> Union[complex, np.ndarray]:
    """
    Band-limited reconstruction from half-baud samples.

    Sample k sits at time (origin + k) * T/2. The kernel is truncated to
    |2t/T - k| <= 2W with W = cfg.sinc_half_width.
    """
    samples = np.asarray(samples, dtype=complex)
    scalar = np.isscalar(t)
    x = 2.0 * np.atleast_1d(np.asarray(t, dtype=float)) / cfg.T - origin
    if np.any(x < -SINGULARITY_GUARD) or np.any(x > len(samples) - 1 + SINGULARITY_GUARD):
        raise SupportError("out of support")

    reach = 2 * cfg.sinc_half_width
    offsets = np.arange(-reach, reach + 1)
    k = np.floor(x).astype(int)[:, None] + offsets[None, :]
    dist = x[:, None] - k
    valid = (k >= 0) & (k < len(samples)) & (np.abs(dist) <= reach)
    weights = np.where(valid, _snap_integer_zeros(dist, np.sinc(dist)), 0.0)
    values = np.sum(weights * samples[np.clip(k, 0, len(samples) - 1)], axis=1)
    return complex(values[0]) if scalar else values


def calibrate_noise(N0: float, cfg: PulseConfig) -> float:
    """
    Per-sample standard deviation of the dense-grid complex noise.

    After RRC matched filtering (sum times dt) baud samples then carry
    variance sigma^2 = N0 / (2T).
    """
    if N0 <= 0:
        raise PulseConfigError(f"N0 must be positive, got {N0}")
    sigma2 = N0 / (2.0 * cfg.T)
    return float(np.sqrt(sigma2 / cfg.dt))


def complex_noise(rng: np.random.Generator, size: int, std: float) -> np.ndarray:
    """Circular complex Gaussian samples with E|n|^2 = std^2."""
    return std * (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
