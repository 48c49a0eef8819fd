"""
Channel Simulation Service

Two-way relay uplink: both RRC-shaped frames arrive with their own complex
gain and fractional offset, white Gaussian noise is added on the dense grid,
the relay front end filters (RRC matched filter or sinc(2t) low-pass) and the
result is read at baud or half-baud instants.
"""

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from phy.exceptions import FrameError, GridMismatchError, WindowError
from phy.services.preamble import SymbolFrame
from phy.services.signal_core import (
    DenseSignal,
    Pulse,
    PulseConfig,
    calibrate_noise,
    complex_noise,
    convolve_filter,
    shape_symbols,
)

logger = logging.getLogger(__name__)


class ChannelType(enum.Enum):
    AWGN = 'awgn'
    RAYLEIGH = 'rayleigh'


class FrontEnd(enum.Enum):
    RRC = 'rrc'
    SINC2 = 'sinc2'


class SampleKind(enum.Enum):
    BAUD_RRC = 'baud_rrc'
    DOUBLE_RRC = 'double_rrc'
    DOUBLE_SINC2 = 'double_sinc2'

    @property
    def per_symbol(self) -> int:
        """Samples per symbol period."""
        return 1 if self is SampleKind.BAUD_RRC else 2


@dataclass(frozen=True)
class ChannelRealization:
    """Gains, fractional offsets and noise level for one packet."""

    h_A: complex
    h_B: complex
    t_A: float
    t_B: float
    N0: float
    seed: int = 0
    trial: int = 0
    T: float = 1.0

    def __post_init__(self):
        for name in ('t_A', 't_B'):
            value = getattr(self, name)
            if not -self.T / 2 <= value < self.T / 2:
                raise FrameError(f"{name} must lie in [-T/2, T/2), got {value}")
        if self.N0 < 0:
            raise FrameError(f"N0 must be non-negative, got {self.N0}")

    @property
    def tau(self) -> float:
        return self.t_A - self.t_B

    @property
    def sigma2(self) -> float:
        """Baud-sample noise variance after the RRC matched filter."""
        return self.N0 / (2.0 * self.T)

    def noise_rng(self) -> np.random.Generator:
        """Noise stream keyed by (seed, trial)."""
        return np.random.default_rng([self.seed, self.trial, 1])

    @classmethod
    def draw(
        cls,
        rng: np.random.Generator,
        channel: ChannelType,
        N0: float,
        seed: int = 0,
        trial: int = 0,
        T: float = 1.0,
    ) -> 'ChannelRealization':
        """Draw tau uniformly on [-T/2, T/2) split as t_A = tau/2, t_B = -tau/2."""
        tau = rng.uniform(-T / 2, T / 2)
        if channel is ChannelType.RAYLEIGH:
            h_A, h_B = complex_noise(rng, 2, 1.0)
        else:
            h_A, h_B = 1.0 + 0j, 1.0 + 0j
        return cls(
            h_A=complex(h_A), h_B=complex(h_B),
            t_A=tau / 2, t_B=-tau / 2,
            N0=N0, seed=seed, trial=trial, T=T,
        )


@dataclass(frozen=True)
class SampleSet:
    """
    Receiver samples on a uniform lattice.

    samples[j] is taken at time (origin + j) * step with step = T or T/2.
    """

    kind: SampleKind
    samples: np.ndarray
    sigma2: float
    origin: int
    step: float

    def __len__(self) -> int:
        return len(self.samples)

    def position(self, lattice_index: int) -> int:
        """Array position of a lattice index."""
        return lattice_index - self.origin

    def window(self, first: int, count: int) -> np.ndarray:
        """`count` samples starting at lattice index `first`."""
        lo = self.position(first)
        if lo < 0 or lo + count > len(self.samples):
            raise WindowError(
                f"window [{first}, {first + count}) outside samples "
                f"[{self.origin}, {self.origin + len(self.samples)})"
            )
        return self.samples[lo:lo + count]


def uplink_superpose(
    frame_A: SymbolFrame,
    frame_B: SymbolFrame,
    ch: ChannelRealization,
    cfg: PulseConfig,
    rng: Optional[np.random.Generator] = None,
) -> DenseSignal:
    """
    r(t) = h_A x_A(t - t_A) + h_B x_B(t - t_B) + n(t) on the dense grid.

    The grid is padded by the front-end span on both sides so filtered noise
    is stationary over the frames. With N0 = 0 no noise is drawn.
    """
    x_A = shape_symbols(frame_A.symbols, ch.t_A, Pulse.RRC, cfg)
    x_B = shape_symbols(frame_B.symbols, ch.t_B, Pulse.RRC, cfg)
    if x_A.dt != x_B.dt:
        raise GridMismatchError(f"frames shaped on different grids ({x_A.dt} vs {x_B.dt})")

    pad = cfg.front_end_span * cfg.M if ch.N0 > 0 else 0
    start = min(x_A.start_index, x_B.start_index) - pad
    stop = max(x_A.stop_index, x_B.stop_index) + pad
    base = DenseSignal(start_index=start, dt=cfg.dt, samples=np.zeros(stop - start, dtype=complex))

    samples = ch.h_A * base.aligned_with(x_A, start, stop) + ch.h_B * base.aligned_with(x_B, start, stop)
    if ch.N0 > 0:
        rng = rng if rng is not None else ch.noise_rng()
        samples = samples + complex_noise(rng, len(samples), calibrate_noise(ch.N0, cfg))
    return DenseSignal(start_index=start, dt=cfg.dt, samples=samples)


def front_end(r: DenseSignal, filter: FrontEnd, cfg: PulseConfig) -> DenseSignal:
    """RRC matched filter (effective pulse RC) or sinc(2t) low-pass (effective pulse RRC)."""
    pulse = Pulse.RRC if filter is FrontEnd.RRC else Pulse.SINC2
    return convolve_filter(r, pulse, cfg)


def sample(y: DenseSignal, kind: SampleKind, cfg: PulseConfig, N0: float = 0.0) -> SampleSet:
    """
    Exact lattice reads at t = nT (baud) or t = kT/2 (double baud).

    `N0` only sets the recorded per-sample noise variance.
    """
    if cfg.M % 2:
        raise GridMismatchError(f"half-baud instants are off-grid for odd M={cfg.M}")
    if not np.isclose(y.dt, cfg.dt, rtol=0, atol=1e-12 * cfg.dt):
        raise GridMismatchError(f"signal grid step {y.dt} does not match {cfg.dt}")

    stride = cfg.M // kind.per_symbol
    first = -(-y.start_index // stride) * stride
    samples = y.samples[first - y.start_index::stride]

    sigma2 = N0 / (2.0 * cfg.T)
    if kind is SampleKind.DOUBLE_SINC2:
        # unit-gain low-pass: N0 / T^2
        sigma2 = 2.0 * sigma2 / cfg.T
    return SampleSet(
        kind=kind,
        samples=samples,
        sigma2=sigma2,
        origin=first // stride,
        step=cfg.T / kind.per_symbol,
    )
