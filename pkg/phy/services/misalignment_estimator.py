"""
Misalignment Estimator Service

ML estimation of the fractional offsets (t_A, t_B) and the misalignment
tau = t_A - t_B from the preamble correlations.

Two flows:
- baud: RRC matched filter, baud samples, correlation with z*, ML fit of
  Q*h*rc(mT - t).
- double: sinc(2t) front end, half-baud samples, correlation with the
  double-interpolated ZC, Cholesky whitening of the coloured correlation
  noise, ML fit of the whitened model Q*h*rc(mT/2 - t).
"""

import enum
import functools
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg as spla
from scipy.optimize import minimize_scalar

from phy.exceptions import CovarianceError, WindowError
from phy.services.channel_sim import SampleKind, SampleSet
from phy.services.preamble import PreambleSpec, assign_pair
from phy.services.signal_core import PulseConfig, rc_pulse, rrc_pulse

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-12


class Rate(enum.Enum):
    BAUD = 'baud'
    DOUBLE = 'double'


@dataclass(frozen=True)
class CorrelationWindow:
    """
    Correlator output around its peak.

    values[j] is c[I + m] for m = 1-d .. d, where I (peak_index) is the lag
    of the largest |c| in units of `lag`.
    """

    values: np.ndarray
    d: int
    noise_var: float
    rate: Rate
    peak_index: int
    lag: float

    def __post_init__(self):
        if len(self.values) != 2 * self.d:
            raise WindowError(f"window holds {len(self.values)} values, expected 2d = {2 * self.d}")

    @property
    def offsets(self) -> np.ndarray:
        """m = 1-d .. d."""
        return np.arange(1 - self.d, self.d + 1)


@dataclass(frozen=True)
class WhitenedCorrelation:
    values: np.ndarray
    d: int
    noise_var: float
    peak_index: int
    lag: float


@dataclass(frozen=True)
class WhiteningOperator:
    """Sigma0 = U0^T U0; U0_invT whitens a correlation window."""

    Sigma0: np.ndarray
    U0: np.ndarray
    U0_invT: np.ndarray

    @property
    def size(self) -> int:
        return self.Sigma0.shape[0]

    def apply(self, v: np.ndarray) -> np.ndarray:
        """U0^{-T} v for a vector or for the columns of a matrix."""
        return spla.solve_triangular(self.U0, v, trans='T', lower=False)


@dataclass(frozen=True)
class OffsetEstimate:
    t_hat_A: float
    t_hat_B: float
    method: Rate

    @property
    def tau_hat(self) -> float:
        return self.t_hat_A - self.t_hat_B


def _correlate(samples: SampleSet, reference_conj: np.ndarray, anchor: int, lags: np.ndarray, weight: float) -> np.ndarray:
    """weight * sum_k reference_conj[k] * y[anchor + k + m] for each lag m."""
    span = len(reference_conj)
    segment = samples.window(anchor + int(lags[0]), span + len(lags) - 1)
    return weight * (sliding_window_view(segment, span) @ reference_conj)


def _peak_window(c: np.ndarray, lags: np.ndarray, radius: int, d: int):
    """Peak lag I within |I| <= radius and the 2d values c[I+1-d .. I+d]."""
    searchable = np.abs(lags) <= radius
    candidates = np.flatnonzero(searchable)
    best = candidates[np.argmax(np.abs(c[candidates]))]
    peak = int(lags[best])
    return peak, c[best + 1 - d:best + d + 1]


def crosscorr_baud(
    y: SampleSet,
    z_conj: np.ndarray,
    d: int,
    anchor: int,
    radius: Optional[int] = None,
) -> CorrelationWindow:
    """
    c[m] = sum_n z*[n] y[anchor + n + m], peak search over |m| <= radius.

    `anchor` is the baud lattice index of the nominal ZC body start.
    """
    if y.kind is not SampleKind.BAUD_RRC:
        raise WindowError(f"baud correlator needs baud_rrc samples, got {y.kind.value}")
    if d < 1:
        raise WindowError(f"d must be positive, got {d}")
    radius = d if radius is None else max(radius, 0)
    lags = np.arange(-radius + 1 - d, radius + d + 1)
    c = _correlate(y, np.asarray(z_conj, dtype=complex), anchor, lags, 1.0)
    peak, values = _peak_window(c, lags, radius, d)
    noise_var = y.sigma2 * float(np.sum(np.abs(z_conj) ** 2))
    return CorrelationWindow(values=values, d=d, noise_var=noise_var, rate=Rate.BAUD, peak_index=peak, lag=y.step)


def interpolate_zc_double(z: np.ndarray, cfg: PulseConfig) -> np.ndarray:
    """
    z^d[k] = sum_i z[i mod Q] rrc(kT/2 - iT), k = 0 .. 2Q-1.

    The sequence is taken as periodic, like the cyclically extended preamble
    it is correlated against, so i runs over the whole RRC support.
    """
    z = np.asarray(z, dtype=complex)
    Q = len(z)
    k = np.arange(2 * Q)
    i = np.arange(-cfg.span - 1, Q + cfg.span + 1)
    kernel = rrc_pulse(k[:, None] * cfg.T / 2 - i[None, :] * cfg.T, cfg)
    return kernel @ z[i % Q]


def crosscorr_double(
    y: SampleSet,
    z_d_conj: np.ndarray,
    d: int,
    anchor: int,
    cfg: PulseConfig,
    radius: Optional[int] = None,
) -> CorrelationWindow:
    """
    c[m] = (T/2) sum_k z^d*[k] y[anchor + k + m] over half-baud lags.

    The T/2 weight makes the noiseless output Q*h*rc(mT/2 - t).
    `anchor` is the half-baud lattice index of the nominal ZC body start.
    """
    if y.kind is SampleKind.BAUD_RRC:
        raise WindowError("double-baud correlator needs half-baud samples")
    if d < 1:
        raise WindowError(f"d must be positive, got {d}")
    radius = d if radius is None else max(radius, 0)
    weight = cfg.T / 2
    z_d_conj = np.asarray(z_d_conj, dtype=complex)
    lags = np.arange(-radius + 1 - d, radius + d + 1)
    c = _correlate(y, z_d_conj, anchor, lags, weight)
    peak, values = _peak_window(c, lags, radius, d)
    noise_var = weight ** 2 * y.sigma2 * float(np.sum(np.abs(z_d_conj) ** 2))
    return CorrelationWindow(values=values, d=d, noise_var=noise_var, rate=Rate.DOUBLE, peak_index=peak, lag=y.step)


@functools.lru_cache(maxsize=64)
def build_whitener(d: int, cfg: PulseConfig) -> WhiteningOperator:
    """Sigma0[i][j] = rc((j - i) T/2) over the 2d window entries, factored as U0^T U0."""
    if d < 1:
        raise CovarianceError(f"d must be positive, got {d}")
    idx = np.arange(2 * d)
    Sigma0 = rc_pulse((idx[None, :] - idx[:, None]) * cfg.T / 2, cfg)
    try:
        U0 = spla.cholesky(Sigma0, lower=False)
    except spla.LinAlgError as exc:
        raise CovarianceError("covariance not positive definite") from exc
    if np.any(np.diag(U0) ** 2 <= PIVOT_TOLERANCE):
        raise CovarianceError("covariance not positive definite")

    U0_invT = spla.solve_triangular(U0, np.eye(2 * d), trans='T', lower=False)
    for array in (Sigma0, U0, U0_invT):
        array.setflags(write=False)
    return WhiteningOperator(Sigma0=Sigma0, U0=U0, U0_invT=U0_invT)


def whiten_window(c: CorrelationWindow, W: WhiteningOperator) -> WhitenedCorrelation:
    """c_ddot = U0^{-T} c."""
    if len(c.values) != W.size:
        raise WindowError(f"window of length {len(c.values)} does not match whitener of size {W.size}")
    return WhitenedCorrelation(
        values=W.apply(c.values),
        d=c.d,
        noise_var=c.noise_var,
        peak_index=c.peak_index,
        lag=c.lag,
    )


def _ml_search(metric: Callable[[np.ndarray], np.ndarray], cfg: PulseConfig, grid_step: float, tol: float) -> float:
    """
    Minimize metric(t) over t in [-T/2, T/2): coarse grid, then bounded refinement.

    `metric` takes a vector of candidates. Ties on the grid go to the smallest t.
    """
    half = cfg.T / 2
    count = max(int(round(cfg.T / grid_step)), 2)
    grid = -half + grid_step * np.arange(count)
    grid = grid[grid < half]
    values = metric(grid)
    best = int(np.argmin(values))
    t_best, f_best = float(grid[best]), float(values[best])

    lo, hi = max(t_best - grid_step, -half), min(t_best + grid_step, half)
    result = minimize_scalar(
        lambda t: float(metric(np.array([t]))[0]),
        bounds=(lo, hi),
        method='bounded',
        options={'xatol': tol},
    )
    if result.success and result.fun <= f_best:
        t_best = float(result.x)
    return t_best


def _clamp_offset(t: float, cfg: PulseConfig) -> float:
    half = cfg.T / 2
    return float(np.clip(t, -half, np.nextafter(half, -np.inf)))


def _fit_baud(c: CorrelationWindow, h: complex, Q: int, cfg: PulseConfig, grid_step: float, tol: float) -> float:
    m = c.offsets

    def metric(t: np.ndarray) -> np.ndarray:
        model = h * Q * rc_pulse(m[None, :] * cfg.T - t[:, None], cfg)
        return np.sum(np.abs(c.values[None, :] - model) ** 2, axis=1)

    fraction = _ml_search(metric, cfg, grid_step, tol)
    return _clamp_offset(c.peak_index * c.lag + fraction, cfg)


def estimate_baud(
    cA: CorrelationWindow,
    cB: CorrelationWindow,
    h_A: complex,
    h_B: complex,
    Q: int,
    cfg: PulseConfig,
    grid_step: float = 0.005,
    tol: float = 1e-4,
) -> OffsetEstimate:
    """argmin_t sum_m |c[m] - h*Q*rc(mT - t)|^2 for each node."""
    t_A = _fit_baud(cA, h_A, Q, cfg, grid_step * cfg.T, tol * cfg.T)
    t_B = _fit_baud(cB, h_B, Q, cfg, grid_step * cfg.T, tol * cfg.T)
    logger.debug(f"ESTIMATOR: baud t_A={t_A:.5f} t_B={t_B:.5f} peaks=({cA.peak_index}, {cB.peak_index})")
    return OffsetEstimate(t_hat_A=t_A, t_hat_B=t_B, method=Rate.BAUD)


def double_model(t: np.ndarray, d: int, h: complex, Q: int, cfg: PulseConfig) -> np.ndarray:
    """v(t)[m] = Q*h*rc(mT/2 - t), one row per candidate t."""
    m = np.arange(1 - d, d + 1)
    return h * Q * rc_pulse(m[None, :] * cfg.T / 2 - np.atleast_1d(t)[:, None], cfg)


def _fit_double(c: WhitenedCorrelation, W: WhiteningOperator, h: complex, Q: int, cfg: PulseConfig,
                grid_step: float, tol: float) -> float:
    def metric(t: np.ndarray) -> np.ndarray:
        whitened_model = double_model(t, c.d, h, Q, cfg) @ W.U0_invT.T
        return np.sum(np.abs(c.values[None, :] - whitened_model) ** 2, axis=1)

    fraction = _ml_search(metric, cfg, grid_step, tol)
    return _clamp_offset(c.peak_index * c.lag + fraction, cfg)


def estimate_double(
    cA: WhitenedCorrelation,
    cB: WhitenedCorrelation,
    W: WhiteningOperator,
    h_A: complex,
    h_B: complex,
    Q: int,
    cfg: PulseConfig,
    grid_step: float = 0.005,
    tol: float = 1e-4,
) -> OffsetEstimate:
    """argmin_t ||c_ddot - U0^{-T} v(t)||^2 for each node."""
    t_A = _fit_double(cA, W, h_A, Q, cfg, grid_step * cfg.T, tol * cfg.T)
    t_B = _fit_double(cB, W, h_B, Q, cfg, grid_step * cfg.T, tol * cfg.T)
    logger.debug(f"ESTIMATOR: double t_A={t_A:.5f} t_B={t_B:.5f} peaks=({cA.peak_index}, {cB.peak_index})")
    return OffsetEstimate(t_hat_A=t_A, t_hat_B=t_B, method=Rate.DOUBLE)


class MisalignmentEstimator:
    """
    Preamble-based offset estimation for frames that start at t = 0.

    Holds the node sequences, the interpolated references and the whitener so
    they are built once per configuration.
    """

    def __init__(self, spec: PreambleSpec, d: int, cfg: PulseConfig,
                 grid_step: Optional[float] = None, refine_tol: Optional[float] = None):
        if grid_step is None or refine_tol is None:
            from django.conf import settings

            estimator = settings.SIMULATION_CONFIG['ESTIMATOR']
            grid_step = estimator['GRID_STEP'] if grid_step is None else grid_step
            refine_tol = estimator['REFINE_TOL'] if refine_tol is None else refine_tol
        if not 1 <= d <= spec.G:
            raise WindowError(f"d must satisfy 1 <= d <= G={spec.G}, got {d}")

        self.spec = spec
        self.d = d
        self.cfg = cfg
        self.grid_step = grid_step
        self.refine_tol = refine_tol
        self.z_A, self.z_B = assign_pair(spec)
        self._z_d_A = None
        self._z_d_B = None

    def _double_references(self):
        if self._z_d_A is None:
            self._z_d_A = interpolate_zc_double(self.z_A, self.cfg)
            self._z_d_B = interpolate_zc_double(self.z_B, self.cfg)
        return self._z_d_A, self._z_d_B

    def baud(self, y: SampleSet, h_A: complex, h_B: complex) -> OffsetEstimate:
        radius = self.spec.G - self.d
        cA = crosscorr_baud(y, np.conj(self.z_A), self.d, self.spec.G, radius)
        cB = crosscorr_baud(y, np.conj(self.z_B), self.d, self.spec.G, radius)
        return estimate_baud(cA, cB, h_A, h_B, self.spec.Q, self.cfg, self.grid_step, self.refine_tol)

    def double(self, y: SampleSet, h_A: complex, h_B: complex) -> OffsetEstimate:
        z_d_A, z_d_B = self._double_references()
        radius = 2 * self.spec.G - self.d
        anchor = 2 * self.spec.G
        W = build_whitener(self.d, self.cfg)
        cA = whiten_window(crosscorr_double(y, np.conj(z_d_A), self.d, anchor, self.cfg, radius), W)
        cB = whiten_window(crosscorr_double(y, np.conj(z_d_B), self.d, anchor, self.cfg, radius), W)
        return estimate_double(cA, cB, W, h_A, h_B, self.spec.Q, self.cfg, self.grid_step, self.refine_tol)

    def estimate(self, y: SampleSet, h_A: complex, h_B: complex, method: Rate) -> OffsetEstimate:
        if method is Rate.BAUD:
            return self.baud(y, h_A, h_B)
        return self.double(y, h_A, h_B)
