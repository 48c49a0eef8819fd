"""
PNC Decoder Service

Soft XOR decoding of the overlapped payloads given estimated offsets.

Double-baud decoder:
    1. Reconstruct y1[n] = y(nT + t_A) and y2[n] = y(nT + t_B) from the
       half-baud RRC samples (band-limited reconstruction).
    2. Interleave y = [y1[0], y2[0], y1[1], ...] with x = [sA0, sB0, ...];
       the noise covariance Sigma depends on tau only. Whiten with the
       Cholesky factor Sigma = U^T U: y_bar = U^{-T} y ~ U H x + white noise.
    3. Keep the L-wide band of U, group variables in overlapping clusters of
       L consecutive symbols and run one forward and one backward log-domain
       sum-product pass over the resulting chain.
    4. Pair marginals of (sA[n], sB[n]) give the XOR likelihood ratio.

Baud decoder: one observation per A boundary, no whitening; each cluster holds
sA[n] and the L-1 nearest interfering B symbols.

Symbols outside the payload are known +1 guards; their contribution is
removed from the observations before the graph is built.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as spla
from scipy.special import logsumexp

from phy.exceptions import CovarianceError, GraphError, SupportError
from phy.services.channel_sim import SampleSet
from phy.services.signal_core import PulseConfig, rc_pulse, sinc2_reconstruct

logger = logging.getLogger(__name__)

LOG_FLOOR = -700.0
U_CLAMP = (1e-12, 1e12)
CHOLESKY_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class ObservationModel:
    """Whitened boundary observations y_bar ~ U H x + w_bar."""

    y_bar: np.ndarray
    U: np.ndarray
    H: np.ndarray
    L: int
    sigma2: float
    tau_hat: float

    @property
    def N(self) -> int:
        return len(self.y_bar) // 2

    def banded(self) -> np.ndarray:
        """U H with everything beyond the (L-1)-th superdiagonal dropped."""
        UH = self.U * self.H[None, :]
        return np.triu(np.tril(UH, self.L - 1))

    def residual_norm(self, x: np.ndarray) -> float:
        """||y_bar - U H x|| for a known symbol vector (model mismatch diagnostic)."""
        return float(np.linalg.norm(self.y_bar - self.U @ (self.H * x)))


@dataclass(frozen=True)
class ObservationTerm:
    """One likelihood factor exp(-|value - sum_j coefficients[j] x[variables[j]]|^2 / sigma2)."""

    value: complex
    variables: Tuple[int, ...]
    coefficients: np.ndarray


@dataclass
class FactorGraph:
    """
    Chain of variable clusters.

    Consecutive clusters are joined by one check that enforces agreement on
    their shared variables; each cluster carries the log-likelihood table of
    the observation rows attached to it. Table axis j is clusters[i][j];
    index 0 means +1, index 1 means -1.
    """

    clusters: List[Tuple[int, ...]]
    log_tables: List[np.ndarray]
    pair_sources: List[Tuple[int, int, int]]
    observations: List[ObservationTerm]
    num_vars: int
    sigma2: float
    forward: List[np.ndarray] = field(default_factory=list)
    backward: List[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.clusters)

    def shared(self, i: int) -> Tuple[int, ...]:
        """Variables shared by clusters i and i+1."""
        return tuple(sorted(set(self.clusters[i]) & set(self.clusters[i + 1])))

    def psi(self, i: int, state_i: Sequence[int], state_next: Sequence[int]) -> int:
        """Check between clusters i and i+1: 1 if the states agree on shared variables."""
        values_i = dict(zip(self.clusters[i], state_i))
        values_next = dict(zip(self.clusters[i + 1], state_next))
        return int(all(values_i[v] == values_next[v] for v in self.shared(i)))


@dataclass(frozen=True)
class SoftXorOutput:
    u: np.ndarray
    hard: np.ndarray


def resample_boundaries(
    y_d: SampleSet,
    t_hat_A: float,
    t_hat_B: float,
    first: int,
    N: int,
    cfg: PulseConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    """y1[n] = y((first + n)T + t_hat_A), y2[n] = y((first + n)T + t_hat_B), n = 0..N-1."""
    n = first + np.arange(N)
    reach = 2 * cfg.sinc_half_width
    for t_hat in (t_hat_A, t_hat_B):
        x = 2.0 * (n * cfg.T + t_hat) / cfg.T - y_d.origin
        if N and (x.min() - reach < 0 or x.max() + reach > len(y_d) - 1):
            raise SupportError("insufficient guard samples")

    y1 = sinc2_reconstruct(y_d.samples, n * cfg.T + t_hat_A, cfg, origin=y_d.origin)
    y2 = sinc2_reconstruct(y_d.samples, n * cfg.T + t_hat_B, cfg, origin=y_d.origin)
    return np.atleast_1d(y1), np.atleast_1d(y2)


def _guard_indices(N: int, guard: int) -> np.ndarray:
    return np.concatenate([np.arange(-guard, 0), np.arange(N, N + guard)])


def _guard_interference(N: int, guard: int, shift: float, cfg: PulseConfig) -> np.ndarray:
    """sum over guard symbols m of rc((n - m)T + shift) for n = 0..N-1."""
    if guard <= 0:
        return np.zeros(N)
    m = _guard_indices(N, guard)
    n = np.arange(N)
    return rc_pulse((n[:, None] - m[None, :]) * cfg.T + shift, cfg).sum(axis=1)


def boundary_covariance(N: int, tau_hat: float, cfg: PulseConfig) -> np.ndarray:
    """Sigma of the interleaved noise (y1[0], y2[0], y1[1], ...), in units of sigma^2."""
    n = np.arange(N)
    lag = (n[:, None] - n[None, :]) * cfg.T
    Sigma = np.zeros((2 * N, 2 * N))
    Sigma[0::2, 0::2] = np.eye(N)
    Sigma[1::2, 1::2] = np.eye(N)
    Sigma[0::2, 1::2] = rc_pulse(lag + tau_hat, cfg)
    Sigma[1::2, 0::2] = rc_pulse(lag - tau_hat, cfg)
    return Sigma


def build_model(
    y1: np.ndarray,
    y2: np.ndarray,
    tau_hat: float,
    h_A: complex,
    h_B: complex,
    L: int,
    cfg: PulseConfig,
    sigma2: float,
    guard: int = 0,
) -> ObservationModel:
    """Interleave, remove guard interference, factor Sigma = U^T U and whiten."""
    y1 = np.asarray(y1, dtype=complex)
    y2 = np.asarray(y2, dtype=complex)
    N = len(y1)
    if len(y2) != N:
        raise GraphError(f"boundary streams differ in length ({N} vs {len(y2)})")
    if L < 2 or 2 * N < L:
        raise GraphError(f"truncation L={L} needs 2 <= L <= 2N = {2 * N}")
    if sigma2 <= 0:
        raise GraphError(f"sigma2 must be positive, got {sigma2}")

    y1 = y1 - h_B * _guard_interference(N, guard, tau_hat, cfg)
    y2 = y2 - h_A * _guard_interference(N, guard, -tau_hat, cfg)
    y = np.empty(2 * N, dtype=complex)
    y[0::2], y[1::2] = y1, y2

    Sigma = boundary_covariance(N, tau_hat, cfg)
    try:
        U = spla.cholesky(Sigma, lower=False)
    except spla.LinAlgError as exc:
        raise CovarianceError("Σ not PD") from exc
    if np.any(np.diag(U) ** 2 <= 1e-12) or np.max(np.abs(U.T @ U - Sigma)) > CHOLESKY_RESIDUAL_TOL:
        raise CovarianceError("Σ not PD")

    H = np.tile(np.array([h_A, h_B], dtype=complex), N)
    y_bar = spla.solve_triangular(U, y, trans='T', lower=False)
    return ObservationModel(y_bar=y_bar, U=U, H=H, L=L, sigma2=sigma2, tau_hat=tau_hat)


def _state_signs(k: int) -> np.ndarray:
    """All 2^k sign vectors, row 0 all +1, first column most significant."""
    return 1.0 - 2.0 * np.array(list(itertools.product((0, 1), repeat=k)), dtype=float).reshape(-1, k)


def _log_table(cluster: Tuple[int, ...], terms: List[ObservationTerm], sigma2: float) -> np.ndarray:
    k = len(cluster)
    signs = _state_signs(k)
    position = {v: j for j, v in enumerate(cluster)}
    table = np.zeros(2 ** k)
    for term in terms:
        cols = [position[v] for v in term.variables]
        mean = signs[:, cols] @ term.coefficients
        table -= np.abs(term.value - mean) ** 2 / sigma2
    return table.reshape((2,) * k)


def _assemble(clusters, rows_of_cluster, observations, pair_sources, num_vars, sigma2) -> FactorGraph:
    tables = [
        _log_table(cluster, [observations[r] for r in rows], sigma2)
        for cluster, rows in zip(clusters, rows_of_cluster)
    ]
    return FactorGraph(
        clusters=clusters,
        log_tables=tables,
        pair_sources=pair_sources,
        observations=observations,
        num_vars=num_vars,
        sigma2=sigma2,
    )


def build_graph(model: ObservationModel) -> FactorGraph:
    """
    Clusters V_i = {x_i .. x_{i+L-1}}, i = 0 .. 2N-L.

    Observation row r uses the band UH[r, r:r+L] and is attached to cluster
    min(r, 2N-L); the pair (sA[n], sB[n]) is read from cluster min(2n, 2N-L).
    """
    L, N = model.L, model.N
    if L < 2 or L % 2:
        raise GraphError(f"L must be an even integer >= 2, got {L}")
    if L > 2 * N:
        raise GraphError(f"truncation L={L} exceeds 2N = {2 * N}")

    size = 2 * N
    last = size - L
    band = model.banded()
    clusters = [tuple(range(i, i + L)) for i in range(last + 1)]

    observations = []
    rows_of_cluster = [[] for _ in clusters]
    for r in range(size):
        cols = tuple(range(r, min(r + L, size)))
        observations.append(ObservationTerm(value=complex(model.y_bar[r]), variables=cols, coefficients=band[r, list(cols)]))
        rows_of_cluster[min(r, last)].append(r)

    pair_sources = []
    for n in range(N):
        c = min(2 * n, last)
        pair_sources.append((c, 2 * n - c, 2 * n + 1 - c))
    return _assemble(clusters, rows_of_cluster, observations, pair_sources, size, model.sigma2)


def _marginalize(table: np.ndarray, cluster: Tuple[int, ...], keep: Tuple[int, ...]) -> np.ndarray:
    drop = tuple(j for j, v in enumerate(cluster) if v not in keep)
    message = logsumexp(table, axis=drop) if drop else table
    return message - logsumexp(message)


def _expand(message: np.ndarray, keep: Tuple[int, ...], cluster: Tuple[int, ...]) -> np.ndarray:
    """Broadcast a message over `keep` onto the axes of `cluster`."""
    shape = tuple(2 if v in keep else 1 for v in cluster)
    return np.broadcast_to(np.reshape(message, shape), (2,) * len(cluster))


def spa_decode(graph: FactorGraph) -> np.ndarray:
    """
    One forward and one backward log-domain pass over the cluster chain.

    Returns pair APPs of shape (N, 2, 2): [n, a, b] = P(sA[n] = a, sB[n] = b),
    index 0 meaning +1. Messages are stored on the graph normalized to sum 1.
    """
    count = len(graph)
    tables = graph.log_tables
    zeros = [np.zeros((2,) * len(c)) for c in graph.clusters]

    forward = [zeros[0]]
    for i in range(count - 1):
        keep = graph.shared(i)
        message = _marginalize(forward[i] + tables[i], graph.clusters[i], keep)
        forward.append(_expand(message, keep, graph.clusters[i + 1]))

    backward = [zeros[-1]]
    for i in range(count - 1, 0, -1):
        keep = graph.shared(i - 1)
        message = _marginalize(backward[0] + tables[i], graph.clusters[i], keep)
        backward.insert(0, _expand(message, keep, graph.clusters[i - 1]))

    graph.forward, graph.backward = forward, backward

    pairs = np.empty((len(graph.pair_sources), 2, 2))
    for n, (c, axis_a, axis_b) in enumerate(graph.pair_sources):
        belief = forward[c] + backward[c] + tables[c]
        belief = belief - logsumexp(belief)
        drop = tuple(j for j in range(belief.ndim) if j not in (axis_a, axis_b))
        pair = logsumexp(belief, axis=drop) if drop else belief
        if axis_a > axis_b:
            pair = pair.T
        pairs[n] = np.exp(np.maximum(pair, LOG_FLOOR))
    pairs /= pairs.sum(axis=(1, 2), keepdims=True)
    return pairs


def soft_xor(pair_apps: np.ndarray) -> SoftXorOutput:
    """u[n] = P(XOR = 0) / P(XOR = 1), clamped; hard XOR = 0 iff u >= 1."""
    p = np.asarray(pair_apps, dtype=float)
    same = p[:, 0, 0] + p[:, 1, 1]
    differ = p[:, 0, 1] + p[:, 1, 0]
    with np.errstate(divide='ignore', invalid='ignore'):
        u = np.where(differ > 0, same / np.where(differ > 0, differ, 1.0), np.inf)
    u = np.clip(np.nan_to_num(u, nan=1.0, posinf=U_CLAMP[1]), *U_CLAMP)
    hard = np.where(u >= 1.0, 0, 1).astype(np.uint8)
    return SoftXorOutput(u=u, hard=hard)


def baud_offsets(tau_hat: float, L: int, cfg: PulseConfig) -> List[int]:
    """
    B-symbol offsets l (interferer s_B[n-l]) kept in each baud cluster.

    l = 0 always; the remaining L-2 are the nearest in time, ordered by
    |l + tau/T| with ties to smaller |l| and then smaller l.
    """
    if L < 2:
        raise GraphError(f"L must be >= 2, got {L}")
    reach = L + int(np.ceil(abs(tau_hat) / cfg.T)) + 1
    candidates = [l for l in range(-reach, reach + 1) if l != 0]
    candidates.sort(key=lambda l: (abs(l + tau_hat / cfg.T), abs(l), l))
    return sorted([0] + candidates[:L - 2])


def build_baud_graph(
    y0: np.ndarray,
    tau_hat: float,
    h_A: complex,
    h_B: complex,
    L: int,
    sigma2: float,
    cfg: PulseConfig,
    guard: int = 0,
) -> FactorGraph:
    """Cluster n = {sA[n]} plus sB[n-l] for the kept offsets l; row n is y0[n]."""
    y0 = np.asarray(y0, dtype=complex)
    N = len(y0)
    if L > 2 * N:
        raise GraphError(f"truncation L={L} exceeds 2N = {2 * N}")
    if sigma2 <= 0:
        raise GraphError(f"sigma2 must be positive, got {sigma2}")

    offsets = baud_offsets(tau_hat, L, cfg)
    weights = {l: h_B * rc_pulse(l * cfg.T + tau_hat, cfg) for l in offsets}
    clean = y0 - h_B * _guard_interference(N, guard, tau_hat, cfg)

    clusters, observations, pair_sources = [], [], []
    for n in range(N):
        terms = {2 * n: h_A}
        for l in offsets:
            m = n - l
            if 0 <= m < N:
                terms[2 * m + 1] = weights[l]
        variables = tuple(sorted(terms))
        clusters.append(variables)
        observations.append(ObservationTerm(
            value=complex(clean[n]),
            variables=variables,
            coefficients=np.array([terms[v] for v in variables], dtype=complex),
        ))
        pair_sources.append((n, variables.index(2 * n), variables.index(2 * n + 1)))

    rows_of_cluster = [[n] for n in range(N)]
    return _assemble(clusters, rows_of_cluster, observations, pair_sources, 2 * N, sigma2)


def decode_baud(
    y0: np.ndarray,
    tau_hat: float,
    h_A: complex,
    h_B: complex,
    L: int,
    sigma2: float,
    cfg: PulseConfig,
    guard: int = 0,
) -> SoftXorOutput:
    """Baud-rate decoder on samples taken at the estimated A boundaries."""
    graph = build_baud_graph(y0, tau_hat, h_A, h_B, L, sigma2, cfg, guard)
    logger.debug(f"DECODER: baud graph with {len(graph)} clusters, L={L}, tau_hat={tau_hat:.5f}")
    return soft_xor(spa_decode(graph))


def decode_double(
    y1: np.ndarray,
    y2: np.ndarray,
    tau_hat: float,
    h_A: complex,
    h_B: complex,
    L: int,
    sigma2: float,
    cfg: PulseConfig,
    guard: int = 0,
    truth: Optional[np.ndarray] = None,
) -> SoftXorOutput:
    """
    Double-baud decoder on the two boundary streams.

    `truth` (interleaved symbols) only feeds a DEBUG log of the whitened
    model mismatch.
    """
    model = build_model(y1, y2, tau_hat, h_A, h_B, L, cfg, sigma2, guard)
    if truth is not None and logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"DECODER: whitened residual ||eps|| = {model.residual_norm(truth):.4e}")
    graph = build_graph(model)
    logger.debug(f"DECODER: double graph with {len(graph)} clusters, L={L}, tau_hat={tau_hat:.5f}")
    return soft_xor(spa_decode(graph))
