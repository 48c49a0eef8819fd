"""
Experiment Harness Service

Monte Carlo driver for the relay uplink. One trial draws a channel, builds
both frames, runs the estimator and/or decoder of the selected solution and
returns its error counts; trials run in fixed-size batches (optionally on a
process pool) until the trial budget or the error target is reached.

Every trial owns the generator default_rng([seed, point, trial]), so results
do not depend on the batch size or on the number of workers.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from phy.exceptions import CovarianceError
from phy.services.channel_sim import (
    ChannelRealization,
    ChannelType,
    FrontEnd,
    SampleKind,
    front_end,
    sample,
    uplink_superpose,
)
from phy.services.misalignment_estimator import MisalignmentEstimator, Rate
from phy.services.pnc_decoder import decode_baud, decode_double, resample_boundaries
from phy.services.preamble import Node, PreambleSpec, bits_to_bpsk, build_frame
from phy.services.signal_core import PulseConfig
from phy.services.xor_channel_code import cached_code, xor_llr

logger = logging.getLogger(__name__)

SCENARIOS = (
    'estimator_mse',
    'estimator_pdf',
    'decoder_ser_awgn',
    'decoder_per_rayleigh',
    'truncation_sweep',
)
ESTIMATOR_SCENARIOS = ('estimator_mse', 'estimator_pdf')

# solution -> (estimator rate, decoder rate); exact_tau skips estimation
SOLUTIONS = {
    'I': (Rate.BAUD, Rate.BAUD),
    'II': (Rate.DOUBLE, Rate.BAUD),
    'III': (Rate.BAUD, Rate.DOUBLE),
    'IV': (Rate.DOUBLE, Rate.DOUBLE),
    'exact_tau': (None, None),
}

DEFAULT_PAYLOAD = {'estimator': 64, 'uncoded': 256}


class ConfigError(ValueError):
    """Invalid experiment configuration; `field` names the offending option."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One experiment: a scenario, a solution and the sweep over Eb/N0.

    G defaults to Q // 3. N defaults to 64 for estimator scenarios, 256 for
    uncoded decoding and the code length when coded. `decoder` selects the
    decoder of the exact_tau solution.
    """

    scenario: str
    solution: str = 'IV'
    beta: float = 1.0
    Q: int = 31
    G: Optional[int] = None
    d: int = 4
    L: int = 4
    N: Optional[int] = None
    ebn0_list: Tuple[float, ...] = (10.0,)
    trials: int = 1000
    seed: int = 0
    channel: Optional[str] = None
    coded: Optional[bool] = None
    decoder: str = 'double'
    l_list: Tuple[int, ...] = ()
    max_errors: int = 100
    batch_size: int = 50
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError('scenario', f"unknown scenario '{self.scenario}'")
        if self.solution not in SOLUTIONS:
            raise ConfigError('solution', f"unknown solution '{self.solution}'")

        if self.G is None:
            object.__setattr__(self, 'G', self.Q // 3)
        if self.channel is None:
            object.__setattr__(self, 'channel', 'rayleigh' if self.scenario == 'decoder_per_rayleigh' else 'awgn')
        if self.coded is None:
            object.__setattr__(self, 'coded', self.scenario == 'decoder_per_rayleigh')
        object.__setattr__(self, 'ebn0_list', tuple(float(v) for v in self.ebn0_list))
        object.__setattr__(self, 'l_list', tuple(int(v) for v in self.l_list))
        self._validate()

    def _validate(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError('beta', f"roll-off must lie in [0, 1], got {self.beta}")
        if self.Q < 3 or self.Q % 2 == 0:
            raise ConfigError('Q', f"preamble length must be odd and >= 3, got {self.Q}")
        if not 0 < self.G < self.Q:
            raise ConfigError('G', f"guard must satisfy 0 < G < Q, got {self.G}")
        if not 1 <= self.d <= self.G:
            raise ConfigError('d', f"window half-width must satisfy 1 <= d <= G={self.G}, got {self.d}")
        if self.N is not None and self.N < 1:
            raise ConfigError('N', f"payload length must be positive, got {self.N}")
        if not self.ebn0_list:
            raise ConfigError('ebn0_list', "at least one Eb/N0 point is required")
        if self.trials < 1:
            raise ConfigError('trials', f"must be positive, got {self.trials}")
        if self.channel not in ('awgn', 'rayleigh'):
            raise ConfigError('channel', f"unknown channel '{self.channel}'")
        if self.decoder not in ('baud', 'double'):
            raise ConfigError('decoder', f"unknown decoder '{self.decoder}'")
        for name in ('max_errors', 'batch_size', 'workers'):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)}")

        if self.coded and self.N is not None:
            from django.conf import settings

            code_length = settings.SIMULATION_CONFIG['LDPC']['N']
            if self.N != code_length:
                raise ConfigError('N', f"coded payload must match the code length {code_length}, got {self.N}")

        if self.is_estimator_scenario:
            if self.estimator_rate is None:
                raise ConfigError('solution', "estimator scenarios need a solution with an estimator")
            if self.coded:
                raise ConfigError('coded', "estimator scenarios do not decode")
            return

        for L in self.truncations:
            if L < 2:
                raise ConfigError('L', f"truncation must be >= 2, got {L}")
            if self.decoder_rate is Rate.DOUBLE and L % 2:
                raise ConfigError('L', f"double-baud decoder needs an even truncation, got {L}")
            if L > 2 * self.payload_length:
                raise ConfigError('L', f"truncation {L} exceeds 2N = {2 * self.payload_length}")

    @property
    def is_estimator_scenario(self) -> bool:
        return self.scenario in ESTIMATOR_SCENARIOS

    @property
    def estimator_rate(self) -> Optional[Rate]:
        return SOLUTIONS[self.solution][0]

    @property
    def decoder_rate(self) -> Rate:
        rate = SOLUTIONS[self.solution][1]
        return rate if rate is not None else Rate(self.decoder)

    @property
    def truncations(self) -> Tuple[int, ...]:
        if self.scenario == 'truncation_sweep' and self.l_list:
            return self.l_list
        return (self.L,)

    @property
    def payload_length(self) -> int:
        if self.N is not None:
            return self.N
        if self.is_estimator_scenario:
            return DEFAULT_PAYLOAD['estimator']
        if self.coded:
            from django.conf import settings

            return settings.SIMULATION_CONFIG['LDPC']['N']
        return DEFAULT_PAYLOAD['uncoded']

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['ebn0_list'] = list(self.ebn0_list)
        data['l_list'] = list(self.l_list)
        data['N'] = self.payload_length
        return data

    @classmethod
    def from_options(cls, options: Dict[str, Any], base: Optional[Dict[str, Any]] = None) -> 'ExperimentConfig':
        """
        Merge `options` over `base` (typically a JSON config file) and the
        SIMULATION_CONFIG['HARNESS'] defaults. None values are ignored;
        `ebn0` and `l_list` accept comma-separated strings.
        """
        from django.conf import settings

        harness = settings.SIMULATION_CONFIG['HARNESS']
        merged: Dict[str, Any] = {
            'max_errors': harness['MAX_ERRORS'],
            'batch_size': harness['BATCH_SIZE'],
            'workers': harness['WORKERS'],
        }
        known = {f.name for f in fields(cls)}
        for source in (base or {}, options):
            for key, value in source.items():
                if value is None:
                    continue
                key = 'ebn0_list' if key == 'ebn0' else key
                if key not in known:
                    raise ConfigError(key, "unknown option")
                merged[key] = value

        for key, cast in (('ebn0_list', float), ('l_list', int)):
            if isinstance(merged.get(key), str):
                try:
                    merged[key] = tuple(cast(v) for v in merged[key].split(',') if v.strip())
                except ValueError as exc:
                    raise ConfigError(key, f"cannot parse '{merged[key]}'") from exc
        if 'scenario' not in merged:
            raise ConfigError('scenario', "a scenario is required")
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError('config', str(exc)) from exc


@dataclass(frozen=True)
class RunContext:
    """Settings resolved once in the parent process and shipped to the workers."""

    pulse: PulseConfig
    grid_step: float
    refine_tol: float
    guard: int
    llr_clamp: float
    ldpc: Tuple[int, int, int, int, int]
    ldpc_max_iters: int

    @classmethod
    def from_settings(cls, config: ExperimentConfig) -> 'RunContext':
        from django.conf import settings

        sim = settings.SIMULATION_CONFIG
        ldpc = sim['LDPC']
        return cls(
            pulse=PulseConfig.from_settings(config.beta),
            grid_step=sim['ESTIMATOR']['GRID_STEP'],
            refine_tol=sim['ESTIMATOR']['REFINE_TOL'],
            guard=sim['DECODER']['GUARD_SYMBOLS'],
            llr_clamp=sim['DECODER']['LLR_CLAMP'],
            ldpc=(ldpc['N'], ldpc['K'], ldpc['COLUMN_WEIGHT'], ldpc['ROW_WEIGHT'], ldpc['CONSTRUCTION_SEED']),
            ldpc_max_iters=ldpc['MAX_ITERS'],
        )


@dataclass(frozen=True)
class TrialOutcome:
    sq_error: Optional[float] = None
    symbol_errors: int = 0
    symbols: int = 0
    bit_errors: int = 0
    bits: int = 0
    packet_error: bool = False
    fallback: bool = False


@dataclass(frozen=True)
class MetricsRecord:
    """
    Aggregated metrics of one (solution, L, Eb/N0) point.

    Metrics a scenario does not produce are None. `histogram` holds
    (bin_lo, bin_hi, density) rows of the squared estimation error.
    """

    scenario: str
    solution: str
    beta: float
    Q: int
    G: int
    d: int
    L: int
    N: int
    ebn0: float
    mse_tau: Optional[float]
    ser: Optional[float]
    per: Optional[float]
    good_estimate_rate: Optional[float]
    trials: int
    seed: int
    histogram: Optional[Tuple[Tuple[float, float, float], ...]] = None
    wall_time: float = field(default=0.0, compare=False)
    bits: int = field(default=0, compare=False)


@dataclass(frozen=True)
class TrendViolation:
    """An error rate that grew between adjacent Eb/N0 points by more than the allowed spread."""

    metric: str
    solution: str
    L: int
    ebn0_low: float
    ebn0_high: float
    increase: float
    tolerance: float


def _standard_error(rate: float, units: int) -> float:
    return float(np.sqrt(rate * (1.0 - rate) / units)) if units else 0.0


def check_monotone(records: Iterable[MetricsRecord], sigmas: float = 3.0) -> List[TrendViolation]:
    """
    SER and PER must not grow with Eb/N0.

    Adjacent points of the same (solution, L) curve are compared; an increase
    is flagged when it exceeds `sigmas` combined Monte Carlo standard errors
    (binomial, over bits for SER and packets for PER).
    """
    curves: Dict[Tuple[str, int], List[MetricsRecord]] = {}
    for record in records:
        if record.ser is None and record.per is None:
            continue
        curves.setdefault((record.solution, record.L), []).append(record)

    violations = []
    for (solution, L), curve in curves.items():
        curve.sort(key=lambda r: r.ebn0)
        for low, high in zip(curve, curve[1:]):
            for metric, units_low, units_high in (
                ('ser', low.bits, high.bits),
                ('per', low.trials, high.trials),
            ):
                before, after = getattr(low, metric), getattr(high, metric)
                if before is None or after is None:
                    continue
                tolerance = sigmas * float(np.hypot(
                    _standard_error(before, units_low), _standard_error(after, units_high)
                ))
                if after - before > tolerance:
                    violation = TrendViolation(metric, solution, L, low.ebn0, high.ebn0, after - before, tolerance)
                    logger.warning(
                        f"HARNESS: {metric} of {solution} L={L} rises from {before:.4g} at {low.ebn0} dB "
                        f"to {after:.4g} at {high.ebn0} dB (allowed {tolerance:.3g})"
                    )
                    violations.append(violation)
    return violations


def noise_density(ebn0_db: float, coded: bool, rate: float) -> float:
    """N0 for unit-energy BPSK; coded runs spend 1/rate energy per information bit."""
    eb = 1.0 / rate if coded else 1.0
    return eb / 10.0 ** (ebn0_db / 10.0)


def simulate_trial(
    config: ExperimentConfig,
    ctx: RunContext,
    point: int,
    ebn0: float,
    L: int,
    trial: int,
) -> TrialOutcome:
    """One packet of the configured solution. Module-level so worker processes can unpickle it."""
    rng = np.random.default_rng([config.seed, point, trial])
    cfg = ctx.pulse
    code = cached_code(*ctx.ldpc) if config.coded else None
    N0 = noise_density(ebn0, config.coded, code.rate if code else 1.0)
    ch = ChannelRealization.draw(rng, ChannelType(config.channel), N0, seed=config.seed, trial=trial, T=cfg.T)

    if code is not None:
        msg_A = rng.integers(0, 2, code.k)
        msg_B = rng.integers(0, 2, code.k)
        bits_A, bits_B = code.encode(msg_A), code.encode(msg_B)
    else:
        N = config.payload_length
        bits_A = rng.integers(0, 2, N)
        bits_B = rng.integers(0, 2, N)

    spec = PreambleSpec(Q=config.Q, G=config.G)
    frame_A = build_frame(spec, Node.A, bits_to_bpsk(bits_A), guard=ctx.guard)
    frame_B = build_frame(spec, Node.B, bits_to_bpsk(bits_B), guard=ctx.guard)
    r = uplink_superpose(frame_A, frame_B, ch, cfg, rng=rng)
    matched = front_end(r, FrontEnd.RRC, cfg)

    rate = config.estimator_rate
    if rate is None:
        t_hat_A, t_hat_B = ch.t_A, ch.t_B
    else:
        estimator = MisalignmentEstimator(spec, config.d, cfg, ctx.grid_step, ctx.refine_tol)
        if rate is Rate.BAUD:
            y = sample(matched, SampleKind.BAUD_RRC, cfg, N0)
        else:
            y = sample(front_end(r, FrontEnd.SINC2, cfg), SampleKind.DOUBLE_SINC2, cfg, N0)
        estimate = estimator.estimate(y, ch.h_A, ch.h_B, rate)
        t_hat_A, t_hat_B = estimate.t_hat_A, estimate.t_hat_B

    tau_hat = t_hat_A - t_hat_B
    if config.is_estimator_scenario:
        return TrialOutcome(sq_error=float((tau_hat - ch.tau) ** 2))

    y_d = sample(matched, SampleKind.DOUBLE_RRC, cfg, N0)
    y1, y2 = resample_boundaries(y_d, t_hat_A, t_hat_B, frame_A.data_start, frame_A.N, cfg)
    fallback = False
    if config.decoder_rate is Rate.DOUBLE:
        try:
            out = decode_double(y1, y2, tau_hat, ch.h_A, ch.h_B, L, y_d.sigma2, cfg, guard=ctx.guard)
        except CovarianceError as exc:
            logger.warning(f"HARNESS: trial {trial} falls back to the baud decoder ({exc})")
            out = decode_baud(y1, tau_hat, ch.h_A, ch.h_B, L, y_d.sigma2, cfg, guard=ctx.guard)
            fallback = True
    else:
        out = decode_baud(y1, tau_hat, ch.h_A, ch.h_B, L, y_d.sigma2, cfg, guard=ctx.guard)

    xor_bits = np.bitwise_xor(bits_A, bits_B)
    symbol_errors = int(np.count_nonzero(out.hard != xor_bits))
    if code is None:
        return TrialOutcome(
            symbol_errors=symbol_errors, symbols=len(xor_bits),
            bit_errors=symbol_errors, bits=len(xor_bits),
            packet_error=symbol_errors > 0, fallback=fallback,
        )

    result = code.bp_decode(xor_llr(out.u, ctx.llr_clamp), ctx.ldpc_max_iters)
    bit_errors = int(np.count_nonzero(result.bits != np.bitwise_xor(msg_A, msg_B)))
    return TrialOutcome(
        symbol_errors=symbol_errors, symbols=len(xor_bits),
        bit_errors=bit_errors, bits=code.k,
        packet_error=bit_errors > 0, fallback=fallback,
    )


def _histogram(sq_errors: np.ndarray, bins: int, upper: float) -> Tuple[Tuple[float, float, float], ...]:
    """Density of the squared error on [0, upper] with one overflow bin up to the largest error."""
    edges = np.linspace(0.0, upper, bins + 1)
    top = float(sq_errors.max()) if sq_errors.size else 0.0
    if top > upper:
        edges = np.append(edges, top)
    density, edges = np.histogram(sq_errors, bins=edges, density=True)
    return tuple((float(lo), float(hi), float(p)) for lo, hi, p in zip(edges[:-1], edges[1:], density))


class ExperimentHarness:
    """Runs an ExperimentConfig point by point and aggregates MetricsRecords."""

    def __init__(self, config: ExperimentConfig, ctx: Optional[RunContext] = None):
        from django.conf import settings

        harness = settings.SIMULATION_CONFIG['HARNESS']
        self.config = config
        self.ctx = ctx or RunContext.from_settings(config)
        self.pdf_bins = harness['PDF_BINS']
        self.pdf_range = harness['PDF_RANGE']
        self.good_threshold = harness['GOOD_ESTIMATE_THRESHOLD']
        self.trend_sigmas = harness['TREND_SIGMAS']

    def _errors(self, outcome: TrialOutcome) -> int:
        return int(outcome.packet_error) if self.config.coded else outcome.symbol_errors

    def _batches(self) -> Iterable[range]:
        size = self.config.batch_size
        for start in range(0, self.config.trials, size):
            yield range(start, min(start + size, self.config.trials))

    def run_point(self, point: int, ebn0: float, L: int, executor=None) -> MetricsRecord:
        config = self.config
        started = time.perf_counter()
        trial_fn = partial(simulate_trial, config, self.ctx, point, ebn0, L)
        outcomes: List[TrialOutcome] = []
        errors = 0

        for batch in self._batches():
            results = executor.map(trial_fn, batch) if executor else map(trial_fn, batch)
            for outcome in results:
                outcomes.append(outcome)
                errors += self._errors(outcome)
            if not config.is_estimator_scenario and errors >= config.max_errors:
                logger.info(f"HARNESS: error target {config.max_errors} reached after {len(outcomes)} trials")
                break

        record = self._aggregate(outcomes, ebn0, L)
        record = replace(record, wall_time=time.perf_counter() - started)
        fallbacks = sum(o.fallback for o in outcomes)
        if fallbacks:
            logger.warning(f"HARNESS: {fallbacks} trials used the baud fallback at Eb/N0={ebn0} dB")
        logger.info(
            f"HARNESS: {config.scenario}/{config.solution} L={L} Eb/N0={ebn0} dB "
            f"trials={record.trials} mse={record.mse_tau} ser={record.ser} per={record.per}"
        )
        return record

    def _aggregate(self, outcomes: List[TrialOutcome], ebn0: float, L: int) -> MetricsRecord:
        config = self.config
        mse = ser = per = good = None
        bits = 0
        histogram = None
        if config.is_estimator_scenario:
            sq = np.array([o.sq_error for o in outcomes], dtype=float)
            mse = float(sq.mean())
            good = float(np.mean(sq <= self.good_threshold))
            if config.scenario == 'estimator_pdf':
                histogram = _histogram(sq, self.pdf_bins, self.pdf_range)
        else:
            bits = sum(o.bits for o in outcomes)
            ser = sum(o.bit_errors for o in outcomes) / bits if bits else 0.0
            per = sum(o.packet_error for o in outcomes) / len(outcomes)

        return MetricsRecord(
            scenario=config.scenario,
            solution=config.solution,
            beta=config.beta,
            Q=config.Q,
            G=config.G,
            d=config.d,
            L=L,
            N=config.payload_length,
            ebn0=ebn0,
            mse_tau=mse,
            ser=ser,
            per=per,
            good_estimate_rate=good,
            trials=len(outcomes),
            seed=config.seed,
            histogram=histogram,
            bits=bits,
        )

    def run(self) -> List[MetricsRecord]:
        config = self.config
        logger.info(
            f"HARNESS: starting {config.scenario} solution={config.solution} beta={config.beta} "
            f"Q={config.Q} G={config.G} d={config.d} points={len(config.ebn0_list)} trials={config.trials}"
        )
        executor = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
        try:
            records = [
                self.run_point(point, ebn0, L, executor)
                for L in config.truncations
                for point, ebn0 in enumerate(config.ebn0_list)
            ]
        finally:
            if executor is not None:
                executor.shutdown()
        if not config.is_estimator_scenario:
            check_monotone(records, self.trend_sigmas)
        return records


def run_experiment(config: ExperimentConfig) -> List[MetricsRecord]:
    """Run every (L, Eb/N0) point of `config`; records come back in sweep order."""
    return ExperimentHarness(config).run()
