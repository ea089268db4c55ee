"""Seeded Monte Carlo trajectories of repeated probing, and ensemble statistics."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import CLAMP_TOL, MIN_PROBABILITY, PSD_TOL, BitFlipPolicy, initial_state
from .entanglement import RANK_TOL, SIGMA_YY, clip_concurrence
from .errors import EmptyCandidates, InvalidConfig, NumericalFailure
from .optics import DetectorModel, Label, MeasurementChannel, detection_kernels
from .physics import EmitterPair, select_candidate

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
RNG_NAME = "numpy.random.PCG64"
SEED_SPLIT_NAME = "splitmix64(base_seed + (index + 1) * 0x9E3779B97F4A7C15)"

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)
EARLY_WINDOW = 10
EARLY_LEVEL = 0.99


def splitmix64(x: int) -> int:
    x = (x + GOLDEN_GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def split_seed(base_seed: int, index: int) -> int:
    """Seed of trajectory ``index`` in an ensemble started from ``base_seed``."""
    return splitmix64((base_seed + index * GOLDEN_GAMMA) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


@dataclass(frozen=True)
class SimulationConfig:
    pair: EmitterPair
    probe_mix: tuple[tuple[tuple[int, int], float], ...] = (((1, 1), 1.0),)
    detector: DetectorModel = DetectorModel.THRESHOLD
    frequency: float | str = "auto"
    bit_flip: BitFlipPolicy = BitFlipPolicy.LOSSY_ONLY
    max_events: int = 200
    stop_threshold: float | None = 0.999

    def __post_init__(self):
        mix = tuple((tuple(int(x) for x in probe), float(p)) for probe, p in self.probe_mix)
        object.__setattr__(self, "probe_mix", mix)
        if not mix:
            raise InvalidConfig("probe mix is empty")
        for (na, nb), p in mix:
            if na < 0 or nb < 0 or na + nb == 0:
                raise InvalidConfig(f"invalid probe ({na},{nb})")
            if not (0.0 <= p <= 1.0):
                raise InvalidConfig(f"probe probability {p} outside [0, 1]")
        if abs(sum(p for _, p in mix) - 1.0) > 1e-12:
            raise InvalidConfig("probe mix probabilities must sum to 1")
        if self.max_events < 1:
            raise InvalidConfig("max_events must be >= 1")
        if isinstance(self.frequency, str) and self.frequency != "auto":
            raise InvalidConfig(f"frequency must be a number or 'auto', got {self.frequency!r}")
        if self.stop_threshold is not None and not (0.0 < self.stop_threshold <= 1.0):
            raise InvalidConfig("stop_threshold must lie in (0, 1]")

    @classmethod
    def from_ratios(cls, delta_ratio: float, gamma_ratio: float, beta: float = 1.0, beta2=None, **kw):
        return cls(pair=EmitterPair.from_ratios(delta_ratio, gamma_ratio, beta, beta2), **kw)

    def resolve_frequency(self) -> tuple[float, str]:
        """(omega, source) where source names the candidate branch or 'explicit'."""
        if self.frequency == "auto":
            cand = select_candidate(self.pair)
            return cand.omega, cand.source
        return float(self.frequency), "explicit"

    def channels(self, omega: float) -> list[MeasurementChannel]:
        return [detection_kernels(na, nb, self.pair, omega, self.detector) for (na, nb), _ in self.probe_mix]


@dataclass(frozen=True)
class Event:
    index: int
    outcome: Label
    probability: float
    concurrence: float
    purity: float
    probe: tuple[int, int] = (1, 1)


@dataclass(frozen=True)
class TrajectoryRecord:
    seed: int
    omega: float
    events: tuple[Event, ...]
    terminal_reason: str  # "threshold_reached" or "max_events"

    @property
    def concurrences(self) -> np.ndarray:
        return np.array([e.concurrence for e in self.events])

    def events_to(self, level: float) -> int | None:
        """1-based index of the first event with concurrence >= level."""
        for e in self.events:
            if e.concurrence >= level:
                return e.index
        return None


def _concurrence_from_eig(evals: np.ndarray, evecs: np.ndarray) -> float:
    keep = evals > RANK_TOL
    w = evecs[:, keep] * np.sqrt(evals[keep])
    sv = np.linalg.svd(w.T @ SIGMA_YY @ w, compute_uv=False)
    value = sv[0] - sv[1:].sum() if sv.size else 0.0
    return clip_concurrence(value)


def _update(kernel: np.ndarray, rho: np.ndarray):
    """Hadamard update plus hygiene; returns (rho', concurrence, purity) with one eigh."""
    new = kernel * rho
    new = new / np.trace(new).real
    new = 0.5 * (new + new.conj().T)
    evals, evecs = np.linalg.eigh(new)
    if evals[0] < -PSD_TOL:
        raise NumericalFailure(f"state has eigenvalue {evals[0]:.3g} below -{PSD_TOL}")
    if evals[0] < -CLAMP_TOL:
        evals = np.clip(evals, 0.0, None)
        evals = evals / evals.sum()
        new = (evecs * evals) @ evecs.conj().T
        new = 0.5 * (new + new.conj().T)
    conc = _concurrence_from_eig(evals, evecs)
    pur = float(np.sum(evals**2))
    return new, conc, pur


def sample_index(weights: np.ndarray, u: float) -> int:
    """Inverse-CDF draw: first index whose cumulative weight exceeds ``u * total``.

    Zero-weight entries are never selected.
    """
    cdf = np.cumsum(weights)
    return min(int(np.searchsorted(cdf, u * cdf[-1], side="right")), len(cdf) - 1)


def _simulate(config: SimulationConfig, seed: int, omega: float, channels: Sequence[MeasurementChannel]) -> TrajectoryRecord:
    rng = make_rng(seed)
    probe_weights = np.array([p for _, p in config.probe_mix])
    probes = [probe for probe, _ in config.probe_mix]
    flip = config.bit_flip.applies(config.pair)
    rho = initial_state()
    events = []
    reason = "max_events"
    for idx in range(1, config.max_events + 1):
        ci = 0 if len(channels) == 1 else sample_index(probe_weights, rng.random())
        ch = channels[ci]
        probs = ch.diagonals @ rho.diagonal().real
        oi = sample_index(probs, rng.random())
        p = float(probs[oi])
        if p <= MIN_PROBABILITY:
            raise NumericalFailure(f"sampled outcome with probability {p:.3g}")
        rho, conc, pur = _update(ch.kernels[oi], rho)
        if flip:
            rho = np.ascontiguousarray(rho[::-1, ::-1])
        events.append(Event(idx, ch.labels[oi], p, conc, pur, probes[ci]))
        if config.stop_threshold is not None and conc >= config.stop_threshold:
            reason = "threshold_reached"
            break
    return TrajectoryRecord(seed, omega, tuple(events), reason)


def run_trajectory(config: SimulationConfig, seed: int) -> TrajectoryRecord:
    """One trajectory, fully determined by (config, seed)."""
    omega, _ = config.resolve_frequency()
    return _simulate(config, seed, omega, config.channels(omega))


@dataclass(frozen=True)
class EnsembleSummary:
    count: int
    omega: float
    frequency_source: str
    quantile_levels: tuple[float, ...]
    quantiles: np.ndarray  # (n_events, n_levels); finished trajectories hold their last value
    median_events_to_threshold: float  # inf when fewer than half reach the threshold
    frac_above_099_in_10: float
    frac_reached: float
    records: tuple[TrajectoryRecord, ...] = field(default=(), repr=False)


def _run_chunk(args):
    config, base_seed, indices, omega = args
    channels = config.channels(omega)
    return [_simulate(config, split_seed(base_seed, i), omega, channels) for i in indices]


def summarize(records: Sequence[TrajectoryRecord], config: SimulationConfig, omega: float, source: str,
              keep_records: bool = False) -> EnsembleSummary:
    n = len(records)
    length = max(len(r.events) for r in records)
    grid = np.empty((n, length))
    for i, r in enumerate(records):
        c = r.concurrences
        grid[i, : c.size] = c
        grid[i, c.size:] = c[-1]
    quantiles = np.quantile(grid, QUANTILE_LEVELS, axis=0).T

    threshold = config.stop_threshold
    if threshold is None:
        steps = np.full(n, np.inf)
        reached = np.zeros(n, bool)
    else:
        steps = np.array([r.events_to(threshold) or np.inf for r in records], dtype=float)
        reached = np.isfinite(steps)
    early = np.array([bool(np.any(r.concurrences[:EARLY_WINDOW] > EARLY_LEVEL)) for r in records])
    return EnsembleSummary(
        count=n,
        omega=omega,
        frequency_source=source,
        quantile_levels=QUANTILE_LEVELS,
        quantiles=quantiles,
        median_events_to_threshold=float(np.median(steps)),
        frac_above_099_in_10=float(early.mean()),
        frac_reached=float(reached.mean()),
        records=tuple(records) if keep_records else (),
    )


def run_ensemble(config: SimulationConfig, base_seed: int, count: int, workers: int = 1,
                 keep_records: bool = False) -> EnsembleSummary:
    """``count`` independent trajectories seeded by ``split_seed(base_seed, i)``.

    The summary does not depend on ``workers``: chunks are merged in index order.
    """
    if count < 1:
        raise InvalidConfig("count must be >= 1")
    omega, source = config.resolve_frequency()
    if workers <= 1:
        records = _run_chunk((config, base_seed, range(count), omega))
    else:
        bounds = np.linspace(0, count, workers + 1).astype(int)
        jobs = [(config, base_seed, range(a, b), omega) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for chunk in pool.map(_run_chunk, jobs) for r in chunk]
    return summarize(records, config, omega, source, keep_records)


@dataclass(frozen=True)
class SweepCell:
    delta_ratio: float
    gamma_ratio: float
    beta: float
    summary: EnsembleSummary | None
    failure: str | None = None

    @property
    def omega(self) -> float:
        return self.summary.omega if self.summary else math.nan


def parameter_sweep(
    delta_ratios: Sequence[float],
    gamma_ratios: Sequence[float],
    betas: Sequence[float],
    template: SimulationConfig,
    base_seed: int,
    count: int,
    workers: int = 1,
) -> list[SweepCell]:
    """Ensemble per grid point; a point with no valid frequency is reported, not raised."""
    if not (delta_ratios and gamma_ratios and betas):
        raise InvalidConfig("sweep grid is empty")
    cells = []
    for d in delta_ratios:
        for g in gamma_ratios:
            for b in betas:
                cfg = replace(template, pair=EmitterPair.from_ratios(d, g, b))
                try:
                    summary = run_ensemble(cfg, base_seed, count, workers)
                except EmptyCandidates:
                    cells.append(SweepCell(d, g, b, None, "NO_FREQ"))
                    continue
                cells.append(SweepCell(d, g, b, summary))
    return cells
