"""Emitter parameters, single-photon scattering amplitudes and probe-frequency choice.

Units: hbar = 1 and the guided linewidth of emitter 1 is the natural rate
scale, so energies, rates and frequencies are all dimensionless numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import EmptyCandidates, InvalidConfig

# Tolerance used to merge candidate frequencies that coincide.
DEDUP_TOL = 1e-12
# Expected-concurrence differences below this count as ties.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class Emitter:
    """A spin-conditional two-level emitter side-coupled to one interferometer arm.

    ``energy`` is the transition energy, ``gamma_guided`` the decay rate into
    the waveguide and ``gamma_loss`` the decay rate into non-guided modes.
    """

    energy: float
    gamma_guided: float = 1.0
    gamma_loss: float = 0.0

    def __post_init__(self):
        if not (self.gamma_guided > 0):
            raise InvalidConfig(f"gamma_guided must be > 0, got {self.gamma_guided}")
        if not (self.gamma_loss >= 0):
            raise InvalidConfig(f"gamma_loss must be >= 0, got {self.gamma_loss}")
        if not math.isfinite(self.energy):
            raise InvalidConfig(f"energy must be finite, got {self.energy}")

    @classmethod
    def from_beta(cls, energy: float, gamma_guided: float, beta: float) -> "Emitter":
        """Build an emitter whose loss rate gives the requested beta factor."""
        if not (0 < beta <= 1):
            raise InvalidConfig(f"beta must lie in (0, 1], got {beta}")
        return cls(energy, gamma_guided, gamma_guided * (1.0 - beta) / beta)

    @property
    def beta(self) -> float:
        return beta_factor(self)

    def lossless(self) -> "Emitter":
        return replace(self, gamma_loss=0.0)


@dataclass(frozen=True)
class EmitterPair:
    emitter1: Emitter
    emitter2: Emitter

    @classmethod
    def from_ratios(
        cls,
        delta_ratio: float,
        gamma_ratio: float,
        beta: float = 1.0,
        beta2: float | None = None,
    ) -> "EmitterPair":
        """Ratio form: E1 = 0, Gamma1 = 1, E2 = delta, Gamma2 = gamma_ratio."""
        if delta_ratio < 0:
            raise InvalidConfig(f"detuning ratio must be >= 0, got {delta_ratio}")
        beta2 = beta if beta2 is None else beta2
        return cls(
            Emitter.from_beta(0.0, 1.0, beta),
            Emitter.from_beta(float(delta_ratio), float(gamma_ratio), beta2),
        )

    @property
    def detuning(self) -> float:
        return abs(self.emitter2.energy - self.emitter1.energy)

    @property
    def is_lossless(self) -> bool:
        return self.emitter1.gamma_loss == 0 and self.emitter2.gamma_loss == 0

    def lossless(self) -> "EmitterPair":
        return EmitterPair(self.emitter1.lossless(), self.emitter2.lossless())

    def swapped(self) -> "EmitterPair":
        return EmitterPair(self.emitter2, self.emitter1)


class ScatterAmplitudes(NamedTuple):
    t: complex
    t_e: complex


def _denominator(emitter: Emitter, omega):
    return omega - emitter.energy + 0.5j * (emitter.gamma_guided + emitter.gamma_loss)


def transmission_amplitude(emitter: Emitter, omega):
    """Guided-mode transmission of a photon at ``omega`` past an up-spin emitter.

    Accepts a scalar or an array of frequencies.
    """
    num = omega - emitter.energy - 0.5j * (emitter.gamma_guided - emitter.gamma_loss)
    return num / _denominator(emitter, omega)


def loss_amplitude(emitter: Emitter, omega):
    """Amplitude for the photon to be scattered out of the guided mode."""
    return -1j * math.sqrt(emitter.gamma_guided * emitter.gamma_loss) / _denominator(emitter, omega)


def scatter_amplitudes(emitter: Emitter, omega: float) -> ScatterAmplitudes:
    return ScatterAmplitudes(
        complex(transmission_amplitude(emitter, omega)),
        complex(loss_amplitude(emitter, omega)),
    )


def beta_factor(emitter: Emitter) -> float:
    return emitter.gamma_guided / (emitter.gamma_guided + emitter.gamma_loss)


@dataclass(frozen=True)
class Candidate:
    omega: float
    source: str  # "quadratic-plus", "quadratic-minus", "linewidth-ratio" or "identical"
    residual: float


def squared_transmission_mismatch(pair: EmitterPair, omega):
    """|t1^2 - t2^2| evaluated with both loss rates set to zero."""
    lossless = pair.lossless()
    t1 = transmission_amplitude(lossless.emitter1, omega)
    t2 = transmission_amplitude(lossless.emitter2, omega)
    return np.abs(t1**2 - t2**2)


def candidate_frequencies(pair: EmitterPair) -> list[Candidate]:
    """All real probe frequencies at which the lossless squared transmissions agree.

    Order: quadratic-plus, quadratic-minus, linewidth-ratio. Loss rates are
    ignored; the caller may still probe a lossy pair at the returned points.
    """
    e1, g1 = pair.emitter1.energy, pair.emitter1.gamma_guided
    e2, g2 = pair.emitter2.energy, pair.emitter2.gamma_guided

    if e1 == e2 and g1 == g2:
        return [Candidate(e1, "identical", float(squared_transmission_mismatch(pair, e1)))]

    raw: list[tuple[float, str]] = []
    disc = (e1 - e2) ** 2 - g1 * g2
    if disc >= 0:
        root = math.sqrt(disc)
        raw.append((0.5 * (e1 + e2 + root), "quadratic-plus"))
        raw.append((0.5 * (e1 + e2 - root), "quadratic-minus"))
    if g1 != g2:
        raw.append(((e2 * g1 - e1 * g2) / (g1 - g2), "linewidth-ratio"))

    if not raw:
        raise EmptyCandidates(
            f"no real probe frequency: (E1-E2)^2 - G1*G2 = {disc:.6g} < 0 and G1 == G2"
        )

    out: list[Candidate] = []
    for omega, source in raw:
        if any(abs(omega - c.omega) <= DEDUP_TOL for c in out):
            continue
        out.append(Candidate(omega, source, float(squared_transmission_mismatch(pair, omega))))
    return out


def expected_one_round_concurrence(pair: EmitterPair, omega: float) -> float:
    """Outcome-weighted concurrence after one lossless |1,1> round from |++>."""
    from .channel import apply_outcome, initial_state, outcome_probabilities
    from .entanglement import concurrence
    from .optics import DetectorModel, detection_kernels

    channel = detection_kernels(1, 1, pair.lossless(), omega, DetectorModel.THRESHOLD)
    rho = initial_state()
    total = 0.0
    for label, p in outcome_probabilities(channel, rho).items():
        if p > 1e-15:
            total += p * concurrence(apply_outcome(channel, rho, label)).value
    return total


def select_candidate(pair: EmitterPair, candidates: list[Candidate] | None = None) -> Candidate:
    """Pick the candidate with the largest expected one-round concurrence.

    Ties go to the candidate closest to the mean transition energy, then to
    the earliest in ``candidates``.
    """
    if candidates is None:
        candidates = candidate_frequencies(pair)
    if not candidates:
        raise EmptyCandidates("candidate list is empty")
    if len(candidates) == 1:
        return candidates[0]

    centre = 0.5 * (pair.emitter1.energy + pair.emitter2.energy)
    scores = [expected_one_round_concurrence(pair, c.omega) for c in candidates]
    best = 0
    for i in range(1, len(candidates)):
        if scores[i] > scores[best] + TIE_TOL:
            best = i
        elif abs(scores[i] - scores[best]) <= TIE_TOL:
            if abs(candidates[i].omega - centre) < abs(candidates[best].omega - centre) - DEDUP_TOL:
                best = i
    return candidates[best]


def select_probe_frequency(pair: EmitterPair, candidates: list[Candidate] | None = None) -> float:
    return select_candidate(pair, candidates).omega
