"""Heralded measurement channel acting on the two-emitter density matrix.

States are plain 4x4 complex numpy arrays in the {uu, ud, du, dd} basis.
"""

from __future__ import annotations

import enum
from itertools import product

import numpy as np

from .errors import DegenerateState, NumericalFailure, ZeroProbabilityOutcome
from .optics import DetectorModel, Label, MeasurementChannel, detection_kernels
from .physics import EmitterPair, transmission_amplitude

__all__ = [
    "MeasurementChannel",
    "BitFlipPolicy",
    "initial_state",
    "outcome_probabilities",
    "apply_outcome",
    "bit_flip",
    "sanitize",
    "lossless_closed_form",
    "lossless_amplitudes",
    "lossless_prestate",
    "closed_form_channel",
]

PSD_TOL = 1e-10
# Eigenvalues in [-PSD_TOL, -CLAMP_TOL) are clamped by rebuilding rho from its
# eigendecomposition. Smaller negatives are roundoff on a PSD Hadamard product
# and are left alone: the rebuild costs ~1e-16 absolute error per entry, which
# would wipe out the relative accuracy of tiny entries.
CLAMP_TOL = 1e-13
MIN_PROBABILITY = 1e-15


class BitFlipPolicy(enum.Enum):
    NEVER = "never"
    ALWAYS = "always"
    LOSSY_ONLY = "lossy-only"

    def applies(self, pair: EmitterPair) -> bool:
        if self is BitFlipPolicy.ALWAYS:
            return True
        if self is BitFlipPolicy.NEVER:
            return False
        return not pair.is_lossless


def initial_state() -> np.ndarray:
    """|++><++|: every entry 1/4."""
    return np.full((4, 4), 0.25, dtype=complex)


def outcome_probabilities(channel: MeasurementChannel, rho: np.ndarray) -> dict[Label, float]:
    """P(o) = Tr(K_o o rho) for every outcome, in the channel's label order."""
    probs = channel.diagonals @ np.real(np.diagonal(rho))
    return {lab: float(p) for lab, p in zip(channel.labels, probs)}


def sanitize(rho: np.ndarray) -> np.ndarray:
    """Hermitize, clamp roundoff-negative eigenvalues and renormalize the trace."""
    rho = 0.5 * (rho + rho.conj().T)
    evals, evecs = np.linalg.eigh(rho)
    if evals[0] < -PSD_TOL:
        raise NumericalFailure(f"state has eigenvalue {evals[0]:.3g} below -{PSD_TOL}")
    if evals[0] < -CLAMP_TOL:
        evals = np.clip(evals, 0.0, None)
        rho = (evecs * evals) @ evecs.conj().T
        rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def apply_outcome(channel: MeasurementChannel, rho: np.ndarray, label: Label) -> np.ndarray:
    """Post-measurement state (K_o o rho) / Tr(K_o o rho)."""
    kernel = channel.kernel(label)
    new = kernel * rho
    p = float(np.trace(new).real)
    if p <= MIN_PROBABILITY:
        raise ZeroProbabilityOutcome(f"outcome {label} has probability {p:.3g}")
    return sanitize(new / p)


def bit_flip(rho: np.ndarray) -> np.ndarray:
    """(X x X) rho (X x X): flips both spins, i.e. reverses both matrix axes."""
    return np.ascontiguousarray(np.asarray(rho)[::-1, ::-1])


def lossless_amplitudes(t1sq: complex, t2sq: complex, m: int, n: int) -> np.ndarray:
    """Unnormalized emitter amplitudes after m coincidences and n same-detector events."""
    zero_n = 1.0 if n == 0 else 0.0
    return np.array(
        [
            (t1sq + t2sq) ** m * (t1sq - t2sq) ** n,
            (1 + t1sq) ** m * (t1sq - 1) ** n,
            (1 + t2sq) ** m * (1 - t2sq) ** n,
            2.0**m * zero_n,
        ],
        dtype=complex,
    )


def _squared_transmissions(pair: EmitterPair, omega: float) -> tuple[complex, complex]:
    if not pair.is_lossless:
        raise ValueError("closed form only holds for lossless emitters")
    t1 = complex(transmission_amplitude(pair.emitter1, omega))
    t2 = complex(transmission_amplitude(pair.emitter2, omega))
    return t1 * t1, t2 * t2


def lossless_closed_form(
    pair: EmitterPair,
    omega: float,
    m: int,
    n: int,
    next_outcome: str | None = None,
) -> np.ndarray:
    """Normalized pure emitter state after m coincidence and n same-detector events.

    With ``next_outcome`` set to "coincidence" or "same", the state is instead
    the one heralded by that outcome on the following round. Returns the
    amplitude vector; the density matrix is its outer product.
    """
    if m < 0 or n < 0:
        raise ValueError("event counts must be non-negative")
    if next_outcome == "coincidence":
        m += 1
    elif next_outcome == "same":
        n += 1
    elif next_outcome is not None:
        raise ValueError(f"unknown outcome kind {next_outcome!r}")
    t1sq, t2sq = _squared_transmissions(pair, omega)
    amps = lossless_amplitudes(t1sq, t2sq, m, n)
    norm = np.linalg.norm(amps)
    if norm == 0 or not np.isfinite(norm):
        raise DegenerateState(f"all amplitudes vanish for m={m}, n={n}")
    return amps / norm


def lossless_prestate(pair: EmitterPair, omega: float, m: int, n: int) -> dict[str, np.ndarray]:
    """Joint state before the (m+n+1)-th detection, split by optical component.

    Returns the emitter amplitude vectors multiplying (a^2 + b^2)|0> (key
    "same") and a b|0> (key "coincidence"), both divided by the
    normalization constant c_{m,n}.
    """
    t1sq, t2sq = _squared_transmissions(pair, omega)
    c = np.linalg.norm(lossless_amplitudes(t1sq, t2sq, m, n))
    if c == 0:
        raise DegenerateState(f"all amplitudes vanish for m={m}, n={n}")
    return {
        "same": lossless_amplitudes(t1sq, t2sq, m, n + 1) / (4 * c),
        "coincidence": lossless_amplitudes(t1sq, t2sq, m + 1, n) / (2 * c),
    }


def closed_form_channel(pair: EmitterPair, omega: float) -> MeasurementChannel:
    """Threshold channel for a |1,1> probe written directly from the lossless amplitudes.

    Independent of the polynomial engine; used as a cross-check.
    """
    t1sq, t2sq = _squared_transmissions(pair, omega)
    same = lossless_amplitudes(t1sq, t2sq, 0, 1) / 4
    coinc = lossless_amplitudes(t1sq, t2sq, 1, 0) / 2
    k_same = 2 * np.outer(same, same.conj())  # <0|a^2 a^dag^2|0> = 2
    k_coinc = np.outer(coinc, coinc.conj())
    kernels = np.array([k_coinc, k_same, k_same, np.zeros((4, 4), complex)])
    return MeasurementChannel((1, 1), DetectorModel.THRESHOLD, ((1, 1), (1, 0), (0, 1), (0, 0)), kernels)


def outcome_sequences(max_events: int, labels=((1, 1), (1, 0), (0, 1))):
    """Every ordered outcome sequence of length 0..max_events."""
    for length in range(max_events + 1):
        yield from product(labels, repeat=length)


def channel_for(pair: EmitterPair, omega: float, probe=(1, 1), detector=DetectorModel.THRESHOLD):
    return detection_kernels(probe[0], probe[1], pair, float(omega), detector)
