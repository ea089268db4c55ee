"""Exact few-photon evolution through the interferometer, one polynomial per spin branch.

A state is a polynomial in the creation operators of four modes: the two
guided arms ``a``, ``b`` and one loss reservoir per emitter. Each monomial
carries a length-4 coefficient vector indexed by the spin branch
(UU, UD, DU, DD). Norms use the bosonic weight ``j! k! l1! l2!``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ZeroPhotons
from .physics import EmitterPair, scatter_amplitudes

PRUNE_TOL = 1e-15

Monomial = tuple[int, int, int, int]
Label = tuple[int, int]


class SpinBranch(enum.IntEnum):
    UU = 0
    UD = 1
    DU = 2
    DD = 3


# Branches in which emitter 1 (arm a) / emitter 2 (arm b) is in the optically active state.
EMITTER1_UP = np.array([True, True, False, False])
EMITTER2_UP = np.array([True, False, True, False])


class DetectorModel(enum.Enum):
    THRESHOLD = "threshold"
    NUMBER_RESOLVING = "number"


def monomial_weight(mono: Monomial) -> int:
    j, k, l1, l2 = mono
    return math.factorial(j) * math.factorial(k) * math.factorial(l1) * math.factorial(l2)


class BranchPolynomial:
    """Sparse map from mode monomials to per-branch complex coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Monomial, np.ndarray]):
        self.terms = terms

    def __iter__(self) -> Iterator[tuple[Monomial, np.ndarray]]:
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def coefficient(self, mono: Monomial, branch: SpinBranch | None = None):
        vec = self.terms.get(tuple(mono), np.zeros(4, complex))
        return vec if branch is None else complex(vec[branch])

    def branch_norms(self) -> np.ndarray:
        """Squared norm of the optical state in each spin branch."""
        out = np.zeros(4)
        for mono, vec in self.terms.items():
            out += monomial_weight(mono) * np.abs(vec) ** 2
        return out

    def photon_numbers(self) -> set[int]:
        return {sum(m) for m in self.terms}

    def pruned(self, tol: float = PRUNE_TOL) -> "BranchPolynomial":
        terms = {}
        for mono, vec in self.terms.items():
            vec = np.where(np.abs(vec) < tol, 0.0, vec)
            if np.any(vec != 0):
                terms[mono] = vec
        return BranchPolynomial(terms)


def _accumulate(terms: dict, mono: Monomial, vec: np.ndarray):
    if mono in terms:
        terms[mono] = terms[mono] + vec
    else:
        terms[mono] = vec


def probe_input(n_a: int, n_b: int) -> BranchPolynomial:
    """Normalized Fock input |n_a, n_b> in the guided modes, identical in every branch."""
    if n_a < 0 or n_b < 0:
        raise ValueError("photon numbers must be non-negative")
    if n_a + n_b == 0:
        raise ZeroPhotons("probe must contain at least one photon")
    coef = 1.0 / math.sqrt(math.factorial(n_a) * math.factorial(n_b))
    return BranchPolynomial({(n_a, n_b, 0, 0): np.full(4, coef, dtype=complex)})


def apply_beamsplitter(state: BranchPolynomial) -> BranchPolynomial:
    """50:50 beamsplitter, a -> (a + b)/sqrt2, b -> (a - b)/sqrt2, reservoirs untouched."""
    terms: dict[Monomial, np.ndarray] = {}
    for (j, k, l1, l2), vec in state:
        scale = 2.0 ** (-(j + k) / 2)
        for p in range(j + 1):
            cp = math.comb(j, p)
            for q in range(k + 1):
                c = cp * math.comb(k, q) * (-1) ** (k - q) * scale
                _accumulate(terms, (p + q, j - p + k - q, l1, l2), c * vec)
    return BranchPolynomial(terms).pruned()


def apply_conditional_scatter(state: BranchPolynomial, pair: EmitterPair, omega: float) -> BranchPolynomial:
    """Scatter each guided photon off its arm's emitter, only in branches where that emitter is up.

    In an up branch a -> t1 a + t_e1 r1 (and likewise b with emitter 2); down
    branches pass the photon unchanged.
    """
    t1, te1 = scatter_amplitudes(pair.emitter1, omega)
    t2, te2 = scatter_amplitudes(pair.emitter2, omega)

    terms: dict[Monomial, np.ndarray] = {}
    for (j, k, l1, l2), vec in state:
        # per-branch factors for keeping p of the j photons in arm a, the rest lost to r1
        a_parts = _split_factors(j, t1, te1, EMITTER1_UP)
        b_parts = _split_factors(k, t2, te2, EMITTER2_UP)
        for p, fa in a_parts:
            for q, fb in b_parts:
                _accumulate(terms, (p, q, l1 + j - p, l2 + k - q), vec * fa * fb)
    return BranchPolynomial(terms).pruned()


def _split_factors(n: int, t: complex, te: complex, up: np.ndarray) -> list[tuple[int, np.ndarray]]:
    parts = []
    for p in range(n + 1):
        amp = math.comb(n, p) * t**p * te ** (n - p)
        if p == n:
            factor = np.where(up, amp, 1.0 + 0j)
        else:
            if amp == 0:
                continue
            factor = np.where(up, amp, 0.0 + 0j)
        parts.append((p, factor))
    return parts


def evolve(n_a: int, n_b: int, pair: EmitterPair, omega: float) -> BranchPolynomial:
    """Full interferometer pass: beamsplitter, conditional scatter, beamsplitter."""
    state = probe_input(n_a, n_b)
    state = apply_beamsplitter(state)
    state = apply_conditional_scatter(state, pair, omega)
    return apply_beamsplitter(state)


def threshold_label(j: int, k: int) -> Label:
    return (int(j > 0), int(k > 0))


THRESHOLD_LABELS: tuple[Label, ...] = ((1, 1), (1, 0), (0, 1), (0, 0))


def number_resolving_labels(total: int) -> tuple[Label, ...]:
    """All (j, k) with j + k <= total; larger totals first, then larger j first."""
    labels = [(j, s - j) for s in range(total + 1) for j in range(s + 1)]
    return tuple(sorted(labels, key=lambda jk: (-(jk[0] + jk[1]), -jk[0])))


def format_label(label: Label) -> str:
    return f"({label[0]},{label[1]})"


@dataclass(frozen=True, eq=False)
class MeasurementChannel:
    """Heralding outcomes of one probe round and their 4x4 Hadamard kernels.

    ``kernels[i]`` acts on the emitter density matrix by element-wise
    multiplication; ``labels`` fixes the outcome order used for sampling.
    """

    probe: tuple[int, int]
    detector: DetectorModel
    labels: tuple[Label, ...]
    kernels: np.ndarray  # shape (n_outcomes, 4, 4)

    def __post_init__(self):
        self.kernels.setflags(write=False)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})
        diag = np.ascontiguousarray(np.real(np.diagonal(self.kernels, axis1=1, axis2=2)))
        diag.setflags(write=False)
        object.__setattr__(self, "diagonals", diag)

    def index(self, label: Label) -> int:
        return self._index[tuple(label)]

    def kernel(self, label: Label) -> np.ndarray:
        return self.kernels[self.index(label)]

    def __iter__(self):
        return iter(zip(self.labels, self.kernels))


def kernels_from_polynomial(state: BranchPolynomial, detector: DetectorModel, total: int):
    """Trace out the reservoirs and group guided-mode counts into detector outcomes."""
    labels = THRESHOLD_LABELS if detector is DetectorModel.THRESHOLD else number_resolving_labels(total)
    index = {lab: i for i, lab in enumerate(labels)}
    kernels = np.zeros((len(labels), 4, 4), dtype=complex)
    for mono, vec in state:
        j, k = mono[0], mono[1]
        lab = threshold_label(j, k) if detector is DetectorModel.THRESHOLD else (j, k)
        kernels[index[lab]] += monomial_weight(mono) * np.outer(vec, vec.conj())
    return labels, kernels


@functools.lru_cache(maxsize=256)
def detection_kernels(
    n_a: int,
    n_b: int,
    pair: EmitterPair,
    omega: float,
    detector: DetectorModel = DetectorModel.THRESHOLD,
) -> MeasurementChannel:
    """Measurement channel for probe |n_a, n_b> on ``pair`` at frequency ``omega``.

    Results are cached; the returned kernels are read-only.
    """
    state = evolve(n_a, n_b, pair, float(omega))
    labels, kernels = kernels_from_polynomial(state, detector, n_a + n_b)
    return MeasurementChannel((n_a, n_b), detector, labels, kernels)


def branch_overlaps(state: BranchPolynomial) -> np.ndarray:
    """Gram matrix G[s, s'] = <phi_s'|phi_s> of the per-branch optical states."""
    g = np.zeros((4, 4), dtype=complex)
    for mono, vec in state:
        g += monomial_weight(mono) * np.outer(vec, vec.conj())
    return g
