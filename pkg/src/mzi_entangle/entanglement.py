"""Two-qubit entanglement and state-quality measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotNormalized, NumericalFailure

# sigma_y (x) sigma_y in the {uu, ud, du, dd} basis
SIGMA_YY = np.fliplr(np.diag([-1.0, 1.0, 1.0, -1.0])).astype(complex)

# Eigenvalues of rho below this are treated as zero when building the
# factorization rho = W W^dagger. Keeping roundoff-sized eigenvalues would
# add terms of order sqrt(1e-16) = 1e-8 to the concurrence.
RANK_TOL = 1e-13
# Hermiticity / positivity violations larger than this make the input invalid.
VALIDITY_TOL = 1e-8
# Concurrences at or below this are reported as exactly zero (product states
# otherwise come out at ~1e-16).
ZERO_FLOOR = 1e-12


def clip_concurrence(value: float) -> float:
    return 0.0 if value <= ZERO_FLOOR else min(float(value), 1.0)


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    lambdas: tuple[float, float, float, float]

    def __float__(self):
        return self.value


def spin_flipped(rho: np.ndarray) -> np.ndarray:
    """(sigma_y x sigma_y) rho* (sigma_y x sigma_y)."""
    return SIGMA_YY @ np.conj(rho) @ SIGMA_YY


def _factor(rho: np.ndarray) -> np.ndarray:
    """Columns W with rho ~= W W^dagger, dropping numerically null directions."""
    herm = 0.5 * (rho + rho.conj().T)
    if np.max(np.abs(rho - herm)) > VALIDITY_TOL:
        raise NumericalFailure("density matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(herm)
    if evals[0] < -VALIDITY_TOL:
        raise NumericalFailure(f"density matrix has eigenvalue {evals[0]:.3g} < 0")
    keep = evals > RANK_TOL
    return evecs[:, keep] * np.sqrt(evals[keep])


def concurrence(rho: np.ndarray) -> ConcurrenceResult:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i (square roots of the eigenvalues of rho @ spin_flipped(rho)) are
    obtained as the singular values of the symmetric matrix W^T (Y x Y) W,
    where rho = W W^dagger. This avoids taking square roots of eigenvalues
    that are zero up to roundoff.
    """
    rho = np.asarray(rho, dtype=complex)
    w = _factor(rho)
    if w.shape[1] == 0:
        raise NumericalFailure("density matrix is zero")
    sv = np.linalg.svd(w.T @ SIGMA_YY @ w, compute_uv=False)
    lam = np.zeros(4)
    lam[: sv.size] = sv
    lam[::-1].sort()
    value = clip_concurrence(lam[0] - lam[1] - lam[2] - lam[3])
    return ConcurrenceResult(value, tuple(float(x) for x in lam))


def concurrence_pure(amplitudes) -> float:
    """2 |c_uu c_dd - c_ud c_du| for a normalized pure state."""
    c = np.asarray(amplitudes, dtype=complex)
    norm = float(np.vdot(c, c).real)
    if abs(norm - 1.0) > 1e-10:
        raise NotNormalized(f"state norm^2 is {norm}")
    return float(2.0 * abs(c[0] * c[3] - c[1] * c[2]))


def purity(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def fidelity_pure(rho: np.ndarray, psi) -> float:
    """<psi| rho |psi> for a normalized pure target."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(np.vdot(psi, rho @ psi)))


_S = 1 / np.sqrt(2)
BELL_STATES = {
    "phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi+": np.array([0, _S, _S, 0], dtype=complex),
    "psi-": np.array([0, _S, -_S, 0], dtype=complex),
}
