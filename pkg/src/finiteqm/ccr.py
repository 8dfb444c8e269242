"""The canonical commutation relation cannot hold in finite dimension.

Taking the trace of [P, Q] = -i*hbar*1 gives 0 on the left (cyclicity)
and -i*hbar*N on the right, so no N x N pair satisfies the relation.
More quantitatively, |Tr M| <= sqrt(N) * ||M||_F applied to
M = [P, Q] + i*hbar*1 yields the floor

    ||[P, Q] + i*hbar*1||_F >= hbar * sqrt(N)

for every pair of N x N matrices.  This module builds two concrete
(P, Q) realizations, reports where the deviation localizes, and carries
a gradient-descent minimizer that tries (and provably fails) to beat
the floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hilbert import OperatorMatrix, commutator, frobenius_norm, trace


@dataclass(frozen=True)
class CcrScheme:
    """Construction recipe for a concrete (P, Q) pair.

    kind "ladder" uses the truncated oscillator ladder matrices (omega
    sets the length scale); kind "grid" uses a position grid of
    half-width ``half_width`` with an antisymmetrized central-difference
    momentum.
    """

    kind: str
    dim: int
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    half_width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("ladder", "grid"):
            raise DomainError("unknown scheme kind %r" % (self.kind,))
        if self.dim < 1:
            raise DomainError("dim must be >= 1")
        for name in ("hbar", "mass", "omega", "half_width"):
            if getattr(self, name) <= 0:
                raise DomainError("%s must be positive" % name)


@dataclass(frozen=True)
class CcrReport:
    """Measured obstruction data for one (P, Q) pair."""

    commutator: OperatorMatrix
    trace: complex
    deviation: float
    lower_bound: float
    diagonal_residuals: np.ndarray


def build_ladder_pair(scheme: CcrScheme) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Truncated oscillator realization: Q, P from the N-dim ladder matrix.

    a has sqrt(1), ..., sqrt(N-1) on the superdiagonal, so [a, a+] is
    the identity except for the (N-1, N-1) entry, which is 1 - N.  The
    entire CCR deviation concentrates there.
    """
    if scheme.kind != "ladder":
        raise DomainError("scheme kind must be 'ladder'")
    N = scheme.dim
    a = np.zeros((N, N), dtype=complex)
    ns = np.arange(1, N, dtype=float)
    a[np.arange(N - 1), np.arange(1, N)] = np.sqrt(ns)
    lq = np.sqrt(scheme.hbar / (2.0 * scheme.mass * scheme.omega))
    lp = np.sqrt(scheme.mass * scheme.hbar * scheme.omega / 2.0)
    Q = lq * (a + a.conj().T)
    P = 1j * lp * (a.conj().T - a)
    return (OperatorMatrix(P, hermitian_hint=True), OperatorMatrix(Q, hermitian_hint=True))


def build_grid_pair(scheme: CcrScheme) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Position-grid realization: diagonal Q, central-difference P.

    The raw central-difference matrix has zero boundary rows (the state
    is taken to vanish beyond the grid); antisymmetrizing it keeps P
    Hermitian at the cost of halved coupling in the boundary rows.
    """
    if scheme.kind != "grid":
        raise DomainError("scheme kind must be 'grid'")
    N = scheme.dim
    if N < 3:
        raise DomainError("grid scheme needs dim >= 3 for central differences")
    x = np.linspace(-scheme.half_width, scheme.half_width, N)
    h = x[1] - x[0]
    Q = np.diag(x.astype(complex))
    D = np.zeros((N, N), dtype=complex)
    rows = np.arange(1, N - 1)
    D[rows, rows + 1] = 1.0 / (2.0 * h)
    D[rows, rows - 1] = -1.0 / (2.0 * h)
    P = -1j * scheme.hbar * (D - D.T) / 2.0
    return (OperatorMatrix(P, hermitian_hint=True), OperatorMatrix(Q, hermitian_hint=True))


def build_pair(scheme: CcrScheme) -> tuple[OperatorMatrix, OperatorMatrix]:
    if scheme.kind == "ladder":
        return build_ladder_pair(scheme)
    return build_grid_pair(scheme)


def ccr_lower_bound(N: int, hbar: float) -> float:
    """Floor on ||[P, Q] + i*hbar*1||_F over all N x N pairs: hbar*sqrt(N)."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if hbar <= 0:
        raise DomainError("hbar must be positive")
    return hbar * np.sqrt(N)


def ccr_report(P: OperatorMatrix, Q: OperatorMatrix, hbar: float) -> CcrReport:
    """Measure how far a pair falls short of the CCR.

    trace is Tr[P, Q] (vanishes by cyclicity), deviation is the
    Frobenius distance of [P, Q] from -i*hbar*1, and diagonal_residuals
    is the diagonal of [Q, P] / (i*hbar), which equals all ones exactly
    when the CCR holds.
    """
    C = commutator(P, Q)
    N = C.dim
    dev_matrix = C.entries + 1j * hbar * np.eye(N)
    residuals = np.diag(-C.entries) / (1j * hbar)
    return CcrReport(
        commutator=C,
        trace=trace(C),
        deviation=float(np.linalg.norm(dev_matrix)),
        lower_bound=ccr_lower_bound(N, hbar),
        diagonal_residuals=residuals,
    )


def minimize_deviation(P0: np.ndarray, Q0: np.ndarray, hbar: float,
                       steps: int = 200, lr: float = 1e-2) -> tuple[np.ndarray, np.ndarray, float]:
    """Gradient descent on f = ||[P, Q] + i*hbar*1||_F^2 over complex pairs.

    Backtracking line search: halve the step on any increase, grow it
    gently otherwise.  Returns the final pair and sqrt(f), which stays
    at or above hbar*sqrt(N) no matter the starting point; this is the
    adversarial half of the obstruction test.
    """
    P = np.array(P0, dtype=complex)
    Q = np.array(Q0, dtype=complex)
    N = P.shape[0]
    eye = np.eye(N)

    def f_of(Pm, Qm):
        M = Pm @ Qm - Qm @ Pm + 1j * hbar * eye
        return float(np.sum(np.abs(M) ** 2)), M

    f, M = f_of(P, Q)
    for _ in range(steps):
        # Wirtinger gradients of f with respect to conj(P), conj(Q).
        gP = M @ Q.conj().T - Q.conj().T @ M
        gQ = P.conj().T @ M - M @ P.conj().T
        while True:
            P_new = P - lr * gP
            Q_new = Q - lr * gQ
            f_new, M_new = f_of(P_new, Q_new)
            if f_new <= f or lr < 1e-14:
                break
            lr *= 0.5
        P, Q, f, M = P_new, Q_new, f_new, M_new
        lr *= 1.2
    return P, Q, float(np.sqrt(f))
