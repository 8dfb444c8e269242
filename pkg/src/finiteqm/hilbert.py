"""Finite-dimensional Dirac formalism: states, operators, and the truncation split.

Everything here is dense double-precision linear algebra over C^N.  The
types are thin immutable wrappers around numpy arrays; they exist to pin
down dimensions and Hermiticity intent at construction time rather than
at the point of failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, DomainError

# Relative tolerance for the hermitian_hint self-check.
_HERMITIAN_RTOL = 1e-12


def _as_complex_matrix(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("operator entries must form a square matrix, got shape %s" % (m.shape,))
    return m


@dataclass(frozen=True)
class StateVector:
    """Expansion coefficients of a ket over the first N basis vectors.

    Normalization is a flag, not an invariant: sliced-propagator
    intermediates are legitimately unnormalized.
    """

    coeffs: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size < 1:
            raise DomainError("state must have at least one coefficient")
        if not np.all(np.isfinite(c.view(float))):
            raise DomainError("state coefficients must be finite")
        object.__setattr__(self, "coeffs", c)
        if self.normalized:
            nrm = np.linalg.norm(c)
            if abs(nrm - 1.0) > 1e-12 * max(1.0, nrm):
                raise DomainError("state flagged normalized but has norm %.17g" % nrm)

    @property
    def dim(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense N x N matrix representation L_nm of an operator.

    ``hermitian_hint`` is verified at construction so downstream code can
    trust it without re-checking.
    """

    entries: np.ndarray
    hermitian_hint: bool = False

    def __post_init__(self):
        m = _as_complex_matrix(self.entries)
        if not np.all(np.isfinite(m.view(float))):
            raise DomainError("operator entries must be finite")
        object.__setattr__(self, "entries", m)
        if self.hermitian_hint:
            scale = np.max(np.abs(m)) if m.size else 0.0
            dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if dev > _HERMITIAN_RTOL * max(scale, 1.0):
                raise DomainError("hermitian_hint set but max |L - L^dag| = %.3g" % dev)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class TruncationSplit:
    """Block decomposition of a proxy operator around a head of dimension N.

    The proxy matrix of dimension N' > N splits as

        [ head              head-to-remainder ]
        [ remainder-to-head  tail             ]

    and the three norms quantify how much the truncation throws away.
    """

    head: OperatorMatrix
    coupling_norms: tuple[float, float]
    tail_norm: float
    proxy_dim: int

    def __post_init__(self):
        if self.proxy_dim <= self.head.dim:
            raise DomainError("proxy_dim must exceed head dimension")
        if min(self.coupling_norms) < 0 or self.tail_norm < 0:
            raise DomainError("block norms must be nonnegative")


def inner_product(u: StateVector, v: StateVector) -> complex:
    """<u|v> = sum_n conj(u_n) v_n; antilinear in the first argument."""
    if u.dim != v.dim:
        raise DimensionMismatchError("inner product needs equal dims, got %d and %d" % (u.dim, v.dim))
    return complex(np.vdot(u.coeffs, v.coeffs))


def apply(L: OperatorMatrix, v: StateVector) -> StateVector:
    """Matrix-vector action of L on v."""
    if L.dim != v.dim:
        raise DimensionMismatchError("operator dim %d vs state dim %d" % (L.dim, v.dim))
    return StateVector(L.entries @ v.coeffs)


def trace(L: OperatorMatrix) -> complex:
    return complex(np.trace(L.entries))


def commutator(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    """[A, B] = AB - BA."""
    if A.dim != B.dim:
        raise DimensionMismatchError("commutator needs equal dims, got %d and %d" % (A.dim, B.dim))
    a, b = A.entries, B.entries
    return OperatorMatrix(a @ b - b @ a)


def frobenius_norm(L: OperatorMatrix) -> float:
    return float(np.linalg.norm(L.entries))


def truncation_split(L_proxy: OperatorMatrix, N: int) -> TruncationSplit:
    """Split an N'-dimensional proxy operator into head, coupling, and tail blocks.

    The head is the leading N x N block; the coupling norms are the
    Frobenius norms of the N x (N'-N) and (N'-N) x N off-blocks.  Small
    coupling norms are the quantitative version of "the remainder can be
    neglected"; no threshold is imposed here.
    """
    Np = L_proxy.dim
    if not 0 < N < Np:
        raise DomainError("need 0 < N < proxy dim, got N=%d, proxy=%d" % (N, Np))
    m = L_proxy.entries
    head = m[:N, :N]
    upper = m[:N, N:]
    lower = m[N:, :N]
    tail = m[N:, N:]
    return TruncationSplit(
        head=OperatorMatrix(head),
        coupling_norms=(float(np.linalg.norm(upper)), float(np.linalg.norm(lower))),
        tail_norm=float(np.linalg.norm(tail)),
        proxy_dim=Np,
    )


def identity_operator(N: int) -> OperatorMatrix:
    return OperatorMatrix(np.eye(N, dtype=complex), hermitian_hint=True)


def basis_state(N: int, n: int) -> StateVector:
    """The n-th canonical basis ket e_n (zero-indexed) in dimension N."""
    if not 0 <= n < N:
        raise DomainError("basis index %d outside dimension %d" % (n, N))
    c = np.zeros(N, dtype=complex)
    c[n] = 1.0
    return StateVector(c, normalized=True)
