"""Particle in a hard-wall box, truncated to the first N levels.

The Hamiltonian is diagonal in the sine basis, so everything spectral
is exact: energies are n^2 pi^2 hbar^2 / (2 m a^2), evolution is a
phase rotation per level, and the state revives exactly at
T = 4 m a^2 / (pi hbar) because every phase 2 pi n^2 realigns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError
from .hilbert import OperatorMatrix

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class BoxSystem:
    """Physical parameters of the box and the basis cutoff."""

    mass: float
    width: float
    hbar: float
    cutoff: int

    def __post_init__(self):
        if min(self.mass, self.width, self.hbar) <= 0:
            raise DomainError("mass, width, and hbar must be positive")
        if self.cutoff < 1:
            raise DomainError("cutoff must be >= 1")


@dataclass(frozen=True)
class BoxState:
    """Level coefficients c_n, n = 1..N, over a BoxSystem basis."""

    system: BoxSystem
    coeffs: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != self.system.cutoff:
            raise DomainError("expected %d coefficients, got %d" % (self.system.cutoff, c.size))
        object.__setattr__(self, "coeffs", c)
        if self.normalized:
            s = float(np.sum(np.abs(c) ** 2))
            if abs(s - 1.0) > _NORM_TOL:
                raise DomainError("state flagged normalized but sum |c|^2 = %.17g" % s)


def energy(n: int, system: BoxSystem) -> float:
    """Level energy n^2 pi^2 hbar^2 / (2 m a^2) for n >= 1."""
    if n < 1:
        raise DomainError("level index must be >= 1, got %d" % n)
    return float(n * n * np.pi ** 2 * system.hbar ** 2 / (2.0 * system.mass * system.width ** 2))


def energy_trace_closed_form(system: BoxSystem) -> float:
    """Sum of the first N level energies via the sum-of-squares identity."""
    N = system.cutoff
    base = np.pi ** 2 * system.hbar ** 2 / (2.0 * system.mass * system.width ** 2)
    return float(base * N * (N + 1) * (2 * N + 1) / 6.0)


def hamiltonian_matrix(system: BoxSystem) -> OperatorMatrix:
    """Diagonal N x N Hamiltonian; off-diagonal elements are exactly zero."""
    diag = np.array([energy(n, system) for n in range(1, system.cutoff + 1)], dtype=complex)
    return OperatorMatrix(np.diag(diag), hermitian_hint=True)


def eval_wavefunction(state: BoxState, x):
    """Psi(x) = sqrt(2/a) sum_n c_n sin(n pi x / a) for x in [0, a].

    Accepts a scalar or an array of positions; vanishes identically at
    both walls.
    """
    a = state.system.width
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(xs > a):
        raise DomainError("position outside the box [0, %g]" % a)
    n = np.arange(1, state.system.cutoff + 1)
    xs1 = np.atleast_1d(xs)
    # modes: shape (len(x), N) so a single matvec evaluates all points
    modes = np.sin(np.multiply.outer(xs1, n) * (np.pi / a))
    # hard walls: sin(n pi) in floats is only ~1e-16, enforce the zero exactly
    modes[(xs1 == 0.0) | (xs1 == a), :] = 0.0
    psi = np.sqrt(2.0 / a) * (modes @ state.coeffs)
    if xs.ndim == 0:
        return complex(psi[0])
    return psi


def probabilities(state: BoxState) -> np.ndarray:
    """Level-occupation probabilities |c_n|^2 of a normalized state."""
    p = np.abs(state.coeffs) ** 2
    s = float(np.sum(p))
    if abs(s - 1.0) > _NORM_TOL:
        raise DomainError("probabilities need a normalized state; sum |c|^2 = %.17g" % s)
    return p


def spectral_evolve(state: BoxState, t: float) -> BoxState:
    """Evolve by time t: c_n -> exp(-i E_n t / hbar) c_n.  Unitary."""
    sys = state.system
    n = np.arange(1, sys.cutoff + 1, dtype=float)
    e = n * n * (np.pi ** 2 * sys.hbar ** 2 / (2.0 * sys.mass * sys.width ** 2))
    phases = np.exp(-1j * e * t / sys.hbar)
    return BoxState(sys, phases * state.coeffs, normalized=state.normalized)


def revival_time(system: BoxSystem) -> float:
    """T = 4 m a^2 / (pi hbar): every level phase is a multiple of 2 pi."""
    return float(4.0 * system.mass * system.width ** 2 / (np.pi * system.hbar))


def parseval_check(state: BoxState, quadrature_points: int) -> float:
    """|integral of |Psi|^2 over the box - sum |c_n|^2| by composite Simpson.

    The integrand is a trigonometric polynomial, so with at least 2N
    points the quadrature is exact up to rounding and the discrepancy
    sits at the noise floor.
    """
    N = state.system.cutoff
    if quadrature_points < 2 * N:
        raise DomainError("need at least 2N = %d quadrature points" % (2 * N))
    a = state.system.width
    x = np.linspace(0.0, a, quadrature_points)
    density = np.abs(eval_wavefunction(state, x)) ** 2
    integral = float(simpson(density, x=x))
    return abs(integral - float(np.sum(np.abs(state.coeffs) ** 2)))
