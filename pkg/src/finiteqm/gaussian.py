"""Norm of the 3N-dimensional Gaussian exp(-a Q^2 / 2 ... ) family.

The squared norm is f(a) = (pi/a)^{3N/2}: exactly 1 at a = pi for
every N, divergent to 0 or infinity otherwise as N grows.  Keeping f
within epsilon of 1 therefore pins a to pi with a tolerance that
shrinks like 1/N, which is the precision-cost statement this module
quantifies.

All powers are evaluated in log space; overflow and underflow are
surfaced as explicit flags instead of raw inf/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NodeCapError

# Largest tensor dimension the quadrature cap admits.
MAX_TENSOR_DIMS = 6

_LOG_OVERFLOW = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class GaussianNormValue:
    """f = (pi/a)^{3N/2} with its log and an overflow/underflow flag."""

    log_f: float
    f: float
    flag: str  # "ok", "overflow", or "underflow"


@dataclass(frozen=True)
class GaussianNormScan:
    """f(N) along a sequence of particle counts at fixed a."""

    a: float
    N_values: tuple
    values: tuple  # GaussianNormValue per N


@dataclass(frozen=True)
class TrichotomyResult:
    classification: str  # "diverges_to_0", "constant_1", "diverges_to_inf"
    scan: GaussianNormScan


@dataclass(frozen=True)
class PrecisionReport:
    """Largest relative detuning of a from pi that keeps |f - 1| <= epsilon.

    pi_digits_required is ceil(log10(pi / delta_max)), clamped to at
    least 1; log10_pi_over_delta keeps the unrounded value for scaling
    measurements that an integer ceiling would quantize away.
    """

    N: int
    epsilon: float
    delta_max: float
    pi_digits_required: int
    log10_pi_over_delta: float


def gaussian_norm_analytic(N: int, a: float) -> GaussianNormValue:
    """f = (pi/a)^{3N/2} via exp((3N/2)(ln pi - ln a)), flagged at the float limits."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if a <= 0:
        raise DomainError("a must be positive")
    log_f = (3.0 * N / 2.0) * (math.log(math.pi) - math.log(a))
    if log_f > _LOG_OVERFLOW:
        return GaussianNormValue(log_f=log_f, f=math.inf, flag="overflow")
    if log_f < -_LOG_OVERFLOW:
        return GaussianNormValue(log_f=log_f, f=0.0, flag="underflow")
    return GaussianNormValue(log_f=log_f, f=math.exp(log_f), flag="ok")


def gaussian_norm_quadrature(N: int, a: float, grid) -> float:
    """Trapezoid tensor-grid value of the 3N-dimensional Gaussian integral.

    The integrand exp(-a |Q|^2) separates, so the tensor sum over
    [-L, L]^{3N} contracts to a product of 3N identical one-dimensional
    sums; the product is still exactly the tensor-grid value.  grid
    needs L >= 6/sqrt(a) and M >= 256 for 1e-6-level agreement with the
    analytic result.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if a <= 0:
        raise DomainError("a must be positive")
    dims = 3 * N
    if dims > MAX_TENSOR_DIMS:
        raise NodeCapError("tensor quadrature capped at %d dimensions, got 3N = %d"
                           % (MAX_TENSOR_DIMS, dims))
    x = np.linspace(-grid.half_width, grid.half_width, grid.points_per_dim)
    w = np.full(x.size, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    one_dim = float(np.sum(w * np.exp(-a * x * x)))
    result = 1.0
    for _ in range(dims):
        result *= one_dim
    return result


def limit_trichotomy(a: float, N_max: int, input_precision: float = 0.0) -> TrichotomyResult:
    """Classify the N -> infinity behavior of f(N) = (pi/a)^{3N/2}.

    Whether a equals pi is undecidable from a float alone, so the
    caller declares the precision of a: the constant branch is reported
    only when |a - pi| <= input_precision.  The scan over N = 1..N_max
    is returned as evidence; it is strictly monotone off the constant
    branch.
    """
    if a <= 0:
        raise DomainError("a must be positive")
    if N_max < 1:
        raise DomainError("N_max must be >= 1")
    if input_precision < 0:
        raise DomainError("input_precision must be nonnegative")
    ns = tuple(range(1, N_max + 1))
    if abs(a - math.pi) <= input_precision:
        values = tuple(GaussianNormValue(log_f=0.0, f=1.0, flag="ok") for _ in ns)
        return TrichotomyResult("constant_1", GaussianNormScan(a, ns, values))
    values = tuple(gaussian_norm_analytic(n, a) for n in ns)
    scan = GaussianNormScan(a, ns, values)
    if a > math.pi:
        return TrichotomyResult("diverges_to_0", scan)
    return TrichotomyResult("diverges_to_inf", scan)


def precision_requirement(N: int, epsilon: float) -> PrecisionReport:
    """Largest delta with |(1 + delta)^{-3N/2} - 1| <= epsilon, by bisection.

    The deviation grows monotonically with delta > 0 and approaches 1,
    so for epsilon < 1 the admissible set is an interval [0, delta_max];
    bracket by doubling, then bisect to relative width 1e-14.  For small
    epsilon, delta_max is about 2 epsilon / (3N).
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    power = -1.5 * N

    def deviation(delta: float) -> float:
        return abs(math.expm1(power * math.log1p(delta)))

    lo = 0.0
    hi = max(epsilon / N, 1e-12)
    while deviation(hi) <= epsilon:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if deviation(mid) <= epsilon:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    delta_max = lo
    log10_ratio = math.log10(math.pi / delta_max)
    digits = max(1, math.ceil(log10_ratio))
    return PrecisionReport(N=N, epsilon=epsilon, delta_max=delta_max,
                           pi_digits_required=digits, log10_pi_over_delta=log10_ratio)
