"""Time-sliced propagator amplitudes for small systems.

The evolution period splits into K slices; the amplitude is the
(K-1)-fold integral of exp(iS/hbar) (real time) or exp(-S_E/hbar)
(imaginary time) against the prefactor (mK / (2 pi hbar t))^{DK/2},
with phase e^{-i pi/4} per half-power in real time.

Every supported potential separates per coordinate, so the D-dimensional
tensor-grid integral factorizes into D one-dimensional ones, and each of
those is contracted slice by slice (a transfer-matrix pass over the
grid).  This evaluates exactly the tensor-grid sum the definition
prescribes while keeping the cost at K * M^2 per dimension.

Real-time integrands oscillate and a literal Riemann sum over a finite
grid aliases badly, so real time is restricted to quadratic actions
(free and harmonic), where the sliced integral over R^{K-1} has a
closed Fresnel form: eigendecompose the tridiagonal quadratic form,
pick up e^{i pi/4} per signature unit, and evaluate the stationary
value.  This is the sliced amplitude itself, exactly, for any K.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import CausticError, DimensionMismatchError, DomainError, NodeCapError, NumericalError

REAL_TIME = "real_time"
IMAGINARY_TIME = "imaginary_time"

# Conceptual tensor-grid nodes per intermediate slice; above this the
# caller must switch to Monte Carlo sampling.
SLICE_NODE_CAP = 10 ** 8


@dataclass(frozen=True)
class Configuration:
    """A point Q in D-dimensional configuration space (D = 3N)."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if c.ndim != 1 or c.size < 1:
            raise DomainError("configuration must be a flat coordinate tuple")
        if not np.all(np.isfinite(c)):
            raise DomainError("configuration coordinates must be finite")
        object.__setattr__(self, "coords", c)

    @property
    def D(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class PotentialSpec:
    """Symbolic potential: free, harmonic(omega), box(width), or polynomial(coefficients).

    harmonic: V(Q) = (1/2) m omega^2 |Q|^2.
    box: 0 inside [0, width] per coordinate, +inf outside (hard walls).
    polynomial: V(Q) = sum over coordinates q of sum_j coefficients[j] * q^j.
    """

    kind: str
    omega: float = 0.0
    width: float = 0.0
    coefficients: tuple = ()

    def __post_init__(self):
        if self.kind not in ("free", "harmonic", "box", "polynomial"):
            raise DomainError("unknown potential kind %r" % (self.kind,))
        if self.kind == "harmonic" and self.omega <= 0:
            raise DomainError("harmonic potential needs omega > 0")
        if self.kind == "box" and self.width <= 0:
            raise DomainError("box potential needs width > 0")
        if self.kind == "polynomial":
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def per_coordinate(self, y: np.ndarray, mass: float) -> np.ndarray:
        """V restricted to a single coordinate; the full V is the sum over coordinates."""
        y = np.asarray(y, dtype=float)
        if self.kind == "free":
            return np.zeros_like(y)
        if self.kind == "harmonic":
            return 0.5 * mass * self.omega ** 2 * y ** 2
        if self.kind == "box":
            v = np.zeros_like(y)
            v[(y < 0.0) | (y > self.width)] = np.inf
            return v
        out = np.zeros_like(y)
        for j, c in enumerate(self.coefficients):
            out += c * y ** j
        return out

    def evaluate(self, q: Configuration, mass: float) -> float:
        return float(np.sum(self.per_coordinate(q.coords, mass)))


@dataclass(frozen=True)
class Grid:
    """Per-dimension quadrature grid: M uniform points on [-L, L]."""

    half_width: float
    points_per_dim: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise DomainError("grid half-width must be positive")
        if self.points_per_dim < 2:
            raise DomainError("grid needs at least 2 points per dimension")


@dataclass(frozen=True)
class PropagatorRequest:
    """Endpoints, slicing, and quadrature controls for one amplitude."""

    q_start: Configuration
    q_end: Configuration
    mass: float
    hbar: float
    duration: float
    slices: int
    mode: str
    grid: Grid
    mc_samples: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.q_start.D != self.q_end.D:
            raise DimensionMismatchError("endpoint dimensions differ: %d vs %d"
                                         % (self.q_start.D, self.q_end.D))
        if min(self.mass, self.hbar, self.duration) <= 0:
            raise DomainError("mass, hbar, and duration must be positive")
        if self.slices < 1:
            raise DomainError("slice count must be >= 1")
        if self.mode not in (REAL_TIME, IMAGINARY_TIME):
            raise DomainError("mode must be %r or %r" % (REAL_TIME, IMAGINARY_TIME))
        if self.mc_samples < 0:
            raise DomainError("mc_samples must be nonnegative")


@dataclass(frozen=True)
class PropagatorResult:
    amplitude: complex
    K: int
    quadrature_points: int
    estimated_error: float


def default_half_width(req_endpoints_max: float, mass: float, hbar: float, duration: float) -> float:
    """Grid half-width covering the kernel spread: |endpoints| + 6 sqrt(hbar t / m)."""
    return float(req_endpoints_max + 6.0 * np.sqrt(hbar * duration / mass))


def action(path, mass: float, duration: float, V: PotentialSpec, mode: str = REAL_TIME) -> float:
    """Discrete action of a sliced path Q_0 .. Q_K.

    Kinetic term (m/2)(K/t) sum ||Q_k - Q_{k-1}||^2; potential term is
    the trapezoid sum (t/K)(V_0/2 + V_1 + ... + V_{K-1} + V_K/2), whose
    weights add up to exactly t.  Real time subtracts the potential,
    imaginary time (Euclidean action) adds it.
    """
    if len(path) < 2:
        raise DomainError("path needs at least two configurations")
    if duration <= 0 or mass <= 0:
        raise DomainError("mass and duration must be positive")
    D = path[0].D
    coords = []
    for q in path:
        if q.D != D:
            raise DimensionMismatchError("path mixes configuration dimensions")
        coords.append(q.coords)
    pts = np.stack(coords)
    K = len(path) - 1
    kinetic = 0.5 * mass * (K / duration) * float(np.sum((pts[1:] - pts[:-1]) ** 2))
    v = np.array([V.evaluate(q, mass) for q in path])
    w = np.ones(K + 1)
    w[0] = w[-1] = 0.5
    potential = (duration / K) * float(np.sum(w * v))
    if mode == REAL_TIME:
        return kinetic - potential
    if mode == IMAGINARY_TIME:
        return kinetic + potential
    raise DomainError("mode must be %r or %r" % (REAL_TIME, IMAGINARY_TIME))


def analytic_free_propagator(x1: float, x2: float, mass: float, hbar: float,
                             duration: float, mode: str = REAL_TIME) -> complex:
    """Closed-form free kernel in one dimension.

    real time: sqrt(m / (2 pi i hbar t)) exp(i m (x2-x1)^2 / (2 hbar t))
    with the principal branch, i.e. modulus sqrt(m/(2 pi hbar t)) and an
    extra phase e^{-i pi/4}.
    """
    if duration <= 0:
        raise DomainError("duration must be positive")
    dx2 = (x2 - x1) ** 2
    mag = np.sqrt(mass / (2.0 * np.pi * hbar * duration))
    if mode == IMAGINARY_TIME:
        return complex(mag * np.exp(-mass * dx2 / (2.0 * hbar * duration)))
    if mode == REAL_TIME:
        return complex(mag * np.exp(1j * (mass * dx2 / (2.0 * hbar * duration) - np.pi / 4.0)))
    raise DomainError("mode must be %r or %r" % (REAL_TIME, IMAGINARY_TIME))


def analytic_harmonic_propagator(x1: float, x2: float, mass: float, omega: float,
                                 hbar: float, duration: float, mode: str = REAL_TIME) -> complex:
    """Closed-form harmonic-oscillator (Mehler) kernel in one dimension.

    In real time the prefactor carries the Maslov phase
    e^{-i(pi/4 + (pi/2) floor(omega t / pi))}, which reduces to the free
    kernel's e^{-i pi/4} as omega -> 0.  Focal times (sin(omega t) = 0)
    raise CausticError.
    """
    if duration <= 0:
        raise DomainError("duration must be positive")
    if omega <= 0:
        raise DomainError("omega must be positive")
    if mode == IMAGINARY_TIME:
        s = np.sinh(omega * duration)
        mag = np.sqrt(mass * omega / (2.0 * np.pi * hbar * s))
        expo = -mass * omega / (2.0 * hbar * s) * ((x1 ** 2 + x2 ** 2) * np.cosh(omega * duration)
                                                   - 2.0 * x1 * x2)
        return complex(mag * np.exp(expo))
    if mode != REAL_TIME:
        raise DomainError("mode must be %r or %r" % (REAL_TIME, IMAGINARY_TIME))
    wt = omega * duration
    s = np.sin(wt)
    if abs(s) < 1e-12 * max(1.0, wt):
        raise CausticError("harmonic kernel is singular at omega*t = %g (multiple of pi)" % wt)
    mag = np.sqrt(mass * omega / (2.0 * np.pi * hbar * abs(s)))
    maslov = -np.pi / 4.0 - (np.pi / 2.0) * np.floor(wt / np.pi)
    classical = mass * omega / (2.0 * hbar * s) * ((x1 ** 2 + x2 ** 2) * np.cos(wt) - 2.0 * x1 * x2)
    return complex(mag * np.exp(1j * (maslov + classical)))


def _endpoint_scale(req: PropagatorRequest) -> float:
    return float(max(np.max(np.abs(req.q_start.coords)), np.max(np.abs(req.q_end.coords))))


def _fresnel_amplitude_1d(x1, x2, mass, hbar, t, K, omega):
    """Exact value of the K-sliced real-time amplitude for a quadratic action.

    The K-1 intermediate integrals of exp(i S / hbar) form a Fresnel
    integral with tridiagonal quadratic form; its eigen-signature fixes
    the branch (e^{i pi/4} per positive eigenvalue, e^{-i pi/4} per
    negative one).  Accumulates magnitudes in log space.
    """
    kap = mass * K / (2.0 * hbar * t)
    v = (t / K) * mass * omega ** 2 / (2.0 * hbar)
    logmag = (K / 2.0) * np.log(mass * K / (2.0 * np.pi * hbar * t))
    phase = -np.pi * K / 4.0
    if K == 1:
        s_over_hbar = kap * (x2 - x1) ** 2 - v * 0.5 * (x1 ** 2 + x2 ** 2)
        return np.exp(logmag) * np.exp(1j * (phase + s_over_hbar))
    n = K - 1
    quad = np.zeros((n, n))
    idx = np.arange(n)
    quad[idx, idx] = 4.0 * kap - 2.0 * v
    quad[idx[:-1], idx[:-1] + 1] = -2.0 * kap
    quad[idx[:-1] + 1, idx[:-1]] = -2.0 * kap
    lin = np.zeros(n)
    lin[0] += -2.0 * kap * x1
    lin[-1] += -2.0 * kap * x2
    const = (kap - 0.5 * v) * (x1 ** 2 + x2 ** 2)
    lam = np.linalg.eigvalsh(quad)
    if np.min(np.abs(lam)) < 1e-12 * np.max(np.abs(lam)):
        raise CausticError("sliced quadratic form is singular; duration sits on a focal point")
    signature = int(np.sum(lam > 0)) - int(np.sum(lam < 0))
    stationary = -0.5 * float(lin @ np.linalg.solve(quad, lin))
    logmag += (n / 2.0) * np.log(2.0 * np.pi) - 0.5 * float(np.sum(np.log(np.abs(lam))))
    phase += np.pi / 4.0 * signature + const + stationary
    return np.exp(logmag) * np.exp(1j * phase)


def _transfer_amplitude_1d(x1, x2, mass, hbar, tau, K, grid: Grid, V: PotentialSpec):
    """Imaginary-time sliced amplitude in one dimension by slice-wise contraction.

    Multiplies out the tensor-grid trapezoid sum one intermediate slice
    at a time: state <- G @ (damping * weights * state), rescaling each
    pass to keep magnitudes in range and accumulating the logs.
    """
    eps = tau / K
    kap = mass * K / (2.0 * hbar * tau)
    logpref = (K / 2.0) * np.log(mass * K / (2.0 * np.pi * hbar * tau))
    end_damp = -(eps / hbar) * 0.5 * (float(V.per_coordinate(np.array(x1), mass))
                                      + float(V.per_coordinate(np.array(x2), mass)))
    if not np.isfinite(end_damp):
        return 0.0
    if K == 1:
        se = kap * (x2 - x1) ** 2
        return float(np.exp(logpref - se + end_damp))
    y = np.linspace(-grid.half_width, grid.half_width, grid.points_per_dim)
    w = np.full(y.size, y[1] - y[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    damp = np.exp(-(eps / hbar) * V.per_coordinate(y, mass))
    kernel = np.exp(-kap * (y[:, None] - y[None, :]) ** 2)
    state = np.exp(-kap * (y - x1) ** 2) * damp * w
    log_acc = 0.0
    for _ in range(K - 2):
        state = kernel @ state
        state *= damp * w
        scale = float(np.max(np.abs(state)))
        if scale == 0.0:
            return 0.0
        state /= scale
        log_acc += np.log(scale)
    total = float(state @ np.exp(-kap * (y - x2) ** 2))
    if total <= 0.0:
        return 0.0
    return float(np.exp(logpref + log_acc + np.log(total) + end_damp))


def _imaginary_grid_amplitude(req: PropagatorRequest, V: PotentialSpec, grid: Grid) -> float:
    amp = 1.0
    for d in range(req.q_start.D):
        amp *= _transfer_amplitude_1d(req.q_start.coords[d], req.q_end.coords[d],
                                      req.mass, req.hbar, req.duration, req.slices, grid, V)
    return amp


def _monte_carlo_amplitude(req: PropagatorRequest, V: PotentialSpec):
    """Plain Monte Carlo over the intermediate slices, fixed seed.

    Uniform proposals on [-L, L]^{D(K-1)}; returns (amplitude,
    statistical error estimate).  Imaginary time only: the real-time
    integrand has no decay to tame the variance.
    """
    D = req.q_start.D
    K = req.slices
    n_dims = D * (K - 1)
    if n_dims == 0:
        return _imaginary_grid_amplitude(req, V, req.grid), 0.0
    L = req.grid.half_width
    rng = np.random.default_rng(req.seed)
    logpref = (D * K / 2.0) * np.log(req.mass * K / (2.0 * np.pi * req.hbar * req.duration))
    samples = rng.uniform(-L, L, size=(req.mc_samples, K - 1, D))
    start = np.broadcast_to(req.q_start.coords, (req.mc_samples, 1, D))
    end = np.broadcast_to(req.q_end.coords, (req.mc_samples, 1, D))
    paths = np.concatenate([start, samples, end], axis=1)
    deltas = np.sum((paths[:, 1:, :] - paths[:, :-1, :]) ** 2, axis=(1, 2))
    kinetic = 0.5 * req.mass * (K / req.duration) * deltas
    weights = np.ones(K + 1)
    weights[0] = weights[-1] = 0.5
    vvals = np.zeros((req.mc_samples, K + 1))
    for k in range(K + 1):
        vk = V.per_coordinate(paths[:, k, :].ravel(), req.mass).reshape(req.mc_samples, D)
        vvals[:, k] = np.sum(vk, axis=1)
    potential = (req.duration / K) * (vvals @ weights)
    integrand = np.exp(-(kinetic + potential) / req.hbar)
    integrand[~np.isfinite(integrand)] = 0.0
    volume = (2.0 * L) ** n_dims
    mean = float(np.mean(integrand))
    sem = float(np.std(integrand, ddof=1) / np.sqrt(req.mc_samples)) if req.mc_samples > 1 else np.inf
    amplitude = np.exp(logpref) * volume * mean
    rel = sem / mean if mean > 0 else np.inf
    return float(amplitude), float(rel)


def sliced_amplitude(req: PropagatorRequest, V: PotentialSpec) -> PropagatorResult:
    """Evaluate the K-sliced amplitude between req.q_start and req.q_end.

    Imaginary time: trapezoid tensor-grid quadrature contracted slice by
    slice, one independent pass per coordinate (every supported
    potential separates).  estimated_error compares against a grid of
    half the resolution.  If M^D per slice exceeds the node cap, set
    req.mc_samples > 0 to sample instead.

    Real time: exact Fresnel evaluation of the sliced integral,
    available for quadratic actions (free, harmonic); the result carries
    estimated_error 0 because the K-sliced integral itself is computed
    in closed form.  Other potentials are refused in real time.
    """
    D = req.q_start.D
    K = req.slices
    if req.mode == REAL_TIME:
        if V.kind not in ("free", "harmonic"):
            raise DomainError("real_time mode supports free and harmonic potentials only; "
                              "use imaginary_time for %r" % (V.kind,))
        omega = V.omega if V.kind == "harmonic" else 0.0
        amp = complex(1.0)
        for d in range(D):
            amp *= _fresnel_amplitude_1d(req.q_start.coords[d], req.q_end.coords[d],
                                         req.mass, req.hbar, req.duration, K, omega)
        if not np.isfinite(amp.real) or not np.isfinite(amp.imag):
            raise NumericalError("real-time amplitude overflowed")
        return PropagatorResult(amplitude=amp, K=K, quadrature_points=0, estimated_error=0.0)

    # imaginary time
    if req.mc_samples > 0:
        amp, rel = _monte_carlo_amplitude(req, V)
        return PropagatorResult(amplitude=complex(amp), K=K,
                                quadrature_points=req.mc_samples, estimated_error=rel)
    M = req.grid.points_per_dim
    if K > 1 and float(M) ** D > SLICE_NODE_CAP:
        raise NodeCapError("per-slice tensor grid has %g nodes (cap %g); "
                           "engage Monte Carlo via mc_samples" % (float(M) ** D, SLICE_NODE_CAP))
    amp = _imaginary_grid_amplitude(req, V, req.grid)
    if not np.isfinite(amp):
        raise NumericalError("imaginary-time amplitude is not finite")
    est = 0.0
    if K > 1 and M >= 5:
        coarse = Grid(req.grid.half_width, (M - 1) // 2 + 1)
        amp_coarse = _imaginary_grid_amplitude(req, V, coarse)
        if amp != 0.0:
            est = abs(amp - amp_coarse) / abs(amp)
    nodes = D * (K - 1) * M if K > 1 else 0
    return PropagatorResult(amplitude=complex(amp), K=K, quadrature_points=nodes,
                            estimated_error=est)


def _oracle_amplitude(req: PropagatorRequest, V: PotentialSpec) -> complex:
    """Product of per-coordinate closed-form kernels, where one exists."""
    amp = complex(1.0)
    for d in range(req.q_start.D):
        x1 = req.q_start.coords[d]
        x2 = req.q_end.coords[d]
        if V.kind == "free":
            amp *= analytic_free_propagator(x1, x2, req.mass, req.hbar, req.duration, req.mode)
        elif V.kind == "harmonic":
            amp *= analytic_harmonic_propagator(x1, x2, req.mass, V.omega, req.hbar,
                                                req.duration, req.mode)
        else:
            raise DomainError("no analytic oracle for potential kind %r" % (V.kind,))
    return amp


def convergence_scan(req_template: PropagatorRequest, V: PotentialSpec, K_list) -> list:
    """Relative error of the sliced amplitude against the analytic kernel per K."""
    exact = _oracle_amplitude(req_template, V)
    if exact == 0:
        raise NumericalError("oracle amplitude vanished; cannot form relative error")
    out = []
    for K in K_list:
        if K < 1:
            raise DomainError("slice counts must be >= 1")
        res = sliced_amplitude(replace(req_template, slices=int(K)), V)
        out.append((int(K), abs(res.amplitude - exact) / abs(exact)))
    return out


def identity_resolution_check(grid: Grid, profile, exact_square_norm: float = 1.0) -> float:
    """Quadrature test of the position-space closure relation.

    Inserting the discretized identity sum_j w_j |x_j><x_j| into <f|f>
    turns the square norm into sum_j w_j |f(x_j)|^2; returns the
    absolute deviation from the known square norm.  The profile must be
    negligible outside [-L, L].
    """
    x = np.linspace(-grid.half_width, grid.half_width, grid.points_per_dim)
    w = np.full(x.size, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    vals = np.asarray([profile(xi) for xi in x], dtype=complex)
    if not np.all(np.isfinite(vals.view(float))):
        raise NumericalError("profile produced non-finite values")
    approx = float(np.sum(w * np.abs(vals) ** 2))
    return abs(approx - exact_square_norm)
