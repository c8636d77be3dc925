"""Galerkin-truncated integration of ``i psi_t = -psi_xx + sign * g(x) |psi|^2 psi``.

The modulation is ``g(x) = c0 + a cos 2px + b sin 2px`` (the paper's case is
``c0 = 0, a = 2, b = 0``; ``c0 = 1, a = b = 0`` is the x-independent
control). States hold the amplitudes ``xi_j`` for ``-N <= j <= N`` with
``eta = conj(xi)`` implied.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .validation import (
    ConfigurationError,
    amplitudes_of,
    check_scalar,
    check_sign,
)

__all__ = [
    "GalerkinState",
    "SimConfig",
    "Trajectory",
    "IntegrationError",
    "RECIPES",
    "DEFAULT_DT",
    "grid_size",
    "initial_state",
    "nonlinear_coefficients",
    "step_splitstep",
    "step_rk4_rotating",
    "run",
    "mass",
    "energy",
    "GalerkinNLS",
]

RECIPES = ("cos_plus_sin", "cos_only", "sin_only", "cos_plus_sin_perturbed")
INTEGRATORS = ("splitstep", "rk4")
DEFAULT_DT = 2 * math.pi * 1e-3
MASS_GUARD = 1e-6


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GalerkinState:
    """Amplitudes ``xi_j``, ``j = -N..N``, at time ``t``."""

    t: float
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = amplitudes_of(self.amplitudes).copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def N(self) -> int:
        return (self.amplitudes.size - 1) // 2

    def __getitem__(self, j: int) -> complex:
        if abs(j) > self.N:
            raise IndexError(f"mode {j} outside truncation N={self.N}")
        return complex(self.amplitudes[j + self.N])

    def action(self, j: int) -> float:
        return abs(self[j]) ** 2

    def resize(self, N: int) -> "GalerkinState":
        """Zero-pad or truncate to a new bound."""
        out = np.zeros(2 * N + 1, dtype=complex)
        m = min(N, self.N)
        out[N - m:N + m + 1] = self.amplitudes[self.N - m:self.N + m + 1]
        return GalerkinState(self.t, out)


@dataclass(frozen=True)
class SimConfig:
    """One simulation run. ``sample_stride=None`` picks about 2000 samples."""

    T: float
    epsilon: float = 0.1
    N: int = 32
    dt: float = DEFAULT_DT
    integrator: str = "splitstep"
    sample_stride: Optional[int] = None
    sign: int = 1
    p: int = 1
    a: float = 2.0
    b: float = 0.0
    const_weight: float = 0.0
    recipe: str = "cos_plus_sin"
    q: Optional[int] = None
    datum_mode: int = 1
    backward: bool = False

    def __post_init__(self):
        check_scalar(self.dt, "dt", min_val=0.0, include_min=False)
        check_scalar(self.T, "T", min_val=0.0)
        check_scalar(self.epsilon, "epsilon", min_val=0.0, include_min=False)
        check_scalar(self.N, "N", int, min_val=1)
        check_scalar(self.p, "p", int, min_val=1)
        check_scalar(self.datum_mode, "datum_mode", int, min_val=1)
        check_sign(self.sign)
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.recipe not in RECIPES:
            raise ConfigurationError(f"recipe must be one of {RECIPES}, got {self.recipe!r}")
        need = max(2 * self.p, self.q or 0, 2 * self.datum_mode, 2) + 1
        if self.N < need:
            raise ConfigurationError(f"N={self.N} too small, need N >= {need}")
        if self.recipe == "cos_plus_sin_perturbed":
            if self.q is None:
                raise ConfigurationError("q is required for the perturbed recipe")
            if self.q == self.datum_mode or self.q < 0:
                raise ConfigurationError(f"q={self.q} must be nonnegative and differ from the datum mode")
        if self.sample_stride is not None:
            check_scalar(self.sample_stride, "sample_stride", int, min_val=1)
            if self.T > 0 and self.sample_stride * self.dt > self.T * (1 + 1e-12):
                raise ConfigurationError("sample_stride * dt exceeds T")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.T / self.dt - 1e-9))

    @property
    def stride(self) -> int:
        if self.sample_stride is not None:
            return self.sample_stride
        return max(1, self.n_steps // 2000)

    def modulation(self, x):
        x = np.asarray(x, dtype=float)
        g = self.const_weight + self.a * np.cos(2 * self.p * x)
        if self.b:
            g = g + self.b * np.sin(2 * self.p * x)
        return g


@dataclass
class Trajectory:
    """Sampled run: ``amplitudes[k]`` is the state at ``times[k]``."""

    config: SimConfig
    times: np.ndarray
    amplitudes: np.ndarray
    mass: np.ndarray
    energy: np.ndarray

    def __len__(self):
        return self.times.size

    def state(self, k: int) -> GalerkinState:
        return GalerkinState(float(self.times[k]), self.amplitudes[k])

    def states(self):
        return [self.state(k) for k in range(len(self))]

    def action(self, j: int) -> np.ndarray:
        N = self.config.N
        return np.abs(self.amplitudes[:, j + N]) ** 2

    @property
    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])) / self.mass[0])

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])) / abs(self.energy[0]))

    def to_csv(self, path):
        """Columns ``t, re_xi_{-N}..re_xi_{N}, im_xi_{-N}..im_xi_{N}, mass, energy``."""
        N = self.config.N
        header = (["t"] + [f"re_xi_{j}" for j in range(-N, N + 1)]
                  + [f"im_xi_{j}" for j in range(-N, N + 1)] + ["mass", "energy"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for k in range(len(self)):
                row = np.concatenate((
                    [self.times[k]], self.amplitudes[k].real, self.amplitudes[k].imag,
                    [self.mass[k], self.energy[k]],
                ))
                w.writerow([f"{v:.16e}" for v in row])

    @classmethod
    def read_csv(cls, path, config: SimConfig) -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        n = 2 * config.N + 1
        amps = data[:, 1:1 + n] + 1j * data[:, 1 + n:1 + 2 * n]
        return cls(config, data[:, 0], amps, data[:, -2], data[:, -1])


def grid_size(N: int, p: int = 1) -> int:
    """Collocation points: a multiple of 4, at least ``4N + 4p + 1``.

    The multiple of 4 keeps the grid invariant under ``x -> pi/2 - x`` and
    ``x -> x + pi``, so the discrete flow inherits the sign and parity
    symmetries exactly.
    """
    n = 4 * N + 4 * p + 1
    return n + (-n) % 4


def initial_state(recipe: str, epsilon: float, q: Optional[int] = None, N: int = 32,
                  mode: int = 1) -> GalerkinState:
    """Datum ``psi_0`` expanded on modes ``+-mode`` (and ``+-q`` for the perturbed recipe)."""
    if epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    if recipe not in RECIPES:
        raise ConfigurationError(f"unknown recipe {recipe!r}")
    if mode > N:
        raise ConfigurationError(f"datum mode {mode} exceeds N={N}")
    z = np.zeros(2 * N + 1, dtype=complex)
    e = epsilon
    if recipe in ("cos_plus_sin", "cos_plus_sin_perturbed"):
        z[N + mode] = (1 - 1j) * e / 2
        z[N - mode] = (1 + 1j) * e / 2
    elif recipe == "cos_only":
        z[N + mode] = z[N - mode] = e / 2
    else:
        z[N + mode] = e / 2j
        z[N - mode] = -e / 2j
    if recipe == "cos_plus_sin_perturbed":
        if q is None or q == mode or q > N or q < 0:
            raise ConfigurationError(f"q={q} invalid for the perturbed recipe (need q != {mode}, q <= N)")
        if q == 0:
            z[N] += e * e
        else:
            z[N + q] += e * e / 2
            z[N - q] += e * e / 2
    return GalerkinState(0.0, z)


class _Grid:
    """FFT layout of size G holding modes |j| <= N."""

    def __init__(self, config: SimConfig, G: Optional[int] = None):
        N, p = config.N, config.p
        G = grid_size(N, p) if G is None else G
        if G < 4 * N + 2 * p + 1:
            raise ConfigurationError(f"grid of {G} points cannot dealias N={N}, p={p}")
        self.N, self.G = N, G
        self.x = 2 * np.pi * np.arange(G) / G
        self.g = config.modulation(self.x)
        self.sign = config.sign
        self.modes = np.arange(-N, N + 1)
        self.pos = self.modes % G
        self.k = np.fft.fftfreq(G, 1.0 / G).round().astype(int)
        self.mask = np.abs(self.k) <= N

    def to_grid(self, z):
        c = np.zeros(self.G, dtype=complex)
        c[self.pos] = z
        return c

    def from_grid(self, c):
        return c[self.pos]

    def field(self, z):
        return np.fft.ifft(self.to_grid(z)) * self.G

    def coefficients(self, psi):
        return self.from_grid(np.fft.fft(psi)) / self.G


def _direct_nonlinear(z, config: SimConfig):
    N = (z.size - 1) // 2
    # coefficients of |psi|^2 psi at modes -3N..3N
    cubic = np.convolve(np.convolve(z, z), np.conj(z[::-1]))
    out = config.const_weight * cubic[2 * N:4 * N + 1]
    shift = 2 * config.p
    wp = (config.a - 1j * config.b) / 2  # weight of e^{+2ipx}
    wm = (config.a + 1j * config.b) / 2
    idx = np.arange(-N, N + 1) + 3 * N
    lo, hi = idx - shift, idx + shift
    ok_lo = (lo >= 0) & (lo < cubic.size)
    ok_hi = (hi >= 0) & (hi < cubic.size)
    out = out + wp * np.where(ok_lo, cubic[np.clip(lo, 0, cubic.size - 1)], 0)
    out = out + wm * np.where(ok_hi, cubic[np.clip(hi, 0, cubic.size - 1)], 0)
    return config.sign * out


def nonlinear_coefficients(state, config: SimConfig, method: str = "collocation",
                           grid_points: Optional[int] = None) -> np.ndarray:
    """Fourier coefficients ``|j| <= N`` of ``sign * g(x) |psi|^2 psi``.

    ``method="collocation"`` evaluates on a dealiased grid;
    ``method="direct"`` performs the triple convolution sum.
    """
    z = amplitudes_of(state)
    if (z.size - 1) // 2 != config.N:
        raise ConfigurationError("state truncation does not match config.N")
    if method == "direct":
        return _direct_nonlinear(z, config)
    if method != "collocation":
        raise ValueError(f"unknown method {method!r}")
    grid = _Grid(config, grid_points)
    psi = grid.field(z)
    return grid.coefficients(config.sign * grid.g * np.abs(psi) ** 2 * psi)


def mass(state) -> float:
    z = amplitudes_of(state)
    return float(np.sum(np.abs(z) ** 2))


def energy(state, config: SimConfig) -> float:
    """``sum j^2 |xi_j|^2 + (sign/2) int g |psi|^4 dx`` by exact quadrature on the dealiased grid."""
    z = amplitudes_of(state)
    grid = _Grid(config)
    psi = grid.field(z)
    h0 = float(np.sum(grid.modes ** 2 * np.abs(z) ** 2))
    return h0 + 0.5 * config.sign * float(np.mean(grid.g * np.abs(psi) ** 4))


class _SplitStep:
    def __init__(self, config: SimConfig, dt: float):
        self.grid = _Grid(config)
        self.dt = dt
        k = self.grid.k
        self.half = np.exp(-0.5j * k ** 2 * dt) * self.grid.mask
        self.theta = -config.sign * self.grid.g * dt

    def __call__(self, c):
        c = c * self.half
        psi = np.fft.ifft(c) * self.grid.G
        psi *= np.exp(1j * self.theta * (psi.real ** 2 + psi.imag ** 2))
        c = np.fft.fft(psi) / self.grid.G
        c *= self.half
        return c


class _RK4Rotating:
    def __init__(self, config: SimConfig, dt: float):
        self.grid = _Grid(config)
        self.dt = dt
        self.j2 = self.grid.modes.astype(float) ** 2
        self.sg = config.sign * self.grid.g

    def rhs(self, t, u):
        z = np.exp(-1j * self.j2 * t) * u
        psi = self.grid.field(z)
        nl = self.grid.coefficients(self.sg * (psi.real ** 2 + psi.imag ** 2) * psi)
        return -1j * np.exp(1j * self.j2 * t) * nl

    def __call__(self, t, z):
        h = self.dt
        u = np.exp(1j * self.j2 * t) * z
        k1 = self.rhs(t, u)
        k2 = self.rhs(t + h / 2, u + h / 2 * k1)
        k3 = self.rhs(t + h / 2, u + h / 2 * k2)
        k4 = self.rhs(t + h, u + h * k3)
        u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return np.exp(-1j * self.j2 * (t + h)) * u


def step_splitstep(state: GalerkinState, dt: float, config: SimConfig) -> GalerkinState:
    """One Strang step: half linear phase, exact pointwise nonlinear flow, projection, half linear phase."""
    stepper = _SplitStep(config, dt)
    c = stepper(stepper.grid.to_grid(state.amplitudes))
    return GalerkinState(state.t + dt, stepper.grid.from_grid(c))


def step_rk4_rotating(state: GalerkinState, dt: float, config: SimConfig) -> GalerkinState:
    """One classical RK4 step on ``u_j = e^{i j^2 t} xi_j``."""
    stepper = _RK4Rotating(config, dt)
    return GalerkinState(state.t + dt, stepper(state.t, state.amplitudes))


def run(config: SimConfig, initial: Optional[GalerkinState] = None) -> Trajectory:
    """Integrate ``config`` and return the initial state plus every ``stride``-th state.

    The last sample lands at or just past ``T`` so that windows ending at
    ``T`` are always covered.
    """
    if initial is None:
        initial = initial_state(config.recipe, config.epsilon, config.q, config.N,
                                config.datum_mode)
    if initial.N != config.N:
        raise ConfigurationError(f"initial state has N={initial.N}, config has N={config.N}")
    dt = -config.dt if config.backward else config.dt
    n, stride = config.n_steps, config.stride
    n_samples = -(-n // stride) + 1
    N = config.N
    times = np.empty(n_samples)
    amps = np.empty((n_samples, 2 * N + 1), dtype=complex)
    masses = np.empty(n_samples)
    energies = np.empty(n_samples)

    def record(k, t, z):
        times[k] = t
        amps[k] = z
        masses[k] = mass(z)
        energies[k] = energy(z, config)
        drift = abs(masses[k] - masses[0]) / masses[0]
        if drift > MASS_GUARD:
            raise IntegrationError(f"mass drift {drift:.3e} at t={t:.6g} exceeds {MASS_GUARD}")

    t0 = initial.t
    record(0, t0, initial.amplitudes)
    if config.integrator == "splitstep":
        stepper = _SplitStep(config, dt)
        grid = stepper.grid
        c = grid.to_grid(initial.amplitudes)
        for s in range(1, n_samples):
            for _ in range(stride):
                c = stepper(c)
            record(s, t0 + s * stride * dt, grid.from_grid(c))
    else:
        stepper = _RK4Rotating(config, dt)
        z = initial.amplitudes.copy()
        for s in range(1, n_samples):
            base = (s - 1) * stride
            for i in range(stride):
                z = stepper(t0 + (base + i) * dt, z)
            record(s, t0 + s * stride * dt, z)
    return Trajectory(config, times, amps, masses, energies)


class GalerkinNLS(BaseEstimator):
    """Estimator-style front end to :func:`run`.

    The hyperparameters are the equation and discretization; ``simulate``
    takes an initial state and a horizon. ``get_params``/``set_params``
    make sweeps over e.g. ``dt`` or ``integrator`` composable with the usual
    tooling.
    """

    def __init__(self, N=32, dt=DEFAULT_DT, integrator="splitstep", sign=1, p=1, a=2.0,
                 b=0.0, const_weight=0.0, sample_stride=None):
        self.N = N
        self.dt = dt
        self.integrator = integrator
        self.sign = sign
        self.p = p
        self.a = a
        self.b = b
        self.const_weight = const_weight
        self.sample_stride = sample_stride

    def _config(self, T, **extra):
        return SimConfig(T=T, N=self.N, dt=self.dt, integrator=self.integrator,
                         sample_stride=self.sample_stride, sign=self.sign, p=self.p, a=self.a,
                         b=self.b, const_weight=self.const_weight, **extra)

    def simulate(self, initial: GalerkinState, T: float) -> Trajectory:
        if initial.N != self.N:
            initial = initial.resize(self.N)
        return run(self._config(T), initial)

    def fit(self, X=None, y=None):
        # stateless; present so the object composes with pipelines
        return self
