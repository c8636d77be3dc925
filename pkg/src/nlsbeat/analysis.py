"""Observables along trajectories, predictions, the reduced model and the chi flow."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dynamics import GalerkinState, Trajectory
from .normal_form import (
    build_perturbation,
    classify_Z4,
    free_hamiltonian,
    solve_homological,
)
from .polynomial import CompiledPolynomial
from .validation import amplitudes_of, check_states

__all__ = [
    "ObservableRecord",
    "ObservableSeries",
    "observables",
    "observable_series",
    "beating_prediction",
    "general_prediction",
    "sup_error",
    "integrate_reduced",
    "chi_flow",
    "NormalFormTransformer",
]

IMAG_TOL = 1e-12


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    I: Dict[int, float]
    J_p: Dict[int, float]
    J: float
    M1: float
    L1: float
    K1: float
    K2: float
    L2: float
    mass: float
    energy: float
    d: float
    s: float


def _pair_terms(z, N, p):
    """Return (M_p, K_p, L_p) for amplitude rows ``z`` (..., 2N+1)."""
    if p == 0 or p > N:
        zero = np.zeros(z.shape[:-1])
        return zero, zero, zero
    a, b = z[..., N + p], z[..., N - p]
    w = a * np.conj(b)
    M = np.abs(a) ** 2 - np.abs(b) ** 2
    K = 2 * w.real
    L = -2 * w.imag
    return M, K, L


def observables(state, energy: float = float("nan"), pair: int = 1) -> ObservableRecord:
    """Quadratic observables of one state. ``pair`` selects the beating modes (1 by default)."""
    z = amplitudes_of(state)
    N = (z.size - 1) // 2
    if N < 2 * pair:
        raise ValueError(f"truncation N={N} must be >= {2 * pair}")
    I = {j: float(abs(z[j + N]) ** 2) for j in range(-N, N + 1)}
    Jp = {0: I[0]}
    Jp.update({p: I[p] + I[-p] for p in range(1, N + 1)})
    M1, K1, L1 = _pair_terms(z, N, pair)
    _, K2, L2 = _pair_terms(z, N, 2 * pair)
    J = float(sum(I.values()))
    return ObservableRecord(
        t=float(getattr(state, "t", 0.0)), I=I, J_p=Jp, J=J, M1=float(M1), L1=float(L1),
        K1=float(K1), K2=float(K2), L2=float(L2), mass=J, energy=float(energy),
        d=I[pair] - I[-pair], s=I[pair] + I[-pair],
    )


@dataclass
class ObservableSeries:
    """Columnar observables of a sampled run."""

    t: np.ndarray
    amplitudes: np.ndarray
    pair: int
    mass: np.ndarray
    energy: np.ndarray
    M1: np.ndarray = field(init=False)
    L1: np.ndarray = field(init=False)
    K1: np.ndarray = field(init=False)
    K2: np.ndarray = field(init=False)
    L2: np.ndarray = field(init=False)

    def __post_init__(self):
        N = self.N
        self.M1, self.K1, self.L1 = _pair_terms(self.amplitudes, N, self.pair)
        _, self.K2, self.L2 = _pair_terms(self.amplitudes, N, 2 * self.pair)

    @property
    def N(self) -> int:
        return (self.amplitudes.shape[1] - 1) // 2

    def I(self, j: int) -> np.ndarray:
        return np.abs(self.amplitudes[:, j + self.N]) ** 2

    def J_p(self, p: int) -> np.ndarray:
        return self.I(0) if p == 0 else self.I(p) + self.I(-p)

    @property
    def J(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    @property
    def J1(self) -> np.ndarray:
        return self.J_p(self.pair)

    @property
    def d(self) -> np.ndarray:
        return self.I(self.pair) - self.I(-self.pair)

    @property
    def s(self) -> np.ndarray:
        return self.I(self.pair) + self.I(-self.pair)

    def max_foreign_action(self) -> float:
        """Largest ``J_p`` over samples and over every ``p != pair``."""
        N = self.N
        Jp = np.stack([self.J_p(p) for p in range(0, N + 1) if p != self.pair])
        return float(Jp.max())

    def to_csv(self, path, prediction: Optional[np.ndarray] = None):
        """Columns ``t, I_1, I_-1, d, s, M1, L1, K1, K2, L2, J, mass, energy, prediction, error``."""
        pred = np.full(self.t.shape, np.nan) if prediction is None else np.asarray(prediction)
        cols = [self.t, self.I(self.pair), self.I(-self.pair), self.d, self.s, self.M1, self.L1,
                self.K1, self.K2, self.L2, self.J, self.mass, self.energy, pred, self.d - pred]
        header = ["t", "I_1", "I_-1", "d", "s", "M1", "L1", "K1", "K2", "L2", "J", "mass",
                  "energy", "prediction", "error"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in np.column_stack(cols):
                w.writerow([f"{v:.16e}" for v in row])


def observable_series(traj: Trajectory, pair: Optional[int] = None) -> ObservableSeries:
    pair = traj.config.datum_mode if pair is None else pair
    return ObservableSeries(traj.times, traj.amplitudes, pair, traj.mass, traj.energy)


def beating_prediction(t, epsilon: float, sign: int = 1):
    """``sign * eps^2 * sin(2 eps^2 t)``."""
    e2 = epsilon * epsilon
    return sign * e2 * np.sin(2 * e2 * np.asarray(t, dtype=float))


def general_prediction(t, M1_0: float, L1_0: float, J0: float, sign: int = 1):
    """Rotation of ``(M1, L1)`` at angular rate ``2 J0``.

    For sign +1, ``dM1/dt = 2 J0 L1`` and ``dL1/dt = -2 J0 M1``; sign -1
    reverses the orientation.
    """
    if J0 <= 0:
        raise ValueError("J0 must be positive")
    phase = 2 * J0 * np.asarray(t, dtype=float)
    c, s = np.cos(phase), sign * np.sin(phase)
    return M1_0 * c + L1_0 * s, L1_0 * c - M1_0 * s


def sup_error(t, values, predictor: Callable, window: Optional[Sequence[float]] = None) -> float:
    """``max |values - predictor(t)|`` over samples with ``t`` in ``window``."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        sel = np.ones(t.shape, dtype=bool)
    else:
        lo, hi = window
        span_lo, span_hi = t.min(), t.max()
        tol = 1e-9 * max(1.0, abs(span_hi))
        if lo < span_lo - tol or hi > span_hi + tol:
            raise ValueError(f"window {window} not within series span [{span_lo}, {span_hi}]")
        sel = (t >= lo - tol) & (t <= hi + tol)
    if not sel.any():
        raise ValueError("window holds no samples")
    return float(np.max(np.abs(values[sel] - predictor(t[sel]))))


def _rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_reduced(Z4, initial: GalerkinState, T: float, dt: float,
                      sample_times: Optional[np.ndarray] = None, pair: int = 1) -> ObservableSeries:
    """RK4 for ``H0 + Z4`` in the frame rotating with ``H0``.

    Steps never exceed ``dt`` and land exactly on every sample time
    (default: one sample per ``dt`` up to ``T``).
    """
    N = initial.N
    Zc = Z4 if isinstance(Z4, CompiledPolynomial) else CompiledPolynomial(Z4, N)
    j2 = np.arange(-N, N + 1, dtype=float) ** 2
    H = CompiledPolynomial(free_hamiltonian(N), N)

    def f(t, u):
        z = np.exp(-1j * j2 * t) * u
        return np.exp(1j * j2 * t) * Zc.vector_field(z)

    if sample_times is None:
        sample_times = initial.t + np.arange(0.0, T + 0.5 * dt, dt)
    sample_times = np.asarray(sample_times, dtype=float)
    u = np.exp(1j * j2 * initial.t) * initial.amplitudes
    t = initial.t
    out = np.empty((sample_times.size, 2 * N + 1), dtype=complex)
    for k, ts in enumerate(sample_times):
        n = int(np.ceil((ts - t) / dt - 1e-9))
        if n > 0:
            h = (ts - t) / n
            for i in range(n):
                u = _rk4(f, t + i * h, u, h)
        t = ts
        out[k] = np.exp(-1j * j2 * t) * u
    masses = np.sum(np.abs(out) ** 2, axis=1)
    energies = np.array([(H(z) + Zc(z)).real for z in out])
    return ObservableSeries(sample_times, out, pair, masses, energies)


def chi_flow(state, chi, direction: int = 1, substeps: int = 100):
    """Time-``direction`` Hamiltonian flow of ``chi`` by RK4 with ``substeps`` steps.

    ``direction=+1`` realizes the near-identity map, ``-1`` its inverse.
    Returns a :class:`GalerkinState` when given one, else an array.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    z = amplitudes_of(state)
    N = (z.size - 1) // 2
    C = chi if isinstance(chi, CompiledPolynomial) else CompiledPolynomial(chi, N)
    h = direction / substeps
    f = lambda _t, y: C.vector_field(y)
    for i in range(substeps):
        z = _rk4(f, i * h, z, h)
    if isinstance(state, GalerkinState):
        return GalerkinState(state.t, z)
    return z


class NormalFormTransformer(TransformerMixin, BaseEstimator):
    """Near-identity change of variables to the order-4 resonant normal form.

    ``fit`` builds the perturbation for the given equation and solves the
    homological equation. ``transform`` maps original amplitudes to
    normal-form coordinates (inverse flow of chi) and ``inverse_transform``
    maps back (forward flow).

    Parameters
    ----------
    p, sign, a, b : equation parameters
    bound : int
        Truncation N; states must have length ``2 * bound + 1``.
    substeps : int
        RK4 substeps of the unit-time chi flow.
    """

    def __init__(self, p=1, sign=1, a=2, b=0, bound=16, substeps=100):
        self.p = p
        self.sign = sign
        self.a = a
        self.b = b
        self.bound = bound
        self.substeps = substeps

    def fit(self, X=None, y=None):
        if X is not None:
            check_states(X, self.bound)
        self.perturbation_ = build_perturbation(self.p, self.sign, self.a, self.b, self.bound)
        self.chi_, self.z4_ = solve_homological(self.perturbation_)
        self.parts_ = classify_Z4(self.z4_) if self.p == 1 else None
        self._chi_compiled = CompiledPolynomial(self.chi_, self.bound)
        self.n_features_in_ = 2 * self.bound + 1
        return self

    def _flow(self, X, direction):
        check_is_fitted(self, "chi_")
        single = isinstance(X, GalerkinState)
        arr = check_states(X, self.bound)
        out = np.array([chi_flow(z, self._chi_compiled, direction, self.substeps) for z in arr])
        if single:
            return GalerkinState(X.t, out[0])
        return out

    def transform(self, X):
        return self._flow(X, -1)

    def inverse_transform(self, X):
        return self._flow(X, 1)
