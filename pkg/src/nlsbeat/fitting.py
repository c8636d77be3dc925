"""Deterministic sinusoid fitting and log-log slopes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

__all__ = ["FitResult", "SinusoidRegressor", "fit_frequency", "scaling_exponent"]

DEGENERATE_AMPLITUDE = 1e-14


@dataclass(frozen=True)
class FitResult:
    frequency: float
    amplitude: float
    phase: float
    offset: float
    residual_rms: float
    degenerate: bool = False


def _linear_part(t, y, omega):
    # y ~ alpha sin(wt) + beta cos(wt) + c
    A = np.column_stack((np.sin(omega * t), np.cos(omega * t), np.ones_like(t)))
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    return coef, float(r @ r)


def _crossing_estimate(t, y):
    mid = 0.5 * (y.max() + y.min())
    s = np.sign(y - mid)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if idx.size >= 2:
        # interpolated crossing times, half a period apart
        tc = t[idx] - (y[idx] - mid) * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
        return np.pi / np.mean(np.diff(tc))
    # fewer than two crossings: the span holds at most about one period
    span = t[-1] - t[0]
    return np.pi / span if idx.size == 1 else np.pi / (2 * span)


class SinusoidRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``A sin(w t + phi) + c``.

    The frequency is found by golden-section search of the residual over
    ``bracket * w0``, where ``w0`` comes from zero crossings. A coarse
    deterministic scan picks the golden-section starting bracket.

    Parameters
    ----------
    bracket : tuple of float
        Relative search interval around the crossing estimate.
    n_scan : int
        Grid points of the coarse scan.
    """

    def __init__(self, bracket=(0.5, 1.5), n_scan=64):
        self.bracket = bracket
        self.n_scan = n_scan

    def fit(self, t, y):
        t = np.asarray(t, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if t.shape != y.shape:
            raise ValueError("t and y must have the same length")
        if t.size < 4:
            raise ValueError("need at least 4 samples")
        if 0.5 * (y.max() - y.min()) < DEGENERATE_AMPLITUDE:
            self.result_ = FitResult(0.0, 0.0, 0.0, float(np.mean(y)),
                                     float(np.std(y)), degenerate=True)
            self.frequency_ = 0.0
            return self
        w0 = _crossing_estimate(t, y)
        lo, hi = self.bracket[0] * w0, self.bracket[1] * w0
        grid = np.linspace(lo, hi, self.n_scan)
        rss = np.array([_linear_part(t, y, w)[1] for w in grid])
        k = int(np.argmin(rss))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, self.n_scan - 1)]
        omega = self._golden(t, y, a, b)
        (alpha, beta, c), rss_min = _linear_part(t, y, omega)
        amp = float(np.hypot(alpha, beta))
        phase = float(np.arctan2(beta, alpha))
        self.result_ = FitResult(omega, amp, phase, float(c), float(np.sqrt(rss_min / t.size)))
        self.frequency_ = omega
        return self

    @staticmethod
    def _golden(t, y, a, b, rtol=1e-15, maxiter=200):
        f = lambda w: _linear_part(t, y, w)[1]
        invphi = (np.sqrt(5) - 1) / 2
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(maxiter):
            if b - a <= rtol * b:
                break
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = f(d)
        return 0.5 * (a + b)

    def predict(self, t):
        check_is_fitted(self, "result_")
        r = self.result_
        t = np.asarray(t, dtype=float)
        return r.amplitude * np.sin(r.frequency * t + r.phase) + r.offset


def fit_frequency(t, y) -> FitResult:
    """Fit ``A sin(w t + phi) + c`` to a sampled series; see :class:`SinusoidRegressor`."""
    return SinusoidRegressor().fit(t, y).result_


def scaling_exponent(epsilons, errors) -> float:
    """Least-squares slope of log(error) against log(epsilon)."""
    eps = np.asarray(epsilons, dtype=float)
    err = np.asarray(errors, dtype=float)
    if eps.size < 3 or err.size != eps.size:
        raise ValueError("need at least 3 (epsilon, error) pairs")
    if np.unique(eps).size != eps.size:
        raise ValueError("epsilons must be distinct")
    if np.any(err <= 0) or np.any(eps <= 0):
        raise ValueError("epsilons and errors must be positive")
    slope, _ = np.polyfit(np.log(eps), np.log(err), 1)
    return float(slope)
