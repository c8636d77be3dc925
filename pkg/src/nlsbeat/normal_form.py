"""Resonant order-4 normal form of the cos(2px)-modulated cubic NLS.

Everything here is exact: the perturbation, the generator ``chi`` of the
near-identity transform and the resonant part ``Z4`` are
:class:`~nlsbeat.polynomial.HamPolynomial` objects with rational
coefficients.

Normalization: the perturbation is the Hamiltonian whose flow under
:func:`~nlsbeat.polynomial.poisson_bracket` is the nonlinear term of
``i psi_t = -psi_xx + sign * g(x) |psi|^2 psi``, i.e.
``P = (sign/2) * int g |psi|^4 dx`` with ``g = a cos 2px + b sin 2px``.
For ``a = 2`` this is half of the ordered-tuple sum over momentum +-2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional

import numpy as np

from .polynomial import (
    ExactComplex,
    CompiledPolynomial,
    HamPolynomial,
    divisor,
    momentum,
)
from .validation import amplitudes_of, check_sign, truncation_of

__all__ = [
    "ResonantQuadruple",
    "ClassificationError",
    "Z4Parts",
    "momentum",
    "divisor",
    "enumerate_resonant",
    "build_perturbation",
    "free_hamiltonian",
    "total_action",
    "action",
    "quadratic_observable",
    "solve_homological",
    "classify_Z4",
    "effective_closed_form",
    "pair_closed_form",
    "proportionality",
    "evaluate",
    "vector_field",
    "weighted_norm",
    "vector_field_norm",
]


class ClassificationError(RuntimeError):
    """A resonant term fits none of the expected normal-form families."""


@dataclass(frozen=True, order=True)
class ResonantQuadruple:
    """Canonical resonant index set: ``xi_{j1} xi_{j2} eta_{l1} eta_{l2}`` with j1<=j2, l1<=l2."""

    j1: int
    j2: int
    l1: int
    l2: int
    momentum: int

    def __post_init__(self):
        if self.j1 > self.j2 or self.l1 > self.l2:
            raise ValueError("quadruple is not in canonical sorted-pair form")
        if self.j1 + self.j2 - self.l1 - self.l2 != self.momentum:
            raise ValueError("momentum field inconsistent with indices")
        if divisor((self.j1, self.j2), (self.l1, self.l2)) != 0:
            raise ValueError("quadruple is not resonant")

    @property
    def xi(self):
        return (self.j1, self.j2)

    @property
    def eta(self):
        return (self.l1, self.l2)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def enumerate_resonant(offset_p: int, bound_N: int) -> List[ResonantQuadruple]:
    """All resonant quadruples with momentum +-2p and indices bounded by N.

    Uses the factorization ``(j1-l1)(j1+l1) = (l2-j2)(l2+j2)``: with
    ``u = j1 - l1`` the momentum fixes ``v = l2 - j2 = u - m`` and the
    quadratic condition fixes ``l2 + j2``, so the search is quadratic in N.
    """
    if offset_p < 1:
        raise ValueError("offset_p must be a positive integer")
    if bound_N < 1:
        raise ValueError("bound_N must be >= 1")
    N = bound_N
    found = set()
    rng = range(-N, N + 1)
    for m in (2 * offset_p, -2 * offset_p):
        for j1 in rng:
            for l1 in rng:
                u = j1 - l1
                v = u - m
                if v == 0:
                    # u = m != 0 forces l1 = -j1, then j2 = l2 is free
                    if j1 + l1 != 0:
                        continue
                    for j2 in rng:
                        _add(found, j1, j2, l1, j2, m)
                    continue
                num = u * (j1 + l1)
                if num % v:
                    continue
                s = num // v
                if (s - v) % 2:
                    continue
                j2 = (s - v) // 2
                l2 = (s + v) // 2
                if abs(j2) <= N and abs(l2) <= N:
                    _add(found, j1, j2, l1, l2, m)
    return sorted(found)


def _add(found, j1, j2, l1, l2, m):
    a, b = sorted((j1, j2))
    c, d = sorted((l1, l2))
    found.add(ResonantQuadruple(a, b, c, d, m))


def build_perturbation(offset_p: int = 1, sign: int = 1, cos_weight=2, sin_weight=0,
                       bound_N: int = 32) -> HamPolynomial:
    """Exact perturbation ``(sign/2) * int (a cos 2px + b sin 2px) |psi|^4 dx`` truncated to |j| <= N.

    Parameters
    ----------
    offset_p : int
        Modulation wavenumber p; the support has momentum +-2p.
    sign : {+1, -1}
        Sign in front of the nonlinearity.
    cos_weight, sin_weight : rational
        The weights a and b. Floats are converted through their decimal repr.
    bound_N : int
        Hard cube truncation: every index satisfies |j| <= N.
    """
    check_sign(sign)
    if offset_p < 1:
        raise ValueError("offset_p must be a positive integer")
    if bound_N < offset_p:
        raise ValueError(
            f"bound_N={bound_N} < p={offset_p}: the truncated support would hide the coupling"
        )
    a = _to_fraction(cos_weight)
    b = _to_fraction(sin_weight)
    half = Fraction(sign, 2)
    # int e^{iMx} (a cos 2px + b sin 2px) dx for M = +2p and M = -2p
    weights = {
        2 * offset_p: ExactComplex(a / 2, b / 2) * half,
        -2 * offset_p: ExactComplex(a / 2, -b / 2) * half,
    }
    N = bound_N
    terms = {}
    for m, w in weights.items():
        if not w:
            continue
        for j1 in range(-N, N + 1):
            for j2 in range(j1, N + 1):
                for l1 in range(-N, N + 1):
                    l2 = j1 + j2 - l1 - m
                    if l2 < l1 or l2 > N:
                        continue
                    mult = (2 if j1 != j2 else 1) * (2 if l1 != l2 else 1)
                    terms[((j1, j2), (l1, l2))] = w * mult
    return HamPolynomial._trusted(terms)


def action(j: int) -> HamPolynomial:
    return HamPolynomial([(((j,), (j,)), 1)])


def free_hamiltonian(bound_N: int) -> HamPolynomial:
    """``H0 = sum_j j^2 xi_j eta_j`` over |j| <= N."""
    return HamPolynomial([(((j,), (j,)), j * j) for j in range(-bound_N, bound_N + 1)], 0)


def total_action(bound_N: int) -> HamPolynomial:
    """``J = sum_j xi_j eta_j`` over |j| <= N (the mass)."""
    return HamPolynomial([(((j,), (j,)), 1) for j in range(-bound_N, bound_N + 1)], 0)


def quadratic_observable(kind: str, p: int) -> HamPolynomial:
    """The quadratic observables ``M_p, J_p, L_p, K_p`` of the +-p mode pair.

    ``J_0`` is the single action ``I_0``.
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    kind = kind.upper()
    if kind == "J" and p == 0:
        return action(0)
    pos, neg = ((p,), (p,)), ((-p,), (-p,))
    cross, anti = ((p,), (-p,)), ((-p,), (p,))
    if kind == "M":
        return HamPolynomial([(pos, 1), (neg, -1)])
    if kind == "J":
        return HamPolynomial([(pos, 1), (neg, 1)])
    if kind == "K":
        return HamPolynomial([(cross, 1), (anti, 1)])
    if kind == "L":
        return HamPolynomial([(cross, ExactComplex(0, 1)), (anti, ExactComplex(0, -1))])
    raise ValueError(f"unknown observable kind {kind!r}; expected one of M, J, L, K")


def solve_homological(P: HamPolynomial):
    """Split a quartic perturbation into generator and resonant part.

    Returns ``(chi, Z4)`` with ``{chi, H0} + Z4 = P`` exactly, where Z4
    keeps the zero-divisor terms of P and every other term ``c * m`` of
    divisor ``W`` becomes ``(i c / W) * m`` in chi.
    """
    moms = set()
    chi, z4 = {}, {}
    for (xi, eta), c in P.terms():
        if len(xi) + len(eta) != 4:
            raise ValueError(f"term xi={xi} eta={eta} is not of degree 4")
        moms.add(abs(momentum(xi, eta)))
        w = divisor(xi, eta)
        if w == 0:
            z4[(xi, eta)] = c
            continue
        if abs(w) < 1:
            raise ArithmeticError(f"divisor {w} below 1 for xi={xi} eta={eta}")
        chi[(xi, eta)] = c * ExactComplex(0, Fraction(1, w))
    if len(moms) > 1 or 0 in moms:
        raise ValueError(f"perturbation support must have momentum +-2p, found {sorted(moms)}")
    return HamPolynomial._trusted(chi), HamPolynomial._trusted(z4)


_PAIR_KEYS = {((-1, 2), (-2, 1)), ((-2, 1), (-1, 2))}


def _count_pm1(xi, eta) -> int:
    return sum(1 for j in xi + eta if j in (1, -1))


class Z4Parts(NamedTuple):
    effective: HamPolynomial  # Z41
    pair: HamPolynomial  # Z42
    rest: HamPolynomial  # Z43


def effective_closed_form(bound_N: int) -> HamPolynomial:
    """``2 K_1 (2 sum_{p != +-1} I_p + I_1 + I_{-1})`` as printed, truncated to |p| <= N."""
    weights = total_action(bound_N).scale(2) - quadratic_observable("J", 1)
    return (quadratic_observable("K", 1) * weights).scale(2)


def pair_closed_form() -> HamPolynomial:
    """``4 (xi_2 xi_-1 eta_-2 eta_1 + xi_-2 xi_1 eta_2 eta_-1)`` as printed."""
    return HamPolynomial([(((2, -1), (-2, 1)), 4), (((-2, 1), (2, -1)), 4)])


def proportionality(poly: HamPolynomial, reference: HamPolynomial) -> Optional[ExactComplex]:
    """Return ``k`` with ``poly == k * reference`` exactly, or None."""
    if reference.is_zero():
        return ExactComplex(0) if poly.is_zero() else None
    if set(poly._terms) != set(reference._terms):
        return None
    key = next(iter(reference))
    k = poly._terms[key] / reference._terms[key]
    return k if poly == reference.scale(k) else None


def _by_momentum(poly: HamPolynomial):
    out = {}
    for (xi, eta), c in poly.terms():
        out.setdefault(momentum(xi, eta), {})[(xi, eta)] = c
    return {m: HamPolynomial._trusted(t) for m, t in out.items()}


def classify_Z4(Z4: HamPolynomial) -> Z4Parts:
    """Partition the p = 1 normal form by how many slots carry mode +1 or -1.

    Terms with at most one such slot form Z43; the two ``(+-2, -+1, -+2, +-1)``
    monomials form Z42; every other term goes to Z41, which is then checked
    against the printed closed form, one normalization constant per momentum
    sector, shared with Z42.
    """
    z41, z42, z43 = {}, {}, {}
    for (xi, eta), c in Z4.terms():
        if abs(momentum(xi, eta)) != 2:
            raise ClassificationError(f"xi={xi} eta={eta} is not a p = 1 term")
        n = _count_pm1(xi, eta)
        if n <= 1:
            z43[(xi, eta)] = c
        elif (xi, eta) in _PAIR_KEYS:
            z42[(xi, eta)] = c
        else:
            z41[(xi, eta)] = c
    Z41, Z42, Z43 = (HamPolynomial._trusted(t) for t in (z41, z42, z43))
    if _PAIR_KEYS & set(z41):
        raise ClassificationError("a pair-family monomial was assigned to Z41")
    bound = Z4.max_index()
    ref41 = _by_momentum(effective_closed_form(bound))
    ref42 = _by_momentum(pair_closed_form())
    got41 = _by_momentum(Z41)
    got42 = _by_momentum(Z42)
    for m in (2, -2):
        part = got41.get(m, HamPolynomial())
        if part.is_zero() and got42.get(m, HamPolynomial()).is_zero():
            continue
        k = proportionality(part, ref41[m])
        if k is None:
            raise ClassificationError(
                f"Z41 momentum {m} sector is not proportional to the closed form"
            )
        pair = got42.get(m, HamPolynomial())
        if bound >= 2 and pair != ref42[m].scale(k):
            raise ClassificationError(
                f"Z42 momentum {m} sector does not share the Z41 normalization {k!r}"
            )
    return Z4Parts(Z41, Z42, Z43)


# numerical surface ---------------------------------------------------------

def _compiled(F, N):
    if isinstance(F, CompiledPolynomial):
        if F.N != N:
            raise ValueError(f"compiled for N={F.N}, state has N={N}")
        return F
    return CompiledPolynomial(F, N)


def evaluate(F, state) -> complex:
    """Value of F at ``(xi, conj xi)``; raises IndexError naming a monomial beyond the truncation."""
    N = truncation_of(state)
    return _compiled(F, N)(amplitudes_of(state))


def vector_field(F, state) -> np.ndarray:
    """``-i dF/deta_j`` at ``eta = conj(xi)``, one entry per mode |j| <= N."""
    N = truncation_of(state)
    return _compiled(F, N).vector_field(amplitudes_of(state))


def _weights(N, rho):
    return np.exp(rho * np.abs(np.arange(-N, N + 1)))


def weighted_norm(state, rho: float) -> float:
    """``sum_j e^{rho|j|} (|xi_j| + |eta_j|)`` with ``eta = conj(xi)``."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    z = amplitudes_of(state)
    N = (z.size - 1) // 2
    return float(2.0 * np.sum(_weights(N, rho) * np.abs(z)))


def vector_field_norm(F, state, rho: float) -> float:
    """``sum_k e^{rho|k|} (|dF/dxi_k| + |dF/deta_k|)``."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    z = amplitudes_of(state)
    N = (z.size - 1) // 2
    g_xi, g_eta = _compiled(F, N).gradient(z)
    return float(np.sum(_weights(N, rho) * (np.abs(g_xi) + np.abs(g_eta))))


def vector_field_bound(F: HamPolynomial, state, rho: float) -> float:
    """Right-hand side ``4 M e^{2 rho} ||z||_rho^3`` with M the largest coefficient modulus."""
    return 4.0 * F.max_coefficient_modulus() * math.exp(2 * rho) * weighted_norm(state, rho) ** 3
