from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from nlsbeat import dynamics
from nlsbeat.harness.scenarios import brute_force_resonant, normal_form, paper_resonant_families
from nlsbeat.normal_form import (
    ClassificationError,
    ResonantQuadruple,
    build_perturbation,
    classify_Z4,
    effective_closed_form,
    enumerate_resonant,
    evaluate,
    free_hamiltonian,
    pair_closed_form,
    proportionality,
    quadratic_observable,
    solve_homological,
    total_action,
    vector_field,
    vector_field_bound,
    vector_field_norm,
    weighted_norm,
)
from nlsbeat.polynomial import ExactComplex, HamPolynomial, divisor, momentum, monomial, poisson_bracket

FIXTURES = Path(__file__).parent / "fixtures"
HALF = ExactComplex(Fraction(1, 2))


def _random_state(rng, N, scale=0.3):
    return scale * (rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1))


# resonances ------------------------------------------------------------------

def test_resonant_examples():
    found = set(enumerate_resonant(1, 10))
    for q in range(-10, 11):
        xi, eta = sorted((1, q)), sorted((-1, q))
        assert ResonantQuadruple(*xi, *eta, 2) in found
    assert ResonantQuadruple(-1, 2, -2, 1, 0 + 2) in found


def test_resonant_matches_brute_force():
    for p, N in ((1, 12), (2, 12), (3, 9)):
        assert enumerate_resonant(p, N) == brute_force_resonant(p, N)


def test_resonant_order_and_uniqueness():
    out = enumerate_resonant(1, 15)
    assert out == sorted(set(out))
    for q in out:
        assert abs(q.momentum) == 2
        assert divisor(q.xi, q.eta) == 0


def test_resonant_pm1_families_small_bound():
    def touches(q):
        return any(j in (1, -1) for j in (q.j1, q.j2, q.l1, q.l2))

    got = [q for q in enumerate_resonant(1, 12) if touches(q)]
    assert got == paper_resonant_families(12)


def test_quadruple_validation():
    with pytest.raises(ValueError):
        ResonantQuadruple(2, 1, 0, 0, 3)
    with pytest.raises(ValueError):
        ResonantQuadruple(0, 2, 0, 0, 2)


# perturbation ----------------------------------------------------------------

def test_perturbation_normalization_example():
    P = build_perturbation(1, 1, 2, 0, 4)
    assert P[((1, 1), (-1, 1))] == 1
    assert P[((-1, -1), (-1, 1))] == 1
    assert P.is_real()
    assert {abs(momentum(*k)) for k in P} == {2}


def test_perturbation_matches_quadrature(rng):
    # P(z) must equal (sign/2) * mean_x g |psi|^4 for every sign and weight
    N = 5
    z = _random_state(rng, N)
    for sign, a, b in ((1, 2, 0), (-1, Fraction(3, 2), Fraction(-1, 2)), (1, 0, 1)):
        P = build_perturbation(1, sign, a, b, N)
        cfg = dynamics.SimConfig(T=1.0, N=N, sign=sign, a=float(a), b=float(b))
        quad = dynamics.energy(z, cfg) - np.sum(np.arange(-N, N + 1) ** 2 * np.abs(z) ** 2)
        assert abs(evaluate(P, z) - quad) < 1e-13


def test_perturbation_vector_field_is_galerkin_nonlinearity(rng):
    N = 5
    z = _random_state(rng, N)
    P = build_perturbation(2, -1, 1, 3, N)
    cfg = dynamics.SimConfig(T=1.0, N=N, sign=-1, p=2, a=1.0, b=3.0)
    assert np.abs(vector_field(P, z) + 1j * dynamics.nonlinear_coefficients(z, cfg)).max() < 1e-13


def test_perturbation_rejects_small_bound():
    with pytest.raises(ValueError, match="bound_N"):
        build_perturbation(3, 1, 2, 0, 2)


# homological equation --------------------------------------------------------

def test_homological_residual_zero(nf8):
    P, chi, Z4 = nf8
    assert (poisson_bracket(chi, free_hamiltonian(8)) + Z4 - P).is_zero()
    assert poisson_bracket(free_hamiltonian(8), Z4).is_zero()


def test_chi_coefficients(nf8):
    P, chi, Z4 = nf8
    key = ((2, 2), (1, 1))  # momentum 2, divisor 4 + 4 - 1 - 1 = 6
    assert chi[key] == P[key] * ExactComplex(0, Fraction(1, 6))
    for k in Z4:
        assert divisor(*k) == 0
    assert set(chi).isdisjoint(Z4)


def test_homological_guards():
    with pytest.raises(ValueError, match="degree 4"):
        solve_homological(monomial([1], [1]))
    mixed = monomial([1, 1], [0, 0]) + monomial([2, 2], [0, 0])
    with pytest.raises(ValueError, match="momentum"):
        solve_homological(mixed)


def test_general_weights_normal_form_closes():
    P, chi, Z4 = normal_form(1, -1, Fraction(3, 2), Fraction(1, 2), 6)
    assert (poisson_bracket(chi, free_hamiltonian(6)) + Z4 - P).is_zero()
    assert (P.conjugate() == P) and Z4.is_real()


# classification --------------------------------------------------------------

def test_z4_classification(nf8):
    parts = classify_Z4(nf8[2])
    assert proportionality(parts.effective, effective_closed_form(8)) == HALF
    assert proportionality(parts.pair, pair_closed_form()) == HALF
    assert parts.effective + parts.pair + parts.rest == nf8[2]
    for p in range(0, 9):
        Jp = quadratic_observable("J", p)
        assert poisson_bracket(Jp, parts.effective).is_zero()
        assert poisson_bracket(Jp, parts.pair).is_zero()


def test_z41_coefficient_examples(nf8):
    Z41 = classify_Z4(nf8[2]).effective
    # xi_1 xi_1 eta_-1 eta_1 carries weight 1, foreign actions weight 2
    assert Z41[((1, 1), (-1, 1))] == 1
    assert Z41[((1, 3), (-1, 3))] == 2
    assert Z41[((0, 1), (-1, 0))] == 2


def test_classification_rejects_inconsistent_input(nf8):
    Z4 = nf8[2]
    broken = Z4 + monomial([1, 3], [-1, 3], 1)
    with pytest.raises(ClassificationError):
        classify_Z4(broken)
    with pytest.raises(ClassificationError):
        classify_Z4(monomial([2, 2], [0, 0]))


def test_m1_bracket_regression():
    N = 6
    parts = classify_Z4(normal_form(1, 1, 2, 0, N)[2])
    M, K, L = (quadratic_observable(k, 1) for k in "MKL")
    K2, L2 = quadratic_observable("K", 2), quadratic_observable("L", 2)
    J, J1 = total_action(N), quadratic_observable("J", 1)
    B = poisson_bracket(M, parts.effective + parts.pair)
    assert B == HamPolynomial.loads((FIXTURES / "m1_bracket_N6.txt").read_text())
    # exact: 2 J L1 + 2 L1 sum_{p != +-1} I_p + 2 (L1 K2 - K1 L2)
    exact = (J * L).scale(2) + (L * (J - J1)).scale(2) + (L * K2 - K * L2).scale(2)
    assert B == exact
    # leading form (foreign actions dropped) differs only by the foreign-action term
    leading = (J * L).scale(2) + (L * K2 - K * L2).scale(2)
    assert B - leading == (L * (J - J1)).scale(2)
    assert poisson_bracket(M, parts.rest).is_zero()


def test_cos4x_no_order4_family():
    Z4 = normal_form(2, 1, 2, 0, 8)[2]
    for q in range(-8, 9):
        for s in (1, -1):
            assert ((tuple(sorted((s, q))), tuple(sorted((-s, q))))) not in Z4
    # the m = 4 square terms survive; the cos+sin datum is stationary for them
    assert Z4[((1, 1), (-1, -1))] == Z4[((-1, -1), (1, 1))]


# vector field bound ----------------------------------------------------------

@pytest.mark.parametrize("rho", [0.0, 0.5])
def test_vector_field_bound(rng, rho):
    N = 6
    P = normal_form(1, 1, 2, 0, N)[0]
    for _ in range(20):
        z = _random_state(rng, N, scale=rng.uniform(0.01, 1.0))
        assert vector_field_norm(P, z, rho) <= vector_field_bound(P, z, rho)


def test_vector_field_norm_is_cubic(rng):
    N = 4
    P = normal_form(1, 1, 2, 0, N)[0]
    z = _random_state(rng, N)
    r = vector_field_norm(P, 2 * z, 0.3) / vector_field_norm(P, z, 0.3)
    assert r == pytest.approx(8.0, rel=1e-12)
    assert weighted_norm(2 * z, 0.3) == pytest.approx(2 * weighted_norm(z, 0.3))
    with pytest.raises(ValueError):
        weighted_norm(z, -1.0)


def test_evaluate_out_of_truncation():
    with pytest.raises(IndexError, match="exceeds truncation"):
        evaluate(monomial([5], [5]), np.zeros(5))
