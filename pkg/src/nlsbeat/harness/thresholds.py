"""Pinned verification thresholds.

Provenance tags: ``THEOREM`` values restate the beating law or the
concentration lemma; ``ORACLE`` values were set from reference runs of the
simulator (``nlsbeat verify <scenario> --calibrate`` reruns those oracles
and prints observed margins next to each threshold).
"""
import math

from ..dynamics import DEFAULT_DT

# beating law, criterion-style checks (relative to eps^2 unless noted)
BEATING_SUP_CEILING = 0.5           # ORACLE sanity ceiling; observed ~6e-4 at eps=0.2
BEATING_SLOPE_MIN = 2.0             # THEOREM exponent 9/4 with unknown constant
SUM_SLOPE_MIN = 2.5                 # THEOREM s = eps^2 + O(eps^3)
REDUCED_SLOPE_MIN = 2.2             # THEOREM remainder stream O(eps^{9/4})
REDUCED_VS_PREDICTION = 0.05        # ORACLE reduced model vs rotation law

# concentration lemma
FOREIGN_ACTION_FACTOR = 1.0         # THEOREM J_p <= eps^3 for p != 1
PAIR_ACTION_FACTOR = 4.0            # THEOREM I_{+-1} <= 4 eps^2

# frequency
FREQUENCY_REL_TOL = 0.03            # ORACLE at eps=0.05 over two periods
FREQ_SHIFT_BRACKET = (0.5, 2.0)     # ORACLE bracket around eps^4
SIGN_SYMMETRY_TOL = 1e-10           # ORACLE absolute, d(t) vs -d(t)
SYNTHETIC_FIT_REL_TOL = 1e-6

# controls
CONTROL_CEILING = 1e-3              # ORACLE sup|d| relative to eps^2; observed ~1e-12

# conservation and cross-checks
MASS_DRIFT_MAX = 1e-9
ENERGY_DRIFT_MAX = 1e-6
INTEGRATOR_AGREEMENT = 1e-8         # ORACLE mode-wise sup difference
INTEGRATOR_PROBE_T = 100.0
INTEGRATOR_PROBE_DT = DEFAULT_DT / 8   # ORACLE split-step error ~ dt^2; 1.1e-8 at DEFAULT_DT/4
IDENTITY_REL_TOL = 1e-12
ODD_MODE_TOL = 1e-13                # relative to eps
TRUNCATION_TOL = 1e-10              # ORACLE N=16 vs N=32

# algebra
NORMAL_FORM_BOUND = 20
RESONANCE_BOUND = 100
VECTOR_FIELD_SAMPLES = 100
VECTOR_FIELD_RHOS = (0.0, 0.5)


def theorem_window(epsilon: float) -> float:
    return epsilon ** -2.25


def beating_period(epsilon: float) -> float:
    return math.pi / epsilon ** 2
