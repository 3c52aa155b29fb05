"""Computations with free pro-ell groups, their group rings and representations.

The group ring of a free pro-ell group is modelled through the Magnus
embedding as noncommutative power series over ``Q_ell``.  On top of that the
package provides the weight filtration, Galois-type actions on the series
ring, eigenvector lifting with exact denominator tracking, and unipotence
tests for matrix representations.
"""

from .eigenlift import (
    CapViolation,
    EigenLift,
    EigenvalueCollision,
    HypothesisUnmet,
    PeriodRecord,
    c_bound,
    check_semisimple,
    dense_eigenbasis,
    integral_period,
    lift_eigenvector,
    r_alpha,
    v_bound,
    vl_qpow,
)
from .filtration import (
    GaussParams,
    check_w_iadic_inclusions,
    convergence_report,
    gauss_norm,
    iadic_valuation,
)
from .galois import Endomorphism, action_matrix, apply, graded_matrix, sigma_cyclotomic, sigma_ihara
from .ncseries import Alphabet, GroupWord, NcSeries, magnus_embed
from .padics import PadicScalar, PrecisionError, padic, working_precision
from .reps import (
    BoundSpec,
    MatrixRep,
    bound_N,
    certify_pipeline,
    evaluate_series,
    genus2_fixture,
    is_trivial_mod,
    is_unipotent,
    socle_filtration,
)

__version__ = "0.1.0"
