"""Grassmann-integral toolkit for fermionic reduced density matrices.

Star-product algebra over anticommuting generator pairs, a brute-force
Fock-space oracle, extraction of one- and two-body density matrices,
G/P/Q/T1/T2 representability checks, and quasifree state construction.
"""

from .algebra import (
    ELEMENT_CAP,
    STAR_CAP,
    GrassmannElement,
    Monomial,
    change_generators,
    expectation,
    involution,
    make_element,
    monomial_element,
    multiply,
    pair_integral_closed_form,
    prune,
    psi,
    psibar,
    raw_integral,
    star,
    star_monomials,
    star_trace,
    trace_integral,
    trace_weight,
    unit,
    zero,
)
from .conditions import (
    ConditionReport,
    check_G,
    check_P,
    check_Q,
    check_T1,
    check_T1_full,
    check_T2_full,
    check_T2_generalized,
    condition_battery,
    fuzz_conditions,
    order_n_check,
    pdm1_from_density,
    pdm2_from_density,
    quadratic_form_matrix,
)
from .fock import (
    annihilation,
    contraction_check,
    creation,
    from_operator,
    pdms_from_rho,
    random_density,
    to_operator,
)
from .quasifree import (
    QuasifreeSpec,
    build_quasifree,
    mode_product_expansion,
    verify_quasifree,
    wick_expectation,
)

__version__ = "0.1.0"
