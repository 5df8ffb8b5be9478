"""Core algebra: construction, star product, involution, integrals."""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grdm.algebra import (
    GrassmannElement,
    Monomial,
    change_generators,
    elements_close,
    expectation,
    involution,
    make_element,
    max_coeff_difference,
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
from _reference import star_reference
from conftest import rand_element, random_unitary


class TestConstruction:
    def test_unit_element(self):
        el = make_element(2, [((), (), 1.0)])
        assert el.terms == {Monomial(0, 0): 1 + 0j}

    def test_duplicate_monomials_merge(self):
        el = make_element(2, [((1,), (1,), 1), ((1,), (1,), 1)])
        assert el.coefficient((1,), (1,)) == 2

    def test_complex_single_term(self):
        el = make_element(3, [((1, 2), (3,), 1j)])
        assert el.coefficient((1, 2), (3,)) == 1j
        assert len(el.terms) == 1

    def test_index_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            make_element(2, [((3,), (), 1.0)])

    def test_bad_generator_count(self):
        with pytest.raises(ValueError):
            make_element(0, [])
        with pytest.raises(ValueError, match="cap"):
            make_element(11, [])

    def test_cancellation_drops_term(self):
        el = make_element(2, [((1,), (), 1.0), ((1,), (), -1.0)])
        assert el.terms == {}

    def test_prune_relative(self):
        el = make_element(2, [((), (), 1.0), ((1,), (1,), 1e-20)])
        assert len(prune(el).terms) == 1
        assert len(el.terms) == 2  # prune is explicit, not implicit


class TestStarProduct:
    def test_psi_psi_disjoint(self):
        # p_i * p_j is the plain ordered monomial
        out = star(psi(1, 3), psi(2, 3))
        assert out.terms == {Monomial(0, 0b011): 1 + 0j}
        out = star(psi(2, 3), psi(1, 3))
        assert out.terms == {Monomial(0, 0b011): -1 + 0j}

    def test_psi_psibar_same_mode(self):
        out = star(psi(2, 3), psibar(2, 3))
        assert out.terms == {Monomial(0, 0): 1 + 0j, Monomial(2, 2): -1 + 0j}

    def test_psibar_psi_any_modes(self):
        for i, j in product(range(1, 4), repeat=2):
            out = star(psibar(i, 3), psi(j, 3))
            assert out.terms == {Monomial(1 << (i - 1), 1 << (j - 1)): 1 + 0j}

    def test_unit_law(self, rng):
        for m in (1, 2, 3):
            a = rand_element(rng, m)
            assert elements_close(star(unit(m), a), a, 1e-14)
            assert elements_close(star(a, unit(m)), a, 1e-14)

    def test_projector_idempotent_under_star(self):
        n1 = star(psibar(1, 2), psi(1, 2))
        assert elements_close(star(n1, n1), n1, 1e-14)

    def test_car_exhaustive(self):
        for m in range(1, 5):
            for i, j in product(range(1, m + 1), repeat=2):
                assert (star(psi(i, m), psi(j, m)) + star(psi(j, m), psi(i, m))).terms == {}
                assert (star(psibar(i, m), psibar(j, m)) + star(psibar(j, m), psibar(i, m))).terms == {}
                anti = star(psibar(i, m), psi(j, m)) + star(psi(j, m), psibar(i, m))
                want = unit(m) if i == j else zero(m)
                assert elements_close(anti, want, 0.0)

    def test_matches_integral_definition_exhaustive_m2(self):
        m = 2
        for I, J, K, L in product(range(4), repeat=4):
            a, b = Monomial(I, J), Monomial(K, L)
            fast = star_monomials(a, b, m)
            slow = star_reference(monomial_element(a, m), monomial_element(b, m))
            assert max_coeff_difference(fast, slow) == 0.0

    def test_matches_integral_definition_random_m3(self, rng):
        for _ in range(20):
            a, b = rand_element(rng, 3), rand_element(rng, 3)
            assert max_coeff_difference(star(a, b), star_reference(a, b)) < 1e-12

    def test_associativity(self, rng):
        for m in (2, 3):
            for _ in range(50):
                a, b, c = (rand_element(rng, m) for _ in range(3))
                lhs = star(star(a, b), c)
                rhs = star(a, star(b, c))
                scale = max(lhs.norm_max(), rhs.norm_max(), 1.0)
                assert max_coeff_difference(lhs, rhs) <= 1e-12 * scale

    def test_mismatched_m(self, rng):
        with pytest.raises(ValueError, match="mismatched"):
            star(unit(2), unit(3))

    def test_star_cap(self):
        with pytest.raises(ValueError, match="cap"):
            star(unit(7), unit(7))


class TestInvolution:
    def test_single_term_swap(self):
        el = make_element(3, [((1,), (2,), 2 + 3j)])
        out = involution(el)
        assert out.terms == {Monomial(0b010, 0b001): 2 - 3j}

    def test_double_bar_sign(self):
        # (pbar1 pbar2)* = p2 p1 = -p1 p2
        el = make_element(2, [((1, 2), (), 1.0)])
        assert involution(el).terms == {Monomial(0, 0b11): -1 + 0j}

    def test_involutive(self, rng):
        for _ in range(20):
            a = rand_element(rng, 3)
            assert max_coeff_difference(involution(involution(a)), a) < 1e-14

    def test_antihomomorphism(self, rng):
        for _ in range(50):
            a, b = rand_element(rng, 3), rand_element(rng, 3)
            lhs = involution(star(a, b))
            rhs = star(involution(b), involution(a))
            scale = max(lhs.norm_max(), 1.0)
            assert max_coeff_difference(lhs, rhs) <= 1e-12 * scale


class TestIntegrals:
    def test_raw_integral_no_top(self):
        for m in (1, 2, 3):
            assert raw_integral(unit(m)) == 0

    def test_raw_integral_top_sign_pinned_by_trace(self):
        # m = 1 top monomial: the sign convention must give trace 1 for the
        # occupied-mode projector through the weighted integral
        el = monomial_element(Monomial(1, 1), 1)
        assert raw_integral(el) == -1
        assert trace_integral(el) == 1

    def test_raw_integral_linearity(self, rng):
        m = 2
        top = monomial_element(Monomial(3, 3), m)
        lower = rand_element(rng, m)
        lower = GrassmannElement(m, {k: c for k, c in lower.terms.items() if k != Monomial(3, 3)})
        alpha = 2.5 - 1j
        combined = alpha * top + lower
        assert abs(raw_integral(combined) - alpha * raw_integral(top)) < 1e-14

    def test_trace_identity_element(self):
        assert trace_integral(unit(2)) == 4

    def test_trace_two_body_diagonal_m3(self):
        el = monomial_element(Monomial(0b011, 0b011), 3)
        assert trace_integral(el) == -2

    def test_trace_off_diagonal(self):
        assert trace_integral(make_element(2, [((1,), (2,), 1.0)])) == 0

    def test_trace_anchor_all_monomials(self):
        for m in range(1, 5):
            for mask in range(1 << m):
                k = mask.bit_count()
                want = (-1) ** (k * (k - 1) // 2) * 2 ** (m - k)
                assert trace_integral(monomial_element(Monomial(mask, mask), m)) == want

    def test_trace_equals_weighted_raw(self, rng):
        for m in (1, 2, 3, 4):
            w = trace_weight(m)
            for _ in range(10):
                a = rand_element(rng, m)
                lhs = trace_integral(a)
                rhs = (-1) ** m * raw_integral(multiply(a, w))
                assert abs(lhs - rhs) < 1e-12

    def test_pair_integral_examples(self):
        n1 = Monomial(1, 1)
        assert pair_integral_closed_form(n1, n1, 2) == 2
        hop = Monomial(0b01, 0b10)
        assert pair_integral_closed_form(hop, hop, 2) == 0
        one = Monomial(0, 0)
        assert pair_integral_closed_form(one, one, 2) == 4

    def test_pair_integral_exhaustive(self):
        for m in (1, 2, 3):
            for I, J, K, L in product(range(1 << m), repeat=4):
                a, b = Monomial(I, J), Monomial(K, L)
                closed = pair_integral_closed_form(a, b, m)
                direct = trace_integral(star_monomials(a, b, m))
                assert closed == direct

    def test_star_trace_equals_trace_of_star(self, rng):
        for _ in range(30):
            a, b = rand_element(rng, 3), rand_element(rng, 3)
            assert abs(star_trace(a, b) - trace_integral(star(a, b))) < 1e-12

    def test_cyclicity(self, rng):
        for _ in range(50):
            a, b = rand_element(rng, 3), rand_element(rng, 3)
            assert abs(star_trace(a, b) - star_trace(b, a)) < 1e-11
        for _ in range(20):
            a, b, c = (rand_element(rng, 3) for _ in range(3))
            lhs = trace_integral(star(star(a, b), c))
            rhs = trace_integral(star(star(b, c), a))
            assert abs(lhs - rhs) < 1e-10

    def test_positivity(self, rng):
        for m in (2, 3, 4):
            for _ in range(40):
                a = rand_element(rng, m)
                val = star_trace(involution(a), a)
                scale = 1.0 + sum(abs(c) ** 2 for c in a.terms.values()) * 2 ** m
                assert val.real >= -1e-10 * scale
                assert abs(val.imag) <= 1e-10 * scale


class TestExpectation:
    def test_normalized_unit(self):
        dens = make_element(2, [((), (), 0.25)])  # maximally mixed
        assert abs(expectation(dens, unit(2)) - 1.0) < 1e-14

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="not normalized"):
            expectation(unit(2), unit(2))

    def test_cyclic_expectation(self, rng):
        dens = make_element(2, [((), (), 0.25)])
        for _ in range(20):
            a, b = rand_element(rng, 2), rand_element(rng, 2)
            lhs = expectation(dens, star(a, b))
            rhs = expectation(dens, star(b, a))
            assert abs(lhs - rhs) < 1e-10


class TestChangeGenerators:
    def test_identity(self, rng):
        a = rand_element(rng, 3)
        assert max_coeff_difference(change_generators(a, np.eye(3)), a) < 1e-14

    def test_permutation_relabels(self):
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        el = make_element(2, [((1,), (1,), 1.0)])
        out = change_generators(el, swap)
        assert out.terms == {Monomial(0b10, 0b10): 1 + 0j}

    def test_trace_invariance(self, rng):
        for _ in range(20):
            u = random_unitary(rng, 3)
            a = rand_element(rng, 3)
            assert abs(trace_integral(change_generators(a, u)) - trace_integral(a)) < 1e-10
            assert abs(raw_integral(change_generators(a, u)) - raw_integral(a)) < 1e-10

    def test_composition(self, rng):
        a = rand_element(rng, 3)
        u, v = random_unitary(rng, 3), random_unitary(rng, 3)
        lhs = change_generators(change_generators(a, u), v)
        rhs = change_generators(a, u @ v)
        assert max_coeff_difference(lhs, rhs) < 1e-10

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError, match="unitary"):
            change_generators(unit(2), np.array([[1.0, 0.1], [0.0, 1.0]]))

    def test_star_compatible(self, rng):
        # substitution is an algebra map: CG(a * b) = CG(a) * CG(b)
        u = random_unitary(rng, 3)
        a, b = rand_element(rng, 3), rand_element(rng, 3)
        lhs = change_generators(star(a, b), u)
        rhs = star(change_generators(a, u), change_generators(b, u))
        scale = max(lhs.norm_max(), 1.0)
        assert max_coeff_difference(lhs, rhs) <= 1e-11 * scale


small_coeff = st.complex_numbers(min_magnitude=0.0, max_magnitude=4.0,
                                 allow_nan=False, allow_infinity=False)


@st.composite
def elements(draw, m=None):
    if m is None:
        m = draw(st.integers(min_value=1, max_value=3))
    nterms = draw(st.integers(min_value=0, max_value=6))
    terms = []
    for _ in range(nterms):
        bar = draw(st.integers(min_value=0, max_value=(1 << m) - 1))
        ub = draw(st.integers(min_value=0, max_value=(1 << m) - 1))
        terms.append((Monomial(bar, ub), draw(small_coeff)))
    out = {}
    for key, c in terms:
        out[key] = out.get(key, 0j) + c
    return GrassmannElement(m, {k: c for k, c in out.items() if c != 0})


@settings(max_examples=60, deadline=None)
@given(elements())
def test_hypothesis_involution_is_involutive(a):
    scale = max(a.norm_max(), 1.0)
    assert max_coeff_difference(involution(involution(a)), a) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(elements(m=2), elements(m=2), elements(m=2))
def test_hypothesis_associativity(a, b, c):
    lhs = star(star(a, b), c)
    rhs = star(a, star(b, c))
    scale = max(lhs.norm_max(), rhs.norm_max(), 1.0)
    assert max_coeff_difference(lhs, rhs) <= 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(elements(m=2), elements(m=2))
def test_hypothesis_trace_cyclicity(a, b):
    scale = (1.0 + a.norm_max()) * (1.0 + b.norm_max())
    assert abs(star_trace(a, b) - star_trace(b, a)) <= 1e-10 * scale * 4
