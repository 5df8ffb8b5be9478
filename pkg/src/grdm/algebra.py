"""Exact arithmetic on a finite Grassmann algebra with conjugate generator pairs.

The algebra over anticommuting generators {pbar_1..pbar_m, p_1..p_m} is spanned
by normal-ordered monomials: all conjugated (barred) generators to the left,
both groups in ascending index order.  On top of the plain wedge product the
module provides the star product, which mirrors operator composition on the
2^m-dimensional Fock space, the involution, and the two integration
functionals (top-coefficient extraction and the weighted trace form).

Sign bookkeeping is done on bitmasks with popcount-prefix counting, so every
coefficient produced from integer inputs is an exact signed power of two.

Elements are immutable after construction and every operation is a pure
function; no shared mutable state exists apart from an internal memo of
monomial star products, which is append-only and keyed by value.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

ELEMENT_CAP = 10  # monomial-pair fast paths stay exact up to here
STAR_CAP = 6      # full-element star products; dense pairing cost grows as 16**m
PRUNE_REL_TOL = 1e-14


class Monomial(NamedTuple):
    """Normal-ordered basis monomial, stored as a pair of index bitmasks.

    Bit i-1 of each mask flags generator index i (indices are 1-based in the
    public API).  `bar` collects the conjugated generators, `unbar` the plain
    ones.
    """

    bar: int
    unbar: int

    @classmethod
    def from_indices(cls, bar: Iterable[int], unbar: Iterable[int], m: int) -> "Monomial":
        return cls(_mask(bar, m), _mask(unbar, m))

    def bar_indices(self) -> tuple[int, ...]:
        return _indices(self.bar)

    def unbar_indices(self) -> tuple[int, ...]:
        return _indices(self.unbar)


def _mask(indices: Iterable[int], m: int) -> int:
    mask = 0
    for i in indices:
        if not 1 <= i <= m:
            raise ValueError(f"generator index {i} outside [1, {m}]")
        mask |= 1 << (i - 1)
    return mask


def _indices(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return tuple(out)


def _merge_sign(a: int, b: int) -> int:
    """Sign for sorting the concatenation of two disjoint ascending blocks."""
    par = 0
    y = b
    while y:
        low = y & -y
        par ^= (a >> low.bit_length()).bit_count() & 1
        y ^= low
    return -1 if par else 1


def _mono_mul(bar1: int, ub1: int, bar2: int, ub2: int):
    """Plain (wedge) product of two canonical monomials; None when it vanishes."""
    if bar1 & bar2 or ub1 & ub2:
        return None
    sign = -1 if (ub1.bit_count() & bar2.bit_count() & 1) else 1
    sign *= _merge_sign(bar1, bar2) * _merge_sign(ub1, ub2)
    return sign, bar1 | bar2, ub1 | ub2


def _half_pair_sign(n: int) -> int:
    """(-1)**(n*(n-1)/2)."""
    return -1 if (n * (n - 1) // 2) & 1 else 1


@dataclass(frozen=True)
class GrassmannElement:
    """Sparse linear combination of normal-ordered monomials.

    `terms` maps Monomial -> complex coefficient and is treated as immutable.
    """

    m: int
    terms: dict = field(default_factory=dict)

    def __add__(self, other: "GrassmannElement") -> "GrassmannElement":
        _same_m(self, other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            _acc(out, k, c)
        return GrassmannElement(self.m, out)

    def __sub__(self, other: "GrassmannElement") -> "GrassmannElement":
        return self + (-1.0) * other

    def __neg__(self) -> "GrassmannElement":
        return (-1.0) * self

    def __mul__(self, scalar) -> "GrassmannElement":
        c = complex(scalar)
        if c == 0:
            return GrassmannElement(self.m, {})
        return GrassmannElement(self.m, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def coefficient(self, bar: Iterable[int], unbar: Iterable[int]) -> complex:
        return self.terms.get(Monomial.from_indices(bar, unbar, self.m), 0j)

    def norm_max(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)


def _acc(d: dict, key: Monomial, val: complex) -> None:
    c = d.get(key)
    if c is None:
        d[key] = val
    else:
        c = c + val
        if c == 0:
            del d[key]
        else:
            d[key] = c


def _same_m(a: GrassmannElement, b: GrassmannElement) -> None:
    if a.m != b.m:
        raise ValueError(f"mismatched generator counts: {a.m} vs {b.m}")


def _check_m(m: int, cap: int) -> None:
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"generator count must be a positive integer, got {m!r}")
    if m > cap:
        raise ValueError(f"generator count {m} exceeds cap {cap}")


def make_element(m: int, terms: Iterable[tuple[Iterable[int], Iterable[int], complex]]) -> GrassmannElement:
    """Build an element from (bar indices, unbar indices, coefficient) triples.

    Indices are 1-based and must lie in [1, m]; duplicate monomials have their
    coefficients summed.
    """
    _check_m(m, ELEMENT_CAP)
    out: dict = {}
    for bar, unbar, coeff in terms:
        _acc(out, Monomial.from_indices(bar, unbar, m), complex(coeff))
    return GrassmannElement(m, out)


def zero(m: int) -> GrassmannElement:
    _check_m(m, ELEMENT_CAP)
    return GrassmannElement(m, {})


def unit(m: int) -> GrassmannElement:
    _check_m(m, ELEMENT_CAP)
    return GrassmannElement(m, {Monomial(0, 0): 1 + 0j})


def psi(i: int, m: int) -> GrassmannElement:
    """Single plain generator p_i as an element."""
    return make_element(m, [((), (i,), 1.0)])


def psibar(i: int, m: int) -> GrassmannElement:
    """Single conjugated generator pbar_i as an element."""
    return make_element(m, [((i,), (), 1.0)])


def monomial_element(mono: Monomial, m: int, coeff: complex = 1.0) -> GrassmannElement:
    _check_m(m, ELEMENT_CAP)
    top = (1 << m) - 1
    if mono.bar & ~top or mono.unbar & ~top:
        raise ValueError("monomial references generators outside [1, m]")
    return GrassmannElement(m, {mono: complex(coeff)})


def prune(a: GrassmannElement, rel_tol: float = PRUNE_REL_TOL) -> GrassmannElement:
    """Drop coefficients below rel_tol relative to the largest magnitude."""
    cut = rel_tol * a.norm_max()
    return GrassmannElement(a.m, {k: c for k, c in a.terms.items() if abs(c) > cut})


def multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Plain (wedge) product, bilinear over the monomial products."""
    _same_m(a, b)
    out: dict = {}
    for (bar1, ub1), ca in a.terms.items():
        for (bar2, ub2), cb in b.terms.items():
            mm = _mono_mul(bar1, ub1, bar2, ub2)
            if mm is None:
                continue
            sign, bar, ub = mm
            _acc(out, Monomial(bar, ub), sign * ca * cb)
    return GrassmannElement(a.m, out)


@functools.lru_cache(maxsize=1 << 18)
def _star_monomials_terms(bar_a: int, ub_a: int, bar_b: int, ub_b: int, m: int):
    """Expansion of one monomial star product as a tuple of (monomial, coeff)."""
    I, J, K, L = bar_a, ub_a, bar_b, ub_b
    S = J & K
    ns = S.bit_count()
    # reordering signs of the integrated block: sigma_JS then sigma_S
    exp_js = ns * (J & ~S).bit_count() + ns * (ns - 1) // 2
    sign = -1 if exp_js & 1 else 1
    sign *= _merge_sign(S, J & ~S) * _merge_sign(S, K & ~S)
    core = _mono_mul(I, J & ~S, K & ~S, L)
    if core is None:
        return ()
    csign, cbar, cub = core
    sign *= csign
    # remaining factor: prod over J|K of (1 - pbar p), expanded over subsets
    avail = (J | K) & ~(cbar | cub)
    out = []
    sub = avail
    while True:
        nb = sub.bit_count()
        b_sign = -1 if (nb + nb * (nb - 1) // 2) & 1 else 1
        msign, mbar, mub = _mono_mul(cbar, cub, sub, sub)
        out.append((Monomial(mbar, mub), complex(sign * b_sign * msign)))
        if sub == 0:
            break
        sub = (sub - 1) & avail
    return tuple(out)


def star_monomials(a: Monomial, b: Monomial, m: int) -> GrassmannElement:
    """Star product of two basis monomials, fully expanded.

    Evaluates the Gaussian-convolution product directly on the monomial pair:
    the reordered normal core times the expanded commuting weight over the
    contracted index block.  Index collisions give the zero element.
    """
    _check_m(m, ELEMENT_CAP)
    terms = _star_monomials_terms(a.bar, a.unbar, b.bar, b.unbar, m)
    return GrassmannElement(m, dict(terms))


def star(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Bilinear star product of two elements.

    Associative and unital; full-element products are capped at m <= STAR_CAP
    because the pairing cost grows as 16**m.
    """
    _same_m(a, b)
    _check_m(a.m, STAR_CAP)
    m = a.m
    out: dict = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            c = ca * cb
            for km, cm in _star_monomials_terms(ka.bar, ka.unbar, kb.bar, kb.unbar, m):
                _acc(out, km, c * cm)
    return GrassmannElement(m, out)


def involution(a: GrassmannElement) -> GrassmannElement:
    """Antilinear involution: reverses factors and conjugates generators.

    On a monomial it swaps the bar/unbar index sets and multiplies by
    (-1)**(s_I + s_J) with s_X = |X|(|X|-1)/2; satisfies a** = a and
    (a * b)^star-involution = b* star a*.
    """
    out = {}
    for (bar, ub), c in a.terms.items():
        s = _half_pair_sign(bar.bit_count()) * _half_pair_sign(ub.bit_count())
        out[Monomial(ub, bar)] = s * complex(c).conjugate()
    return GrassmannElement(a.m, out)


def raw_integral(a: GrassmannElement) -> complex:
    """Top-coefficient extraction: the iterated pair-derivative functional.

    Left derivatives that anticommute past preceding generators fix the sign
    of the full monomial at (-1)**(m(m+1)/2); everything below the top
    monomial integrates to zero.
    """
    m = a.m
    top = (1 << m) - 1
    c = a.terms.get(Monomial(top, top))
    if c is None:
        return 0j
    sign = -1 if (m * (m + 1) // 2) & 1 else 1
    return sign * c


def trace_weight(m: int) -> GrassmannElement:
    """The commuting weight prod_alpha (1 + 2 pbar_alpha p_alpha), expanded."""
    _check_m(m, ELEMENT_CAP)
    out = {}
    full = (1 << m) - 1
    sub = full
    while True:
        k = sub.bit_count()
        out[Monomial(sub, sub)] = complex(_half_pair_sign(k) * (1 << k))
        if sub == 0:
            break
        sub = (sub - 1) & full
    return GrassmannElement(m, out)


def trace_integral(a: GrassmannElement) -> complex:
    """Weighted integral equal to the Fock-space trace of the element's image.

    Equals (-1)**m * raw_integral(a times trace_weight(m)); on monomials this
    collapses to the diagonal rule PbarI PsiI -> (-1)**s_I * 2**(m-|I|) and 0
    off the diagonal, which is the form evaluated here.  The (-1)**m factor is
    kept inside so the value is the trace for odd m as well.
    """
    tot = 0j
    m = a.m
    for (bar, ub), c in a.terms.items():
        if bar != ub:
            continue
        k = bar.bit_count()
        tot += c * (_half_pair_sign(k) * (1 << (m - k)))
    return tot


def pair_integral_closed_form(a: Monomial, b: Monomial, m: int) -> complex:
    """Closed form of trace_integral(star_monomials(a, b)).

    Vanishes unless the index sets interlock (I\\T = J\\S and L\\T = K\\S for
    S = J&K, T = I&L); otherwise the value is a signed power of two.  Serves
    as the fast path for star-then-trace and as the sign-convention oracle.
    """
    _check_m(m, ELEMENT_CAP)
    I, J = a.bar, a.unbar
    K, L = b.bar, b.unbar
    S = J & K
    T = I & L
    if (I & ~T) != (J & ~S) or (L & ~T) != (K & ~S):
        return 0j
    exp = J.bit_count() * (J.bit_count() - 1) // 2 + L.bit_count() * (L.bit_count() - 1) // 2
    sign = -1 if exp & 1 else 1
    sign *= _merge_sign(S, J & ~S) * _merge_sign(S, K & ~S)
    sign *= _merge_sign(T, I & ~T) * _merge_sign(T, L & ~T)
    return complex(sign * (1 << (m - (I | K).bit_count())))


def star_trace(a: GrassmannElement, b: GrassmannElement) -> complex:
    """trace_integral(star(a, b)) evaluated pairwise without expanding the star."""
    _same_m(a, b)
    m = a.m
    tot = 0j
    merge = _merge_sign
    for (I, J), ca in a.terms.items():
        for (K, L), cb in b.terms.items():
            S = J & K
            T = I & L
            if (I & ~T) != (J & ~S) or (L & ~T) != (K & ~S):
                continue
            nj = J.bit_count()
            nl = L.bit_count()
            sign = -1 if (nj * (nj - 1) // 2 + nl * (nl - 1) // 2) & 1 else 1
            sign *= merge(S, J & ~S) * merge(S, K & ~S)
            sign *= merge(T, I & ~T) * merge(T, L & ~T)
            tot += ca * cb * (sign * (1 << (m - (I | K).bit_count())))
    return tot


def expectation(density: GrassmannElement, observable: GrassmannElement, tol: float = 1e-8) -> complex:
    """Trace of density * observable under the star product.

    The density must already be normalized: a trace away from 1 by more than
    tol raises instead of renormalizing silently.
    """
    _same_m(density, observable)
    tr = trace_integral(density)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density is not normalized: trace_integral = {tr}")
    return star_trace(density, observable)


def change_generators(a: GrassmannElement, u: np.ndarray, tol: float = 1e-10) -> GrassmannElement:
    """Rewrite `a` under the substitution chi_i = sum_j u[i, j] psi_j.

    The coefficients of `a` are read as coefficients over the chi generators
    (conjugate matrix for the barred ones) and expanded over the psi basis via
    minor determinants.  `u` must be unitary within tol; both integrals are
    invariant under this map.
    """
    from itertools import combinations

    m = a.m
    u = np.asarray(u, dtype=complex)
    if u.shape != (m, m):
        raise ValueError(f"expected a {m}x{m} matrix, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(m)))
    if dev > tol:
        raise ValueError(f"matrix is not unitary: max |u*u - 1| = {dev:.3e}")
    ubar = u.conj()
    col_subsets = {k: list(combinations(range(m), k)) for k in range(m + 1)}

    def block(mat, rows):
        # antisymmetric expansion of an ordered generator block: minors over
        # all ascending column subsets of matching size
        out = []
        for cols in col_subsets[len(rows)]:
            if rows:
                d = complex(np.linalg.det(mat[np.ix_(rows, cols)]))
            else:
                d = 1.0 + 0j
            if d != 0:
                mask = 0
                for cidx in cols:
                    mask |= 1 << cidx
                out.append((mask, d))
        return out

    out: dict = {}
    for (bar, ub), c in a.terms.items():
        rows_b = [i - 1 for i in _indices(bar)]
        rows_u = [i - 1 for i in _indices(ub)]
        bar_parts = block(ubar, rows_b)
        ub_parts = block(u, rows_u)
        for bmask, bdet in bar_parts:
            cb = c * bdet
            for umask, udet in ub_parts:
                _acc(out, Monomial(bmask, umask), cb * udet)
    return GrassmannElement(m, out)


def elements_close(a: GrassmannElement, b: GrassmannElement, tol: float = 1e-12) -> bool:
    return max_coeff_difference(a, b) <= tol


def max_coeff_difference(a: GrassmannElement, b: GrassmannElement) -> float:
    _same_m(a, b)
    keys = set(a.terms) | set(b.terms)
    return max((abs(a.terms.get(k, 0j) - b.terms.get(k, 0j)) for k in keys), default=0.0)
