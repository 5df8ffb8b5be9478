"""Reduced density matrices of Grassmann densities and representability checks.

Each condition comes in two independent realizations that are cross-validated
against each other: a closed-form matrix inequality in the one- and two-body
matrices (gamma, Gamma), and positivity of a quadratic form evaluated by star
products against the density element itself.

Index conventions (0-based in code): gamma[k, l] is the expectation of
pbar_{l+1} * p_{k+1}; two-body indices flatten row-major, (k, l) -> k*m + l,
and Gamma[(i, j), (k, l)] is the expectation of the normal-ordered word
pbar_{l+1} pbar_{k+1} p_{i+1} p_{j+1}.

The generalized two-body third-order condition stores a three-index tensor T
with slices [T_k]_{ij} = T[i, j, k].  The mixed linear term of its closed form
uses the index order sum_q [T_j^(A)]_{q i} conj(a_q) in the second summand;
the alternative order [T_j^(A)]_{i q} flips that term's sign and fails the
cross-validation against the star-product form, which is how the order was
fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .algebra import (
    GrassmannElement,
    Monomial,
    _mono_mul,
    involution,
    monomial_element,
    multiply,
    psi,
    psibar,
    star,
    star_trace,
    trace_integral,
    unit,
)
from . import fock

DENSITY_TRACE_TOL = 1e-8
HERMITIAN_INPUT_TOL = 1e-8


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    margin: float
    passed: bool
    tol: float
    method: str

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "margin": self.margin,
            "pass": self.passed,
            "tol": self.tol,
            "method": self.method,
        }


def psd_tolerance(matrix: np.ndarray) -> float:
    """Relative PSD tolerance 1e-9 * (1 + max-norm)."""
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    return 1e-9 * (1.0 + scale)


def report_from_form(condition: str, matrix: np.ndarray, method: str,
                     tol: float | None = None) -> ConditionReport:
    """Hermiticity-checked minimum-eigenvalue report for a form matrix."""
    herm = (matrix + matrix.conj().T) / 2
    dev = np.max(np.abs(matrix - herm)) if matrix.size else 0.0
    scale = 1.0 + (float(np.max(np.abs(matrix))) if matrix.size else 0.0)
    if dev > 1e-10 * scale:
        raise ValueError(f"{condition}: form matrix is not Hermitian (deviation {dev:.3e})")
    margin = float(np.linalg.eigvalsh(herm).min()) if matrix.size else math.inf
    if tol is None:
        tol = psd_tolerance(matrix)
    return ConditionReport(condition, margin, margin >= -tol, tol, method)


def _validate_density_element(kappa: GrassmannElement) -> None:
    tr = trace_integral(kappa)
    if abs(tr - 1.0) > DENSITY_TRACE_TOL:
        raise ValueError(f"density element is not normalized: trace_integral = {tr}")


def _require_hermitian(mat: np.ndarray, name: str, tol: float = HERMITIAN_INPUT_TOL) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got shape {mat.shape}")
    dev = np.max(np.abs(mat - mat.conj().T))
    if dev > tol:
        raise ValueError(f"{name} is not Hermitian: max deviation {dev:.3e}")
    return mat


def _validate_pair(gamma: np.ndarray, Gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    gamma = _require_hermitian(gamma, "gamma")
    Gamma = _require_hermitian(Gamma, "Gamma")
    m = gamma.shape[0]
    if Gamma.shape != (m * m, m * m):
        raise ValueError(f"Gamma shape {Gamma.shape} does not match m = {m}")
    return gamma, Gamma, m


# ---------------------------------------------------------------------------
# pdm extraction from a density element

def pdm1_from_density(kappa: GrassmannElement) -> np.ndarray:
    """One-body matrix gamma[k, l] = <pbar_{l+1} * p_{k+1}> by star-trace."""
    _validate_density_element(kappa)
    m = kappa.m
    gamma = np.empty((m, m), dtype=complex)
    for k in range(m):
        for l in range(m):
            probe = monomial_element(Monomial(1 << l, 1 << k), m)
            gamma[k, l] = star_trace(kappa, probe)
    return gamma


def pdm2_from_density(kappa: GrassmannElement) -> np.ndarray:
    """Two-body matrix by star-trace against normal-ordered generator words."""
    _validate_density_element(kappa)
    m = kappa.m
    Gamma = np.zeros((m * m, m * m), dtype=complex)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            for k in range(m):
                for l in range(m):
                    if k == l:
                        continue
                    # word pbar_l pbar_k p_i p_j, canonicalized
                    mm = _mono_mul(1 << l, 0, 1 << k, 0)
                    sign, bar, _ = mm
                    mm2 = _mono_mul(0, 1 << i, 0, 1 << j)
                    sign *= mm2[0]
                    probe = monomial_element(Monomial(bar, mm2[2]), m)
                    Gamma[i * m + j, k * m + l] = sign * star_trace(kappa, probe)
    return Gamma


# ---------------------------------------------------------------------------
# quadratic forms evaluated against the density element

def quadratic_form_matrix(kappa: GrassmannElement, probes: list[GrassmannElement],
                          mode: str = "plain") -> np.ndarray:
    """Hermitian form F[a, b] = <b_a* * b_b> (plain) or the anticommutator version.

    Probes may be arbitrary elements over the density's generator count; the
    form is PSD whenever kappa is a genuine Grassmann density.
    """
    if mode not in ("plain", "anticommutator"):
        raise ValueError(f"unknown form mode {mode!r}")
    if not probes:
        raise ValueError("probe list is empty")
    _validate_density_element(kappa)
    for b in probes:
        if b.m != kappa.m:
            raise ValueError("probe generator count differs from density")
    n = len(probes)
    bstars = [involution(b) for b in probes]
    left = [star(kappa, bs) for bs in bstars]
    F = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            F[i, j] = star_trace(left[i], probes[j])
    if mode == "anticommutator":
        right = [star(kappa, b) for b in probes]
        for i in range(n):
            for j in range(n):
                F[i, j] += star_trace(right[j], bstars[i])
    scale = 1.0 + float(np.max(np.abs(F)))
    dev = np.max(np.abs(F - F.conj().T))
    if dev > 1e-12 * scale:
        raise ValueError(f"quadratic form failed hermiticity check ({dev:.3e})")
    return (F + F.conj().T) / 2


def monomial_basis(m: int, order: int) -> list[GrassmannElement]:
    """All basis monomials with at most `order` barred and unbarred indices."""
    out = []
    full = 1 << m
    for bar in range(full):
        if bar.bit_count() > order:
            continue
        for ub in range(full):
            if ub.bit_count() > order:
                continue
            out.append(monomial_element(Monomial(bar, ub), m))
    return out


def order_n_check(kappa: GrassmannElement, n: int) -> ConditionReport:
    """Positivity of the plain form over the full monomial basis of order n.

    n = 1 scans the one-body block of probes, n = 2 the two-body block; higher
    orders are out of scope.
    """
    if n not in (1, 2):
        raise ValueError(f"order-{n} checks are not supported (n must be 1 or 2)")
    F = quadratic_form_matrix(kappa, monomial_basis(kappa.m, n), "plain")
    return report_from_form(f"order-{n}", F, "grassmann-form")


# ---------------------------------------------------------------------------
# closed-form condition matrices

def first_order_report(gamma: np.ndarray) -> ConditionReport:
    """Spectrum bounds 0 <= gamma <= 1 as a single margin."""
    gamma = _require_hermitian(gamma, "gamma")
    eigs = np.linalg.eigvalsh(gamma)
    margin = float(min(eigs.min(), 1.0 - eigs.max()))
    tol = psd_tolerance(gamma)
    return ConditionReport("first-order", margin, margin >= -tol, tol, "closed-form")


def q_condition_matrix(gamma: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    gamma, Gamma, m = _validate_pair(gamma, Gamma)
    eye = np.eye(m)
    ex = fock.exchange_matrix(m)
    x = np.eye(m * m) - np.kron(gamma, eye) - np.kron(eye, gamma)
    return Gamma + (np.eye(m * m) - ex) @ x


def g_condition_matrix(gamma: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    """Covariance form whose positivity is the one-body-operator condition.

    M[(k,l),(m,n)] = delta_km gamma[n,l] - Gamma[(k,n),(m,l)] - gamma[k,l] gamma[n,m].
    """
    gamma, Gamma, m = _validate_pair(gamma, Gamma)
    g4 = Gamma.reshape(m, m, m, m)
    t1 = np.einsum("km,nl->klmn", np.eye(m), gamma)
    t2 = g4.transpose(0, 3, 2, 1)
    t3 = np.einsum("kl,nm->klmn", gamma, gamma)
    return (t1 - t2 - t3).reshape(m * m, m * m)


def check_P(gamma: np.ndarray, Gamma: np.ndarray, tol: float | None = None) -> ConditionReport:
    _, Gamma, _ = _validate_pair(gamma, Gamma)
    return report_from_form("P", Gamma, "closed-form", tol)


def check_Q(gamma: np.ndarray, Gamma: np.ndarray, tol: float | None = None) -> ConditionReport:
    return report_from_form("Q", q_condition_matrix(gamma, Gamma), "closed-form", tol)


def check_G(gamma: np.ndarray, Gamma: np.ndarray, tol: float | None = None) -> ConditionReport:
    return report_from_form("G", g_condition_matrix(gamma, Gamma), "closed-form", tol)


def condition_form_report(kappa: GrassmannElement, condition: str) -> ConditionReport:
    """P/Q/G margins recomputed as star-product quadratic forms."""
    m = kappa.m
    if condition == "P":
        probes = [multiply(psi(k, m), psi(l, m)) for k in range(1, m + 1) for l in range(1, m + 1)]
    elif condition == "Q":
        probes = [multiply(psibar(k, m), psibar(l, m)) for k in range(1, m + 1) for l in range(1, m + 1)]
    elif condition == "G":
        gamma = pdm1_from_density(kappa)
        probes = []
        for k in range(m):
            for l in range(m):
                shift = complex(gamma[l, k])
                probes.append(monomial_element(Monomial(1 << k, 1 << l), m) - shift * unit(m))
    else:
        raise ValueError(f"unknown condition {condition!r}")
    F = quadratic_form_matrix(kappa, probes, "plain")
    return report_from_form(condition, F, "grassmann-form")


# ---------------------------------------------------------------------------
# third-order conditions

def _antisym_first_pair(T: np.ndarray) -> np.ndarray:
    """Antisymmetric part of every slice T[:, :, k] in its first two indices."""
    return (T - T.transpose(1, 0, 2)) / 2


def require_totally_antisymmetric(T: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    T = np.asarray(T, dtype=complex)
    if T.ndim != 3 or len(set(T.shape)) != 1:
        raise ValueError(f"expected an m x m x m tensor, got shape {T.shape}")
    scale = 1.0 + float(np.max(np.abs(T)))
    if (np.max(np.abs(T + T.transpose(1, 0, 2))) > tol * scale
            or np.max(np.abs(T + T.transpose(0, 2, 1))) > tol * scale):
        raise ValueError("tensor is not totally antisymmetric")
    return T


def t1_bilinear(Tp: np.ndarray, T: np.ndarray, gamma: np.ndarray, Gamma: np.ndarray) -> complex:
    """Sesquilinear extension of the T1 value, antilinear in the first tensor."""
    gamma, Gamma, m = _validate_pair(gamma, Gamma)
    total = 0j
    for q in range(m):
        tpq = Tp[:, q, :]
        tq = T[:, q, :]
        prod = tpq.conj().T @ tq
        total += 2 * np.trace(prod) - 6 * np.trace(prod @ gamma)
        total += 3 * (tq.reshape(-1) @ (Gamma @ tpq.conj().reshape(-1)))
    return complex(total)


def check_T1(gamma: np.ndarray, Gamma: np.ndarray, T: np.ndarray) -> float:
    """Closed-form scalar of the first third-order condition for one probe tensor."""
    T = require_totally_antisymmetric(T)
    val = t1_bilinear(T, T, gamma, Gamma)
    return float(val.real)


def _t1_probe_elements(m: int) -> list[GrassmannElement]:
    out = []
    for i, j, k in combinations(range(1, m + 1), 3):
        out.append(multiply(multiply(psi(i, m), psi(j, m)), psi(k, m)))
    return out


def _t1_unit_tensor(triple: tuple[int, int, int], m: int) -> np.ndarray:
    """Antisymmetric tensor E with tau(E) equal to the plain ordered monomial."""
    E = np.zeros((m, m, m), dtype=complex)
    i, j, k = triple
    perms = [((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
             ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1)]
    for (a, b, c), s in perms:
        E[a, b, c] = s / 6.0
    return E


def t1_form_from_pdms(gamma: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    """T1 anticommutator form over ordered cubic probes, built from (gamma, Gamma)."""
    gamma, Gamma, m = _validate_pair(gamma, Gamma)
    triples = list(combinations(range(m), 3))
    tensors = [_t1_unit_tensor(t, m) for t in triples]
    n = len(tensors)
    F = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            F[a, b] = 3 * t1_bilinear(tensors[a], tensors[b], gamma, Gamma)
    return (F + F.conj().T) / 2


def check_T1_full(kappa: GrassmannElement) -> ConditionReport:
    """T1 as min eigenvalue of the anticommutator form over all cubic probes."""
    m = kappa.m
    if m < 3:
        return ConditionReport("T1", math.inf, True, 0.0, "grassmann-form")
    F = quadratic_form_matrix(kappa, _t1_probe_elements(m), "anticommutator")
    return report_from_form("T1", F, "grassmann-form")


def t2_bilinear(Tp: np.ndarray, ap: np.ndarray, T: np.ndarray, a: np.ndarray,
                gamma: np.ndarray, Gamma: np.ndarray) -> complex:
    """Sesquilinear extension of the generalized T2 value."""
    gamma, Gamma, m = _validate_pair(gamma, Gamma)
    g4 = Gamma.reshape(m, m, m, m)
    TpA = _antisym_first_pair(Tp)
    TA = _antisym_first_pair(T)
    total = 0j
    for q in range(m):
        total += np.vdot(Tp[:, :, q].reshape(-1), Gamma @ T[:, :, q].reshape(-1))
    tr_q1 = np.einsum("jqk,qmn,njkm->", TpA.conj(), TA, g4)
    q2 = np.einsum("qpi,qpj->ij", TpA.conj(), T)
    q3 = np.einsum("qji,q->ij", TpA.conj(), a) + np.einsum("qij,q->ij", TA, np.conj(ap))
    total += 4 * tr_q1
    total += 2 * np.einsum("ij,ji->", q2 + q3, gamma)
    total += np.vdot(ap, a)
    return complex(total)


def check_T2_generalized(gamma: np.ndarray, Gamma: np.ndarray, T: np.ndarray,
                         a: np.ndarray) -> float:
    """Closed-form scalar of the generalized second third-order condition."""
    T = np.asarray(T, dtype=complex)
    a = np.asarray(a, dtype=complex)
    m = np.asarray(gamma).shape[0]
    if T.shape != (m, m, m):
        raise ValueError(f"tensor shape {T.shape} does not match m = {m}")
    if a.shape != (m,):
        raise ValueError(f"vector shape {a.shape} does not match m = {m}")
    val = t2_bilinear(T, a, T, a, gamma, Gamma)
    return float(val.real)


def _t2_probes(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for i, j in combinations(range(m), 2):
        for k in range(m):
            E = np.zeros((m, m, m), dtype=complex)
            E[i, j, k] = 0.5
            E[j, i, k] = -0.5
            out.append((E, np.zeros(m, dtype=complex)))
    for i in range(m):
        a = np.zeros(m, dtype=complex)
        a[i] = 1.0
        out.append((np.zeros((m, m, m), dtype=complex), a))
    return out


def _t2_probe_elements(m: int) -> list[GrassmannElement]:
    out = []
    for i, j in combinations(range(1, m + 1), 2):
        for k in range(1, m + 1):
            out.append(multiply(multiply(psibar(i, m), psibar(j, m)), psi(k, m)))
    for i in range(1, m + 1):
        out.append(psibar(i, m))
    return out


def t2_form_from_pdms(gamma: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    """Generalized T2 anticommutator form over cubic and linear probes."""
    gamma, Gamma, m = _validate_pair(gamma, Gamma)
    probes = _t2_probes(m)
    n = len(probes)
    F = np.empty((n, n), dtype=complex)
    for x in range(n):
        Tx, ax = probes[x]
        for y in range(n):
            Ty, ay = probes[y]
            F[x, y] = t2_bilinear(Tx, ax, Ty, ay, gamma, Gamma)
    return (F + F.conj().T) / 2


def check_T2_full(kappa: GrassmannElement) -> ConditionReport:
    """Generalized T2 as min eigenvalue of the anticommutator form."""
    m = kappa.m
    if m < 2:
        return ConditionReport("T2", math.inf, True, 0.0, "grassmann-form")
    F = quadratic_form_matrix(kappa, _t2_probe_elements(m), "anticommutator")
    return report_from_form("T2", F, "grassmann-form")


def t2a_value(gamma: np.ndarray, Gamma: np.ndarray, T: np.ndarray) -> float:
    """Specialized T2 value for pair-antisymmetric tensors with no linear part.

    The trace terms use the reindexed slices [Ttilde_k]_{ij} = [T_j]_{ik};
    the pair-space form keeps the original slices [T_q]_{ij} = T[i, j, q],
    which is the reading consistent with the generalized value (the
    rearranged statement with Ttilde in all three terms is not).
    """
    gamma, Gamma, m = _validate_pair(gamma, Gamma)
    T = np.asarray(T, dtype=complex)
    Tt = T.transpose(0, 2, 1)  # Ttilde[i, j, k] = T[i, k, j]
    g4 = Gamma.reshape(m, m, m, m)
    total = 0j
    for q in range(m):
        v = T[:, :, q].reshape(-1)
        total += np.vdot(v, Gamma @ v)
        tq = Tt[:, :, q]
        # tr{(Ttilde_q^* (x) Ttilde_q) Gamma} with the adjoint on the first leg
        total += 4 * np.einsum("ki,jl,klij->", tq.conj(), tq, g4)
        total += 2 * np.trace(tq.conj().T @ tq @ gamma)
    return float(total.real)


# ---------------------------------------------------------------------------
# fuzz campaign

@dataclass(frozen=True)
class FuzzSummary:
    m: int
    trials: int
    seed: int
    sector: int | None
    worst_margins: dict
    pdm_max_dev: float
    contraction_max_dev: float
    failures: int

    @property
    def all_pass(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "trials": self.trials,
            "seed": self.seed,
            "sector": self.sector,
            "worst_margins": dict(self.worst_margins),
            "pdm_max_dev": self.pdm_max_dev,
            "contraction_max_dev": self.contraction_max_dev,
            "failures": self.failures,
            "all_pass": self.all_pass,
        }


def condition_battery(kappa: GrassmannElement, gamma: np.ndarray, Gamma: np.ndarray) -> list[ConditionReport]:
    """The standard six checks run by the fuzzer and the CLI."""
    return [
        first_order_report(gamma),
        check_P(gamma, Gamma),
        check_Q(gamma, Gamma),
        check_G(gamma, Gamma),
        check_T1_full(kappa),
        check_T2_full(kappa),
    ]


def _fuzz_trial(m: int, trial_seed, sector: int | None):
    rho = fock.random_density(m, trial_seed, sector=sector)
    kappa = fock.from_operator(rho)
    gamma = pdm1_from_density(kappa)
    Gamma = pdm2_from_density(kappa)
    gamma_o, Gamma_o = fock.pdms_from_rho(rho)
    dev = max(np.max(np.abs(gamma - gamma_o)), np.max(np.abs(Gamma - Gamma_o)))
    reports = condition_battery(kappa, gamma, Gamma)
    cdev = fock.contraction_check(rho) if sector is not None and sector >= 2 else 0.0
    return dev, cdev, reports


def fuzz_conditions(m: int, trials: int, seed: int, sector: int | None = None,
                    threads: int = 1) -> FuzzSummary:
    """Run the condition battery on `trials` random genuine densities.

    Per-trial seeds derive deterministically from the master seed, so the
    summary is reproducible for any thread count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if m > fock.THETA_CAP:
        raise ValueError(f"mode count {m} exceeds oracle cap {fock.THETA_CAP}")
    children = np.random.SeedSequence(seed).spawn(trials)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: _fuzz_trial(m, s, sector), children))
    else:
        results = [_fuzz_trial(m, s, sector) for s in children]
    worst: dict = {}
    failures = 0
    pdm_dev = 0.0
    cdev_max = 0.0
    for dev, cdev, reports in results:
        pdm_dev = max(pdm_dev, float(dev))
        cdev_max = max(cdev_max, float(cdev))
        for rep in reports:
            prev = worst.get(rep.condition)
            if prev is None or rep.margin < prev:
                worst[rep.condition] = rep.margin
            if not rep.passed:
                failures += 1
    return FuzzSummary(m, trials, seed, sector, worst, pdm_dev, cdev_max, failures)
