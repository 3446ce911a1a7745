"""Discrete Dirac actions, the spin current and the variational gradient.

Two normalizations are available:

canonical
    S = -eps rk(E')/4 int scal + int <psi, D_A psi> - 2^{2n} rk(S) int ||F_A||^2
    with D_A the twisted Dirac operator coupled to A with unit strength.
rescaled
    S = -eps rk(E')/4 int scal + int <psi, D_{gA} psi> - 1/4 int ||F_A||^2
    whose A-stationarity condition is delta_A F_A + g J_spin = 0.

All integrals are lattice sums with weight h^n sqrt|det g|.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import expm

from . import geometry as geo
from . import torsion as tor
from .clifford import gamma_cl, interior_mult, exterior_mult
from .geometry import MetricChart
from .spinor import (
    GammaRep,
    TwistedSpinorField,
    dirac_apply,
    dirac_apply_adjoint,
    fiber_pairing,
    second_order_decompose,
    twisted_dirac,
)

FORMS = ("canonical", "rescaled")
SCHEMA_VERSION = 1


def rank_e_prime(gamma: GammaRep) -> int:
    """rk(E') for E' = S (x) TM (x) Cl (x) Cl."""
    n = gamma.sig.n
    return gamma.d * n * 4**n


def torsion_constant(gamma: GammaRep) -> float:
    """2^{2n} rk(S), the weight of ||F_A||^2 in the canonical action."""
    return float(4**gamma.sig.n * gamma.d)


def lambda_0(gamma: GammaRep, varepsilon: int | None = None) -> float:
    """Coupling of the canonical torsion equation, 2^{-2(n+1)} varepsilon n / rk(S)."""
    n = gamma.sig.n
    ve = gamma.sig.eps if varepsilon is None else varepsilon
    return 2.0 ** (-2 * (n + 1)) * ve * n / gamma.d


@dataclass(frozen=True)
class ActionBreakdown:
    scal_term: float
    fermion_term: complex
    torsion_term: float
    total: complex
    form: str
    coupling_g: float
    lattice: tuple
    h: tuple

    def to_json(self) -> str:
        d = asdict(self)
        for key in ("fermion_term", "total"):
            z = complex(d[key])
            d[key] = z.real if z.imag == 0 else [z.real, z.imag]
        d["lattice"] = list(self.lattice)
        d["h"] = list(self.h)
        d["schema_version"] = SCHEMA_VERSION
        return json.dumps(d, sort_keys=True)


@dataclass(frozen=True, eq=False)
class SpinCurrent:
    chart: MetricChart
    data: np.ndarray

    def __post_init__(self):
        tor._check_antisym(np.asarray(self.data), -1, -2, "spin current in its Lambda^2 slots", rtol=0.0)


def _check_same(chart: MetricChart, *arrays):
    for a in arrays:
        if a is not None and np.shape(a)[: chart.ndim] != chart.dims:
            raise ValueError(f"field lattice {np.shape(a)[:chart.ndim]} does not match chart {chart.dims}")


def _data(x):
    if x is None:
        return None
    if isinstance(x, (tor.TorsionPotential, TwistedSpinorField, SpinCurrent)):
        return x.data
    return np.asarray(x)


def spin_current_components(psi: np.ndarray, gamma: GammaRep, eta: np.ndarray) -> np.ndarray:
    """J[k, i, j] = Re <psi_i, gamma_k psi_j>_S with all frame indices lowered."""
    Hg = np.einsum("ab,kbc->kac", gamma.hermitian_form, gamma.gammas)
    raw = np.einsum("...ai,kab,...bj->...kij", psi.conj(), Hg, psi).real
    raw = raw * np.einsum("k,i,j->kij", eta, eta, eta)
    return 0.5 * (raw - np.swapaxes(raw, -1, -2))


def spin_current(psi, gamma: GammaRep, chart: MetricChart) -> SpinCurrent:
    p = _data(psi)
    _check_same(chart, p)
    return SpinCurrent(chart, spin_current_components(p, gamma, chart.sig.eta))


def _coupling(form: str, g: float) -> float:
    if form not in FORMS:
        raise ValueError(f"unknown action form {form!r}; choose from {FORMS}")
    return 1.0 if form == "canonical" else float(g)


def _torsion_weight(form: str, gamma: GammaRep) -> float:
    # coefficient c in torsion_term = -c <F, F>, with <F, F> = 1/4 sum w ||F||^2
    return 4.0 * torsion_constant(gamma) if form == "canonical" else 1.0


def scal_integral(chart: MetricChart) -> float:
    if chart.is_flat:
        return 0.0
    s = geo.scalar_curvature(chart) * chart.weight
    if not chart.periodic:
        s = np.where(chart.interior, s, 0.0)
    return float(np.sum(s))


def total_action(A, psi, chart: MetricChart, gamma: GammaRep, form: str = "rescaled", g: float = 0.1) -> ActionBreakdown:
    gc = _coupling(form, g)
    a, p = _data(A), _data(psi)
    _check_same(chart, a, p)
    n = chart.n
    if a is None:
        a = np.zeros(chart.dims + (n, n, n))
    scal = -chart.sig.eps * rank_e_prime(gamma) / 4.0 * scal_integral(chart) + 0.0
    if p is None:
        ferm = 0.0 + 0.0j
    else:
        D = twisted_dirac(chart, gamma, a, gc)
        ferm = complex(np.sum(chart.weight * fiber_pairing(D, p, dirac_apply(D, p))))
    F = tor.field_strength_components(chart, a)
    tors = -_torsion_weight(form, gamma) * geo.inner(chart, F, F, 2, "so")
    return ActionBreakdown(
        float(scal), ferm, float(tors), scal + ferm + tors, form, gc, chart.dims, chart.h
    )


def stationarity_residual(A, psi, chart: MetricChart, gamma: GammaRep, form: str = "rescaled", g: float = 0.1) -> np.ndarray:
    """delta_A F_A + c J_spin, projected onto so-valued one-forms.

    c = g in rescaled form and 2^{-2n-2}/rk(S) (= lambda_0 eps/n times the
    unnormalized current) in canonical form. The symmetric part of delta_A F_A
    produced by the lattice cup product is invisible to so-valued variations
    and is dropped.
    """
    a, p = _data(A), _data(psi)
    _check_same(chart, a, p)
    F = tor.field_strength_components(chart, a)
    dF = tor.delta_A(chart, a, F, 2)
    R = 0.5 * (dF - np.swapaxes(dF, -1, -2))
    if p is not None:
        c = _coupling(form, g) / _torsion_weight(form, gamma)
        R = R + c * spin_current_components(p, gamma, chart.sig.eta)
    return R


def lattice_norm(chart: MetricChart, R: np.ndarray) -> float:
    """sqrt <R, R> for so-valued one-forms (Euclidean signature: a true norm)."""
    return float(np.sqrt(abs(geo.inner(chart, R, R, 1, "so"))))


def action_gradient(A, psi, chart: MetricChart, gamma: GammaRep, form: str = "rescaled", g: float = 0.1):
    """Plain gradients of the real part of total_action.

    Returns (GA, Gpsi): dS = sum GA * dA for so-valued dA, and
    dS = Re sum conj(Gpsi) * dpsi for complex dpsi.
    """
    gc = _coupling(form, g)
    a, p = _data(A), _data(psi)
    _check_same(chart, a, p)
    n = chart.n
    if a is None:
        a = np.zeros(chart.dims + (n, n, n))
    R = stationarity_residual(a, p, chart, gamma, form, g)
    GA = -2.0 * _torsion_weight(form, gamma) * geo.form_metric(chart, 1, "so") * R
    if p is None:
        return GA, None
    D = twisted_dirac(chart, gamma, a, gc)
    t = D.twist_metric
    P = lambda x: np.einsum("ab,...bk,k->...ak", gamma.hermitian_form, x, t)
    w = chart.weight[..., None, None]
    Gpsi = w * P(dirac_apply(D, p)) + dirac_apply_adjoint(D, w * P(p))
    return GA, Gpsi


def universal_action(D, chart: MetricChart | None = None) -> complex:
    """Integral of tr V_D; interior sites only on non-periodic charts."""
    chart = D.chart if chart is None else chart
    _, V = second_order_decompose(D)
    dens = np.trace(V, axis1=-2, axis2=-1) * chart.weight
    if not chart.periodic:
        dens = np.where(chart.interior, dens, 0.0)
    return complex(np.sum(dens))


def simple_type_closed_form(D) -> complex:
    """Integral of -eps rk(E)/4 scal + tr phi_D^2 for a simple-type operator."""
    chart = D.chart
    rk = D.fiber
    phi2 = 0.0
    if D.zero_order is not None:
        phi2 = np.einsum("...ij,...ji->...", D.zero_order, D.zero_order)
    dens = (-chart.sig.eps * rk / 4.0 * (0.0 if chart.is_flat else geo.scalar_curvature(chart)) + phi2) * chart.weight
    if not chart.periodic:
        dens = np.where(chart.interior, dens, 0.0)
    return complex(np.sum(dens))


def cosmological_density(D) -> np.ndarray:
    """Lambda = tr phi_D^2 per site."""
    if D.zero_order is None:
        return np.zeros(D.chart.dims)
    return np.einsum("...ij,...ji->...", D.zero_order, D.zero_order).real


# dense single-site builds on E' = S (x) TM (x) Cl (x) Cl

def left_clifford(sig) -> np.ndarray:
    """Left Clifford multiplication by e^a on Cl ~ Lambda T*M, shape (n, 2^n, 2^n)."""
    return gamma_cl(sig)


def _tm_matrices(F: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return geo.tensor_to_matrix(F, eta)


def dense_phi_D(F: np.ndarray, gamma: GammaRep, with_spinor: bool = True) -> np.ndarray:
    """phi_D = sum_ab 1_S (x) F(e_a, e_b) (x) e^a (x) e^b as a dense matrix."""
    sig = gamma.sig
    L = left_clifford(sig)
    M = _tm_matrices(F, sig.eta)
    n = sig.n
    dim = n * L.shape[1] ** 2
    out = np.zeros((dim, dim), dtype=complex)
    for a in range(n):
        for b in range(n):
            out += np.kron(np.kron(M[a, b], L[a]), L[b])
    if with_spinor:
        out = np.kron(np.eye(gamma.d), out)
    return out


def trace_phi_squared(F: np.ndarray, gamma: GammaRep, dense: bool = True) -> complex:
    """tr_{E'} phi_D^2, densely or from traces of Kronecker factors."""
    if dense:
        P = dense_phi_D(F, gamma, with_spinor=gamma.sig.n <= 2)
        t = np.trace(P @ P)
        return complex(t if gamma.sig.n <= 2 else gamma.d * t)
    sig = gamma.sig
    L = left_clifford(sig)
    M = _tm_matrices(F, sig.eta)
    LL = np.einsum("aij,cji->ac", L, L)
    MM = np.einsum("abij,cdji->abcd", M, M)
    return complex(gamma.d * np.einsum("abcd,ac,bd->", MM, LL, LL))


def dense_tau_E_prime(gamma: GammaRep) -> np.ndarray:
    """tau_S (x) 1_TM (x) tau_Cl (x) 1_Cl."""
    sig = gamma.sig
    N = 2**sig.n
    tau_cl = np.diag([(-1.0) ** bin(B).count("1") for B in range(N)])
    return np.kron(np.kron(np.kron(gamma.tau_S, np.eye(sig.n)), tau_cl), np.eye(N))


def dense_pairing_E_prime(gamma: GammaRep) -> np.ndarray:
    """<.,.>_S <.,.>_TM <.,.>_Cl <.,.>_Cl as a matrix."""
    sig = gamma.sig
    N = 2**sig.n
    cl = np.array([np.prod([sig.eta[i] for i in range(sig.n) if B >> i & 1]) for B in range(N)], dtype=float)
    return np.kron(np.kron(np.kron(gamma.hermitian_form, np.diag(sig.eta)), np.diag(cl)), np.diag(cl))


def embed_E1(psi_site: np.ndarray, gamma: GammaRep) -> np.ndarray:
    """psi (x) 1 (x) 1 for a single-site E1 vector psi[alpha, k]."""
    N = 2**gamma.sig.n
    one = np.zeros(N)
    one[0] = 1.0
    return np.kron(np.kron(psi_site.reshape(-1), one), one)


def cross_term(F: np.ndarray, psi_site: np.ndarray, gamma: GammaRep) -> complex:
    """<psi, tau_E' phi_D psi>_E' for psi in E1 (x) 1 (x) 1."""
    v = embed_E1(psi_site, gamma)
    P = dense_phi_D(F, gamma)
    return complex(v.conj() @ dense_pairing_E_prime(gamma) @ dense_tau_E_prime(gamma) @ P @ v)


def _so_lift_spin(T: np.ndarray, gamma: GammaRep) -> np.ndarray:
    return -(gamma.sig.eps / 4.0) * np.einsum("jk,jab,kbc->ac", T, gamma.gammas, gamma.gammas)


def _so_lift_forms(T: np.ndarray, sig) -> np.ndarray:
    """Derivation of Lambda T*M induced by the so element with tensor T[j, k]."""
    eta = sig.eta
    C = T * eta[:, None]  # covector action: e^j -> sum_k C[j, k] e^k
    N = 2**sig.n
    out = np.zeros((N, N))
    for j in range(sig.n):
        contract = eta[j] * interior_mult(sig, j)
        for k in range(sig.n):
            if C[j, k] != 0.0:
                out += C[j, k] * exterior_mult(sig, k) @ contract
    return out


def quantized_curvature_trace(Riem: np.ndarray, gamma: GammaRep, dense: bool = True) -> complex:
    """tr_gamma curv on E' from a frame Riemann tensor R[a, b, c, d] = g(e_a, R(e_c, e_d) e_b)."""
    sig = gamma.sig
    n = sig.n
    N = 2**n
    d = gamma.d
    total = 0.0 + 0.0j
    for a in range(n):
        for b in range(a + 1, n):
            T = np.swapaxes(Riem[:, :, a, b], 0, 1)  # T[j, k] = g(R(e_a, e_b) e_j, e_k)
            RS = _so_lift_spin(T, gamma)
            RT = geo.tensor_to_matrix(T, sig.eta)
            RC = _so_lift_forms(T, sig)
            gg = gamma.gammas[a] @ gamma.gammas[b]
            if dense:
                I_S, I_T, I_C = np.eye(d), np.eye(n), np.eye(N)
                curv = (
                    np.kron(np.kron(np.kron(RS, I_T), I_C), I_C)
                    + np.kron(np.kron(np.kron(I_S, RT), I_C), I_C)
                    + np.kron(np.kron(np.kron(I_S, I_T), RC), I_C)
                    + np.kron(np.kron(np.kron(I_S, I_T), I_C), RC)
                )
                total += np.trace(np.kron(gg, np.eye(n * N * N)) @ curv)
            else:
                total += (
                    np.trace(gg @ RS) * n * N * N
                    + np.trace(gg) * (np.trace(RT) * N * N + 2 * np.trace(RC) * n * N)
                )
    return complex(total)


def frame_rotation(chart: MetricChart, gamma: GammaRep, X: np.ndarray):
    """Global frame change generated by the so element X (tensor convention).

    Returns (Lambda, S): the vector transformation Lambda = exp(M) with M the
    matrix of X, and its spinor lift S = exp(Omega(X)).
    """
    eta = chart.sig.eta
    M = geo.tensor_to_matrix(X, eta)
    return expm(M), expm(_so_lift_spin(X, gamma))


def rotate_fields(A: np.ndarray, psi: np.ndarray | None, Lam: np.ndarray, S: np.ndarray, eta: np.ndarray):
    """Components of A and psi in the frame e' = e Lam^{-1}.

    Pair with ``geometry.rotate_frame(chart, inv(Lam))``. Vector slots go to
    Lam V, lowered slots to (eta Lam eta) X and spinors to S psi.
    """
    Lc = eta[:, None] * Lam * eta[None, :]
    A2 = np.einsum("...kij,ak,bi,cj->...abc", A, Lc, Lc, Lc)
    if psi is None:
        return A2, None
    psi2 = np.einsum("ab,...bk,lk->...al", S, psi, Lam)
    return A2, psi2


def weak_field_energy_density(chart: MetricChart, F: np.ndarray) -> np.ndarray:
    """Torsion energy density 1/4 ||F||^2 (the rescaled torsion_term integrand up to sign)."""
    return 0.25 * tor.norm_sq_density(chart, F)


__all__ = [
    "ActionBreakdown",
    "SpinCurrent",
    "FORMS",
    "rank_e_prime",
    "torsion_constant",
    "lambda_0",
    "spin_current",
    "spin_current_components",
    "total_action",
    "stationarity_residual",
    "lattice_norm",
    "action_gradient",
    "universal_action",
    "simple_type_closed_form",
    "cosmological_density",
    "dense_phi_D",
    "trace_phi_squared",
    "cross_term",
    "quantized_curvature_trace",
    "frame_rotation",
    "rotate_fields",
    "TwistedSpinorField",
]
