"""Cross-module identity battery used by ``clifftorsion check``."""
from __future__ import annotations

import numpy as np

from . import action as act
from . import geometry as geo
from . import spinor as sp
from . import torsion as tor
from .clifford import (
    Multivector,
    Signature,
    clifford_product,
    gamma_cl,
    symbol_map,
    symbol_map_inverse,
    symbol_matrix,
)


def _row(name: str, residual: float, threshold: float) -> dict:
    residual = float(residual)
    return {"identity": name, "residual": residual, "threshold": threshold, "passed": bool(residual <= threshold)}


def _random_mv(sig: Signature, rng) -> Multivector:
    return Multivector(sig, rng.normal(size=2**sig.n))


def clifford_rows(sig: Signature, rng) -> list[dict]:
    a, b, c = (_random_mv(sig, rng) for _ in range(3))
    lhs = clifford_product(clifford_product(a, b), c).coeffs
    rhs = clifford_product(a, clifford_product(b, c)).coeffs
    assoc = np.max(np.abs(lhs - rhs)) / (1 + np.max(np.abs(lhs)))
    G = gamma_cl(sig)
    eta = sig.eta
    N = 2**sig.n
    rel = max(
        np.max(np.abs(G[i] @ G[j] + G[j] @ G[i] - 2 * sig.eps * eta[i] * (i == j) * np.eye(N)))
        for i in range(sig.n)
        for j in range(sig.n)
    )
    S = symbol_matrix(sig)
    bij = float(np.linalg.matrix_rank(S) != N)
    x = _random_mv(sig, rng)
    rt = np.max(np.abs(symbol_map_inverse(symbol_map(x)).coeffs - x.coeffs))
    return [
        _row("clifford associativity", assoc, 1e-12),
        _row("clifford relation on forms", rel, 1e-12),
        _row("symbol map bijective", bij, 0.0),
        _row("symbol map roundtrip", rt, 1e-12),
    ]


def gamma_rows(sig: Signature) -> list[dict]:
    G = sp.build_gamma(sig)
    g, t, H = G.gammas, G.tau_S, G.hermitian_form
    I = np.eye(G.d)
    anti = max(
        np.max(np.abs(g[a] @ g[b] + g[b] @ g[a] - 2 * sig.eps * sig.eta[a] * (a == b) * I))
        for a in range(sig.n)
        for b in range(sig.n)
    )
    tau = max(np.max(np.abs(t @ g[a] + g[a] @ t)) for a in range(sig.n))
    tau2 = np.max(np.abs(t @ t - I))
    herm = max(np.max(np.abs(H @ g[a] + (H @ g[a]).conj().T)) for a in range(sig.n))
    return [
        _row("gamma anticommutators", anti, 1e-14),
        _row("grading squares to one", tau2, 1e-14),
        _row("grading anticommutes with gammas", tau, 1e-14),
        _row("clifford action anti-hermitian", herm, 1e-14),
    ]


def battery(chart: geo.MetricChart, sig: Signature, form: str, g: float, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    gamma = sp.build_gamma(sig)
    n = sig.n
    flat = geo.build_chart("flat", chart.dims, chart.h, sig)
    rows = clifford_rows(sig, rng) + gamma_rows(sig)

    A = tor.random_potential(chart, rng, 0.3)
    back = tor.potential_from_torsion(tor.torsion_from_potential(A))
    rows.append(_row("torsion potential roundtrip", np.max(np.abs(back.data - A.data)), 1e-13))

    X = rng.normal(size=chart.dims + (n,) * 3)
    X = 0.5 * (X - np.swapaxes(X, -1, -2))
    Y = rng.normal(size=chart.dims + (n,) * 4)
    Y = Y - np.swapaxes(Y, -3, -4)
    Y = 0.5 * (Y - np.swapaxes(Y, -1, -2))
    lhs = geo.inner(chart, tor.d_A(chart, A.data, X, 1), Y, 2, "so")
    rhs = geo.inner(chart, X, tor.delta_A(chart, A.data, Y, 2), 1, "so")
    rows.append(_row("covariant codifferential is the lattice adjoint", abs(lhs - rhs) / (1 + abs(lhs)), 1e-12))

    Af = tor.random_potential(flat, rng, 0.3)
    rows.append(_row("flat Bianchi identity", np.max(np.abs(tor.bianchi_residual(Af))), 1e-10))

    psi = rng.normal(size=flat.dims + (gamma.d, n)) + 1j * rng.normal(size=flat.dims + (gamma.d, n))
    b = act.total_action(Af, psi, flat, gamma, form, g)
    rows.append(_row("fermion term is real", abs(b.fermion_term.imag), 1e-10))

    D = sp.twisted_dirac(chart, gamma, A.data, g)
    chi = rng.normal(size=psi.shape) + 1j * rng.normal(size=psi.shape)
    psi_c = rng.normal(size=chart.dims + (gamma.d, n)) + 1j * rng.normal(size=chart.dims + (gamma.d, n))
    l = np.vdot(chi, sp.dirac_apply(D, psi_c))
    r = np.vdot(sp.dirac_apply_adjoint(D, chi), psi_c)
    rows.append(_row("Dirac adjoint", abs(l - r) / (1 + abs(l)), 1e-12))

    # constant-coefficient simple type on the flat chart
    raw = rng.normal(size=(n, n, n))
    Ac = np.broadcast_to(0.5 * (raw - np.swapaxes(raw, -1, -2)), flat.dims + (n, n, n))
    phi = rng.normal(size=(n, n))
    phi = phi + phi.T
    Ds = sp.simple_type(sp.twisted_dirac(flat, gamma, Ac, g), phi)
    lhs_t, rhs_t = sp.trace_identity(Ds)
    rows.append(_row("trace identity for V_D", np.max(np.abs(lhs_t - rhs_t)) / (1 + np.max(np.abs(lhs_t))), 1e-8))
    u, c = act.universal_action(Ds), act.simple_type_closed_form(Ds)
    rows.append(_row("universal action closed form", abs(u - c) / abs(c), 1e-8))

    Fr = rng.normal(size=(n,) * 4)
    Fr = Fr - np.swapaxes(Fr, 0, 1)
    Fr = Fr - np.swapaxes(Fr, 2, 3)
    eta = sig.eta
    nF = np.einsum("a,b,j,k,abjk,abjk->", eta, eta, eta, eta, Fr, Fr)
    tphi = act.trace_phi_squared(Fr, gamma, dense=True)
    rows.append(_row("tr phi_D^2 = -2^{2n} rk(S) |F|^2", abs(tphi / nF + act.torsion_constant(gamma)) / act.torsion_constant(gamma), 1e-10))
    K = 0.7
    Rm = np.zeros((n,) * 4)
    for a in range(n):
        for bb in range(n):
            Rm[a, bb, a, bb] += K * eta[a] * eta[bb]
            Rm[a, bb, bb, a] -= K * eta[a] * eta[bb]
    scal = np.einsum("a,b,abab->", eta, eta, Rm)
    want = -sig.eps * act.rank_e_prime(gamma) / 4.0
    qt = act.quantized_curvature_trace(Rm, gamma, dense=(n == 2))
    rows.append(_row("tr_gamma curv = -eps rk(E')/4 scal", abs(qt / scal - want) / abs(want), 1e-10))

    # gradient against central differences, three directions
    psi_g = 0.3 * psi_c
    Ag = 0.5 * A.data
    GA, Gp = act.action_gradient(Ag, psi_g, chart, gamma, form, g)
    worst = 0.0
    for _ in range(3):
        dA = tor.random_potential(chart, rng).data
        dp = rng.normal(size=psi_g.shape) + 1j * rng.normal(size=psi_g.shape)
        e = 1e-5
        S = lambda t: act.total_action(Ag + t * dA, psi_g + t * dp, chart, gamma, form, g).total.real
        fd = (S(e) - S(-e)) / (2 * e)
        an = np.sum(GA * dA) + np.real(np.sum(np.conj(Gp) * dp))
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    rows.append(_row("action gradient vs central differences", worst, 1e-6))
    return rows
