import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clifftorsion import geometry as geo
from clifftorsion import spinor as sp
from clifftorsion import torsion as tor
from clifftorsion.clifford import Signature, SignatureError

even_sigs = st.sampled_from([(2, 0), (1, 1), (0, 2), (4, 0), (1, 3), (3, 1), (2, 2), (0, 4)])


def rand_psi(chart, gamma, rng, m=None):
    m = chart.n if m is None else m
    shape = chart.dims + (gamma.d, m)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@given(even_sigs, st.sampled_from([1, -1]))
def test_gamma_rep_axioms(pq, eps):
    sig = Signature(*pq, eps)
    G = sp.build_gamma(sig)
    I = np.eye(G.d)
    assert G.d == 2 ** (sig.n // 2)
    for a in range(sig.n):
        for b in range(sig.n):
            ac = G.gammas[a] @ G.gammas[b] + G.gammas[b] @ G.gammas[a]
            assert np.array_equal(ac, 2 * eps * sig.eta[a] * (a == b) * I)
        assert np.allclose(G.tau_S @ G.gammas[a], -G.gammas[a] @ G.tau_S, atol=0)
        Hg = G.hermitian_form @ G.gammas[a]
        assert np.allclose(Hg, -Hg.conj().T, atol=0)
    assert np.allclose(G.tau_S @ G.tau_S, I, atol=0)
    H = G.hermitian_form
    assert np.allclose(H, H.conj().T, atol=0)


def test_riemannian_pairing():
    # eps = -1: gammas are anti-hermitian already and the pairing is the standard one
    G = sp.build_gamma(Signature(4, 0, -1))
    assert np.allclose(G.hermitian_form, np.eye(4))
    # eps = +1: gammas are hermitian, so H must anticommute with them and is indefinite
    G = sp.build_gamma(Signature(4, 0, 1))
    ev = np.linalg.eigvalsh(G.hermitian_form)
    assert ev.min() < 0 < ev.max()


def test_odd_dimension_rejected():
    with pytest.raises(SignatureError):
        sp.build_gamma(Signature(3, 0))


def test_field_validation(flat2):
    ch, gamma = flat2
    with pytest.raises(ValueError):
        sp.TwistedSpinorField(ch, np.zeros(ch.dims + (2, 3)))
    bad = np.zeros(ch.dims + (2, 2), dtype=complex)
    bad[0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        sp.TwistedSpinorField(ch, bad)
    c = sp.TwistedSpinorField.constant(ch, np.ones((2, 2)))
    assert c.data.shape == ch.dims + (2, 2)


@given(st.integers(0, 1000), st.sampled_from(["flat", "conformal"]))
def test_adjoint_is_lattice_adjoint(seed, preset):
    rng = np.random.default_rng(seed)
    sig = Signature(2, 0) if preset == "conformal" else Signature(1, 3)
    kw = {"amplitude": 0.2} if preset == "conformal" else {}
    ch = geo.build_chart(preset, (4,) * sig.n, 0.5, sig, **kw)
    gamma = sp.build_gamma(sig)
    A = tor.random_potential(ch, rng, 0.4).data
    D = sp.twisted_dirac(ch, gamma, A, 0.7)
    phi = rng.normal(size=(sig.n, sig.n))
    D = sp.simple_type(D, phi + phi.T)
    u, v = rand_psi(ch, gamma, rng), rand_psi(ch, gamma, rng)
    l = np.vdot(u, sp.dirac_apply(D, v))
    r = np.vdot(sp.dirac_apply_adjoint(D, u), v)
    assert abs(l - r) <= 1e-11 * (1 + abs(l))


@given(st.integers(0, 1000), even_sigs)
def test_dirac_symmetric_under_pairing_on_flat(seed, pq):
    rng = np.random.default_rng(seed)
    sig = Signature(*pq)
    ch = geo.build_chart("flat", (3,) * sig.n, 0.5, sig)
    gamma = sp.build_gamma(sig)
    D = sp.twisted_dirac(ch, gamma, tor.random_potential(ch, rng).data, 0.5)
    u, v = rand_psi(ch, gamma, rng), rand_psi(ch, gamma, rng)
    uv = np.sum(ch.weight * sp.fiber_pairing(D, u, sp.dirac_apply(D, v)))
    vu = np.sum(ch.weight * sp.fiber_pairing(D, v, sp.dirac_apply(D, u)))
    assert abs(uv - np.conj(vu)) <= 1e-11 * (1 + abs(uv))


def test_constant_spinor_in_flat_kernel(flat4):
    ch, gamma = flat4
    D = sp.twisted_dirac(ch, gamma)
    psi = np.broadcast_to(np.arange(16.0).reshape(4, 4), ch.dims + (4, 4))
    assert np.max(np.abs(sp.dirac_apply(D, psi))) == 0


def test_plane_wave_dirac_squared_is_laplacian():
    sig = Signature(2, 0)
    ch = geo.build_chart("flat", (8, 8), 0.5, sig)
    gamma = sp.build_gamma(sig)
    D = sp.twisted_dirac(ch, gamma)
    x = ch.coords()
    k = 2 * np.pi / 4.0
    psi = np.exp(1j * k * x[..., 0])[..., None, None] * np.ones((2, 2))
    lam = -((np.sin(k * 0.5) / 0.5) ** 2)  # symbol of the squared centered difference
    assert np.allclose(sp.dirac_apply(D, sp.dirac_apply(D, psi)), lam * psi)


def test_bochner_of_quantized_connection(flat4, rng):
    ch, gamma = flat4
    raw = rng.normal(size=(4, 4, 4))
    A = np.broadcast_to(0.5 * (raw - np.swapaxes(raw, -1, -2)), ch.dims + (4, 4, 4))
    D = sp.twisted_dirac(ch, gamma, A, 0.3)
    B, Phi = sp.bochner_decompose(D)
    assert np.max(np.abs(Phi)) < 1e-12
    assert sp.clifford_commutator_defect(D, B) < 1e-12
    want = np.einsum("ij,...akl->...aikjl", np.eye(4), D.twist_conn).reshape(B.shape)
    assert np.allclose(B, want, atol=1e-12)


def test_simple_type_zero_order_recovered(flat4, rng):
    ch, gamma = flat4
    phi = rng.normal(size=(4, 4))
    phi = phi + phi.T
    D = sp.simple_type(sp.twisted_dirac(ch, gamma), phi)
    _, Phi = sp.bochner_decompose(D)
    want = np.kron(gamma.tau_S, phi)
    assert np.allclose(Phi, want, atol=1e-12)


def test_flat_lichnerowicz_potential_vanishes(flat2):
    ch, gamma = flat2
    _, V = sp.second_order_decompose(sp.twisted_dirac(ch, gamma))
    assert np.max(np.abs(V)) < 1e-12


@given(st.integers(0, 1000))
def test_twister_is_clifford_traceless(seed):
    rng = np.random.default_rng(seed)
    sig = Signature(2, 0)
    ch = geo.build_chart("conformal", (4, 4), 0.5, sig, amplitude=0.2)
    gamma = sp.build_gamma(sig)
    D = sp.twisted_dirac(ch, gamma, tor.random_potential(ch, rng).data, 0.4)
    T = sp.twister(D, rand_psi(ch, gamma, rng))
    assert np.max(np.abs(sp.quantize_field(gamma, T))) < 1e-11


def test_spin_connection_is_clifford_compatible(conformal2):
    ch, gamma = conformal2
    D = sp.twisted_dirac(ch, gamma)
    assert sp.clifford_commutator_defect(D) < 1e-12


def test_trace_identity_converges_on_curved_chart():
    errs = []
    sig = Signature(2, 0)
    gamma = sp.build_gamma(sig)
    for L in (8, 16):
        ch = geo.build_chart("conformal", (L, L), 8.0 / L, sig, amplitude=0.1)
        D = sp.simple_type(sp.twisted_dirac(ch, gamma), np.diag([0.5, -0.3]))
        lhs, rhs = sp.trace_identity(D)
        errs.append(np.max(np.abs(lhs - rhs)))
    assert errs[1] < errs[0] / 3


def test_universal_action_matches_closed_form(flat4, rng):
    from clifftorsion import action as act

    ch, gamma = flat4
    phi = rng.normal(size=(4, 4))
    D = sp.simple_type(sp.twisted_dirac(ch, gamma), phi + phi.T)
    u, c = sp.universal_action(D), act.simple_type_closed_form(D)
    assert abs(u - c) <= 1e-10 * abs(c)
