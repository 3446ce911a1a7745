import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clifftorsion.clifford import (
    EndValuedOneForm,
    Multivector,
    Signature,
    SignatureError,
    clifford_action_on_forms,
    clifford_product,
    exterior_mult,
    gamma_cl,
    gamma_of,
    inner_lambda,
    interior_mult,
    project_pq,
    quantize,
    symbol_map,
    symbol_map_inverse,
    theta,
)
from clifftorsion.spinor import build_gamma

sigs = st.sampled_from([(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (4, 0), (1, 3), (2, 2), (3, 1)])
eps_s = st.sampled_from([1, -1])


def mv(sig, seed):
    r = np.random.default_rng(seed)
    N = 2**sig.n
    return Multivector(sig, r.normal(size=N) + 1j * r.normal(size=N))


def test_cl10_generator_squares_to_one():
    e1 = Multivector.generator(Signature(1, 0), 0)
    assert (e1 * e1).allclose(Multivector.scalar(Signature(1, 0)))


def test_anticommuting_generators():
    sig = Signature(2, 0)
    e1, e2 = Multivector.generator(sig, 0), Multivector.generator(sig, 1)
    assert (e1 * e2 + e2 * e1).allclose(Multivector.zero(sig))
    assert (e1 * e2).allclose(Multivector.blade(sig, 0b11))


def test_negative_directions_and_eps():
    e = Multivector.generator(Signature(1, 1, -1), 1)
    assert (e * e).allclose(Multivector.scalar(e.sig, 1.0))  # eps * eta = (-1)(-1)


@pytest.mark.parametrize("p,q,eps", [(-1, 2, 1), (0, 0, 1), (2, 0, 0)])
def test_bad_signature_rejected(p, q, eps):
    with pytest.raises(SignatureError):
        Signature(p, q, eps)


def test_admissibility():
    assert Signature(4, 0).problems() == []
    assert Signature(1, 3).problems() == []
    assert any("even" in s for s in Signature(3, 0).problems())
    assert any("mod 4" in s for s in Signature(1, 0).problems())
    with pytest.raises(SignatureError):
        Signature(5, 0).require_admissible()


def test_mismatched_signatures_rejected():
    a = Multivector.scalar(Signature(2, 0))
    b = Multivector.scalar(Signature(1, 1))
    with pytest.raises(SignatureError):
        clifford_product(a, b)


@given(sigs, eps_s, st.integers(0, 10_000))
def test_associativity(pq, eps, seed):
    sig = Signature(*pq, eps)
    a, b, c = mv(sig, seed), mv(sig, seed + 1), mv(sig, seed + 2)
    assert ((a * b) * c).allclose(a * (b * c), atol=1e-11)


@given(sigs, eps_s, st.integers(0, 10_000))
def test_vector_square_is_quadratic_form(pq, eps, seed):
    sig = Signature(*pq, eps)
    v = np.random.default_rng(seed).normal(size=sig.n)
    x = Multivector.vector(sig, v)
    want = eps * float(np.sum(sig.eta * v**2))
    assert (x * x).allclose(Multivector.scalar(sig, want), atol=1e-12)


@given(sigs, eps_s, st.integers(0, 10_000))
def test_symbol_map_roundtrip_and_unit(pq, eps, seed):
    sig = Signature(*pq, eps)
    a = mv(sig, seed)
    assert symbol_map_inverse(symbol_map(a)).allclose(a)
    # on the vectors the symbol map is the identity
    v = Multivector.vector(sig, np.arange(1, sig.n + 1))
    assert symbol_map(v).allclose(v)


@given(sigs, eps_s)
def test_canonical_clifford_map(pq, eps):
    sig = Signature(*pq, eps)
    G = gamma_cl(sig)
    N = 2**sig.n
    for i in range(sig.n):
        for j in range(sig.n):
            ac = G[i] @ G[j] + G[j] @ G[i]
            assert np.allclose(ac, 2 * eps * sig.eta[i] * (i == j) * np.eye(N), atol=1e-14)
    # ext and int are nilpotent, {int_i, ext_j} = eta_ij
    for i in range(sig.n):
        E, I = exterior_mult(sig, i), interior_mult(sig, i)
        assert np.allclose(E @ E, 0) and np.allclose(I @ I, 0)
        assert np.allclose(I @ E + E @ I, sig.eta[i] * np.eye(N))


@given(sigs, eps_s, st.integers(0, 10_000))
def test_left_action_is_a_representation(pq, eps, seed):
    sig = Signature(*pq, eps)
    a, b = mv(sig, seed), mv(sig, seed + 7)
    lhs = clifford_action_on_forms(a * b)
    rhs = clifford_action_on_forms(a) @ clifford_action_on_forms(b)
    assert np.allclose(lhs, rhs, atol=1e-11)


def test_grade_and_involution():
    sig = Signature(2, 2)
    a = mv(sig, 3)
    total = sum((a.grade(k) for k in range(1, 5)), a.grade(0))
    assert total.allclose(a)
    assert a.involution().involution().allclose(a)
    assert (a * a).involution().allclose(a.involution() * a.involution(), atol=1e-11)


def test_inner_lambda_signs():
    sig = Signature(1, 1)
    e2 = Multivector.generator(sig, 1)
    assert inner_lambda(e2, e2) == -1
    assert inner_lambda(Multivector.blade(sig, 3), Multivector.blade(sig, 3)) == -1


@given(st.sampled_from([(2, 0), (4, 0), (1, 3), (2, 2), (1, 1)]), eps_s, st.integers(0, 10_000))
def test_quantize_theta_right_inverse(pq, eps, seed):
    sig = Signature(*pq, eps)
    gamma = build_gamma(sig)
    r = np.random.default_rng(seed)
    d = gamma.d
    Phi = r.normal(size=(d, d)) + 1j * r.normal(size=(d, d))
    th = theta(gamma)
    assert np.allclose(quantize(EndValuedOneForm(sig, th.entries @ Phi), gamma), Phi, atol=1e-12)
    om = EndValuedOneForm(sig, r.normal(size=(sig.n, d, d)))
    P, Q = project_pq(om, gamma)
    assert np.allclose(quantize(Q, gamma), 0, atol=1e-12)
    assert np.allclose((P + Q).entries, om.entries)


def test_quantize_blade_coefficients_agree_with_one_form(rng):
    sig = Signature(2, 0)
    gamma = build_gamma(sig)
    ent = rng.normal(size=(2, 2, 2))
    arr = np.zeros((4, 2, 2), dtype=complex)
    arr[1], arr[2] = ent[0], ent[1]
    assert np.allclose(quantize(arr, gamma), quantize(EndValuedOneForm(sig, ent), gamma))
    a, b = mv(sig, 5), mv(sig, 6)
    assert np.allclose(gamma_of(gamma, a * b), gamma_of(gamma, a) @ gamma_of(gamma, b))


def test_quantize_shape_errors():
    gamma = build_gamma(Signature(2, 0))
    with pytest.raises(ValueError):
        quantize(np.zeros((3, 2, 2)), gamma)
    with pytest.raises(ValueError):
        EndValuedOneForm(Signature(2, 0), np.zeros((3, 2, 2)))
