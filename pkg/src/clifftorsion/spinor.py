"""Gamma matrices, twisted spinor fields and Dirac operators on lattice charts."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .clifford import Signature, SignatureError

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def _euclidean_gammas(n: int) -> list[np.ndarray]:
    # hermitian generators squaring to +I, built by the Pauli ladder
    if n == 2:
        return [_SX, _SY]
    lower = _euclidean_gammas(n - 2)
    d = lower[0].shape[0]
    eye = np.eye(d, dtype=complex)
    return [np.kron(g, _SX) for g in lower] + [np.kron(eye, _SY), np.kron(eye, _SZ)]


@dataclass(frozen=True, eq=False)
class GammaRep:
    sig: Signature
    gammas: np.ndarray
    tau_S: np.ndarray
    hermitian_form: np.ndarray

    @property
    def d(self) -> int:
        return self.gammas.shape[1]

    @property
    def lowered(self) -> np.ndarray:
        """gamma_k = eta_kk gamma^k."""
        return self.sig.eta[:, None, None] * self.gammas

    def pair(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """<u, v>_S = u^dagger H v, contracted over the last axis."""
        return np.einsum("...a,ab,...b->...", u.conj(), self.hermitian_form, v)


@lru_cache(maxsize=None)
def build_gamma(sig: Signature) -> GammaRep:
    n = sig.n
    if n % 2:
        raise SignatureError(f"spinor representation needs even n, got {n}")
    base = _euclidean_gammas(n)
    sq = sig.eps * sig.eta
    coef = np.where(sq > 0, 1.0, 1j)
    gam = np.array([c * g for c, g in zip(coef, base)])

    prod = np.eye(base[0].shape[0], dtype=complex)
    for g in base:
        prod = prod @ g
    tau = prod if np.allclose(prod @ prod, np.eye(len(prod))) else 1j * prod

    herm_idx = [a for a in range(n) if sq[a] > 0]
    pick = herm_idx if len(herm_idx) % 2 == 0 else [a for a in range(n) if sq[a] < 0]
    H = np.eye(len(prod), dtype=complex)
    for a in pick:
        H = H @ base[a]
    k = len(pick)
    H = H * 1j ** (k * (k - 1) // 2)
    for arr in (gam, tau, H):
        arr.setflags(write=False)
    return GammaRep(sig, gam, tau, H)


# fields and operators

from . import geometry as geo  # noqa: E402
from .clifford import theta  # noqa: E402
from .geometry import MetricChart  # noqa: E402


@dataclass(frozen=True, eq=False)
class TwistedSpinorField:
    """psi = sum_k psi^k (x) e_k, stored as data[..., alpha, k]."""

    chart: MetricChart
    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=complex)
        d = 2 ** (self.chart.n // 2)
        want = self.chart.dims + (d, self.chart.n)
        if a.shape != want:
            raise ValueError(f"twisted spinor field must have shape {want}, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("twisted spinor field has non-finite entries")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @classmethod
    def constant(cls, chart: MetricChart, site: np.ndarray) -> "TwistedSpinorField":
        return cls(chart, np.broadcast_to(site, chart.dims + np.shape(site)))

    @classmethod
    def random(cls, chart: MetricChart, rng: np.random.Generator, scale: float = 1.0) -> "TwistedSpinorField":
        d = 2 ** (chart.n // 2)
        shape = chart.dims + (d, chart.n)
        return cls(chart, scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape)))


def spin_connection(chart: MetricChart, gamma: GammaRep) -> np.ndarray:
    """Omega_a = -(eps/4) sum_bc W[a,b,c] gamma^b gamma^c, the lift of nabla^LC to spinors."""
    W = geo.frame_connection(chart)
    gg = np.einsum("bij,cjk->bcik", gamma.gammas, gamma.gammas)
    return -(gamma.sig.eps / 4.0) * np.einsum("...abc,bcik->...aik", W, gg)


@dataclass(frozen=True, eq=False)
class DiracOperator:
    """D = sum_a gamma^a nabla_a + Phi acting on S (x) C^m valued lattice fields.

    nabla_a = E^mu_a d_mu + Omega_a (x) 1 + 1 (x) conn[a], d_mu the centered
    difference. ``zero_order`` is the site-local term Phi on the full fiber,
    flattened row-major over (spinor, twist).
    """

    chart: MetricChart
    gamma: GammaRep
    twist_conn: np.ndarray
    zero_order: np.ndarray | None = None
    twist_metric: np.ndarray | None = None
    kind: str = "quantized_clifford"

    @property
    def m(self) -> int:
        return self.twist_conn.shape[-1]

    @property
    def fiber(self) -> int:
        return self.gamma.d * self.m

    @property
    def spin(self) -> np.ndarray:
        return _cached_spin(self)

    def without_zero_order(self) -> "DiracOperator":
        return DiracOperator(self.chart, self.gamma, self.twist_conn, None, self.twist_metric, "quantized_clifford")


def _cached_spin(D: DiracOperator) -> np.ndarray:
    cache = D.__dict__.setdefault("_cache", {})
    if "spin" not in cache:
        cache["spin"] = spin_connection(D.chart, D.gamma)
    return cache["spin"]


def twisted_dirac(chart: MetricChart, gamma: GammaRep, A: np.ndarray | None = None, g: float = 1.0) -> DiracOperator:
    """Quantization of the twisted spin connection nabla^S (x) 1 + 1 (x) (nabla^LC + g A) on S (x) TM."""
    if gamma.sig != chart.sig:
        raise SignatureError("representation and chart signatures differ")
    W = geo.frame_connection(chart)
    conn = W if A is None else W + g * np.asarray(A)
    mats = geo.tensor_to_matrix(conn, chart.sig.eta).astype(complex)
    return DiracOperator(chart, gamma, mats, None, chart.sig.eta.copy())


def simple_type(D: DiracOperator, phi_twist: np.ndarray) -> DiracOperator:
    """D + tau phi with phi = 1_S (x) phi_twist commuting with the Clifford action."""
    phi_twist = np.asarray(phi_twist, dtype=complex)
    Phi = np.einsum("ab,...kl->...akbl", D.gamma.tau_S, phi_twist)
    Phi = Phi.reshape(phi_twist.shape[:-2] + (D.fiber, D.fiber))
    Phi = np.broadcast_to(Phi, D.chart.dims + (D.fiber, D.fiber)).copy()
    return DiracOperator(D.chart, D.gamma, D.twist_conn, Phi, D.twist_metric, "simple_type")


def with_zero_order(D: DiracOperator, Phi: np.ndarray, kind: str = "general") -> DiracOperator:
    Phi = np.broadcast_to(np.asarray(Phi, dtype=complex), D.chart.dims + (D.fiber, D.fiber)).copy()
    return DiracOperator(D.chart, D.gamma, D.twist_conn, Phi, D.twist_metric, kind)


def _apply_site(M: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Per-site fiber matrix (fiber x fiber) acting on psi[..., d, m]."""
    sh = psi.shape
    out = np.einsum("...ij,...j->...i", M, psi.reshape(sh[:-2] + (-1,)))
    return out.reshape(sh)


def covariant_derivative(D: DiracOperator, psi: np.ndarray) -> np.ndarray:
    """nabla_a psi for every frame direction a, stacked on a new axis after the sites."""
    chart = D.chart
    nd = chart.ndim
    dpsi = np.stack([geo.dcen(psi, mu, chart.h[mu]) for mu in range(nd)], axis=nd)  # [mu, d, m]
    if chart.is_flat:
        out = dpsi.copy()
    else:
        out = np.einsum("...ma,...mik->...aik", chart.frame, dpsi)
        out = out + np.einsum("...aij,...jk->...aik", D.spin, psi)
    out = out + np.einsum("...akl,...il->...aik", D.twist_conn, psi)
    return out


def dirac_apply(D: DiracOperator, psi) -> np.ndarray:
    data = psi.data if isinstance(psi, TwistedSpinorField) else np.asarray(psi, dtype=complex)
    if isinstance(psi, TwistedSpinorField) and psi.chart is not D.chart and psi.chart.dims != D.chart.dims:
        raise ValueError("spinor field and operator live on different lattices")
    if data.shape[: D.chart.ndim] != D.chart.dims:
        raise ValueError(f"field lattice {data.shape[:D.chart.ndim]} does not match chart {D.chart.dims}")
    nab = covariant_derivative(D, data)
    out = np.einsum("aij,...ajk->...ik", D.gamma.gammas, nab)
    if D.zero_order is not None:
        out = out + _apply_site(D.zero_order, data)
    return out


def dirac_apply_adjoint(D: DiracOperator, chi: np.ndarray) -> np.ndarray:
    """Plain (Euclidean, unweighted) adjoint of dirac_apply on the lattice."""
    chart = D.chart
    nd = chart.ndim
    chi = np.asarray(chi, dtype=complex)
    gdag = np.conj(np.swapaxes(D.gamma.gammas, -1, -2))
    y = np.einsum("aij,...jk->...aik", gdag, chi)  # adjoint of the gamma contraction
    out = np.einsum("...akl,...aik->...il", np.conj(D.twist_conn), y)
    if not chart.is_flat:
        sdag = np.conj(np.swapaxes(D.spin, -1, -2))
        out = out + np.einsum("...aij,...ajk->...ik", sdag, y)
        z = np.einsum("...ma,...aik->...mik", chart.frame, y)
    else:
        z = y
    for mu in range(nd):
        out = out - geo.dcen(np.take(z, mu, axis=nd), mu, chart.h[mu])
    if D.zero_order is not None:
        out = out + _apply_site(np.conj(np.swapaxes(D.zero_order, -1, -2)), chi)
    return out


def fiber_pairing(D: DiracOperator, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Per-site <u, v> = sum_k t_k (u^k)^dagger H v^k with t the twist metric."""
    t = np.ones(D.m) if D.twist_metric is None else D.twist_metric
    return np.einsum("...ak,ab,...bk,k->...", u.conj(), D.gamma.hermitian_form, v, t)


def dirac_bilinear(D: DiracOperator, psi) -> complex:
    """sum over sites of h^n sqrt|g| <psi, D psi>."""
    data = psi.data if isinstance(psi, TwistedSpinorField) else np.asarray(psi)
    dens = fiber_pairing(D, data, dirac_apply(D, data))
    return complex(np.sum(D.chart.weight * dens))


# decomposition machinery

def _fiber_basis(D: DiracOperator) -> np.ndarray:
    """Constant fields, one per fiber basis vector: shape (fiber,) + dims + (d, m)."""
    eye = np.eye(D.fiber, dtype=complex).reshape((D.fiber,) + (1,) * D.chart.ndim + (D.gamma.d, D.m))
    return np.broadcast_to(eye, (D.fiber,) + D.chart.dims + (D.gamma.d, D.m))


def _site_matrix(op, D: DiracOperator) -> np.ndarray:
    """Per-site matrix of a lattice operator restricted to coordinate-constant fields."""
    cols = [op(b).reshape(D.chart.dims + (D.fiber,)) for b in _fiber_basis(D)]
    return np.stack(cols, axis=-1)


def _linear_probe_commutator(D: DiracOperator, j: int, chi: np.ndarray) -> np.ndarray:
    """[D, x^j] chi, evaluated from differences of the linear coordinate function (no wraparound)."""
    chart = D.chart
    avg = 0.5 * (np.roll(chi, -1, j) + np.roll(chi, 1, j))
    if chart.is_flat:
        return np.einsum("ij,...jk->...ik", D.gamma.gammas[j], avg)
    coef = np.einsum("...a,aij->...ij", chart.frame[..., j, :], D.gamma.gammas)
    return np.einsum("...ij,...jk->...ik", coef, avg)


def _delta_dx(chart: MetricChart) -> np.ndarray:
    """delta_g d x^j = g^{ab} Gamma^j_ab for each coordinate j."""
    if chart.is_flat:
        return np.zeros(chart.dims + (chart.n,))
    gi = np.linalg.inv(chart.g)
    return np.einsum("...ab,...jab->...j", gi, chart.christoffel)


def bochner_apply(D: DiracOperator, psi: np.ndarray) -> np.ndarray:
    """partial_B,a psi for all a from 2 ev_g(df, partial_B psi) = eps([D^2, f] - delta_g df) psi."""
    chart = D.chart
    eps = chart.sig.eps
    eta = chart.sig.eta
    Dpsi = dirac_apply(D, psi)
    dd = _delta_dx(chart)
    evs = []
    for j in range(chart.n):
        comm = dirac_apply(D, _linear_probe_commutator(D, j, psi)) + _linear_probe_commutator(D, j, Dpsi)
        evs.append(0.5 * eps * (comm - dd[..., j, None, None] * psi))
    ev = np.stack(evs, axis=chart.ndim)  # ev_g(dx^j, partial_B psi) = sum_a eta_aa E^j_a partial_B,a
    if chart.is_flat:
        return eta[:, None, None] * ev
    return eta[:, None, None] * np.einsum("...aj,...jik->...aik", chart.frame_inv, ev)


def bochner_decompose(D: DiracOperator) -> tuple[np.ndarray, np.ndarray]:
    """Bochner connection matrices B[..., a, :, :] and Phi_D per site.

    B_a is the action of partial_B,a on coordinate-constant fields, so that
    partial_B,a = E^mu_a d_mu + B_a. Exact per site for constant coefficients
    on flat charts, second-order accurate otherwise.
    """
    chart = D.chart
    cols = [bochner_apply(D, f).reshape(chart.dims + (chart.n, D.fiber)) for f in _fiber_basis(D)]
    B = np.stack(cols, axis=-1)
    Dmat = _site_matrix(lambda f: dirac_apply(D, f), D)
    G = np.array([np.kron(g, np.eye(D.m)) for g in D.gamma.gammas])
    slash_B = np.einsum("aij,...ajk->...ik", G, B)
    return B, Dmat - slash_B


def bochner_laplacian_apply(D: DiracOperator, B: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Delta_B = eps sum_a eta_aa (partial_B,a partial_B,a - partial_B,(nabla_a e_a))."""
    chart = D.chart
    eps, eta = chart.sig.eps, chart.sig.eta
    nd = chart.ndim

    def pB(chi):
        dchi = np.stack([geo.dcen(chi, mu, chart.h[mu]) for mu in range(nd)], axis=nd)
        if not chart.is_flat:
            dchi = np.einsum("...ma,...mik->...aik", chart.frame, dchi)
        sh = chi.shape
        loc = np.einsum("...aij,...j->...ai", B, chi.reshape(sh[:-2] + (-1,))).reshape(dchi.shape)
        return dchi + loc

    first = pB(psi)
    out = np.zeros_like(psi)
    for a in range(chart.n):
        out = out + eta[a] * np.take(pB(np.take(first, a, axis=nd)), a, axis=nd)
    if not chart.is_flat:
        W = geo.frame_connection(chart)
        wvec = np.einsum("a,c,...aac->...c", eta, eta, W)  # e^c(nabla_a e_a) summed with eta_aa
        out = out - np.einsum("...c,...cik->...ik", wvec, first)
    return eps * out


def second_order_decompose(D: DiracOperator) -> tuple[np.ndarray, np.ndarray]:
    """Return (B, V_D) with V_D = D^2 - Delta_B as per-site matrices."""
    B, _ = bochner_decompose(D)

    def V(psi):
        return dirac_apply(D, dirac_apply(D, psi)) - bochner_laplacian_apply(D, B, psi)

    return B, _site_matrix(V, D)


def _curvature_matrices(chart: MetricChart, K: np.ndarray) -> np.ndarray:
    """R_ab = e_a(K_b) - e_b(K_a) + [K_a, K_b] - e^c([e_a, e_b]) K_c for site-matrix connections."""
    nd = chart.ndim
    dK = np.stack([geo.dcen(K, mu, chart.h[mu]) for mu in range(nd)], axis=nd)  # [mu, b, i, j]
    if not chart.is_flat:
        dK = np.einsum("...ma,...mbij->...abij", chart.frame, dK)
    KK = np.einsum("...aij,...bjk->...abik", K, K)
    R = dK - np.swapaxes(dK, nd, nd + 1) + KK - np.swapaxes(KK, nd, nd + 1)
    if not chart.is_flat:
        C = geo.lie_brackets(chart)
        eta = chart.sig.eta
        R = R - np.einsum("...abc,c,...cij->...abij", C, eta, K)
    return R


def trace_identity(D: DiracOperator, varepsilon: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of tr V_D = tr_gamma(curv(D) - eps ev_g(w_D^2)) - varepsilon delta_g(tr w_D)."""
    chart = D.chart
    eps, eta = chart.sig.eps, chart.sig.eta
    ve = eps if varepsilon is None else varepsilon
    nd = chart.ndim
    B, V = second_order_decompose(D)
    _, Phi = bochner_decompose(D)
    lhs = np.trace(V, axis1=-2, axis2=-1)

    G = np.array([np.kron(g, np.eye(D.m)) for g in D.gamma.gammas])
    Th = (ve / chart.n) * eta[:, None, None] * G
    omega = np.einsum("aij,...jk->...aik", Th, Phi)
    K = B + omega
    R = _curvature_matrices(chart, K)
    trg = 0.0
    for a in range(chart.n):
        for b in range(a + 1, chart.n):
            trg = trg + np.einsum("ij,...ji->...", G[a] @ G[b], R[..., a, b, :, :])
    ev = np.einsum("a,...aij,...aji->...", eta, omega, omega)
    t = np.trace(omega, axis1=-2, axis2=-1)  # frame one-form tr w_D
    dt = np.stack([geo.dcen(t, mu, chart.h[mu]) for mu in range(nd)], axis=nd)  # [mu, a]
    if not chart.is_flat:
        dt = np.einsum("...mb,...ma->...ba", chart.frame, dt)
        W = geo.frame_connection(chart)
        nab = dt - np.einsum("...bac,c,...c->...ba", W, eta, t)
    else:
        nab = dt
    delta_t = -np.einsum("a,...aa->...", eta, nab)
    rhs = trg - eps * ev - ve * delta_t
    return lhs, rhs


def universal_action(D: DiracOperator) -> complex:
    """Integral of tr V_D over the chart (interior sites on non-periodic patches)."""
    _, V = second_order_decompose(D)
    tr = np.trace(V, axis1=-2, axis2=-1)
    w = D.chart.weight * tr
    if not D.chart.periodic:
        w = np.where(D.chart.interior, w, 0.0)
    return complex(np.sum(w))


def twister(D: DiracOperator, psi: np.ndarray) -> np.ndarray:
    """T psi = nabla psi - Theta(D psi) for the quantized connection of D."""
    Q = D.without_zero_order()
    nab = covariant_derivative(Q, psi)
    th = theta(D.gamma).entries
    return nab - np.einsum("aij,...jk->...aik", th, dirac_apply(Q, psi))


def quantize_field(gamma: GammaRep, omega: np.ndarray) -> np.ndarray:
    """delta_gamma of a spinor-valued frame one-form omega[..., a, d, m]."""
    return np.einsum("aij,...ajk->...ik", gamma.gammas, omega)


def clifford_commutator_defect(D: DiracOperator, B: np.ndarray | None = None) -> float:
    """max |[K_a, gamma^b] + sum_i e^b(nabla_a e_i) gamma^i| for connection matrices K."""
    chart = D.chart
    eta = chart.sig.eta
    G = np.array([np.kron(g, np.eye(D.m)) for g in D.gamma.gammas])
    if B is None:
        spin = D.spin if not chart.is_flat else np.zeros(chart.dims + (chart.n, D.gamma.d, D.gamma.d))
        B = np.einsum("...aij,kl->...aikjl", spin, np.eye(D.m)).reshape(chart.dims + (chart.n, D.fiber, D.fiber))
        B = B + np.einsum("ij,...akl->...aikjl", np.eye(D.gamma.d), D.twist_conn).reshape(B.shape)
    W = geo.frame_connection(chart)
    comm = np.einsum("...aij,bjk->...abik", B, G) - np.einsum("bij,...ajk->...abik", G, B)
    target = -np.einsum("...aib,b,ijk->...abjk", W, eta, G)
    return float(np.max(np.abs(comm - target)))
