"""Lattice charts, curvature, and discrete exterior calculus.

Differential forms are stored as full antisymmetric arrays of shape
``dims + (n,)*k + fiber`` in orthonormal-frame components. The exterior
derivative is the cubical coboundary built from forward differences, wedge
products are cubical cup products, and every codifferential is the exact
transpose of its exterior derivative under the weighted lattice pairing.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .clifford import Signature, SignatureError

PRESETS = ("flat", "conformal", "sphere2")


@dataclass(frozen=True, eq=False)
class MetricChart:
    sig: Signature
    dims: tuple[int, ...]
    h: tuple[float, ...]
    g: np.ndarray
    frame: np.ndarray
    periodic: bool = True
    preset: str = "flat"
    params: dict = field(default_factory=dict)
    christoffel: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.sig.n

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def is_flat(self) -> bool:
        return self.preset == "flat"

    @property
    def nsites(self) -> int:
        return int(np.prod(self.dims))

    @property
    def frame_inv(self) -> np.ndarray:
        """Coframe components e^a_mu, indexed [..., a, mu]."""
        return _cached(self, "frame_inv", lambda: np.linalg.inv(self.frame))

    @property
    def sqrt_det(self) -> np.ndarray:
        return _cached(self, "sqrt_det", lambda: np.sqrt(np.abs(np.linalg.det(self.g))))

    @property
    def weight(self) -> np.ndarray:
        """Per-site measure h^n sqrt|det g|."""
        return _cached(self, "weight", lambda: float(np.prod(self.h)) * self.sqrt_det)

    @property
    def interior(self) -> np.ndarray:
        """Sites where every curvature stencil stays inside the patch."""

        def make():
            mask = np.ones(self.dims, dtype=bool)
            if self.periodic:
                return mask
            rad = 2 * _fd_order(self)
            for ax, L in enumerate(self.dims):
                idx = np.arange(L)
                ok = (idx >= rad) & (idx <= L - 1 - rad)
                shape = [1] * self.ndim
                shape[ax] = L
                mask &= ok.reshape(shape)
            return mask

        return _cached(self, "interior", make)

    def coords(self) -> np.ndarray:
        """Coordinate values, shape dims + (n,)."""
        axes = []
        for L, hh in zip(self.dims, self.h):
            i = np.arange(L, dtype=float)
            axes.append((i - (L - 1) / 2) * hh if not self.periodic else i * hh)
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def check_frame(self) -> float:
        eta = np.diag(self.sig.eta)
        res = np.einsum("...ma,...mn,...nb->...ab", self.frame, self.g, self.frame) - eta
        return float(np.max(np.abs(res)))


def _cached(chart, name, make):
    cache = chart.__dict__.setdefault("_cache", {})
    if name not in cache:
        val = make()
        if isinstance(val, np.ndarray):
            val.setflags(write=False)
        cache[name] = val
    return cache[name]


def build_chart(preset: str, dims, h, sig: Signature, **params) -> MetricChart:
    sig.require_admissible()
    n = sig.n
    dims = tuple(int(L) for L in dims)
    if len(dims) != n:
        raise ValueError(f"need {n} lattice extents, got {len(dims)}")
    if any(L < 1 for L in dims):
        raise ValueError(f"lattice extents must be positive, got {dims}")
    hs = tuple(float(x) for x in (h if np.iterable(h) else [h] * n))
    if len(hs) != n or any(x <= 0 for x in hs):
        raise ValueError(f"bad spacing {h}")
    eta = np.diag(sig.eta)
    fd = int(params.get("fd_order", 2))
    if fd not in (2, 4):
        raise ValueError(f"fd_order must be 2 or 4, got {fd}")

    if preset == "flat":
        g = np.broadcast_to(eta, dims + (n, n)).copy()
        E = np.broadcast_to(np.eye(n), dims + (n, n)).copy()
        chart = MetricChart(sig, dims, hs, g, E, True, "flat", {})
        chart = _with_christoffel(chart)
        return chart
    if preset == "conformal":
        amp = float(params.get("amplitude", 0.0))
        tmp = MetricChart(sig, dims, hs, np.zeros(dims + (n, n)), np.zeros(dims + (n, n)))
        x = tmp.coords()
        phi = np.zeros(dims)
        for mu in range(n):
            phi = phi + np.sin(2 * np.pi * x[..., mu] / (dims[mu] * hs[mu]))
        phi = amp * phi
        g = np.exp(2 * phi)[..., None, None] * eta
        E = np.exp(-phi)[..., None, None] * np.eye(n)
        chart = MetricChart(sig, dims, hs, g, E, True, "conformal", {"amplitude": amp, "fd_order": fd})
        return _with_christoffel(chart)
    if preset == "sphere2":
        if n != 2:
            raise SignatureError(f"sphere2 preset needs n = 2, got n = {n}")
        if sig.q != 0:
            raise SignatureError("sphere2 preset needs Riemannian signature (2,0)")
        r = float(params.get("radius", 1.0))
        tmp = MetricChart(sig, dims, hs, np.zeros(dims + (n, n)), np.zeros(dims + (n, n)), periodic=False)
        x = tmp.coords()
        rho2 = np.sum(x * x, axis=-1)
        conf = 2.0 * r / (1.0 + rho2)  # stereographic chart, x dimensionless
        g = (conf**2)[..., None, None] * np.eye(2)
        E = (1.0 / conf)[..., None, None] * np.eye(2)
        chart = MetricChart(sig, dims, hs, g, E, False, "sphere2", {"radius": r, "fd_order": fd})
        return _with_christoffel(chart)
    raise ValueError(f"unknown chart preset {preset!r}; choose from {PRESETS}")


def rotate_frame(chart: MetricChart, R: np.ndarray) -> MetricChart:
    """Same metric, frame e'_a = sum_b e_b R[b, a] for a constant R in O(p, q)."""
    R = np.asarray(R, dtype=float)
    E = np.einsum("...mb,ba->...ma", chart.frame, R)
    out = MetricChart(chart.sig, chart.dims, chart.h, chart.g, E, chart.periodic,
                      chart.preset + "+frame", dict(chart.params), chart.christoffel)
    if out.check_frame() > 1e-10:
        raise ValueError("rotation does not preserve the metric signature")
    return out


# finite differences

def dcen(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2 * h)


def dfwd(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(f, -1, axis) - f) / h


def dfwd_T(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Transpose of dfwd under the plain sum over sites."""
    return (np.roll(f, 1, axis) - f) / h


def dcen4(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (8 * (np.roll(f, -1, axis) - np.roll(f, 1, axis)) - (np.roll(f, -2, axis) - np.roll(f, 2, axis))) / (12 * h)


def _fd_order(chart: MetricChart) -> int:
    return int(chart.params.get("fd_order", 2))


def _grad(chart: MetricChart, f: np.ndarray) -> np.ndarray:
    """Coordinate gradient by centered differences, derivative index appended last."""
    dd = dcen4 if _fd_order(chart) == 4 else dcen
    return np.stack([dd(f, mu, chart.h[mu]) for mu in range(chart.ndim)], axis=-1)


def _second(chart: MetricChart, f: np.ndarray) -> np.ndarray:
    """Symmetric table of second derivatives, two indices appended last."""
    nd = chart.ndim
    four = _fd_order(chart) == 4
    dd = dcen4 if four else dcen
    out = np.empty(f.shape + (nd, nd))
    for a in range(nd):
        ha = chart.h[a]
        if four:
            out[..., a, a] = (
                16 * (np.roll(f, -1, a) + np.roll(f, 1, a)) - (np.roll(f, -2, a) + np.roll(f, 2, a)) - 30 * f
            ) / (12 * ha**2)
        else:
            out[..., a, a] = (np.roll(f, -1, a) - 2 * f + np.roll(f, 1, a)) / ha**2
        for b in range(a + 1, nd):
            v = dd(dd(f, a, ha), b, chart.h[b])
            out[..., a, b] = v
            out[..., b, a] = v
    return out


def _with_christoffel(chart: MetricChart) -> MetricChart:
    if chart.preset == "flat":
        chris = np.zeros(chart.dims + (chart.n,) * 3)
    else:
        chris = christoffel_symbols(chart)
    chris.setflags(write=False)
    for arr in (chart.g, chart.frame):
        arr.setflags(write=False)
    object.__setattr__(chart, "christoffel", chris)
    return chart


def christoffel_first_kind(chart: MetricChart) -> np.ndarray:
    """Gamma_{k, mu nu} = (d_mu g_{k nu} + d_nu g_{k mu} - d_k g_{mu nu}) / 2, indexed [k, mu, nu]."""
    return 0.5 * _first_kind_terms(_grad(chart, chart.g))


def _first_kind_terms(dg: np.ndarray) -> np.ndarray:
    # dg[..., k, nu, mu] = d_mu g_{k nu}
    t1 = np.einsum("...knm->...kmn", dg)  # d_mu g_{k nu}
    t2 = dg  # d_nu g_{k mu}
    t3 = np.einsum("...mnk->...kmn", dg)  # d_k g_{mu nu}
    return t1 + t2 - t3


def christoffel_symbols(chart: MetricChart) -> np.ndarray:
    """Gamma^l_{mu nu}, indexed [l, mu, nu]."""
    gi = np.linalg.inv(chart.g)
    return np.einsum("...lk,...kmn->...lmn", gi, christoffel_first_kind(chart))


def riemann_coordinate(chart: MetricChart) -> np.ndarray:
    """All-lowered R_{rho sigma mu nu} = g(e_rho, R(e_mu, e_nu) e_sigma) in coordinates.

    Written with second metric derivatives so that both pair antisymmetries
    and the first Bianchi identity hold exactly at the discrete level.
    """
    n = chart.n
    if chart.preset == "flat":
        return np.zeros(chart.dims + (n,) * 4)
    d2 = _second(chart, chart.g)  # [a, b, c, d] = d_c d_d g_ab
    lin = 0.5 * (
        np.einsum("...rnsm->...rsmn", d2)
        + np.einsum("...smrn->...rsmn", d2)
        - np.einsum("...rmsn->...rsmn", d2)
        - np.einsum("...snrm->...rsmn", d2)
    )
    gam1 = christoffel_first_kind(chart)  # [k, a, b]
    gi = np.linalg.inv(chart.g)
    quad = np.einsum("...ab,...anr,...bsm->...rsmn", gi, gam1, gam1) - np.einsum(
        "...ab,...amr,...bsn->...rsmn", gi, gam1, gam1
    )
    return lin + quad


def riemann(chart: MetricChart) -> np.ndarray:
    """Frame components R[a, b, c, d] = g(e_a, R(e_c, e_d) e_b); the last pair is the two-form index."""
    Rc = riemann_coordinate(chart)
    E = chart.frame
    return np.einsum("...ra,...sb,...mc,...nd,...rsmn->...abcd", E, E, E, E, Rc)


def scalar_curvature(chart: MetricChart) -> np.ndarray:
    eta = chart.sig.eta
    R = riemann(chart)
    return np.einsum("a,b,...abab->...", eta, eta, R)


def lie_brackets(chart: MetricChart) -> np.ndarray:
    """Structure functions C[a, b, c] = g([e_a, e_b], e_c)."""
    E = chart.frame
    if chart.preset == "flat":
        return np.zeros(chart.dims + (chart.n,) * 3)
    dE = _grad(chart, E)  # [nu, b, mu] = d_mu E^nu_b
    t = np.einsum("...ma,...nbm->...abn", E, dE)
    br = t - np.swapaxes(t, -2, -3)
    return np.einsum("...abn,...nl,...lc->...abc", br, chart.g, E)


def frame_connection(chart: MetricChart) -> np.ndarray:
    """Levi-Civita coefficients W[a, b, c] = g(nabla_{e_a} e_b, e_c) by the Koszul formula.

    Exactly antisymmetric in (b, c) and exactly torsion free with respect to
    the discrete Lie brackets.
    """

    def make():
        C = lie_brackets(chart)
        return 0.5 * (-np.einsum("...bca->...abc", C) + np.einsum("...cab->...abc", C) + C)

    return _cached(chart, "frame_connection", make)


def frame_connection_matrices(chart: MetricChart) -> np.ndarray:
    """LC connection as so-matrices per frame direction: M[a][c, b] = eta_cc W[a, b, c]."""
    return tensor_to_matrix(frame_connection(chart), chart.sig.eta)


# fiber conventions for Lambda^2-valued objects

def tensor_to_matrix(T: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """T[..., j, k] = g(X e_j, e_k)  ->  matrix X[..., k, j]."""
    return eta[:, None] * np.swapaxes(T, -1, -2)


def matrix_to_tensor(M: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return np.swapaxes(eta[:, None] * M, -1, -2)


# cubical cochains

@lru_cache(maxsize=None)
def _perms(k: int):
    out = []
    for p in itertools.permutations(range(k)):
        inv = sum(1 for i in range(k) for j in range(i + 1, k) if p[i] > p[j])
        out.append((p, -1 if inv & 1 else 1))
    return tuple(out)


def alt(X: np.ndarray, k: int, start: int) -> np.ndarray:
    """Antisymmetrize over the k axes starting at ``start``."""
    if k <= 1:
        return X
    axes = list(range(X.ndim))
    acc = np.zeros_like(X)
    for p, s in _perms(k):
        ax = axes[:start] + [start + i for i in p] + axes[start + k:]
        acc = acc + s * np.transpose(X, ax)
    return acc / math.factorial(k)


def cochain_d(X: np.ndarray, k: int, nd: int, h) -> np.ndarray:
    Y = np.stack([dfwd(X, mu, h[mu]) for mu in range(nd)], axis=nd)
    return (k + 1) * alt(Y, k + 1, nd)


def cochain_d_T(W: np.ndarray, k: int, nd: int, h) -> np.ndarray:
    Z = (k + 1) * alt(W, k + 1, nd)
    return sum(dfwd_T(np.take(Z, mu, axis=nd), mu, h[mu]) for mu in range(nd))


def _shift(f: np.ndarray, idx, nd: int) -> np.ndarray:
    """f evaluated at x + e_{idx[0]} + e_{idx[1]} + ..."""
    steps = [0] * nd
    for m in idx:
        steps[m] += 1
    for ax, s in enumerate(steps):
        if s:
            f = np.roll(f, -s, ax)
    return f


def _shift_back(f: np.ndarray, idx, nd: int) -> np.ndarray:
    steps = [0] * nd
    for m in idx:
        steps[m] += 1
    for ax, s in enumerate(steps):
        if s:
            f = np.roll(f, s, ax)
    return f


def _prod(a, b, matrix: bool):
    return a @ b if matrix else a * b


def cup(X: np.ndarray, p: int, Y: np.ndarray, q: int, nd: int, n: int, matrix: bool = True) -> np.ndarray:
    """Cubical cup product of a p-cochain and a q-cochain.

    (X u Y)(x) pairs X on the front p-face at x with Y on the back q-face
    starting at x + e_I. Fibers are multiplied as matrices when ``matrix``.
    """
    fib = X.shape[nd + p:]
    fibY = Y.shape[nd + q:]
    out_fib = (fib[0], fibY[1]) if matrix else np.broadcast_shapes(fib, fibY)
    T = np.zeros(X.shape[:nd] + (n,) * (p + q) + tuple(out_fib), dtype=np.result_type(X, Y))
    for I in itertools.product(range(n), repeat=p):
        XI = X[(Ellipsis,) * 0 + (slice(None),) * nd + I] if p else X
        YI = _shift(Y, I, nd)
        T[(slice(None),) * nd + I] = _prod(XI[(slice(None),) * nd + (None,) * q], YI, matrix)
    return math.comb(p + q, p) * alt(T, p + q, nd)


def cup_T_right(X: np.ndarray, p: int, W: np.ndarray, q: int, nd: int, n: int, matrix: bool = True) -> np.ndarray:
    """Transpose of Y -> X u Y applied to W."""
    Z = math.comb(p + q, p) * alt(W, p + q, nd)
    acc = None
    for I in itertools.product(range(n), repeat=p):
        XI = X[(slice(None),) * nd + I] if p else X
        ZI = Z[(slice(None),) * nd + I]
        if matrix:
            term = np.swapaxes(XI, -1, -2)[(slice(None),) * nd + (None,) * q] @ ZI
        else:
            term = XI[(slice(None),) * nd + (None,) * q] * ZI
        term = _shift_back(term, I, nd)
        acc = term if acc is None else acc + term
    return acc


def cup_T_left(W: np.ndarray, Y: np.ndarray, p: int, q: int, nd: int, n: int, matrix: bool = True) -> np.ndarray:
    """Transpose of X -> X u Y applied to W."""
    Z = math.comb(p + q, p) * alt(W, p + q, nd)
    shape = W.shape[:nd] + (n,) * p + (W.shape[-2:] if matrix else ())
    out = np.zeros(shape, dtype=np.result_type(W, Y))
    for I in itertools.product(range(n), repeat=p):
        YI = _shift(Y, I, nd)
        ZI = Z[(slice(None),) * nd + I]
        if matrix:
            term = ZI @ np.swapaxes(YI, -1, -2)
            out[(slice(None),) * nd + I] = term.sum(axis=tuple(range(nd, nd + q)))
        else:
            out[(slice(None),) * nd + I] = (ZI * YI).sum(axis=tuple(range(nd, nd + q)))
    return out


# frame <-> coordinate conversion of form indices

def _contract(X: np.ndarray, M: np.ndarray, nd: int, i: int, transpose: bool) -> np.ndarray:
    """Contract form slot i with per-site M[..., a, m]: out_m = sum_a M[a, m] X_a, or out_a = sum_m M[a, m] X_m."""
    Xm = np.moveaxis(X, nd + i, -1)
    extra = Xm.ndim - nd - 1
    Mb = M.reshape(M.shape[:nd] + (1,) * extra + M.shape[nd:])
    if transpose:
        out = np.einsum("...am,...m->...a", Mb, Xm)
    else:
        out = np.einsum("...am,...a->...m", Mb, Xm)
    return np.moveaxis(out, -1, nd + i)


def frame_to_coord(chart: MetricChart, X: np.ndarray, k: int) -> np.ndarray:
    """X_{mu...} = e^a_mu ... X_{a...}."""
    if chart.is_flat:
        return X
    for i in range(k):
        X = _contract(X, chart.frame_inv, chart.ndim, i, transpose=False)
    return X


def frame_to_coord_T(chart: MetricChart, X: np.ndarray, k: int) -> np.ndarray:
    if chart.is_flat:
        return X
    for i in range(k):
        X = _contract(X, chart.frame_inv, chart.ndim, i, transpose=True)
    return X


def coord_to_frame(chart: MetricChart, X: np.ndarray, k: int) -> np.ndarray:
    """X_{a...} = E^mu_a ... X_{mu...}."""
    if chart.is_flat:
        return X
    for i in range(k):
        X = _contract(X, chart.frame, chart.ndim, i, transpose=True)
    return X


def coord_to_frame_T(chart: MetricChart, X: np.ndarray, k: int) -> np.ndarray:
    if chart.is_flat:
        return X
    for i in range(k):
        X = _contract(X, chart.frame, chart.ndim, i, transpose=False)
    return X


# lattice pairing

def form_metric(chart: MetricChart, k: int, fiber: str) -> np.ndarray:
    """Diagonal weights of the lattice pairing on frame components."""
    eta = chart.sig.eta
    nd = chart.ndim
    w = chart.weight / math.factorial(k)
    shape = chart.dims
    wt = w.reshape(shape + (1,) * (k + (2 if fiber == "so" else 0)))
    for i in range(k):
        e = eta.reshape((1,) * (nd + i) + (-1,) + (1,) * (k - i - 1 + (2 if fiber == "so" else 0)))
        wt = wt * e
    if fiber == "so":
        wt = wt * 0.5 * np.multiply.outer(eta, eta).reshape((1,) * (nd + k) + (len(eta), len(eta)))
    return wt


def inner(chart: MetricChart, X: np.ndarray, Y: np.ndarray, k: int, fiber: str = "scalar") -> float:
    """Sum over sites of h^n sqrt|g| <X, Y> with strictly ordered index sums."""
    return float(np.sum(form_metric(chart, k, fiber) * X * Y))


# exterior derivative and codifferential

def _conn_coord(chart: MetricChart, connection) -> np.ndarray | None:
    if connection is None:
        return None
    C = np.asarray(connection)
    return frame_to_coord(chart, tensor_to_matrix(C, chart.sig.eta), 1)


def _d_coord(chart, Xc, k, Cc, matrix):
    nd, n = chart.ndim, chart.n
    out = cochain_d(Xc, k, nd, chart.h)
    if Cc is not None:
        out = out + cup(Cc, 1, Xc, k, nd, n) - (-1) ** k * cup(Xc, k, Cc, 1, nd, n)
    return out


def _d_coord_T(chart, Wc, k, Cc, matrix, include_d=True):
    nd, n = chart.ndim, chart.n
    out = cochain_d_T(Wc, k, nd, chart.h) if include_d else 0.0
    if Cc is not None:
        out = out + cup_T_right(Cc, 1, Wc, k, nd, n) - (-1) ** k * cup_T_left(Wc, Cc, k, 1, nd, n)
    return out


def d_exterior(chart: MetricChart, X: np.ndarray, k: int, connection=None) -> np.ndarray:
    """Covariant exterior derivative of a frame-indexed k-form.

    ``X`` is scalar valued (shape dims + (n,)*k) or Lambda^2 valued (two more
    trailing axes, tensor convention). ``connection`` is an so-valued frame
    one-form in tensor convention acting on Lambda^2 fibers by commutator.
    """
    n = chart.n
    if not 0 <= k < n:
        raise ValueError(f"cannot differentiate a {k}-form in dimension {n}")
    so = X.ndim == chart.ndim + k + 2
    eta = chart.sig.eta
    Xc = frame_to_coord(chart, X, k)
    if so:
        Xc = tensor_to_matrix(Xc, eta)
    elif connection is not None:
        raise ValueError("a connection only acts on Lambda^2-valued forms")
    Yc = _d_coord(chart, Xc, k, _conn_coord(chart, connection), so)
    if so:
        Yc = matrix_to_tensor(Yc, eta)
    return coord_to_frame(chart, Yc, k + 1)


def d_exterior_T(chart: MetricChart, W: np.ndarray, k: int, connection=None, include_d: bool = True) -> np.ndarray:
    """Plain transpose of d_exterior (k-form -> (k+1)-form) applied to a (k+1)-array.

    With ``include_d=False`` only the connection terms are transposed.
    """
    eta = chart.sig.eta
    so = W.ndim == chart.ndim + k + 3
    Wc = coord_to_frame_T(chart, W, k + 1)
    if so:
        Wc = _t2m_T(Wc, eta)
    Xc = _d_coord_T(chart, Wc, k, _conn_coord(chart, connection), so, include_d)
    if so:
        Xc = _m2t_T(Xc, eta)
    return frame_to_coord_T(chart, Xc, k)


def _t2m_T(M, eta):
    # transpose of matrix_to_tensor: tensor[j,k] = eta_k M[k,j]
    return eta[:, None] * np.swapaxes(M, -1, -2)


def _m2t_T(T, eta):
    # transpose of tensor_to_matrix: matrix[k,j] = eta_k T[j,k]
    return np.swapaxes(eta[:, None] * T, -1, -2)


def codifferential(chart: MetricChart, Y: np.ndarray, k: int, connection=None, include_d: bool = True) -> np.ndarray:
    """Exact adjoint of d_exterior on (k-1)-forms: takes a k-form to a (k-1)-form."""
    if not 1 <= k <= chart.n:
        raise ValueError(f"cannot take the codifferential of a {k}-form in dimension {chart.n}")
    so = Y.ndim == chart.ndim + k + 2
    fib = "so" if so else "scalar"
    Mk = form_metric(chart, k, fib)
    Mk1 = form_metric(chart, k - 1, fib)
    return d_exterior_T(chart, Mk * Y, k - 1, connection, include_d) / Mk1


# Hodge star and integration

@lru_cache(maxsize=None)
def _levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for p, s in _perms(n):
        eps[p] = s
    return eps


def hodge_star(chart: MetricChart, X: np.ndarray, k: int) -> np.ndarray:
    """Hodge dual of a scalar frame k-form: (*X)_{b...} = X^{a...} eps_{a...b...} / k!."""
    n, nd = chart.n, chart.ndim
    eta = chart.sig.eta
    Xu = X
    for i in range(k):
        Xu = Xu * eta.reshape((1,) * (nd + i) + (-1,) + (1,) * (k - i - 1))
    eps = _levi_civita(n)
    letters = "abcdefghij"
    src = "..." + letters[:k]
    out = "..." + letters[k:n]
    return np.einsum(f"{src},{letters[:n]}->{out}", Xu, eps) / math.factorial(k)


def hodge_sign(k: int, n: int, q: int) -> int:
    return (-1) ** (k * (n - k)) * (-1) ** q


def integrate(chart: MetricChart, f: np.ndarray, interior_only: bool | None = None) -> float:
    use_mask = (not chart.periodic) if interior_only is None else interior_only
    w = chart.weight * f
    if use_mask:
        w = np.where(chart.interior, w, 0.0)
    return float(np.sum(w))
