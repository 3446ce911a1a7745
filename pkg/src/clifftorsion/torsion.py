"""Torsion potentials, torsion tensors and the torsion field strength.

Component convention, used everywhere in the package:

    A[i, j, k] = g(A(e_i) e_j, e_k)        (one-form slot i, so(TM) slots j, k)
    T[i, j, k] = g(tau(e_i, e_j), e_k)
    F[m, v, j, k] = g(F(e_m, e_v) e_j, e_k)

all in an orthonormal frame, with per-site arrays trailing the lattice axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .geometry import MetricChart


class AntisymmetryError(ValueError):
    pass


def _check_antisym(data: np.ndarray, ax1: int, ax2: int, what: str, rtol: float = 1e-12):
    if not data.size:
        return
    resid = np.max(np.abs(data + np.swapaxes(data, ax1, ax2)))
    if resid > rtol * (1.0 + np.max(np.abs(data))):
        raise AntisymmetryError(f"{what} is not antisymmetric (max |X + X^T| = {resid:.3g})")


@dataclass(frozen=True, eq=False)
class TorsionPotential:
    chart: MetricChart
    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        n = self.chart.n
        if a.shape != self.chart.dims + (n, n, n):
            raise ValueError(f"torsion potential must have shape {self.chart.dims + (n, n, n)}, got {a.shape}")
        _check_antisym(a, -1, -2, "torsion potential in its so(TM) slots")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @classmethod
    def zeros(cls, chart: MetricChart) -> "TorsionPotential":
        return cls(chart, np.zeros(chart.dims + (chart.n,) * 3))

    @classmethod
    def from_any(cls, chart: MetricChart, raw: np.ndarray) -> "TorsionPotential":
        """Project an arbitrary array onto the so(TM) slots (explicit, never implicit)."""
        raw = np.asarray(raw, dtype=float)
        return cls(chart, 0.5 * (raw - np.swapaxes(raw, -1, -2)))

    def __add__(self, other: "TorsionPotential") -> "TorsionPotential":
        return TorsionPotential(self.chart, self.data + other.data)

    def scaled(self, s: float) -> "TorsionPotential":
        return TorsionPotential(self.chart, s * self.data)


@dataclass(frozen=True, eq=False)
class TorsionTensor:
    chart: MetricChart
    data: np.ndarray

    def __post_init__(self):
        _check_antisym(np.asarray(self.data), -3, -2, "torsion tensor in its two-form slots")


@dataclass(frozen=True, eq=False)
class TorsionFieldStrength:
    """Discrete relative curvature.

    Exactly antisymmetric in the two-form slots. The cup product places the
    two factors of A ^ A on neighbouring sites, so the so(TM) slots carry a
    symmetric part of order h |A| |dA|; see ``so_defect``. It vanishes for
    site-independent A and in the continuum limit.
    """

    chart: MetricChart
    data: np.ndarray

    def __post_init__(self):
        _check_antisym(np.asarray(self.data), -4, -3, "field strength in its two-form slots")

    def so_defect(self) -> float:
        d = np.asarray(self.data)
        return float(np.max(np.abs(d + np.swapaxes(d, -1, -2)))) if d.size else 0.0


def torsion_components(A: np.ndarray) -> np.ndarray:
    """tau(u, v) = A(u)v - A(v)u on raw per-site arrays."""
    return A - np.swapaxes(A, -3, -2)


def potential_components(T: np.ndarray) -> np.ndarray:
    """2 g(A(u)v, w) = g(tau(u,v), w) - g(tau(v,w), u) + g(tau(w,u), v)."""
    t_vwu = np.einsum("...vwu->...uvw", T)
    t_wuv = np.einsum("...wuv->...uvw", T)
    return 0.5 * (T - t_vwu + t_wuv)


def torsion_from_potential(A: TorsionPotential) -> TorsionTensor:
    return TorsionTensor(A.chart, torsion_components(A.data))


def potential_from_torsion(T: TorsionTensor) -> TorsionPotential:
    return TorsionPotential(T.chart, potential_components(np.asarray(T.data)))


def trace_torsion(T: TorsionTensor) -> np.ndarray:
    """tr tau(v) = sum_j e^j(tau(v, e_j)), a frame one-form."""
    eta = T.chart.sig.eta
    return np.einsum("j,...vjj->...v", eta, np.asarray(T.data))


# connections

def levi_civita(chart: MetricChart) -> np.ndarray:
    """LC coefficients W[a, b, c] = g(nabla_{e_a} e_b, e_c)."""
    return geo.frame_connection(chart)


def metric_connection(A: TorsionPotential) -> np.ndarray:
    """Coefficients of nabla^g = nabla^LC + A in the same convention as A."""
    return levi_civita(A.chart) + A.data


def torsion_of_connection(conn: np.ndarray, chart: MetricChart) -> np.ndarray:
    """tau(e_a, e_b) = nabla_a e_b - nabla_b e_a - [e_a, e_b], as T[a, b, c]."""
    return conn - np.swapaxes(conn, -3, -2) - geo.lie_brackets(chart)


def metricity_residual(conn: np.ndarray) -> float:
    """max |g(nabla e_b, e_c) + g(e_b, nabla e_c)|."""
    return float(np.max(np.abs(conn + np.swapaxes(conn, -1, -2))))


# field strength

def _to_cochain(chart: MetricChart, X: np.ndarray) -> np.ndarray:
    return geo.frame_to_coord(chart, geo.tensor_to_matrix(X, chart.sig.eta), 1)


def _from_cochain2(chart: MetricChart, Fc: np.ndarray) -> np.ndarray:
    return geo.matrix_to_tensor(geo.coord_to_frame(chart, Fc, 2), chart.sig.eta)


def wedge_commutator(chart: MetricChart, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """X u Y + Y u X for so-valued frame one-forms (the discrete [X ^ Y])."""
    nd, n = chart.ndim, chart.n
    Xc, Yc = _to_cochain(chart, X), _to_cochain(chart, Y)
    return _from_cochain2(chart, geo.cup(Xc, 1, Yc, 1, nd, n) + geo.cup(Yc, 1, Xc, 1, nd, n))


def curvature_of(chart: MetricChart, conn: np.ndarray) -> np.ndarray:
    """Discrete curvature dC + C u C of a frame connection, as F[m, v, j, k]."""
    nd, n = chart.ndim, chart.n
    Cc = _to_cochain(chart, conn)
    Fc = geo.cochain_d(Cc, 1, nd, chart.h) + geo.cup(Cc, 1, Cc, 1, nd, n)
    return _from_cochain2(chart, Fc)


def _lc_or_none(chart: MetricChart):
    return None if chart.is_flat else levi_civita(chart)


def field_strength_components(chart: MetricChart, A: np.ndarray, linear: bool = False) -> np.ndarray:
    """F_A = d_LC A + A ^ A; with ``linear`` the quadratic term is dropped."""
    F = geo.d_exterior(chart, A, 1, _lc_or_none(chart))
    if linear:
        return F
    nd, n = chart.ndim, chart.n
    Ac = _to_cochain(chart, A)
    return F + _from_cochain2(chart, geo.cup(Ac, 1, Ac, 1, nd, n))


def field_strength(A: TorsionPotential, linear: bool = False) -> TorsionFieldStrength:
    return TorsionFieldStrength(A.chart, field_strength_components(A.chart, A.data, linear))


def d_A(chart: MetricChart, A: np.ndarray, X: np.ndarray, k: int) -> np.ndarray:
    """Covariant exterior derivative of an so-valued k-form with nabla^g = nabla^LC + A."""
    conn = A if chart.is_flat else levi_civita(chart) + A
    return geo.d_exterior(chart, X, k, conn)


def delta_A(chart: MetricChart, A: np.ndarray, Y: np.ndarray, k: int) -> np.ndarray:
    """Exact lattice adjoint of d_A, taking so-valued k-forms to (k-1)-forms."""
    conn = A if chart.is_flat else levi_civita(chart) + A
    return geo.codifferential(chart, Y, k, conn)


def bianchi_residual(A: TorsionPotential) -> np.ndarray:
    """d_A F_A; vanishes identically on flat charts."""
    ch = A.chart
    if ch.n < 3:
        return np.zeros(ch.dims + (ch.n,) * 5)  # no nonzero three-forms
    F = field_strength_components(ch, A.data)
    return d_A(ch, A.data, F, 2)


def norm_sq_density(chart: MetricChart, F: np.ndarray) -> np.ndarray:
    """Per-site ||F||^2 = -tr F_ab F^ab = sum over all indices of eta-weighted F^2."""
    eta = chart.sig.eta
    return np.einsum("a,b,j,k,...abjk,...abjk->...", eta, eta, eta, eta, F, F)


def random_potential(chart: MetricChart, rng: np.random.Generator, scale: float = 1.0) -> TorsionPotential:
    n = chart.n
    raw = rng.normal(size=chart.dims + (n, n, n)) * scale
    return TorsionPotential.from_any(chart, raw)
