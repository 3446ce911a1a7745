"""Solvers: static torsion equation with spinor source, Dirac solves, linear torsion waves."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg, eigsh

from . import action as act
from . import geometry as geo
from . import torsion as tor
from .geometry import MetricChart
from .spinor import GammaRep, dirac_apply, dirac_apply_adjoint, twisted_dirac

METHODS = ("gradient_descent", "nonlinear_cg", "fixed_point", "newton")


class SolverDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    method: str = "newton"
    tol: float = 1e-8
    max_iter: int = 10_000
    step: float = 1.0
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    lm_mu: float = 1e-3
    cg_tol: float = 1e-10
    cg_maxiter: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown solver method {self.method!r}; choose from {METHODS}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")


@dataclass
class StaticResult:
    A: np.ndarray
    history: list = field(default_factory=list)  # (iter, objective, residual)
    converged: bool = False
    message: str = ""

    @property
    def residual(self) -> float:
        return self.history[-1][2] if self.history else math.nan

    def csv_rows(self) -> list[str]:
        return ["iter,action,residual"] + [f"{i},{a!r},{r!r}" for i, a, r in self.history]


def _require_euclidean(chart: MetricChart, what: str):
    if chart.sig.q != 0:
        raise ValueError(
            f"{what} needs a Euclidean signature; the torsion functional has no definite sign for q = {chart.sig.q}"
        )


def static_objective(A, psi, chart: MetricChart, gamma: GammaRep, g: float, form: str = "rescaled") -> float:
    """E(A) = -Re S(A, psi) + const, the functional minimized by the gradient methods."""
    b = act.total_action(A, psi, chart, gamma, form, g)
    return float(-(b.total.real - b.scal_term))


def _residual(A, psi, chart, gamma, g, form):
    return act.stationarity_residual(A, psi, chart, gamma, form, g)


def _check_finite(x: np.ndarray, it: int):
    if not np.all(np.isfinite(x)):
        raise SolverDivergence(f"non-finite field encountered at iteration {it}")


def linearize(A, chart: MetricChart):
    """Return V -> dR(A)[V], the derivative of the stationarity residual.

    d/dt delta_{A+tV} F_{A+tV} = delta'_V F_A + delta_A d_A V, where delta'_V
    is the transposed connection term of V alone. The source term does not
    depend on A.
    """
    a = np.asarray(A)
    M2F = geo.form_metric(chart, 2, "so") * tor.field_strength_components(chart, a)
    M1 = geo.form_metric(chart, 1, "so")

    def jv(V):
        out = geo.d_exterior_T(chart, M2F, 1, V, include_d=False) / M1
        out = out + tor.delta_A(chart, a, tor.d_A(chart, a, V, 1), 2)
        return 0.5 * (out - np.swapaxes(out, -1, -2))

    return jv


def solve_static(A0, psi, chart: MetricChart, gamma: GammaRep, g: float = 0.1, cfg: SolverConfig | None = None,
                 form: str = "rescaled") -> StaticResult:
    """Solve delta_A F_A + g J_spin = 0 for A with psi held fixed.

    ``gradient_descent`` and ``nonlinear_cg`` minimize E(A) with an Armijo
    line search, so the recorded objective never increases. ``fixed_point``
    is the Richardson iteration A <- A - step * R(A). ``newton`` is a
    Levenberg-Marquardt iteration on 1/2 ||R||^2 with matrix-free CG.
    """
    cfg = SolverConfig() if cfg is None else cfg
    _require_euclidean(chart, "the static solver")
    A = np.array(A0.data if isinstance(A0, tor.TorsionPotential) else A0, dtype=float)
    p = None if psi is None else np.asarray(psi.data if hasattr(psi, "chart") else psi)
    res = StaticResult(A)
    R = _residual(A, p, chart, gamma, g, form)
    r = act.lattice_norm(chart, R)
    E = static_objective(A, p, chart, gamma, g, form)
    res.history.append((0, E, r))
    if r <= cfg.tol:
        res.converged, res.message = True, "initial data already stationary"
        return res
    metric = geo.form_metric(chart, 1, "so")
    ip = lambda X, Y: float(np.sum(metric * X * Y))
    d_prev, R_prev = None, None
    mu = cfg.lm_mu
    for it in range(1, cfg.max_iter + 1):
        if cfg.method == "fixed_point":
            A = A - cfg.step * R
        elif cfg.method == "newton":
            A, mu = _lm_step(A, p, chart, gamma, g, form, R, r, mu, metric, cfg)
        else:
            if cfg.method == "nonlinear_cg" and d_prev is not None:
                beta = max(0.0, ip(R, R - R_prev) / ip(R_prev, R_prev))  # Polak-Ribiere+
                d = -R + beta * d_prev
                if ip(d, R) >= 0:
                    d = -R
            else:
                d = -R
            A, E_new, ok = _armijo(A, p, chart, gamma, g, form, d, E, ip(R, d), cfg)
            if not ok:
                res.A, res.message = A, f"line search failed at iteration {it}"
                return res
            d_prev, R_prev = d, R
        _check_finite(A, it)
        R = _residual(A, p, chart, gamma, g, form)
        r = act.lattice_norm(chart, R)
        E = static_objective(A, p, chart, gamma, g, form)
        res.history.append((it, E, r))
        if not math.isfinite(r):
            raise SolverDivergence(f"residual became non-finite at iteration {it}")
        if r <= cfg.tol:
            res.A, res.converged, res.message = A, True, f"converged in {it} iterations"
            return res
    res.A, res.message = A, f"no convergence after {cfg.max_iter} iterations (residual {r:.3e})"
    return res


def _armijo(A, p, chart, gamma, g, form, d, E0, slope_R, cfg):
    # dE = 2 c <dA, R>; only the sign and scale of the slope matter here
    c = 2.0 * act._torsion_weight(form, gamma)
    slope = c * slope_R
    t = cfg.step
    for _ in range(cfg.max_backtracks):
        A_new = A + t * d
        E_new = static_objective(A_new, p, chart, gamma, g, form)
        if E_new <= E0 + cfg.armijo * t * slope:
            return A_new, E_new, True
        t *= cfg.backtrack
    return A, E0, False


def _lm_step(A, p, chart, gamma, g, form, R, r, mu, metric, cfg):
    """One Levenberg-Marquardt step; J is self-adjoint in the lattice metric."""
    sq = np.sqrt(metric)
    shape = A.shape
    Jv = linearize(A, chart)

    def normal(x, mu_):
        V = x.reshape(shape) / sq
        return (sq * (Jv(Jv(V)) + mu_ * V)).ravel()

    rhs = -(sq * Jv(R)).ravel()
    for _ in range(30):
        op = LinearOperator((rhs.size, rhs.size), matvec=lambda x: normal(x, mu), dtype=float)
        x, _info = cg(op, rhs, rtol=cfg.cg_tol, maxiter=cfg.cg_maxiter)
        dA = x.reshape(shape) / sq
        dA = 0.5 * (dA - np.swapaxes(dA, -1, -2))
        A_new = A + dA
        r_new = act.lattice_norm(chart, _residual(A_new, p, chart, gamma, g, form))
        if r_new < r:
            return A_new, max(mu / 10.0, 1e-14)
        mu *= 10.0
    return A, mu


# Dirac solves

@dataclass
class DiracResult:
    psi: np.ndarray
    residuals: list
    converged: bool
    message: str


def solve_dirac(A, chart: MetricChart, gamma: GammaRep, cfg: SolverConfig | None = None, g: float = 0.1,
                source: np.ndarray | None = None) -> DiracResult:
    """Source mode: CG on the normal equations D^+ D psi = D^+ chi.

    Kernel mode (no source): the unit-norm field of smallest ||D psi||, from
    the lowest eigenvector of D^+ D.
    """
    cfg = SolverConfig() if cfg is None else cfg
    a = np.asarray(A.data if isinstance(A, tor.TorsionPotential) else A)
    D = twisted_dirac(chart, gamma, a, g)
    shape = chart.dims + (gamma.d, chart.n)
    size = int(np.prod(shape))

    def normal(x):
        return dirac_apply_adjoint(D, dirac_apply(D, x.reshape(shape))).ravel()

    op = LinearOperator((size, size), matvec=normal, dtype=complex)
    if source is None:
        rng = np.random.default_rng(cfg.seed)
        v0 = rng.normal(size=size) + 1j * rng.normal(size=size)
        vals, vecs = eigsh(op, k=1, which="SA", v0=v0, tol=cfg.cg_tol, maxiter=cfg.max_iter)
        psi = vecs[:, 0].reshape(shape)
        r = float(np.linalg.norm(dirac_apply(D, psi)))
        return DiracResult(psi, [r], r <= max(cfg.tol, math.sqrt(abs(vals[0])) * 1.01), f"lowest |D|^2 eigenvalue {vals[0]:.3e}")
    chi = np.asarray(source, dtype=complex)
    rhs = dirac_apply_adjoint(D, chi).ravel()
    hist: list = []

    def cb(xk):
        hist.append(float(np.linalg.norm(dirac_apply(D, xk.reshape(shape)) - chi)))

    bnorm = np.linalg.norm(rhs)
    x, info = cg(op, rhs, rtol=min(1e-14, cfg.tol), atol=0.0, maxiter=cfg.max_iter, callback=cb)
    psi = x.reshape(shape)
    r = float(np.linalg.norm(dirac_apply(D, psi) - chi))
    ok = r <= cfg.tol * max(1.0, float(np.linalg.norm(chi)))
    msg = "converged" if ok else f"normal-equation CG stopped (info={info}); |D^+ chi| = {bnorm:.3e}, the source may leave the range of D"
    return DiracResult(psi, hist, ok, msg)


# linear waves

def cfl_limit(chart: MetricChart) -> float:
    return min(chart.h) / math.sqrt(chart.n)


def wave_operator(chart: MetricChart, A: np.ndarray) -> np.ndarray:
    """K A = delta d A for so-valued one-forms (commutator-free)."""
    return geo.codifferential(chart, geo.d_exterior(chart, A, 1), 2)


def discrete_frequency(chart: MetricChart, k: np.ndarray, dt: float) -> float:
    """omega = (2/dt) asin(dt sqrt(sum_mu (2/h_mu)^2 sin^2(k_mu h_mu/2)) / 2)."""
    k = np.asarray(k, dtype=float)
    h = np.asarray(chart.h)
    lam = np.sum((2.0 / h) ** 2 * np.sin(k * h / 2.0) ** 2)
    return 2.0 / dt * math.asin(dt * math.sqrt(lam) / 2.0)


@dataclass
class EvolutionState:
    """Leapfrog state (A_{n-1}, A_n); A_momentum is the half-step velocity."""

    chart: MetricChart
    A: np.ndarray
    A_prev: np.ndarray
    dt: float
    time: float = 0.0
    psi: np.ndarray | None = None
    energy_log: list = field(default_factory=list)

    @property
    def A_momentum(self) -> np.ndarray:
        return (self.A - self.A_prev) / self.dt

    def energy(self) -> float:
        """1/2 <v, v> + 1/2 <dA_n, dA_{n-1}>, exactly conserved by the scheme."""
        ch = self.chart
        v = self.A_momentum
        dA, dB = geo.d_exterior(ch, self.A, 1), geo.d_exterior(ch, self.A_prev, 1)
        return 0.5 * geo.inner(ch, v, v, 1, "so") + 0.5 * geo.inner(ch, dA, dB, 2, "so")

    def step(self) -> None:
        A_next = 2 * self.A - self.A_prev - self.dt**2 * wave_operator(self.chart, self.A)
        self.A_prev, self.A = self.A, A_next
        self.time += self.dt

    def reversed(self) -> "EvolutionState":
        return EvolutionState(self.chart, self.A_prev.copy(), self.A.copy(), self.dt, self.time, self.psi, [])


def init_wave(A0, Adot0, chart: MetricChart, dt: float) -> EvolutionState:
    _require_euclidean(chart, "wave evolution")
    if not chart.is_flat:
        raise ValueError("wave evolution runs on flat charts only")
    if not 0 < dt <= cfl_limit(chart):
        raise ValueError(f"dt = {dt} violates the stability bound dt <= h/sqrt(n) = {cfl_limit(chart):.6g}")
    A0 = np.asarray(A0, dtype=float)
    V0 = np.zeros_like(A0) if Adot0 is None else np.asarray(Adot0, dtype=float)
    tor._check_antisym(A0, -1, -2, "initial torsion potential")
    tor._check_antisym(V0, -1, -2, "initial torsion velocity")
    # A_{-1} from a second-order Taylor start, so that (A_0 - A_{-1})/dt ~ Adot0
    A_prev = A0 - dt * V0 - 0.5 * dt**2 * wave_operator(chart, A0)
    return EvolutionState(chart, A0.copy(), A_prev, dt)


def evolve_wave(A0, Adot0, chart: MetricChart, steps: int, dt: float, record_every: int = 1,
                callback=None) -> EvolutionState:
    """Leapfrog integration of d^2A/dt^2 = -delta d A; energies logged as (t, E, max|A|)."""
    st = init_wave(A0, Adot0, chart, dt)
    return run_wave(st, steps, record_every, callback)


def run_wave(st: EvolutionState, steps: int, record_every: int = 1, callback=None) -> EvolutionState:
    st.energy_log.append((st.time, st.energy(), float(np.max(np.abs(st.A)))))
    for i in range(1, steps + 1):
        st.step()
        if i % record_every == 0 or i == steps:
            st.energy_log.append((st.time, st.energy(), float(np.max(np.abs(st.A)))))
        if callback is not None:
            callback(i, st)
    return st


def plane_wave(chart: MetricChart, amplitude: float, mode: int = 1, axis: int = 0, pol: int = 1,
               so_pair: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Transverse plane wave A_pol = a cos(k x_axis) X_{so_pair}, with delta A = 0."""
    if pol == axis:
        raise ValueError("a transverse wave needs pol != axis")
    n = chart.n
    L = chart.dims[axis] * chart.h[axis]
    x = chart.coords()[..., axis]
    prof = amplitude * np.cos(2 * np.pi * mode * x / L)
    A = np.zeros(chart.dims + (n, n, n))
    i, j = so_pair
    A[..., pol, i, j] = prof
    A[..., pol, j, i] = -prof
    return A


def plane_wave_k(chart: MetricChart, mode: int = 1, axis: int = 0) -> np.ndarray:
    k = np.zeros(chart.n)
    k[axis] = 2 * np.pi * mode / (chart.dims[axis] * chart.h[axis])
    return k


def measured_frequency(series: np.ndarray, dt: float) -> float:
    """Least-squares frequency from q_{n+1} + q_{n-1} = 2 cos(omega dt) q_n."""
    q = np.asarray(series, dtype=float)
    c = np.sum(q[1:-1] * (q[2:] + q[:-2])) / (2.0 * np.sum(q[1:-1] ** 2))
    return math.acos(max(-1.0, min(1.0, c))) / dt


# weak coupling

@dataclass(frozen=True)
class WeakCouplingReport:
    energy_density_mean: float
    effective_lambda: float
    commutator_ratio: float
    amplitude: float


def weak_coupling_report(A, psi, chart: MetricChart, g: float = 0.1) -> WeakCouplingReport:
    """Torsion energy density and the size of the A ^ A correction.

    ``effective_lambda`` is the lattice average of 1/4 ||F_A||^2, the piece
    of the torsion term acting as a cosmological-constant contribution.
    """
    a = np.asarray(A.data if isinstance(A, tor.TorsionPotential) else A)
    F = tor.field_strength_components(chart, a)
    Fl = tor.field_strength_components(chart, a, linear=True)
    dens = act.weak_field_energy_density(chart, F) * chart.sqrt_det
    mean = float(np.mean(dens))
    nl = float(np.sqrt(np.sum((F - Fl) ** 2)))
    ll = float(np.sqrt(np.sum(Fl**2)))
    ratio = nl / ll if ll > 0 else (0.0 if nl == 0 else math.inf)
    return WeakCouplingReport(mean, mean, ratio, float(np.max(np.abs(a))))
