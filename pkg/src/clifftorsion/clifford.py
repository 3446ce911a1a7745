"""Clifford and Grassmann algebra over a (p, q) signature.

Blades are encoded as bitmasks: bit k set means the basis covector e^{k+1}
is a factor. The first p generators square to +eps, the last q to -eps.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    p: int
    q: int
    eps: int = 1

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise SignatureError(f"bad signature counts p={self.p}, q={self.q}")
        if self.eps not in (1, -1):
            raise SignatureError(f"eps must be +1 or -1, got {self.eps}")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def eta(self) -> np.ndarray:
        return np.array([1.0] * self.p + [-1.0] * self.q)

    @property
    def is_euclidean(self) -> bool:
        return self.q == 0 or self.p == 0

    def problems(self) -> list[str]:
        """Reasons the signature is not admissible for spinor geometry."""
        out = []
        if self.n % 2:
            out.append(f"dimension n = p+q = {self.n} must be even")
        if (self.p - self.q) % 4 == 1:
            out.append(f"signature p-q = {self.p - self.q} must not be 1 mod 4")
        return out

    def require_admissible(self) -> "Signature":
        probs = self.problems()
        if probs:
            raise SignatureError("; ".join(probs))
        return self


def _reorder_sign(a: int, b: int) -> int:
    # number of transpositions to sort the concatenated blade a*b
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _tables(sig: Signature) -> tuple[np.ndarray, np.ndarray]:
    n = sig.n
    N = 1 << n
    sq = sig.eps * sig.eta  # e^k e^k
    idx = np.arange(N)
    xor = idx[:, None] ^ idx[None, :]
    sign = np.empty((N, N))
    for a in range(N):
        for b in range(N):
            s = _reorder_sign(a, b)
            common = a & b
            k = 0
            while common:
                if common & 1:
                    s *= sq[k]
                common >>= 1
                k += 1
            sign[a, b] = s
    xor.setflags(write=False)
    sign.setflags(write=False)
    return xor, sign


def grade_of(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True, eq=False)
class Multivector:
    sig: Signature
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (1 << self.sig.n,):
            raise ValueError(f"expected {1 << self.sig.n} coefficients, got shape {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction helpers
    @classmethod
    def zero(cls, sig: Signature) -> "Multivector":
        return cls(sig, np.zeros(1 << sig.n))

    @classmethod
    def scalar(cls, sig: Signature, value: complex = 1.0) -> "Multivector":
        c = np.zeros(1 << sig.n, dtype=complex)
        c[0] = value
        return cls(sig, c)

    @classmethod
    def blade(cls, sig: Signature, mask: int, value: complex = 1.0) -> "Multivector":
        c = np.zeros(1 << sig.n, dtype=complex)
        c[mask] = value
        return cls(sig, c)

    @classmethod
    def generator(cls, sig: Signature, k: int) -> "Multivector":
        """Basis covector e^{k+1} (zero-based k)."""
        return cls.blade(sig, 1 << k)

    @classmethod
    def vector(cls, sig: Signature, v: Sequence[complex]) -> "Multivector":
        c = np.zeros(1 << sig.n, dtype=complex)
        for k, x in enumerate(v):
            c[1 << k] = x
        return cls(sig, c)

    def _check(self, other: "Multivector"):
        if self.sig != other.sig:
            raise SignatureError(f"signature mismatch: {self.sig} vs {other.sig}")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return Multivector(self.sig, self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return Multivector(self.sig, self.coeffs - other.coeffs)

    def __neg__(self) -> "Multivector":
        return Multivector(self.sig, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return clifford_product(self, other)
        return Multivector(self.sig, self.coeffs * other)

    def __rmul__(self, other):
        return Multivector(self.sig, self.coeffs * other)

    def grade(self, k: int) -> "Multivector":
        mask = np.array([grade_of(i) == k for i in range(len(self.coeffs))])
        return Multivector(self.sig, np.where(mask, self.coeffs, 0))

    def involution(self) -> "Multivector":
        """Even/odd grading involution tau_Cl."""
        signs = np.array([(-1) ** grade_of(i) for i in range(len(self.coeffs))])
        return Multivector(self.sig, signs * self.coeffs)

    def allclose(self, other: "Multivector", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0))

    def __repr__(self) -> str:
        terms = [f"{c:.4g}*{_blade_name(i)}" for i, c in enumerate(self.coeffs) if c != 0]
        return f"Multivector({self.sig.p},{self.sig.q}; " + (" + ".join(terms) or "0") + ")"


def _blade_name(mask: int) -> str:
    if mask == 0:
        return "1"
    return "e" + "".join(str(k + 1) for k in range(mask.bit_length()) if mask >> k & 1)


def clifford_product(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    xor, sign = _tables(a.sig)
    out = np.zeros_like(a.coeffs)
    terms = sign * np.outer(a.coeffs, b.coeffs)
    np.add.at(out, xor.ravel(), terms.ravel())
    return Multivector(a.sig, out)


def inner_lambda(a: Multivector, b: Multivector) -> complex:
    """Induced metric on the exterior algebra (orthonormal blades, eta-weighted)."""
    a._check(b)
    eta = a.sig.eta
    w = np.array([np.prod([eta[k] for k in range(a.sig.n) if m >> k & 1]) for m in range(len(a.coeffs))])
    return complex(np.sum(np.conj(a.coeffs) * w * b.coeffs))


# Grassmann side: interior/exterior multiplication and the canonical Clifford map

@lru_cache(maxsize=None)
def _ext_int_mats(sig: Signature) -> tuple[np.ndarray, np.ndarray]:
    n, N = sig.n, 1 << sig.n
    ext = np.zeros((n, N, N))
    inn = np.zeros((n, N, N))
    for k in range(n):
        bit = 1 << k
        for B in range(N):
            s = -1.0 if grade_of(B & (bit - 1)) & 1 else 1.0
            if B & bit:
                inn[k, B ^ bit, B] = sig.eta[k] * s
            else:
                ext[k, B | bit, B] = s
    ext.setflags(write=False)
    inn.setflags(write=False)
    return ext, inn


def exterior_mult(sig: Signature, k: int) -> np.ndarray:
    return _ext_int_mats(sig)[0][k]


def interior_mult(sig: Signature, k: int) -> np.ndarray:
    """Contraction with the vector metrically dual to e^{k+1}."""
    return _ext_int_mats(sig)[1][k]


@lru_cache(maxsize=None)
def gamma_cl(sig: Signature) -> np.ndarray:
    """Canonical Clifford map on the exterior algebra, gamma_Cl(e^k) = eps*int + ext."""
    ext, inn = _ext_int_mats(sig)
    g = sig.eps * inn + ext
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def _blade_ops(sig: Signature) -> np.ndarray:
    # Gamma_Ch(e^B) as ordered products of gamma_cl
    g = gamma_cl(sig)
    N = 1 << sig.n
    ops = np.empty((N, N, N))
    for B in range(N):
        m = np.eye(N)
        for k in range(sig.n):
            if B >> k & 1:
                m = m @ g[k]
        ops[B] = m
    ops.setflags(write=False)
    return ops


@lru_cache(maxsize=None)
def symbol_matrix(sig: Signature) -> np.ndarray:
    """Matrix of sigma_Ch: column B holds the exterior-algebra image of the Clifford blade B."""
    ops = _blade_ops(sig)
    m = ops[:, :, 0].T.copy()
    m.setflags(write=False)
    return m


def symbol_map(a: Multivector) -> Multivector:
    return Multivector(a.sig, symbol_matrix(a.sig) @ a.coeffs)


def symbol_map_inverse(form: Multivector) -> Multivector:
    return Multivector(form.sig, np.linalg.solve(symbol_matrix(form.sig), form.coeffs))


def clifford_action_on_forms(a: Multivector) -> np.ndarray:
    """Gamma_Ch(a) as a 2^n x 2^n matrix acting on the exterior algebra."""
    return np.tensordot(a.coeffs, _blade_ops(a.sig), axes=1)


# End-valued forms, quantization, canonical one-form

@dataclass(frozen=True, eq=False)
class EndValuedOneForm:
    """omega = sum_i e^i (x) entries[i]."""

    sig: Signature
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 3 or e.shape[0] != self.sig.n or e.shape[1] != e.shape[2]:
            raise ValueError(f"entries must have shape (n, d, d) with n={self.sig.n}, got {e.shape}")
        e = e.copy()
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def rep_dim(self) -> int:
        return self.entries.shape[1]

    def __add__(self, other: "EndValuedOneForm") -> "EndValuedOneForm":
        return EndValuedOneForm(self.sig, self.entries + other.entries)

    def __sub__(self, other: "EndValuedOneForm") -> "EndValuedOneForm":
        return EndValuedOneForm(self.sig, self.entries - other.entries)


def _gamma_of_blades(gamma) -> np.ndarray:
    # gamma(e^B) as ordered product gamma^{i1} ... gamma^{ik}
    g = gamma.gammas
    n, d = g.shape[0], g.shape[1]
    out = np.empty((1 << n, d, d), dtype=complex)
    for B in range(1 << n):
        m = np.eye(d, dtype=complex)
        for k in range(n):
            if B >> k & 1:
                m = m @ g[k]
        out[B] = m
    return out


def gamma_of(gamma, a: Multivector) -> np.ndarray:
    """Extend a Clifford map on covectors to the whole algebra."""
    if a.sig != gamma.sig:
        raise SignatureError("multivector and representation signatures differ")
    return np.tensordot(a.coeffs, _gamma_of_blades(gamma), axes=1)


def quantize(omega, gamma) -> np.ndarray:
    """Quantization map delta_gamma.

    ``omega`` is either an EndValuedOneForm or an array of shape (2^n, d, d)
    giving the End-valued coefficient of each exterior blade e^B.
    """
    d = gamma.gammas.shape[1]
    if isinstance(omega, EndValuedOneForm):
        if omega.sig != gamma.sig:
            raise SignatureError("one-form and representation signatures differ")
        if omega.rep_dim != d:
            raise ValueError(f"rep_dim {omega.rep_dim} does not match gamma dimension {d}")
        return np.einsum("iab,ibc->ac", gamma.gammas, omega.entries)
    arr = np.asarray(omega)
    N = 1 << gamma.sig.n
    if arr.shape != (N, d, d):
        raise ValueError(f"form coefficients must have shape {(N, d, d)}, got {arr.shape}")
    # gamma(sigma^{-1}(e^B)) for every blade
    sinv = np.linalg.inv(symbol_matrix(gamma.sig))
    blades = _gamma_of_blades(gamma)
    ops = np.einsum("CB,Cab->Bab", sinv, blades)
    return np.einsum("Bab,Bbc->ac", ops, arr)


def theta(gamma, varepsilon: int | None = None) -> EndValuedOneForm:
    """Canonical one-form Theta_i = (varepsilon/n) gamma((e_i)^flat).

    varepsilon defaults to the Clifford sign, which makes ext_theta a right inverse
    of the quantization map.
    """
    sig = gamma.sig
    ve = sig.eps if varepsilon is None else varepsilon
    ent = (ve / sig.n) * sig.eta[:, None, None] * gamma.gammas
    return EndValuedOneForm(sig, ent)


def ext_theta(Phi: np.ndarray, gamma, varepsilon: int | None = None) -> EndValuedOneForm:
    th = theta(gamma, varepsilon)
    return EndValuedOneForm(gamma.sig, th.entries @ np.asarray(Phi, dtype=complex))


def project_pq(omega: EndValuedOneForm, gamma) -> tuple[EndValuedOneForm, EndValuedOneForm]:
    p_part = ext_theta(quantize(omega, gamma), gamma)
    return p_part, omega - p_part
