"""Limiting spectral laws (semicircle, Marchenko-Pastur) and their Fourier kernels.

All integrals against square-root densities are evaluated with the
substitution lam = center + radius*cos(theta), which turns the edge
singularities into smooth periodic integrands (Gauss-Chebyshev rule).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import j0, j1
from .quadrature import chebyshev_nodes, chebyshev_weighted_integral, oscillation_order


@dataclass(frozen=True)
class LimitLaw:
    kind: str
    w2: float = 1.0
    a2: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in ("semicircle", "marchenko-pastur"):
            raise ValueError(f"unknown law {self.kind!r}")
        if self.w2 <= 0 or self.a2 <= 0:
            raise ValueError("scale parameters must be positive")
        if self.kind == "marchenko-pastur" and self.c <= 0:
            raise ValueError("aspect ratio c must be positive")

    @property
    def center(self) -> float:
        if self.kind == "semicircle":
            return 0.0
        return self.a2 * (self.c + 1)

    @property
    def radius(self) -> float:
        if self.kind == "semicircle":
            return 2 * math.sqrt(self.w2)
        return 2 * self.a2 * math.sqrt(self.c)

    @property
    def edges(self) -> tuple[float, float]:
        if self.kind == "semicircle":
            w = math.sqrt(self.w2)
            return -2 * w, 2 * w
        s = math.sqrt(self.c)
        return self.a2 * (1 - s) ** 2, self.a2 * (1 + s) ** 2

    @property
    def atom(self) -> float:
        """Mass of the point mass at 0 (Marchenko-Pastur with c < 1)."""
        return max(1 - self.c, 0.0) if self.kind == "marchenko-pastur" else 0.0


def semicircle(w2: float = 1.0) -> LimitLaw:
    return LimitLaw("semicircle", w2=w2)


def marchenko_pastur(a2: float = 1.0, c: float = 1.0) -> LimitLaw:
    return LimitLaw("marchenko-pastur", a2=a2, c=c)


def density(law: LimitLaw, lam):
    """Density of the continuous part; zero outside the support."""
    lam = np.asarray(lam, dtype=float)
    if law.kind == "semicircle":
        out = np.sqrt(np.clip(4 * law.w2 - lam**2, 0.0, None)) / (2 * math.pi * law.w2)
    else:
        lo, hi = law.edges
        inner = np.clip((lam - lo) * (hi - lam), 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(inner > 0, np.sqrt(inner) / (2 * math.pi * law.a2 * lam), 0.0)
    return out if out.ndim else float(out)


def _sqrt_branch(z: complex, lo: float, hi: float) -> complex:
    # sqrt((z - lo)(z - hi)) with cut [lo, hi] and asymptotics z + O(1)
    return np.sqrt(z - lo) * np.sqrt(z - hi)


def stieltjes_limit(law: LimitLaw, z):
    """Closed-form Stieltjes transform int dN(lam) / (lam - z), Im z != 0."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise ValueError("z must be off the real axis")
    lo, hi = law.edges
    root = _sqrt_branch(z, lo, hi)
    if law.kind == "semicircle":
        out = (root - z) / (2 * law.w2)
    else:
        a2, c = law.a2, law.c
        out = (root - (z + a2 * (1 - c))) / (2 * a2 * z)
    return out if out.ndim else complex(out)


def self_consistency_residual(law: LimitLaw, z, f=None):
    """Residual of the quadratic equation satisfied by the Stieltjes transform.

    Semicircle: f + 1/z + w^2 f^2 / z.  Marchenko-Pastur:
    z a^2 f^2 + (z + a^2 (1 - c)) f + 1.
    """
    z = np.asarray(z, dtype=complex)
    if f is None:
        f = stieltjes_limit(law, z)
    if law.kind == "semicircle":
        return f + 1 / z + law.w2 * f * f / z
    a2, c = law.a2, law.c
    return z * a2 * f * f + (z + a2 * (1 - c)) * f + 1


def integrate_against(law: LimitLaw, g, order: int = 256):
    """int g(lam) dN(lam) over the continuous part (the atom is excluded)."""
    r, c0 = law.radius, law.center
    if law.kind == "semicircle":
        weight = lambda x: (r * r - (x - c0) ** 2) / (2 * math.pi * law.w2)
    else:
        weight = lambda x: (r * r - (x - c0) ** 2) / (2 * math.pi * law.a2 * x)
    return chebyshev_weighted_integral(lambda x: g(x) * weight(x), c0, r, order)


def total_mass(law: LimitLaw, order: int = 256) -> float:
    return float(np.real(integrate_against(law, np.ones_like, order))) + law.atom


def stieltjes_quadrature(law: LimitLaw, z: complex, order: int = 2048) -> complex:
    """int dN(lam) / (lam - z) by quadrature, including the atom; oracle for the closed form."""
    val = integrate_against(law, lambda x: 1.0 / (x - z), order)
    if law.atom:
        val += law.atom / (0.0 - z)
    return complex(val)


def _fourier_of_weight(law: LimitLaw, t, g, base: int = 64):
    """int exp(it lam) g(lam) dlam / sqrt(r^2 - (lam - c)^2), vectorized in t."""
    t = np.asarray(t, dtype=float)
    order = oscillation_order(law.radius, t, base)
    x = chebyshev_nodes(law.center, law.radius, order)
    phase = np.exp(1j * np.multiply.outer(t, x))
    out = (math.pi / order) * (phase @ g(x))
    return out if out.ndim else complex(out)


def v_kernel(law: LimitLaw, t):
    """v(t) = int exp(it lam) dN(lam) over the continuous part of the law."""
    r, c0 = law.radius, law.center
    if law.kind == "semicircle":
        g = lambda x: (r * r - x * x) / (2 * math.pi * law.w2)
    else:
        if law.c < 1:
            raise ValueError("v_MP is defined here for c >= 1 only")
        g = lambda x: (r * r - (x - c0) ** 2) / (2 * math.pi * law.a2 * x)
    return _fourier_of_weight(law, t, g)


def v_kernel_derivative(law: LimitLaw, t):
    """d/dt v(t) = int i lam exp(it lam) dN(lam)."""
    r, c0 = law.radius, law.center
    if law.kind == "semicircle":
        g = lambda x: 1j * x * (r * r - x * x) / (2 * math.pi * law.w2)
    else:
        if law.c < 1:
            raise ValueError("v_MP is defined here for c >= 1 only")
        g = lambda x: 1j * (r * r - (x - c0) ** 2) / (2 * math.pi * law.a2)
    return _fourier_of_weight(law, t, g)


def v_semicircle_bessel(t, w: float):
    """v(t) = J1(2wt)/(wt), with v(0) = 1."""
    t = np.asarray(t, dtype=float)
    wt = w * t
    safe = np.where(wt == 0, 1.0, wt)
    out = np.where(wt == 0, 1.0, j1(2 * safe) / safe)
    return out if out.ndim else float(out)


def vconv_kernel(t, w: float):
    """(v*v)(t) = -(i / 2 pi w^4) int exp(it mu) mu sqrt(4w^2 - mu^2) dmu."""
    law = semicircle(w * w)
    r2 = 4 * w * w
    g = lambda x: -1j * x * (r2 - x * x) / (2 * math.pi * w**4)
    return _fourier_of_weight(law, t, g)


def vconv_by_parts(t, w: float):
    """(pi t w^4)^{-1} int exp(it mu) (2w^2 - mu^2) / sqrt(4w^2 - mu^2) dmu, for t != 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t == 0):
        raise ValueError("the integrated-by-parts form needs t != 0")
    law = semicircle(w * w)
    g = lambda x: (2 * w * w - x * x) + 0j
    return _fourier_of_weight(law, t, g) / (math.pi * t * w**4)


def resolvent_kernel_T1(t, w: float):
    """T1(t) = -J0(2wt)."""
    out = -np.asarray(j0(2 * w * np.asarray(t, dtype=float)))
    return out if out.ndim else float(out)


def resolvent_kernel_T1_quadrature(t, w: float):
    """-(1/pi) int exp(i lam t) dlam / sqrt(4w^2 - lam^2); real by symmetry."""
    law = semicircle(w * w)
    val = _fourier_of_weight(law, t, lambda x: np.ones_like(x) + 0j)
    return -np.real(val) / math.pi


def a_kappa4_kernel(t, a: float, c: float):
    """A_k4(t) = (1/2 pi a^4) int exp(i mu t) sqrt(4a^4 c - (mu - a_m)^2) dmu."""
    if c < 1:
        raise ValueError("A_kappa4 requires c >= 1")
    law = marchenko_pastur(a * a, c)
    r, c0 = law.radius, law.center
    g = lambda x: (r * r - (x - c0) ** 2) / (2 * math.pi * a**4) + 0j
    return _fourier_of_weight(law, t, g)
