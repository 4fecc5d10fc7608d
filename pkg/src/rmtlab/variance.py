"""Limiting variances of linear eigenvalue statistics.

The double integrals all have the form

    (1/2pi^2) int int (dphi/dlam)^2 (r^2 - (x1 - c)(x2 - c)) / (sqrt(.) sqrt(.)) dx1 dx2

over [c - r, c + r]^2, with (c, r) = (0, 2w) for Wigner matrices and
(a^2 (c + 1), 2 a^2 sqrt(c)) for sample covariance matrices.  They are
evaluated with a tensor Gauss-Chebyshev rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import chebyshev_nodes, chebyshev_weighted_integral
from .testfns import TestFunction

DEFAULT_ORDER = 128
DIAGONAL_THRESHOLD = 1e-8
NEGATIVE_CLAMP = 1e-10


class VarianceError(ArithmeticError):
    """A limiting variance came out genuinely negative."""


@dataclass(frozen=True)
class VarianceResult:
    total: float
    gaussian_part: float
    kappa4_part: float
    formula_tag: str
    quadrature_order: int
    est_error: float
    clamped: bool = False

    def as_dict(self) -> dict:
        return {
            "formula_tag": self.formula_tag,
            "gaussian_part": self.gaussian_part,
            "kappa4_part": self.kappa4_part,
            "total": self.total,
            "est_error": self.est_error,
            "quadrature_order": self.quadrature_order,
            "clamped": self.clamped,
        }


def _real_values(phi: TestFunction, x: np.ndarray, derivative: bool = False) -> np.ndarray:
    vals = np.asarray(phi.derivative(x) if derivative else phi.evaluate(x))
    if np.iscomplexobj(vals):
        if np.max(np.abs(vals.imag), initial=0.0) > 0:
            raise ValueError("variance formulas need a real test function; use real_part()/imag_part()")
        vals = vals.real
    return np.broadcast_to(vals.astype(float), x.shape)


def _double_integral(phi: TestFunction, center: float, radius: float, order: int) -> float:
    x = chebyshev_nodes(center, radius, order)
    f = _real_values(phi, x)
    dx = x[:, None] - x[None, :]
    near = np.abs(dx) < DIAGONAL_THRESHOLD * radius
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = np.where(near, 0.0, (f[:, None] - f[None, :]) / np.where(near, 1.0, dx))
    if near.any():
        i, j = np.nonzero(near)
        mid = 0.5 * (x[i] + x[j])
        diff[i, j] = _real_values(phi, mid, derivative=True)
    y = x - center
    kernel = radius * radius - y[:, None] * y[None, :]
    s = math.fsum((diff * diff * kernel).ravel())
    return s * (math.pi / order) ** 2 / (2 * math.pi**2)


def _gaussian_part(phi, center, radius, order) -> tuple[float, float]:
    if order < 16:
        raise ValueError("quadrature order must be >= 16")
    v = _double_integral(phi, center, radius, order)
    v2 = _double_integral(phi, center, radius, 2 * order)
    return v, abs(v2 - v)


def _finish(tag, gaussian, kappa4_part, order, err) -> VarianceResult:
    total = gaussian + kappa4_part
    clamped = False
    if total < 0:
        if total >= -NEGATIVE_CLAMP:
            total, clamped = 0.0, True
        else:
            raise VarianceError(f"{tag} variance is negative ({total:.3e})")
    if gaussian < 0:
        gaussian = 0.0 if gaussian >= -NEGATIVE_CLAMP else gaussian
    return VarianceResult(total, gaussian, kappa4_part, tag, order, err, clamped)


def variance_goe(phi: TestFunction, w: float, order: int = DEFAULT_ORDER) -> VarianceResult:
    v, err = _gaussian_part(phi, 0.0, 2 * w, order)
    return _finish("GOE", v, 0.0, order, err)


def kappa4_constant_B(phi: TestFunction, w: float, order: int = DEFAULT_ORDER) -> float:
    """B = (1/pi w^4) int phi(mu) (2w^2 - mu^2) / sqrt(4w^2 - mu^2) dmu."""
    g = lambda x: _real_values(phi, x) * (2 * w * w - x * x)
    return float(chebyshev_weighted_integral(g, 0.0, 2 * w, order)) / (math.pi * w**4)


def variance_wigner(phi: TestFunction, w: float, kappa4: float, order: int = DEFAULT_ORDER) -> VarianceResult:
    v, err = _gaussian_part(phi, 0.0, 2 * w, order)
    b = kappa4_constant_B(phi, w, order)
    return _finish("Wigner", v, kappa4 * b * b / 2, order, err)


def _covariance_geometry(a: float, c: float) -> tuple[float, float]:
    if c < 1:
        raise ValueError(f"sample-covariance CLT variance needs c >= 1 (m/n -> c >= 1), got c = {c}")
    return a * a * (c + 1), 2 * a * a * math.sqrt(c)


def variance_wishart(phi: TestFunction, a: float, c: float, order: int = DEFAULT_ORDER) -> VarianceResult:
    center, radius = _covariance_geometry(a, c)
    v, err = _gaussian_part(phi, center, radius, order)
    return _finish("Wishart", v, 0.0, order, err)


def covariance_moment_I(phi: TestFunction, a: float, c: float, order: int = DEFAULT_ORDER) -> float:
    """I = int phi(mu) (mu - a_m) / sqrt(4a^4 c - (mu - a_m)^2) dmu."""
    center, radius = _covariance_geometry(a, c)
    g = lambda x: _real_values(phi, x) * (x - center)
    return float(chebyshev_weighted_integral(g, center, radius, order))


def kappa4_constant_C(phi: TestFunction, a: float, c: float, order: int = DEFAULT_ORDER) -> float:
    """C[phi] = I / (2 pi a^4)."""
    return covariance_moment_I(phi, a, c, order) / (2 * math.pi * a**4)


def variance_sample_covariance(
    phi: TestFunction, a: float, c: float, kappa4: float, order: int = DEFAULT_ORDER
) -> VarianceResult:
    center, radius = _covariance_geometry(a, c)
    v, err = _gaussian_part(phi, center, radius, order)
    i_val = covariance_moment_I(phi, a, c, order)
    k4 = kappa4 / (4 * c * math.pi**2 * a**8) * i_val * i_val
    return _finish("SampleCovariance", v, k4, order, err)


def theory_variance(family: str, phi: TestFunction, *, w2: float = 1.0, a2: float = 1.0,
                    c: float = 1.0, kappa4: float = 0.0, order: int = DEFAULT_ORDER) -> VarianceResult:
    """Dispatch on ensemble family."""
    if family == "GOE":
        return variance_goe(phi, math.sqrt(w2), order)
    if family == "Wigner":
        return variance_wigner(phi, math.sqrt(w2), kappa4, order)
    if family == "Wishart":
        return variance_wishart(phi, math.sqrt(a2), c, order)
    if family == "SampleCovariance":
        return variance_sample_covariance(phi, math.sqrt(a2), c, kappa4, order)
    raise ValueError(f"unknown family {family!r}")
