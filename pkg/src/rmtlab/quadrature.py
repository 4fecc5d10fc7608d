"""Gauss-Chebyshev quadrature for integrals against 1/sqrt(r^2 - (x - c)^2)."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np


def chebyshev_nodes(center: float, radius: float, order: int) -> np.ndarray:
    """Nodes center + radius*cos(theta_k), theta_k = pi (k - 1/2) / order, k = 1..order."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    theta = np.pi * (np.arange(1, order + 1) - 0.5) / order
    return center + radius * np.cos(theta)


def chebyshev_weighted_integral(
    g: Callable[[np.ndarray], np.ndarray], center: float, radius: float, order: int
) -> float | complex:
    """int_{c-r}^{c+r} g(x) dx / sqrt(r^2 - (x - c)^2), exact for polynomials of degree < 2*order."""
    x = chebyshev_nodes(center, radius, order)
    vals = np.asarray(g(x))
    return (math.pi / order) * vals.sum()


def oscillation_order(radius: float, t, base: int = 64) -> int:
    """Node count resolving exp(i t x) over an interval of the given radius."""
    tmax = float(np.max(np.abs(t))) if np.size(t) else 0.0
    return int(base + math.ceil(1.5 * radius * tmax))
