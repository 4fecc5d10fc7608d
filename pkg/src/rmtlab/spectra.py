"""Eigenvalues of real symmetric matrices and per-sample spectral observables."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ensembles import EnsembleSpec


class EigenError(ArithmeticError):
    """The tridiagonal iteration did not converge."""


@dataclass(frozen=True, eq=False)
class SpectrumSample:
    """Ascending eigenvalues of one sampled matrix plus provenance."""

    eigenvalues: np.ndarray
    ensemble: EnsembleSpec | None = None
    seed: int | None = None
    replica: int | None = None

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float)
        if ev.ndim != 1:
            raise ValueError("eigenvalues must be one-dimensional")
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be in ascending order")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def _check_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.max(np.abs(a)), np.finfo(float).tiny) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within 1e-12 relative")
    return a


def tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction to symmetric tridiagonal form.

    Returns (diagonal, offdiagonal) with offdiagonal of length n-1.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm2 = v @ v
        if vnorm2 == 0.0:
            continue
        # A <- H A H with H = I - 2 v v^T / (v^T v), applied to the trailing block
        sub = a[k + 1 :, k + 1 :]
        p = sub @ v * (2.0 / vnorm2)
        kcoef = (v @ p) / vnorm2
        q = p - kcoef * v
        sub -= np.outer(v, q) + np.outer(q, v)
        a[k + 1 :, k] = 0.0
        a[k, k + 1 :] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
    return np.diag(a).copy(), np.diag(a, k=1).copy()


def tridiagonal_eigenvalues(d: np.ndarray, e: np.ndarray, max_iter: int = 60) -> np.ndarray:
    """Implicitly shifted QL iteration (Wilkinson shift) on a symmetric tridiagonal matrix."""
    d = np.array(d, dtype=float)
    n = d.size
    e = np.append(np.asarray(e, dtype=float), 0.0)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= np.finfo(float).eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise EigenError(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if r == 0.0 and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(d)


def eigenvalues_symmetric(a: np.ndarray, tol: float = 1e-11, method: str = "lapack") -> np.ndarray:
    """Full ascending spectrum of a real symmetric matrix.

    ``method="lapack"`` calls the LAPACK symmetric driver (Householder
    tridiagonalization plus a tridiagonal solver); ``method="householder"``
    runs the pure NumPy reduction and implicit QL iteration in this module.
    ``tol`` is the accuracy target relative to the matrix norm; both methods
    are backward stable and meet it for tol >= ~1e-14.
    """
    a = _check_symmetric(a)
    if not np.all(np.isfinite(a)):
        raise EigenError("matrix has non-finite entries")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a.shape[0] == 0:
        return np.empty(0)
    if method == "lapack":
        ev = np.linalg.eigvalsh(a)
    elif method == "householder":
        d, e = tridiagonalize(a)
        ev = tridiagonal_eigenvalues(d, e)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(ev)):
        raise EigenError("non-finite eigenvalues")
    return np.sort(ev)


def spectrum(a: np.ndarray, ensemble: EnsembleSpec | None = None, seed: int | None = None,
             replica: int | None = None, method: str = "lapack") -> SpectrumSample:
    return SpectrumSample(eigenvalues_symmetric(a, method=method), ensemble, seed, replica)


def _compensated_sum(values: np.ndarray) -> float | complex:
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)


def linear_statistic(sample: SpectrumSample, phi: Callable[[np.ndarray], np.ndarray]) -> float | complex:
    """N_n[phi] = sum_l phi(lambda_l), summed in ascending-eigenvalue order.

    ``phi`` is a TestFunction or any vectorized callable.
    """
    with np.errstate(divide="raise", invalid="raise"):
        try:
            vals = np.asarray(phi(sample.eigenvalues))
        except FloatingPointError as exc:
            raise ArithmeticError(f"test function undefined on the spectrum: {exc}") from exc
    vals = np.broadcast_to(vals, sample.eigenvalues.shape)
    if not np.all(np.isfinite(vals)):
        raise ArithmeticError("test function is not finite at some eigenvalue")
    return _compensated_sum(vals)


def trace_exponential(sample: SpectrumSample, t: float) -> complex:
    """u_n(t) = Tr exp(itM) = sum_l exp(i t lambda_l)."""
    return complex(_compensated_sum(np.exp(1j * t * sample.eigenvalues)))


def stieltjes_empirical(sample: SpectrumSample, z: complex) -> complex:
    """g_n(z) = n^{-1} sum_l (lambda_l - z)^{-1}."""
    z = complex(z)
    if z.imag == 0:
        raise ValueError("z must be off the real axis")
    return complex(_compensated_sum(1.0 / (sample.eigenvalues - z))) / sample.n


def empirical_measure(sample: SpectrumSample, edges: Sequence[float]) -> np.ndarray:
    """Fraction of eigenvalues in each bin (edges[i], edges[i+1]].

    The first bin is closed on the left.  Edges may be infinite.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two bin edges")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing (bins may not overlap)")
    ev = sample.eigenvalues
    if ev.size and (ev[0] < edges[0] or ev[-1] > edges[-1]):
        raise ValueError("bins do not cover the spectrum")
    idx = np.searchsorted(edges, ev, side="left") - 1
    idx = np.clip(idx, 0, edges.size - 2)
    counts = np.bincount(idx, minlength=edges.size - 1)
    return counts / ev.size
