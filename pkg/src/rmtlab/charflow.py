"""Time-domain machinery behind the characteristic-function proof of the CLT.

Functions of t >= 0 are sampled on a uniform grid (``GridFunction``).  The
limiting correlator Y(x, t) solves

    Y(t) + 2w^2 int_0^t dt1 int_0^t1 v(t1 - t2) Y(t2) dt2 = x Z(x) A(t),

which is solved both by a trapezoid marching scheme and from its closed-form
solution; the two routes are compared in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import laws
from .laws import LimitLaw
from .quadrature import chebyshev_nodes, oscillation_order
from .testfns import TestFunction


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples f(k h), k = 0..len-1."""

    h: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if self.h <= 0:
            raise ValueError("grid step must be positive")
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a grid function needs at least two samples")
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, f, h: float, T: float) -> "GridFunction":
        return cls(h, np.asarray(f(grid(h, T))))

    @property
    def t(self) -> np.ndarray:
        return self.h * np.arange(self.values.size)

    @property
    def T(self) -> float:
        return self.h * (self.values.size - 1)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)


def grid(h: float, T: float) -> np.ndarray:
    k = int(round(T / h))
    if not math.isclose(k * h, T, rel_tol=1e-12, abs_tol=1e-12):
        raise ValueError(f"T = {T} is not a multiple of h = {h}")
    return h * np.arange(k + 1)


def _check_same_grid(*fs: GridFunction) -> None:
    first = fs[0]
    for f in fs[1:]:
        if f.values.size != first.values.size or not math.isclose(f.h, first.h, rel_tol=1e-12):
            raise ValueError("grid functions live on different grids")


def _trapezoid_end_corrected(g: np.ndarray, h: float) -> complex:
    """Trapezoid rule plus the h^2 Euler-Maclaurin end correction (one-sided differences)."""
    s = h * (g.sum() - 0.5 * (g[0] + g[-1]))
    if g.size >= 4:
        d0 = (-3 * g[0] + 4 * g[1] - g[2]) / (2 * h)
        d1 = (3 * g[-1] - 4 * g[-2] + g[-3]) / (2 * h)
        s -= h * h / 12 * (d1 - d0)
    return s


def generalized_fourier(f: GridFunction, z: complex, tail_tol: float = 1e-8) -> complex:
    """f~(z) = i^{-1} int_0^inf exp(-izt) f(t) dt over the sampled range, Im z < 0."""
    z = complex(z)
    if z.imag >= 0:
        raise ValueError("the generalized Fourier transform needs Im z < 0")
    sup = float(np.max(np.abs(f.values)))
    if math.exp(z.imag * f.T) * sup > tail_tol:
        raise ValueError(f"grid too short: tail bound {math.exp(z.imag * f.T) * sup:.2e} exceeds {tail_tol}")
    g = np.exp(-1j * z * f.t) * f.values
    return complex(_trapezoid_end_corrected(g, f.h) / 1j)


def convolve(f1: GridFunction, f2: GridFunction) -> GridFunction:
    """(f1 * f2)(t) = int_0^t f1(t - s) f2(s) ds by the trapezoid rule."""
    _check_same_grid(f1, f2)
    a, b, h = f1.values, f2.values, f1.h
    n = a.size
    out = np.empty(n, dtype=np.result_type(a, b))
    out[0] = 0.0
    for k in range(1, n):
        prod = a[k::-1] * b[: k + 1]
        out[k] = h * (prod.sum() - 0.5 * (prod[0] + prod[-1]))
    return GridFunction(h, out)


def cumulative(f: GridFunction) -> GridFunction:
    """int_0^t f by the cumulative trapezoid rule."""
    vals = integrate.cumulative_trapezoid(f.values, dx=f.h, initial=0.0)
    return GridFunction(f.h, vals)


def solve_volterra(Q1: GridFunction, R: GridFunction) -> GridFunction:
    """Solve P(t) + int_0^t dt1 int_0^t1 Q1(t1 - t2) P(t2) dt2 = R(t).

    Swapping the integrals gives P + int_0^t Q(t - s) P(s) ds = R with
    Q(t) = int_0^t Q1.  Because Q(0) = 0 the trapezoid discretization is
    explicit:
        P_k = R_k - h (Q_k P_0 / 2 + sum_{j=1}^{k-1} Q_{k-j} P_j).
    Second order in h.
    """
    _check_same_grid(Q1, R)
    h = Q1.h
    q = cumulative(Q1).values
    r = R.values
    p = np.zeros(r.size, dtype=np.result_type(q, r, float))
    p[0] = r[0]
    for k in range(1, r.size):
        acc = 0.5 * q[k] * p[0]
        if k > 1:
            acc += q[k - 1 : 0 : -1] @ p[1:k]
        p[k] = r[k] - h * acc
    return GridFunction(h, p)


def _law_frame(law: LimitLaw) -> tuple[float, float]:
    if law.kind == "marchenko-pastur" and law.c < 1:
        raise ValueError("A(t) is defined here for c >= 1 only")
    return law.center, law.radius


def A_function(t, phi: TestFunction, law: LimitLaw, order: int | None = None):
    """A(t) = -(1/pi) int_0^t dt1 int exp(i t1 lam) phi'(lam) sqrt(r^2 - (lam - c)^2) dlam.

    The t1 integral is done exactly: int_0^t exp(i t1 lam) dt1 = (exp(i t lam) - 1)/(i lam),
    with the value t at lam = 0.
    """
    center, radius = _law_frame(law)
    t = np.asarray(t, dtype=float)
    if order is None:
        order = oscillation_order(radius + abs(center), t, base=128)
    x = chebyshev_nodes(center, radius, order)
    weight = (radius * radius - (x - center) ** 2) * np.asarray(phi.derivative(x))
    tt = np.multiply.outer(t, np.ones_like(x))
    lam = np.broadcast_to(x, tt.shape)
    small = np.abs(lam * tt) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        kern = np.where(small, tt * (1 + 0.5j * lam * tt), np.expm1(1j * lam * tt) / np.where(small, 1.0, 1j * lam))
    out = -(kern @ weight) * (math.pi / order) / math.pi
    return out if out.ndim else complex(out)


def closed_form_Y(x: float, t, phi: TestFunction, w: float, Z: float, order: int | None = None):
    """Y(x, t) = (i x Z / pi^2) int int (e^{it lam} - e^{it mu})/(lam - mu) phi'(lam)
    sqrt(4w^2 - lam^2) / sqrt(4w^2 - mu^2) dlam dmu,  t >= 0."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r = 2 * w
    if order is None:
        order = oscillation_order(r, t, base=128)
    nodes = chebyshev_nodes(0.0, r, order)
    lam, mu = nodes[:, None], nodes[None, :]
    dx = lam - mu
    near = np.abs(dx) < 1e-8 * r
    safe = np.where(near, 1.0, dx)
    wl = (r * r - nodes**2) * np.asarray(phi.derivative(nodes))  # includes the sqrt^2 of the lam weight
    scale = 1j * x * Z / math.pi**2 * (math.pi / order) ** 2
    out = np.empty(t.size, dtype=complex)
    for k, tk in enumerate(t):
        el = np.exp(1j * tk * nodes)
        dd = np.where(near, 1j * tk * el[:, None], (el[:, None] - el[None, :]) / safe)
        out[k] = scale * (wl @ dd).sum()
    return out if out.size > 1 else complex(out[0])


def semicircle_Y_volterra(x: float, phi: TestFunction, w: float, Z: float, h: float, T: float,
                          kappa4: float = 0.0) -> GridFunction:
    """Solve the Y-equation with kernel 2w^2 v and forcing x Z [A(t) + i kappa4 B I(t)]."""
    sc = laws.semicircle(w * w)
    t = grid(h, T)
    q1 = GridFunction(h, 2 * w * w * laws.v_kernel(sc, t))
    forcing = A_function(t, phi, sc)
    if kappa4:
        forcing = forcing + 1j * kappa4 * kappa4_forcing_shape(t, phi, w)
    return solve_volterra(q1, GridFunction(h, x * Z * forcing))


def kappa4_forcing_shape(t, phi: TestFunction, w: float):
    """B * I(t), I(t) = int_0^t (v*v)(t1) dt1, computed in closed form.

    int_0^t (v*v) = -(i/2pi w^4) int (e^{it mu} - 1)/(i mu) mu sqrt(.) dmu
                  = -(1/2pi w^4) int (e^{it mu} - 1) sqrt(4w^2 - mu^2) dmu.
    """
    from .variance import kappa4_constant_B

    sc = laws.semicircle(w * w)
    t = np.asarray(t, dtype=float)
    r2 = 4 * w * w
    fourier = laws._fourier_of_weight(sc, t, lambda x: (r2 - x * x) + 0j)
    mass = math.pi * r2 / 2  # int sqrt(4w^2 - mu^2) dmu
    i_t = -(fourier - mass) / (2 * math.pi * w**4)
    return kappa4_constant_B(phi, w) * i_t


def kappa4_Y_correction(x: float, t, phi: TestFunction, w: float, Z: float, kappa4: float):
    """kappa4 part of Y through the resolvent: -int_0^t T1(t - s) R'(s) ds,
    R'(s) = i kappa4 x Z B (v*v)(s).  ``t`` must be a uniform grid from 0."""
    from .variance import kappa4_constant_B

    t = np.asarray(t, dtype=float)
    h = t[1] - t[0]
    rp = 1j * kappa4 * x * Z * kappa4_constant_B(phi, w) * laws.vconv_kernel(t, w)
    t1 = GridFunction(h, laws.resolvent_kernel_T1(t, w))
    return -convolve(t1, GridFunction(h, rp)).values


def recovered_variance(phi: TestFunction, y: GridFunction) -> float:
    """V from Z'(x) = i int phi_hat(t) Y(x, t) dt = -x V Z(x), given y = Y / (x Z) on t >= 0.

    Negative t enters through conj Y(x, t) = Y(-x, -t); for real phi this gives
    V = 2 Im int_0^inf phi_hat(t) y(t) dt.
    """
    if phi.fourier is None:
        raise ValueError("recovering V needs a test function with a Fourier transform")
    g = np.asarray(phi.fourier(y.t)) * y.values
    return 2 * float(np.imag(_trapezoid_end_corrected(g, y.h)))


def limiting_Z(x: float, V: float) -> tuple[float, float]:
    """Z(x) = exp(-x^2 V / 2) and the residual |Z(x) - 1 + V int_0^x y Z(y) dy|."""
    if V < 0:
        raise ValueError("V must be nonnegative")
    z = math.exp(-x * x * V / 2)
    integral, _ = integrate.quad(lambda y: y * math.exp(-y * y * V / 2), 0.0, x, epsabs=1e-14, epsrel=1e-12)
    return z, abs(z - 1 + V * integral)
