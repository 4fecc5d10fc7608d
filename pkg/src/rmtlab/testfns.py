"""Test functions phi for linear eigenvalue statistics.

The Fourier convention is phi_hat(t) = (1/2pi) int exp(-it lam) phi(lam) dlam,
so that phi(lam) = int exp(it lam) phi_hat(t) dt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

Fn = Callable[[np.ndarray], np.ndarray]

CLASS_TAGS = ("polynomial", "bounded-smooth", "poisson-kernel", "trig")


@dataclass(frozen=True, eq=False)
class TestFunction:
    name: str
    evaluate: Fn
    derivative: Fn
    fourier: Fn | None = None
    sup_deriv: float | None = None
    class_tag: str = "bounded-smooth"
    params: dict = field(default_factory=dict)
    complex_valued: bool = False

    __test__ = False  # not a pytest class

    def __call__(self, lam):
        return self.evaluate(np.asarray(lam, dtype=float))

    @property
    def bounded(self) -> bool:
        """Whether phi is bounded with bounded derivative on the real line."""
        return self.class_tag != "polynomial"

    def __add__(self, other: "TestFunction") -> "TestFunction":
        f1, f2 = self.fourier, other.fourier
        fourier = (lambda t: f1(t) + f2(t)) if f1 is not None and f2 is not None else None
        sup = None
        if self.sup_deriv is not None and other.sup_deriv is not None:
            sup = self.sup_deriv + other.sup_deriv
        tag = self.class_tag if self.class_tag == other.class_tag else (
            "polynomial" if "polynomial" in (self.class_tag, other.class_tag) else "bounded-smooth"
        )
        return TestFunction(
            name=f"({self.name} + {other.name})",
            evaluate=lambda x: self.evaluate(x) + other.evaluate(x),
            derivative=lambda x: self.derivative(x) + other.derivative(x),
            fourier=fourier,
            sup_deriv=sup,
            class_tag=tag,
            complex_valued=self.complex_valued or other.complex_valued,
        )

    def __rmul__(self, alpha) -> "TestFunction":
        f = self.fourier
        return TestFunction(
            name=f"{alpha}*{self.name}",
            evaluate=lambda x: alpha * self.evaluate(x),
            derivative=lambda x: alpha * self.derivative(x),
            fourier=(lambda t: alpha * f(t)) if f is not None else None,
            sup_deriv=abs(alpha) * self.sup_deriv if self.sup_deriv is not None else None,
            class_tag=self.class_tag,
            params=dict(self.params),
            complex_valued=self.complex_valued or isinstance(alpha, complex),
        )

    def real_part(self) -> "TestFunction":
        return self._part(np.real, "Re")

    def imag_part(self) -> "TestFunction":
        return self._part(np.imag, "Im")

    def _part(self, op, label: str) -> "TestFunction":
        f = self.fourier
        if f is None:
            fourier = None
        elif label == "Re":
            # Re(phi)^ (t) = (phi_hat(t) + conj(phi_hat(-t))) / 2
            fourier = lambda t: (f(t) + np.conj(f(-np.asarray(t)))) / 2
        else:
            fourier = lambda t: (f(t) - np.conj(f(-np.asarray(t)))) / 2j
        return TestFunction(
            name=f"{label}[{self.name}]",
            evaluate=lambda x: op(self.evaluate(x)),
            derivative=lambda x: op(self.derivative(x)),
            fourier=fourier,
            sup_deriv=self.sup_deriv,
            class_tag=self.class_tag,
            params=dict(self.params),
        )

    def scaled_argument(self, s: float) -> "TestFunction":
        """lam -> phi(s * lam)."""
        f = self.fourier
        return TestFunction(
            name=f"{self.name}({s}*lam)",
            evaluate=lambda x: self.evaluate(s * np.asarray(x)),
            derivative=lambda x: s * self.derivative(s * np.asarray(x)),
            fourier=(lambda t: f(np.asarray(t) / s) / abs(s)) if f is not None else None,
            sup_deriv=abs(s) * self.sup_deriv if self.sup_deriv is not None else None,
            class_tag=self.class_tag,
            complex_valued=self.complex_valued,
        )


def const(value: float = 1.0) -> TestFunction:
    return TestFunction(
        name=f"const({value})",
        evaluate=lambda x: np.full(np.shape(x), float(value)),
        derivative=lambda x: np.zeros(np.shape(x)),
        sup_deriv=0.0,
        class_tag="polynomial",
        params={"value": value},
    )


def monomial(k: int) -> TestFunction:
    if k < 0 or int(k) != k:
        raise ValueError("monomial degree must be a nonnegative integer")
    k = int(k)
    if k == 0:
        f = const(1.0)
        return TestFunction("monomial(0)", f.evaluate, f.derivative, None, 0.0, "polynomial", {"k": 0})
    return TestFunction(
        name=f"monomial({k})",
        evaluate=lambda x: np.asarray(x, dtype=float) ** k,
        derivative=lambda x: k * np.asarray(x, dtype=float) ** (k - 1),
        sup_deriv=1.0 if k == 1 else None,
        class_tag="polynomial",
        params={"k": k},
    )


def gauss_bump(center: float = 0.0, width: float = 1.0) -> TestFunction:
    """exp(-(lam - center)^2 / (2 width^2))."""
    c, s = float(center), float(width)
    if s <= 0:
        raise ValueError("width must be positive")

    def ev(x):
        return np.exp(-((np.asarray(x) - c) ** 2) / (2 * s * s))

    return TestFunction(
        name=f"gauss_bump({c},{s})",
        evaluate=ev,
        derivative=lambda x: -(np.asarray(x) - c) / (s * s) * ev(x),
        fourier=lambda t: s / math.sqrt(2 * math.pi) * np.exp(-(s * np.asarray(t)) ** 2 / 2 - 1j * c * np.asarray(t)),
        sup_deriv=math.exp(-0.5) / s,
        class_tag="bounded-smooth",
        params={"center": c, "width": s},
    )


def poisson(E: float = 0.0, eta: float = 1.0) -> TestFunction:
    """Poisson kernel eta / ((lam - E)^2 + eta^2) = Im (lam - E - i eta)^{-1}."""
    E, eta = float(E), float(eta)
    if eta <= 0:
        raise ValueError("eta must be positive")
    return TestFunction(
        name=f"poisson({E},{eta})",
        evaluate=lambda x: eta / ((np.asarray(x) - E) ** 2 + eta**2),
        derivative=lambda x: -2 * eta * (np.asarray(x) - E) / ((np.asarray(x) - E) ** 2 + eta**2) ** 2,
        fourier=lambda t: 0.5 * np.exp(-eta * np.abs(t) - 1j * E * np.asarray(t)),
        sup_deriv=3 * math.sqrt(3) / (8 * eta**2),
        class_tag="poisson-kernel",
        params={"E": E, "eta": eta},
    )


def cosine(t0: float) -> TestFunction:
    t0 = float(t0)
    return TestFunction(
        name=f"cosine({t0})",
        evaluate=lambda x: np.cos(t0 * np.asarray(x)),
        derivative=lambda x: -t0 * np.sin(t0 * np.asarray(x)),
        sup_deriv=abs(t0),
        class_tag="trig",
        params={"t0": t0},
    )


def exponential(t0: float) -> TestFunction:
    """exp(i t0 lam); complex valued."""
    t0 = float(t0)
    return TestFunction(
        name=f"exponential({t0})",
        evaluate=lambda x: np.exp(1j * t0 * np.asarray(x)),
        derivative=lambda x: 1j * t0 * np.exp(1j * t0 * np.asarray(x)),
        sup_deriv=abs(t0),
        class_tag="trig",
        params={"t0": t0},
        complex_valued=True,
    )


def chebyshev(k: int, scale: float = 2.0) -> TestFunction:
    """Chebyshev polynomial T_k(lam / scale); scale = 2w maps the semicircle support to [-1, 1]."""
    k = int(k)
    if k < 0:
        raise ValueError("degree must be nonnegative")
    poly = np.polynomial.Chebyshev.basis(k, domain=[-scale, scale])
    dpoly = poly.deriv()
    return TestFunction(
        name=f"chebyshev({k},{scale})",
        evaluate=lambda x: poly(np.asarray(x, dtype=float)),
        derivative=lambda x: dpoly(np.asarray(x, dtype=float)),
        sup_deriv=0.0 if k == 0 else None,
        class_tag="polynomial",
        params={"k": k, "scale": scale},
    )


_BUILTINS = {
    "const": const,
    "monomial": monomial,
    "gauss_bump": gauss_bump,
    "poisson": poisson,
    "cosine": cosine,
    "exponential": exponential,
    "chebyshev": chebyshev,
}


def builtin(name: str, **params) -> TestFunction:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; known: {sorted(_BUILTINS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for test function {name!r}: {exc}") from None


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def fourier_norm(phi: TestFunction, k: int) -> float | None:
    """int (1 + |t|^k) |phi_hat(t)| dt, or None when phi has no integrable transform."""
    if k not in (2, 3, 4, 5):
        raise ValueError("k must be one of 2, 3, 4, 5")
    if phi.fourier is None:
        return None

    def integrand(t):
        return (1 + abs(t) ** k) * abs(complex(np.asarray(phi.fourier(np.array([t])))[0]))

    total = 0.0
    for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)):
        val, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-11)
        total += val
    return total
