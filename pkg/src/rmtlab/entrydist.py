"""Scalar entry distributions for the random-matrix ensembles.

Each distribution knows its raw moments exactly, so cumulants (and hence the
fourth cumulant that shifts the CLT variance) can be pinned without sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

MAX_MOMENT = 8
MAX_CUMULANT_ORDER = 6


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@dataclass(frozen=True)
class EntryDistribution:
    """A centred scalar law with exact moments up to order ``MAX_MOMENT``.

    ``moments[j - 1]`` is the raw moment of order j.  ``bound`` is the support
    bound for compactly supported laws, ``None`` otherwise.
    """

    kind: str
    variance: float
    moments: tuple[float, ...]
    abs_moments: tuple[float, ...]
    bound: float | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError(f"variance must be positive, got {self.variance}")
        mu = self.moments
        if len(mu) < 4:
            raise ValueError("at least four moments are required")
        scale = max(1.0, self.variance)
        if abs(mu[0]) > 1e-12 * math.sqrt(scale):
            raise ValueError(f"entry law must be centred, mean = {mu[0]}")
        if not math.isclose(mu[1], self.variance, rel_tol=1e-12):
            raise ValueError("second moment must equal the declared variance")
        if mu[3] < mu[1] ** 2 * (1 - 1e-12):
            raise ValueError("inconsistent moments: mu4 < mu2^2")
        if self.bound is not None:
            for j, m in enumerate(mu, start=1):
                if abs(m) > self.bound**j * (1 + 1e-12):
                    raise ValueError(f"|mu_{j}| exceeds bound^{j}")

    def moment(self, j: int) -> float:
        if j == 0:
            return 1.0
        if j > len(self.moments):
            raise ValueError(f"moment of order {j} not available")
        return self.moments[j - 1]

    def abs_moment(self, j: int) -> float:
        if j == 0:
            return 1.0
        if j > len(self.abs_moments):
            raise ValueError(f"absolute moment of order {j} not available")
        return self.abs_moments[j - 1]

    @property
    def kappa4(self) -> float:
        return cumulants_from_moments(self.moments, 4)[3]

    def with_variance(self, variance: float) -> "EntryDistribution":
        """The same law rescaled to the given variance."""
        s = math.sqrt(variance / self.variance)
        if self.kind == "gaussian":
            return gaussian(variance)
        if self.kind == "rademacher":
            return rademacher(self.params["scale"] * s)
        if self.kind == "uniform":
            return uniform(self.params["halfwidth"] * s)
        if self.kind == "table":
            return table([v * s for v in self.params["values"]], self.params["probs"])
        raise ValueError(f"cannot rescale distribution of kind {self.kind!r}")


def gaussian(variance: float = 1.0) -> EntryDistribution:
    sd = math.sqrt(variance)
    mom = tuple(
        0.0 if j % 2 else sd**j * _double_factorial(j - 1) for j in range(1, MAX_MOMENT + 1)
    )
    absm = tuple(
        sd**j * 2 ** (j / 2) * math.gamma((j + 1) / 2) / math.sqrt(math.pi)
        for j in range(1, MAX_MOMENT + 1)
    )
    return EntryDistribution("gaussian", variance, mom, absm, None, {"variance": variance})


def rademacher(scale: float = 1.0) -> EntryDistribution:
    """Symmetric two-point law on {-scale, +scale}."""
    mom = tuple(0.0 if j % 2 else scale**j for j in range(1, MAX_MOMENT + 1))
    absm = tuple(scale**j for j in range(1, MAX_MOMENT + 1))
    return EntryDistribution("rademacher", scale**2, mom, absm, scale, {"scale": scale})


def uniform(halfwidth: float = math.sqrt(3.0)) -> EntryDistribution:
    """Uniform law on [-halfwidth, halfwidth]."""
    h = halfwidth
    mom = tuple(0.0 if j % 2 else h**j / (j + 1) for j in range(1, MAX_MOMENT + 1))
    absm = tuple(h**j / (j + 1) for j in range(1, MAX_MOMENT + 1))
    return EntryDistribution("uniform", h**2 / 3, mom, absm, h, {"halfwidth": h})


def table(values: Sequence[float], probs: Sequence[float]) -> EntryDistribution:
    """Finite discrete law given as (value, probability) pairs; moments are exact sums."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(probs, dtype=float)
    if v.shape != p.shape or v.ndim != 1 or v.size == 0:
        raise ValueError("values and probs must be equal-length non-empty sequences")
    if np.any(p < 0) or not math.isclose(p.sum(), 1.0, abs_tol=1e-12):
        raise ValueError("probs must be nonnegative and sum to 1")
    mom = tuple(math.fsum(p * v**j) for j in range(1, MAX_MOMENT + 1))
    absm = tuple(math.fsum(p * np.abs(v) ** j) for j in range(1, MAX_MOMENT + 1))
    return EntryDistribution(
        "table",
        mom[1],
        mom,
        absm,
        float(np.max(np.abs(v))),
        {"values": [float(x) for x in v], "probs": [float(x) for x in p]},
    )


def cumulants_from_moments(moments: Sequence[float], order: int) -> list[float]:
    """Cumulants kappa_1..kappa_order from raw moments mu_1..mu_order.

    Uses the recursion mu_{r+1} = sum_j C(r, j) kappa_{j+1} mu_{r-j}, solved
    for the highest cumulant at each step.
    """
    if order < 1 or order > MAX_CUMULANT_ORDER:
        raise ValueError(f"order must be in 1..{MAX_CUMULANT_ORDER}, got {order}")
    if order > len(moments):
        raise ValueError(f"need {order} moments, got {len(moments)}")
    mu = [1.0] + [float(m) for m in moments[:order]]
    kappa: list[float] = []
    for r in range(order):
        acc = mu[r + 1]
        for j in range(r):
            acc -= math.comb(r, j) * kappa[j] * mu[r - j]
        kappa.append(acc)
    return kappa


def moments_from_cumulants(cumulants: Sequence[float]) -> list[float]:
    """Inverse of :func:`cumulants_from_moments`."""
    mu = [1.0]
    for r in range(len(cumulants)):
        mu.append(math.fsum(math.comb(r, j) * cumulants[j] * mu[r - j] for j in range(r + 1)))
    return mu[1:]


def sample_entries(dist: EntryDistribution, rng: np.random.Generator, count: int) -> np.ndarray:
    if count < 0:
        raise ValueError("count must be nonnegative")
    if dist.kind == "gaussian":
        return math.sqrt(dist.variance) * rng.standard_normal(count)
    if dist.kind == "rademacher":
        signs = 2.0 * rng.integers(0, 2, size=count) - 1.0
        return dist.params["scale"] * signs
    if dist.kind == "uniform":
        h = dist.params["halfwidth"]
        return rng.uniform(-h, h, size=count)
    if dist.kind == "table":
        vals = np.asarray(dist.params["values"])
        idx = rng.choice(vals.size, size=count, p=dist.params["probs"])
        return vals[idx]
    raise ValueError(f"unknown distribution kind {dist.kind!r}")


@dataclass(frozen=True)
class DecouplingCheck:
    lhs: float | complex
    rhs: float | complex
    gap: float
    bound: float
    stderr: float
    samples: int


def decoupling_constant(p: int) -> float:
    """Upper estimate of the remainder constant C_p."""
    return (1 + (3 + 2 * p) ** (p + 2)) / math.factorial(p + 1)


def verify_decoupling(
    dist: EntryDistribution,
    derivatives: Sequence[Callable[[np.ndarray], np.ndarray]],
    p: int,
    samples: int,
    rng: np.random.Generator,
    sup_top: float | None = None,
) -> DecouplingCheck:
    """Monte Carlo check of E{xi Phi(xi)} = sum_l kappa_{l+1}/l! E{Phi^(l)(xi)} + eps_p.

    ``derivatives[l]`` evaluates the l-th derivative of Phi; entries 0..p+1
    are required.  Both sides use the same draws, so ``stderr`` is the
    standard error of the per-sample difference.  ``bound`` uses the absolute
    moment E|xi|^{p+2} and ``sup_top`` = sup|Phi^(p+1)| (estimated on a dense
    grid over the sampled range when not given).
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    if len(derivatives) < p + 2:
        raise ValueError(f"need derivatives of order 0..{p + 1}")
    if p + 2 > len(dist.abs_moments) or p + 1 > MAX_CUMULANT_ORDER:
        raise ValueError(f"moments up to order {p + 2} are not available")
    kappa = cumulants_from_moments(dist.moments, p + 1)
    xi = sample_entries(dist, rng, samples)
    lhs_terms = xi * derivatives[0](xi)
    rhs_terms = sum(kappa[l] / math.factorial(l) * derivatives[l](xi) for l in range(p + 1))
    diff = lhs_terms - rhs_terms
    if sup_top is None:
        lo, hi = (float(xi.min()), float(xi.max())) if samples else (-1.0, 1.0)
        grid = np.linspace(lo, hi, 4001)
        sup_top = float(np.max(np.abs(derivatives[p + 1](grid))))
    bound = decoupling_constant(p) * dist.abs_moment(p + 2) * sup_top
    lhs = lhs_terms.mean()
    rhs = np.mean(rhs_terms)
    return DecouplingCheck(
        lhs=lhs,
        rhs=rhs,
        gap=float(abs(diff.mean())),
        bound=bound,
        stderr=float(np.std(diff, ddof=1) / math.sqrt(samples)),
        samples=samples,
    )


def sin_derivatives(count: int) -> list[Callable[[np.ndarray], np.ndarray]]:
    """sin, cos, -sin, -cos, ... as callables."""
    cycle = [np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x)]
    return [cycle[k % 4] for k in range(count)]


def polynomial_derivatives(coeffs: Sequence[float], count: int) -> list[Callable[[np.ndarray], np.ndarray]]:
    """Derivatives of the polynomial sum_k coeffs[k] x^k, orders 0..count-1."""
    poly = np.polynomial.Polynomial(coeffs)
    return [poly.deriv(k) for k in range(count)]


def from_config(spec: dict, variance: float | None = None) -> EntryDistribution:
    """Build a distribution from a config block such as ``{"kind": "uniform"}``.

    Without an explicit scale parameter the law is scaled to ``variance``.
    """
    kind = spec["kind"]
    if kind == "gaussian":
        dist = gaussian(spec.get("variance", variance if variance is not None else 1.0))
    elif kind == "rademacher":
        dist = rademacher(spec["scale"]) if "scale" in spec else rademacher(1.0)
    elif kind == "uniform":
        dist = uniform(spec["halfwidth"]) if "halfwidth" in spec else uniform()
    elif kind == "table":
        dist = table(spec["values"], spec["probs"])
    else:
        raise ValueError(f"unknown distribution kind {kind!r}")
    explicit = {"variance", "scale", "halfwidth", "values"} & set(spec)
    if variance is not None and not explicit:
        dist = dist.with_variance(variance)
    return dist
