"""Replicated sampling, CLT diagnostics, Lindeberg functionals and a-priori bounds."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import ensembles, spectra
from .ensembles import EnsembleSpec
from .entrydist import EntryDistribution
from .testfns import TestFunction, fourier_norm
from .variance import VarianceResult

SEED_MASK = (1 << 64) - 1
ECF_GRID = np.linspace(-3.0, 3.0, 121)
# variances below these count as zero: quadrature roundoff in V, float roundoff in the samples
DEGENERATE_V = 1e-12
DEGENERATE_REL = 1e-12


class ReplicaError(RuntimeError):
    def __init__(self, n: int, replica: int, cause: Exception):
        super().__init__(f"replica {replica} at n = {n} failed: {cause}")
        self.n, self.replica = n, replica


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    ensemble: EnsembleSpec
    test_function: TestFunction
    replicas: int
    n_grid: tuple[int, ...]
    base_seed: int
    workers: int = 1
    aspect: float | None = None
    record_t: tuple[float, ...] = ()

    def __post_init__(self):
        if self.replicas < 2:
            raise ValueError("replicas must be >= 2")
        if not self.n_grid or list(self.n_grid) != sorted(self.n_grid):
            raise ValueError("n_grid must be a non-empty ascending sequence")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def spec_for(self, n: int) -> EnsembleSpec:
        if self.ensemble.is_covariance:
            c = self.aspect if self.aspect is not None else self.ensemble.m / self.ensemble.n
            return self.ensemble.with_n(n, m=max(1, int(round(c * n))))
        return self.ensemble.with_n(n)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    values: dict[int, np.ndarray]
    trace_exp: dict[int, np.ndarray] = field(default_factory=dict)


def replica_rng(base_seed: int, n: int, replica: int) -> np.random.Generator:
    """Generator for one replica, a fixed hash of (base_seed, n, replica)."""
    seq = np.random.SeedSequence([base_seed & SEED_MASK, n, replica])
    return np.random.default_rng(seq)


def _one_replica(spec: EnsembleSpec, phi: TestFunction, base_seed: int, r: int, record_t):
    try:
        m = ensembles.sample_matrix(spec, replica_rng(base_seed, spec.n, r))
        sample = spectra.spectrum(m, spec, base_seed, r)
        value = spectra.linear_statistic(sample, phi)
        u = [spectra.trace_exponential(sample, t) for t in record_t]
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise ReplicaError(spec.n, r, exc) from exc
    return value, u


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """N_n[phi] for every n in the grid and every replica.

    Each replica owns its generator, and results are collected in replica
    order, so output does not depend on the worker count.
    """
    values, traces = {}, {}
    for n in config.n_grid:
        spec = config.spec_for(n)
        args = [(spec, config.test_function, config.base_seed, r, config.record_t)
                for r in range(config.replicas)]
        if config.workers == 1:
            out = [_one_replica(*a) for a in args]
        else:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                out = list(pool.map(lambda a: _one_replica(*a), args))
        dtype = complex if config.test_function.complex_valued else float
        values[n] = np.array([o[0] for o in out], dtype=dtype)
        if config.record_t:
            traces[n] = np.array([o[1] for o in out], dtype=complex)
    return ExperimentResult(config, values, traces)


@dataclass(frozen=True)
class BoundCheck:
    applicable: bool
    holds: bool | None = None
    bound: float | None = None
    margin: float | None = None
    rule: str = ""


@dataclass(frozen=True)
class CltReport:
    replicas: int
    sample_mean: float
    sample_variance: float
    variance_se: float
    theory: VarianceResult
    ks_statistic: float | None
    ks_pvalue: float | None
    excess_kurtosis: float | None
    ecf_deviation: float | None
    degenerate: bool
    n: int | None = None
    bound_check: BoundCheck | None = None

    @property
    def variance_z(self) -> float | None:
        """(sample_variance - theory) / variance_se."""
        if self.variance_se == 0:
            return None
        return (self.sample_variance - self.theory.total) / self.variance_se

    def as_dict(self) -> dict:
        d = {
            "n": self.n,
            "replicas": self.replicas,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "variance_se": self.variance_se,
            "variance_se_note": "Gaussian-limit approximation sqrt(2/(R-1)) * variance",
            "theory_total": self.theory.total,
            "theory_gaussian_part": self.theory.gaussian_part,
            "theory_kappa4_part": self.theory.kappa4_part,
            "theory_est_error": self.theory.est_error,
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "excess_kurtosis": self.excess_kurtosis,
            "ecf_deviation": self.ecf_deviation,
            "degenerate": self.degenerate,
        }
        if self.bound_check is not None:
            d.update(bound_applicable=self.bound_check.applicable, bound=self.bound_check.bound,
                     bound_holds=self.bound_check.holds, bound_margin=self.bound_check.margin)
        return d


def ecf_deviation(samples: np.ndarray, V: float, x_grid: np.ndarray = ECF_GRID) -> float:
    """sup_x |R^{-1} sum_r exp(ix(S_r - mean)) - exp(-x^2 V / 2)|."""
    centred = samples - samples.mean()
    zhat = np.exp(1j * np.multiply.outer(x_grid, centred)).mean(axis=1)
    return float(np.max(np.abs(zhat - np.exp(-x_grid**2 * V / 2))))


def clt_report(samples, V: VarianceResult, n: int | None = None) -> CltReport:
    """Aggregate replica values of a real statistic against a theoretical variance.

    KS compares (S - mean)/sqrt(V) with the unit Gaussian.  When V or the
    sample variance is zero up to roundoff the distributional tests are
    skipped and ``degenerate`` is set.
    """
    s = np.asarray(samples)
    if np.iscomplexobj(s):
        raise ValueError("clt_report takes real samples; split complex statistics into parts")
    s = s.astype(float)
    R = s.size
    if R < 2:
        raise ValueError("need at least two replicas")
    mean = math.fsum(s) / R
    var = math.fsum((s - mean) ** 2) / (R - 1)
    se = var * math.sqrt(2 / (R - 1))
    degenerate = V.total <= DEGENERATE_V or math.sqrt(var) <= DEGENERATE_REL * max(1.0, abs(mean))
    ks = ksp = kurt = ecf = None
    if not degenerate:
        z = (s - mean) / math.sqrt(V.total)
        res = stats.kstest(z, "norm")
        ks, ksp = float(res.statistic), float(res.pvalue)
        kurt = float(stats.kurtosis(s, fisher=True, bias=False)) if R > 3 else None
        ecf = ecf_deviation(s, V.total)
    return CltReport(R, mean, var, se, V, ks, ksp, kurt, ecf, degenerate, n)


def ks_critical_value(R: int, level: float = 0.01) -> float:
    """Asymptotic KS critical value; 1.63/sqrt(R) at the 1% level."""
    return float(stats.kstwobign.isf(level)) / math.sqrt(R)


def tail_moment(dist: EntryDistribution, s: float, k: int) -> float:
    """int_{|x| > s} |x|^k F(dx), exact for every built-in law."""
    if dist.kind == "gaussian":
        sd = math.sqrt(dist.variance)
        u = s / sd
        pdf = math.exp(-u * u / 2) / math.sqrt(2 * math.pi)
        tail = 0.5 * special.erfc(u / math.sqrt(2))
        if k == 2:
            return 2 * sd**2 * (u * pdf + tail)
        if k == 4:
            return 2 * sd**4 * ((u**3 + 3 * u) * pdf + 3 * tail)
        if k == 0:
            return 2 * tail
        raise ValueError("Gaussian tail moments implemented for k in {0, 2, 4}")
    if dist.kind == "rademacher":
        a = dist.params["scale"]
        return a**k if a > s else 0.0
    if dist.kind == "uniform":
        h = dist.params["halfwidth"]
        if s >= h:
            return 0.0
        return (h ** (k + 1) - s ** (k + 1)) / ((k + 1) * h)
    if dist.kind == "table":
        v = np.asarray(dist.params["values"])
        p = np.asarray(dist.params["probs"])
        sel = np.abs(v) > s
        return math.fsum(p[sel] * np.abs(v[sel]) ** k)
    raise ValueError(f"unknown distribution kind {dist.kind!r}")


@dataclass(frozen=True)
class LindebergResult:
    L2: float
    L4: float


def lindeberg_diagnostics(dist: EntryDistribution, n: int, tau: float, m: int | None = None,
                          diag: EntryDistribution | None = None) -> LindebergResult:
    """Tail functionals n^{-2} sum int_{|W| > tau sqrt(n)} W^{2 or 4} F(dW).

    Wigner (m is None): the sum runs over all n^2 ordered pairs; the diagonal
    uses ``diag`` when given, else the off-diagonal law rescaled to twice the
    variance.  Sample covariance: the sum runs over the m*n data entries.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    s = tau * math.sqrt(n)
    if m is not None:
        mult = m * n / n**2
        return LindebergResult(mult * tail_moment(dist, s, 2), mult * tail_moment(dist, s, 4))
    d = diag if diag is not None else dist.with_variance(2 * dist.variance)
    off, on = n * (n - 1) / n**2, n / n**2
    return LindebergResult(
        off * tail_moment(dist, s, 2) + on * tail_moment(d, s, 2),
        off * tail_moment(dist, s, 4) + on * tail_moment(d, s, 4),
    )


def apriori_bound_check(report: CltReport, phi: TestFunction, spec: EnsembleSpec,
                        constant: float | None = None) -> BoundCheck:
    """Compare the sample variance with the Poincare-type bounds.

    GOE: 2 w^2 sup|phi'|^2.  Wishart: 4 a^4 c_n sup|phi'|^2.  Wigner and
    sample-covariance bounds carry an unspecified constant; they apply only
    when ``constant`` is given, as constant * (int (1+|t|^4)|phi_hat|)^2.
    The check passes iff sample_variance <= bound * (1 + 3 * sqrt(2/(R-1))).
    """
    if spec.family in ("GOE", "Wishart"):
        if phi.sup_deriv is None:
            return BoundCheck(False, rule="sup|phi'| unavailable")
        if spec.family == "GOE":
            bound, rule = 2 * spec.w2 * phi.sup_deriv**2, "2 w^2 sup|phi'|^2"
        else:
            bound, rule = 4 * spec.a2**2 * spec.aspect_ratio * phi.sup_deriv**2, "4 a^4 c_n sup|phi'|^2"
    else:
        norm = fourier_norm(phi, 4)
        if constant is None or norm is None:
            return BoundCheck(False, rule="Fourier-norm bound needs a constant and an integrable phi_hat")
        bound, rule = constant * norm**2, "C (int (1+|t|^4)|phi_hat|)^2"
    slack = bound * (1 + 3 * math.sqrt(2 / (report.replicas - 1)))
    return BoundCheck(True, report.sample_variance <= slack, bound, slack - report.sample_variance, rule)


def empirical_correlator(values: np.ndarray, u: np.ndarray, x: float) -> np.ndarray:
    """Y_n(x, t) estimated as the replica mean of u_n°(t) exp(ix N_n°); one entry per recorded t."""
    values = np.asarray(values, dtype=float)
    u = np.asarray(u, dtype=complex)
    centred_u = u - u.mean(axis=0)
    e = np.exp(1j * x * (values - values.mean()))
    return (centred_u * e[:, None]).mean(axis=0)
