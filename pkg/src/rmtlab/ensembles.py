"""Random matrix ensembles: GOE, Wigner, Wishart and sample covariance."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import entrydist
from .entrydist import EntryDistribution

WIGNER_FAMILIES = ("GOE", "Wigner")
COVARIANCE_FAMILIES = ("Wishart", "SampleCovariance")
FAMILIES = WIGNER_FAMILIES + COVARIANCE_FAMILIES


@dataclass(frozen=True)
class EnsembleSpec:
    """Which matrix family to draw from, with its size and scale parameters.

    Wigner families: off-diagonal variance ``w2``, diagonal variance ``2*w2``.
    Covariance families: ``m x n`` data matrix with entry variance ``a2``.
    Missing entry laws default to Gaussians (GOE/Wishart) or, for the
    diagonal of a Wigner matrix, to the off-diagonal law rescaled.
    """

    family: str
    n: int
    m: int | None = None
    w2: float = 1.0
    a2: float = 1.0
    offdiag: EntryDistribution | None = None
    diag: EntryDistribution | None = None
    entry: EntryDistribution | None = None
    truncate_tau: float | None = None
    _resolved: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.truncate_tau is not None and self.truncate_tau <= 0:
            raise ValueError("truncate_tau must be positive")
        r = self._resolved
        if self.family in WIGNER_FAMILIES:
            if self.w2 <= 0:
                raise ValueError("w2 must be positive")
            if self.family == "GOE":
                for name, d in (("offdiag", self.offdiag), ("diag", self.diag)):
                    if d is not None and d.kind != "gaussian":
                        raise ValueError(f"GOE requires Gaussian {name} entries")
                off = entrydist.gaussian(self.w2)
                dia = entrydist.gaussian(2 * self.w2)
            else:
                if self.offdiag is None:
                    raise ValueError("Wigner family requires an offdiag distribution")
                off = self.offdiag
                dia = self.diag if self.diag is not None else off.with_variance(2 * self.w2)
            _check_variance("offdiag", off, self.w2)
            _check_variance("diag", dia, 2 * self.w2)
            r["offdiag"], r["diag"] = off, dia
        else:
            if self.m is None or self.m < 1:
                raise ValueError(f"{self.family} requires a positive m")
            if self.a2 <= 0:
                raise ValueError("a2 must be positive")
            if self.family == "Wishart":
                if self.entry is not None and self.entry.kind != "gaussian":
                    raise ValueError("Wishart requires Gaussian entries")
                ent = entrydist.gaussian(self.a2)
            else:
                if self.entry is None:
                    raise ValueError("SampleCovariance requires an entry distribution")
                ent = self.entry
            _check_variance("entry", ent, self.a2)
            r["entry"] = ent

    @property
    def is_covariance(self) -> bool:
        return self.family in COVARIANCE_FAMILIES

    @property
    def aspect_ratio(self) -> float:
        """c_n = m/n for covariance families."""
        if not self.is_covariance:
            raise ValueError("aspect ratio is defined only for covariance families")
        return self.m / self.n

    @property
    def offdiag_law(self) -> EntryDistribution:
        return self._resolved["offdiag"]

    @property
    def diag_law(self) -> EntryDistribution:
        return self._resolved["diag"]

    @property
    def entry_law(self) -> EntryDistribution:
        return self._resolved["entry"]

    @property
    def kappa4(self) -> float:
        """Fourth cumulant of the off-diagonal (Wigner) or data (covariance) entries."""
        law = self.entry_law if self.is_covariance else self.offdiag_law
        return law.kappa4

    def with_n(self, n: int, m: int | None = None) -> "EnsembleSpec":
        kwargs = dict(
            family=self.family, n=n, m=m if m is not None else self.m, w2=self.w2, a2=self.a2,
            offdiag=self.offdiag, diag=self.diag, entry=self.entry, truncate_tau=self.truncate_tau,
        )
        return EnsembleSpec(**kwargs)


def _check_variance(name: str, dist: EntryDistribution, expected: float) -> None:
    if not math.isclose(dist.variance, expected, rel_tol=1e-9):
        raise ValueError(f"{name} distribution has variance {dist.variance}, expected {expected}")


def sample_raw(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Unscaled entries: the symmetric W (Wigner families) or the m x n data matrix X.

    Off-diagonal entries are drawn first in row-major upper-triangle order,
    then the diagonal, so a given rng-state always maps to the same matrix.
    """
    n = spec.n
    if spec.is_covariance:
        x = entrydist.sample_entries(spec.entry_law, rng, spec.m * n)
        return x.reshape(spec.m, n)
    iu = np.triu_indices(n, k=1)
    w = np.zeros((n, n))
    w[iu] = entrydist.sample_entries(spec.offdiag_law, rng, iu[0].size)
    w = w + w.T
    w[np.diag_indices(n)] = entrydist.sample_entries(spec.diag_law, rng, n)
    return w


def matrix_from_raw(spec: EnsembleSpec, raw: np.ndarray) -> np.ndarray:
    n = spec.n
    if spec.is_covariance:
        g = raw.T @ raw / n
        upper = np.triu(g)
        return upper + np.triu(g, k=1).T
    return raw / math.sqrt(n)


def sample_matrix(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw M = n^{-1/2} W or M = n^{-1} X^T X; exactly symmetric."""
    raw = sample_raw(spec, rng)
    if spec.truncate_tau is not None:
        raw = truncate_matrix(raw, spec.n, spec.truncate_tau)
    return matrix_from_raw(spec, raw)


def truncate_matrix(raw: np.ndarray, n: int, tau: float) -> np.ndarray:
    """Cap every entry at tau*sqrt(n) in absolute value, keeping its sign."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    cap = tau * math.sqrt(n)
    raw = np.asarray(raw, dtype=float)
    return np.where(np.abs(raw) > cap, np.sign(raw) * cap, raw)
