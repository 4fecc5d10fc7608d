"""JSON configuration schemas for the command-line subcommands.

Unknown keys are rejected.  Validation failures are raised as ``ConfigError``
with the dotted path of the offending key.
"""
from __future__ import annotations

import json
import math
import os
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import entrydist, testfns
from .ensembles import EnsembleSpec
from .laws import LimitLaw
from .montecarlo import ExperimentConfig
from .variance import DEFAULT_ORDER

DEFAULT_H = 1 / 200
DEFAULT_T = 20.0


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DistributionModel(_Strict):
    kind: Literal["gaussian", "rademacher", "uniform", "table"]
    variance: float | None = Field(default=None, gt=0)
    scale: float | None = Field(default=None, gt=0)
    halfwidth: float | None = Field(default=None, gt=0)
    values: list[float] | None = None
    probs: list[float] | None = None

    def build(self, variance: float | None) -> entrydist.EntryDistribution:
        return entrydist.from_config(self.model_dump(exclude_none=True), variance)


class EnsembleModel(_Strict):
    family: Literal["GOE", "Wigner", "Wishart", "SampleCovariance"]
    n: int | None = Field(default=None, ge=2)
    m: int | None = Field(default=None, ge=1)
    c: float | None = Field(default=None, gt=0)
    w2: float = Field(default=1.0, gt=0)
    a2: float = Field(default=1.0, gt=0)
    entry: DistributionModel | None = None
    offdiag: DistributionModel | None = None
    diag: DistributionModel | None = None
    truncate_tau: float | None = Field(default=None, gt=0)

    def aspect(self) -> float | None:
        if self.c is not None:
            return self.c
        if self.m is not None and self.n is not None:
            return self.m / self.n
        return None

    def build(self, n: int | None = None) -> EnsembleSpec:
        n = n if n is not None else self.n
        if n is None:
            raise ConfigError("ensemble.n: required")
        m = self.m
        if self.family in ("Wishart", "SampleCovariance"):
            c = self.aspect()
            if c is None:
                raise ConfigError("ensemble.m: covariance families need m or c")
            m = int(round(c * n)) if self.m is None or n != self.n else self.m
        off = self.offdiag
        if self.family == "Wigner" and off is None and self.entry is not None:
            off = self.entry
        try:
            return EnsembleSpec(
                family=self.family, n=n, m=m, w2=self.w2, a2=self.a2,
                offdiag=off.build(self.w2) if off is not None else None,
                diag=self.diag.build(2 * self.w2) if self.diag is not None else None,
                entry=self.entry.build(self.a2) if self.entry is not None and self.family != "Wigner" else None,
                truncate_tau=self.truncate_tau,
            )
        except ValueError as exc:
            raise ConfigError(f"ensemble: {exc}") from None


def build_test_function(spec: dict) -> testfns.TestFunction:
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError("test_function.name: required")
    params = {k: v for k, v in spec.items() if k != "name"}
    try:
        return testfns.builtin(spec["name"], **params)
    except ValueError as exc:
        raise ConfigError(f"test_function: {exc}") from None


class SimulateModel(_Strict):
    ensemble: EnsembleModel
    test_function: dict[str, Any]
    replicas: int = Field(ge=2)
    seed: int = Field(ge=0, lt=2**64)
    n_grid: list[int] | None = None
    workers: int | None = Field(default=None, ge=1)
    order: int = Field(default=DEFAULT_ORDER, ge=16)
    record_t: list[float] = []
    dump_eigenvalues: bool = False
    dump_matrix: bool = False

    @field_validator("n_grid")
    @classmethod
    def _ascending(cls, v):
        if v is not None:
            if not v or any(n < 2 for n in v) or v != sorted(v):
                raise ValueError("must be a non-empty ascending list of integers >= 2")
        return v


class TheoryModel(_Strict):
    ensemble: EnsembleModel
    test_function: dict[str, Any] | None = None
    test_functions: list[dict[str, Any]] | None = None
    kappa4: float | None = None
    order: int = Field(default=DEFAULT_ORDER, ge=16)


class LawModel(_Strict):
    kind: Literal["semicircle", "marchenko-pastur"]
    w2: float = Field(default=1.0, gt=0)
    a2: float = Field(default=1.0, gt=0)
    c: float = Field(default=1.0, gt=0)


class LawsModel(_Strict):
    law: LawModel
    points: int = Field(default=401, ge=2)
    t_max: float = Field(default=10.0, gt=0)
    t_points: int = Field(default=201, ge=2)
    stieltjes_z: list[tuple[float, float]] = []


class VolterraModel(_Strict):
    test_function: dict[str, Any]
    w2: float = Field(default=1.0, gt=0)
    x: float = 1.0
    Z: float | None = None
    h: float = Field(default=DEFAULT_H, gt=0)
    T: float = Field(default=5.0, gt=0)
    kappa4: float = 0.0


MODELS = {
    "simulate": SimulateModel,
    "report": SimulateModel,
    "theory": TheoryModel,
    "laws": LawsModel,
    "volterra": VolterraModel,
}


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def apply_override(doc: dict, assignment: str) -> None:
    """Apply ``a.b.c=value``; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {key!r}: {p} is not an object")
    node[parts[-1]] = value


def parse_config(text: str, kind: str = "simulate", overrides: list[str] = ()) -> BaseModel:
    """Parse and validate a JSON config for the given subcommand."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for ov in overrides:
        apply_override(doc, ov)
    try:
        model = MODELS[kind].model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None
    if kind in ("simulate", "report"):
        ens = model.ensemble
        if ens.n is None and not model.n_grid:
            raise ConfigError("ensemble.n: required (or give n_grid)")
        build_test_function(model.test_function)
        ens.build(ens.n if ens.n is not None else model.n_grid[0])
    elif kind == "theory":
        tfs = theory_test_functions(model)
        if not tfs:
            raise ConfigError("test_function: required")
        ens = model.ensemble
        if ens.family in ("Wishart", "SampleCovariance"):
            c = ens.aspect()
            if c is None:
                raise ConfigError("ensemble.c: covariance families need c (or m and n)")
            if c < 1:
                raise ConfigError(f"ensemble.c: c = {c} < 1; the sample-covariance CLT variance requires m/n -> c >= 1")
    elif kind == "volterra":
        build_test_function(model.test_function)
    return model


def theory_test_functions(model: TheoryModel) -> list[testfns.TestFunction]:
    specs = list(model.test_functions or [])
    if model.test_function is not None:
        specs.insert(0, model.test_function)
    return [build_test_function(s) for s in specs]


def default_workers() -> int:
    env = os.environ.get("RMT_LAB_WORKERS")
    if env:
        try:
            w = int(env)
        except ValueError:
            raise ConfigError(f"RMT_LAB_WORKERS must be an integer, got {env!r}") from None
        if w >= 1:
            return w
    return os.cpu_count() or 1


def experiment_config(model: SimulateModel, workers: int | None = None) -> ExperimentConfig:
    ens = model.ensemble
    n_grid = tuple(model.n_grid) if model.n_grid else (ens.n,)
    spec = ens.build(n_grid[0])
    aspect = ens.aspect() if spec.is_covariance else None
    return ExperimentConfig(
        ensemble=spec,
        test_function=build_test_function(model.test_function),
        replicas=model.replicas,
        n_grid=n_grid,
        base_seed=model.seed,
        workers=workers or model.workers or default_workers(),
        aspect=aspect,
        record_t=tuple(model.record_t),
    )


def limit_law(model: LawModel) -> LimitLaw:
    return LimitLaw(model.kind, w2=model.w2, a2=model.a2, c=model.c)


def theory_parameters(model: TheoryModel) -> dict:
    """Family plus the keyword arguments of ``variance.theory_variance``."""
    ens = model.ensemble
    params: dict = {"w2": ens.w2, "a2": ens.a2}
    if ens.family in ("Wishart", "SampleCovariance"):
        params["c"] = ens.aspect()
    kappa4 = model.kappa4
    if kappa4 is None:
        kappa4 = 0.0
        if ens.family == "Wigner":
            law = ens.offdiag or ens.entry
            if law is None:
                raise ConfigError("ensemble.offdiag: Wigner theory needs an entry law or kappa4")
            kappa4 = law.build(ens.w2).kappa4
        elif ens.family == "SampleCovariance":
            if ens.entry is None:
                raise ConfigError("ensemble.entry: SampleCovariance theory needs an entry law or kappa4")
            kappa4 = ens.entry.build(ens.a2).kappa4
    params["kappa4"] = kappa4
    if not math.isfinite(kappa4):
        raise ConfigError("kappa4 must be finite")
    return params
