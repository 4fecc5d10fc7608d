"""Command-line interface: ``rmtlab {simulate,theory,laws,volterra,report}``.

Exit codes: 0 success, 2 config error, 3 numeric error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import charflow, ensembles, laws, montecarlo, spectra
from .config import (
    ConfigError,
    build_test_function,
    experiment_config,
    limit_law,
    parse_config,
    theory_parameters,
    theory_test_functions,
)
from .outputs import config_hash, read_csv, write_csv, write_json
from .variance import VarianceError, theory_variance

log = logging.getLogger("rmtlab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _resolved(model, drop=("workers",)) -> dict:
    d = model.model_dump(mode="json")
    for k in drop:
        d.pop(k, None)
    return d


def _parts(phi):
    """(label, real test function) pairs; complex statistics are split into Re and Im."""
    if phi.complex_valued:
        return [("re", phi.real_part()), ("im", phi.imag_part())]
    return [("", phi)]


def _part_values(values: np.ndarray, label: str) -> np.ndarray:
    if label == "re":
        return values.real
    if label == "im":
        return values.imag
    return values


def _theory_for(cfg: montecarlo.ExperimentConfig, phi, order: int):
    spec = cfg.ensemble
    kw = dict(w2=spec.w2, a2=spec.a2, kappa4=spec.kappa4 if spec.family in ("Wigner", "SampleCovariance") else 0.0,
              order=order)
    if spec.is_covariance:
        kw["c"] = cfg.aspect
    return theory_variance(spec.family, phi, **kw)


def _reports(cfg, values: dict, order: int):
    rows, summaries = [], []
    for label, part in _parts(cfg.test_function):
        V = _theory_for(cfg, part, order)
        for n in cfg.n_grid:
            rep = montecarlo.clt_report(_part_values(values[n], label), V, n=n)
            bc = montecarlo.apriori_bound_check(rep, part, cfg.spec_for(n))
            rep = montecarlo.CltReport(**{**rep.__dict__, "bound_check": bc})
            d = {"part": label or "value", **rep.as_dict()}
            summaries.append(d)
            rows.append([d["part"], n, rep.replicas, rep.sample_mean, rep.sample_variance, rep.variance_se,
                         V.total, V.gaussian_part, V.kappa4_part, V.est_error, rep.ks_statistic, rep.ks_pvalue,
                         rep.excess_kurtosis, rep.ecf_deviation, rep.degenerate, bc.applicable, bc.bound, bc.holds])
    header = ["part", "n", "replicas", "sample_mean", "sample_variance", "variance_se", "theory_total",
              "theory_gaussian_part", "theory_kappa4_part", "theory_est_error", "ks_statistic", "ks_pvalue",
              "excess_kurtosis", "ecf_deviation", "degenerate", "bound_applicable", "bound", "bound_holds"]
    return header, rows, summaries


def _flags(cfg) -> list[str]:
    phi = cfg.test_function
    flags = []
    if not phi.bounded:
        flags.append(f"{phi.name} is unbounded: outside the literal hypotheses of the limit theorems")
    return flags


def cmd_simulate(args, text: str) -> int:
    model = parse_config(text, "simulate", _overrides(args))
    cfg = experiment_config(model, workers=args.workers)
    resolved = _resolved(model)
    chash = config_hash(resolved)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    log.info("simulating %s, n_grid=%s, R=%d, workers=%d", cfg.ensemble.family, cfg.n_grid, cfg.replicas, cfg.workers)
    result = montecarlo.run_experiment(cfg)

    complex_vals = cfg.test_function.complex_valued
    header = ["n", "replica"] + (["value_re", "value_im"] if complex_vals else ["value"])
    rows = []
    for n in cfg.n_grid:
        for r, v in enumerate(result.values[n]):
            rows.append([n, r, float(v.real), float(v.imag)] if complex_vals else [n, r, float(v)])
    write_csv(out / "replicas.csv", header, rows, chash)

    rheader, rrows, summaries = _reports(cfg, result.values, model.order)
    write_csv(out / "report.csv", rheader, rrows, chash)
    payload = {"reports": summaries, "flags": _flags(cfg)}
    if cfg.record_t:
        payload["trace_exponential_t"] = list(cfg.record_t)
    write_json(out / "summary.json", payload, resolved, chash)

    if model.dump_eigenvalues or model.dump_matrix:
        _dump_debug(cfg, model, out, chash)
    for s in summaries:
        print(f"n={s['n']:>6} {s['part']:>5}  var={s['sample_variance']:.6g} +- {s['variance_se']:.2g}"
              f"  theory={s['theory_total']:.6g}  ks={s['ks_statistic']}")
    return EXIT_OK


def _dump_debug(cfg, model, out: Path, chash: str) -> None:
    for n in cfg.n_grid:
        spec = cfg.spec_for(n)
        if model.dump_eigenvalues:
            rows = []
            for r in range(cfg.replicas):
                m = ensembles.sample_matrix(spec, montecarlo.replica_rng(cfg.base_seed, n, r))
                for i, ev in enumerate(spectra.eigenvalues_symmetric(m)):
                    rows.append([r, i, float(ev)])
            write_csv(out / f"eigenvalues_n{n}.csv", ["replica", "index", "eigenvalue"], rows, chash)
        if model.dump_matrix:
            m = ensembles.sample_matrix(spec, montecarlo.replica_rng(cfg.base_seed, n, 0))
            write_csv(out / f"matrix_n{n}_r0.csv", [f"c{j}" for j in range(n)], m.tolist(), chash)


def _overrides(args) -> list[str]:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return overrides


def cmd_report(args, text: str) -> int:
    model = parse_config(text, "report", _overrides(args))
    cfg = experiment_config(model, workers=1)
    resolved = _resolved(model)
    chash = config_hash(resolved)
    out = Path(args.out)
    header, rows = read_csv(out / "replicas.csv")
    values: dict[int, list] = {}
    for row in rows:
        rec = dict(zip(header, row))
        v = complex(float(rec["value_re"]), float(rec["value_im"])) if "value_re" in rec else float(rec["value"])
        values.setdefault(int(rec["n"]), []).append(v)
    missing = [n for n in cfg.n_grid if n not in values]
    if missing:
        raise ConfigError(f"n_grid: replicas.csv has no values for n = {missing}")
    arrays = {n: np.array(values[n]) for n in cfg.n_grid}
    rheader, rrows, summaries = _reports(cfg, arrays, model.order)
    write_csv(out / "report.csv", rheader, rrows, chash)
    write_json(out / "summary.json", {"reports": summaries, "flags": _flags(cfg)}, resolved, chash)
    return EXIT_OK


def cmd_theory(args, text: str) -> int:
    model = parse_config(text, "theory", list(args.set or []))
    resolved = _resolved(model)
    chash = config_hash(resolved)
    params = theory_parameters(model)
    family = model.ensemble.family
    header = ["formula_tag", "phi", "parameters", "gaussian_part", "kappa4_part", "total", "est_error"]
    rows, results = [], []
    pstr = " ".join(f"{k}={v:g}" for k, v in params.items())
    for phi in theory_test_functions(model):
        for label, part in _parts(phi):
            res = theory_variance(family, part, order=model.order, **params)
            name = f"{label}[{phi.name}]" if label else phi.name
            rows.append([res.formula_tag, name, pstr, res.gaussian_part, res.kappa4_part, res.total, res.est_error])
            results.append({"phi": name, **res.as_dict()})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "theory.csv", header, rows, chash)
    write_json(out / "theory.json", {"parameters": params, "results": results}, resolved, chash)
    for row in rows:
        print("  ".join(str(x) for x in row))
    return EXIT_OK


def cmd_laws(args, text: str) -> int:
    model = parse_config(text, "laws", list(args.set or []))
    resolved = _resolved(model)
    chash = config_hash(resolved)
    law = limit_law(model.law)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    lo, hi = law.edges
    lam = np.linspace(lo, hi, model.points)
    write_csv(out / "laws_density.csv", ["lambda", "density"], zip(lam.tolist(), np.atleast_1d(laws.density(law, lam)).tolist()), chash)

    t = np.linspace(0.0, model.t_max, model.t_points)
    if law.kind == "semicircle":
        w = math.sqrt(law.w2)
        v = laws.v_kernel(law, t)
        vv = laws.vconv_kernel(t, w)
        t1 = laws.resolvent_kernel_T1(t, w)
        header = ["t", "v_re", "v_im", "vconv_re", "vconv_im", "T1"]
        rows = zip(t.tolist(), v.real.tolist(), v.imag.tolist(), vv.real.tolist(), vv.imag.tolist(), t1.tolist())
        write_csv(out / "laws_kernels.csv", header, rows, chash)
    elif law.c >= 1:
        a = math.sqrt(law.a2)
        v = laws.v_kernel(law, t)
        ak = laws.a_kappa4_kernel(t, a, law.c)
        header = ["t", "v_re", "v_im", "a_kappa4_re", "a_kappa4_im"]
        rows = zip(t.tolist(), v.real.tolist(), v.imag.tolist(), ak.real.tolist(), ak.imag.tolist())
        write_csv(out / "laws_kernels.csv", header, rows, chash)

    if model.stieltjes_z:
        rows = []
        for re, im in model.stieltjes_z:
            z = complex(re, im)
            f = laws.stieltjes_limit(law, z)
            rows.append([re, im, f.real, f.imag, abs(laws.self_consistency_residual(law, z, f))])
        write_csv(out / "laws_stieltjes.csv", ["z_re", "z_im", "f_re", "f_im", "residual"], rows, chash)
    write_json(out / "laws.json", {"edges": [lo, hi], "atom": law.atom}, resolved, chash)
    return EXIT_OK


def cmd_volterra(args, text: str) -> int:
    model = parse_config(text, "volterra", list(args.set or []))
    resolved = _resolved(model)
    chash = config_hash(resolved)
    phi = build_test_function(model.test_function)
    if phi.complex_valued:
        raise ConfigError("test_function: the Volterra check needs a real test function")
    w = math.sqrt(model.w2)
    from .variance import variance_wigner

    V = variance_wigner(phi, w, model.kappa4).total
    Z = model.Z if model.Z is not None else charflow.limiting_Z(model.x, V)[0]
    y = charflow.semicircle_Y_volterra(model.x, phi, w, Z, model.h, model.T, kappa4=model.kappa4)
    closed = np.atleast_1d(charflow.closed_form_Y(model.x, y.t, phi, w, Z))
    if model.kappa4:
        closed = closed + charflow.kappa4_Y_correction(model.x, y.t, phi, w, Z, model.kappa4)
    diff = np.abs(y.values - closed)
    header = ["t", "volterra_re", "volterra_im", "closed_re", "closed_im", "abs_diff"]
    rows = zip(y.t.tolist(), y.values.real.tolist(), y.values.imag.tolist(),
               closed.real.tolist(), closed.imag.tolist(), diff.tolist())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "volterra.csv", header, rows, chash)
    write_json(out / "volterra.json", {"max_abs_diff": float(diff.max()), "Z": Z, "V": V}, resolved, chash)
    print(f"max |Y_volterra - Y_closed| = {diff.max():.3e}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "theory": cmd_theory,
    "laws": cmd_laws,
    "volterra": cmd_volterra,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmtlab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON config file")
        s.add_argument("--out", default="out", help="output directory")
        s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
        s.add_argument("--workers", type=int, default=None)
        s.add_argument("--seed", type=int, default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        return COMMANDS[args.command](args, text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, VarianceError, montecarlo.ReplicaError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
