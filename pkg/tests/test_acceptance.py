"""Acceptance criteria, each at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import json
import math

import numpy as np
import pytest
from scipy import integrate

from rmtlab import charflow as cf, cli, ensembles, entrydist as ed, laws, montecarlo as mc, spectra, testfns
from rmtlab import variance as var
from rmtlab.ensembles import EnsembleSpec

from oracles import trapezoid_convolution

R = 400
KS_CRIT = 1.63 / math.sqrt(R)


def _run(spec, phi, seed, replicas=R, aspect=None):
    cfg = mc.ExperimentConfig(spec, phi, replicas, (spec.n,), seed, workers=1, aspect=aspect)
    return cfg, mc.run_experiment(cfg).values[spec.n]


def _within(rep, target, k=3.0):
    return abs(rep.sample_variance - target) <= k * rep.variance_se


# 1 ------------------------------------------------------------------------

@pytest.mark.criterion(1)
@pytest.mark.parametrize("label,compute,expected", [
    ("goe lambda", lambda: var.variance_goe(testfns.monomial(1), 1.0).total, 2.0),
    ("goe lambda^2", lambda: var.variance_goe(testfns.monomial(2), 1.0).total, 4.0),
    ("wishart lambda", lambda: var.variance_wishart(testfns.monomial(1), 1.0, 2.0).total, 4.0),
    ("wigner lambda^2", lambda: var.variance_wigner(testfns.monomial(2), 1.0, -1.2).total, 1.6),
    ("sc lambda", lambda: var.variance_sample_covariance(testfns.monomial(1), 1.0, 2.0, -1.2).total, 1.6),
    ("B lambda^2", lambda: var.kappa4_constant_B(testfns.monomial(2), 1.0), -2.0),
])
def test_c1_variance_oracles(label, compute, expected):
    assert abs(compute() - expected) < 1e-8


# 2 ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def goe_lambda2():
    phi = testfns.monomial(2)
    V = var.variance_goe(phi, 1.0)
    reps = []
    for seed in range(20):
        _, vals = _run(EnsembleSpec("GOE", 256), phi, seed)
        reps.append(mc.clt_report(vals, V, n=256))
    return reps


@pytest.mark.criterion(2)
def test_c2_goe_variance(goe_lambda2):
    rep = goe_lambda2[0]
    print(f"GOE lambda^2: var = {rep.sample_variance:.4f} +- {rep.variance_se:.4f} (theory 4)")
    assert _within(rep, 4.0)


@pytest.mark.criterion(2)
def test_c2_goe_ks(goe_lambda2):
    passed = sum(r.ks_statistic < KS_CRIT for r in goe_lambda2)
    print(f"KS below {KS_CRIT:.4f} in {passed}/20 seeds")
    assert passed >= 19


# 3 ------------------------------------------------------------------------

@pytest.mark.criterion(3)
def test_c3_kappa4_shift(goe_lambda2):
    phi = testfns.monomial(2)
    V = var.variance_wigner(phi, 1.0, -1.2)
    assert abs(V.total - 1.6) < 1e-8
    _, vals = _run(EnsembleSpec("Wigner", 256, offdiag=ed.uniform()), phi, 100)
    rep = mc.clt_report(vals, V, n=256)
    goe = goe_lambda2[0]
    print(f"uniform Wigner lambda^2: var = {rep.sample_variance:.4f} +- {rep.variance_se:.4f} (theory 1.6)")
    assert _within(rep, 1.6)
    assert rep.sample_variance + 3 * rep.variance_se < goe.sample_variance - 3 * goe.variance_se


@pytest.mark.criterion(3)
def test_c3_rademacher_degenerate():
    phi = testfns.monomial(2)
    spec = EnsembleSpec("Wigner", 256, offdiag=ed.rademacher(), diag=ed.rademacher(math.sqrt(2)))
    _, vals = _run(spec, phi, 200)
    rep = mc.clt_report(vals, var.variance_wigner(phi, 1.0, -2.0), n=256)
    print(f"Rademacher lambda^2 sample variance = {rep.sample_variance:.3e}")
    assert rep.sample_variance < 1e-20 and rep.degenerate


# 4 ------------------------------------------------------------------------

@pytest.mark.criterion(4)
@pytest.mark.parametrize("family,entry,kappa4,target", [
    ("SampleCovariance", ed.uniform(), -1.2, 1.6),
    ("Wishart", None, 0.0, 4.0),
])
def test_c4_sample_covariance(family, entry, kappa4, target):
    phi = testfns.monomial(1)
    V = var.theory_variance(family, phi, a2=1.0, c=2.0, kappa4=kappa4)
    assert abs(V.total - target) < 1e-8
    spec = EnsembleSpec(family, 256, m=512, entry=entry)
    _, vals = _run(spec, phi, 300, aspect=2.0)
    rep = mc.clt_report(vals, V, n=256)
    print(f"{family} lambda: var = {rep.sample_variance:.4f} +- {rep.variance_se:.4f} (theory {target})")
    assert _within(rep, target)


# 5 ------------------------------------------------------------------------

def _l1_to_law(law, sample, bins=60):
    lo, hi = law.edges
    edges = np.linspace(lo, hi, bins + 1)
    ext = edges.copy()
    ext[0], ext[-1] = -np.inf, np.inf
    emp = spectra.empirical_measure(sample, ext)
    theo = np.array([integrate.quad(lambda x: laws.density(law, x), a, b)[0] for a, b in zip(edges[:-1], edges[1:])])
    return float(np.abs(emp - theo).sum())


@pytest.mark.criterion(5)
@pytest.mark.parametrize("spec,law", [
    (EnsembleSpec("GOE", 2048), laws.semicircle(1.0)),
    (EnsembleSpec("Wishart", 2048, m=4096), laws.marchenko_pastur(1.0, 2.0)),
], ids=["semicircle", "marchenko-pastur"])
def test_c5_histogram(spec, law):
    m = ensembles.sample_matrix(spec, mc.replica_rng(5, spec.n, 0))
    d = _l1_to_law(law, spectra.spectrum(m, spec))
    print(f"{law.kind}: L1 = {d:.4f}")
    assert d < 0.05


@pytest.mark.criterion(5)
def test_c5_stieltjes_mean():
    spec = EnsembleSpec("GOE", 2048)
    g = [spectra.stieltjes_empirical(spectra.spectrum(ensembles.sample_matrix(spec, mc.replica_rng(6, 2048, r))), 1j)
         for r in range(50)]
    mean = complex(np.mean(g))
    print(f"mean g_n(i) = {mean:.5f}")
    assert abs(mean - 0.61803j) < 0.02


# 6 ------------------------------------------------------------------------

@pytest.mark.criterion(6)
@pytest.mark.parametrize("law", [laws.semicircle(1.0), laws.semicircle(0.49), laws.marchenko_pastur(1.0, 2.0),
                                 laws.marchenko_pastur(1.7, 1.0), laws.marchenko_pastur(0.6, 4.0)], ids=str)
def test_c6_residuals(law):
    rng = np.random.default_rng(66)
    re = rng.uniform(-4, 8, 100)
    im = rng.choice([-1, 1], 100) * rng.uniform(0.1, 4, 100)
    res = np.abs(laws.self_consistency_residual(law, re + 1j * im))
    assert res.max() < 1e-12


# 7 ------------------------------------------------------------------------

@pytest.mark.criterion(7)
@pytest.mark.parametrize("w", [0.5, 1.0, 1.5])
def test_c7_bessel(w):
    t = np.linspace(0, 10, 1001)
    sc = laws.semicircle(w * w)
    from scipy import special

    ref_v = np.where(t == 0, 1.0, special.j1(2 * w * t) / np.where(t == 0, 1, w * t))
    assert np.max(np.abs(laws.v_kernel(sc, t) - ref_v)) < 1e-9
    assert np.max(np.abs(laws.resolvent_kernel_T1_quadrature(t, w) + special.j0(2 * w * t))) < 1e-9
    assert np.max(np.abs(laws.resolvent_kernel_T1(t, w) + special.j0(2 * w * t))) < 1e-9


@pytest.mark.criterion(7)
def test_c7_vconv():
    v = lambda s: laws.v_semicircle_bessel(s, 1.0)
    t = np.linspace(0.25, 10, 40)
    ref = np.array([trapezoid_convolution(v, v, tk, 5e-5) for tk in t])
    assert np.max(np.abs(laws.vconv_kernel(t, 1.0) - ref)) < 1e-6


# 8 ------------------------------------------------------------------------

@pytest.mark.criterion(8)
def test_c8_volterra_vs_closed_form():
    phi = testfns.poisson(0.0, 1.0)
    y = cf.semicircle_Y_volterra(1.0, phi, 1.0, 1.0, 1 / 200, 5.0)
    d = np.max(np.abs(y.values - cf.closed_form_Y(1.0, y.t, phi, 1.0, 1.0)))
    print(f"sup |volterra - closed| = {d:.2e}")
    assert d < 1e-3


def _sin_error(h, q=4.0):
    Q1 = cf.GridFunction.sample(lambda t: q * np.ones_like(t), h, 5.0)
    p = cf.solve_volterra(Q1, cf.GridFunction.sample(lambda t: t, h, 5.0))
    return np.max(np.abs(p.values - np.sin(math.sqrt(q) * p.t) / math.sqrt(q)))


@pytest.mark.criterion(8)
def test_c8_sin_oracle():
    assert _sin_error(1e-3) < 1e-4


@pytest.mark.criterion(8)
def test_c8_second_order():
    errs = [_sin_error(h) for h in (0.04, 0.02, 0.01, 0.005)]
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    print("observed orders:", ", ".join(f"{r:.3f}" for r in rates))
    assert all(abs(r - 2) < 0.1 for r in rates)


# 9 ------------------------------------------------------------------------

@pytest.mark.criterion(9)
def test_c9_gaussian_sin():
    chk = ed.verify_decoupling(ed.gaussian(), ed.sin_derivatives(3), 1, 10**6, np.random.default_rng(9))
    xi = ed.sample_entries(ed.gaussian(), np.random.default_rng(9), 10**6)
    se = np.std(xi * np.sin(xi), ddof=1) / 1e3
    assert abs(chk.lhs - math.exp(-0.5)) < 3 * se
    assert chk.gap < 3 * chk.stderr + 1e-15


@pytest.mark.criterion(9)
@pytest.mark.parametrize("dist", [ed.uniform(), ed.rademacher(), ed.table([-1.0, 2.0], [2 / 3, 1 / 3])],
                         ids=lambda d: d.kind)
def test_c9_polynomial_exact(dist):
    chk = ed.verify_decoupling(dist, ed.polynomial_derivatives([0.2, -1.0, 0.5, 0.7], 5), 3, 10**5,
                               np.random.default_rng(10))
    assert chk.gap < 3 * chk.stderr + 1e-12


@pytest.mark.criterion(9)
def test_c9_rademacher_bound():
    chk = ed.verify_decoupling(ed.rademacher(), ed.sin_derivatives(4), 2, 10**5, np.random.default_rng(11))
    assert chk.gap <= chk.bound + 3 * chk.stderr


# 10 -----------------------------------------------------------------------

@pytest.mark.criterion(10)
@pytest.mark.parametrize("family", ["GOE", "Wishart"])
@pytest.mark.parametrize("n", [64, 128, 256])
def test_c10_apriori_bounds(family, n):
    phi = testfns.poisson(0.0, 1.0) if family == "GOE" else testfns.poisson(3.0, 1.0)
    spec = EnsembleSpec(family, n, m=2 * n if family == "Wishart" else None)
    V = var.theory_variance(family, phi, c=2.0)
    _, vals = _run(spec, phi, 1000 + n, aspect=2.0 if family == "Wishart" else None)
    rep = mc.clt_report(vals, V, n=n)
    chk = mc.apriori_bound_check(rep, phi, spec)
    assert chk.applicable and chk.holds


# 11 -----------------------------------------------------------------------

@pytest.mark.criterion(11)
def test_c11_worker_invariance(tmp_path):
    doc = {"ensemble": {"family": "Wigner", "n": 48, "offdiag": {"kind": "uniform"}},
           "test_function": {"name": "poisson", "E": 0.2, "eta": 0.5}, "replicas": 60, "seed": 2024,
           "n_grid": [16, 48]}
    cfgp = tmp_path / "c.json"
    cfgp.write_text(json.dumps(doc))
    outs = []
    for w in (1, 4, 8):
        out = tmp_path / f"w{w}"
        assert cli.main(["simulate", "--config", str(cfgp), "--out", str(out), "--workers", str(w)]) == 0
        outs.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    assert outs[0] == outs[1] == outs[2]
