import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmtlab import ensembles, spectra, testfns
from rmtlab.ensembles import EnsembleSpec


def test_small_examples():
    assert list(spectra.eigenvalues_symmetric(np.diag([3.0, 1.0, 2.0]))) == [1.0, 2.0, 3.0]
    ev = spectra.eigenvalues_symmetric(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(ev, [-1, 1])


@pytest.mark.parametrize("method", ["lapack", "householder"])
def test_trace_invariants(method):
    a = ensembles.sample_matrix(EnsembleSpec("GOE", 64), np.random.default_rng(11))
    ev = spectra.eigenvalues_symmetric(a, method=method)
    norm = np.abs(ev).max()
    assert abs(ev.sum() - np.trace(a)) <= 1e-10 * 64 * norm
    assert abs((ev**2).sum() - np.trace(a @ a)) <= 1e-9 * 64 * norm**2


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_householder_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n))
    a = (x + x.T) / 2
    ref = np.linalg.eigvalsh(a)
    got = spectra.eigenvalues_symmetric(a, method="householder")
    assert np.allclose(got, ref, atol=1e-10 * (1 + np.abs(ref).max()))


def test_rejects_asymmetric_and_nonfinite():
    with pytest.raises(ValueError):
        spectra.eigenvalues_symmetric(np.array([[0.0, 1.0], [0.5, 0.0]]))
    with pytest.raises(ArithmeticError):
        spectra.eigenvalues_symmetric(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_linear_statistic_basics():
    a = ensembles.sample_matrix(EnsembleSpec("GOE", 32), np.random.default_rng(2))
    s = spectra.spectrum(a)
    assert spectra.linear_statistic(s, testfns.const(1.0)) == pytest.approx(32)
    assert spectra.linear_statistic(s, testfns.monomial(1)) == pytest.approx(np.trace(a), abs=1e-10)


def test_semicircle_second_moment():
    n, R = 512, 200
    spec = EnsembleSpec("GOE", n)
    v = [spectra.linear_statistic(spectra.spectrum(ensembles.sample_matrix(spec, np.random.default_rng(r))),
                                  testfns.monomial(2)) / n for r in range(R)]
    se = np.std(v, ddof=1) / math.sqrt(R)
    # finite-n mean is (1 + 1/n) w^2
    assert abs(np.mean(v) - 1) < 3 * se + 1 / n


def test_trace_exponential():
    s = spectra.spectrum(np.array([[0.7]]))
    assert spectra.trace_exponential(s, 0.0) == 1
    assert abs(spectra.trace_exponential(s, 3.0)) == pytest.approx(1.0)
    a = ensembles.sample_matrix(EnsembleSpec("GOE", 20), np.random.default_rng(0))
    s = spectra.spectrum(a)
    for t in (0.1, 1.0, 10.0):
        assert abs(spectra.trace_exponential(s, t)) <= 20 + 1e-12


def test_stieltjes_empirical():
    s = spectra.spectrum(np.array([[0.0]]))
    assert spectra.stieltjes_empirical(s, 1j) == pytest.approx(1j)
    a = ensembles.sample_matrix(EnsembleSpec("GOE", 40), np.random.default_rng(4))
    assert abs(spectra.stieltjes_empirical(spectra.spectrum(a), 2j)) <= 0.5
    with pytest.raises(ValueError):
        spectra.stieltjes_empirical(s, 1.0)


def test_empirical_measure():
    s = spectra.spectrum(np.diag([-1.0, 1.0]))
    assert np.allclose(spectra.empirical_measure(s, [-np.inf, 0.0, np.inf]), [0.5, 0.5])
    assert np.allclose(spectra.empirical_measure(s, [-5.0, 5.0]), [1.0])
    with pytest.raises(ValueError):
        spectra.empirical_measure(s, [0.0, 5.0])


def test_sample_is_read_only():
    s = spectra.spectrum(np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        s.eigenvalues[0] = 5.0
