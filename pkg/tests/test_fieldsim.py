import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_array_equal
from scipy import integrate, stats

from sojourn.covariance import bessel, cauchy, evaluate, sqexp
from sojourn.fieldsim import (EmbeddingNotPD, LatticeField, LatticeSpec, ShapeError,
                              VectorFieldSpec, circulant_embedding, f_cdf, f_pdf,
                              fisher_snedecor_field, read_field, simulate_gaussian,
                              simulate_vector, spectral_synthesis, stream, write_field,
                              write_field_csv)
from sojourn.specialfuns import DomainError, hermite


def lag_products(values, lag):
    """Per-realization mean of eta(x) eta(x + lag e) over both axis directions."""
    a = values[:-lag, :] * values[lag:, :]
    b = values[:, :-lag] * values[:, lag:]
    return 0.5 * (a.mean() + b.mean())


def mc_lag_covariance(spec, model, lag, reps, seed=11):
    est = np.array([lag_products(simulate_gaussian(spec, model, seed, key=(i,)).values, lag)
                    for i in range(reps)])
    return est.mean(), est.std(ddof=1) / math.sqrt(reps)


def test_stream_keys():
    a = stream(5, 1, 2).standard_normal(4)
    assert_array_equal(a, stream(5, 1, 2).standard_normal(4))
    assert not np.array_equal(a, stream(5, 2, 1).standard_normal(4))
    assert not np.array_equal(a, stream(5, 1).standard_normal(4))


def test_lattice_spec():
    spec = LatticeSpec(4, 6, 0.5)
    assert spec.shape == (4, 6)
    assert spec.window_area == pytest.approx(6.0)
    with pytest.raises(DomainError):
        LatticeSpec(1, 4)
    with pytest.raises(DomainError):
        LatticeSpec(4, 4, 0.0)


@pytest.mark.parametrize("model", [cauchy(0.65), bessel(0.0), sqexp()])
def test_unit_variance_at_a_point(model):
    spec = LatticeSpec(16, 16)
    vals = np.array([simulate_gaussian(spec, model, 3, key=(i,)).values[5, 9]
                     for i in range(10_000)])
    assert np.all(np.isfinite(vals))
    assert vals.var() == pytest.approx(1.0, abs=0.05)


def test_sqexp_lag_one_covariance():
    mean, se = mc_lag_covariance(LatticeSpec(64, 64, 0.5), sqexp(), 1, 500)
    assert abs(mean - math.exp(-0.25)) < 3 * se


def test_cauchy_lag_five_covariance():
    mean, se = mc_lag_covariance(LatticeSpec(64, 64), cauchy(0.65), 5, 500)
    assert abs(mean - 26 ** -0.325) < 3 * se


@pytest.mark.parametrize("model", [cauchy(0.5), cauchy(0.65), cauchy(0.9)])
def test_embedding_reproduces_covariance(model):
    emb = circulant_embedding(LatticeSpec(64, 64), model)
    assert emb.n_clipped == 0
    assert np.max(np.abs(emb.reconstructed_covariance() - emb.target_covariance())) <= 1e-8


def test_embedding_doubles_when_needed():
    emb = circulant_embedding(LatticeSpec(16, 16), cauchy(0.5))
    assert emb.embed_shape[0] > 30
    assert emb.min_eigen_ratio >= -1e-6


@pytest.mark.parametrize("nu", [0.0, 0.25, 0.45])
def test_spectral_synthesis_reproduces_covariance(nu):
    syn = spectral_synthesis(LatticeSpec(48, 40, 1.5), bessel(nu))
    assert syn.max_cov_error() <= 1e-8


def test_small_grid_embedding_failure():
    # a window of 4 x 4 physical units is short against Cauchy(0.65) correlations:
    # the periodic wrap stays indefinite through all doublings
    with pytest.raises(EmbeddingNotPD):
        simulate_gaussian(LatticeSpec(16, 16, 0.25), cauchy(0.65), 0)


def test_bessel_circulant_is_not_pd():
    with pytest.raises(EmbeddingNotPD) as info:
        simulate_gaussian(LatticeSpec(64, 64), bessel(0.0), 0, method="circulant")
    assert info.value.deficit > 1e-6


def test_spectral_rejects_other_models():
    with pytest.raises(DomainError):
        simulate_gaussian(LatticeSpec(8, 8), cauchy(0.5), 0, method="spectral")


def test_bessel_lag_covariance():
    mean, se = mc_lag_covariance(LatticeSpec(64, 64), bessel(0.0), 5, 500)
    assert abs(mean - evaluate(bessel(0.0), 5.0)) < 3 * se


def test_vector_components_independent():
    spec = LatticeSpec(32, 32)
    vspec = VectorFieldSpec((cauchy(0.5),) * 3, 1)
    prods = []
    for i in range(500):
        c = simulate_vector(spec, vspec, 2, realization=i)
        prods.append([(c[0].values * c[1].values).mean(), (c[1].values * c[2].values).mean()])
    prods = np.array(prods)
    se = prods.std(axis=0, ddof=1) / math.sqrt(len(prods))
    assert np.all(np.abs(prods.mean(axis=0)) < 3 * se)


def test_vector_deterministic():
    spec = LatticeSpec(32, 24)
    vspec = VectorFieldSpec((cauchy(0.65), cauchy(0.8), cauchy(0.9)), 1)
    a = simulate_vector(spec, vspec, 99)
    b = simulate_vector(spec, vspec, 99)
    for x, y in zip(a, b):
        assert x.values.tobytes() == y.values.tobytes()
    assert not np.array_equal(a[0].values, a[1].values)


def test_vector_components_follow_their_models():
    spec = LatticeSpec(32, 32)
    vspec = VectorFieldSpec((cauchy(0.65), cauchy(0.8), cauchy(0.9)), 1)
    reps = 400
    est = np.array([[lag_products(c.values, 5) for c in simulate_vector(spec, vspec, 4, realization=i)]
                    for i in range(reps)])
    mean = est.mean(axis=0)
    se = est.std(axis=0, ddof=1) / math.sqrt(reps)
    target = [evaluate(m, 5.0) for m in vspec.components]
    assert np.all(np.abs(mean - target) < 3 * se)


def test_vector_spec_validation():
    with pytest.raises(DomainError):
        VectorFieldSpec((cauchy(0.5),), 1)
    with pytest.raises(DomainError):
        VectorFieldSpec((cauchy(0.5),) * 3, 3)


def _const(spec, value):
    return LatticeField(spec, np.full(spec.shape, float(value)))


def test_fisher_snedecor_arithmetic():
    spec = LatticeSpec(3, 3)
    f = fisher_snedecor_field([_const(spec, 2), _const(spec, 1), _const(spec, 1)], 1)
    assert np.all(f.values == 4.0)
    f = fisher_snedecor_field([_const(spec, 0.7)] * 3, 1)
    assert np.allclose(f.values, 1.0)


def test_fisher_snedecor_sentinels():
    spec = LatticeSpec(3, 3)
    f = fisher_snedecor_field([_const(spec, 1), _const(spec, 0), _const(spec, 0)], 1)
    assert np.all(np.isinf(f.values))
    assert f.n_sentinels == 9


def test_fisher_snedecor_shape_mismatch():
    with pytest.raises(ShapeError):
        fisher_snedecor_field([_const(LatticeSpec(3, 3), 1), _const(LatticeSpec(4, 3), 1)], 1)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 4, 5), elements=st.floats(-1e3, 1e3)))
def test_fisher_snedecor_nonnegative(values):
    spec = LatticeSpec(4, 5)
    f = fisher_snedecor_field([LatticeField(spec, v) for v in values], 1)
    assert np.all(f.values >= 0)


def test_f_cdf_examples():
    assert f_cdf(1, 1, 3) == pytest.approx(math.sqrt(1 / 3), abs=1e-12)
    assert f_cdf(0, 2, 5) == 0.0
    assert f_cdf(math.inf, 2, 5) == 1.0


@pytest.mark.parametrize("n, m", [(1, 3), (2, 5), (3, 4), (4, 10)])
def test_f_pdf_normalized_and_consistent(n, m):
    total = integrate.quad(f_pdf, 0, 1, args=(n, m))[0] + integrate.quad(f_pdf, 1, np.inf, args=(n, m))[0]
    assert total == pytest.approx(1.0, abs=1e-8)
    for u in (0.1, 0.5, 1, 2, 5):
        assert integrate.quad(f_pdf, 0, u, args=(n, m), epsabs=1e-13)[0] == pytest.approx(f_cdf(u, n, m), abs=1e-8)
        assert f_pdf(u, n, m) == pytest.approx(stats.f.pdf(u, n, m - n), rel=1e-10)


def test_f_pdf_at_zero():
    assert f_pdf(0, 1, 3) == math.inf
    assert f_pdf(0, 3, 5) == 0.0
    assert f_pdf(0, 2, 5) == pytest.approx(stats.f.pdf(0, 2, 3))


def test_f_domain():
    with pytest.raises(DomainError):
        f_cdf(1.0, 3, 3)
    with pytest.raises(DomainError):
        f_pdf(-1.0, 1, 3)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 50), st.floats(0, 50), st.integers(1, 4), st.integers(1, 6))
def test_f_cdf_monotone(u1, u2, n, k):
    lo, hi = sorted((u1, u2))
    assert 0.0 <= f_cdf(lo, n, n + k) <= f_cdf(hi, n, n + k) <= 1.0


def test_f_field_marginal_ks():
    # squared-exponential components decorrelate within 8 cells, so the thinned values are ~iid
    spec = LatticeSpec(128, 128)
    vspec = VectorFieldSpec((sqexp(),) * 3, 1)
    runs = 40
    crit = 1.628 / math.sqrt(16 * 16)
    passed = 0
    for i in range(runs):
        f = fisher_snedecor_field(simulate_vector(spec, vspec, 21, realization=i), 1)
        x = np.sort(f.values[::8, ::8].ravel())
        cdf = np.array([f_cdf(u, 1, 3) for u in x])
        k = np.arange(1, x.size + 1) / x.size
        d = max(np.max(k - cdf), np.max(cdf - (k - 1 / x.size)))
        passed += d < crit
    assert passed >= 0.95 * runs


@pytest.mark.parametrize("rho", [0.3, 0.6, -0.8])
def test_hermite_moment_identity(rho):
    rng = stream(7, int(abs(rho) * 10))
    n = 400_000
    x = rng.standard_normal(n)
    y = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(n)
    for k in range(4):
        for m in range(4):
            prod = hermite(k, x) * hermite(m, y)
            expected = math.factorial(k) * rho ** k if k == m else 0.0
            assert abs(prod.mean() - expected) <= 3.5 * prod.std() / math.sqrt(n)


def test_field_file_roundtrip(tmp_path):
    spec = LatticeSpec(16, 12, 1.0)
    fld = simulate_gaussian(spec, cauchy(0.65), 42)
    path = tmp_path / "f.bin"
    write_field(path, fld)
    raw = path.read_bytes()
    assert raw[:4] == b"SJLF"
    assert struct.unpack("<II", raw[4:12]) == (16, 12)
    assert len(raw) == 16 + 8 * 16 * 12
    values, meta = read_field(path)
    assert values.tobytes() == fld.values.tobytes()
    assert meta["seed"] == 42 and meta["dx"] == 1.0
    assert meta["model"] == "kind=cauchy alpha=0.65"


def test_field_file_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ValueError):
        read_field(path)


def test_field_csv(tmp_path):
    spec = LatticeSpec(3, 2, 2.0)
    fld = LatticeField(spec, np.arange(6.0).reshape(3, 2))
    path = tmp_path / "f.csv"
    write_field_csv(path, fld)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 7
    assert [float(v) for v in lines[-1].split(",")] == [4.0, 2.0, 5.0]
