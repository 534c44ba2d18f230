import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lpnehari.circle import (AliasingError, BlaschkeError, CircleGrid, ExponentTriple, NormSpec,
                             OuterDomainError, SymbolSchemaError, TrigSymbol, blaschke, diag,
                             lebesgue_norm, lp_norm, outer_from_modulus, outer_log, outer_power,
                             pointwise_norm, poly, riesz_project, singular_values, svd_batch,
                             symbol_from_json, synthesize, z)

complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def symbols(max_rows=3, max_cols=3, max_len=9):
    @st.composite
    def build(draw):
        m = draw(st.integers(1, max_rows))
        n = draw(st.integers(1, max_cols))
        K = draw(st.integers(1, max_len))
        kmin = draw(st.integers(-6, 6))
        c = draw(arrays(complex, (K, m, n), elements=complex_entries))
        return TrigSymbol(c, kmin)
    return build()


# -- exponents ---------------------------------------------------------------

@given(st.floats(2.0, 1e6, allow_nan=False))
def test_exponent_relation(p):
    ex = ExponentTriple(p)
    if p == 2.0:
        assert math.isinf(ex.q)
        with pytest.raises(ValueError):
            ex.q_finite
    else:
        assert abs(1 / p + 1 / ex.q - 0.5) < 1e-12
    assert abs(1 / p + 1 / ex.p_prime - 1) < 1e-12


@pytest.mark.parametrize("p", [1.5, 1.999, math.inf, float("nan")])
def test_exponent_rejects_out_of_range(p):
    with pytest.raises(ValueError):
        ExponentTriple(p)


def test_p4_triple():
    ex = ExponentTriple(4.0)
    assert ex.q == 4.0 and abs(ex.p_prime - 4 / 3) < 1e-15


# -- grid ----------------------------------------------------------------

def test_grid_requires_power_of_two():
    with pytest.raises(ValueError):
        CircleGrid(100)
    assert CircleGrid.at_least(100).N == 128
    g = CircleGrid(8)
    assert np.allclose(g.nodes ** 8, 1)
    assert abs(np.sum(g.weights) - 1) < 1e-15


# -- symbols ---------------------------------------------------------------

@given(symbols())
def test_json_round_trip(S):
    back = TrigSymbol.from_json_dict(json.loads(json.dumps(S.to_json_dict())))
    assert back.shape == S.shape
    lo, hi = min(S.kmin, back.kmin), max(S.kmax, back.kmax)
    assert np.array_equal(back.window(lo, hi).coeffs, S.window(lo, hi).coeffs)


@pytest.mark.parametrize("doc, path", [
    ({"rows": 1, "cols": 1}, "$.entries"),
    ({"rows": 1, "cols": 1, "entries": [[{"coeffs": [[0.5, 1, 0]]}]]}, "$.entries[0][0].coeffs[0]"),
    ({"rows": 1, "cols": 2, "entries": [[{"coeffs": []}]]}, "$.entries[0]"),
    ({"rows": 1, "cols": 1, "entries": [[{"coeffs": [[0, "1", 0]]}]]}, "$.entries[0][0].coeffs[0]"),
    ({"rows": 0, "cols": 1, "entries": []}, "$.rows"),
])
def test_schema_errors_name_the_path(doc, path):
    with pytest.raises(SymbolSchemaError) as info:
        symbol_from_json(doc)
    assert info.value.path == path


@given(symbols(2, 2, 6), st.floats(0.0, 2 * math.pi))
def test_samples_match_direct_evaluation(S, theta):
    zeta = np.exp(1j * theta)
    direct = sum(S.coeff(k) * zeta ** k for k in range(S.kmin, S.kmax + 1))
    assert np.allclose(S(np.array([zeta]))[0], direct, atol=1e-9 * (1 + np.max(np.abs(S.coeffs))))


@st.composite
def conformable_pair(draw):
    m, n, r = (draw(st.integers(1, 3)) for _ in range(3))
    ka, kb = draw(st.integers(1, 5)), draw(st.integers(1, 5))
    A = draw(arrays(complex, (ka, m, n), elements=complex_entries))
    B = draw(arrays(complex, (kb, n, r), elements=complex_entries))
    return TrigSymbol(A, draw(st.integers(-4, 4))), TrigSymbol(B, draw(st.integers(-4, 4)))


@given(conformable_pair())
@settings(max_examples=50)
def test_product_is_coefficient_convolution(pair):
    A, B = pair
    C = A @ B
    for k in range(C.kmin, C.kmax + 1):
        ref = sum(A.coeff(i) @ B.coeff(k - i) for i in range(A.kmin, A.kmax + 1))
        assert np.allclose(C.coeff(k), ref, atol=1e-9 * (1 + np.max(np.abs(C.coeffs))))


def test_from_samples_aliasing_guard():
    with pytest.raises(AliasingError):
        TrigSymbol.from_samples(np.zeros(8), -4, 4)
    with pytest.raises(AliasingError):
        synthesize(poly([1, 2, 3], -2), CircleGrid(4))


def test_from_samples_records_truncation():
    S = poly([1.0, 0.0, 0.25], -1)
    full = TrigSymbol.from_samples(S.samples(64), -1, 1)
    assert full.truncation < 1e-15
    cut = TrigSymbol.from_samples(S.samples(64), -1, 0)
    assert abs(cut.truncation - 0.25) < 1e-12


def test_adjoint_and_transpose():
    S = TrigSymbol(np.arange(12).reshape(2, 2, 3) * (1 + 1j), -1)
    N = 32
    assert np.allclose(S.H.samples(N), np.conj(np.swapaxes(S.samples(N), 1, 2)))
    assert np.allclose(S.T.samples(N), np.swapaxes(S.samples(N), 1, 2))
    assert np.allclose(S.conj().samples(N), np.conj(S.samples(N)))


# -- projections ------------------------------------------------------------

@given(symbols())
def test_riesz_split_exact(S):
    plus, minus = riesz_project(S, "plus"), riesz_project(S, "minus")
    lo, hi = min(S.kmin, -1), max(S.kmax, 0)
    assert np.array_equal((plus + minus).window(lo, hi).coeffs, S.window(lo, hi).coeffs)
    assert np.array_equal(riesz_project(plus, "plus").coeffs, plus.coeffs)
    assert riesz_project(minus, "plus").is_zero(0.0)
    assert plus.is_analytic(0.0)


@given(arrays(complex, 16, elements=complex_entries))
def test_parseval(c):
    S = TrigSymbol(c, -7)
    lhs = float(np.mean(np.abs(S.samples(64)[:, 0, 0]) ** 2))
    rhs = float(np.sum(np.abs(c) ** 2))
    assert abs(lhs - rhs) <= 1e-12 * max(rhs, 1.0)


# -- pointwise linear algebra ------------------------------------------------

@given(arrays(complex, (5, 2, 2), elements=complex_entries))
def test_closed_form_svd_matches_lapack(M):
    U, s, Vh = svd_batch(M)
    s_ref = np.linalg.svd(M, compute_uv=False)
    assert np.allclose(s, s_ref, atol=1e-9 * (1 + np.max(np.abs(M))))
    assert np.allclose(U * s[:, None, :] @ Vh, M, atol=1e-8 * (1 + np.max(np.abs(M))))


def test_svd_rank_deficient_and_vector():
    M = np.array([[[1.0, 2.0], [2.0, 4.0]], [[0.0, 0.0], [0.0, 0.0]]], dtype=complex)
    s = singular_values(M)
    assert np.allclose(s[0], [5.0, 0.0], atol=1e-12) and np.allclose(s[1], 0)
    col = np.array([[[3.0], [4.0j]]])
    assert np.allclose(singular_values(col), [[5.0]])


def test_pointwise_norms():
    M = np.array([[[3.0, 0.0], [0.0, 4.0]]], dtype=complex)
    assert pointwise_norm(M, "operator")[0] == pytest.approx(4.0)
    assert pointwise_norm(M, "schatten", 1.0)[0] == pytest.approx(7.0)
    assert pointwise_norm(M, "schatten", 2.0)[0] == pytest.approx(5.0)
    with pytest.raises(ValueError):
        NormSpec("frobenius")


def test_lp_norm_of_monomial_and_scalar():
    assert lp_norm(z(-3), 4.0) == pytest.approx(1.0)
    # |1 + z/2|^2 = 5/4 + cos: L^2 norm squared 5/4
    assert lp_norm(poly([1.0, 0.5]), 2.0) ** 2 == pytest.approx(1.25, rel=1e-13)
    D = diag(z(-1), 2.0)
    assert lp_norm(D, 6.0) == pytest.approx(2.0)
    assert lebesgue_norm(D, NormSpec("schatten", 1.0, 3.0)) == pytest.approx(3.0)


# -- outer functions and Blaschke products ------------------------------------

def test_outer_from_modulus_recovers_polynomial():
    h = poly([1.0, 0.5])
    N = 256
    w = np.abs(h.samples(N)[:, 0, 0])
    o = outer_from_modulus(w, 16)
    assert np.allclose(o.window(0, 3).coeffs[:, 0, 0], [1.0, 0.5, 0, 0], atol=1e-12)
    assert o.coeff(0)[0, 0].real > 0


def test_outer_log_rejects_inner_zero():
    with pytest.raises(OuterDomainError):
        outer_log(poly([0.5, 1.0]))       # zero at -1/2
    with pytest.raises(OuterDomainError):
        outer_log(poly([1.0, 1.0]))       # zero on the circle


def test_outer_power_square_root():
    h = poly([1.0, 0.5])
    r = outer_power(h, 0.5, degree=64)
    assert np.allclose((r.samples(256) ** 2)[:, 0, 0], h.samples(256)[:, 0, 0], atol=1e-12)


@given(st.lists(st.complex_numbers(max_magnitude=0.7), min_size=1, max_size=3))
@settings(max_examples=25, deadline=None)
def test_blaschke_is_inner(zeros):
    B = blaschke(zeros)
    vals = B.samples(512)[:, 0, 0]
    assert np.max(np.abs(np.abs(vals) - 1)) < 1e-10
    assert B.is_analytic(0.0)
    for a in zeros:
        assert abs(B(np.array([a]))[0, 0, 0]) < 1e-8


def test_blaschke_rejects_outside_zero():
    with pytest.raises(BlaschkeError):
        blaschke([1.2])
