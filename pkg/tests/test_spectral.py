import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpnehari.circle import TrigSymbol, diag, poly
from lpnehari.spectral import SpectralFactorError, co_spectral_factor, spectral_factor


def _random_pd(seed, degree=2, floor=0.1):
    rng = np.random.default_rng(seed)
    A = TrigSymbol(rng.standard_normal((degree + 1, 2, 2)) + 1j * rng.standard_normal((degree + 1, 2, 2)), 0)
    return A.H @ A + TrigSymbol.constant(floor * np.eye(2))


def test_scalar_factor_recovers_outer_polynomial():
    # |1 + z/2|^2 = 5/4 + (z + zbar)/2
    Psi = spectral_factor(poly([0.5, 1.25, 0.5], -1))
    assert np.allclose(Psi.window(0, 3).coeffs[:, 0, 0], [1.0, 0.5, 0.0, 0.0], atol=1e-10)


def test_diagonal_factor():
    B = diag(poly([0.5, 1.25, 0.5], -1), 1.0)
    Psi, dg = spectral_factor(B, return_diagnostics=True)
    assert dg.converged and dg.residual < 1e-12
    assert np.allclose(Psi.window(0, 1).coeffs, diag(poly([1.0, 0.5]), 1.0).window(0, 1).coeffs, atol=1e-10)


@given(st.integers(0, 10_000))
@settings(max_examples=10, deadline=None)
def test_factor_is_analytic_outer_and_reproduces(seed):
    B = _random_pd(seed)
    Psi, dg = spectral_factor(B, return_diagnostics=True)
    assert Psi.is_analytic(0.0)
    assert dg.residual < 1e-8
    assert dg.szego_defect < 1e-8              # outer: Jensen equality for det
    P0 = Psi.coeff(0)
    assert abs(P0[0, 1]) < 1e-12 and P0[0, 0].real > 0 and P0[1, 1].real > 0


def test_co_factor_side():
    B = _random_pd(3)
    Q = co_spectral_factor(B)
    N = 256
    Qv = Q.samples(N)
    assert np.max(np.abs(Qv @ np.conj(np.swapaxes(Qv, 1, 2)) - B.samples(N))) < 1e-8


def test_rejects_indefinite_and_non_hermitian():
    with pytest.raises(SpectralFactorError):
        spectral_factor(poly([1.0, 1.0, 1.0], -1))          # 1 + 2 cos: negative at pi
    with pytest.raises(SpectralFactorError):
        spectral_factor(poly([1.0, 3.0], 0))
