"""Matrix spectral factorization ``B = Psi^* Psi`` by Bauer's method."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .circle import CircleGrid, TrigSymbol

LOGGER = logging.getLogger(__name__)


class SpectralFactorError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralFactorDiagnostics:
    blocks: int
    change: float
    residual: float
    min_eig: float
    szego_defect: float
    converged: bool


def _block_toeplitz(B: TrigSymbol, L: int) -> np.ndarray:
    # T[i, j] = B_{j - i}
    n = B.rows
    C = B.window(-(L - 1), L - 1).coeffs          # frequency -(L-1) + r in row r
    idx = np.arange(L)[None, :] - np.arange(L)[:, None] + (L - 1)
    return C[idx].transpose(0, 2, 1, 3).reshape(L * n, L * n)


def _bauer_coeffs(B: TrigSymbol, L: int) -> np.ndarray:
    n = B.rows
    T = _block_toeplitz(B, L)
    T = 0.5 * (T + T.conj().T)
    try:
        C = np.linalg.cholesky(T)
    except np.linalg.LinAlgError as exc:
        raise SpectralFactorError("block Toeplitz section is not positive definite") from exc
    last = C[(L - 1) * n:, :]
    P = np.empty((L, n, n), dtype=complex)
    for k in range(L):
        P[k] = last[:, (L - 1 - k) * n:(L - k) * n].conj().T
    return P


def _lower_normalize(P: np.ndarray) -> np.ndarray:
    """Left-multiply by a constant unitary so that P[0] is lower triangular
    with positive diagonal."""
    n = P.shape[1]
    J = np.eye(n)[::-1]
    Qf, R = np.linalg.qr(J @ P[0] @ J)
    ph = np.diag(R) / np.where(np.abs(np.diag(R)) > 0, np.abs(np.diag(R)), 1.0)
    Qf = Qf * ph[None, :]
    Vstar = J @ Qf @ J
    return np.einsum("ij,kjl->kil", Vstar.conj().T, P)


def spectral_factor(B: TrigSymbol, tol: float = 1e-10, max_size: int = 4096,
                    grid: CircleGrid | None = None, return_diagnostics: bool = False,
                    degree: int | None = None):
    """Outer ``Psi`` with ``Psi^* Psi = B`` for a pointwise positive definite
    Hermitian trigonometric polynomial ``B``.

    The block Toeplitz section is doubled until successive factors change by
    at most ``tol`` (or its dimension would exceed ``max_size``).  ``Psi(0)`` is
    normalized to be lower triangular with positive diagonal.
    """
    if B.rows != B.cols:
        raise SpectralFactorError("B must be square")
    n = B.rows
    d = max(-B.kmin, B.kmax, 0)
    grid = grid or CircleGrid.at_least(max(8 * d + 8, 256))
    vals = B.samples(grid.N)
    herm = float(np.max(np.abs(vals - np.conj(np.swapaxes(vals, 1, 2)))))
    if herm > 1e-8 * max(1.0, float(np.max(np.abs(vals)))):
        raise SpectralFactorError(f"B is not Hermitian on the circle (defect {herm:.2e})")
    eig = np.linalg.eigvalsh(0.5 * (vals + np.conj(np.swapaxes(vals, 1, 2))))
    min_eig = float(np.min(eig))
    if min_eig <= 0:
        raise SpectralFactorError(f"B is not positive definite on the grid (min eigenvalue {min_eig:.3e})")

    L = max(2 * d + 2, 16)
    prev = None
    change = math.inf
    converged = False
    while True:
        P = _bauer_coeffs(B, L)
        if prev is not None:
            K = prev.shape[0]
            change = float(np.max(np.abs(P[:K] - prev)) + np.max(np.abs(P[K:]), initial=0.0))
            if change <= tol:
                converged = True
                break
        if 2 * L * n > max_size:
            break
        prev = P
        L *= 2
    if not converged:
        LOGGER.warning("Bauer iteration stopped at %d blocks with change %.2e; "
                       "increase max_size or the degree of B", L, change)
    P = _lower_normalize(P)
    mags = np.max(np.abs(P), axis=(1, 2))
    keep = int(np.nonzero(mags > 1e-15 * max(mags[0], 1e-300))[0][-1]) + 1
    if degree is not None:
        keep = min(keep, degree + 1)
    Psi = TrigSymbol(P[:keep], 0)
    if grid.N < 2 * keep:
        grid = CircleGrid.at_least(4 * keep)
    pv = Psi.samples(grid.N)
    res = float(np.max(np.abs(np.conj(np.swapaxes(pv, 1, 2)) @ pv - B.samples(grid.N))))
    object.__setattr__(Psi, "truncation", res)
    # Szego: mean log|det Psi| == log|det Psi(0)| for outer Psi
    szego = abs(float(np.mean(np.log(np.abs(np.linalg.det(pv))))) -
                math.log(abs(np.linalg.det(P[0]))))
    diag = SpectralFactorDiagnostics(L, change, res, min_eig, szego, converged)
    if not converged and res > 1e-6:
        raise SpectralFactorError(f"Bauer iteration did not converge (residual {res:.2e}); "
                                  "try a larger max_size")
    if return_diagnostics:
        return Psi, diag
    return Psi


def co_spectral_factor(M: TrigSymbol, **kw):
    """Analytic ``Q`` with ``Q Q^* = M`` (factor the transpose, transpose back)."""
    out = spectral_factor(M.T, **kw)
    if kw.get("return_diagnostics"):
        P, d = out
        return P.T, d
    return out.T
