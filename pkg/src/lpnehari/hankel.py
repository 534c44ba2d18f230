"""
Truncated Hankel operators ``F -> P_-(Phi F)`` acting on n x k matrix
polynomials, and a restarted ascent that searches for their q -> 2 norm.

The input space carries the norm ``||F||_{L^q(S_2)}`` (pointwise
Hilbert-Schmidt norm, then L^q over the circle) and the output space the
norm ``||G||_{L^2(S_2)}``, which by Parseval is the Frobenius norm of the
coefficient table.  k = 1 is the vector Hankel operator; k = n is the
operator on square matrix functions.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .circle import CircleGrid, ExponentTriple, TrigSymbol, lp_mean
from .config import thread_count

LOGGER = logging.getLogger(__name__)

# scale under which Fourier coefficients of a symbol are treated as absent
BAND_TOL = 1e-15


class HankelTruncationError(ValueError):
    """The output window drops part of ``P_-(Phi F)``."""

    def __init__(self, msg: str, lost_mass: float):
        super().__init__(msg)
        self.lost_mass = lost_mass


@dataclass(frozen=True, eq=False)
class HankelOperator:
    """``H_Phi^{k}`` between the windows ``0..M_in`` (input, n x k) and
    ``-M_out..-1`` (output, m x k)."""

    symbol: TrigSymbol
    k: int
    M_in: int
    M_out: int
    exponents: ExponentTriple
    grid: CircleGrid
    matrix: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.symbol.cols

    @property
    def m(self) -> int:
        return self.symbol.rows

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return (self.M_in + 1, self.n, self.k)

    def apply_coeffs(self, X: np.ndarray) -> np.ndarray:
        """Output coefficients, shape ``(M_out, m, k)``; row r-1 is frequency -r."""
        X = np.asarray(X, dtype=complex).reshape(self.input_shape)
        Y = self.matrix @ X.reshape(-1, self.k)
        return Y.reshape(self.M_out, self.m, self.k)

    def apply(self, F: TrigSymbol) -> TrigSymbol:
        if F.shape != (self.n, self.k):
            raise ValueError(f"input must be {self.n}x{self.k}, got {F.shape}")
        if not F.is_analytic() or F.kmax > self.M_in:
            raise ValueError(f"input must be analytic with degree <= {self.M_in}")
        Y = self.apply_coeffs(F.window(0, self.M_in).coeffs)
        return TrigSymbol(Y[::-1], -self.M_out)

    def input_norm(self, X: np.ndarray) -> float:
        X = np.asarray(X, dtype=complex).reshape(self.input_shape)
        return lp_mean(_hs_moduli(X, self.grid.N), self.exponents.q)

    def ratio(self, X: np.ndarray) -> float:
        den = self.input_norm(X)
        if den == 0:
            return 0.0
        return float(np.linalg.norm(self.apply_coeffs(X))) / den


def _hs_moduli(X: np.ndarray, N: int) -> np.ndarray:
    vals = np.fft.ifft(X, n=N, axis=0) * N
    return np.sqrt(np.sum(np.abs(vals) ** 2, axis=(1, 2)))


def hankel_matrix(symbol: TrigSymbol, M_in: int, M_out: int) -> np.ndarray:
    """Block Hankel matrix: block (r-1, s) is the coefficient ``Phi_{-r-s}``."""
    m, n = symbol.shape
    H = np.zeros((M_out, m, M_in + 1, n), dtype=complex)
    for r in range(1, M_out + 1):
        for s in range(M_in + 1):
            H[r - 1, :, s, :] = symbol.coeff(-r - s)
    return H.reshape(M_out * m, (M_in + 1) * n)


def negative_band(symbol: TrigSymbol, tol: float = BAND_TOL) -> int:
    """Largest r with a non-negligible coefficient at frequency -r (0 if none)."""
    scale = max(float(np.max(np.abs(symbol.coeffs))), 1e-300)
    for k in range(symbol.kmin, 0):
        if np.max(np.abs(symbol.coeff(k))) > tol * scale:
            return -k
    return 0


def build_hankel(symbol: TrigSymbol, k: int, M_in: int, M_out: int | None,
                 exponents: ExponentTriple, grid: CircleGrid | None = None) -> HankelOperator:
    """Truncated ``H_Phi^{k}``.

    ``M_out`` defaults to ``M_in + deg(Phi)``.  A window shorter than the
    negative band of the symbol raises :class:`HankelTruncationError` with a
    bound on the dropped coefficient mass per unit input.
    """
    if not 1 <= k <= symbol.cols:
        raise ValueError(f"column count k must lie in [1, {symbol.cols}], got {k}")
    band = negative_band(symbol)
    if M_out is None:
        M_out = max(1, min(M_in + symbol.degree, band if band else 1))
    if M_out < band:
        lost = float(sum(np.linalg.norm(symbol.coeff(j), 2) for j in range(-band, -M_out)))
        raise HankelTruncationError(
            f"output window -{M_out}..-1 is shorter than the antianalytic band -{band}; "
            f"lost mass <= {lost:.3e} per unit input", lost)
    M_out = max(M_out, 1)
    if grid is None:
        grid = CircleGrid.at_least(max(256, 8 * (M_in + 1)))
    H = hankel_matrix(symbol, M_in, M_out)
    return HankelOperator(symbol, k, M_in, M_out, exponents, grid, H)


# ---------------------------------------------------------------------------
# norm search
# ---------------------------------------------------------------------------

@dataclass
class NormSearchReport:
    best_value: float
    witness: TrigSymbol
    restart_values: list[float]
    seeds: list[int]
    plateau_spread: float
    rank_profile: np.ndarray
    converged: bool
    k: int
    M_in: int
    status: str = "ok"
    restart_ranks: list[int] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "restart_values": list(map(float, self.restart_values)),
            "seeds": list(map(int, self.seeds)),
            "plateau_spread": self.plateau_spread,
            "modal_rank": maximizing_rank_profile(self),
            "restart_ranks": list(map(int, self.restart_ranks)),
            "k": self.k,
            "M_in": self.M_in,
            "status": self.status,
            "witness": self.witness.to_json_dict(),
        }


def _pack(X: np.ndarray) -> np.ndarray:
    return np.concatenate([X.real.ravel(), X.imag.ravel()])


def _unpack(x: np.ndarray, shape) -> np.ndarray:
    h = x.size // 2
    return (x[:h] + 1j * x[h:]).reshape(shape)


def _objective(op: HankelOperator, q_eff: float):
    HhH = op.matrix.conj().T @ op.matrix
    shape = op.input_shape
    N = op.grid.N

    def fun(x):
        X = _unpack(x, shape)
        Xm = X.reshape(-1, op.k)
        g_num = HhH @ Xm
        num = float(np.real(np.vdot(Xm, g_num)))
        vals = np.fft.ifft(X, n=N, axis=0) * N
        rho2 = np.sum(np.abs(vals) ** 2, axis=(1, 2))
        top = float(np.max(rho2))
        if num <= 0 or top == 0:
            return 0.0, np.zeros_like(x)
        w = (rho2 / top) ** (q_eff / 2.0)
        D = float(np.mean(w))
        # f = -log num + (2/q) log D   (D computed relative to top; constant cancels in gradient)
        f = -math.log(num) + (2.0 / q_eff) * (math.log(D) + (q_eff / 2.0) * math.log(top))
        Gd = (w / rho2.clip(1e-300))[:, None, None] * vals * (q_eff / 2.0) / N / D
        gD = np.fft.fft(Gd, axis=0)[: shape[0]]
        grad = -g_num.reshape(shape) / num + (2.0 / q_eff) * gD
        return f, 2.0 * _pack(grad)

    return fun


def _ascend(op: HankelOperator, X0: np.ndarray, max_iter: int) -> tuple[np.ndarray, bool]:
    q = op.exponents.q
    stages = [q] if math.isfinite(q) else [16.0, 64.0, 256.0]
    X = X0
    ok = True
    for q_eff in stages:
        fun = _objective(op, q_eff)
        res = minimize(fun, _pack(X), jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "maxcor": 30, "ftol": 1e-15, "gtol": 1e-11})
        X = _unpack(res.x, op.input_shape)
        scale = op.input_norm(X)
        if scale > 0:
            X = X / scale
        ok = ok and (res.success or res.nit >= 1)
        if res.nit >= max_iter:
            ok = False
    return X, ok


def _random_start(op: HankelOperator, rng: np.random.Generator) -> np.ndarray:
    shape = op.input_shape
    decay = rng.uniform(0.3, 0.95) ** np.arange(shape[0])
    X = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * decay[:, None, None]
    return X


def hankel_norm_lower_bound(op: HankelOperator, restarts: int = 20, seed: int = 0,
                            max_iter: int = 2000, initial: list[np.ndarray] | None = None,
                            upper_bound: float | None = None,
                            threads: int | None = None) -> NormSearchReport:
    """Restarted ascent on ``||P_-(Phi F)||_{L^2(S_2)} / ||F||_{L^q(S_2)}``.

    Every returned value is the ratio of an explicit witness, hence a lower
    bound for the norm of the truncated operator.  ``initial`` adds warm starts
    (coefficient tables of shape ``(M_in+1, n, k)``) ahead of the random ones.
    """
    shape = op.input_shape
    if not np.any(op.matrix):
        X = np.zeros(shape, dtype=complex)
        X[0, : min(op.n, op.k), : min(op.n, op.k)] = np.eye(min(op.n, op.k))
        wit = TrigSymbol(X, 0)
        return NormSearchReport(0.0, wit, [0.0] * max(restarts, 1), [seed], 0.0,
                                _rank_profile(X, op.grid.N), True, op.k, op.M_in, "ok", [0])

    starts: list[tuple[int, np.ndarray]] = []
    for X0 in initial or []:
        X0 = np.asarray(X0, dtype=complex)
        pad = np.zeros(shape, dtype=complex)
        K = min(shape[0], X0.shape[0])
        pad[:K, : X0.shape[1], : X0.shape[2]] = X0[:K]
        starts.append((-1, pad))
    # constant start: first k coordinate directions
    X = np.zeros(shape, dtype=complex)
    X[0, : min(op.n, op.k), : min(op.n, op.k)] = np.eye(min(op.n, op.k))
    starts.append((-1, X))
    seeds = [seed + i for i in range(max(restarts, 1))]
    for s in seeds:
        starts.append((s, _random_start(op, np.random.default_rng(s))))

    def run(item):
        s, X0 = item
        X, ok = _ascend(op, X0, max_iter)
        return s, X, op.ratio(X), ok

    nthreads = thread_count(threads)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            results = list(ex.map(run, starts))
    else:
        results = [run(it) for it in starts]

    values = [r[2] for r in results]
    best = max(values)
    # tie-break: among near-equal witnesses keep the smallest L^2 norm
    ties = [r for r in results if r[2] >= best - 1e-12]
    _, Xb, vb, _ = min(ties, key=lambda r: float(np.linalg.norm(r[1])))
    conv = all(r[3] for r in results)
    ordered = sorted(values)
    top = ordered[len(ordered) - max(1, len(ordered) // 4):]
    spread = float(max(top) - min(top))
    witness = TrigSymbol(Xb, 0)
    vb = op.ratio(Xb)
    status = "ok" if conv else "plateau not reached"
    if upper_bound is not None and vb > upper_bound * (1 + 1e-10):
        raise AssertionError(f"norm search exceeded the supplied upper bound {upper_bound} ({vb})")
    ranks = [_modal(_rank_profile(r[1], op.grid.N)) for r in results]
    return NormSearchReport(vb, witness, values, [r[0] for r in results], spread,
                            _rank_profile(Xb, op.grid.N), conv, op.k, op.M_in, status, ranks)


def _rank_profile(X: np.ndarray, N: int, rel: float = 1e-6) -> np.ndarray:
    vals = np.fft.ifft(X, n=N, axis=0) * N
    s = np.linalg.svd(vals, compute_uv=False)
    top = np.max(s[:, 0])
    if top == 0:
        return np.zeros(N, dtype=int)
    return np.sum(s > rel * s[:, :1].clip(top * 1e-300), axis=1) * (s[:, 0] > 1e-12 * top)


def _modal(prof: np.ndarray) -> int:
    prof = np.asarray(prof)
    prof = prof[prof > 0] if np.any(prof > 0) else prof
    vals, counts = np.unique(prof, return_counts=True)
    return int(vals[np.argmax(counts)])


def maximizing_rank_profile(report: NormSearchReport, rel: float = 1e-6) -> int:
    """Modal numerical rank of the witness over the grid nodes."""
    prof = np.asarray(report.rank_profile)
    if prof.size == 0:
        prof = _rank_profile(report.witness.coeffs, 256, rel)
    return _modal(prof)


def witness_rank(F: TrigSymbol, N: int = 256, rel: float = 1e-6) -> int:
    """Modal numerical rank of an analytic matrix polynomial on the circle."""
    X = F.window(0, max(F.kmax, 0)).coeffs
    return _modal(_rank_profile(X, max(N, 2 * X.shape[0]), rel))
