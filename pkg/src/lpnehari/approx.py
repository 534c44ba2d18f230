"""
Distance from a matrix symbol to analytic matrix functions in L^p, with
primal-dual certificates, the distance function, and the Hankel-based
respectability, order and gender estimates.

The primal side minimizes ``||Phi - Q||_{L^p}`` (pointwise operator norm)
over analytic polynomials Q.  The dual side maximizes the trace pairing
``Re mean trace(Phi Psi)`` over polynomials Psi with frequencies >= 1,
normalized in ``L^{p'}(S_1)``.  Both sides use the same grid quadrature, so
weak duality holds exactly for the discrete measure.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import minimize

from .circle import CircleGrid, ExponentTriple, TrigSymbol, lp_mean, pointwise_norm, singular_values, svd_batch
from .hankel import build_hankel, hankel_norm_lower_bound, witness_rank, NormSearchReport

LOGGER = logging.getLogger(__name__)


@dataclass
class SolverOptions:
    """Knobs shared by the solvers; defaults are the library defaults."""

    degrees: tuple[int, ...] = (8, 16, 32, 64)
    grid: int | None = None
    restarts: int = 20
    seed: int = 0
    tol_gap: float = 5e-3
    tol_match: float = 1e-2
    max_iter: int = 3000
    schatten_stages: tuple[float, ...] = (8.0, 32.0, 128.0)
    threads: int | None = None

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["degrees"] = list(self.degrees)
        d["schatten_stages"] = list(self.schatten_stages)
        return d


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def solver_grid(Phi: TrigSymbol, degree: int, N: int | None = None) -> CircleGrid:
    """Grid large enough that Phi, the degree-``degree`` unknowns and their
    products do not alias."""
    need = 2 * (Phi.degree + 2 * degree) + 2
    if N is not None:
        if N < need:
            LOGGER.info("grid %d raised to %d to avoid aliasing", N, need)
        return CircleGrid.at_least(max(N, need))
    return CircleGrid.at_least(max(512, need))


def _pack(X):
    return np.concatenate([X.real.ravel(), X.imag.ravel()])


def _unpack(x, shape):
    h = x.size // 2
    return (x[:h] + 1j * x[h:]).reshape(shape)


def _synth(X: np.ndarray, kmin: int, N: int) -> np.ndarray:
    buf = np.zeros((N,) + X.shape[1:], dtype=complex)
    buf[(np.arange(X.shape[0]) + kmin) % N] = X
    return np.fft.ifft(buf, axis=0) * N


def _coeff_grad(G: np.ndarray, kmin: int, K: int) -> np.ndarray:
    """``mean_j G_j zeta_j^{-k}`` for k = kmin .. kmin+K-1."""
    N = G.shape[0]
    F = np.fft.fft(G, axis=0) / N
    return F[(np.arange(K) + kmin) % N]


def _svd(vals):
    return svd_batch(vals)


# ---------------------------------------------------------------------------
# primal
# ---------------------------------------------------------------------------

@dataclass
class PrimalResult:
    value: float
    Q: TrigSymbol
    stages: list[dict] = field(default_factory=list)
    failure: str | None = None


def _primal_value(Phi_vals, Q: np.ndarray, p: float) -> float:
    E = Phi_vals - _synth(Q, 0, Phi_vals.shape[0])
    return lp_mean(pointwise_norm(E, "operator"), p)


def _primal_fun(Phi_vals, p: float, r: float, shape, scale: float):
    N = Phi_vals.shape[0]

    def fun(x):
        Q = _unpack(x, shape)
        E = Phi_vals - _synth(Q, 0, N)
        U, s, Vh = _svd(E)
        if math.isinf(r):
            rho = s[:, 0]
            D = U[:, :, :1] @ Vh[:, :1, :]
        else:
            top = np.max(s, axis=1, keepdims=True).clip(1e-300)
            t = s / top
            rho = top[:, 0] * np.sum(t ** r, axis=1) ** (1.0 / r)
            wts = (t ** (r - 1)) * (top / rho[:, None]) ** (r - 1)
            D = np.einsum("nij,nj,njk->nik", U[:, :, : s.shape[1]], wts, Vh[:, : s.shape[1], :])
        rs = rho / scale
        f = float(np.mean(rs ** p))
        w = p * rs ** (p - 1) / scale
        g = -_coeff_grad(w[:, None, None] * D, 0, shape[0])
        return f, _pack(g)

    return fun


def _subgradient_polish(Phi_vals, Q: np.ndarray, p: float, iters: int = 300) -> np.ndarray:
    N = Phi_vals.shape[0]
    best, bestv = Q, _primal_value(Phi_vals, Q, p)
    cur = Q.copy()
    step0 = 0.1 * max(bestv, 1e-12)
    for it in range(iters):
        E = Phi_vals - _synth(cur, 0, N)
        U, s, Vh = _svd(E)
        rho = s[:, 0]
        val = lp_mean(rho, p)
        if val == 0:
            break
        w = (rho / val) ** (p - 1)
        D = U[:, :, :1] @ Vh[:, :1, :]
        g = -_coeff_grad(w[:, None, None] * D, 0, cur.shape[0])
        gn = float(np.linalg.norm(g))
        if gn == 0:
            break
        cur = cur - step0 / math.sqrt(it + 1) * g / gn
        v = _primal_value(Phi_vals, cur, p)
        if v < bestv:
            best, bestv = cur.copy(), v
    return best


def distance_primal(Phi: TrigSymbol, exponents: ExponentTriple, degree: int,
                    grid: CircleGrid | None = None, opts: SolverOptions | None = None,
                    initial: list[np.ndarray] | None = None) -> PrimalResult:
    """Upper bound ``min_Q ||Phi - Q||_{L^p}`` over analytic Q of degree <= ``degree``.

    Candidates ``Q = 0`` and ``Q = P_+ Phi`` are evaluated first; then staged
    Schatten smoothing (``opts.schatten_stages``) is minimized by L-BFGS,
    followed by the nonsmooth operator-norm objective and a subgradient
    polish.  The best candidate by the true objective is returned.
    """
    opts = opts or SolverOptions()
    p = exponents.p
    degree = max(degree, Phi.kmax, 0)
    grid = grid or solver_grid(Phi, degree, opts.grid)
    Phi_vals = Phi.samples(grid.N)
    m, n = Phi.shape
    shape = (degree + 1, m, n)
    if Phi.is_analytic() and Phi.kmax <= degree:
        Q = Phi.window(0, degree)
        return PrimalResult(_primal_value(Phi_vals, Q.coeffs, p), Q)

    cands = [np.zeros(shape, dtype=complex), Phi.window(0, degree).coeffs.copy()]
    for X in initial or []:
        pad = np.zeros(shape, dtype=complex)
        K = min(shape[0], X.shape[0])
        pad[:K] = X[:K]
        cands.append(pad)
    vals = [_primal_value(Phi_vals, c, p) for c in cands]
    best_i = int(np.argmin(vals))
    best, bestv = cands[best_i], vals[best_i]
    stages = [{"stage": "candidates", "values": vals}]
    failure = None

    scalar = m == 1 or n == 1
    rs = [math.inf] if scalar else list(opts.schatten_stages) + [math.inf]
    X = best
    prev_obj = None
    for r in rs:
        scale = max(bestv, 1e-300)
        fun = _primal_fun(Phi_vals, p, r, shape, scale)
        res = minimize(fun, _pack(X), jac=True, method="L-BFGS-B",
                       options={"maxiter": opts.max_iter, "maxcor": 30, "ftol": 1e-16, "gtol": 1e-12})
        X = _unpack(res.x, shape)
        v = _primal_value(Phi_vals, X, p)
        stages.append({"stage": f"schatten-{r}", "value": v, "iters": int(res.nit)})
        if prev_obj is not None and v > prev_obj * (1 + 1e-6) and v > bestv * (1 + 1e-6):
            failure = f"objective did not decrease at stage {r} ({prev_obj:.6g} -> {v:.6g})"
        prev_obj = v
        if v < bestv:
            best, bestv = X, v
    pol = _subgradient_polish(Phi_vals, best, p)
    v = _primal_value(Phi_vals, pol, p)
    stages.append({"stage": "subgradient", "value": v})
    if v < bestv:
        best, bestv = pol, v
    return PrimalResult(bestv, TrigSymbol(best, 0), stages, failure)


# ---------------------------------------------------------------------------
# dual
# ---------------------------------------------------------------------------

@dataclass
class DualResult:
    value: float
    Psi: TrigSymbol
    pairing: float
    norm: float
    stages: list[dict] = field(default_factory=list)


def trace_pairing(Phi_vals: np.ndarray, Psi_vals: np.ndarray) -> complex:
    return complex(np.mean(np.einsum("nij,nji->n", Phi_vals, Psi_vals)))


def dual_norm(Psi_vals: np.ndarray, exponents: ExponentTriple) -> float:
    """``||Psi||_{L^{p'}(S_1)}`` on the grid."""
    return lp_mean(np.sum(singular_values(Psi_vals), axis=1), exponents.p_prime)


def _dual_fun(Phi_vals, pp: float, eps: float, shape):
    N = Phi_vals.shape[0]
    Phi_h = np.conj(np.swapaxes(Phi_vals, 1, 2))
    gP = _coeff_grad(Phi_h, 1, shape[0])

    def fun(x):
        X = _unpack(x, shape)
        V = _synth(X, 1, N)
        P = float(np.real(np.mean(np.einsum("nij,nji->n", Phi_vals, V))))
        U, s, Vh = _svd(V)
        sig = np.sum(np.sqrt(s ** 2 + eps ** 2) - eps, axis=1)
        top = max(float(np.max(sig)), 1e-300)
        Dn = top * float(np.mean((sig / top) ** pp)) ** (1.0 / pp)
        if Dn <= 0:
            return 0.0, np.zeros_like(x)
        ds = s / np.sqrt(s ** 2 + eps ** 2)
        Gs = np.einsum("nij,nj,njk->nik", U[:, :, : s.shape[1]], ds, Vh[:, : s.shape[1], :])
        c = (sig / Dn) ** (pp - 1)
        gN = _coeff_grad(c[:, None, None] * Gs, 1, shape[0])
        f = -P / Dn
        g = -gP / Dn + P * gN / Dn ** 2
        return f, _pack(g)

    return fun


def distance_dual(Phi: TrigSymbol, exponents: ExponentTriple, degree: int,
                  grid: CircleGrid | None = None, opts: SolverOptions | None = None,
                  initial: list[np.ndarray] | None = None) -> DualResult:
    """Lower bound ``Re mean trace(Phi Psi) / ||Psi||_{L^{p'}(S_1)}`` over Psi
    with frequencies ``1 .. degree``.

    The smoothed trace norm ``sum sqrt(s^2 + eps^2) - eps`` is used during the
    ascent with eps decreasing; the reported value always uses the exact norm
    of the final iterate, so it is a valid lower bound.
    """
    opts = opts or SolverOptions()
    degree = max(degree, 1)
    grid = grid or solver_grid(Phi, degree, opts.grid)
    Phi_vals = Phi.samples(grid.N)
    m, n = Phi.shape
    shape = (degree, n, m)
    minus = Phi.window(min(Phi.kmin, -1), -1)
    if minus.is_zero(1e-14):
        Psi = TrigSymbol(np.zeros(shape, dtype=complex), 1)
        return DualResult(0.0, Psi, 0.0, 0.0)

    starts = []
    # adjoint of the antianalytic part lives on frequencies >= 1
    starts.append(minus.H.window(1, degree).coeffs)
    for X in initial or []:
        pad = np.zeros(shape, dtype=complex)
        K = min(degree, X.shape[0])
        pad[:K] = X[:K]
        starts.append(pad)

    def evaluate(X):
        V = _synth(X, 1, grid.N)
        nrm = dual_norm(V, exponents)
        if nrm == 0:
            return -math.inf, 0.0, 0.0
        P = trace_pairing(Phi_vals, V).real
        return P / nrm, P, nrm

    best, bestv = None, -math.inf
    stages = []
    pp = exponents.p_prime
    for X0 in starts:
        if not np.any(X0):
            continue
        X = X0
        scale = float(np.max(np.abs(X))) or 1.0
        X = X / scale
        for eps in (1e-2, 1e-4, 1e-6, 1e-9):
            fun = _dual_fun(Phi_vals, pp, eps * float(np.max(np.abs(X))), shape)
            res = minimize(fun, _pack(X), jac=True, method="L-BFGS-B",
                           options={"maxiter": opts.max_iter, "maxcor": 30, "ftol": 1e-16, "gtol": 1e-13})
            Xn = _unpack(res.x, shape)
            v = evaluate(Xn)[0]
            stages.append({"eps": eps, "value": v, "iters": int(res.nit)})
            X = Xn / (float(np.max(np.abs(Xn))) or 1.0)
            if v > bestv:
                best, bestv = X, v
    v, P, nrm = evaluate(best)
    Psi = TrigSymbol(best / nrm, 1)
    return DualResult(max(v, 0.0), Psi, P / nrm, 1.0, stages)


def dual_from_primal(Phi: TrigSymbol, Q: TrigSymbol, exponents: ExponentTriple,
                     degree: int, grid: CircleGrid) -> np.ndarray:
    """Pointwise subgradient of ``||Phi - Q||^p`` projected onto frequencies
    ``1 .. degree``; at a minimizer its adjoint is a dual extremal."""
    E = Phi.samples(grid.N) - Q.samples(grid.N)
    U, s, Vh = _svd(E)
    w = s[:, 0] ** (exponents.p - 1)
    G = w[:, None, None] * (U[:, :, :1] @ Vh[:, :1, :])
    Gh = np.conj(np.swapaxes(G, 1, 2))
    return _coeff_grad(Gh, 1, degree)


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

@dataclass
class ApproximationCertificate:
    primal: float
    dual: float
    gap: float
    Q: TrigSymbol
    Psi: TrigSymbol
    distance_function: np.ndarray
    grid: CircleGrid
    exponents: ExponentTriple
    degree: int
    status: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.primal

    def recheck(self, Phi: TrigSymbol) -> dict:
        """Independent recomputation of the primal value and dual feasibility."""
        E = Phi.samples(self.grid.N) - self.Q.samples(self.grid.N)
        primal = lp_mean(pointwise_norm(E, "operator"), self.exponents.p)
        V = self.Psi.samples(self.grid.N)
        nrm = dual_norm(V, self.exponents)
        return {
            "primal": primal,
            "dual_norm": nrm,
            "dual_feasible": bool(self.Psi.is_analytic_vanishing_at_zero() and nrm <= 1 + 1e-10),
            "weak_duality": bool(self.dual <= primal * (1 + 1e-12) + 1e-14),
        }

    def to_json_dict(self) -> dict:
        return {
            "primal": self.primal,
            "dual": self.dual,
            "gap": self.gap,
            "degree": self.degree,
            "status": self.status,
            "p": self.exponents.p,
            "grid": self.grid.N,
            "Q": self.Q.to_json_dict(tol=1e-15),
            "Psi": self.Psi.to_json_dict(tol=1e-15),
            "distance_function": list(map(float, self.distance_function)),
            "diagnostics": self.diagnostics,
        }


def distance_function(Phi: TrigSymbol, Q: TrigSymbol, grid: CircleGrid | None = None) -> np.ndarray:
    """Pointwise operator norm of ``Phi - Q`` on the grid."""
    if not Q.is_analytic():
        raise ValueError("Q must be analytic")
    grid = grid or CircleGrid.at_least(max(256, 2 * max(Phi.degree, Q.degree) + 2))
    return pointwise_norm(Phi.samples(grid.N) - Q.samples(grid.N), "operator")


def _p2_scalar(Phi: TrigSymbol, exponents: ExponentTriple, grid: CircleGrid) -> ApproximationCertificate:
    minus = Phi.window(min(Phi.kmin, -1), -1)
    Q = Phi.window(0, max(Phi.kmax, 0))
    val = lp_mean(np.abs(minus.samples(grid.N)[:, 0, 0]), 2.0)
    if val == 0:
        Psi = TrigSymbol.zeros(1, 1).shift(1)
    else:
        Psi = minus.H / val
    dual = float(trace_pairing(Phi.samples(grid.N), Psi.samples(grid.N)).real)
    d = distance_function(Phi, Q, grid)
    return ApproximationCertificate(val, min(dual, val) if val else 0.0, val - min(dual, val),
                                    Q, Psi, d, grid, exponents, Q.kmax, "certified",
                                    {"route": "p=2 scalar closed form"})


def certify(Phi: TrigSymbol, exponents: ExponentTriple, opts: SolverOptions | None = None,
            dual_hint: TrigSymbol | None = None) -> ApproximationCertificate:
    """Primal and dual solves along the degree ladder until the relative gap
    drops below ``opts.tol_gap``.

    ``dual_hint`` is an optional candidate dual extremal used as an extra
    warm start.  The result is flagged ``inconclusive`` when the ladder is
    exhausted without closing the gap.
    """
    opts = opts or SolverOptions()
    top = max(opts.degrees)
    grid = solver_grid(Phi, top, opts.grid)
    if exponents.p == 2 and Phi.shape == (1, 1):
        return _p2_scalar(Phi, exponents, grid)
    best_p: PrimalResult | None = None
    best_d: DualResult | None = None
    history = []
    status = "inconclusive"
    deg_used = opts.degrees[-1]
    for M in opts.degrees:
        init_q = [best_p.Q.coeffs] if best_p is not None else None
        pr = distance_primal(Phi, exponents, M, grid, opts, init_q)
        if best_p is None or pr.value < best_p.value:
            best_p = pr
        warm = [dual_from_primal(Phi, best_p.Q, exponents, M, grid)]
        if best_d is not None:
            warm.append(best_d.Psi.coeffs)
        if dual_hint is not None:
            warm.append(dual_hint.window(1, M).coeffs)
        du = distance_dual(Phi, exponents, M, grid, opts, warm)
        if best_d is None or du.value > best_d.value:
            best_d = du
        gap = best_p.value - best_d.value
        history.append({"degree": M, "primal": pr.value, "dual": du.value,
                        "best_primal": best_p.value, "best_dual": best_d.value})
        LOGGER.info("degree %d: primal %.10g dual %.10g", M, best_p.value, best_d.value)
        if gap <= opts.tol_gap * max(best_p.value, 1e-300) or best_p.value <= 1e-13:
            status = "certified"
            deg_used = M
            break
    d = distance_function(Phi, best_p.Q, grid)
    diag = {"history": history, "primal_stages": best_p.stages,
            "primal_failure": best_p.failure, "options": opts.to_json_dict()}
    return ApproximationCertificate(best_p.value, best_d.value, best_p.value - best_d.value,
                                    best_p.Q, best_d.Psi, d, grid, exponents, deg_used, status, diag)


def certify_checked(Phi: TrigSymbol, exponents: ExponentTriple,
                    opts: SolverOptions | None = None, **kw) -> ApproximationCertificate:
    """:func:`certify`, then re-verify weak duality and dual feasibility."""
    cert = certify(Phi, exponents, opts, **kw)
    chk = cert.recheck(Phi)
    cert.diagnostics["recheck"] = chk
    if not chk["weak_duality"] or not chk["dual_feasible"]:
        raise AssertionError(f"certificate failed re-verification: {chk}")
    return cert


# ---------------------------------------------------------------------------
# Hankel plateaus, respectability, order, gender
# ---------------------------------------------------------------------------

@dataclass
class PlateauSweep:
    k: int
    value: float
    table: dict[int, NormSearchReport]

    def to_json_dict(self) -> dict:
        return {"k": self.k, "value": self.value,
                "degrees": {str(M): r.to_json_dict() for M, r in self.table.items()}}


def _warm_vectors(Psi: TrigSymbol | None, exponents: ExponentTriple, k: int, n: int,
                  M: int) -> list[np.ndarray]:
    """Maximizing-vector guesses from a dual extremal (rank-one or FG split)."""
    if Psi is None or Psi.is_zero(1e-14):
        return []
    from .factorize import FactorizationError, fg_factor, rank_one_factor, modal_rank
    try:
        N = CircleGrid.at_least(max(512, 4 * Psi.degree + 4)).N
        r = modal_rank(Psi.samples(N))
        if k == 1 and r == 1:
            f, _ = rank_one_factor(Psi, exponents, N)
            return [f.window(0, M).coeffs]
        if k == n and Psi.rows == Psi.cols and r == n:
            F = fg_factor(Psi, exponents, N).F
            return [F.window(0, M).coeffs]
    except (FactorizationError, ValueError, np.linalg.LinAlgError) as exc:
        LOGGER.info("warm start from the dual extremal skipped: %s", exc)
    return []


def hankel_plateau(Phi: TrigSymbol, k: int, exponents: ExponentTriple,
                   opts: SolverOptions | None = None, degrees: tuple[int, ...] | None = None,
                   Psi: TrigSymbol | None = None) -> PlateauSweep:
    """Best ``H_Phi^{k}`` ratio over a sweep of input degrees."""
    opts = opts or SolverOptions()
    degrees = degrees or opts.degrees
    table = {}
    for M in degrees:
        op = build_hankel(Phi, k, M, None, exponents)
        warm = _warm_vectors(Psi, exponents, k, Phi.cols, M)
        table[M] = hankel_norm_lower_bound(op, restarts=opts.restarts, seed=opts.seed,
                                           max_iter=opts.max_iter, initial=warm,
                                           threads=opts.threads)
    return PlateauSweep(k, max(r.best_value for r in table.values()), table)


@dataclass
class RespectabilityVerdict:
    verdict: str
    certified_distance: float
    hankel_plateau: float
    plateau: PlateauSweep
    certificate: ApproximationCertificate
    det_profile: np.ndarray | None
    sigma_ratio_profile: np.ndarray | None
    psi_rank: int
    tol_gap: float
    tol_match: float

    @property
    def margin(self) -> float:
        return 1.0 - self.hankel_plateau / self.certified_distance if self.certified_distance else 0.0

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "certified_distance": self.certified_distance,
            "hankel_plateau": self.hankel_plateau,
            "margin": self.margin,
            "psi_rank": self.psi_rank,
            "tol_gap": self.tol_gap,
            "tol_match": self.tol_match,
            "plateau": self.plateau.to_json_dict(),
            "certificate": self.certificate.to_json_dict(),
            "det_profile": None if self.det_profile is None else list(map(float, self.det_profile)),
            "sigma_ratio_profile": None if self.sigma_ratio_profile is None
            else list(map(float, self.sigma_ratio_profile)),
        }


def classify(plateau: float, distance: float, tol_gap: float, tol_match: float,
             certified: bool = True) -> str:
    """``respectable`` when the plateau reaches ``d (1 - tol_match)``;
    ``weird-evidence`` when it stays below ``d (1 - tol_gap)``; otherwise
    ``inconclusive``.  The respectable test takes precedence."""
    if not certified:
        return "inconclusive"
    if distance <= 0:
        return "respectable"
    if plateau >= distance * (1 - tol_match):
        return "respectable"
    if plateau <= distance * (1 - tol_gap):
        return "weird-evidence"
    return "inconclusive"


def _pad_square(Phi: TrigSymbol) -> TrigSymbol:
    m, n = Phi.shape
    if m == n:
        return Phi
    s = max(m, n)
    c = np.zeros((Phi.coeffs.shape[0], s, s), dtype=complex)
    c[:, :m, :n] = Phi.coeffs
    return TrigSymbol(c, Phi.kmin, Phi.truncation)


def _psi_profiles(Psi: TrigSymbol, grid: CircleGrid):
    V = Psi.samples(grid.N)
    s = singular_values(V)
    det = np.abs(np.linalg.det(V)) if V.shape[1] == V.shape[2] else None
    ratio = s[:, 1] / np.where(s[:, 0] > 0, s[:, 0], 1.0) if s.shape[1] > 1 else np.zeros(V.shape[0])
    from .factorize import modal_rank
    return det, ratio, modal_rank(V)


def respectability_test(Phi: TrigSymbol, exponents: ExponentTriple,
                        opts: SolverOptions | None = None,
                        certificate: ApproximationCertificate | None = None) -> RespectabilityVerdict:
    """Compare the k = 1 Hankel plateau with the certified distance.

    Non-square symbols are padded with zero rows or columns.  Scalar and
    vector symbols are respectable outright (their dual extremals have rank
    one); the plateau is still computed and reported.
    """
    opts = opts or SolverOptions()
    Phi = _pad_square(Phi) if min(Phi.shape) > 1 else Phi
    cert = certificate or certify(Phi, exponents, opts)
    sweep = hankel_plateau(Phi, 1, exponents, opts, Psi=cert.Psi)
    det, ratio, rk = _psi_profiles(cert.Psi, cert.grid)
    if min(Phi.shape) == 1:
        verdict = "respectable" if cert.status == "certified" else "inconclusive"
    else:
        verdict = classify(sweep.value, cert.primal, opts.tol_gap, opts.tol_match,
                           cert.status == "certified")
        if verdict == "weird-evidence":
            # every degree of the sweep must stay below the gap threshold
            if any(r.best_value > cert.primal * (1 - opts.tol_gap) for r in sweep.table.values()):
                verdict = "inconclusive"
    return RespectabilityVerdict(verdict, cert.primal, sweep.value, sweep, cert, det, ratio, rk,
                                 opts.tol_gap, opts.tol_match)


@dataclass
class OrderEstimate:
    order: int | None
    plateaus: dict[int, float]
    psi_rank: int
    flagged: bool
    note: str
    sweeps: dict[int, PlateauSweep] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"order": self.order, "plateaus": {str(k): v for k, v in self.plateaus.items()},
                "psi_rank": self.psi_rank, "flagged": self.flagged, "note": self.note,
                "sweeps": {str(k): s.to_json_dict() for k, s in self.sweeps.items()}}


def order_estimate(Phi: TrigSymbol, exponents: ExponentTriple, opts: SolverOptions | None = None,
                   certificate: ApproximationCertificate | None = None) -> OrderEstimate:
    """Smallest k whose ``H_Phi^{k}`` plateau reaches the certified distance
    within ``tol_match``; cross-checked against the rank of the computed dual
    extremal (a dual extremal of rank <= order exists)."""
    opts = opts or SolverOptions()
    if Phi.rows != Phi.cols:
        raise ValueError("order_estimate needs a square symbol")
    cert = certificate or certify(Phi, exponents, opts)
    d = cert.primal
    _, _, rk = _psi_profiles(cert.Psi, cert.grid)
    plateaus, sweeps = {}, {}
    order = None
    for k in range(1, Phi.cols + 1):
        sw = hankel_plateau(Phi, k, exponents, opts, Psi=cert.Psi)
        plateaus[k], sweeps[k] = sw.value, sw
        if sw.value >= d * (1 - opts.tol_match):
            order = k
            break
    flagged = order is None or cert.status != "certified"
    note = ""
    if order is None:
        note = "no column count reached the certified distance"
    elif rk > order:
        # not a contradiction: the computed extremal need not be the low-rank one
        note = f"computed dual extremal has rank {rk} > order {order}"
    return OrderEstimate(order, plateaus, rk, flagged, note, sweeps)


@dataclass
class GenderEstimate:
    gender: int
    matching_ranks: list[int]
    restarts: int
    value: float

    def to_json_dict(self) -> dict:
        return asdict(self)


class InconclusiveSearchError(RuntimeError):
    pass


def gender_estimate(Phi: TrigSymbol, exponents: ExponentTriple, opts: SolverOptions | None = None,
                    certificate: ApproximationCertificate | None = None) -> GenderEstimate:
    """Largest modal rank among ``H_Phi^{n}`` witnesses that reach the
    distance within ``tol_match`` (heuristic, reported with the restart count)."""
    opts = opts or SolverOptions()
    if Phi.rows != Phi.cols:
        raise ValueError("gender_estimate needs a square symbol")
    if Phi.shape == (1, 1):
        return GenderEstimate(1, [1], 0, float("nan"))
    cert = certificate or certify(Phi, exponents, opts)
    d = cert.primal
    sw = hankel_plateau(Phi, Phi.cols, exponents, opts, Psi=cert.Psi)
    ranks = []
    for rep in sw.table.values():
        for v, r in zip(rep.restart_values, rep.restart_ranks):
            if v >= d * (1 - opts.tol_match):
                ranks.append(int(r))
    if not ranks:
        raise InconclusiveSearchError(
            f"no witness of the full Hankel operator reached the distance {d:.6g} "
            f"(best {sw.value:.6g}); the norm search is inconclusive")
    total = sum(len(r.restart_values) for r in sw.table.values())
    return GenderEstimate(max(ranks), sorted(set(ranks)), total, sw.value)
