"""
A unitary-valued 2 x 2 symbol that is badly approximable in every L^p but
whose vector Hankel operator falls short of the distance.

Pipeline: a trace-one positive definite ``B = [[alpha, beta], [conj(beta),
1 - alpha]]``, its spectral factor ``B = Psi* Psi``, ``A = Psi Psi*``, the
co-analytic factor ``A^2 = Q Q*``, and ``U = zbar Q^{-1} A``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .approx import (SolverOptions, ApproximationCertificate, certify, hankel_plateau,
                     PlateauSweep, trace_pairing)
from .circle import CircleGrid, ExponentTriple, TrigSymbol, lp_norm, poly, riesz_project
from .spectral import co_spectral_factor, spectral_factor

LOGGER = logging.getLogger(__name__)


class RecipeError(ValueError):
    pass


@dataclass
class WeirdRecipe:
    alpha: TrigSymbol
    beta: TrigSymbol
    B: TrigSymbol | None = None
    Psi: TrigSymbol | None = None
    A: TrigSymbol | None = None
    Q: TrigSymbol | None = None
    U: TrigSymbol | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {}
        for name in ("alpha", "beta", "B", "Psi", "A", "Q", "U"):
            s = getattr(self, name)
            out[name] = None if s is None else s.to_json_dict(tol=1e-15)
        out["diagnostics"] = self.diagnostics
        return out


def _grid(*syms: TrigSymbol) -> CircleGrid:
    return CircleGrid.at_least(max([512] + [4 * s.degree + 4 for s in syms]))


def recipe_matrix(alpha: TrigSymbol, beta: TrigSymbol) -> TrigSymbol:
    one = TrigSymbol.constant(1.0)
    return TrigSymbol.from_entries([[alpha, beta], [beta.conj(), one - alpha]])


def gram_min_singular(funcs: list[np.ndarray]) -> float:
    """Smallest singular value of the L^2 Gram matrix of grid functions."""
    X = np.stack(funcs, axis=1) / np.sqrt(funcs[0].shape[0])
    return float(np.sqrt(max(np.linalg.eigvalsh(X.conj().T @ X)[0], 0.0)))


def check_recipe(alpha: TrigSymbol, beta: TrigSymbol, delta_pos: float = 1e-3,
                 delta_ind: float = 1e-6) -> dict:
    """Positivity ``alpha (1 - alpha) - |beta|^2 >= delta_pos``, realness of
    alpha, and linear independence of ``1, alpha, beta, conj(beta)``."""
    g = _grid(alpha, beta)
    a = alpha.samples(g.N)[:, 0, 0]
    b = beta.samples(g.N)[:, 0, 0]
    if np.max(np.abs(a.imag)) > 1e-12:
        raise RecipeError("alpha must be real-valued")
    a = a.real
    det = a * (1 - a) - np.abs(b) ** 2
    gram = gram_min_singular([np.ones_like(b), a.astype(complex), b, np.conj(b)])
    diag = {"min_det": float(np.min(det)), "gram_sigma_min": gram,
            "min_eig": float(np.min(0.5 - np.sqrt(0.25 - det.clip(None, 0.25))))}
    if diag["min_det"] < delta_pos:
        raise RecipeError(f"alpha(1-alpha) - |beta|^2 has minimum {diag['min_det']:.3e} < {delta_pos}")
    if gram < delta_ind:
        raise RecipeError(f"1, alpha, beta, conj(beta) are linearly dependent "
                          f"(Gram sigma_min {gram:.2e} < {delta_ind})")
    return diag


def default_recipe() -> WeirdRecipe:
    """``alpha = 1/2 + cos(2 theta)/8``, ``beta = exp(i theta)/8``, checked."""
    alpha = poly([1 / 16, 0, 0.5, 0, 1 / 16], -2)
    beta = poly([0, 1 / 8])
    r = WeirdRecipe(alpha, beta)
    r.diagnostics.update(check_recipe(alpha, beta))
    return r


def rank_one_obstruction(B: TrigSymbol, samples: int = 4000, seed: int = 0) -> float:
    """Smallest ``max_zeta |trace(B C) - 1|`` found over rank-one constant
    self-adjoint ``C = c x x*`` with the scale c fitted by least squares.

    A positive value means no such C normalizes B, the obstruction that
    prevents a rank-one dual extremal.
    """
    rng = np.random.default_rng(seed)
    Bv = B.samples(_grid(B).N)
    x = rng.standard_normal((samples, 2)) + 1j * rng.standard_normal((samples, 2))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    t = np.einsum("si,nij,sj->sn", np.conj(x), Bv, x).real   # x* B x on the grid
    c = np.sum(t, axis=1) / np.sum(t ** 2, axis=1)
    dev = np.max(np.abs(c[:, None] * t - 1.0), axis=1)
    return float(np.min(dev))


def factor_commutation_check(Psi: TrigSymbol, A: TrigSymbol, C: np.ndarray | None = None,
                            seed: int = 0) -> float:
    """``max || A F* - F A ||`` with ``F = Psi C Psi^{-1}`` for a constant
    self-adjoint C (random when not given)."""
    if C is None:
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        C = X + X.conj().T
    g = _grid(Psi, A)
    P, Av = Psi.samples(g.N), A.samples(g.N)
    F = P @ C @ np.linalg.inv(P)
    Fh = np.conj(np.swapaxes(F, 1, 2))
    return float(np.max(np.abs(Av @ Fh - F @ Av)))


def construct_weird_U(recipe: WeirdRecipe | None = None, N: int = 1024,
                      degree: int | None = None) -> WeirdRecipe:
    """Run the factorization pipeline and fill in B, Psi, A, Q, U with their
    residual diagnostics.  U is expanded on frequencies ``-degree .. degree``
    (default N/4)."""
    r = recipe or default_recipe()
    r.diagnostics.update(check_recipe(r.alpha, r.beta))
    B = recipe_matrix(r.alpha, r.beta)
    Psi, dpsi = spectral_factor(B, return_diagnostics=True)
    A = Psi @ Psi.H
    Q, dq = co_spectral_factor(A @ A, return_diagnostics=True)
    g = CircleGrid(N)
    Qv, Av = Q.samples(N), A.samples(N)
    cond = np.linalg.cond(Qv)
    Uv = np.conj(g.nodes)[:, None, None] * np.linalg.solve(Qv, Av)
    degree = degree or N // 4
    U_full = TrigSymbol.from_samples(Uv, -degree, degree)
    scale = float(np.max(np.abs(U_full.coeffs)))
    U = U_full.trim(1e-15 * scale)
    object.__setattr__(U, "truncation", U_full.truncation)
    Us = U.samples(N)
    unit = float(np.max(np.abs(np.conj(np.swapaxes(Us, 1, 2)) @ Us - np.eye(2))))
    # A U^{-1} must equal z Q: frequencies >= 1 only
    AUi = TrigSymbol.from_samples(Av @ np.linalg.inv(Us), -degree, degree)
    low = AUi.window(-degree, 0)
    tail = np.max(np.abs(U_full.coeffs[[0, -1]]))
    r.B, r.Psi, r.A, r.Q, r.U = B, Psi, A, Q, U
    r.diagnostics.update({
        "psi_residual": dpsi.residual, "psi_blocks": dpsi.blocks, "psi_szego_defect": dpsi.szego_defect,
        "q_residual": dq.residual, "q_blocks": dq.blocks,
        "q_condition_max": float(np.max(cond)),
        "unitarity_residual": unit,
        "AUinv_nonpositive_residual": float(np.max(np.abs(low.coeffs))),
        "AUinv_minus_zQ": float(np.max(np.abs((AUi - Q.shift(1)).coeffs))),
        "tail_mass": float(tail),
        "U_band": [U.kmin, U.kmax],
        "commutation_identity": factor_commutation_check(Psi, A, np.eye(2)),
        "commutation_random": factor_commutation_check(Psi, A),
        "rank_one_obstruction": rank_one_obstruction(B),
    })
    return r


def explicit_dual_extremal(recipe: WeirdRecipe) -> TrigSymbol:
    """``A U^{-1} = z Q``: unit ``L^{p'}(S_1)`` norm for every p (trace A = 1)
    and trace pairing 1 with U."""
    return recipe.Q.shift(1)


@dataclass
class BadlyApproximableEvidence:
    distance: float
    dual: float
    norm: float
    status: str
    certificate: ApproximationCertificate
    explicit_pairing: float

    def to_json_dict(self) -> dict:
        return {"distance": self.distance, "dual": self.dual, "norm": self.norm,
                "status": self.status, "explicit_pairing": self.explicit_pairing,
                "certificate": self.certificate.to_json_dict()}


def badly_approximable_evidence(recipe: WeirdRecipe, exponents: ExponentTriple,
                                opts: SolverOptions | None = None,
                                tol: float = 1e-3) -> BadlyApproximableEvidence:
    """Certify that ``dist(U, H^p) = ||U||_{L^p} = 1``.

    The explicit dual extremal ``z Q`` is offered to the dual solver as a
    warm start only; the certified lower bound is whatever feasible iterate
    the solver returns.
    """
    U = recipe.U
    cert = certify(U, exponents, opts, dual_hint=explicit_dual_extremal(recipe))
    nrm = lp_norm(U, exponents.p, cert.grid)
    Z = explicit_dual_extremal(recipe)
    pair = trace_pairing(U.samples(cert.grid.N), Z.samples(cert.grid.N)).real
    ok = abs(cert.primal - 1) <= tol and abs(cert.dual - 1) <= tol
    return BadlyApproximableEvidence(cert.primal, cert.dual, nrm,
                                     "badly-approximable" if ok else "inconclusive", cert, pair)


def p2_consistency(recipe: WeirdRecipe, opts: SolverOptions | None = None) -> dict:
    """At p = 2 compare the certified distance of U with 1 and with the
    scalar closed form ``||P_- U||_{L^2}``.

    For matrix symbols under the operator norm the closed form is only an
    upper bound, so the two are reported side by side.
    """
    U = recipe.U
    cert = certify(U, ExponentTriple(2.0), opts, dual_hint=explicit_dual_extremal(recipe))
    minus = riesz_project(U, "minus")
    return {"distance": cert.primal, "dual": cert.dual, "status": cert.status,
            "P_minus_L2": lp_norm(minus, 2.0, cert.grid),
            "deviation_from_one": abs(cert.primal - 1.0)}


WEIRD_TOL = 1e-3  # the acceptance threshold: k = 1 plateau <= 0.999


@dataclass
class WeirdnessEvidence:
    verdict: str
    distance: float
    k1: PlateauSweep
    k2: PlateauSweep
    margin: float
    order: int | None
    tol_gap: float
    tol_match: float

    def plateau_table(self) -> list[dict]:
        rows = []
        for k, sw in ((1, self.k1), (2, self.k2)):
            for M, rep in sw.table.items():
                for seed, v in zip(rep.seeds, rep.restart_values):
                    rows.append({"k": k, "degree": M, "seed": int(seed), "value": float(v)})
        return rows

    def to_json_dict(self) -> dict:
        return {"verdict": self.verdict, "distance": self.distance, "margin": self.margin,
                "order": self.order, "tol_gap": self.tol_gap, "tol_match": self.tol_match,
                "k1_max": self.k1.value, "k2_max": self.k2.value,
                "k1_by_degree": {str(M): r.best_value for M, r in self.k1.table.items()},
                "k1_spread_by_degree": {str(M): r.plateau_spread for M, r in self.k1.table.items()},
                "plateau_table": self.plateau_table()}


def weirdness_evidence(U: TrigSymbol, exponents: ExponentTriple, sweep=(16, 32, 64),
                       restarts: int = 20, seed: int = 0, tol_gap: float = WEIRD_TOL,
                       tol_match: float = 1e-2, distance: float = 1.0,
                       order_tol: float = WEIRD_TOL, threads: int | None = None) -> WeirdnessEvidence:
    """k = 1 plateau over a degree sweep versus the k = 2 value.

    ``weird-evidence`` needs the k = 1 value at most ``distance (1 - tol_gap)``
    at every degree and the k = 2 value at least ``distance (1 - tol_match)``;
    a k = 2 search that fails to approach the distance makes the result
    ``inconclusive``.  The order is the smallest k whose plateau is within
    ``order_tol`` of the distance.
    """
    opts = SolverOptions(degrees=tuple(sweep), restarts=restarts, seed=seed, threads=threads)
    k1 = hankel_plateau(U, 1, exponents, opts)
    k2 = hankel_plateau(U, 2, exponents, opts)
    below = all(r.best_value <= distance * (1 - tol_gap) for r in k1.table.values())
    reached = k2.value >= distance * (1 - tol_match)
    if not reached:
        verdict = "inconclusive"
    elif below:
        verdict = "weird-evidence"
    elif k1.value >= distance * (1 - tol_match):
        verdict = "respectable"
    else:
        verdict = "inconclusive"
    order = None
    for k, sw in ((1, k1), (2, k2)):
        if sw.value >= distance * (1 - order_tol):
            order = k
            break
    return WeirdnessEvidence(verdict, distance, k1, k2, 1 - k1.value / distance, order,
                             tol_gap, tol_match)
