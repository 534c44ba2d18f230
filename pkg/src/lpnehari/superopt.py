"""
Superoptimal approximation of 2 x 2 trigonometric-polynomial symbols.

With ``Phi - Q = W* diag(Delta, Phi_sharp) V*`` at k = 1 and the outer
kappa with ``|kappa| = d_Phi``, the second singular value of
``Phi - Q - W* diag(0, R_sharp) V*`` divided by d_Phi is
``|kappa^{-1} Phi_sharp - kappa^{-1} R_sharp|``.  Minimizing its sup is the
scalar L^infinity Nehari problem for ``kappa^{-1} Phi_sharp``, solved by the
AAK step; the error then has constant modulus.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .approx import SolverOptions, certify, distance_function, ApproximationCertificate
from .circle import (CircleGrid, ExponentTriple, TrigSymbol, lp_norm,
                     outer_from_modulus, singular_values)
from .config import thread_count
from .factorize import (FactorizationBundle, FactorizationError, UnsupportedScopeError,
                        NehariScalarResult, reduced_nehari_scalar, thematic_complete_2,
                        unitarity_defect)
from .hankel import build_hankel, hankel_norm_lower_bound

LOGGER = logging.getLogger(__name__)

RATIONAL_TOL = 1e-10


class DistanceFunctionError(ValueError):
    pass


@dataclass
class TauProfile:
    tau: list[float]
    profiles: np.ndarray          # (N, n): s_j / d_Phi on the grid
    d: np.ndarray

    def to_json_dict(self) -> dict:
        return {"tau": self.tau, "profiles": self.profiles.T.tolist(), "d_phi": self.d.tolist()}


def tau_profile(Phi: TrigSymbol, Q: TrigSymbol, exponents: ExponentTriple,
                grid: CircleGrid | None = None, d: np.ndarray | None = None,
                opts: SolverOptions | None = None, floor: float = 1e-12) -> TauProfile:
    """Grid maxima of ``s_j((Phi - Q)(zeta)) / d_Phi(zeta)``.

    ``d`` holds samples of the distance function on ``grid``; when omitted it
    is computed from a certified best approximant.
    """
    if not Q.is_analytic():
        raise ValueError("Q must be analytic")
    if d is None:
        cert = certify(Phi, exponents, opts)
        grid = grid or cert.grid
        d = distance_function(Phi, cert.Q, grid)
    grid = grid or CircleGrid.at_least(max(256, 2 * max(Phi.degree, Q.degree) + 2))
    d = np.asarray(d, dtype=float)
    if d.shape[0] != grid.N:
        raise ValueError(f"d has {d.shape[0]} samples, grid has {grid.N}")
    bad = np.flatnonzero(d <= floor * max(float(np.max(d)), 1e-300))
    if bad.size:
        raise DistanceFunctionError(
            f"d_Phi vanishes at node {int(bad[0])} of {grid.N}; log d_Phi must be integrable")
    s = singular_values(Phi.samples(grid.N) - Q.samples(grid.N))
    prof = s / d[:, None]
    return TauProfile([float(x) for x in np.max(prof, axis=0)], prof, d)


@dataclass
class SuperoptimalReport:
    Q: TrigSymbol
    tau: list[float]
    profiles: np.ndarray
    gender_used: int
    reduced_symbol: TrigSymbol | None
    reduced: NehariScalarResult | None
    bundle: FactorizationBundle | None
    certificate: ApproximationCertificate
    flat: bool
    flatness: float
    flags: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.flat and not self.flags

    def to_json_dict(self) -> dict:
        return {
            "Q": self.Q.to_json_dict(tol=1e-14),
            "tau": self.tau,
            "ratio_profiles": self.profiles.T.tolist(),
            "gender_used": self.gender_used,
            "reduced_symbol": None if self.reduced_symbol is None
            else self.reduced_symbol.to_json_dict(tol=1e-14),
            "aak_error": None if self.reduced is None else self.reduced.error,
            "bundle": None if self.bundle is None else self.bundle.to_json_dict(),
            "certificate": self.certificate.to_json_dict(),
            "flat": self.flat,
            "flatness": self.flatness,
            "flags": self.flags,
            "diagnostics": self.diagnostics,
        }


def scope_guard(Phi: TrigSymbol, tol: float = RATIONAL_TOL) -> None:
    """Only 2 x 2 trigonometric polynomials are handled."""
    if Phi.shape != (2, 2):
        raise UnsupportedScopeError(f"superoptimal pipeline handles 2 x 2 symbols, got {Phi.shape}")
    if Phi.truncation > tol:
        raise UnsupportedScopeError(
            f"symbol carries truncation residual {Phi.truncation:.2e} > {tol:.0e}; "
            "non-rational symbols are out of scope")


def _leading_phase(sym: TrigSymbol) -> complex:
    """Unimodular constant making the first nonvanishing Taylor coefficient of
    the first entry positive."""
    scale = max(float(np.max(np.abs(sym.coeffs))), 1e-300)
    for x in sym.window(0, max(sym.kmax, 0)).coeffs[:, 0, 0]:
        if abs(x) > 1e-8 * scale:
            return abs(x) / x
    return 1.0


def _inner_direction(vals: np.ndarray, degree: int, what: str,
                     normalize: bool = True) -> TrigSymbol:
    """``f / outer(|f|)`` for a 2 x 1 analytic column given on the grid."""
    mod = np.sqrt(np.sum(np.abs(vals) ** 2, axis=(1, 2)))
    if np.min(mod) <= 1e-10 * np.max(mod):
        raise FactorizationError(f"{what} vanishes on the circle")
    h = outer_from_modulus(mod, degree).samples(vals.shape[0])[:, 0, 0]
    u = vals / h[:, None, None]
    neg = TrigSymbol.from_samples(u, -degree, -1)
    if np.max(np.abs(neg.coeffs)) > 1e-6:
        raise FactorizationError(f"inner part of {what} is not analytic "
                                 f"(negative mass {np.max(np.abs(neg.coeffs)):.2e})")
    sym = TrigSymbol.from_samples(u, 0, degree)
    if normalize:
        sym = TrigSymbol.from_samples(u * _leading_phase(sym), 0, degree)
    return sym


def extract_bundle(Phi: TrigSymbol, cert: ApproximationCertificate, exponents: ExponentTriple,
                   opts: SolverOptions | None = None, M_in: int = 16, N: int | None = None,
                   degree: int | None = None) -> tuple[FactorizationBundle, dict]:
    """k = 1 bundle of ``Phi - Q`` from a maximizing vector f of the k = 1
    Hankel operator: ``v = f / outer(|f|)``, ``w`` the inner part of
    ``zbar conj(H f)``, ``V = (v, Theta-bar)``, ``W^t = (w, Xi-bar)``."""
    opts = opts or SolverOptions()
    N = N or CircleGrid.at_least(max(1024, 8 * (Phi.degree + M_in) + 8)).N
    degree = degree or N // 4
    op = build_hankel(Phi, 1, M_in, None, exponents)
    rep = hankel_norm_lower_bound(op, restarts=min(opts.restarts, 8), seed=opts.seed,
                                  max_iter=opts.max_iter, threads=opts.threads)
    f = rep.witness
    v = _inner_direction(f.samples(N), degree, "maximizing vector", normalize=False)
    ph = _leading_phase(v)
    f, v = f * ph, v * ph
    V = thematic_complete_2(v.trim(1e-13), tol=1e-6)
    Hf = op.apply(f)
    zeta = CircleGrid(N).nodes
    G = np.conj(zeta)[:, None, None] * np.conj(Hf.samples(N))
    # the phase of w is tied to that of v through H f
    w = _inner_direction(G, degree, "zbar conj(H f)", normalize=False)
    W = thematic_complete_2(w.trim(1e-13), tol=1e-6).T
    Vv, Wv = V.samples(N), W.samples(N)
    E = Phi.samples(N) - cert.Q.samples(N)
    Av = Wv @ E @ Vv
    diag = {"hankel_k1": rep.best_value, "hankel_M_in": M_in,
            "offdiag": float(np.max(np.abs(Av[:, [0, 1], [1, 0]]))),
            "V_unitarity": unitarity_defect(V, N), "W_unitarity": unitarity_defect(W, N),
            "v_truncation": v.truncation, "w_truncation": w.truncation}
    Delta = TrigSymbol.from_samples(Av[:, :1, :1], -degree, degree)
    Phi_sharp = TrigSymbol.from_samples(Av[:, 1:, 1:], -degree, degree)
    b = FactorizationBundle(1, V, W, Delta, Phi_sharp, Q=cert.Q, diagnostics=diag)
    return b, diag


def superoptimal_2x2(Phi: TrigSymbol, exponents: ExponentTriple,
                     opts: SolverOptions | None = None, tol_flat: float = 1e-2,
                     band_tol: float = 1e-9, M_in: int = 16, N: int | None = None,
                     cert: ApproximationCertificate | None = None) -> SuperoptimalReport:
    """Superoptimal approximant of a 2 x 2 trigonometric polynomial.

    Steps: certify the distance; extract the k = 1 bundle; form kappa outer
    with ``|kappa| = d_Phi``; solve the scalar problem for
    ``psi = kappa^{-1} Phi_sharp`` by AAK (negative coefficients below
    ``band_tol`` relative are dropped); reassemble
    ``R = Phi - W* diag(Delta, kappa (psi - g)) V*``.  The j = 1 ratio profile
    must then be flat within ``tol_flat`` relative standard deviation.
    """
    scope_guard(Phi)
    opts = opts or SolverOptions()
    cert = cert or certify(Phi, exponents, opts)
    flags: list[str] = []
    if cert.status != "certified":
        flags.append("distance not certified")
    if cert.value <= 0:
        raise FactorizationError("Phi is analytic; nothing to approximate")
    N = N or CircleGrid.at_least(max(1024, 8 * (Phi.degree + M_in) + 8)).N
    grid = CircleGrid(N)
    degree = N // 4
    b, diag = extract_bundle(Phi, cert, exponents, opts, M_in, N, degree)
    if diag["hankel_k1"] < cert.value * (1 - opts.tol_match):
        flags.append("k = 1 Hankel value below the distance; no k = 1 bundle")
    d = np.abs(b.Delta.samples(N)[:, 0, 0])
    kappa = outer_from_modulus(d, degree)
    kv = kappa.samples(N)[:, 0, 0]
    psi_v = b.Phi_sharp.samples(N)[:, 0, 0] / kv
    psi = TrigSymbol.from_samples(psi_v, -degree, degree)
    scale = max(float(np.max(np.abs(psi.coeffs))), 1e-300)
    c = np.array(psi.coeffs)
    neg = np.arange(psi.kmin, psi.kmax + 1) < 0
    dropped = float(np.max(np.abs(c[neg & (np.abs(c[:, 0, 0]) <= band_tol * scale)]), initial=0.0))
    c[neg & (np.abs(c[:, 0, 0]) <= band_tol * scale)] = 0.0
    psi = TrigSymbol(c, psi.kmin, psi.truncation).trim(0.0)
    red = reduced_nehari_scalar(psi, N=N)
    err_v = psi.samples(N)[:, 0, 0] - red.approximant.samples(N)[:, 0, 0]
    gender = 2 if red.error >= 1 - opts.tol_match else 1
    if gender == 2:
        flags.append("tau = (1, 1) forced: gender 2")
    # R = Phi - W* diag(Delta, kappa (psi - g)) V*
    Dv = np.zeros((N, 2, 2), dtype=complex)
    Dv[:, 0, 0] = b.Delta.samples(N)[:, 0, 0]
    Dv[:, 1, 1] = kv * err_v
    Vv, Wv = b.V.samples(N), b.W.samples(N)
    Rv = Phi.samples(N) - np.conj(np.swapaxes(Wv, 1, 2)) @ Dv @ np.conj(np.swapaxes(Vv, 1, 2))
    R_full = TrigSymbol.from_samples(Rv, -degree, degree)
    neg_mass = float(np.max(np.abs(R_full.window(-degree, -1).coeffs)))
    if neg_mass > 1e-6:
        flags.append(f"reassembled R is not analytic (negative mass {neg_mass:.2e})")
    R = R_full.window(0, degree)
    R = R.trim(1e-12 * max(float(np.max(np.abs(Phi.coeffs))), 1e-300))
    tp = tau_profile(Phi, R, exponents, grid, d=distance_function(Phi, cert.Q, grid))
    j1 = tp.profiles[:, 1]
    flatness = float(np.std(j1) / tp.tau[1]) if tp.tau[1] > 1e-12 else float(np.std(j1))
    flat = flatness <= tol_flat
    if not flat:
        flags.append(f"j = 1 ratio profile not flat (relative stddev {flatness:.2e})")
    lp = lp_norm(Phi - R, exponents.p, grid)
    diagnostics = dict(diag)
    diagnostics.update({"kappa_truncation": kappa.truncation, "dropped_negative": dropped,
                        "aak_residual": red.residual, "R_negative_mass": neg_mass,
                        "lp_error_of_R": lp, "distance": cert.value,
                        "best_approximant_defect": abs(lp - cert.value) / cert.value,
                        "tau1_minus_aak": abs(tp.tau[1] - red.error)})
    b.kappa = kappa
    return SuperoptimalReport(R, tp.tau, tp.profiles, gender, psi, red, b, cert, flat,
                              flatness, flags, diagnostics)


@dataclass
class UniquenessProbe:
    base_tau1: float
    perturbed_tau1: list[float]
    delta: float

    @property
    def increases(self) -> list[float]:
        return [t - self.base_tau1 for t in self.perturbed_tau1]

    @property
    def all_increase(self) -> bool:
        return all(x > 0 for x in self.increases)

    def to_json_dict(self) -> dict:
        return {"base_tau1": self.base_tau1, "perturbed_tau1": self.perturbed_tau1,
                "delta": self.delta, "min_increase": min(self.increases),
                "all_increase": self.all_increase}


def uniqueness_probe(report: SuperoptimalReport, Phi: TrigSymbol, directions: int = 12,
                     delta: float = 1e-2, max_degree: int = 3, seed: int = 0,
                     threads: int | None = None) -> UniquenessProbe:
    """Perturb the reduced solution by ``delta * kappa * p`` for random analytic
    polynomials p of unit sup norm and record the new tau_1."""
    b = report.bundle
    if b is None or report.reduced is None:
        raise FactorizationError("probe needs a completed superoptimal report")
    N = report.profiles.shape[0]
    grid = CircleGrid(N)
    d = np.abs(b.Delta.samples(N)[:, 0, 0])
    Vv, Wv = b.V.samples(N), b.W.samples(N)
    Wh = np.conj(np.swapaxes(Wv, 1, 2))
    Vh = np.conj(np.swapaxes(Vv, 1, 2))
    kv = b.kappa.samples(N)[:, 0, 0]
    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(directions):
        c = rng.standard_normal(max_degree + 1) + 1j * rng.standard_normal(max_degree + 1)
        p = TrigSymbol(c, 0)
        polys.append(p / float(np.max(np.abs(p.samples(N)))))
    base_R = report.Q.samples(N)
    Phi_v = Phi.samples(N)

    def run(p: TrigSymbol) -> float:
        Dv = np.zeros((N, 2, 2), dtype=complex)
        Dv[:, 1, 1] = delta * kv * p.samples(N)[:, 0, 0]
        Rv = base_R + Wh @ Dv @ Vh
        s = singular_values(Phi_v - Rv)
        return float(np.max(s[:, 1] / d))

    nt = thread_count(threads)
    if nt > 1:
        with ThreadPoolExecutor(nt) as ex:
            vals = list(ex.map(run, polys))
    else:
        vals = [run(p) for p in polys]
    base = report.tau[1]
    return UniquenessProbe(base, vals, delta)
