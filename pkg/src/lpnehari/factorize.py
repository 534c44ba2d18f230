"""
Constructive factorizations: scalar badly approximable generators, the
Sarason and FG factorizations of analytic matrix functions, rank-one
splittings, 2 x 2 thematic completion, the block-diagonal generator for
badly approximable matrix functions, the parametrization of best
approximants, and the scalar AAK step used by the reduced Nehari problem.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .circle import (CircleGrid, ExponentTriple, OuterDomainError, TrigSymbol, block_diag,
                     lp_mean, outer_from_modulus, outer_log, outer_log_samples, outer_power, pointwise_norm,
                     singular_values, z)
from .spectral import spectral_factor

LOGGER = logging.getLogger(__name__)

# absolute level under which truncated expansions drop their coefficients
TRIM = 1e-15


class FactorizationError(ValueError):
    pass


class UnsupportedScopeError(FactorizationError):
    pass


def _grid_for(*syms: TrigSymbol, minimum: int = 512) -> CircleGrid:
    return CircleGrid.at_least(max([minimum] + [4 * s.degree + 4 for s in syms]))


def _negative_mass(sym: TrigSymbol) -> float:
    if sym.kmin >= 0:
        return 0.0
    return float(np.max(np.abs(sym.window(sym.kmin, -1).coeffs)))


def analytic_from_samples(vals: np.ndarray, degree: int | None = None,
                          what: str = "function", tol: float = 1e-8,
                          scale: float | None = None) -> TrigSymbol:
    """Analytic expansion of grid samples, raising when the discarded
    negative frequencies carry more than ``tol`` relative to ``scale``
    (default: the largest coefficient)."""
    N = vals.shape[0]
    full = TrigSymbol.from_samples(vals, -(N // 2) + 1, N // 2)
    if scale is None:
        scale = float(np.max(np.abs(full.coeffs)))
    scale = max(scale, 1e-300)
    neg = _negative_mass(full) / scale
    if neg > tol:
        raise FactorizationError(f"{what} is not analytic: negative-frequency mass {neg:.2e}")
    degree = N // 2 if degree is None else degree
    out = TrigSymbol.from_samples(vals, 0, degree)
    keep = out.trim(TRIM * scale)
    object.__setattr__(keep, "truncation", out.truncation)
    return keep


def check_inner(theta: TrigSymbol, tol: float = 1e-8) -> float:
    """Unimodularity defect of a scalar theta; raises when theta is not inner."""
    if theta.shape != (1, 1):
        raise FactorizationError("inner factor must be scalar")
    if not theta.is_analytic():
        raise FactorizationError("inner factor has negative frequencies")
    N = _grid_for(theta).N
    defect = float(np.max(np.abs(np.abs(theta.samples(N)[:, 0, 0]) - 1.0)))
    if defect > tol:
        raise FactorizationError(f"theta is not inner: max ||theta| - 1| = {defect:.2e}")
    return defect


# ---------------------------------------------------------------------------
# scalar generators
# ---------------------------------------------------------------------------

def badly_approximable_scalar(theta: TrigSymbol, h: TrigSymbol, exponents: ExponentTriple,
                              degree: int | None = None) -> TrigSymbol:
    """``zbar * conj(theta) * conj(h) / h^{2/q}``, which has modulus ``|h|^{2/p}``.

    theta must be inner and h outer; the fractional power uses the log-FFT
    branch with positive value at the origin.
    """
    check_inner(theta)
    if not h.is_analytic():
        raise FactorizationError("h has negative frequencies")
    g = _grid_for(theta, h, minimum=1024)
    outer_log(h, g.N)  # raises when h is not outer
    two_q = 0.0 if math.isinf(exponents.q) else 2.0 / exponents.q
    if two_q:
        inv = outer_power(h, -two_q, N=g.N, degree=degree or g.N // 4)
        inv = inv.trim(TRIM * float(np.max(np.abs(inv.coeffs))))
    else:
        inv = TrigSymbol.constant(1.0)
    phi = z(-1) * theta.conj() * h.conj() * inv
    phi = phi.trim(TRIM * float(np.max(np.abs(phi.coeffs))))
    # modulus check |phi| = |h|^{2/p}
    N = CircleGrid.at_least(2 * phi.degree + 2).N
    target = np.abs(h.samples(N)[:, 0, 0]) ** (2.0 / exponents.p)
    err = float(np.max(np.abs(np.abs(phi.samples(N)[:, 0, 0]) - target)) / np.max(target))
    object.__setattr__(phi, "truncation", max(phi.truncation, err))
    if err > 1e-8:
        raise FactorizationError(f"modulus check failed ({err:.2e}); raise the expansion degree")
    return phi


def badly_approximable_with_modulus(omega: np.ndarray, theta: TrigSymbol,
                                    exponents: ExponentTriple) -> TrigSymbol:
    """Badly approximable scalar with prescribed modulus ``omega`` (grid samples).

    ``h = outer(omega^{p/2})`` and the result is
    :func:`badly_approximable_scalar` of (theta, h).
    """
    omega = np.asarray(omega, dtype=float).ravel()
    h = outer_from_modulus(omega ** (exponents.p / 2.0))
    h = h.trim(TRIM * float(np.max(np.abs(h.coeffs))))
    phi = badly_approximable_scalar(theta, h, exponents)
    nodes = CircleGrid(omega.shape[0]).nodes
    err = float(np.max(np.abs(np.abs(phi(nodes)[:, 0, 0]) - omega)) / np.max(omega))
    if err > 1e-6:
        raise FactorizationError(f"|phi| does not reproduce omega ({err:.2e})")
    return phi


# ---------------------------------------------------------------------------
# Sarason and FG factorizations
# ---------------------------------------------------------------------------

@dataclass
class SarasonPair:
    Q: TrigSymbol
    R: TrigSymbol
    residuals: dict = field(default_factory=dict)


def _herm_sqrt(vals: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(vals)
    return np.einsum("nij,nj,nkj->nik", U, np.sqrt(np.clip(w, 0, None)), np.conj(U))


def _full_rank_guard(vals: np.ndarray, eps: float) -> float:
    s = singular_values(vals)
    ratio = float(np.min(s[:, -1]) / max(float(np.max(s[:, 0])), 1e-300))
    if ratio <= eps:
        raise UnsupportedScopeError(
            f"Psi is numerically rank deficient on the grid (min s_n/s_1 = {ratio:.2e}); "
            "only the full-rank reduction of the Sarason factorization is supported")
    return ratio


def _expand(vals: np.ndarray, degree: int, lo: int | None = None) -> TrigSymbol:
    lo = -degree if lo is None else lo
    s = TrigSymbol.from_samples(vals, lo, degree)
    t = s.trim(TRIM * max(float(np.max(np.abs(s.coeffs))), 1e-300))
    object.__setattr__(t, "truncation", s.truncation)
    return t


def sarason_factor(Psi: TrigSymbol, eps: float = 1e-8, N: int | None = None) -> SarasonPair:
    """Analytic ``Q, R`` with ``Psi = Q R``, ``R* R = (Psi* Psi)^{1/2}`` and
    ``Q* Q = R R*``, for square full-rank analytic Psi."""
    if Psi.rows != Psi.cols:
        raise FactorizationError("Sarason factorization needs a square symbol")
    if not Psi.is_analytic():
        raise FactorizationError("Psi must be analytic")
    N = N or CircleGrid.at_least(max(1024, 8 * Psi.degree + 8)).N
    P = Psi.samples(N)
    _full_rank_guard(P, eps)
    S = _herm_sqrt(np.conj(np.swapaxes(P, 1, 2)) @ P)
    S_sym = _expand(S, N // 4)
    R = spectral_factor(S_sym, max_size=4096)
    Qv = P @ np.linalg.inv(R.samples(N))
    Q = analytic_from_samples(Qv, N // 4, "Psi R^-1")
    pair = SarasonPair(Q, R)
    pair.residuals = sarason_residuals(Psi, pair, N)
    return pair


def sarason_residuals(Psi: TrigSymbol, pair: SarasonPair, N: int) -> dict:
    P, Q, R = Psi.samples(N), pair.Q.samples(N), pair.R.samples(N)
    ad = lambda X: np.conj(np.swapaxes(X, 1, 2))
    S = _herm_sqrt(ad(P) @ P)
    return {
        "RstarR": float(np.max(np.abs(ad(R) @ R - S))),
        "QstarQ": float(np.max(np.abs(ad(Q) @ Q - R @ ad(R)))),
        "QR": float(np.max(np.abs(Q @ R - P))),
    }


@dataclass
class FGPair:
    F: TrigSymbol
    G: TrigSymbol
    norm_psi: float
    norm_F: float
    norm_G: float
    residual: float
    route: str

    @property
    def product_defect(self) -> float:
        return abs(self.norm_F * self.norm_G - self.norm_psi) / max(self.norm_psi, 1e-300)


def _scaling_outer(Psi_vals: np.ndarray, exponents: ExponentTriple, pointwise: str) -> np.ndarray:
    if pointwise == "S1":
        nrm = np.sum(singular_values(Psi_vals), axis=1)
    else:
        nrm = pointwise_norm(Psi_vals, "operator")
    expo = 0.5 - exponents.p_prime / 2.0
    return np.exp(outer_log_samples(nrm ** expo))


def fg_factor(Psi: TrigSymbol, exponents: ExponentTriple, N: int | None = None) -> FGPair:
    """``Psi = F G`` with ``||Psi||_{L^{p'}(S_1)} = ||F||_{L^q(S_2)} ||G||_{L^2(S_2)}``.

    Rank-one inputs go to :func:`rank_one_factor` (then F is a column and
    G a row); full-rank square inputs use :func:`sarason_factor` and the
    outer rescaling ``|h| = ||Psi||_{S_1}^{1/2 - p'/2}``.
    """
    if Psi.is_zero(1e-14):
        raise FactorizationError("Psi must be nonzero")
    N = N or CircleGrid.at_least(max(1024, 8 * Psi.degree + 8)).N
    P = Psi.samples(N)
    if modal_rank(P) == 1:
        f, g = rank_one_factor(Psi, exponents, N)
        F, G = f, g.T
        route = "rank-one"
    else:
        pair = sarason_factor(Psi, N=N)
        hv = _scaling_outer(P, exponents, "S1")
        Qv, Rv = pair.Q.samples(N), pair.R.samples(N)
        F = analytic_from_samples(hv[:, None, None] * Qv, N // 4, "F")
        G = analytic_from_samples(Rv / hv[:, None, None], N // 4, "G")
        route = "sarason"
    Fv, Gv = F.samples(N), G.samples(N)
    res = float(np.max(np.abs(Fv @ Gv - P)))
    nP = lp_mean(np.sum(singular_values(P), axis=1), exponents.p_prime)
    nF = lp_mean(np.sqrt(np.sum(np.abs(Fv) ** 2, axis=(1, 2))), exponents.q)
    nG = lp_mean(np.sqrt(np.sum(np.abs(Gv) ** 2, axis=(1, 2))), 2.0)
    return FGPair(F, G, nP, nF, nG, res, route)


def modal_rank(vals: np.ndarray, rel: float = 1e-6) -> int:
    s = singular_values(vals)
    top = float(np.max(s[:, 0])) if s.size else 0.0
    if top == 0:
        return 0
    live = s[:, 0] > 1e-10 * top
    r = np.sum(s > rel * s[:, :1], axis=1)[live]
    vals_, counts = np.unique(r, return_counts=True)
    return int(vals_[np.argmax(counts)])


def rank_one_factor(Psi: TrigSymbol, exponents: ExponentTriple,
                    N: int | None = None, combinations: int = 32) -> tuple[TrigSymbol, TrigSymbol]:
    """Columns ``f`` (m x 1) and ``g`` (n x 1) with ``Psi = f g^t`` and
    ``||Psi||_{L^{p'}} = ||f||_{L^q} ||g||_{L^2}``.

    ``G = Psi / h0`` with ``|h0|^2 = ||Psi||``; the inner column direction is
    taken from a column of G divided by its outer modulus, and the row factor
    is recovered by explicit division.  Each column, then up to
    ``combinations`` seeded random column combinations, is tried until the
    recovered row is analytic.
    """
    N = N or CircleGrid.at_least(max(1024, 8 * Psi.degree + 8)).N
    P = Psi.samples(N)
    r = modal_rank(P)
    if r != 1:
        raise FactorizationError(f"Psi has numerical rank {r}, expected 1")
    nrm = pointwise_norm(P, "operator")
    if np.min(nrm) <= 1e-12 * np.max(nrm):
        raise OuterDomainError("Psi vanishes at a grid node; the rank-one split needs log||Psi|| integrable")
    h0 = np.exp(outer_log_samples(np.sqrt(nrm)))
    Gv = P / h0[:, None, None]
    # columns first, then random column combinations: a combination whose
    # scalar factor is outer gives the inner direction without extra zeros
    n = Gv.shape[2]
    order = np.argsort(-np.sum(np.abs(Gv) ** 2, axis=(0, 1)))
    rng = np.random.default_rng(0)
    mixes = [np.eye(n)[j] for j in order]
    mixes += [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(combinations)]
    last = None
    for mix in mixes:
        c = Gv @ mix
        cn = np.linalg.norm(c, axis=1)
        if np.min(cn) <= 1e-12 * np.max(cn):
            continue
        oc = np.exp(outer_log_samples(cn))
        ups = c / oc[:, None]                  # inner column direction
        row = np.einsum("ni,nij->nj", np.conj(ups), Gv)
        try:
            analytic_from_samples(row[:, :, None], None, "row factor", tol=1e-9)
            analytic_from_samples(ups[:, :, None], None, "column factor", tol=1e-9)
        except FactorizationError as exc:
            last = exc
            continue
        hs = _scaling_outer(P, exponents, "op")
        u = h0[:, None] * ups
        f = analytic_from_samples((hs[:, None] * u)[:, :, None], N // 4, "f")
        g = analytic_from_samples((row / hs[:, None])[:, :, None], N // 4, "g")
        return f, g
    raise FactorizationError(f"no column combination yields an analytic rank-one split ({last})")


def trace_norm_rank_oracle(A_vals: np.ndarray, B_vals: np.ndarray, tol: float = 1e-8,
                      rel: float = 1e-6) -> dict:
    """Nodes where ``||AB||_{S_1} = ||A||_{S_2} ||B||_{S_2}`` and whether the
    ranks of A, B and AB coincide there."""
    AB = A_vals @ B_vals
    s1 = np.sum(singular_values(AB), axis=1)
    prod = (np.sqrt(np.sum(np.abs(A_vals) ** 2, axis=(1, 2))) *
            np.sqrt(np.sum(np.abs(B_vals) ** 2, axis=(1, 2))))
    eq = np.abs(s1 - prod) <= tol * np.maximum(prod, 1e-300)

    def rk(X):
        s = singular_values(X)
        return np.sum(s > rel * s[:, :1].clip(1e-300), axis=1)

    ra, rb, rab = rk(A_vals), rk(B_vals), rk(AB)
    agree = (ra == rab) & (rb == rab)
    return {"equality_nodes": int(np.sum(eq)), "violations": int(np.sum(eq & ~agree))}


# ---------------------------------------------------------------------------
# thematic completion and the block-diagonal generator
# ---------------------------------------------------------------------------

def thematic_complete_2(v: TrigSymbol, tol: float = 1e-8) -> TrigSymbol:
    """``V = (v, Theta-bar)`` with ``Theta = (-v_2, v_1)^t``; unitary-valued
    when v is an analytic 2 x 1 column of unit length on the circle."""
    if v.shape != (2, 1):
        if v.rows > 2 and v.cols == 1:
            raise UnsupportedScopeError("thematic completion is only implemented for n = 2 "
                                        "(the general case needs an inner co-outer completion)")
        raise FactorizationError(f"expected a 2 x 1 column, got {v.shape}")
    if not v.is_analytic():
        raise FactorizationError("v must be analytic")
    N = _grid_for(v, minimum=256).N
    vals = v.samples(N)
    defect = float(np.max(np.abs(np.sum(np.abs(vals) ** 2, axis=(1, 2)) - 1.0)))
    if defect > tol:
        raise FactorizationError(f"v is not pointwise unit: max ||v|^2 - 1| = {defect:.2e}")
    v1, v2 = v.entry(0, 0), v.entry(1, 0)
    second = TrigSymbol.from_entries([[-v2.conj()], [v1.conj()]])
    return TrigSymbol.from_entries([[v1, second.entry(0, 0)], [v2, second.entry(1, 0)]])


def unitarity_defect(V: TrigSymbol, N: int | None = None) -> float:
    N = N or _grid_for(V, minimum=256).N
    vals = V.samples(N)
    return float(np.max(np.abs(np.conj(np.swapaxes(vals, 1, 2)) @ vals - np.eye(V.cols))))


@dataclass
class FactorizationBundle:
    """Data of ``Phi - Q = W* diag(Delta, Phi_sharp) V*``."""

    k: int
    V: TrigSymbol
    W: TrigSymbol
    Delta: TrigSymbol
    Phi_sharp: TrigSymbol
    theta: TrigSymbol | None = None
    h: TrigSymbol | None = None
    kappa: TrigSymbol | None = None
    Q: TrigSymbol | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def Upsilon(self) -> TrigSymbol:
        return self.V.block(slice(0, self.V.rows), slice(0, self.k))

    @property
    def Omega(self) -> TrigSymbol:
        return self.W.T.block(slice(0, self.W.cols), slice(0, self.k))

    def assemble(self) -> TrigSymbol:
        core = block_diag(self.Delta, self.Phi_sharp)
        out = self.W.H @ core @ self.V.H
        return out if self.Q is None else out + self.Q

    def to_json_dict(self) -> dict:
        d = {"k": self.k}
        for name in ("V", "W", "Delta", "Phi_sharp", "theta", "h", "kappa", "Q"):
            s = getattr(self, name)
            d[name] = None if s is None else s.to_json_dict(tol=1e-15)
        d["diagnostics"] = self.diagnostics
        return d


def verify_bundle(b: FactorizationBundle, N: int | None = None, tol_bound: float = 1e-8) -> dict:
    """Check the bundle conditions; raises naming the first failed one."""
    N = N or _grid_for(b.V, b.W, b.Delta, b.Phi_sharp, minimum=512).N
    out = {"V_unitary": unitarity_defect(b.V, N), "W_unitary": unitarity_defect(b.W, N)}
    if out["V_unitary"] > 1e-8:
        raise FactorizationError(f"V is not unitary-valued (defect {out['V_unitary']:.2e})")
    if out["W_unitary"] > 1e-8:
        raise FactorizationError(f"W is not unitary-valued (defect {out['W_unitary']:.2e})")
    if not b.Upsilon.is_analytic(1e-9):
        raise FactorizationError("first k columns of V are not analytic")
    if not b.Omega.is_analytic(1e-9):
        raise FactorizationError("first k columns of W^t are not analytic")
    Dv = b.Delta.samples(N)
    d = pointwise_norm(Dv, "operator")
    if np.min(d) <= 0:
        raise FactorizationError("Delta vanishes on the grid")
    unit = Dv / d[:, None, None]
    out["Delta_unitary"] = float(np.max(np.abs(np.conj(np.swapaxes(unit, 1, 2)) @ unit - np.eye(b.k))))
    if out["Delta_unitary"] > 1e-6:
        raise FactorizationError(f"d^-1 Delta is not unitary-valued (defect {out['Delta_unitary']:.2e})")
    ps = pointwise_norm(b.Phi_sharp.samples(N), "operator")
    excess = ps - d
    worst = int(np.argmax(excess))
    out["sharp_excess"] = float(excess[worst])
    if excess[worst] > tol_bound:
        raise FactorizationError(
            f"||Phi_sharp(zeta)|| exceeds ||Delta(zeta)|| by {excess[worst]:.2e} at node {worst} "
            f"(zeta = exp(2 pi i * {worst}/{N}))")
    return out


def build_badly_approximable_matrix(Delta: TrigSymbol, Phi_sharp: TrigSymbol, V: TrigSymbol,
                                    W: TrigSymbol, k: int | None = None,
                                    **extra) -> tuple[TrigSymbol, FactorizationBundle]:
    """``Phi = W* diag(Delta, Phi_sharp) V*`` after checking the bundle
    conditions (unitary V, W with analytic leading columns, d^-1 Delta
    unitary, ``||Phi_sharp|| <= ||Delta||`` pointwise)."""
    k = Delta.rows if k is None else k
    if Delta.shape != (k, k):
        raise FactorizationError("Delta must be k x k")
    n = k + Phi_sharp.rows
    if V.shape != (n, n) or W.shape != (n, n):
        raise FactorizationError(f"V and W must be {n} x {n}")
    b = FactorizationBundle(k, V, W, Delta, Phi_sharp, **extra)
    b.diagnostics = verify_bundle(b)
    Phi = b.assemble()
    Phi = Phi.trim(TRIM * max(float(np.max(np.abs(Phi.coeffs))), 1e-300))
    return Phi, b


def parametrize_best_approximants(bundle: FactorizationBundle, R_sharp: TrigSymbol,
                                  tol: float = 1e-8) -> TrigSymbol:
    """``R = Q + W* diag(0, R_sharp) V*`` for analytic R_sharp with
    ``||Phi_sharp - R_sharp|| <= ||Delta||`` pointwise."""
    if not R_sharp.is_analytic():
        raise FactorizationError("R_sharp must be analytic")
    if R_sharp.shape != bundle.Phi_sharp.shape:
        raise FactorizationError("R_sharp has the wrong shape")
    N = _grid_for(bundle.Delta, bundle.Phi_sharp, R_sharp, minimum=512).N
    d = pointwise_norm(bundle.Delta.samples(N), "operator")
    e = pointwise_norm(bundle.Phi_sharp.samples(N) - R_sharp.samples(N), "operator")
    worst = int(np.argmax(e - d))
    if e[worst] - d[worst] > tol:
        raise FactorizationError(
            f"bound ||Phi_sharp - R_sharp|| <= ||Delta|| fails by {e[worst] - d[worst]:.2e} "
            f"at node {worst} of {N}")
    zero = TrigSymbol.zeros(bundle.k, bundle.k)
    shift = bundle.W.H @ block_diag(zero, R_sharp) @ bundle.V.H
    shift = shift.trim(TRIM * max(float(np.max(np.abs(shift.coeffs))), 1e-300))
    if not shift.is_analytic(1e-9):
        raise FactorizationError("W* diag(0, R_sharp) V* is not analytic; check the balanced structure")
    shift = shift.window(0, max(shift.kmax, 0))
    return shift if bundle.Q is None else bundle.Q + shift


# ---------------------------------------------------------------------------
# scalar AAK step
# ---------------------------------------------------------------------------

@dataclass
class NehariScalarResult:
    approximant: TrigSymbol
    error: float
    residual: float
    singular_vectors: tuple[np.ndarray, np.ndarray] | None = None


def reduced_nehari_scalar(psi: TrigSymbol, N: int | None = None,
                          degree: int | None = None, band_tol: float = 1e-14) -> NehariScalarResult:
    """Best L^infinity analytic approximant of a scalar symbol with finitely
    many negative frequencies.

    The Hankel matrix ``[psi_{-(i+j+1)}]`` gives the error as its top singular
    value sigma; with ``Gamma eta = sigma xi`` the approximant is
    ``psi - sigma xi_- / eta`` where ``eta = sum eta_j z^j`` and
    ``xi_- = sum xi_i zbar^{i+1}``.
    """
    if psi.shape != (1, 1):
        raise FactorizationError("reduced_nehari_scalar expects a scalar symbol")
    scale = max(float(np.max(np.abs(psi.coeffs))), 1e-300)
    band = 0
    for k in range(psi.kmin, 0):
        if abs(psi.coeff(k)[0, 0]) > band_tol * scale:
            band = -k
            break
    if band == 0:
        return NehariScalarResult(psi, 0.0, 0.0)
    c = np.array([psi.coeff(-r)[0, 0] for r in range(1, band + 1)])
    Gam = np.array([[c[i + j] if i + j < band else 0.0 for j in range(band)] for i in range(band)])
    U, s, Vh = np.linalg.svd(Gam)
    sigma = float(s[0])
    xi, eta = U[:, 0], np.conj(Vh[0])
    N = N or CircleGrid.at_least(max(2048, 4 * psi.degree + 4)).N
    zeta = CircleGrid(N).nodes
    eta_v = np.polyval(eta[::-1], zeta)
    xim_v = np.polyval(xi[::-1], np.conj(zeta)) * np.conj(zeta)
    if np.min(np.abs(eta_v)) <= 1e-12 * np.max(np.abs(eta_v)):
        raise FactorizationError("maximizing vector vanishes on the circle; AAK quotient undefined")
    err_v = sigma * xim_v / eta_v
    g_v = psi.samples(N)[:, 0, 0] - err_v
    degree = degree or N // 4
    g = analytic_from_samples(g_v[:, None, None], degree, "AAK approximant", tol=1e-8, scale=scale)
    res = float(np.max(np.abs(psi.samples(N)[:, 0, 0] - g.samples(N)[:, 0, 0])))
    return NehariScalarResult(g, sigma, abs(res - sigma), (xi, eta))
