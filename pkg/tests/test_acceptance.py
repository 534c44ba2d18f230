"""Acceptance criteria, one test per criterion, at the stated tolerances."""
import time

import numpy as np
import pytest

from lpnehari.approx import (SolverOptions, certify, distance_function, hankel_plateau,
                             order_estimate, respectability_test)
from lpnehari.circle import (CircleGrid, ExponentTriple, TrigSymbol, blaschke, diag, lp_norm,
                             poly, riesz_project, z)
from lpnehari.factorize import (FactorizationError, badly_approximable_scalar,
                                build_badly_approximable_matrix, fg_factor, trace_norm_rank_oracle,
                                parametrize_best_approximants, reduced_nehari_scalar,
                                sarason_factor, thematic_complete_2)
from lpnehari.spectral import spectral_factor
from lpnehari.superopt import superoptimal_2x2, uniqueness_probe
from lpnehari.weird import badly_approximable_evidence, construct_weird_U, weirdness_evidence

P4 = ExponentTriple(4.0)
CERTIFICATES = []   # (symbol, certificate) pairs emitted in this module


def _certify(Phi, exponents, opts=None, **kw):
    cert = certify(Phi, exponents, opts, **kw)
    CERTIFICATES.append((Phi, cert))
    return cert


def _check(record, number, title, checks: dict, detail: str):
    ok = all(checks.values())
    record(number, title, ok, detail)
    failed = [k for k, v in checks.items() if not v]
    assert ok, f"failed checks: {failed}; {detail}"


def _column(*entries):
    return TrigSymbol.from_entries([[e] for e in entries])


V_COL = _column(poly([0.5, 0.5]), poly([0.5, -0.5]))
W_COL = _column(poly([0.5, 0.5j]), poly([0.5, -0.5j]))


def test_criterion_01_scalar_nehari_identity(acceptance_line):
    t0 = time.time()
    h = poly([1.0, 0.5])
    phi = badly_approximable_scalar(TrigSymbol.constant(1.0), h, P4)
    target = 1.25 ** 0.25
    opts = SolverOptions(degrees=(32,), grid=512)
    cert = _certify(phi, P4, opts)
    sweep = hankel_plateau(phi, 1, P4, opts, degrees=(16, 32), Psi=cert.Psi)
    dt = time.time() - t0
    checks = {
        "primal": abs(cert.primal - target) <= 1e-3 * target,
        "dual": abs(cert.dual - target) <= 1e-3 * target,
        "plateau": abs(sweep.value - target) <= 1e-2 * target,
        "time": dt < 30,
    }
    _check(acceptance_line, 1, "scalar Nehari-Lp identity", checks,
           f"primal {cert.primal:.8f} dual {cert.dual:.8f} plateau {sweep.value:.8f} "
           f"target {target:.8f} ({dt:.1f}s)")


def _random_outer(rng, degree):
    roots = [(1.5 + 2 * rng.random()) * np.exp(2j * np.pi * rng.random()) for _ in range(degree)]
    c = np.poly(roots)[::-1]             # prod (z - r), lowest degree first
    return poly(c / c[0])


def test_criterion_02_badly_approximable_round_trip(acceptance_line):
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst_dist, worst_mod = 0.0, 0.0
    for _ in range(5):
        nz = int(rng.integers(0, 3))
        zeros = [0.6 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()) for _ in range(nz)]
        theta = blaschke(zeros) if zeros else TrigSymbol.constant(1.0)
        h = _random_outer(rng, int(rng.integers(1, 4)))
        phi = badly_approximable_scalar(theta, h, P4)
        grid = CircleGrid(1024)
        target = np.abs(h.samples(grid.N)[:, 0, 0]) ** (2 / P4.p)
        worst_mod = max(worst_mod, float(np.max(np.abs(np.abs(phi.samples(grid.N)[:, 0, 0]) - target))))
        nrm = lp_norm(phi, P4.p, grid)
        cert = _certify(phi, P4, SolverOptions(degrees=(16, 32)))
        worst_dist = max(worst_dist, abs(cert.primal - nrm) / nrm)
    dt = time.time() - t0
    checks = {"distance": worst_dist <= 1e-3, "modulus": worst_mod <= 1e-6, "time": dt < 60}
    _check(acceptance_line, 2, "badly approximable round trip", checks,
           f"max rel distance error {worst_dist:.2e}, max modulus error {worst_mod:.2e} ({dt:.1f}s)")


def test_criterion_03_respectable_control(acceptance_line):
    t0 = time.time()
    Phi = diag(z(-1), 0)
    cert = _certify(Phi, P4)
    verdict = respectability_test(Phi, P4, certificate=cert)
    grid = CircleGrid(512)
    d0 = distance_function(Phi, TrigSymbol.zeros(2, 2), grid)
    d1 = distance_function(Phi, diag(0, z(1) * 0.5), grid)
    order = order_estimate(Phi, P4, certificate=cert)
    dt = time.time() - t0
    checks = {
        "distance": abs(cert.primal - 1) <= 1e-4 and abs(cert.dual - 1) <= 1e-4,
        "verdict": verdict.verdict == "respectable",
        "d_profiles": float(np.max(np.abs(d0 - d1))) <= 1e-6,
        "order": order.order == 1,
        "time": dt < 60,
    }
    _check(acceptance_line, 3, "respectable control", checks,
           f"distance {cert.primal:.8f}, verdict {verdict.verdict}, order {order.order} ({dt:.1f}s)")


def test_criterion_04_weird_function(acceptance_line):
    t0 = time.time()
    recipe = construct_weird_U()
    dg = recipe.diagnostics
    opts = SolverOptions(degrees=(16, 32, 64), tol_gap=1e-3)
    bad = badly_approximable_evidence(recipe, P4, opts)
    CERTIFICATES.append((recipe.U, bad.certificate))
    ev = weirdness_evidence(recipe.U, P4, sweep=(16, 32, 64), restarts=20, tol_gap=1e-3,
                            distance=bad.distance)
    dt = time.time() - t0
    per_degree = {M: r.best_value for M, r in ev.k1.table.items()}
    checks = {
        "unitary": dg["unitarity_residual"] <= 1e-8,
        "AUinv": max(dg["AUinv_nonpositive_residual"], dg["AUinv_minus_zQ"]) <= 1e-8,
        "distance": abs(bad.distance - 1) <= 1e-3 and abs(bad.dual - 1) <= 1e-3,
        "k2": ev.k2.value >= 0.99,
        "k1_every_degree": set(per_degree) == {16, 32, 64} and all(v <= 0.999 for v in per_degree.values()),
        "restarts": all(len(r.restart_values) >= 20 for r in ev.k1.table.values()),
        "order": ev.order == 2,
        "time": dt < 600,
    }
    _check(acceptance_line, 4, "weird function demonstration", checks,
           f"distance {bad.distance:.8f}, k=1 plateau {ev.k1.value:.10f} (margin {ev.margin:.3e}), "
           f"k=2 {ev.k2.value:.8f}, order {ev.order} ({dt:.1f}s)")


def test_criterion_05_sarason_fg(acceptance_line):
    t0 = time.time()
    rng = np.random.default_rng(5)
    N = 1024
    worst_res, worst_prod, violations, eq_nodes = 0.0, 0.0, 0, 0
    for _ in range(5):
        c = 0.3 * (rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))) / np.sqrt(2)
        c[0] += np.eye(2)
        Psi = TrigSymbol(c, 0)
        pair = sarason_factor(Psi)
        fg = fg_factor(Psi, P4)
        worst_res = max(worst_res, pair.residuals["QR"], fg.residual)
        worst_prod = max(worst_prod, fg.product_defect)
        for A, B in ((pair.Q, pair.R), (fg.F, fg.G)):
            o = trace_norm_rank_oracle(A.samples(N), B.samples(N), tol=1e-8)
            violations += o["violations"]
            eq_nodes += o["equality_nodes"]
    for _ in range(3):
        f = TrigSymbol(rng.standard_normal((2, 2, 1)) + 1j * rng.standard_normal((2, 2, 1)), 0)
        g = TrigSymbol(rng.standard_normal((2, 1, 2)) + 1j * rng.standard_normal((2, 1, 2)), 0)
        fg = fg_factor(f @ g, P4)
        worst_res = max(worst_res, fg.residual)
        worst_prod = max(worst_prod, fg.product_defect)
        o = trace_norm_rank_oracle(fg.F.samples(N), fg.G.samples(N), tol=1e-8)
        violations += o["violations"]
        eq_nodes += o["equality_nodes"]
    dt = time.time() - t0
    checks = {"residual": worst_res <= 1e-7, "norm_product": worst_prod <= 1e-6,
              "rank_oracle": violations == 0, "time": dt < 60}
    _check(acceptance_line, 5, "Sarason and FG factorizations", checks,
           f"max residual {worst_res:.2e}, max norm-product defect {worst_prod:.2e}, "
           f"{eq_nodes} equality nodes, {violations} rank violations ({dt:.1f}s)")


def test_criterion_06_spectral_factorization(acceptance_line):
    t0 = time.time()
    B = diag(poly([0.5, 1.25, 0.5], -1), 1.0)
    Psi = spectral_factor(B)
    expected = diag(poly([1.0, 0.5]), 1.0)
    err = float(np.max(np.abs(Psi.window(0, 4).coeffs - expected.window(0, 4).coeffs)))
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(3):
        A = TrigSymbol(rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2)), -1)
        Br = A.H @ A + TrigSymbol.constant(0.1 * np.eye(2))
        _, dg = spectral_factor(Br, return_diagnostics=True)
        worst = max(worst, dg.residual)
    dt = time.time() - t0
    checks = {"recover": err <= 1e-7, "random_residual": worst <= 1e-8, "time": dt < 60}
    _check(acceptance_line, 6, "spectral factorization", checks,
           f"coefficient error {err:.2e}, random residual {worst:.2e} ({dt:.1f}s)")


def test_criterion_07_matrix_generator_and_parametrization(acceptance_line):
    t0 = time.time()
    h = poly([1.0, 0.5])
    Delta = badly_approximable_scalar(TrigSymbol.constant(1.0), h, P4)
    Phi_sharp = poly([0.5], -2)
    V = thematic_complete_2(V_COL)
    W = thematic_complete_2(W_COL).T
    Phi, bundle = build_badly_approximable_matrix(Delta, Phi_sharp, V, W)
    grid = CircleGrid(1024)
    norm = lp_norm(Phi, P4.p, grid)
    cert = _certify(Phi, P4, SolverOptions(degrees=(16, 32)))
    worst_alt = 0.0
    for R_sharp in (poly([0.15]), poly([0.0, 0.1]), poly([0.1, 0.0, -0.05])):
        R = parametrize_best_approximants(bundle, R_sharp)
        if not R.is_analytic():
            worst_alt = np.inf
        alt = lp_norm(Phi - R, P4.p, grid)
        worst_alt = max(worst_alt, abs(alt - cert.primal) / cert.primal)
    try:
        parametrize_best_approximants(bundle, poly([2.0]))
        rejected = False
    except FactorizationError:
        rejected = True
    dt = time.time() - t0
    checks = {"distance": abs(cert.primal - norm) <= 1e-3 * norm, "alternates": worst_alt <= 1e-3,
              "inadmissible_rejected": rejected, "time": dt < 120}
    _check(acceptance_line, 7, "matrix generator and parametrization", checks,
           f"distance {cert.primal:.8f} vs norm {norm:.8f}, alternates rel error {worst_alt:.2e}, "
           f"inadmissible rejected {rejected} ({dt:.1f}s)")


def test_criterion_08_scalar_aak(acceptance_line):
    t0 = time.time()
    e1 = reduced_nehari_scalar(poly([1.0, 2.0], -2)).error
    c = 0.7 - 2.1j
    e2 = reduced_nehari_scalar(poly([c], -1)).error
    dt = time.time() - t0
    checks = {"two_term": abs(e1 - (1 + np.sqrt(2))) <= 1e-10, "monomial": abs(e2 - abs(c)) <= 1e-12,
              "time": dt < 1}
    _check(acceptance_line, 8, "scalar AAK step", checks,
           f"error {e1:.15f} vs 1+sqrt2, |c| error {abs(e2 - abs(c)):.1e} ({dt:.2f}s)")


def test_criterion_09_superoptimal(acceptance_line):
    t0 = time.time()
    V = thematic_complete_2(V_COL)
    W = thematic_complete_2(W_COL).T
    Phi, _ = build_badly_approximable_matrix(z(-1), poly([0.3, 0.6], -2), V, W)
    rep = superoptimal_2x2(Phi, P4)
    CERTIFICATES.append((Phi, rep.certificate))
    probe = uniqueness_probe(rep, Phi)
    dt = time.time() - t0
    tau1 = rep.tau[1]
    checks = {
        "flat": rep.flatness <= 1e-2,
        "tau1_vs_aak": abs(tau1 - rep.reduced.error) <= 1e-2 * rep.reduced.error,
        "perturbations_increase": probe.all_increase,
        "nontrivial": rep.reduced.error > 0.1,
        "time": dt < 300,
    }
    _check(acceptance_line, 9, "superoptimal pipeline", checks,
           f"tau {rep.tau}, AAK error {rep.reduced.error:.10f}, flatness {rep.flatness:.1e}, "
           f"min perturbation increase {min(probe.increases):.2e} ({dt:.1f}s)")


def test_criterion_10_core_properties(acceptance_line):
    t0 = time.time()
    rng = np.random.default_rng(10)
    # projections
    proj_ok = True
    for _ in range(20):
        S = TrigSymbol(rng.standard_normal((9, 2, 3)) + 1j * rng.standard_normal((9, 2, 3)), -4)
        plus, minus = riesz_project(S, "plus"), riesz_project(S, "minus")
        proj_ok &= np.array_equal((plus + minus).window(-4, 4).coeffs, S.coeffs)
        proj_ok &= np.array_equal(riesz_project(plus, "plus").coeffs, plus.coeffs)
        proj_ok &= np.array_equal(riesz_project(minus, "minus").coeffs, minus.coeffs)
        proj_ok &= riesz_project(plus, "minus").is_zero(0.0)
    # Parseval
    parseval = 0.0
    for _ in range(20):
        c = rng.standard_normal(17) + 1j * rng.standard_normal(17)
        S = TrigSymbol(c, -8)
        lhs = float(np.mean(np.abs(S.samples(64)[:, 0, 0]) ** 2))
        parseval = max(parseval, abs(lhs - float(np.sum(np.abs(c) ** 2))) / float(np.sum(np.abs(c) ** 2)))
    # Hoelder chain
    holder_ok = True
    grid = CircleGrid(256)
    for _ in range(100):
        ex = ExponentTriple(float(rng.uniform(2.0, 12.0)))
        Phi = TrigSymbol(rng.standard_normal((7, 2, 2)) + 1j * rng.standard_normal((7, 2, 2)), -3)
        f = TrigSymbol(rng.standard_normal((4, 2, 1)) + 1j * rng.standard_normal((4, 2, 1)), 0)
        g = TrigSymbol(rng.standard_normal((4, 2, 1)) + 1j * rng.standard_normal((4, 2, 1)), -4)
        Pv, fv, gv = Phi.samples(grid.N), f.samples(grid.N), g.samples(grid.N)
        pairing = abs(np.mean(np.einsum("ni,nij,nj->n", np.conj(gv[:, :, 0]), Pv, fv[:, :, 0])))
        integral = np.mean(np.abs(np.einsum("ni,nij,nj->n", np.conj(gv[:, :, 0]), Pv, fv[:, :, 0])))
        bound = lp_norm(Phi, ex.p, grid) * lp_norm(f, ex.q, grid) * lp_norm(g, 2.0, grid)
        holder_ok &= pairing <= integral * (1 + 1e-12) and integral <= bound * (1 + 1e-12)
    # homogeneity and translation invariance
    phi = poly([1.0, 2.0], -2)
    base = _certify(phi, P4).primal
    c = 1.7 - 0.4j
    scaled = _certify(phi * c, P4).primal
    shifted = _certify(phi + poly([0.3, 0.5, -0.2]), P4).primal
    homog = abs(scaled - abs(c) * base) / (abs(c) * base)
    trans = abs(shifted - base) / base
    # weak duality on every certificate emitted in this module
    duality_ok = True
    for S, cert in CERTIFICATES:
        chk = cert.recheck(S)
        duality_ok &= bool(chk["weak_duality"]) and bool(chk["dual_feasible"])
    dt = time.time() - t0
    checks = {"projections": bool(proj_ok), "parseval": parseval <= 1e-12, "holder": bool(holder_ok),
              "weak_duality": duality_ok and len(CERTIFICATES) > 0, "homogeneity": homog <= 2e-3,
              "translation": trans <= 2e-3, "time": dt < 60}
    _check(acceptance_line, 10, "core property suite", checks,
           f"Parseval {parseval:.1e}, homogeneity {homog:.1e}, translation {trans:.1e}, "
           f"{len(CERTIFICATES)} certificates rechecked ({dt:.1f}s)")
