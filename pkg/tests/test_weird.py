from types import SimpleNamespace

import numpy as np
import pytest

from lpnehari import weird
from lpnehari.approx import SolverOptions
from lpnehari.circle import ExponentTriple, TrigSymbol, diag, lp_norm, poly, singular_values, z
from lpnehari.weird import (RecipeError, check_recipe, construct_weird_U, default_recipe,
                            explicit_dual_extremal, rank_one_obstruction, recipe_matrix,
                            weirdness_evidence)

P4 = ExponentTriple(4.0)


@pytest.fixture(scope="module")
def recipe():
    return construct_weird_U()


@pytest.mark.parametrize("alpha, beta, match", [
    (poly([1 / 16, 0, 0.5, 0, 1 / 16], -2), TrigSymbol.constant(0.1), "dependent"),
    (TrigSymbol.constant(0.5), TrigSymbol.constant(0.0), "dependent"),
    (poly([1 / 16, 0, 0.5, 0, 1 / 16], -2), poly([0, 0.5]), "minimum"),
    (poly([0.1j, 0.5]), poly([0, 0.1]), "real"),
])
def test_recipe_rejections(alpha, beta, match):
    with pytest.raises(RecipeError, match=match):
        check_recipe(alpha, beta)


def test_default_recipe_margins():
    r = default_recipe()
    # alpha (1 - alpha) - |beta|^2 >= 1/4 - 1/64 - 1/64 = 14/64 at cos 2theta = +-1
    assert r.diagnostics["min_det"] == pytest.approx(14 / 64, abs=1e-12)
    assert r.diagnostics["gram_sigma_min"] > 1e-2


def test_rank_one_obstruction_positive_and_control():
    assert rank_one_obstruction(recipe_matrix(*_default_ab())) > 0.1
    # a scalar B = I/2 is normalized by C = 2 x x*, so the obstruction vanishes
    assert rank_one_obstruction(diag(0.5, 0.5)) < 1e-3


def _default_ab():
    r = default_recipe()
    return r.alpha, r.beta


def test_pipeline_residuals(recipe):
    d = recipe.diagnostics
    assert d["psi_residual"] < 1e-10 and d["q_residual"] < 1e-10
    assert d["unitarity_residual"] < 1e-12
    assert d["AUinv_nonpositive_residual"] < 1e-12
    assert d["AUinv_minus_zQ"] < 1e-10
    assert d["tail_mass"] < 1e-14
    assert d["commutation_identity"] < 1e-7
    assert d["commutation_random"] < 1e-7


def test_U_unitary_valued_and_dual_extremal(recipe):
    U, N = recipe.U, 512
    assert lp_norm(U, 4.0) == pytest.approx(1.0, abs=1e-12)
    Z = explicit_dual_extremal(recipe).samples(N)
    # unit trace norm at every point and trace pairing one with U
    assert np.allclose(np.sum(singular_values(Z), axis=1), 1.0, atol=1e-10)
    pair = np.mean(np.trace(U.samples(N) @ Z, axis1=1, axis2=2))
    assert pair.real == pytest.approx(1.0, abs=1e-10) and abs(pair.imag) < 1e-10


def _fake_plateau(values):
    def fake(U, k, exponents, opts):
        v = values[k]
        table = {deg: SimpleNamespace(best_value=x) for deg, x in zip(opts.degrees, v)}
        return SimpleNamespace(value=max(v), table=table)
    return fake


@pytest.mark.parametrize("k1, k2, gap, match, verdict, order", [
    ([0.990, 0.9963, 0.9963], [1.0] * 3, 1e-3, 1e-2, "weird-evidence", 2),
    ([0.999, 1.0, 1.0], [1.0] * 3, 1e-3, 1e-2, "respectable", 1),
    # a plateau above the gap threshold counts as respectable when tol_gap < tol_match
    ([0.995, 0.9995, 0.9995], [1.0] * 3, 1e-3, 1e-2, "respectable", 1),
    ([0.997] * 3, [1.0] * 3, 5e-3, 1e-3, "inconclusive", 2),
    ([0.9, 0.9, 0.9], [0.95] * 3, 1e-3, 1e-2, "inconclusive", None),
])
def test_verdict_logic(monkeypatch, k1, k2, gap, match, verdict, order):
    monkeypatch.setattr(weird, "hankel_plateau", _fake_plateau({1: k1, 2: k2}))
    ev = weirdness_evidence(z(-1), P4, sweep=(16, 32, 64), tol_gap=gap, tol_match=match,
                            order_tol=1e-3)
    assert ev.verdict == verdict and ev.order == order


def test_respectable_control_is_not_weird():
    ev = weirdness_evidence(diag(z(-1), 0), P4, sweep=(8, 16), restarts=4)
    assert ev.verdict == "respectable" and ev.order == 1
    assert len(ev.plateau_table()) >= 4
