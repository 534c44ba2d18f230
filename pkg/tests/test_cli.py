import json
import math

import numpy as np
import pytest

from lpnehari.circle import TrigSymbol, dump_symbol, poly
from lpnehari.cli import EXIT_ERROR, EXIT_OK, main, parse_poly


@pytest.mark.parametrize("text, kmin, coeffs", [
    ("1+0.5z", 0, [1, 0.5]),
    ("z^2-0.25", 0, [-0.25, 0, 1]),
    ("2zbar + zbar^2", -2, [1, 2]),
    ("z^-1", -1, [1]),
    ("(1+2j)z", 1, [1 + 2j]),
    ("−0.5 + i z", 0, [-0.5, 1j]),
])
def test_parse_poly(text, kmin, coeffs):
    s = parse_poly(text).trim(0.0)
    assert s.kmin == kmin
    assert np.allclose(s.coeffs[:, 0, 0], coeffs)


@pytest.mark.parametrize("text", ["", "1+", "z^", "abc"])
def test_parse_poly_rejects(text):
    with pytest.raises(ValueError):
        parse_poly(text)


def _run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_dist_zbar(tmp_path):
    code, doc = _run(tmp_path, "dist", "--symbol", "zbar", "--degrees", "4,8")
    assert code == EXIT_OK and doc["status"] == "certified"
    assert doc["result"]["primal"] == pytest.approx(1.0, abs=1e-8)
    assert doc["config"]["command"] == "dist" and doc["config"]["p"] == 4.0
    assert doc["provenance"]


def test_generate_then_dist_round_trip(tmp_path):
    code, doc = _run(tmp_path, "generate", "bad-scalar", "--outer-h", "1+0.5z", name="gen.json")
    assert code == EXIT_OK
    sym = tmp_path / "sym.json"
    sym.write_text(json.dumps(doc["result"]["symbol"]))
    code, dist = _run(tmp_path, "dist", "--symbol", str(sym), "--degrees", "8,16")
    assert code == EXIT_OK
    # |phi| = |1 + z/2|^{1/2}, so the norm is (5/4)^{1/4}
    assert dist["result"]["primal"] == pytest.approx(1.25 ** 0.25, rel=1e-6)


def test_output_is_deterministic(tmp_path):
    argv = ["dist", "--symbol", "2zbar+zbar^2", "--degrees", "4,8", "--seed", "3"]
    main([*argv, "--out", str(tmp_path / "a.json")])
    main([*argv, "--out", str(tmp_path / "b.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_csv_profile(tmp_path):
    csv = tmp_path / "d.csv"
    code = main(["dist", "--symbol", "zbar", "--degrees", "4", "--out", str(tmp_path / "o.json"),
                 "--csv", str(csv)])
    assert code == EXIT_OK
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("node,theta,distance_function") and len(lines) > 8


def test_factor_thematic(tmp_path):
    v = TrigSymbol.from_entries([[poly([0.5, 0.5])], [poly([0.5, -0.5])]])
    path = tmp_path / "v.json"
    dump_symbol(v, str(path))
    code, doc = _run(tmp_path, "factor", "thematic2", "--symbol", str(path))
    assert code == EXIT_OK and doc["result"]["unitarity_defect"] < 1e-12


@pytest.mark.parametrize("argv", [
    ["dist", "--symbol", "zbar", "--grid", "100"],
    ["dist", "--symbol", "zbar", "--p", "1.5"],
    ["dist", "--symbol", "no such file.json"],
    ["generate", "bad-scalar", "--outer-h", "0.5+z"],
])
def test_errors_exit_one(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path / "x.json")]) == EXIT_ERROR == 1


def test_schema_error_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rows": 1, "cols": 1, "entries": [[{"coeffs": [[0.5, 1, 0]]}]]}))
    assert main(["dist", "--symbol", str(bad)]) == EXIT_ERROR
    assert "$.entries[0][0].coeffs[0]" in capsys.readouterr().err
