"""Command-line front end.

Every command writes one JSON document (stdout or ``--out``) that embeds the
full run configuration.  Exit codes: 0 success, 2 inconclusive, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .approx import (SolverOptions, certify, distance_function, gender_estimate,
                     order_estimate, respectability_test, InconclusiveSearchError)
from .circle import (CircleGrid, ExponentTriple, TrigSymbol, SymbolSchemaError, blaschke,
                     load_symbol, lp_norm, symbol_from_json)
from .factorize import (FactorizationError, badly_approximable_scalar,
                        build_badly_approximable_matrix, fg_factor, rank_one_factor,
                        sarason_factor, sarason_residuals, thematic_complete_2, unitarity_defect)
from .spectral import spectral_factor
from .superopt import superoptimal_2x2, uniqueness_probe
from .weird import (WEIRD_TOL, badly_approximable_evidence, construct_weird_U, default_recipe,
                    weirdness_evidence)

LOGGER = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2

PROVENANCE = {
    "dist": ["Lp Nehari identity", "trace-pairing duality certificate"],
    "respectable": ["respectable/weird dichotomy", "rank-one dual extremal criterion"],
    "order": ["matrix-space Hankel operators", "order and gender"],
    "generate bad-scalar": ["badly approximable scalar characterization"],
    "generate bad-matrix": ["balanced factorization of badly approximable matrices"],
    "weird-demo": ["weird badly approximable unitary function"],
    "superopt": ["p-superoptimal approximation", "constant second singular value"],
    "factor spectral": ["Wiener-Masani spectral factorization"],
    "factor sarason": ["Sarason factorization of analytic matrix functions"],
    "factor fg": ["norm-preserving FG factorization"],
    "factor rank1": ["rank-one factorization"],
    "factor thematic2": ["thematic completion"],
}


# ---------------------------------------------------------------------------
# polynomial literals
# ---------------------------------------------------------------------------

_TERM = re.compile(r"""
    (?P<sign>[+-])?\s*
    (?P<coef>\([^)]*\)|[0-9.]+(?:[eE][+-]?[0-9]+)?[ij]?|[ij])?\s*\*?\s*
    (?P<var>zbar|z)?
    (?:\s*\^\s*(?P<pow>\(?-?[0-9]+\)?))?
    """, re.VERBOSE)


def parse_poly(text: str) -> TrigSymbol:
    """Scalar symbol from a literal such as ``"1+0.5z"``, ``"z^2-0.25"``,
    ``"2zbar + zbar^2"`` or ``"(1+2j) z^-1"``."""
    s = text.replace("−", "-").replace("**", "^").strip()
    if not s:
        raise ValueError("empty polynomial literal")
    terms: dict[int, complex] = {}
    pos = 0
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos or not (m.group("coef") or m.group("var")):
            raise ValueError(f"cannot parse polynomial literal {text!r} at position {pos}")
        sign = -1.0 if m.group("sign") == "-" else 1.0
        coef = m.group("coef")
        if coef is None:
            c = 1.0
        else:
            coef = coef.strip("()").replace("i", "j")
            c = complex(coef if coef not in ("j",) else "1j")
        var = m.group("var")
        power = int(m.group("pow").strip("()")) if m.group("pow") else 1
        if var is None:
            if m.group("pow"):
                raise ValueError(f"exponent without variable in {text!r}")
            k = 0
        else:
            k = -power if var == "zbar" else power
        terms[k] = terms.get(k, 0) + sign * c
        pos = m.end()
    return TrigSymbol.from_dict({k: np.array([[v]]) for k, v in terms.items()})


def parse_complex_list(text: str) -> list[complex]:
    """JSON list whose items are numbers, ``[re, im]`` pairs or strings
    accepted by :class:`complex`."""
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("expected a JSON list")
    out = []
    for x in data:
        if isinstance(x, list):
            out.append(complex(x[0], x[1]))
        elif isinstance(x, str):
            out.append(complex(x.replace("i", "j")))
        else:
            out.append(complex(x))
    return out


def symbol_arg(spec: str) -> TrigSymbol:
    """A symbol JSON file path or an inline scalar literal."""
    if spec.endswith(".json"):
        return load_symbol(spec)
    return parse_poly(spec)


def _symbol_field(value, path: str) -> TrigSymbol:
    if isinstance(value, str):
        return parse_poly(value)
    return symbol_from_json(value, path)


# ---------------------------------------------------------------------------
# config and output
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    p: float
    grid: int | None
    degrees: list[int] | None
    restarts: int | None
    seed: int
    tol_gap: float | None
    tol_match: float | None
    tol_flat: float
    options: dict = field(default_factory=dict)

    def solver_options(self, **defaults) -> SolverOptions:
        kw = dict(defaults)
        if self.degrees:
            kw["degrees"] = tuple(self.degrees)
        if self.grid is not None:
            kw["grid"] = self.grid
        if self.restarts is not None:
            kw["restarts"] = self.restarts
        if self.tol_gap is not None:
            kw["tol_gap"] = self.tol_gap
        if self.tol_match is not None:
            kw["tol_match"] = self.tol_match
        kw["seed"] = self.seed
        return SolverOptions(**kw)

    def to_json_dict(self) -> dict:
        return asdict(self)


def _plain(x):
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, TrigSymbol):
        return x.to_json_dict(tol=1e-15)
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def dumps(doc: dict) -> str:
    """Deterministic JSON: sorted keys, plain Python scalars."""
    return json.dumps(_plain(doc), sort_keys=True, indent=2, allow_nan=False)


def _emit(args, cfg: RunConfig, result: dict, status: str, rows: list[dict] | None = None) -> None:
    doc = {"config": cfg.to_json_dict(), "provenance": PROVENANCE.get(cfg.command, []),
           "status": status, "result": result}
    text = dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if args.csv:
        rows = rows or []
        with open(args.csv, "w", newline="") as fh:
            if rows:
                wr = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
                wr.writeheader()
                wr.writerows(_plain(rows))


def _node_rows(N: int, **cols) -> list[dict]:
    th = CircleGrid(N).theta
    rows = []
    for j in range(N):
        r = {"node": j, "theta": float(th[j])}
        for name, vals in cols.items():
            if vals is not None:
                r[name] = float(vals[j])
        rows.append(r)
    return rows


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_dist(args, cfg: RunConfig) -> int:
    Phi = symbol_arg(args.symbol)
    cert = certify(Phi, ExponentTriple(cfg.p), cfg.solver_options())
    chk = cert.recheck(Phi)
    res = {"primal": cert.primal, "dual": cert.dual, "gap": cert.gap, "degree": cert.degree,
           "recheck": chk, "certificate": cert.to_json_dict()}
    ok = cert.status == "certified" and chk["weak_duality"] and chk["dual_feasible"]
    d = distance_function(Phi, cert.Q, cert.grid)
    _emit(args, cfg, res, cert.status, _node_rows(cert.grid.N, distance_function=d))
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_respectable(args, cfg: RunConfig) -> int:
    Phi = symbol_arg(args.symbol)
    v = respectability_test(Phi, ExponentTriple(cfg.p), cfg.solver_options())
    N = v.certificate.grid.N
    rows = _node_rows(N, det=v.det_profile, sigma_ratio=v.sigma_ratio_profile)
    _emit(args, cfg, v.to_json_dict(), v.verdict, rows)
    return EXIT_INCONCLUSIVE if v.verdict == "inconclusive" else EXIT_OK


def cmd_order(args, cfg: RunConfig) -> int:
    Phi = symbol_arg(args.symbol)
    ex, opts = ExponentTriple(cfg.p), cfg.solver_options()
    cert = certify(Phi, ex, opts)
    est = order_estimate(Phi, ex, opts, certificate=cert)
    res = {"order": est.to_json_dict(), "distance": cert.primal}
    status = "inconclusive" if est.flagged else "ok"
    if args.gender:
        try:
            res["gender"] = gender_estimate(Phi, ex, opts, certificate=cert).to_json_dict()
        except InconclusiveSearchError as e:
            res["gender"] = {"error": str(e)}
            status = "inconclusive"
    rows = [{"k": k, "degree": M, "seed": int(s), "value": float(val)}
            for k, sw in est.sweeps.items() for M, rep in sw.table.items()
            for s, val in zip(rep.seeds, rep.restart_values)]
    _emit(args, cfg, res, status, rows)
    return EXIT_OK if status == "ok" else EXIT_INCONCLUSIVE


def cmd_generate(args, cfg: RunConfig) -> int:
    ex = ExponentTriple(cfg.p)
    if args.kind == "bad-scalar":
        zeros = parse_complex_list(args.inner_zeros)
        theta = blaschke(zeros) if zeros else TrigSymbol.constant(1.0)
        h = parse_poly(args.outer_h)
        phi = badly_approximable_scalar(theta, h, ex)
        res = {"symbol": phi.to_json_dict(tol=1e-15), "inner_zeros": zeros,
               "outer_h": h.to_json_dict(), "lp_norm": lp_norm(phi, cfg.p),
               "truncation": phi.truncation}
        _emit(args, cfg, res, "ok")
        return EXIT_OK
    with open(args.recipe) as fh:
        rec = json.load(fh)
    Delta = _symbol_field(rec["Delta"], "$.Delta")
    Phi_sharp = _symbol_field(rec["Phi_sharp"], "$.Phi_sharp")
    if "V" in rec:
        V = _symbol_field(rec["V"], "$.V")
    else:
        V = thematic_complete_2(_symbol_field(rec["v"], "$.v"))
    if "W" in rec:
        W = _symbol_field(rec["W"], "$.W")
    else:
        W = thematic_complete_2(_symbol_field(rec["w"], "$.w")).T
    Phi, b = build_badly_approximable_matrix(Delta, Phi_sharp, V, W)
    res = {"symbol": Phi.to_json_dict(tol=1e-15), "bundle": b.to_json_dict(),
           "lp_norm": lp_norm(Phi, cfg.p)}
    _emit(args, cfg, res, "ok")
    return EXIT_OK


def cmd_weird_demo(args, cfg: RunConfig) -> int:
    ex = ExponentTriple(cfg.p)
    recipe = construct_weird_U(default_recipe(), N=cfg.grid or 1024)
    opts = cfg.solver_options(tol_gap=WEIRD_TOL, degrees=(16, 32, 64))
    bad = badly_approximable_evidence(recipe, ex, opts)
    tol_match = cfg.tol_match if cfg.tol_match is not None else SolverOptions().tol_match
    ev = weirdness_evidence(recipe.U, ex, sweep=opts.degrees, restarts=opts.restarts,
                            seed=cfg.seed, tol_gap=opts.tol_gap, tol_match=tol_match,
                            distance=bad.distance, threads=opts.threads)
    verdict = ev.verdict if bad.status == "badly-approximable" else "inconclusive"
    res = {"recipe": recipe.to_json_dict(), "residuals": recipe.diagnostics,
           "badly_approximable": bad.to_json_dict(), "weirdness": ev.to_json_dict(),
           "verdict": verdict}
    _emit(args, cfg, res, verdict, ev.plateau_table())
    return EXIT_INCONCLUSIVE if verdict == "inconclusive" else EXIT_OK


def cmd_superopt(args, cfg: RunConfig) -> int:
    Phi = symbol_arg(args.symbol)
    rep = superoptimal_2x2(Phi, ExponentTriple(cfg.p), cfg.solver_options(), tol_flat=cfg.tol_flat)
    res = rep.to_json_dict()
    if rep.reduced is not None and rep.gender_used == 1:
        res["uniqueness_probe"] = uniqueness_probe(rep, Phi, seed=cfg.seed).to_json_dict()
    status = "ok" if rep.ok else "inconclusive"
    N = rep.profiles.shape[0]
    _emit(args, cfg, res, status,
          _node_rows(N, **{f"ratio_{j}": rep.profiles[:, j] for j in range(rep.profiles.shape[1])}))
    return EXIT_OK if rep.ok else EXIT_INCONCLUSIVE


def cmd_factor(args, cfg: RunConfig) -> int:
    S = symbol_arg(args.symbol)
    ex = ExponentTriple(cfg.p)
    kind = args.kind
    if kind == "spectral":
        P, d = spectral_factor(S, return_diagnostics=True)
        res = {"factor": P.to_json_dict(tol=1e-15), "diagnostics": asdict(d)}
        status = "ok" if d.converged else "inconclusive"
    elif kind == "sarason":
        pair = sarason_factor(S)
        N = CircleGrid.at_least(max(512, 8 * S.degree + 8)).N
        res = {"Q": pair.Q.to_json_dict(tol=1e-15), "R": pair.R.to_json_dict(tol=1e-15),
               "residuals": sarason_residuals(S, pair, N)}
        status = "ok"
    elif kind == "fg":
        fg = fg_factor(S, ex)
        res = {"F": fg.F.to_json_dict(tol=1e-15), "G": fg.G.to_json_dict(tol=1e-15),
               "norm_psi": fg.norm_psi, "norm_F": fg.norm_F, "norm_G": fg.norm_G,
               "residual": fg.residual, "product_defect": fg.product_defect, "route": fg.route}
        status = "ok"
    elif kind == "rank1":
        f, g = rank_one_factor(S, ex)
        N = CircleGrid.at_least(max(512, 8 * S.degree + 8)).N
        resid = float(np.max(np.abs(S.samples(N) - f.samples(N) @ g.T.samples(N))))
        res = {"f": f.to_json_dict(tol=1e-15), "g": g.to_json_dict(tol=1e-15), "residual": resid}
        status = "ok"
    else:
        V = thematic_complete_2(S)
        res = {"V": V.to_json_dict(tol=1e-15), "unitarity_defect": unitarity_defect(V)}
        status = "ok"
    _emit(args, cfg, res, status)
    return EXIT_OK if status == "ok" else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _degrees(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, default=4.0, help="exponent p >= 2")
    common.add_argument("--grid", type=int, default=None, help="grid size (power of two)")
    common.add_argument("--degrees", type=_degrees, default=None, help="comma-separated degree ladder")
    common.add_argument("--restarts", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-gap", type=float, default=None)
    common.add_argument("--tol-match", type=float, default=None)
    common.add_argument("--tol-flat", type=float, default=1e-2)
    common.add_argument("--out", default=None, help="write the JSON result here")
    common.add_argument("--csv", default=None, help="write profile or plateau rows as CSV")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="lpnehari",
                                 description="Best analytic L^p approximation on the circle")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("dist", cmd_dist), ("respectable", cmd_respectable), ("order", cmd_order),
                     ("superopt", cmd_superopt)):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--symbol", required=True, help="symbol JSON file or scalar literal")
        if name == "order":
            sp.add_argument("--gender", action="store_true", help="also estimate the gender")
        sp.set_defaults(func=fn)

    gen = sub.add_parser("generate")
    gsub = gen.add_subparsers(dest="kind", required=True)
    bs = gsub.add_parser("bad-scalar", parents=[common])
    bs.add_argument("--inner-zeros", default="[]", help="JSON list of Blaschke zeros")
    bs.add_argument("--outer-h", required=True, help="outer polynomial literal, e.g. 1+0.5z")
    bs.set_defaults(func=cmd_generate)
    bm = gsub.add_parser("bad-matrix", parents=[common])
    bm.add_argument("--recipe", required=True,
                    help="JSON with Delta, Phi_sharp and V/W (or columns v/w)")
    bm.set_defaults(func=cmd_generate)

    wd = sub.add_parser("weird-demo", parents=[common])
    wd.set_defaults(func=cmd_weird_demo)

    fac = sub.add_parser("factor")
    fsub = fac.add_subparsers(dest="kind", required=True)
    for kind in ("spectral", "sarason", "fg", "rank1", "thematic2"):
        fp = fsub.add_parser(kind, parents=[common])
        fp.add_argument("--symbol", required=True, help="symbol JSON file or scalar literal")
        fp.set_defaults(func=cmd_factor)
    return ap


def _command_name(args) -> str:
    kind = getattr(args, "kind", None)
    return f"{args.command} {kind}" if kind else args.command


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.grid is not None and (args.grid < 2 or args.grid & (args.grid - 1)):
            raise ValueError(f"--grid must be a power of two, got {args.grid}")
        if not args.p >= 2:
            raise ValueError(f"--p must be >= 2, got {args.p}")
        opts = {k: v for k, v in vars(args).items()
                if k in ("symbol", "inner_zeros", "outer_h", "recipe", "gender")}
        cfg = RunConfig(_command_name(args), args.p, args.grid, args.degrees, args.restarts,
                        args.seed, args.tol_gap, args.tol_match, args.tol_flat, opts)
        return args.func(args, cfg)
    except (SymbolSchemaError, FactorizationError, ValueError, OSError, KeyError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
